"""Hong-Ou-Mandel interference: two-photon coincidence, delay scans,
visibility and dip-width extraction.

The beam-splitter coincidence density is

    G2(tau; dt) = | [phi_si(dt + tau) - phi_is(dt - tau)] / 2 |^2

with both time-domain wave functions transformed with the common e^{-i w tau}
kernel and the mean pair delay T0/2 removed, so scans center near zero path
difference.  The scan reports the integrated coincidence versus the photon
arrival-time difference delta = 2*dt:

    C(delta) = (S_si + S_is)/4 - Re X(delta) / 2,
    X(delta) = (1/2pi) int Psi_si(w) Psi_is*(-w) e^{-i w (delta + T0)} dw,

evaluated by Fourier products in one pass over the whole delay axis.  The
path-difference axis is c0 * delta, which makes the lossless L1 = 0 dip
width equal to the wave-packet length dng * L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import C0, CrystalConfig, DetuningGrid, GridError, validate_config
from .biphoton import BiphotonSpectrum, spectrum, ft_time

DEFAULT_N_DELAYS = 201
DEFAULT_SPAN_DURATIONS = 4.0  # scan reach in units of the wave-packet duration
MIN_N_DELAYS = 41
MIN_DIP_VISIBILITY = 0.05


class ScanError(ValueError):
    """Raised when a scan cannot support the requested extraction."""


@dataclass(frozen=True)
class HomScan:
    delays: np.ndarray            # arrival-time difference delta, s
    path_difference: np.ndarray   # c0 * delta, m
    coincidence: np.ndarray       # integrated coincidence rate per delay
    visibility: float
    fwhm_path: float              # m; nan when there is no usable dip


def _centered_time_functions(config: CrystalConfig, grid: DetuningGrid,
                             nodes_per_segment=None):
    """(phi_si(t), phi_is(t)) on grid.tau, mean delay T0/2 removed."""
    config = validate_config(config)
    spec = spectrum(config, grid, nodes_per_segment)
    shift = np.exp(-1j * grid.omega * (0.5 * config.t0))
    f_si = ft_time(grid, spec.phi_si * shift, sign=-1)
    f_is = ft_time(grid, spec.phi_is * shift, sign=-1)
    return f_si, f_is, spec


def _interp_complex(x, xs, ys):
    return np.interp(x, xs, ys.real) + 1j * np.interp(x, xs, ys.imag)


def hom_g2(config: CrystalConfig, grid: DetuningGrid, dt: float, tau,
           nodes_per_segment=None):
    """Coincidence density G2(tau; dt) at beam-splitter delay dt.

    tau may be scalar or array.  dt is the Eq.-(6) delay: half the
    arrival-time difference of the scan axis.
    """
    f_si, f_is, _ = _centered_time_functions(config, grid, nodes_per_segment)
    tau = np.asarray(tau, dtype=float)
    t_max = grid.tau[-1]
    a = dt + tau
    b = dt - tau
    if np.any(np.abs(a) > t_max) or np.any(np.abs(b) > t_max):
        raise GridError(
            "dt +/- tau falls outside the representable time window; "
            "use a larger grid (more points)"
        )
    amp = 0.5 * (_interp_complex(a, grid.tau, f_si) - _interp_complex(b, grid.tau, f_is))
    return np.abs(amp) ** 2


def cross_term(spec: BiphotonSpectrum, t0: float, delays) -> np.ndarray:
    """X(delta) by direct Fourier products at the requested delays."""
    grid = spec.grid
    delays = np.asarray(delays, dtype=float)
    product = spec.phi_si * np.conj(_reflect(spec.phi_is))  # Psi_si(w) Psi_is*(-w)
    phase = np.exp(-1j * np.outer(delays + t0, grid.omega))
    return (phase @ product) * (grid.spacing / (2.0 * np.pi))


def _reflect(values: np.ndarray) -> np.ndarray:
    """values evaluated at -omega on the symmetric grid (endpoint kept)."""
    out = np.empty_like(values)
    out[1:] = values[1:][::-1]
    out[0] = values[0]  # lone endpoint -omega_max; pairs with itself
    return out


def hom_scan(config: CrystalConfig, grid: DetuningGrid,
             delay_range: tuple[float, float] | None = None,
             n_delays: int = DEFAULT_N_DELAYS,
             nodes_per_segment=None) -> HomScan:
    """Integrated coincidence versus arrival-time difference.

    delay_range defaults to +/- DEFAULT_SPAN_DURATIONS * T0, symmetric about
    zero.  n_delays must be >= MIN_N_DELAYS.
    """
    config = validate_config(config)
    t0 = config.t0
    if delay_range is None:
        delay_range = (-DEFAULT_SPAN_DURATIONS * t0, DEFAULT_SPAN_DURATIONS * t0)
    lo, hi = delay_range
    if not np.isclose(lo, -hi) or hi <= 0:
        raise ScanError(f"delay range must be symmetric about 0, got {delay_range}")
    if n_delays < MIN_N_DELAYS:
        raise ScanError(f"need at least {MIN_N_DELAYS} delays, got {n_delays}")
    if hi + t0 > grid.tau[-1]:
        raise GridError(
            f"delay range +/-{hi:.3g} s exceeds the representable time window; "
            "use a larger grid"
        )
    spec = spectrum(config, grid, nodes_per_segment)
    s_si = float(np.sum(np.abs(spec.phi_si) ** 2) * grid.spacing / (2.0 * np.pi))
    s_is = float(np.sum(np.abs(spec.phi_is) ** 2) * grid.spacing / (2.0 * np.pi))
    delays = np.linspace(lo, hi, n_delays)
    x = cross_term(spec, t0, delays)
    coincidence = 0.25 * (s_si + s_is) - 0.5 * np.real(x)
    coincidence = np.maximum(coincidence, 0.0)
    vis = visibility_from_arrays(delays, coincidence)
    try:
        fw = fwhm_from_arrays(delays, coincidence)
    except ScanError:
        fw = float("nan")
    return HomScan(delays, C0 * delays, coincidence, vis, fw)


# ---------------------------------------------------------------------------
# Extraction: baseline, visibility, dip width.
# ---------------------------------------------------------------------------

def _baseline(coincidence: np.ndarray) -> float:
    k = max(1, len(coincidence) // 10)
    return 0.5 * (float(np.median(coincidence[:k])) + float(np.median(coincidence[-k:])))


def _refined_min(coincidence: np.ndarray) -> tuple[float, float]:
    """(index_float, value) of the minimum after 3-point parabolic refinement."""
    i = int(np.argmin(coincidence))
    if i == 0 or i == len(coincidence) - 1:
        return float(i), float(coincidence[i])
    y0, y1, y2 = (float(coincidence[i - 1]), float(coincidence[i]), float(coincidence[i + 1]))
    denom = y0 - 2.0 * y1 + y2
    if denom <= 0:
        return float(i), y1
    return i + 0.5 * (y0 - y2) / denom, y1 - (y0 - y2) ** 2 / (8.0 * denom)


def visibility_from_arrays(delays: np.ndarray, coincidence: np.ndarray) -> float:
    base = _baseline(coincidence)
    if base <= 0:
        raise ScanError("scan baseline is non-positive")
    imin = int(np.argmin(coincidence))
    edge = max(1, len(coincidence) // 10)
    if imin < edge or imin >= len(coincidence) - edge:
        raise ScanError("dip minimum sits in the baseline region; widen the scan")
    _, cmin = _refined_min(coincidence)
    return max(0.0, (base - cmin) / base)


def visibility(scan: HomScan) -> float:
    """(baseline - min)/baseline with the spec's baseline and refinement rules."""
    return visibility_from_arrays(scan.delays, scan.coincidence)


def fwhm_from_arrays(delays: np.ndarray, coincidence: np.ndarray) -> float:
    """Full width (in path difference, m) at half depth of the dip."""
    base = _baseline(coincidence)
    if base <= 0:
        raise ScanError("scan baseline is non-positive")
    _, cmin = _refined_min(coincidence)
    v = (base - cmin) / base
    if v <= MIN_DIP_VISIBILITY:
        raise ScanError(f"no usable dip (visibility {v:.3g} <= {MIN_DIP_VISIBILITY})")
    half = 0.5 * (base + cmin)
    imin = int(np.argmin(coincidence))
    left = None
    for i in range(imin, 0, -1):
        if coincidence[i - 1] >= half >= coincidence[i]:
            frac = (half - coincidence[i]) / (coincidence[i - 1] - coincidence[i])
            left = delays[i] + frac * (delays[i - 1] - delays[i])
            break
    right = None
    for i in range(imin, len(coincidence) - 1):
        if coincidence[i + 1] >= half >= coincidence[i]:
            frac = (half - coincidence[i]) / (coincidence[i + 1] - coincidence[i])
            right = delays[i] + frac * (delays[i + 1] - delays[i])
            break
    if left is None or right is None:
        raise ScanError("half-depth level is not crossed on both sides of the dip")
    return C0 * float(right - left)


def fwhm(scan: HomScan) -> float:
    """Dip width at half depth, reported as free-space path difference."""
    return fwhm_from_arrays(scan.delays, scan.coincidence)


def asymmetry_signature(scan: HomScan) -> tuple[float, float]:
    """Second finite differences of the coincidence at the half-depth
    crossings (left flank, right flank).

    The Langevin-regime signature is (positive, negative): the dip curves
    upward on the early-delay flank and downward on the late-delay flank.
    """
    c = scan.coincidence
    d = scan.delays
    base = _baseline(c)
    _, cmin = _refined_min(c)
    half = 0.5 * (base + cmin)
    imin = int(np.argmin(c))
    i_left = imin
    for i in range(imin, 0, -1):
        if c[i] >= half:
            i_left = i
            break
    i_right = imin
    for i in range(imin, len(c) - 1):
        if c[i] >= half:
            i_right = i
            break
    def second_diff(i):
        i = min(max(i, 1), len(c) - 2)
        return float(c[i - 1] - 2.0 * c[i] + c[i + 1])
    return second_diff(i_left), second_diff(i_right)
