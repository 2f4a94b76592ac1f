"""Domain types, units, grids and configuration validation.

Everything is SI: lengths in m, absorption in 1/m (amplitude coefficients),
angular frequencies in rad/s, times in s.  The detuning grid holds the
signal-side detuning omega' about degeneracy; the idler sits at -omega'.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

C0 = 299792458.0  # vacuum speed of light, m/s

# Defaults calibrated so the lossless wave-packet length c0*T0 = dng*L is
# 0.78 mm at L = 2 cm (Fig. 3 geometry).
DEFAULT_DNG = 0.039
DEFAULT_KAPPA = 1.0  # 1/m, low gain; normalized shapes are kappa-independent
DEFAULT_DEGENERATE_WAVELENGTH = 1.560e-6  # m

MAX_SEGMENTS = 64
MIN_GRID_POINTS = 16
LOW_GAIN_BOUND = 0.3  # |kappa| * L must stay below this

# span = SPAN_LOBES * (2 pi / T0): 120 sinc lobes covered (>= 40 required)
# and 120 time samples across T0 (>= 100 required).
SPAN_LOBES = 120
MIN_WINDOW_T0 = 12.0  # time window must hold at least this many T0


class ConfigError(ValueError):
    """Raised when a configuration violates a model invariant."""


class GridError(ValueError):
    """Raised when a detuning grid cannot satisfy its resolution contract."""


@dataclass(frozen=True)
class DetuningGrid:
    """Symmetric detuning grid omega'_k = (k - n/2) * spacing, k = 0..n-1."""

    n_points: int
    spacing: float  # rad/s

    def __post_init__(self):
        if self.n_points < MIN_GRID_POINTS or self.n_points % 2 != 0:
            raise GridError(
                f"n_points must be even and >= {MIN_GRID_POINTS}, got {self.n_points}"
            )
        if not (self.spacing > 0):
            raise GridError(f"spacing must be positive, got {self.spacing}")

    @property
    def omega(self) -> np.ndarray:
        k = np.arange(self.n_points)
        return (k - self.n_points // 2) * self.spacing

    @property
    def span(self) -> float:
        return self.n_points * self.spacing

    @property
    def dt(self) -> float:
        """Conjugate time-grid step 2*pi/(n*spacing)."""
        return 2.0 * np.pi / self.span

    @property
    def tau(self) -> np.ndarray:
        """Conjugate time grid tau_j = (j - n/2) * dt, same length."""
        j = np.arange(self.n_points)
        return (j - self.n_points // 2) * self.dt


@dataclass(frozen=True)
class LossSegment:
    z_start: float
    z_end: float
    alpha_s: float  # amplitude absorption of the signal, 1/m
    alpha_i: float  # amplitude absorption of the idler, 1/m

    def __post_init__(self):
        if not (0.0 <= self.z_start < self.z_end):
            raise ConfigError(
                f"segment must satisfy 0 <= z_start < z_end, got [{self.z_start}, {self.z_end}]"
            )
        if self.alpha_s < 0 or self.alpha_i < 0:
            raise ConfigError("absorption coefficients must be non-negative")

    @property
    def length(self) -> float:
        return self.z_end - self.z_start


@dataclass(frozen=True)
class LossProfile:
    segments: tuple[LossSegment, ...]

    def __post_init__(self):
        if len(self.segments) == 0:
            raise ConfigError("loss profile needs at least one segment")
        if len(self.segments) > MAX_SEGMENTS:
            raise ConfigError(f"at most {MAX_SEGMENTS} segments supported")

    @staticmethod
    def uniform(length: float, alpha_s: float, alpha_i: float) -> "LossProfile":
        return LossProfile((LossSegment(0.0, length, alpha_s, alpha_i),))

    @staticmethod
    def lossless(length: float) -> "LossProfile":
        return LossProfile.uniform(length, 0.0, 0.0)

    def sorted(self) -> "LossProfile":
        return LossProfile(tuple(sorted(self.segments, key=lambda s: s.z_start)))

    def check_tiling(self, length: float, tol: float = 1e-12):
        segs = self.sorted().segments
        if abs(segs[0].z_start) > tol * max(length, 1.0):
            raise ConfigError("loss profile must start at z = 0")
        for a, b in zip(segs, segs[1:]):
            gap = b.z_start - a.z_end
            if abs(gap) > tol * max(length, 1.0):
                kind = "gap" if gap > 0 else "overlap"
                raise ConfigError(
                    f"loss profile has a {kind} at z = {a.z_end}: segments must tile [0, L]"
                )
        if abs(segs[-1].z_end - length) > tol * max(length, 1.0):
            raise ConfigError(
                f"loss profile ends at {segs[-1].z_end} m but the crystal is {length} m long"
            )

    def segment_at(self, z: float) -> LossSegment:
        """Segment containing z (right-open intervals; z = L maps to the last)."""
        segs = self.sorted().segments
        for s in segs:
            if s.z_start <= z < s.z_end:
                return s
        if z >= segs[-1].z_end:
            return segs[-1]
        return segs[0]


@dataclass(frozen=True)
class DispersionModel:
    """Phase mismatch Delta_k(omega') = sum_n c_n * omega'^n, no constant term.

    c_1 defaults to +dng/c0 so that the idler-triggered wave packet decays
    toward later tau, matching the reported waveform orientation.
    """

    coefficients: tuple[float, ...] = (DEFAULT_DNG / C0,)

    def __post_init__(self):
        if len(self.coefficients) == 0:
            raise ConfigError("dispersion model needs at least the linear coefficient")
        if self.coefficients[0] == 0.0:
            raise ConfigError("linear dispersion coefficient c_1 must be nonzero")

    @staticmethod
    def linear(dng: float = DEFAULT_DNG) -> "DispersionModel":
        if dng <= 0:
            raise ConfigError("group-index mismatch dng must be positive")
        return DispersionModel((dng / C0,))

    @property
    def dng(self) -> float:
        """|group-index mismatch| implied by the linear term."""
        return abs(self.coefficients[0]) * C0

    def delta_k(self, omega):
        """Delta_k(omega'), vectorized."""
        omega = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega)
        for n, c in enumerate(self.coefficients, start=1):
            if c != 0.0:
                out = out + c * omega**n
        return out


@dataclass(frozen=True)
class CrystalConfig:
    length: float  # m
    kappa: complex = DEFAULT_KAPPA  # 1/m
    loss: LossProfile | None = None
    dispersion: DispersionModel = field(default_factory=DispersionModel)
    langevin_enabled: bool = True
    include_accidentals: bool = False
    degenerate_wavelength: float = DEFAULT_DEGENERATE_WAVELENGTH

    def __post_init__(self):
        if self.loss is None:
            object.__setattr__(self, "loss", LossProfile.lossless(self.length))

    @property
    def t0(self) -> float:
        """Lossless biphoton duration T0 = dng * L / c0."""
        return self.dispersion.dng * self.length / C0

    def with_langevin(self, enabled: bool) -> "CrystalConfig":
        return replace(self, langevin_enabled=enabled)


def validate_config(config: CrystalConfig) -> CrystalConfig:
    """Check all invariants; returns the config with segments canonically ordered.

    Idempotent: validate(validate(c)) == validate(c).
    """
    if not (config.length > 0):
        raise ConfigError(f"crystal length must be positive, got {config.length}")
    kL = abs(config.kappa) * config.length
    if kL >= LOW_GAIN_BOUND:
        raise ConfigError(
            f"|kappa|*L = {kL:.3g} is outside the low-gain regime (must be < {LOW_GAIN_BOUND})"
        )
    if not (config.degenerate_wavelength > 0):
        raise ConfigError("degenerate wavelength must be positive")
    loss = config.loss.sorted()
    loss.check_tiling(config.length)
    _ = config.dispersion.delta_k(0.0)  # exercises the invariant checks
    return replace(config, loss=loss)


def build_grid(config: CrystalConfig, n_points: int) -> DetuningGrid:
    """Detuning grid sized for the config.

    Span = SPAN_LOBES sinc lobes of the lossless spectrum (2*pi/T0 each), so
    both spec constraints hold: >= 40 lobes covered, and the conjugate time
    step resolves T0 with SPAN_LOBES >= 100 samples.  Errors when the time
    window n*dt would hold fewer than MIN_WINDOW_T0 wave-packet durations.
    """
    config = validate_config(config)
    t0 = config.t0
    span = SPAN_LOBES * 2.0 * np.pi / t0
    if n_points < MIN_GRID_POINTS or n_points % 2 != 0:
        raise GridError(f"n_points must be even and >= {MIN_GRID_POINTS}, got {n_points}")
    window = n_points * 2.0 * np.pi / span  # = n * dt
    if window < MIN_WINDOW_T0 * t0:
        n_min = int(np.ceil(MIN_WINDOW_T0 * SPAN_LOBES))
        raise GridError(
            f"n_points = {n_points} leaves a time window of {window / t0:.1f} T0; "
            f"need >= {MIN_WINDOW_T0:.0f} T0 — use n_points >= {n_min}"
        )
    return DetuningGrid(n_points=n_points, spacing=span / n_points)


# ---------------------------------------------------------------------------
# Configuration files: flat key = value lines plus one `segment = z0 z1 as ai`
# line per loss segment.  Lines starting with # are comments.  Schema is
# documented in the README.
# ---------------------------------------------------------------------------

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def load_config(path: str | Path) -> CrystalConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    segments: list[LossSegment] = []
    disp: list[float] | None = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key == "segment":
            parts = value.split()
            if len(parts) != 4:
                raise ConfigError(
                    f"{path}:{lineno}: segment needs 'z_start z_end alpha_s alpha_i'"
                )
            z0, z1, a_s, a_i = (float(p) for p in parts)
            segments.append(LossSegment(z0, z1, a_s, a_i))
        elif key == "dispersion":
            disp = [float(p) for p in value.split()]
        else:
            raw[key] = value
    if "length" not in raw:
        raise ConfigError(f"{path}: missing required key 'length'")
    length = float(raw.pop("length"))

    kappa = complex(raw.pop("kappa", str(DEFAULT_KAPPA)).replace(" ", ""))
    langevin = _parse_bool(raw.pop("langevin", "true"), path)
    accidentals = _parse_bool(raw.pop("accidentals", "false"), path)
    wavelength = float(raw.pop("degenerate_wavelength", str(DEFAULT_DEGENERATE_WAVELENGTH)))
    if "dng" in raw:
        if disp is not None:
            raise ConfigError(f"{path}: give either 'dng' or 'dispersion', not both")
        dispersion = DispersionModel.linear(float(raw.pop("dng")))
    elif disp is not None:
        dispersion = DispersionModel(tuple(disp))
    else:
        dispersion = DispersionModel()
    if raw:
        raise ConfigError(f"{path}: unknown keys {sorted(raw)}")

    loss = LossProfile(tuple(segments)) if segments else LossProfile.lossless(length)
    config = CrystalConfig(
        length=length,
        kappa=kappa,
        loss=loss,
        dispersion=dispersion,
        langevin_enabled=langevin,
        include_accidentals=accidentals,
        degenerate_wavelength=wavelength,
    )
    return validate_config(config)


def _parse_bool(value: str, path) -> bool:
    try:
        return _BOOL[value.strip().lower()]
    except KeyError:
        raise ConfigError(f"{path}: expected a boolean, got {value!r}") from None


def dump_config(config: CrystalConfig) -> str:
    """Round-trippable text form of a config (same schema as load_config)."""
    lines = [
        f"length = {config.length!r}",
        f"kappa = {config.kappa.real!r}" if config.kappa.imag == 0
        else f"kappa = {config.kappa!r}".replace("(", "").replace(")", ""),
        f"langevin = {'true' if config.langevin_enabled else 'false'}",
        f"accidentals = {'true' if config.include_accidentals else 'false'}",
        f"degenerate_wavelength = {config.degenerate_wavelength!r}",
        "dispersion = " + " ".join(repr(c) for c in config.dispersion.coefficients),
    ]
    for s in config.loss.sorted().segments:
        lines.append(f"segment = {s.z_start!r} {s.z_end!r} {s.alpha_s!r} {s.alpha_i!r}")
    return "\n".join(lines) + "\n"
