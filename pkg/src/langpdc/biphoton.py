"""Biphoton spectra, single-photon rates, and Glauber correlation functions.

Frequency-domain two-photon amplitudes on the signal detuning axis omega':

    phi_si(omega') = B*(omega') D(omega') + int_0^L F*(omega', z) H(omega', z) dz
    phi_is(omega') = A*(omega') C(omega') + int_0^L E*(omega', z) G(omega', z) dz

With Langevin disabled the z-integrals are dropped.  Time-domain wave
functions use the 1/(2 pi) forward convention phi(tau) = (1/2pi) int
phi(omega') e^{-i omega' tau} d omega'.  The idler-triggered correlation
G2_si(tau) transforms phi_si with that kernel; the signal-triggered one
evaluates phi_is in the idler-detuning frame, i.e. with kernel e^{+i omega'
tau}, which makes G2_si(tau) = G2_is(-tau) exact for uniform profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CrystalConfig, DetuningGrid, validate_config
from .transfer import coefficients, kernel_products


@dataclass(frozen=True)
class BiphotonSpectrum:
    grid: DetuningGrid
    phi_si: np.ndarray  # complex, per omega'
    phi_is: np.ndarray
    langevin_enabled: bool


@dataclass(frozen=True)
class CorrelationFunction:
    time_grid: np.ndarray  # tau, s
    values: np.ndarray     # G2(tau) = |phi(tau)|^2 (+ floor), 1/s^2
    accidental_floor: float


def spectrum(config: CrystalConfig, grid: DetuningGrid,
             nodes_per_segment=None) -> BiphotonSpectrum:
    """Both biphoton wave functions over the detuning grid."""
    config = validate_config(config)
    omega = grid.omega
    co = coefficients(config, omega)
    phi_si = np.conj(co.B) * co.D
    phi_is = np.conj(co.A) * co.C
    if config.langevin_enabled:
        fh, eg, _, _, _, _ = kernel_products(config, omega, nodes_per_segment)
        phi_si = phi_si + fh
        phi_is = phi_is + eg
    return BiphotonSpectrum(grid, phi_si, phi_is, config.langevin_enabled)


def rates(config: CrystalConfig, grid: DetuningGrid,
          nodes_per_segment=None) -> tuple[float, float]:
    """Single-photon count rates (R_s, R_i) by grid quadrature.

    R_s = (1/2pi) int d omega' (|B|^2 + int |F|^2 dz'); idem R_i with C, G.
    The Langevin toggle removes the |F|^2, |G|^2 terms.
    """
    config = validate_config(config)
    omega = grid.omega
    co = coefficients(config, omega)
    bs = np.abs(co.B) ** 2
    cs = np.abs(co.C) ** 2
    if config.langevin_enabled:
        _, _, f2, g2, _, _ = kernel_products(config, omega, nodes_per_segment)
        bs = bs + f2
        cs = cs + g2
    scale = grid.spacing / (2.0 * np.pi)
    return float(np.sum(bs) * scale), float(np.sum(cs) * scale)


def ft_time(grid: DetuningGrid, values: np.ndarray, sign: int = -1) -> np.ndarray:
    """(1/2pi) int values(w) e^{sign * i w tau} dw on the conjugate time grid.

    Index mapping (bit-exact): with w_k = (k - n/2) dw and tau_j =
    (j - n/2) dt, dt = 2pi/(n dw),

        phi(tau_j) = (dw/2pi) * (-1)^(j - n/2) * FFT_j[ values_k (-1)^k ]

    for sign = -1 (numpy forward FFT), and n * IFFT for sign = +1.
    """
    n = grid.n_points
    k = np.arange(n)
    alt = np.where(k % 2 == 0, 1.0, -1.0)  # (-1)^k
    pre = values * alt
    ft = np.fft.fft(pre) if sign == -1 else np.fft.ifft(pre) * n
    j = np.arange(n)
    post = np.where((j - n // 2) % 2 == 0, 1.0, -1.0)  # (-1)^(j - n/2)
    return (grid.spacing / (2.0 * np.pi)) * post * ft


def time_domain(spec: BiphotonSpectrum, which: str) -> np.ndarray:
    """phi_ab(tau_j) on the grid's conjugate time axis.

    which = "si": (1/2pi) int phi_si(w) e^{-i w tau} dw.
    which = "is": (1/2pi) int phi_is(w) e^{+i w tau} dw (idler-frame kernel,
    so that the signal-triggered wave packet is the time reverse of the
    idler-triggered one).
    """
    if which not in ("si", "is"):
        raise ValueError("which must be 'si' or 'is'")
    if which == "si":
        return ft_time(spec.grid, spec.phi_si, sign=-1)
    return ft_time(spec.grid, spec.phi_is, sign=+1)


def correlation(config: CrystalConfig, grid: DetuningGrid, trigger: str = "idler",
                nodes_per_segment=None) -> CorrelationFunction:
    """Glauber correlation function G2(tau) for the chosen trigger photon.

    trigger = "idler" gives G2_si (signal arrival relative to the idler
    trigger); trigger = "signal" gives G2_is.  tau = 0 marks the trigger.
    """
    if trigger not in ("idler", "signal"):
        raise ValueError("trigger must be 'idler' or 'signal'")
    config = validate_config(config)
    spec = spectrum(config, grid, nodes_per_segment)
    phi_t = time_domain(spec, "si" if trigger == "idler" else "is")
    values = np.abs(phi_t) ** 2
    floor = 0.0
    if config.include_accidentals:
        r_s, r_i = rates(config, grid, nodes_per_segment)
        floor = r_s * r_i
        values = values + floor
    return CorrelationFunction(grid.tau, values, floor)


def parseval_defect(spec: BiphotonSpectrum, which: str = "si") -> float:
    """Relative mismatch of sum |phi(tau)|^2 dtau vs (1/2pi) int |phi(w)|^2 dw."""
    grid = spec.grid
    phi_t = time_domain(spec, which)
    lhs = float(np.sum(np.abs(phi_t) ** 2) * grid.dt)
    phi_w = spec.phi_si if which == "si" else spec.phi_is
    rhs = float(np.sum(np.abs(phi_w) ** 2) * grid.spacing / (2.0 * np.pi))
    return abs(lhs - rhs) / rhs if rhs else 0.0
