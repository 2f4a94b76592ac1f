"""Independent brute-force validators for the transfer machinery.

A classical fixed-step fourth-order integrator for the fundamental-solution
matrix dX/dz = -M(z) X, the lossless closed-form parametric solution, and a
certification routine that cross-checks the fast paths against both.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .model import CrystalConfig, DetuningGrid, validate_config, dump_config
from .transfer import (
    Matrix2c,
    TransferCoefficients,
    build_m,
    commutator_defects,
    coefficients,
    expm2,
    propagator,
)


@dataclass(frozen=True)
class OracleReport:
    max_relative_error: float
    n_steps: int
    config_digest: str
    checks: tuple[tuple[str, float], ...] = ()
    tolerance: float = 1e-6
    worst: str | None = None

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance


def _rk4_step(m: Matrix2c, x: Matrix2c, h: float) -> Matrix2c:
    """One RK4 step of dX/dz = -M X (M constant across the step)."""
    def rhs(y: Matrix2c) -> Matrix2c:
        return Matrix2c(
            -(m.m11 * y.m11 + m.m12 * y.m21),
            -(m.m11 * y.m12 + m.m12 * y.m22),
            -(m.m21 * y.m11 + m.m22 * y.m21),
            -(m.m21 * y.m12 + m.m22 * y.m22),
        )

    def axpy(a: float, y: Matrix2c, x0: Matrix2c) -> Matrix2c:
        return Matrix2c(x0.m11 + a * y.m11, x0.m12 + a * y.m12,
                        x0.m21 + a * y.m21, x0.m22 + a * y.m22)

    k1 = rhs(x)
    k2 = rhs(axpy(0.5 * h, k1, x))
    k3 = rhs(axpy(0.5 * h, k2, x))
    k4 = rhs(axpy(h, k3, x))
    return Matrix2c(
        x.m11 + (h / 6.0) * (k1.m11 + 2 * k2.m11 + 2 * k3.m11 + k4.m11),
        x.m12 + (h / 6.0) * (k1.m12 + 2 * k2.m12 + 2 * k3.m12 + k4.m12),
        x.m21 + (h / 6.0) * (k1.m21 + 2 * k2.m21 + 2 * k3.m21 + k4.m21),
        x.m22 + (h / 6.0) * (k1.m22 + 2 * k2.m22 + 2 * k3.m22 + k4.m22),
    )


def ode_propagator(config: CrystalConfig, omega, z_from: float, z_to: float,
                   n_steps: int = 10_000) -> Matrix2c:
    """Fundamental solution X(z_to), X(z_from) = I, by fixed-step RK4.

    Steps are aligned to segment boundaries: each overlapped segment gets a
    share of n_steps proportional to its length (at least 2), so the
    integrand is smooth within every step.
    """
    if n_steps < 100:
        raise ValueError("oracle integration needs n_steps >= 100")
    config = validate_config(config)
    eps = 1e-12 * max(config.length, 1.0)
    if not (-eps <= z_from <= z_to <= config.length + eps):
        raise ValueError(f"positions out of range: [{z_from}, {z_to}]")
    omega = np.asarray(omega, dtype=float)
    x = Matrix2c.identity(np.zeros_like(omega, dtype=complex))
    total = z_to - z_from
    if total <= 0:
        return x
    for seg in config.loss.sorted().segments:
        lo = max(z_from, seg.z_start)
        hi = min(z_to, seg.z_end)
        if hi - lo <= 0:
            continue
        n = max(2, int(round(n_steps * (hi - lo) / total)))
        h = (hi - lo) / n
        m = build_m(config, omega, seg)
        for _ in range(n):
            x = _rk4_step(m, x, h)
    return x


def lossless_reference(kappa: complex, delta_k: float, length: float) -> TransferCoefficients:
    """Closed-form lossless parametric solution: entries of exp(-M L) with
    alpha_s = alpha_i = 0.

    With g = sqrt(|kappa|^2 - (dk/2)^2) (either branch; cosh and sinh(x)/x
    are even):

        A = cosh(gL) - i (dk/2g) sinh(gL)      B = (i kappa / g) sinh(gL)
        C = -(i kappa* / g) sinh(gL)           D = cosh(gL) + i (dk/2g) sinh(gL)

    The g -> 0 degenerate point uses the series limit sinh(gL)/g -> L.
    """
    kappa = complex(kappa)
    g2 = abs(kappa) ** 2 - (delta_k / 2.0) ** 2
    g = np.sqrt(complex(g2))
    x = g * length
    if abs(x) < 1e-6:
        sinc = length * (1.0 + x * x / 6.0 + x**4 / 120.0)
        cosh = 1.0 + x * x / 2.0 + x**4 / 24.0
    else:
        sinc = np.sinh(x) / g
        cosh = np.cosh(x)
    half = 0.5j * delta_k
    return TransferCoefficients(
        A=cosh - half * sinc,
        B=1j * kappa * sinc,
        C=-1j * np.conj(kappa) * sinc,
        D=cosh + half * sinc,
    )


def config_digest(config: CrystalConfig) -> str:
    return hashlib.sha256(dump_config(config).encode()).hexdigest()[:16]


def _rel_err(a: Matrix2c, b: Matrix2c) -> float:
    num = 0.0
    den = 0.0
    for attr in ("m11", "m12", "m21", "m22"):
        num = max(num, float(np.max(np.abs(getattr(a, attr) - getattr(b, attr)))))
        den = max(den, float(np.max(np.abs(getattr(b, attr)))))
    return num / den if den else num


def certify(config: CrystalConfig, grid: DetuningGrid, n_steps: int = 10_000,
            n_freqs: int = 17, tolerance: float = 1e-6) -> OracleReport:
    """Cross-check the fast paths against the brute-force integrators.

    Runs, over a subsampled frequency set: the two commutator identities,
    the matrix-exponential propagator against RK4, and (for lossless
    configs) the analytic closed form.  Failures are reported, not thrown.
    """
    config = validate_config(config)
    omega = grid.omega[:: max(1, grid.n_points // n_freqs)][:n_freqs]
    checks: list[tuple[str, float]] = []

    d1, d2 = commutator_defects(config, omega)
    checks.append(("commutator_signal", float(np.max(np.abs(d1)))))
    checks.append(("commutator_idler", float(np.max(np.abs(d2)))))

    fast = propagator(config, omega, 0.0, config.length)
    slow = ode_propagator(config, omega, 0.0, config.length, n_steps)
    checks.append(("propagator_vs_ode", _rel_err(fast, slow)))

    lossless = all(s.alpha_s == 0 and s.alpha_i == 0 for s in config.loss.segments)
    if lossless:
        worst = 0.0
        for w in omega:
            ref = lossless_reference(config.kappa,
                                     float(config.dispersion.delta_k(w)), config.length)
            got = coefficients(config, np.array([w]))
            err = max(
                abs(complex(got.A[0]) - complex(ref.A)),
                abs(complex(got.B[0]) - complex(ref.B)),
                abs(complex(got.C[0]) - complex(ref.C)),
                abs(complex(got.D[0]) - complex(ref.D)),
            )
            worst = max(worst, err)
        checks.append(("lossless_closed_form", worst))

    worst_name, worst_val = max(checks, key=lambda kv: kv[1])
    report = OracleReport(
        max_relative_error=worst_val,
        n_steps=n_steps,
        config_digest=config_digest(config),
        checks=tuple(checks),
    )
    object.__setattr__(report, "tolerance", tolerance)
    object.__setattr__(report, "worst", worst_name)
    return report
