"""Variational drift bounds on -log Z_n.

For a time-constant deterministic drift profile v the shift map S applies
(1+|k|^{2a})^{-1/2} 1_{|k|<=n} mode-wise, U = S v, and the objective

    J(v) = int [ sum_j abar_{j,n} n^{-(2j-4)(1-a)} U^{2j} - U^2/2 ] dx
           + (1/2) int ||v||_{L^2}^2

equals the expected shifted potential plus drift energy: the Wick powers of
the free field average out against a deterministic shift, leaving plain
powers of U.  Every feasible drift certifies J(v) >= -log Z_n, so gradient
descent returns rigorous upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    SpectralField,
    Lattice,
    TORUS_AREA,
    coeffs_to_grid,
    grid_to_coeffs,
    k_norm_grid,
    pad_coeffs,
    smallest_odd_at_least,
)
from .gibbs import even_moments
from .renorm import RenormTable


@dataclass(frozen=True)
class DriftProfile:
    """Time-constant spatial drift, stored as Hermitian mode coefficients."""

    band: int
    mode_coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.mode_coeffs, dtype=complex)
        size = 2 * self.band + 1
        if coeffs.shape != (size, size):
            raise ValueError(f"mode_coeffs must have shape ({size}, {size})")
        defect = np.max(np.abs(coeffs - np.conj(coeffs[::-1, ::-1])))
        if defect > 1e-10 * (1.0 + np.max(np.abs(coeffs))):
            raise ValueError("drift modes must be Hermitian (real drift)")
        object.__setattr__(self, "mode_coeffs", coeffs)

    @classmethod
    def zero(cls, band: int) -> "DriftProfile":
        size = 2 * band + 1
        return cls(band, np.zeros((size, size), dtype=complex))

    @classmethod
    def constant(cls, band: int, value: float) -> "DriftProfile":
        out = cls.zero(band)
        out.mode_coeffs[band, band] = value
        return out

    def energy(self) -> float:
        """int_0^1 ||v||_{L^2}^2 dt = 4 pi^2 sum_k |v_k|^2."""
        return TORUS_AREA * float(np.sum(np.abs(self.mode_coeffs) ** 2))


def default_drift_band(n: int) -> int:
    """Drift modes kept in the optimization: |k| <= min(n, 8)."""
    return min(n, 8)


def _shift_symbol(band: int, cutoff: int, alpha: float) -> np.ndarray:
    absk = k_norm_grid(band)
    sym = (1.0 + absk ** (2.0 * alpha)) ** (-0.5)
    return np.where(absk <= cutoff, sym, 0.0)


def shifted_field(drift: DriftProfile, lattice: Lattice) -> SpectralField:
    """U = S v: mode-wise (1+|k|^{2a})^{-1/2} inside the cutoff ball."""
    sym = _shift_symbol(drift.band, lattice.cutoff_n, lattice.alpha)
    return SpectralField(lattice, drift.mode_coeffs * sym)


def cameron_martin_ratio(drift: DriftProfile, lattice: Lattice) -> float:
    """||S v||_{H^alpha}^2 / int ||v||^2; equals 1 on ball-supported drifts."""
    energy = drift.energy()
    if energy == 0.0:
        return 0.0
    u = shifted_field(drift, lattice)
    weight = (1.0 + k_norm_grid(u.band) ** (2.0 * lattice.alpha))
    h_alpha_sq = TORUS_AREA * float(np.sum(weight * np.abs(u.coeffs) ** 2))
    return h_alpha_sq / energy


def _quad_grid_m(table: RenormTable, band: int) -> int:
    return smallest_odd_at_least(table.spec.degree_2m * band + 1)


def _shifted_grid(drift: DriftProfile, table: RenormTable) -> np.ndarray:
    sym = _shift_symbol(drift.band, table.n, table.alpha)
    return coeffs_to_grid(drift.mode_coeffs * sym,
                          _quad_grid_m(table, drift.band))


def objective(drift: DriftProfile, table: RenormTable) -> float:
    """Closed-form drift bound J(v) >= -log Z_n (exact quadrature)."""
    u = _shifted_grid(drift, table)
    moments = even_moments(u, table.spec.m)
    couplings = table.couplings()
    pot = float(sum(couplings[j] * moments[j] for j in range(1, len(couplings)))
                - 0.5 * moments[1])
    return pot + 0.5 * drift.energy()


def objective_grad(drift: DriftProfile, table: RenormTable) -> np.ndarray:
    """Mode-wise gradient G with dJ = 4 pi^2 Re sum_k conj(G_k) h_k.

    G_k = s_k * Fourier(F'(U))(k) + v_k with F the pointwise potential
    density; the array is Hermitian, so v -> v - eta G stays a real drift.
    """
    sym = _shift_symbol(drift.band, table.n, table.alpha)
    u = coeffs_to_grid(drift.mode_coeffs * sym, _quad_grid_m(table, drift.band))
    couplings = table.couplings()
    p = -u
    for j in range(1, len(couplings)):
        p = p + 2 * j * couplings[j] * u ** (2 * j - 1)
    p_hat = grid_to_coeffs(p, drift.band)
    return sym * p_hat + drift.mode_coeffs


def grad_norm(grad: np.ndarray) -> float:
    return float(np.sqrt(TORUS_AREA * np.sum(np.abs(grad) ** 2)))


@dataclass(frozen=True)
class MinimizeResult:
    drift: DriftProfile
    objective: float
    iterations: int
    converged: bool
    trace: tuple = field(repr=False, default=())


def minimize(table: RenormTable, init: DriftProfile,
             max_iter: int = 500, grad_tol: float = 1e-8,
             armijo_c: float = 1e-4, shrink: float = 0.5,
             step0: float = 1.0) -> MinimizeResult:
    """Gradient descent with Armijo backtracking over drift profiles.

    Any returned drift certifies objective(drift) >= -log Z_n; on hitting
    max_iter the best-so-far point is returned with converged=False.
    """
    v = init.mode_coeffs.copy()
    band = init.band
    obj = objective(DriftProfile(band, v), table)
    trace = []
    step = step0
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        g = objective_grad(DriftProfile(band, v), table)
        gn = grad_norm(g)
        trace.append((it - 1, obj, gn, step))
        if gn <= grad_tol:
            converged = True
            break
        decrease = TORUS_AREA * float(np.sum(np.abs(g) ** 2))
        step = min(step * 2.0, step0)
        accepted = False
        for _ in range(60):
            cand = v - step * g
            cand_obj = objective(DriftProfile(band, cand), table)
            if cand_obj <= obj - armijo_c * step * decrease:
                v, obj = cand, cand_obj
                accepted = True
                break
            step *= shrink
        if not accepted:
            converged = True  # no descent direction at float resolution
            break
    trace.append((it, obj, grad_norm(objective_grad(DriftProfile(band, v), table)), step))
    return MinimizeResult(DriftProfile(band, v), obj, it, converged, tuple(trace))
