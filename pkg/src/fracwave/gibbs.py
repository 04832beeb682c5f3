"""Potential integrals, partition-function Monte Carlo and counterexample bounds.

The renormalized potential at truncation n is

    V_n(phi)  = sum_{j=1}^m abar_{j,n} n^{-(2j-4)(1-a)} H_{2j}(phi; tilde_n)
    Vt_n(phi) = V_n(phi) - (phi^2 - tilde_n)/2,

with tilde_n the truncated pointwise variance.  Integrals over the torus are
evaluated by the rectangle rule on grids certified exact for degree-2m
products, so every number here is quadrature-error free.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeights, PositivityHolds
from .lattice import (
    Lattice,
    SpectralField,
    TORUS_AREA,
    coeffs_to_grid,
    pad_coeffs,
    project_coeffs,
    smallest_odd_at_least,
)
from .renorm import (
    RenormTable,
    averaged_coeffs,
    double_factorial,
    sigma_sq_limit,
)
from .sampling import SeededStream, gaussian_mode_array, sample_mu_coeffs

MC_CHUNK = 256


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo estimate with a delta-method standard error."""

    mean: float
    std_error: float
    n_samples: int
    seed: int
    ess: float
    estimator: str


def hermite_integral_weights(m: int, var: float) -> np.ndarray:
    """Matrix W with int H_{2j}(f; var) dx = sum_r W[j, r] * int f^{2r} dx.

    Row j expands H_{2j} in monomials: H_{2j}(x; v) =
    sum_i C(2j, 2i) (2i-1)!! (-v)^i x^{2j-2i}.
    """
    w = np.zeros((m + 1, m + 1))
    for j in range(m + 1):
        for i in range(j + 1):
            w[j, j - i] = (math.comb(2 * j, 2 * i) * double_factorial(2 * i - 1)
                           * (-var) ** i)
    return w


def even_moments(grids: np.ndarray, m: int) -> np.ndarray:
    """int f^{2r} dx for r = 0..m by the rectangle rule, batched.

    Returns shape (..., m+1); exact when the grid resolves degree-2m
    products without zero-mode aliasing.
    """
    mm = grids.shape[-1]
    cell = TORUS_AREA / (mm * mm)
    sq = grids * grids
    out = [np.full(grids.shape[:-2], TORUS_AREA)]
    power = sq
    for r in range(1, m + 1):
        out.append(np.sum(power, axis=(-2, -1)) * cell)
        if r < m:
            power = power * sq
    return np.stack(out, axis=-1)


def potential_integral_from_moments(moments: np.ndarray, table: RenormTable,
                                    variant: str = "V_tilde_N") -> np.ndarray:
    """Batched int V_n(phi) dx (or the tilde variant) from even moments."""
    m = table.spec.m
    w = hermite_integral_weights(m, table.sigma_tilde_n_sq)
    couplings = table.couplings()
    # j = 0 carries no Hermite term in the potential
    coeff = np.einsum("j,jr->r", couplings[1:], w[1:])
    vals = moments @ coeff
    if variant == "V_tilde_N":
        vals = vals - 0.5 * (moments[..., 1] - TORUS_AREA * table.sigma_tilde_n_sq)
    elif variant != "V_N":
        raise ValueError(f"unknown variant {variant!r}")
    return vals


def quadrature_lattice(table: RenormTable, alpha_grid_degree: int | None = None) -> Lattice:
    """Grid certified for torus integrals of degree-2m powers at cutoff n."""
    degree = alpha_grid_degree or table.spec.degree_2m
    return Lattice.for_quadrature(table.n, table.alpha, degree, mode="integral")


def potential_integral(phi: SpectralField, table: RenormTable,
                       variant: str = "V_tilde_N") -> float:
    """int V_n(P_n phi) dx evaluated exactly (rectangle rule, dealiased grid)."""
    coeffs = project_coeffs(pad_coeffs(phi.coeffs, max(phi.band, table.n)), table.n)
    m_grid = smallest_odd_at_least(table.spec.degree_2m * table.n + 1)
    grids = coeffs_to_grid(coeffs, max(m_grid, 2 * table.n + 1))
    moments = even_moments(grids, table.spec.m)
    return float(potential_integral_from_moments(moments, table, variant))


def sample_potential_integrals(table: RenormTable, n_samples: int,
                               stream: SeededStream,
                               variant: str = "V_tilde_N") -> np.ndarray:
    """int Vt_n over n_samples independent mu-draws (chunked, one stream)."""
    lat = quadrature_lattice(table)
    rng = stream.rng()
    out = np.empty(n_samples)
    sym = None
    done = 0
    while done < n_samples:
        take = min(MC_CHUNK, n_samples - done)
        g = gaussian_mode_array(table.n, rng, take)
        if sym is None:
            from .sampling import _ball_symbol
            sym = _ball_symbol(table.n, table.n, table.alpha, "mu")
        grids = coeffs_to_grid(g * sym, lat.grid_m)
        moments = even_moments(grids, table.spec.m)
        out[done:done + take] = potential_integral_from_moments(moments, table, variant)
        done += take
    return out


# ---------------------------------------------------------------------------
# partition function


def _logsumexp(x: np.ndarray) -> float:
    hi = float(np.max(x))
    return hi + float(np.log(np.sum(np.exp(x - hi))))


def _weights_summary(log_w: np.ndarray):
    lse1 = _logsumexp(log_w)
    lse2 = _logsumexp(2.0 * log_w)
    n = len(log_w)
    ess = float(np.exp(2.0 * lse1 - lse2))
    # delta method: se(log mean) = sqrt(n S2 / S1^2 - 1) / sqrt(n)
    se = float(np.sqrt(max(n * np.exp(lse2 - 2.0 * lse1) - 1.0, 0.0) / n))
    return lse1, ess, se


def log_partition_mc(table: RenormTable, p: float, n_samples: int,
                     stream: SeededStream, ess_min_frac: float = 0.01) -> McEstimate:
    """log Z_n^{(p)} = log E^mu e^{-p int Vt_n} by direct importance sampling."""
    vt = sample_potential_integrals(table, n_samples, stream)
    log_w = -p * vt
    lse1, ess, se = _weights_summary(log_w)
    if ess < ess_min_frac * n_samples:
        raise DegenerateWeights(
            f"ESS {ess:.1f} below {ess_min_frac:.1%} of {n_samples}"
        )
    centered = log_w - np.mean(log_w)
    m2 = np.mean(centered**2)
    if m2 > 0.0 and np.mean(centered**4) > 10.0 * m2 * m2:
        warnings.warn(
            "importance-weight kurtosis indicates an unreliable mean",
            RuntimeWarning, stacklevel=2,
        )
    return McEstimate(
        mean=lse1 - np.log(n_samples), std_error=se, n_samples=n_samples,
        seed=stream.seed, ess=ess, estimator=f"log-mean-exp(-{p}*int Vt)",
    )


# ---------------------------------------------------------------------------
# density convergence


def _density_exponents(table: RenormTable, ref_table: RenormTable,
                       grids_ref: np.ndarray, grids_coarse: np.ndarray,
                       include_mass_term: bool):
    m = table.spec.m
    moments_coarse = even_moments(grids_coarse, m)
    exp_n = -potential_integral_from_moments(moments_coarse, table)
    moments_ref = even_moments(grids_ref, 2)
    w = hermite_integral_weights(2, ref_table.sigma_tilde_n_sq)
    h4 = moments_ref @ w[2]
    h2 = moments_ref @ w[1]
    lam = table.lambda_measure
    mass = table.lambda_0 if include_mass_term else 0.0
    exp_lim = -lam * h4 + (0.5 - mass) * h2
    return exp_n, exp_lim


def density_gap_mc(table: RenormTable, ref_table: RenormTable, p: float,
                   n_samples: int, stream: SeededStream,
                   include_mass_term: bool = True) -> McEstimate:
    """E^mu | e^{-int Vt_n(P_n phi)} - e^{limit exponent} |^p on common samples.

    Both densities are evaluated on one common sample drawn at the reference
    resolution; the limit object uses Wick powers at the reference variance
    and the limiting quartic coupling lam.  By default the limit exponent is
    -lam int phi^{w4} + (1/2 - lambda0) int phi^{w2}: the quadratic Wick
    coefficient abar_{1,n} n^{2(1-a)} tends to the finite constant lambda0,
    so the mass term survives in the limit density (it also appears as the
    2 lambda0 linear term of the limiting wave equation).  Setting
    include_mass_term=False drops lambda0 and reproduces the plain
    -lam int phi^{w4} + int phi^{w2}/2 convention.
    """
    if ref_table.n < table.n:
        raise ValueError("reference resolution must dominate the table's")
    lat = Lattice.for_quadrature(ref_table.n, table.alpha,
                                 table.spec.degree_2m, mode="integral")
    rng = stream.rng()
    from .sampling import _ball_symbol
    sym = _ball_symbol(ref_table.n, ref_table.n, table.alpha, "mu")
    vals = np.empty(n_samples)
    done = 0
    while done < n_samples:
        take = min(MC_CHUNK, n_samples - done)
        c_ref = gaussian_mode_array(ref_table.n, rng, take) * sym
        c_coarse = project_coeffs(c_ref, table.n)
        grids_ref = coeffs_to_grid(c_ref, lat.grid_m)
        grids_coarse = coeffs_to_grid(c_coarse, lat.grid_m)
        a, b = _density_exponents(table, ref_table, grids_ref, grids_coarse,
                                  include_mass_term)
        hi = np.maximum(a, b)
        diff = np.exp(hi) * np.abs(1.0 - np.exp(-np.abs(a - b)))
        vals[done:done + take] = diff**p
        done += take
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n_samples))
    return McEstimate(mean=mean, std_error=se, n_samples=n_samples,
                      seed=stream.seed, ess=float(n_samples),
                      estimator=f"E|dens_n - dens_lim|^{p}")


# ---------------------------------------------------------------------------
# counterexample growth


def counterexample_bound(table: RenormTable, theta: float) -> float:
    """Closed-form drift bound on -log Z_n at constant drift theta n^{1-a}.

    E int Vt_n(W + theta n^{1-a}) + (1/2) int_0^1 ||u||^2 =
    4 pi^2 n^{4(1-a)} sum_j abar_{j,n} theta^{2j}: the -U^2/2 Wick correction
    cancels the drift's L^2 energy exactly for the spatially constant drift.
    """
    beta = table.beta
    poly = sum(table.a_bar_n[j] * theta ** (2 * j)
               for j in range(1, len(table.a_bar_n)))
    return TORUS_AREA * table.n ** (4.0 * beta) * poly


def counterexample_growth(spec, alpha: float, theta: float, n_ladder):
    """Drift upper bounds on -log Z_n across a cutoff ladder, with growth fit.

    Requires the positivity violation sum_{j>=2} abar_j theta^{2(j-2)} < 0
    (otherwise the constant drift proves nothing and PositivityHolds is
    raised).  Returns (rows, fitted_exponent) where each row is
    (n, bound on -log Z_n).
    """
    from .renorm import make_table, positivity_polynomial

    abar = averaged_coeffs(spec, sigma_sq_limit(alpha))
    if positivity_polynomial(abar, theta) >= 0.0:
        raise PositivityHolds(
            f"averaged tail at theta={theta} is nonnegative; no growth bound"
        )
    rows = []
    for n in n_ladder:
        table = make_table(spec, alpha, n)
        rows.append((n, counterexample_bound(table, theta)))
    ns = np.array([r[0] for r in rows], dtype=float)
    vals = np.array([-r[1] for r in rows])
    if np.any(vals <= 0.0):
        raise PositivityHolds("drift bound is not negative on the ladder")
    fitted = float(np.polyfit(np.log(ns), np.log(vals), 1)[0])
    return rows, fitted


# ---------------------------------------------------------------------------
# large-deviation tails


def wilson_interval(successes: int, n: int, z: float = 1.96):
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return center - half, center + half


def tail_probability(table: RenormTable, r_ladder, n_samples: int,
                     stream: SeededStream):
    """Empirical P(|int V_n| > R) with Wilson intervals and a stretch fit.

    Returns (rows, fitted_stretch) where rows are (R, p_hat, lo, hi) and the
    fit is the slope of log(-log p) against log R over resolvable points.
    """
    v = np.abs(sample_potential_integrals(table, n_samples, stream,
                                          variant="V_N"))
    rows = []
    for r in r_ladder:
        k = int(np.sum(v > r))
        lo, hi = wilson_interval(k, n_samples)
        rows.append((float(r), k / n_samples, lo, hi))
    pts = [(r, p) for r, p, _, _ in rows if 0.0 < p < 1.0]
    fitted = float("nan")
    if len(pts) >= 2:
        lr = np.log([r for r, _ in pts])
        ll = np.log(-np.log([p for _, p in pts]))
        fitted = float(np.polyfit(lr, ll, 1)[0])
    return rows, fitted


# ---------------------------------------------------------------------------
# coercivity


def coercivity_scan(table: RenormTable, u_grid=None):
    """Fit (c, C) with sum_j abar_{j,n} n^{-(2j-4)b} U^{2j} - U^2 >=
    c (U^4 + n^{-(2m-4)b} U^{2m}) - C over a U-grid."""
    if u_grid is None:
        u_grid = np.linspace(0.0, 50.0, 2001)
    u = np.asarray(u_grid, dtype=float)
    couplings = table.couplings()
    g = sum(couplings[j] * u ** (2 * j) for j in range(1, len(couplings))) - u**2
    m = table.spec.m
    h = u**4 + table.n ** (-(2 * m - 4) * table.beta) * u ** (2 * m)
    tail = u >= 2.0
    c = 0.5 * float(np.min(g[tail] / h[tail]))
    c = max(c, 1e-6)
    big_c = max(0.0, float(np.max(c * h - g)))
    return c, big_c
