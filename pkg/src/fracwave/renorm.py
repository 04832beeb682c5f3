"""Hermite calculus and renormalization constants.

For an even polynomial potential V(z) = sum_j a_j z^{2j} the Gaussian
averaging map produces coefficients

    abar_j(v) = (1/(2j)!) E[ V^(2j)( N(0, v) ) ]
              = (1/(2j)!) sum_{k>=j} (2k)!/(2k-2j)!! a_k v^{k-j},

evaluated at the continuum variance sigma^2 or its lattice counterpart
sigma_n^2.  The module also computes the lattice constant b1 controlling
the second-order expansion sigma_n^2 = sigma^2 + b1 n^{-2(1-alpha)} + O(1/n)
and the induced linear coefficient lambda0 = b1 * d(abar_1)/dv at v=sigma^2.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import NotCritical, NotPositive, QuadratureNotConverged
from .lattice import TORUS_AREA, k_norm_grid

TOL_BIFURCATION = 1e-10


def hermite(k: int, x, var: float):
    """Probabilists' Hermite polynomial H_k(x; var), leading coefficient 1.

    Three-term recurrence H_{k+1} = x H_k - k var H_{k-1}; vectorized in x.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if k == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for j in range(1, k):
        h, h_prev = x * h - j * var * h_prev, h
    return h if h.ndim else float(h)


def double_factorial(n: int) -> int:
    if n < 0:
        return 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@dataclass(frozen=True)
class PotentialSpec:
    """Even polynomial V(z) = sum_{j=0}^{m} a[j] z^{2j} with a[m] > 0."""

    degree_2m: int
    a: tuple
    validated: bool = False

    def __post_init__(self):
        if self.degree_2m % 2 != 0 or self.degree_2m < 4:
            raise ValueError("degree_2m must be an even integer >= 4")
        m = self.degree_2m // 2
        a = tuple(float(x) for x in self.a)
        if len(a) != m + 1:
            raise ValueError(f"need {m + 1} coefficients a_0..a_m")
        if a[-1] <= 0.0:
            raise ValueError("leading coefficient a_m must be positive")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.degree_2m // 2

    def value(self, z):
        z = np.asarray(z, dtype=float)
        return sum(aj * z ** (2 * j) for j, aj in enumerate(self.a))

    def second_derivative(self, z):
        z = np.asarray(z, dtype=float)
        return sum(
            aj * 2 * j * (2 * j - 1) * z ** (2 * j - 2)
            for j, aj in enumerate(self.a) if j >= 1
        )


def averaged_coeffs(spec: PotentialSpec, var: float) -> np.ndarray:
    """abar_0..abar_m obtained by averaging V over N(0, var)."""
    if var < 0.0:
        raise ValueError("var must be >= 0")
    m = spec.m
    out = np.zeros(m + 1)
    for j in range(m + 1):
        s = 0.0
        for k in range(j, m + 1):
            s += (math.factorial(2 * k) / double_factorial(2 * k - 2 * j)
                  * spec.a[k] * var ** (k - j))
        out[j] = s / math.factorial(2 * j)
    return out


def averaged_coeff1_slope(spec: PotentialSpec, var: float) -> float:
    """d(abar_1)/d(var): the variance sensitivity of the quadratic coefficient."""
    s = 0.0
    for k in range(2, spec.m + 1):
        s += (math.factorial(2 * k) / double_factorial(2 * k - 2)
              * spec.a[k] * (k - 1) * var ** (k - 2))
    return 0.5 * s


# ---------------------------------------------------------------------------
# variance constants


def sigma_sq_limit(alpha: float) -> float:
    """Continuum variance 1/(4 pi (1 - alpha))."""
    return 1.0 / (4.0 * np.pi * (1.0 - alpha))


def sigma_constants(alpha: float, n: int):
    """(sigma^2, sigma_n^2, sigma_tilde_n^2) for cutoff n.

    sigma_tilde_n^2 is the exact lattice sum (1/4pi^2) sum_{|k|<=n}
    1/(1+|k|^{2 alpha}); sigma_n^2 = sigma_tilde_n^2 / n^{2(1-alpha)}.
    """
    if not (0.5 < alpha < 1.0):
        raise ValueError("alpha must lie in (1/2, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    absk = k_norm_grid(n)
    mask = absk <= n
    tilde = float(np.sum(1.0 / (1.0 + absk[mask] ** (2.0 * alpha)))) / TORUS_AREA
    return sigma_sq_limit(alpha), tilde / n ** (2.0 * (1.0 - alpha)), tilde


# ---------------------------------------------------------------------------
# lattice constant b1


def _corner_cell_integral(alpha: float, order: int) -> float:
    """int over the unit square with corner at the origin of |xi|^{-2 alpha}.

    Polar reduction: 2 * int_0^{pi/4} sec(t)^{2-2a} dt / (2-2a), Gauss-Legendre
    in the angle (the radial integral is exact).
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (nodes + 1.0) * (np.pi / 4.0)
    w = weights * (np.pi / 8.0)
    p = 2.0 - 2.0 * alpha
    return 2.0 * float(np.sum(w * np.cos(t) ** (-p))) / p


def _b1_value(alpha: float, truncation: int, order: int) -> tuple[float, float]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    t = truncation
    k = np.arange(-t, t + 1)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    absk = np.hypot(k1, k2)
    keep = absk <= t
    k1, k2, absk = k1[keep], k2[keep], absk[keep]
    corner = (np.abs(2 * k1 + 1) == 1) & (np.abs(2 * k2 + 1) == 1)

    # regular cells: exact constant term minus tensor quadrature of |xi|^{-2a}
    x = k1[~corner, None, None] + u[None, :, None]
    y = k2[~corner, None, None] + u[None, None, :]
    integ = np.sum(
        (w[None, :, None] * w[None, None, :])
        * (x * x + y * y) ** (-alpha),
        axis=(1, 2),
    )
    total = np.sum(np.sort(1.0 / (1.0 + absk[~corner] ** (2.0 * alpha)) - integ))

    # the four cells meeting the origin share one singular integral by symmetry
    sing = _corner_cell_integral(alpha, max(order, 16))
    for c1, c2 in zip(k1[corner], k2[corner]):
        const = 0.0 if (c1 == 0 and c2 == 0) else 1.0 / (1.0 + np.hypot(c1, c2) ** (2.0 * alpha))
        total += const - sing

    # analytic tail: outside radius t the summand is close to the radial
    # profile 1/(1+r^{2a}) - r^{-2a} = -1/(r^{2a}(1+r^{2a})), whose integral
    # over {|xi| > t} is computed exactly; the residual geometric error of
    # replacing cells by the continuum is one order smaller
    from scipy.integrate import quad

    tail_int, _ = quad(
        lambda r: -2.0 * np.pi * r / (r ** (2.0 * alpha) * (1.0 + r ** (2.0 * alpha))),
        t + 0.5, np.inf,
    )
    total += tail_int
    tail_est = 2.0 * np.pi * (t + 0.5) ** (-2.0 * alpha) / (2.0 * alpha - 1.0)
    return (1.0 + total) / TORUS_AREA, tail_est / TORUS_AREA


def lattice_constant_b1(alpha: float, truncation: int = 64,
                        cell_quad_order: int = 8, quad_tol: float = 1e-8):
    """Lattice-vs-continuum constant b1 with a truncation tail estimate.

    b1 = 1/4pi^2 + (1/4pi^2) sum_k int_{C_k} (1_{k != 0}/(1+|k|^{2a})
    - |xi|^{-2a}) dxi over unit cells C_k = [k1, k1+1] x [k2, k2+1].
    Raises QuadratureNotConverged when doubling the cell quadrature order
    moves the value by more than quad_tol.
    """
    if not (0.5 < alpha < 1.0):
        raise ValueError("alpha must lie in (1/2, 1)")
    val, tail = _b1_value(alpha, truncation, cell_quad_order)
    check, _ = _b1_value(alpha, truncation, 2 * cell_quad_order)
    if abs(check - val) > quad_tol:
        raise QuadratureNotConverged(
            f"b1 moved by {abs(check - val):.3e} on order doubling"
        )
    return check, tail


@lru_cache(maxsize=None)
def _b1_cached(alpha: float) -> float:
    val, _ = lattice_constant_b1(alpha)
    return val


def lambda0(spec: PotentialSpec, alpha: float) -> float:
    """Second-order coefficient in abar_{1,n} = abar_1 + lambda0 n^{-2(1-a)} + ...

    Equals b1 times the variance sensitivity of abar_1 at the continuum
    variance, since sigma_n^2 - sigma^2 = b1 n^{-2(1-alpha)} to leading order.
    """
    return _b1_cached(alpha) * averaged_coeff1_slope(spec, sigma_sq_limit(alpha))


# ---------------------------------------------------------------------------
# validation and tuning


@dataclass(frozen=True)
class ValidationReport:
    a1_bar: float
    positivity_min: float
    z_grid_max: float
    critical: bool
    positive: bool


def positivity_polynomial(abar: np.ndarray, z) -> np.ndarray:
    """sum_{j >= 2} abar_j z^{2(j-2)}, the coercivity weight."""
    z = np.asarray(z, dtype=float)
    return sum(abar[j] * z ** (2 * (j - 2)) for j in range(2, len(abar)))


def validate_potential(spec: PotentialSpec, alpha: float,
                       tol: float = TOL_BIFURCATION) -> ValidationReport:
    """Check criticality (abar_1 = 0) and positivity of the averaged tail.

    The positivity scan uses z in {0, +-0.1, ..., +-10}; for an even
    polynomial in z^2 with positive leading coefficient this grid plus the
    leading-coefficient check certifies the sign on the resolvable range.
    """
    abar = averaged_coeffs(spec, sigma_sq_limit(alpha))
    z = np.arange(0.0, 10.0 + 1e-9, 0.1)
    vals = positivity_polynomial(abar, z)
    report = ValidationReport(
        a1_bar=float(abar[1]),
        positivity_min=float(np.min(vals)),
        z_grid_max=10.0,
        critical=abs(abar[1]) <= tol,
        positive=bool(np.min(vals) > 0.0 and abar[-1] > 0.0),
    )
    return report


def require_valid(spec: PotentialSpec, alpha: float) -> PotentialSpec:
    rep = validate_potential(spec, alpha)
    if not rep.critical:
        raise NotCritical(f"abar_1 = {rep.a1_bar:.3e} != 0")
    if not rep.positive:
        raise NotPositive(f"averaged tail minimum {rep.positivity_min:.3e} <= 0")
    return replace(spec, validated=True)


def tune_criticality(spec: PotentialSpec, alpha: float,
                     var: float | None = None) -> PotentialSpec:
    """Shift a_1 so that abar_1 = 0 (abar_1 is affine in a_1 with slope one).

    By default criticality is imposed at the continuum variance sigma^2;
    passing var = sigma_n^2 instead yields a truncation-adapted potential
    whose quadratic Wick coefficient vanishes at cutoff n (useful for
    well-conditioned reweighting diagnostics at small n).
    """
    if var is None:
        var = sigma_sq_limit(alpha)
    abar1 = averaged_coeffs(spec, var)[1]
    a = list(spec.a)
    a[1] -= abar1
    return PotentialSpec(spec.degree_2m, tuple(a))


def tune_gibbs_quadratic(spec: PotentialSpec, alpha: float, n: int) -> PotentialSpec:
    """Shift a_1 so the quadratic Wick coefficient of Vt_n vanishes at cutoff n.

    Vt_n carries the quadratic Hermite weight abar_{1,n} n^{2(1-a)} - 1/2;
    choosing abar_{1,n} = n^{-2(1-a)}/2 makes the Gibbs density depend on the
    quartic-and-higher Wick powers only, so importance weights over the base
    Gaussian stay well conditioned.  Used by the invariance diagnostics.
    """
    _, sigma_n_sq, _ = sigma_constants(alpha, n)
    beta = 1.0 - alpha
    abar1 = averaged_coeffs(spec, sigma_n_sq)[1]
    a = list(spec.a)
    a[1] += 0.5 * n ** (-2.0 * beta) - abar1
    return PotentialSpec(spec.degree_2m, tuple(a))


# ---------------------------------------------------------------------------
# presets


def preset_quartic(alpha: float) -> PotentialSpec:
    """z^4 tuned to criticality: a_1 = -6 sigma^2."""
    return tune_criticality(PotentialSpec(4, (0.0, 0.0, 1.0)), alpha)


def preset_sextic(alpha: float) -> PotentialSpec:
    """z^6 tuned to criticality: a_1 = -45 sigma^4."""
    return tune_criticality(PotentialSpec(6, (0.0, 0.0, 0.0, 1.0)), alpha)


def preset_sextic_violating(alpha: float) -> PotentialSpec:
    """Critical sextic whose averaged tail abar_2 + abar_3 z^2 dips negative.

    The quartic coefficient is chosen so that abar_2 = -40: a deep violation
    keeps the constant-drift bound negative at moderate drift sizes already
    for cutoffs in the teens, where the positive abar_{1,n} theta^2 term
    (which decays only like n^{-2(1-alpha)}) would otherwise mask the
    n^{4(1-alpha)} growth on desk-scale ladders.
    """
    a2 = -(15.0 * sigma_sq_limit(alpha) + 40.0)
    return tune_criticality(PotentialSpec(6, (0.0, 0.0, a2, 1.0)), alpha)


PRESETS = {
    "quartic": preset_quartic,
    "sextic": preset_sextic,
    "sextic_violating": preset_sextic_violating,
}


# ---------------------------------------------------------------------------
# the constants table


@dataclass(frozen=True)
class RenormTable:
    """Every scalar constant for one (potential, alpha, n)."""

    alpha: float
    n: int
    spec: PotentialSpec
    sigma_sq: float
    sigma_n_sq: float
    sigma_tilde_n_sq: float
    a_bar: tuple
    a_bar_n: tuple
    kappa_n: float
    b_bar_1: float
    lambda_0: float
    lambda_cubic: float
    lambda_measure: float

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha

    def coupling(self, j: int) -> float:
        """abar_{j,n} n^{-(2j-4)(1-alpha)}, the weight of the 2j-th Wick power."""
        return self.a_bar_n[j] * self.n ** (-(2 * j - 4) * self.beta)

    def couplings(self) -> np.ndarray:
        return np.array([self.coupling(j) for j in range(len(self.a_bar_n))])

    def to_json(self) -> str:
        doc = {
            "alpha": self.alpha,
            "n": self.n,
            "potential": {"degree_2m": self.spec.degree_2m, "a": list(self.spec.a)},
            "sigma_sq": self.sigma_sq,
            "sigma_n_sq": self.sigma_n_sq,
            "sigma_tilde_n_sq": self.sigma_tilde_n_sq,
            "a_bar": list(self.a_bar),
            "a_bar_n": list(self.a_bar_n),
            "kappa_n": self.kappa_n,
            "b_bar_1": self.b_bar_1,
            "lambda_0": self.lambda_0,
            "lambda_cubic": self.lambda_cubic,
            "lambda_measure": self.lambda_measure,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RenormTable":
        doc = json.loads(text)
        spec = PotentialSpec(doc["potential"]["degree_2m"],
                             tuple(doc["potential"]["a"]))
        return cls(
            alpha=doc["alpha"], n=doc["n"], spec=spec,
            sigma_sq=doc["sigma_sq"], sigma_n_sq=doc["sigma_n_sq"],
            sigma_tilde_n_sq=doc["sigma_tilde_n_sq"],
            a_bar=tuple(doc["a_bar"]), a_bar_n=tuple(doc["a_bar_n"]),
            kappa_n=doc["kappa_n"], b_bar_1=doc["b_bar_1"],
            lambda_0=doc["lambda_0"], lambda_cubic=doc["lambda_cubic"],
            lambda_measure=doc["lambda_measure"],
        )

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def make_table(spec: PotentialSpec, alpha: float, n: int) -> RenormTable:
    sigma_sq, sigma_n_sq, sigma_tilde_n_sq = sigma_constants(alpha, n)
    a_bar = averaged_coeffs(spec, sigma_sq)
    a_bar_n = averaged_coeffs(spec, sigma_n_sq)
    beta = 1.0 - alpha
    return RenormTable(
        alpha=alpha, n=n, spec=spec,
        sigma_sq=sigma_sq, sigma_n_sq=sigma_n_sq,
        sigma_tilde_n_sq=sigma_tilde_n_sq,
        a_bar=tuple(a_bar), a_bar_n=tuple(a_bar_n),
        kappa_n=2.0 * a_bar_n[1] * n ** (2.0 * beta) - 1.0,
        b_bar_1=_b1_cached(alpha),
        lambda_0=lambda0(spec, alpha),
        lambda_cubic=4.0 * a_bar[2],
        lambda_measure=a_bar[2],
    )
