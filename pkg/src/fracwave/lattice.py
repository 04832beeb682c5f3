"""Band-limited real fields on the 2-torus and their spectral calculus.

Fields are stored as square arrays of Fourier coefficients c_k indexed by
k = (k1, k2) with |k_i| <= band, under the convention

    f(x) = sum_k c_k exp(i k.x),   x in [0, 2*pi)^2,

so that a real-valued field satisfies c_{-k} = conj(c_k).  No 2*pi factors
live inside the storage; Parseval reads  int |f|^2 dx = 4*pi^2 * sum |c_k|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridTooSmall, NegativePowerAtZeroMode

TWO_PI = 2.0 * np.pi
TORUS_AREA = 4.0 * np.pi**2


def smallest_odd_at_least(n: int) -> int:
    n = int(n)
    return n if n % 2 == 1 else n + 1


@dataclass(frozen=True)
class Lattice:
    """Resolution parameters: spectral cutoff, physical grid, dispersion index.

    cutoff_n is the Euclidean Fourier cutoff (the projector radius), grid_m
    the number of physical points per dimension, and alpha in (1/2, 1) the
    fractional dispersion exponent.  ``quad_degree`` records the polynomial
    degree for which the grid was certified exact at construction (0 when no
    certification was requested).
    """

    cutoff_n: int
    grid_m: int
    alpha: float
    quad_degree: int = 0

    def __post_init__(self):
        if self.cutoff_n < 1:
            raise ValueError("cutoff_n must be >= 1")
        if not (0.5 < self.alpha < 1.0):
            raise ValueError("alpha must lie strictly inside (1/2, 1)")
        if self.grid_m < 2 * self.cutoff_n + 1:
            raise GridTooSmall(
                f"grid_m={self.grid_m} < 2*cutoff+1={2 * self.cutoff_n + 1}"
            )
        if self.quad_degree and self.grid_m < 2 * self.quad_degree * self.cutoff_n + 1:
            raise GridTooSmall(
                "grid too small for the requested product quadrature degree"
            )

    @classmethod
    def for_quadrature(cls, cutoff_n: int, alpha: float, degree: int,
                       mode: str = "product") -> "Lattice":
        """Grid sized for exact degree-`degree` polynomial quadrature.

        mode="product" certifies every Fourier coefficient of a degree-d
        product of band-limited fields (grid_m >= 2*d*N+1); mode="integral"
        certifies only torus integrals of such products (no nonzero frequency
        aliases onto the zero mode, grid_m >= d*N+1), which is what the
        Monte-Carlo potential integrals need.
        """
        if mode == "product":
            m = 2 * degree * cutoff_n + 1
        elif mode == "integral":
            m = degree * cutoff_n + 1
        else:
            raise ValueError(f"unknown quadrature mode {mode!r}")
        quad = degree if mode == "product" else 0
        return cls(cutoff_n, smallest_odd_at_least(m), alpha, quad_degree=quad)

    def with_cutoff(self, cutoff_n: int) -> "Lattice":
        return Lattice(cutoff_n, self.grid_m, self.alpha, self.quad_degree)


@lru_cache(maxsize=None)
def k_axis(band: int) -> np.ndarray:
    return np.arange(-band, band + 1)


@lru_cache(maxsize=None)
def k_norm_grid(band: int) -> np.ndarray:
    """|k| on the (2*band+1)^2 storage square."""
    k = k_axis(band)
    return np.hypot(k[:, None], k[None, :]).astype(float)


def dispersion_symbol(band: int, alpha: float) -> np.ndarray:
    """1 + |k|^(2*alpha) on the storage square."""
    return 1.0 + k_norm_grid(band) ** (2.0 * alpha)


class SpectralField:
    """Immutable Hermitian-symmetric coefficient array on a Lattice."""

    __slots__ = ("lattice", "coeffs", "band")

    def __init__(self, lattice: Lattice, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1] or coeffs.shape[0] % 2 == 0:
            raise ValueError("coeffs must be a (2*band+1, 2*band+1) array")
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "band", coeffs.shape[0] // 2)
        coeffs.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    @classmethod
    def zero(cls, lattice: Lattice, band: int | None = None) -> "SpectralField":
        b = lattice.cutoff_n if band is None else band
        return cls(lattice, np.zeros((2 * b + 1, 2 * b + 1), dtype=complex))

    @classmethod
    def delta(cls, lattice: Lattice, k: tuple[int, int],
              amplitude: complex = 1.0) -> "SpectralField":
        """Real field amplitude*e^{ik.x} + conj: c_k = a, c_{-k} = conj(a)."""
        b = max(abs(k[0]), abs(k[1]), 1)
        c = np.zeros((2 * b + 1, 2 * b + 1), dtype=complex)
        c[k[0] + b, k[1] + b] += amplitude
        c[-k[0] + b, -k[1] + b] += np.conj(amplitude)
        return cls(lattice, c)

    def coeff(self, k1: int, k2: int) -> complex:
        b = self.band
        if abs(k1) > b or abs(k2) > b:
            return 0.0 + 0.0j
        return complex(self.coeffs[k1 + b, k2 + b])

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.lattice, coeffs)

    def euclidean_band(self) -> float:
        """Largest |k| carrying a nonzero coefficient."""
        nz = np.abs(self.coeffs) > 0.0
        if not nz.any():
            return 0.0
        return float(k_norm_grid(self.band)[nz].max())

    def hermitian_defect(self) -> float:
        flipped = np.conj(self.coeffs[::-1, ::-1])
        return float(np.max(np.abs(self.coeffs - flipped)))

    def l2_sq(self) -> float:
        """int |f|^2 dx = 4*pi^2 * sum |c_k|^2."""
        return TORUS_AREA * float(np.sum(np.abs(self.coeffs) ** 2))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        a, b = pad_to_common(self.coeffs, other.coeffs)
        return SpectralField(self.lattice, a + b)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        a, b = pad_to_common(self.coeffs, other.coeffs)
        return SpectralField(self.lattice, a - b)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.lattice, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.lattice, -self.coeffs)


def pad_to_common(a: np.ndarray, b: np.ndarray):
    ba, bb = a.shape[-1] // 2, b.shape[-1] // 2
    band = max(ba, bb)
    return pad_coeffs(a, band), pad_coeffs(b, band)


def pad_coeffs(coeffs: np.ndarray, band: int) -> np.ndarray:
    b = coeffs.shape[-1] // 2
    if b == band:
        return coeffs
    if b > band:
        raise ValueError("cannot shrink by padding")
    w = band - b
    pad = [(0, 0)] * (coeffs.ndim - 2) + [(w, w), (w, w)]
    return np.pad(coeffs, pad)


def assert_hermitian(f: SpectralField, tol: float = 1e-10) -> None:
    if f.hermitian_defect() > tol * (1.0 + float(np.max(np.abs(f.coeffs)))):
        raise AssertionError("Hermitian symmetry violated")


# ---------------------------------------------------------------------------
# projection and multipliers


def project(f: SpectralField, n: int) -> SpectralField:
    """Sharp Fourier ball projection: keep modes with Euclidean |k| <= n."""
    if n < 0:
        raise ValueError("projection radius must be >= 0")
    mask = k_norm_grid(f.band) <= n
    out = np.where(mask, f.coeffs, 0.0)
    nb = min(f.band, max(int(np.floor(n)), 1))
    b = f.band
    out = out[b - nb:b + nb + 1, b - nb:b + nb + 1]
    return SpectralField(f.lattice, out)


def project_coeffs(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Batched variant of :func:`project` without storage shrinking."""
    band = coeffs.shape[-1] // 2
    return np.where(k_norm_grid(band) <= n, coeffs, 0.0)


def fractional_multiplier(f: SpectralField, kind: str, gamma: float) -> SpectralField:
    """Apply |k|^g, (1+|k|^{2a})^{g/(2a)} or (1+|k|^{2a})^{-1/2} mode-wise."""
    absk = k_norm_grid(f.band)
    alpha = f.lattice.alpha
    if kind == "abs_grad":
        if gamma < 0 and abs(f.coeff(0, 0)) != 0.0:
            raise NegativePowerAtZeroMode(
                "|k|^gamma with gamma<0 needs a vanishing zero mode"
            )
        with np.errstate(divide="ignore"):
            sym = absk**gamma
        b = f.band
        if gamma < 0:
            sym[b, b] = 0.0
        elif gamma == 0:
            sym[b, b] = 1.0
    elif kind == "jap_bracket":
        sym = (1.0 + absk ** (2.0 * alpha)) ** (gamma / (2.0 * alpha))
    elif kind == "inv_jap_alpha":
        sym = (1.0 + absk ** (2.0 * alpha)) ** (-0.5)
    else:
        raise ValueError(f"unknown multiplier kind {kind!r}")
    return f.with_coeffs(f.coeffs * sym)


# ---------------------------------------------------------------------------
# transforms (batched over leading axes; coeff arrays are (..., 2B+1, 2B+1))


def coeffs_to_grid(coeffs: np.ndarray, grid_m: int) -> np.ndarray:
    """Samples of sum_k c_k e^{ik.x} on the uniform grid x_j = 2*pi*j/M.

    Requires Hermitian-symmetric input (real output); raises GridTooSmall
    when the grid cannot hold the band.
    """
    band = coeffs.shape[-1] // 2
    m = int(grid_m)
    if m < 2 * band + 1:
        raise GridTooSmall(f"grid_m={m} < 2*band+1={2 * band + 1}")
    half = np.zeros(coeffs.shape[:-2] + (m, m // 2 + 1), dtype=complex)
    idx = np.arange(-band, band + 1) % m
    # columns k2 >= 0 feed the rfft layout; k2<0 follows by symmetry
    half[..., idx[:, None], np.arange(0, band + 1)[None, :]] = coeffs[..., :, band:]
    return np.fft.irfft2(half, s=(m, m)) * (m * m)


def grid_to_coeffs(samples: np.ndarray, band: int) -> np.ndarray:
    """Inverse of coeffs_to_grid for real samples, truncated to |k_i| <= band."""
    m = samples.shape[-1]
    if m < 2 * band + 1:
        raise GridTooSmall(f"grid_m={m} < 2*band+1={2 * band + 1}")
    half = np.fft.rfft2(samples) / (m * m)
    shape = samples.shape[:-2] + (2 * band + 1, 2 * band + 1)
    out = np.zeros(shape, dtype=complex)
    idx = np.arange(-band, band + 1) % m
    out[..., :, band:] = half[..., idx[:, None], np.arange(0, band + 1)[None, :]]
    out[..., :, :band] = np.conj(out[..., ::-1, band + 1:][..., :, ::-1])
    return out


def to_physical(f: SpectralField, grid_m: int | None = None) -> np.ndarray:
    return coeffs_to_grid(f.coeffs, f.lattice.grid_m if grid_m is None else grid_m)


def to_spectral(samples: np.ndarray, lattice: Lattice,
                band: int | None = None) -> SpectralField:
    b = lattice.cutoff_n if band is None else band
    return SpectralField(lattice, grid_to_coeffs(samples, b))


# ---------------------------------------------------------------------------
# grid norms


def grid_lq_norm(samples: np.ndarray, q: float) -> float:
    """L^q(T^2) norm by the rectangle rule (exact for q in {2} on band-limited
    data, sup for q = inf)."""
    if np.isinf(q):
        return float(np.max(np.abs(samples)))
    m = samples.shape[-1]
    cell = TORUS_AREA / (m * m)
    return float((np.sum(np.abs(samples) ** q) * cell) ** (1.0 / q))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm via the exact lattice sum with <k> = (1+|k|^{2a})^{1/(2a)}."""
    w = dispersion_symbol(f.band, f.lattice.alpha) ** (s / f.lattice.alpha)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def sobolev_norm_coeffs(coeffs: np.ndarray, alpha: float, s: float) -> np.ndarray:
    band = coeffs.shape[-1] // 2
    w = dispersion_symbol(band, alpha) ** (s / alpha)
    return np.sqrt(np.sum(w * np.abs(coeffs) ** 2, axis=(-2, -1)))


# ---------------------------------------------------------------------------
# Littlewood-Paley blocks


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity transition: 0 for x<=0, 1 for x>=1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def chi_bump(r: np.ndarray) -> np.ndarray:
    """Low-frequency bump: 1 on |xi|<=3/4, 0 on |xi|>=4/3."""
    return 1.0 - _smooth_step((np.asarray(r, dtype=float) - 0.75) / (4.0 / 3.0 - 0.75))


def phi_bump(r: np.ndarray) -> np.ndarray:
    """Annulus bump chi(r/2) - chi(r), supported in {3/4 <= |xi| <= 8/3}."""
    return chi_bump(np.asarray(r, dtype=float) / 2.0) - chi_bump(r)


def lp_block(f: SpectralField, j: int) -> SpectralField:
    """P_j f; j = -1 is the low block chi, j >= 0 the annulus phi(2^-j .)."""
    r = k_norm_grid(f.band)
    sym = chi_bump(r) if j == -1 else phi_bump(r / 2.0**j)
    return f.with_coeffs(f.coeffs * sym)


def lp_block_count(f: SpectralField) -> int:
    """Smallest J with phi_j identically zero on the band for all j >= J."""
    bmax = f.band * np.sqrt(2.0)
    j = 0
    while 0.75 * 2.0**j <= bmax:
        j += 1
    return j


def besov_norm(f: SpectralField, gamma: float, p: float, q: float,
               with_quad_tol: bool = False):
    """Besov norm || 2^{j*gamma} ||P_j f||_{L^q} ||_{l^p over j}.

    q is the spatial Lebesgue exponent, p the dyadic sequence exponent.
    For q not in {2, inf} the L^q norm uses the rectangle rule on the
    lattice grid; with_quad_tol=True additionally reports the change under
    one grid refinement (0.0 when the evaluation is exact).
    """
    vals = _besov_value(f, gamma, p, q, f.lattice.grid_m)
    if not with_quad_tol:
        return vals
    if np.isinf(q) or q == 2.0:
        return vals, 0.0
    refined = _besov_value(f, gamma, p, q, smallest_odd_at_least(2 * f.lattice.grid_m))
    return vals, abs(refined - vals)


def _besov_value(f, gamma, p, q, grid_m):
    grid_m = max(grid_m, 2 * f.band + 1)
    terms = []
    for j in range(-1, lp_block_count(f)):
        block = lp_block(f, j)
        if q == 2.0:
            lq = np.sqrt(block.l2_sq())
        else:
            lq = grid_lq_norm(coeffs_to_grid(block.coeffs, grid_m), q)
        terms.append(2.0 ** (j * gamma) * lq if j >= 0 else lq)
    terms = np.array(terms)
    if np.isinf(p):
        return float(np.max(terms))
    return float(np.sum(terms**p) ** (1.0 / p))
