"""Seeded Gaussian field samplers and Wick powers.

The position marginal mu draws phi = (1/2pi) sum_{|k|<=N} g_k
(1+|k|^{2a})^{-1/2} e^{ik.x}, the velocity marginal (white noise) drops the
denominator.  Complex amplitudes follow g_k = (x+iy)/sqrt(2) with x, y
independent standard normals on the lexicographic-positive half lattice,
g_{-k} = conj(g_k), and a real standard normal at k=0, so E|g_k|^2 = 1 and
E g_k^2 = 0 for k != 0.

Randomness comes from numpy's counter-based Philox generator keyed by
(seed, stream_id): per-mode normals are drawn as one standard_normal block
of shape (2, 2B+1, 2B+1) in C order.  Bit-exact reproducibility is promised
within this implementation at fixed numpy major version.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import (
    Lattice,
    SpectralField,
    coeffs_to_grid,
    grid_to_coeffs,
    k_norm_grid,
    smallest_odd_at_least,
)
from .renorm import hermite


@dataclass(frozen=True)
class SeededStream:
    """Reproducible random source: one (seed, stream_id) pair, one substream."""

    seed: int
    stream_id: int = 0

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.seed, self.stream_id]))

    def substream(self, stream_id: int) -> "SeededStream":
        return SeededStream(self.seed, stream_id)


@lru_cache(maxsize=None)
def _half_lattice_mask(band: int) -> np.ndarray:
    """Lexicographic-positive half: k1 > 0, or k1 = 0 and k2 > 0."""
    k = np.arange(-band, band + 1)
    k1, k2 = k[:, None], k[None, :]
    return (k1 > 0) | ((k1 == 0) & (k2 > 0))


def gaussian_mode_array(band: int, rng: np.random.Generator,
                        n_samples: int | None = None) -> np.ndarray:
    """Hermitian array of unit-variance complex Gaussians g_k.

    Returns shape (2B+1, 2B+1), or (n_samples, 2B+1, 2B+1) when batched.
    """
    shape = (2, 2 * band + 1, 2 * band + 1)
    if n_samples is not None:
        shape = (n_samples,) + shape
    z = rng.standard_normal(shape)
    x, y = z[..., 0, :, :], z[..., 1, :, :]
    half = _half_lattice_mask(band)
    g = np.where(half, (x + 1j * y) / np.sqrt(2.0), 0.0)
    g = g + np.conj(g[..., ::-1, ::-1])
    g[..., band, band] = x[..., band, band]
    return g


def _ball_symbol(band: int, cutoff: int, alpha: float,
                 covariance: str) -> np.ndarray:
    absk = k_norm_grid(band)
    mask = absk <= cutoff
    if covariance == "mu":
        sym = (1.0 + absk ** (2.0 * alpha)) ** (-0.5)
    elif covariance == "white":
        sym = np.ones_like(absk)
    else:
        raise ValueError(f"unknown covariance {covariance!r}")
    return np.where(mask, sym, 0.0) / (2.0 * np.pi)


def sample_mu_coeffs(lattice: Lattice, stream: SeededStream,
                     n_samples: int | None = None) -> np.ndarray:
    """Coefficient array(s) of mu samples, band-limited to |k| <= cutoff_n."""
    n = lattice.cutoff_n
    g = gaussian_mode_array(n, stream.rng(), n_samples)
    return g * _ball_symbol(n, n, lattice.alpha, "mu")


def sample_white_coeffs(lattice: Lattice, stream: SeededStream,
                        n_samples: int | None = None) -> np.ndarray:
    n = lattice.cutoff_n
    g = gaussian_mode_array(n, stream.rng(), n_samples)
    return g * _ball_symbol(n, n, lattice.alpha, "white")


def sample_mu(lattice: Lattice, stream: SeededStream) -> SpectralField:
    return SpectralField(lattice, sample_mu_coeffs(lattice, stream))


def sample_white(lattice: Lattice, stream: SeededStream) -> SpectralField:
    return SpectralField(lattice, sample_white_coeffs(lattice, stream))


def sample_pair_coeffs(lattice: Lattice, stream: SeededStream,
                       n_samples: int | None = None,
                       denominator: str = "two_alpha") -> tuple:
    """Initial-data pair (position, velocity) from one stream.

    denominator="two_alpha" scales position modes by (1+|k|^{2a})^{-1/2};
    "alpha" uses (1+|k|^a)^{-1/2} instead (alternative convention kept as a
    flag).  Velocity is white.
    """
    n = lattice.cutoff_n
    rng = stream.rng()
    g = gaussian_mode_array(n, rng, n_samples)
    h = gaussian_mode_array(n, rng, n_samples)
    absk = k_norm_grid(n)
    mask = absk <= n
    if denominator == "two_alpha":
        sym = (1.0 + absk ** (2.0 * lattice.alpha)) ** (-0.5)
    elif denominator == "alpha":
        sym = (1.0 + absk**lattice.alpha) ** (-0.5)
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    u = g * np.where(mask, sym, 0.0) / (2.0 * np.pi)
    v = h * np.where(mask, 1.0, 0.0) / (2.0 * np.pi)
    return u, v


# ---------------------------------------------------------------------------
# Wick powers


def wick_power_grid(samples: np.ndarray, k: int, var: float) -> np.ndarray:
    """H_k(f(x); var) pointwise on physical samples (batched)."""
    return hermite(k, samples, var)


def wick_power(f: SpectralField, k: int, var: float,
               grid_m: int | None = None) -> SpectralField:
    """k-th Wick power H_k(f; var), exact on a degree-k dealiased grid.

    The result is band-limited to k times the input band and is NOT
    re-projected; apply the ball projector when the target expression
    carries one.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    out_band = max(k * f.band, 1)
    m = grid_m if grid_m is not None else max(
        f.lattice.grid_m, smallest_odd_at_least(2 * out_band + 1))
    samples = coeffs_to_grid(f.coeffs, m)
    return SpectralField(f.lattice, grid_to_coeffs(hermite(k, samples, var), out_band))


def wick_integral(samples: np.ndarray, k: int, var: float) -> np.ndarray:
    """int H_k(f(x); var) dx by the exact rectangle rule (batched).

    Exact whenever the grid holds degree-k products without aliasing onto
    the zero mode (grid_m >= k*band+1).
    """
    m = samples.shape[-1]
    cell = 4.0 * np.pi**2 / (m * m)
    return np.sum(hermite(k, samples, var), axis=(-2, -1)) * cell


# ---------------------------------------------------------------------------
# exact chaos spectra (independent of Monte Carlo)


def _mode_variance(band: int, cutoff: int, alpha: float) -> np.ndarray:
    """q(k) = 1_{|k|<=cutoff} / (1+|k|^{2a}) on the storage square."""
    absk = k_norm_grid(band)
    return np.where(absk <= cutoff, 1.0 / (1.0 + absk ** (2.0 * alpha)), 0.0)


def _iterated_convolution(q: np.ndarray, n: int) -> np.ndarray:
    """Exact n-fold discrete convolution of a (2B+1)^2 array via padded FFT."""
    band = q.shape[0] // 2
    out_band = n * band
    m = 2 * out_band + 2
    grid = np.zeros((m, m), dtype=complex)
    idx = np.arange(-band, band + 1) % m
    grid[np.ix_(idx, idx)] = q
    conv = np.fft.ifft2(np.fft.fft2(grid) ** n)
    out_idx = np.arange(-out_band, out_band + 1) % m
    return np.real(conv[np.ix_(out_idx, out_idx)])


def wick_moment_spectrum(cutoff: int, alpha: float, n: int) -> np.ndarray:
    """E|what(k)|^2 for w = phi_N^{wick n}: n! (2pi)^{-2n} q^{*n}(k).

    Exact closed form from the chaos covariance; returned on the square
    |k_i| <= n*cutoff.
    """
    q = _mode_variance(cutoff, cutoff, alpha)
    fact = float(np.prod(np.arange(1, n + 1)))
    return fact * (2.0 * np.pi) ** (-2 * n) * _iterated_convolution(q, n)


def wick_difference_spectrum(cutoff: int, alpha: float, n: int) -> np.ndarray:
    """E|what_{2N}(k) - what_N(k)|^2 for the n-th Wick powers of nested fields.

    The mode covariance of phi_N and phi_{2N} equals q_N, so the cross term
    cancels the smaller spectrum: n! (2pi)^{-2n} (q_{2N}^{*n} - q_N^{*n})(k).
    """
    band = 2 * cutoff
    q_small = _mode_variance(band, cutoff, alpha)
    q_big = _mode_variance(band, 2 * cutoff, alpha)
    fact = float(np.prod(np.arange(1, n + 1)))
    diff = _iterated_convolution(q_big, n) - _iterated_convolution(q_small, n)
    return fact * (2.0 * np.pi) ** (-2 * n) * diff


def sobolev_weight(band: int, alpha: float, s: float) -> np.ndarray:
    return (1.0 + k_norm_grid(band) ** (2.0 * alpha)) ** (s / alpha)


def expected_sobolev_sq(spectrum: np.ndarray, alpha: float, s: float) -> float:
    """E ||w||_{H^s}^2 from a mode-wise second-moment spectrum."""
    band = spectrum.shape[0] // 2
    return float(np.sum(sobolev_weight(band, alpha, s) * spectrum))
