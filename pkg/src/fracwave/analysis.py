"""Deterministic lattice-sum oracles for the analytic estimates.

Three families of checks, all pure sums with no randomness:

* dispersive kernel: K_j(t,z) = sum_k phi_j(k) e^{i t sqrt(1+|k|^{2a}) + ik.z}
  on the annulus block phi_j, whose sup over z should decay like
  2^{2j(1-a/2)} / |t| in dimension two;
* two-point and n-fold convolution sums
  sum_k <k>^{-eta1} <k-k0>^{-eta2} against their claimed envelopes in k0,
  with <k> = sqrt(1+|k|^2);
* the high-frequency truncated l-fold sum whose N^{-2 eps} decay drives the
  large-deviation estimates.

Envelope comparisons return max ratios over a documented k0 ladder; decay
laws are fitted by least squares in log-log space with an R^2 report.
"""

from __future__ import annotations

import numpy as np

from .errors import ConditionViolated
from .lattice import k_norm_grid, phi_bump


def jap_bracket(band: int) -> np.ndarray:
    """<k> = sqrt(1 + |k|^2) on the storage square."""
    return np.sqrt(1.0 + k_norm_grid(band) ** 2)


def _eval_complex_modes(coeffs: np.ndarray, grid_m: int) -> np.ndarray:
    """sum_k c_k e^{ik.z} on the uniform M x M grid, general complex c_k.

    Exact at the grid points for any band (frequencies fold mod M onto the
    same sample values); the sup over the grid under-samples a band wider
    than M, which the refinement check quantifies.
    """
    band = coeffs.shape[-1] // 2
    m = int(grid_m)
    grid = np.zeros((m, m), dtype=complex)
    idx = np.arange(-band, band + 1) % m
    np.add.at(grid, np.ix_(idx, idx), coeffs)
    return np.fft.ifft2(grid) * (m * m)


def kernel_block_band(j: int) -> int:
    """Largest |k_i| in the support of phi_j: |k| <= (8/3) 2^j."""
    return int(np.ceil(8.0 / 3.0 * 2.0**j))


def dispersive_kernel_sup(j: int, t: float, alpha: float,
                          grid_m: int = 128) -> float:
    """sup over the z-grid of |K_j(t, z)|."""
    if t == 0.0:
        raise ValueError("t must be nonzero")
    band = kernel_block_band(j)
    absk = k_norm_grid(band)
    phase = t * np.sqrt(1.0 + absk ** (2.0 * alpha))
    coeffs = phi_bump(absk / 2.0**j) * np.exp(1j * phase)
    return float(np.max(np.abs(_eval_complex_modes(coeffs, grid_m))))


def kernel_refinement_check(j: int, t: float, alpha: float,
                            grid_m: int = 128) -> tuple[float, float, float]:
    """(sup at grid_m, sup at 2*grid_m, relative change on doubling)."""
    a = dispersive_kernel_sup(j, t, alpha, grid_m)
    b = dispersive_kernel_sup(j, t, alpha, 2 * grid_m)
    return a, b, abs(b - a) / b


def annulus_mass(j: int) -> float:
    """sum_k phi_j(k): the t -> 0 limit of sup |K_j|."""
    band = kernel_block_band(j)
    return float(np.sum(phi_bump(k_norm_grid(band) / 2.0**j)))


def kernel_decay_constants(j_values, t_values, alpha: float,
                           grid_m: int = 128) -> dict:
    """Per-block constants C_j = max_t sup_z |K_j| * |t| / 2^{2j(1-a/2)}.

    The claimed bound is sup_z |K_j(t, .)| <= C 2^{2j(1-a/2)} / |t| with one
    C for all blocks; the stability ratio max C_j / min C_j measures how
    block-independent the fitted constant is.
    """
    consts = {}
    for j in j_values:
        scale = 2.0 ** (2.0 * j * (1.0 - alpha / 2.0))
        consts[j] = max(
            dispersive_kernel_sup(j, t, alpha, grid_m) * abs(t) / scale
            for t in t_values
        )
    vals = np.array(list(consts.values()))
    return {"constants": consts,
            "stability_ratio": float(np.max(vals) / np.min(vals))}


# ---------------------------------------------------------------------------
# convolution sums


def _pair_sum(eta1: float, eta2: float, k0: tuple, truncation: int) -> float:
    """sum over |k_i| <= truncation of <k>^{-eta1} <k - k0>^{-eta2}."""
    k = np.arange(-truncation, truncation + 1)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    b1 = np.sqrt(1.0 + k1**2 + k2**2)
    b2 = np.sqrt(1.0 + (k1 - k0[0]) ** 2 + (k2 - k0[1]) ** 2)
    return float(np.sum(b1 ** (-eta1) * b2 ** (-eta2)))


def pair_tail_estimate(eta1: float, eta2: float, truncation: int) -> float:
    """Integral bound on the part of the pair sum outside |k| <= truncation."""
    p = eta1 + eta2
    if p <= 2.0:
        return np.inf
    return 2.0 * np.pi * truncation ** (2.0 - p) / (p - 2.0)


def default_k0_ladder(radius: int = 32):
    """Axis and diagonal k0 points out to the requested Euclidean radius."""
    out = [(0, 0)]
    r = 1
    while r <= radius:
        out.append((r, 0))
        d = int(round(r / np.sqrt(2.0)))
        if d > 0 and np.hypot(d, d) <= radius:
            out.append((d, d))
        r *= 2
    return out


def convolution_sum_oracle(case: str, eta1: float, eta2: float = None,
                           n: int = None, k0_ladder=None,
                           truncation: int = 64) -> dict:
    """Lattice-sum check of the two-point convolution envelopes.

    Cases (with d = 2, 0 <= eta1 <= eta2, eta1 + eta2 > 2):
      i   (eta2 < 2): envelope <k0>^{-(eta1+eta2-2)}
      ii  (eta2 = 2): envelope log<k0> <k0>^{-eta1}
      iii (eta2 > 2): envelope <k0>^{-eta1}
      iv  (n-fold, (n-1)2/n < eta1 < 2): envelope <k>^{-(n eta1 - 2(n-1))},
          checked by a log-log fit of the exact n-fold convolution.

    Returns the max sum/envelope ratio over the k0 ladder (cases i-iii) or
    the fitted exponent with R^2 (case iv), plus the truncation tail bound.
    """
    if case in ("i", "ii", "iii"):
        if not (0.0 <= eta1 <= eta2 and eta1 + eta2 > 2.0):
            raise ConditionViolated("need 0 <= eta1 <= eta2 and eta1+eta2 > d")
        if case == "i" and not eta2 < 2.0:
            raise ConditionViolated("case (i) needs eta2 < d")
        if case == "ii" and eta2 != 2.0:
            raise ConditionViolated("case (ii) needs eta2 = d")
        if case == "iii" and not eta2 > 2.0:
            raise ConditionViolated("case (iii) needs eta2 > d")
        if k0_ladder is None:
            k0_ladder = default_k0_ladder()
        ratios = {}
        for k0 in k0_ladder:
            bracket = np.sqrt(1.0 + k0[0] ** 2 + k0[1] ** 2)
            if case == "i":
                env = bracket ** (-(eta1 + eta2 - 2.0))
            elif case == "ii":
                env = max(np.log(bracket), 1.0) * bracket ** (-eta1)
            else:
                env = bracket ** (-eta1)
            ratios[k0] = _pair_sum(eta1, eta2, k0, truncation) / env
        return {"case": case, "ratios": ratios,
                "max_ratio": max(ratios.values()),
                "tail_estimate": pair_tail_estimate(eta1, eta2, truncation)}

    if case == "iv":
        if n is None or n < 2:
            raise ConditionViolated("case (iv) needs a fold count n >= 2")
        if not (2.0 * (n - 1) / n < eta1 < 2.0):
            raise ConditionViolated("case (iv) needs (n-1)d/n < eta < d")
        conv = _nfold_convolution([weight_array(eta1, truncation)] * n)
        want = -(n * eta1 - 2.0 * (n - 1))
        fitted, r_sq = _radial_loglog_fit(conv, r_min=4, r_max=truncation)
        return {"case": case, "fitted_exponent": fitted,
                "claimed_exponent": want, "r_squared": r_sq}

    raise ConditionViolated(f"unknown case {case!r}")


def weight_array(eta: float, truncation: int, shell=None) -> np.ndarray:
    """<k>^{-eta} on |k| <= truncation, optionally on a shell (lo, hi]."""
    absk = k_norm_grid(truncation)
    w = (1.0 + absk**2) ** (-eta / 2.0)
    mask = absk <= truncation
    if shell is not None:
        lo, hi = shell
        mask &= (absk > lo) & (absk <= hi)
    return np.where(mask, w, 0.0)


def _nfold_convolution(arrays) -> np.ndarray:
    """Exact multi-fold convolution of square coefficient arrays (FFT)."""
    bands = [a.shape[0] // 2 for a in arrays]
    out_band = sum(bands)
    m = 2 * out_band + 2
    prod = np.ones((m, m), dtype=complex)
    for a in arrays:
        band = a.shape[0] // 2
        grid = np.zeros((m, m), dtype=complex)
        idx = np.arange(-band, band + 1) % m
        grid[np.ix_(idx, idx)] = a
        prod *= np.fft.fft2(grid)
    conv = np.fft.ifft2(prod)
    out_idx = np.arange(-out_band, out_band + 1) % m
    return np.real(conv[np.ix_(out_idx, out_idx)])


def _radial_loglog_fit(values: np.ndarray, r_min: int, r_max: int):
    """Slope of log value against log <k> along the positive k1 axis."""
    band = values.shape[0] // 2
    rs = np.arange(r_min, min(r_max, band) + 1)
    ys = values[band + rs, band]
    keep = ys > 0.0
    x = np.log(np.sqrt(1.0 + rs[keep].astype(float) ** 2))
    y = np.log(ys[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - np.mean(y)) ** 2)
    r_sq = 1.0 - float(np.sum(resid**2) / ss_tot) if ss_tot > 0 else 1.0
    return float(slope), r_sq


def truncated_interaction_sum(l: int, j: int, alpha: float, eps: float,
                              n_cut: int, m_cut: int | None = None) -> float:
    """sum over N < |k_1..k_j| <= M, |k_{j+1}..k_l| <= M of
    <k_1+...+k_l>^{-2 gamma} prod <k_i>^{-2 alpha}, gamma = l(1-alpha)+eps.

    The claimed bound is C N^{-2 eps} uniformly in M; evaluated exactly by
    FFT convolution with M = 2N by default.
    """
    if not (1 <= j <= l):
        raise ConditionViolated("need 1 <= j <= l")
    m_cut = 2 * n_cut if m_cut is None else m_cut
    gamma = l * (1.0 - alpha) + eps
    high = weight_array(2.0 * alpha, m_cut, shell=(n_cut, m_cut))
    low = weight_array(2.0 * alpha, m_cut)
    conv = _nfold_convolution([high] * j + [low] * (l - j))
    band = conv.shape[0] // 2
    bracket = jap_bracket(band)
    return float(np.sum(conv * bracket ** (-2.0 * gamma)))


def truncated_interaction_rate(l: int, j: int, alpha: float, eps: float,
                               n_values) -> dict:
    """Fitted decay exponent of the truncated sum across a cutoff ladder."""
    vals = {n: truncated_interaction_sum(l, j, alpha, eps, n)
            for n in n_values}
    x = np.log(np.array(list(vals.keys()), dtype=float))
    y = np.log(np.array(list(vals.values())))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - np.mean(y)) ** 2)
    r_sq = 1.0 - float(np.sum(resid**2) / ss_tot) if ss_tot > 0 else 1.0
    return {"values": vals, "fitted_exponent": float(slope),
            "claimed_exponent": -2.0 * eps, "r_squared": r_sq}
