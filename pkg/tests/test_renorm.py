"""Tests for Hermite calculus and renormalization constants."""

import math

import numpy as np
import pytest

from fracwave.errors import NotPositive
from fracwave.renorm import (
    PotentialSpec,
    RenormTable,
    averaged_coeff1_slope,
    averaged_coeffs,
    double_factorial,
    hermite,
    lambda0,
    lattice_constant_b1,
    make_table,
    preset_quartic,
    preset_sextic,
    preset_sextic_violating,
    require_valid,
    sigma_constants,
    sigma_sq_limit,
    tune_criticality,
    validate_potential,
)


def hermite_explicit(k, x, var):
    """Oracle: the explicit sum over self-contractions."""
    total = 0.0
    for j in range(k // 2 + 1):
        total += (math.comb(k, 2 * j) * double_factorial(2 * j - 1)
                  * (-var) ** j * x ** (k - 2 * j))
    return total


def gauss_mean(fn, var, order=60):
    """Oracle: E[fn(N(0, var))] by Gauss-Hermite quadrature."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / np.sqrt(2.0 * np.pi)
    return float(np.sum(weights * fn(np.sqrt(var) * nodes)))


class TestHermite:
    def test_h2(self):
        assert abs(hermite(2, 2.0, 3.0) - 1.0) < 1e-14

    def test_h4(self):
        assert abs(hermite(4, 1.0, 1.0) - (-2.0)) < 1e-14

    def test_recurrence_vs_explicit(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            k = rng.integers(0, 13)
            x = rng.normal(scale=2.0)
            var = rng.uniform(0.1, 3.0)
            want = hermite_explicit(int(k), x, var)
            got = hermite(int(k), x, var)
            assert abs(got - want) <= 1e-12 * (abs(want) + 1.0)

    def test_scaling_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            k = int(rng.integers(0, 11))
            x = rng.normal(scale=2.0)
            var = rng.uniform(0.2, 4.0)
            lhs = hermite(k, x, var)
            rhs = var ** (k / 2.0) * hermite(k, x / np.sqrt(var), 1.0)
            assert abs(lhs - rhs) < 1e-10 * (abs(lhs) + 1.0)

    def test_binomial_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            k = int(rng.integers(0, 9))
            x, y = rng.normal(size=2, scale=1.5)
            s1, s2 = rng.uniform(0.1, 2.0, size=2)
            lhs = hermite(k, x + y, s1 + s2)
            rhs = sum(
                math.comb(k, l) * hermite(l, x, s1) * hermite(k - l, y, s2)
                for l in range(k + 1)
            )
            assert abs(lhs - rhs) < 1e-10 * (abs(lhs) + 1.0)

    def test_derivative_identity(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(30):
            k = int(rng.integers(1, 9))
            x = rng.normal(scale=1.5)
            var = rng.uniform(0.2, 2.0)
            fd = (hermite(k, x + h, var) - hermite(k, x - h, var)) / (2 * h)
            want = k * hermite(k - 1, x, var)
            assert abs(fd - want) < 1e-6 * (abs(want) + 1.0)

    def test_vectorized(self):
        x = np.linspace(-2, 2, 7)
        got = hermite(4, x, 0.7)
        want = [hermite(4, xi, 0.7) for xi in x]
        assert np.allclose(got, want, rtol=1e-14)


class TestAveragedCoeffs:
    def test_quartic(self):
        spec = PotentialSpec(4, (0.0, 0.0, 1.0))
        v = 1.3
        abar = averaged_coeffs(spec, v)
        assert np.allclose(abar, [3 * v**2, 6 * v, 1.0])

    def test_zero_variance_is_identity(self):
        spec = PotentialSpec(6, (0.5, -1.0, 2.0, 3.0))
        assert np.allclose(averaged_coeffs(spec, 0.0), spec.a)

    def test_quadrature_oracle(self):
        spec = PotentialSpec(6, (0.2, -0.7, 1.1, 0.9))
        v = 0.8
        abar = averaged_coeffs(spec, v)
        for z in (0.0, 1.0, -1.0):
            want = gauss_mean(lambda y: spec.value(z + y), v)
            got = sum(abar[j] * z ** (2 * j) for j in range(len(abar)))
            assert abs(got - want) < 1e-10 * (abs(want) + 1.0)

    def test_slope_matches_finite_difference(self):
        spec = PotentialSpec(6, (0.0, 0.3, -0.4, 1.0))
        v, h = 0.9, 1e-6
        fd = (averaged_coeffs(spec, v + h)[1] - averaged_coeffs(spec, v - h)[1]) / (2 * h)
        assert abs(averaged_coeff1_slope(spec, v) - fd) < 1e-7


class TestSigmaConstants:
    def test_closed_form(self):
        assert abs(sigma_sq_limit(0.9) - 1.0 / (0.4 * np.pi)) < 1e-15
        assert abs(sigma_sq_limit(0.9) - 0.7957747) < 1e-6

    def test_n1_enumeration(self):
        # |k| <= 1 keeps the origin and the four unit vectors only
        _, _, tilde = sigma_constants(0.9, 1)
        want = (1.0 + 4.0 * 0.5) / (4.0 * np.pi**2)
        assert abs(tilde - want) < 1e-14

    def test_tilde_scaling_exact(self):
        alpha = 0.85
        _, sn, tilde = sigma_constants(alpha, 12)
        assert tilde == sn * 12 ** (2.0 * (1.0 - alpha))

    def test_convergence_rate(self):
        alpha = 0.9
        ns = np.array([16, 32, 64, 128, 256])
        s2 = sigma_sq_limit(alpha)
        gaps = np.array([sigma_constants(alpha, n)[1] - s2 for n in ns])
        slope = np.polyfit(np.log(ns), np.log(np.abs(gaps)), 1)[0]
        want = -2.0 * (1.0 - alpha)
        assert abs(slope - want) < 0.15 * abs(want)


class TestLatticeConstant:
    def test_truncation_convergence(self):
        b64, tail64 = lattice_constant_b1(0.9, truncation=64)
        b128, _ = lattice_constant_b1(0.9, truncation=128)
        assert abs(b64 - b128) < 1e-4
        assert abs(b64 - b128) < 10 * tail64 + 1e-5

    def test_cross_check_lattice_sums(self):
        # sigma_tilde_n^2 - n^{2(1-a)} sigma^2 -> b1 with O(1/n) residual;
        # Richardson in 1/n over {64,128,256} removes the first-order term
        alpha = 0.9
        s2 = sigma_sq_limit(alpha)
        vals = {}
        for n in (64, 128, 256):
            _, _, tilde = sigma_constants(alpha, n)
            vals[n] = tilde - n ** (2.0 * (1.0 - alpha)) * s2
        extrap = 2.0 * vals[256] - vals[128]
        b1, _ = lattice_constant_b1(alpha)
        assert abs(extrap - b1) < 0.01 * abs(b1)

    def test_alpha_continuity(self):
        vals = [lattice_constant_b1(a, truncation=32)[0]
                for a in (0.8, 0.85, 0.9, 0.95)]
        assert all(np.isfinite(v) for v in vals)
        diffs = np.abs(np.diff(vals))
        assert np.all(diffs < 1.0)


class TestLambda0:
    def test_quartic_closed_form(self):
        alpha = 0.9
        spec = preset_quartic(alpha)
        b1, _ = lattice_constant_b1(alpha)
        # abar_1 = a_1 + 6v so the variance slope is 6 regardless of tuning
        assert abs(lambda0(spec, alpha) - 6.0 * b1) < 1e-12 * abs(b1)

    def test_quadrature_oracle(self):
        alpha = 0.88
        spec = PotentialSpec(6, (0.0, -0.2, 0.5, 1.0))
        v = sigma_sq_limit(alpha)
        h = 1e-5
        fd = (gauss_mean(spec.second_derivative, v + h)
              - gauss_mean(spec.second_derivative, v - h)) / (2 * h)
        from fracwave.renorm import _b1_cached
        want = _b1_cached(alpha) * 0.5 * fd
        assert abs(lambda0(spec, alpha) - want) < 1e-6 * (abs(want) + 1.0)

    def test_pure_mass_term_is_zero_slope(self):
        spec = PotentialSpec(4, (0.0, 1.0, 1e-12))
        assert abs(averaged_coeff1_slope(spec, 0.7)) < 1e-10

    def test_empirical_limit(self):
        # the sextic's quadratic variance dependence makes the slow
        # n^{-2(1-alpha)} residual dominant and cleanly fittable
        alpha = 0.9
        spec = preset_sextic(alpha)
        lam = lambda0(spec, alpha)
        ns = np.array([32, 64, 128, 256, 512])
        scaled = []
        for n in ns:
            _, sn, _ = sigma_constants(alpha, n)
            a1n = averaged_coeffs(spec, sn)[1]
            a1 = averaged_coeffs(spec, sigma_sq_limit(alpha))[1]
            scaled.append(n ** (2.0 * (1.0 - alpha)) * (a1n - a1))
        resid = np.abs(np.array(scaled) - lam)
        slope = np.polyfit(np.log(ns), np.log(resid), 1)[0]
        want = -min(2.0 * alpha - 1.0, 2.0 * (1.0 - alpha))
        assert abs(slope - want) < 0.25 * abs(want)


class TestValidateAndTune:
    def test_tuned_quartic(self):
        alpha = 0.9
        spec = preset_quartic(alpha)
        assert abs(spec.a[1] + 6.0 * sigma_sq_limit(alpha)) < 1e-12
        rep = validate_potential(spec, alpha)
        assert rep.critical and rep.positive

    def test_tuned_sextic(self):
        alpha = 0.9
        spec = preset_sextic(alpha)
        assert abs(spec.a[1] + 45.0 * sigma_sq_limit(alpha) ** 2) < 1e-10
        rep = validate_potential(spec, alpha)
        assert rep.critical and rep.positive

    def test_violating_preset(self):
        alpha = 0.9
        spec = preset_sextic_violating(alpha)
        rep = validate_potential(spec, alpha)
        assert rep.critical and not rep.positive
        with pytest.raises(NotPositive):
            require_valid(spec, alpha)

    def test_tune_is_idempotent(self):
        alpha = 0.87
        spec = tune_criticality(PotentialSpec(6, (0.1, 3.0, 0.7, 2.0)), alpha)
        again = tune_criticality(spec, alpha)
        assert np.allclose(spec.a, again.a, atol=1e-14)


class TestRenormTable:
    def test_tilde_identity_exact(self):
        t = make_table(preset_quartic(0.9), 0.9, 16)
        assert t.sigma_tilde_n_sq == t.sigma_n_sq * 16 ** (2.0 * (1.0 - 0.9))

    def test_abar_n_converges(self):
        alpha = 0.9
        spec = preset_quartic(alpha)
        gaps = []
        for n in (16, 32, 64, 128):
            t = make_table(spec, alpha, n)
            gaps.append(np.max(np.abs(np.array(t.a_bar_n) - np.array(t.a_bar))))
        assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))

    def test_kappa_limit(self):
        alpha = 0.9
        spec = preset_quartic(alpha)
        lam = lambda0(spec, alpha)
        kappas = [make_table(spec, alpha, n).kappa_n for n in (64, 128, 256, 512)]
        resid = np.abs(np.array(kappas) - (2.0 * lam - 1.0))
        assert resid[-1] < resid[0]
        assert resid[-1] < 0.05 * (abs(2.0 * lam - 1.0) + 1.0)

    def test_json_round_trip(self):
        t = make_table(preset_sextic(0.92), 0.92, 8)
        t2 = RenormTable.from_json(t.to_json())
        assert t2 == t
        assert t2.digest() == t.digest()

    def test_couplings(self):
        t = make_table(preset_sextic(0.92), 0.92, 8)
        beta = 1.0 - 0.92
        want = t.a_bar_n[3] * 8.0 ** (-2.0 * beta)
        assert abs(t.coupling(3) - want) < 1e-15
