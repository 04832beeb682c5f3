"""Truncated wave dynamics: exact linear flow, Strang splitting, invariance.

The second-order system is grouped either as

    shifted:   d2u + |grad|^{2a} u + F(u) = 0      (omega_k = |k|^a)
    unshifted: d2u + (1+|grad|^{2a}) u + G(u) = 0  (omega_k = sqrt(1+|k|^{2a}))

with G(u) = F(u) - u; both integrate the same trajectory.  The nonlinear
force for the renormalized potential uses the Hermite derivative identity
d/dx H_k(x; s) = k H_{k-1}(x; s), so V_n'(u) is a combination of odd Wick
powers; the cubic limit flow keeps lam (u^3 - 3 s u) plus a linear term.

The linear flow is applied exactly per mode (no CFL restriction); the
velocity kick carries the nonlinearity.  The splitting is symmetric, hence
time-reversible and second-order accurate, and supports batched states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateWeights, NonFinite
from .gibbs import (
    even_moments,
    hermite_integral_weights,
    potential_integral_from_moments,
    _weights_summary,
)
from .lattice import (
    Lattice,
    TORUS_AREA,
    coeffs_to_grid,
    grid_to_coeffs,
    k_norm_grid,
    pad_coeffs,
    project_coeffs,
    smallest_odd_at_least,
    sobolev_norm_coeffs,
)
from .renorm import RenormTable, hermite
from .sampling import (
    SeededStream,
    sample_mu_coeffs,
    sample_pair_coeffs,
    sample_white_coeffs,
)


@dataclass(frozen=True)
class PairState:
    """Position/velocity coefficient arrays, optionally batched in front."""

    lattice: Lattice
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if u.shape != v.shape or u.shape[-1] != u.shape[-2]:
            raise ValueError("u and v must be equal square coefficient arrays")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def band(self) -> int:
        return (self.u.shape[-1] - 1) // 2


@dataclass(frozen=True)
class EvolutionConfig:
    """Integrator settings; linear_coeff is an extra mass term in the force."""

    dt: float
    t_final: float
    output_stride: int = 1
    equation: str = "full_potential"
    mass_convention: str = "shifted"
    linear_coeff: float = 0.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigError("dt must be positive")
        if self.equation not in ("full_potential", "cubic_limit"):
            raise ConfigError(f"unknown equation {self.equation!r}")
        if self.mass_convention not in ("shifted", "unshifted"):
            raise ConfigError(f"unknown mass convention {self.mass_convention!r}")
        span = self.t_final / (self.dt * self.output_stride)
        if abs(span - round(span)) > 1e-9 or round(span) < 1:
            raise ConfigError("dt * output_stride must divide t_final")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


def frequency_grid(band: int, alpha: float, mass: str) -> np.ndarray:
    """omega_k: sqrt(1+|k|^{2a}) for mass='with_one', |k|^a for 'without'."""
    absk = k_norm_grid(band)
    if mass == "with_one":
        return np.sqrt(1.0 + absk ** (2.0 * alpha))
    if mass == "without":
        return absk**alpha
    raise ValueError(f"unknown mass {mass!r}")


def _mass_of(convention: str) -> str:
    return "without" if convention == "shifted" else "with_one"


def linear_flow(state: PairState, t: float, mass: str = "without") -> PairState:
    """Exact per-mode rotation; sin(t w)/w extends to t at w = 0."""
    w = frequency_grid(state.band, state.lattice.alpha, mass)
    c = np.cos(t * w)
    pos = w > 0.0
    safe = np.where(pos, w, 1.0)
    s_over = np.where(pos, np.sin(t * w) / safe, t)
    ws = np.where(pos, w * np.sin(t * w), 0.0)
    u = c * state.u + s_over * state.v
    v = -ws * state.u + c * state.v
    return PairState(state.lattice, u, v)


def force_grid_m(table: RenormTable) -> int:
    """Grid resolving degree-(2m-1) products back onto the cutoff ball."""
    return smallest_odd_at_least(table.spec.degree_2m * table.n + 1)


def nonlinear_force(u_coeffs: np.ndarray, table: RenormTable,
                    equation: str = "full_potential",
                    linear_coeff: float = 0.0) -> np.ndarray:
    """P_n V_n'(P_n u) (or the cubic limit force) plus linear_coeff * P_n u.

    V_n'(u) = sum_j 2j abar_{j,n} n^{-(2j-4)(1-a)} H_{2j-1}(u; tilde);
    the cubic limit force is lam_cubic H_3(u; tilde) with lam_cubic = 4 abar_2.
    """
    band = (u_coeffs.shape[-1] - 1) // 2
    proj = project_coeffs(pad_coeffs(u_coeffs, max(band, table.n)), table.n)
    grid = coeffs_to_grid(proj, force_grid_m(table))
    var = table.sigma_tilde_n_sq
    if equation == "full_potential":
        couplings = table.couplings()
        p = np.zeros_like(grid)
        for j in range(1, len(couplings)):
            p = p + 2 * j * couplings[j] * hermite(2 * j - 1, grid, var)
    elif equation == "cubic_limit":
        p = table.lambda_cubic * hermite(3, grid, var)
    else:
        raise ValueError(f"unknown equation {equation!r}")
    force = project_coeffs(grid_to_coeffs(p, table.n), table.n)
    if linear_coeff != 0.0:
        force = force + linear_coeff * proj
    return force


def energy(state: PairState, table: RenormTable) -> float:
    """E = (1/2) int (|du/dt|^2 + ||grad|^a u|^2) dx + int V_n(P_n u) dx.

    Conserved by both mass groupings of the full-potential flow with
    linear_coeff = 0 resp. -1 (they integrate the same trajectory);
    single states only.
    """
    if state.u.ndim != 2:
        raise ValueError("energy expects an unbatched state")
    absk2a = k_norm_grid(state.band) ** (2.0 * table.alpha)
    quad = 0.5 * TORUS_AREA * float(
        np.sum(np.abs(state.v) ** 2 + absk2a * np.abs(state.u) ** 2))
    proj = project_coeffs(pad_coeffs(state.u, max(state.band, table.n)), table.n)
    grid = coeffs_to_grid(proj, force_grid_m(table))
    moments = even_moments(grid, table.spec.m)
    pot = float(potential_integral_from_moments(moments, table, "V_N"))
    return quad + pot


def strang_step(state: PairState, table: RenormTable, cfg: EvolutionConfig,
                dt: float | None = None) -> PairState:
    """Half linear flow, velocity kick by the nonlinear force, half linear."""
    h = cfg.dt if dt is None else dt
    mass = _mass_of(cfg.mass_convention)
    mid = linear_flow(state, 0.5 * h, mass)
    kick = mid.v - h * nonlinear_force(mid.u, table, cfg.equation,
                                       cfg.linear_coeff)
    return linear_flow(PairState(state.lattice, mid.u, kick), 0.5 * h, mass)


def evolve(state: PairState, table: RenormTable, cfg: EvolutionConfig,
           callback=None):
    """Integrate to t_final; returns (times, states) sampled every stride."""
    times = [0.0]
    out = [state]
    if callback is not None:
        callback(0.0, state)
    cur = state
    for step in range(1, cfg.n_steps + 1):
        cur = strang_step(cur, table, cfg)
        if step % cfg.output_stride == 0:
            t = step * cfg.dt
            if not (np.all(np.isfinite(cur.u)) and np.all(np.isfinite(cur.v))):
                raise NonFinite(f"non-finite coefficients at t = {t:.6g}")
            times.append(t)
            out.append(cur)
            if callback is not None:
                callback(t, cur)
    return np.array(times), out


def sample_pair_state(lattice: Lattice, stream: SeededStream,
                      n_samples: int | None = None,
                      denominator: str = "two_alpha") -> PairState:
    u, v = sample_pair_coeffs(lattice, stream, n_samples, denominator)
    return PairState(lattice, u, v)


# ---------------------------------------------------------------------------
# convergence experiment: full dynamics against the cubic limit


def convergence_experiment(tables, seeds, t_final: float, sobolev_sigma: float,
                           dt: float = 2e-3, output_stride: int = 50,
                           denominator: str = "two_alpha",
                           cubic_linear_coeff: float | None = None):
    """sup_t ||u_n - v_n||_{H^sigma} per (seed, n) for shared initial data.

    u_n solves the full renormalized equation, v_n the cubic limit with
    linear coefficient 2*lambda0 (overridable); both start from the same
    sampled pair at cutoff n.  Returns (rows, medians) where rows map
    (seed, n) -> sup-norm and medians is the per-n median across seeds.
    """
    rows = {}
    for table in tables:
        alpha = table.alpha
        if not sobolev_sigma < alpha - 1.0:
            raise ConfigError("sobolev_sigma must lie below alpha - 1")
        n = table.n
        lat = Lattice(n, 2 * n + 1, alpha)
        lc = (2.0 * table.lambda_0 if cubic_linear_coeff is None
              else cubic_linear_coeff)
        cfg_full = EvolutionConfig(dt, t_final, output_stride,
                                   "full_potential", "shifted", 0.0)
        cfg_cubic = EvolutionConfig(dt, t_final, output_stride,
                                    "cubic_limit", "shifted", lc)
        for seed in seeds:
            state = sample_pair_state(lat, SeededStream(seed),
                                      denominator=denominator)
            _, traj_u = evolve(state, table, cfg_full)
            _, traj_v = evolve(state, table, cfg_cubic)
            sup = max(
                float(sobolev_norm_coeffs(a.u - b.u, alpha, sobolev_sigma))
                for a, b in zip(traj_u, traj_v)
            )
            rows[(seed, n)] = sup
    medians = {
        table.n: float(np.median([rows[(s, table.n)] for s in seeds]))
        for table in tables
    }
    return rows, medians


# ---------------------------------------------------------------------------
# invariance diagnostic


def _observables(state: PairState, table: RenormTable) -> dict:
    """L2 mass, quartic Wick integral and int Vt of the position marginal."""
    proj = project_coeffs(pad_coeffs(state.u, max(state.band, table.n)), table.n)
    grid = coeffs_to_grid(proj, force_grid_m(table))
    moments = even_moments(grid, table.spec.m)
    w = hermite_integral_weights(2, table.sigma_tilde_n_sq)
    return {
        "l2_sq": moments[..., 1],
        "wick4": moments[..., :3] @ w[2],
        "int_vt": potential_integral_from_moments(moments, table),
    }


def invariance_diagnostic(table: RenormTable, t_probe: float, n_samples: int,
                          stream: SeededStream, dt: float = 0.01,
                          ess_min_frac: float = 0.0) -> dict:
    """Reweighted observable drift under the flow started from the base pair.

    Samples (phi, phi') from mu x white, weights e^{-int Vt_n(phi)}, flows to
    t_probe with the shifted full-potential equation (whose Hamiltonian is
    the Gibbs exponent), and reports the self-normalized paired discrepancy
    of each observable with its standard error and the effective sample size.
    """
    lat = Lattice(table.n, 2 * table.n + 1, table.alpha)
    u0 = sample_mu_coeffs(lat, stream.substream(1), n_samples)
    v0 = sample_white_coeffs(lat, stream.substream(2), n_samples)
    state0 = PairState(lat, u0, v0)
    obs0 = _observables(state0, table)
    log_w = -np.asarray(obs0["int_vt"], dtype=float)
    _, ess, _ = _weights_summary(log_w)
    if ess < ess_min_frac * n_samples:
        raise DegenerateWeights(
            f"ESS {ess:.1f} below {ess_min_frac:.1%} of {n_samples}")
    w = np.exp(log_w - np.max(log_w))
    w_sum = float(np.sum(w))

    if t_probe == 0.0:
        state_t = state0
    else:
        steps = max(int(round(t_probe / dt)), 1)
        cfg = EvolutionConfig(t_probe / steps, t_probe, steps,
                              "full_potential", "shifted", 0.0)
        _, traj = evolve(state0, table, cfg)
        state_t = traj[-1]
    obs_t = _observables(state_t, table)

    report = {"ess": ess, "ess_frac": ess / n_samples, "n_samples": n_samples,
              "t_probe": t_probe, "observables": {}}
    for name in ("l2_sq", "wick4", "int_vt"):
        d = np.asarray(obs_t[name] - obs0[name], dtype=float)
        mean = float(np.sum(w * d) / w_sum)
        var = float(np.sum(w**2 * (d - mean) ** 2)) / w_sum**2
        se = np.sqrt(var)
        report["observables"][name] = {
            "discrepancy": mean,
            "std_error": se,
            "standardized": abs(mean) / se if se > 0 else 0.0,
        }
    return report
