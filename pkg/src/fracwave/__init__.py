"""Pseudo-spectral laboratory for renormalized fractional waves on T^2."""

from .errors import (
    ConditionViolated,
    ConfigError,
    DegenerateWeights,
    FracwaveError,
    GridTooSmall,
    NonFinite,
    NotCritical,
    NotPositive,
    PositivityHolds,
    QuadratureNotConverged,
)
from .lattice import Lattice, SpectralField, TORUS_AREA
from .renorm import (
    PotentialSpec,
    RenormTable,
    hermite,
    make_table,
    preset_quartic,
    preset_sextic,
    preset_sextic_violating,
    sigma_constants,
    tune_criticality,
    tune_gibbs_quadratic,
    validate_potential,
)
from .sampling import SeededStream, sample_mu, sample_white
from .gibbs import (
    McEstimate,
    counterexample_growth,
    density_gap_mc,
    log_partition_mc,
    potential_integral,
)
from .variational import DriftProfile, minimize, objective
from .dynamics import (
    EvolutionConfig,
    PairState,
    convergence_experiment,
    energy,
    evolve,
    invariance_diagnostic,
)

__version__ = "0.1.0"
