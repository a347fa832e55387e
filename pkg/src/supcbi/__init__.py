"""Simulation and estimation toolkit for superposed self-exciting
jump-diffusion models of streamflow discharge.

The hot Monte Carlo kernels have a compiled (Cython) implementation with a
bit-identical pure-Python fallback; ``supcbi._kernels.BACKEND`` reports which
one is active.
"""

from ._kernels import BACKEND
from .charfn import (
    IntegrabilityError,
    RiccatiTrajectory,
    charfn_cumulants,
    discrete_charfn,
    log_charfn,
    log_discrete_charfn,
    sensitivity_deviation,
    solve_riccati,
    stationary_charfn,
)
from .estimation import (
    AcfFit,
    DataError,
    DischargeSeries,
    FitError,
    MomentFit,
    empirical_acf,
    empirical_stats,
    fit_acf,
    fit_moments,
    load_csv,
    pinned_B,
    relative_error_metric,
)
from .mixing import (
    DiscretePartition,
    GammaMixing,
    build_partition,
    discrete_inverse_mean,
    embedding_gap,
    inverse_mean,
    mixing_density,
    sample_speed,
)
from .moments import (
    SummaryStats,
    SupCbiParams,
    cbi_acf,
    cbi_stats,
    discrete_supcbi_acf,
    discrete_supcbi_stats,
    supcbi_acf,
    supcbi_acf_quadrature,
    supcbi_stats,
)
from .regimes import (
    InsufficientTransitionsError,
    MixExpModel,
    WaitingTimes,
    extract_waiting_times,
    fit_mixexp,
    mixexp_stats,
    reduce_model,
    waiting_stats,
)
from .simulator import (
    HOURS_PER_YEAR,
    InsufficientSamplesError,
    PathConfig,
    StreamingStats,
    finalize_stats,
    path_acf,
    simulate_embedding,
    simulate_supcbi,
)
from .tempered_levy import (
    TemperedStableMeasure,
    levy_exponent,
    levy_moment,
    sample_increment,
    sample_increments,
)

__version__ = "0.1.0"
