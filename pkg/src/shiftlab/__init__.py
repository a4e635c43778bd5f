"""Numerical verdicts for weighted shift dynamics on graded sequence spaces."""

from .spaces import (
    ExponentSequence,
    FiniteVector,
    KoetheMatrix,
    LogReal,
    PNorm,
    PowerSeriesType,
    ShiftLabError,
    SpaceSpec,
    WeightSequence,
    basis_vector,
    make_power_series_space,
    seminorm,
)
from .shifts import (
    ShiftKind,
    ShiftOperatorSpec,
    apply,
    cesaro_mean,
    cesaro_seminorm,
    iterate,
    iterate_seminorm,
)
from .checkers import (
    Outcome,
    PropertyReport,
    TruncationBudget,
    Verdict,
    Witness,
    check_cesaro_bounded,
    check_continuity,
    check_continuity_power_series,
    check_mean_ergodic,
    check_montel,
    check_power_bounded,
    check_power_bounded_generic,
    check_power_bounded_power_series,
    check_topologizable,
    check_topologizable_power_series,
    full_report,
    limsup_along_n_plus_m,
)
from .catalog import (
    CatalogEntry,
    analytic_log_product,
    catalog_entries,
    entry_by_name,
    verify_entry,
)
from .simulator import (
    ConvergenceClass,
    ConvergenceKind,
    TrajectoryRecord,
    classify,
    classify_sequence,
    cross_validate,
    forward_limit_sequence,
    run_trajectory,
)

__version__ = "0.1.0"
