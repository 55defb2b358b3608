"""percolab: phase transitions in modified uniform-edge graph processes.

Simulates uniform-edge (three variants) and two-choice (bounded-size
and product-rule) graph processes with exact incremental component
moments, integrates the deterministic limit system to locate the
critical time and growth constants, solves the giant-component
survival equation, and reproduces the theory's numerical claims at
desk scale through a seeded experiment harness.
"""
from .errors import (
    BlowUpError,
    BracketError,
    CriticalWindowError,
    InvalidConfigError,
    NonconvergenceError,
    NumericalFailureError,
)
from .giant import (
    FixedPointResult,
    SupercriticalBounds,
    bf_growth_prediction,
    rho_lower_bound,
    rho_upper_bound,
    solve_rho,
    supercritical_bounds,
)
from .harness import ExperimentConfig, run_config, run_experiment
from .ledger import (
    DisjointSetForest,
    MergeOutcome,
    MomentLedger,
    SizeDistribution,
    add_edge,
    brute_force_moments,
    delta_k,
    ledger_init,
    snapshot_distribution,
)
from .ode import (
    CriticalConstants,
    OdeState,
    TransformedState,
    Trajectory,
    deriv_raw,
    deriv_transformed,
    find_tc,
    h_value,
    integrate,
    integrating_factor_G,
    reconstruct_g,
    sbar_k,
)
from .processes import (
    InitialGraphSpec,
    ProcessKind,
    Simulation,
    Snapshot,
    TraceRecord,
    bf_step,
    build_initial_graph,
    er_step,
    poisson_edge_count,
    product_rule_step,
    run_process,
)

__version__ = "0.1.0"
