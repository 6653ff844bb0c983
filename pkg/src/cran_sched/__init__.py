"""Uplink scheduling under a sum decoding-complexity budget.

The package models the decoding cost of rate-adapted turbo-coded uplinks,
allocates per-user rates so the total cost stays within a server budget
(water-level-guided and cost-greedy schedulers, plus a continuous
water-filling reference), and evaluates everything in a Monte-Carlo system
simulation with budget calibration to a target computational-outage rate.
"""

from .complexity import (
    GAP_GUARD,
    DomainError,
    LinearizationCoeffs,
    ModelParams,
    decode_complexity,
    gap,
    iteration_count,
    k_of_epsilon,
    linearize,
    quadratic_complexity,
)
from .harness import (
    CampaignConfig,
    CampaignResult,
    SchedulerSeries,
    SweepPoint,
    TrialOutcome,
    budget_from_samples,
    calibrate_budget,
    empirical_cdf,
    run_campaign,
    sweep_lambda,
    sweep_nc,
    write_cdf_csvs,
    write_manifest,
    write_per_trial_csv,
    write_summary_csv,
    write_sweep_csv,
)
from .mcs import (
    DEFAULT_RATES,
    McsTable,
    build_table,
    db_to_linear,
    default_table,
    load_rates,
    max_feasible_index,
    next_lower,
)
from .netsim import (
    MIN_DISTANCE_KM,
    Arena,
    CellArrays,
    CellGeometry,
    LayoutError,
    NetworkLayout,
    PhyParams,
    TrialDraw,
    assemble_cells,
    draw_from_row,
    draw_trial,
    estimate_cell_areas,
    generate_layout,
    load_layout,
    most_central_ids,
    occupancy_probability,
    save_layout,
    uplink_sinr,
    uplink_sinr_all,
)
from .sched import (
    ContinuousSolution,
    RateAllocation,
    RateEntry,
    UserChannel,
    continuous_waterfill,
    drop_predicate,
    mrs,
    required_water_level,
    scc,
    swf_discrete,
)

__version__ = "0.1.0"

__all__ = [
    "GAP_GUARD",
    "MIN_DISTANCE_KM",
    "DEFAULT_RATES",
    "Arena",
    "CellArrays",
    "CampaignConfig",
    "CampaignResult",
    "CellGeometry",
    "ContinuousSolution",
    "DomainError",
    "LayoutError",
    "LinearizationCoeffs",
    "McsTable",
    "ModelParams",
    "NetworkLayout",
    "PhyParams",
    "RateAllocation",
    "RateEntry",
    "SchedulerSeries",
    "SweepPoint",
    "TrialDraw",
    "assemble_cells",
    "draw_from_row",
    "TrialOutcome",
    "UserChannel",
    "budget_from_samples",
    "build_table",
    "calibrate_budget",
    "continuous_waterfill",
    "db_to_linear",
    "decode_complexity",
    "default_table",
    "draw_trial",
    "drop_predicate",
    "empirical_cdf",
    "estimate_cell_areas",
    "gap",
    "generate_layout",
    "iteration_count",
    "k_of_epsilon",
    "linearize",
    "load_layout",
    "load_rates",
    "max_feasible_index",
    "most_central_ids",
    "mrs",
    "next_lower",
    "occupancy_probability",
    "quadratic_complexity",
    "required_water_level",
    "run_campaign",
    "save_layout",
    "scc",
    "swf_discrete",
    "sweep_lambda",
    "sweep_nc",
    "write_cdf_csvs",
    "write_manifest",
    "write_per_trial_csv",
    "write_summary_csv",
    "write_sweep_csv",
    "uplink_sinr",
    "uplink_sinr_all",
    "__version__",
]
