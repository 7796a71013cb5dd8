"""Joint channel and power allocation games for multihop cognitive radio networks."""

from ._core import (
    AggregateRow,
    GameKind,
    GuardError,
    InvalidStrategyError,
    ParseError,
    RunMetrics,
    Scenario,
    ScenarioError,
    ScenarioParams,
    aggregate,
    aggregate_to_csv,
    db_to_linear,
    dbm_to_watts,
    derive_seed,
    generate_scenario,
    global_optimum,
    linear_to_db,
    metrics_from_csv,
    metrics_to_csv,
    run_batch,
    run_game,
    tiny_params,
    verify_tiny_instances,
    watts_to_dbm,
)

RESULTS_HEADER = (
    "instance_id,game,flows_requested,flows_active,"
    "mean_links_per_active_flow,normalized_flow_steps,converged"
)
AGGREGATE_HEADER = "game,flows_requested,metric,mean,std,n"

__all__ = [name for name in dir() if not name.startswith("_")]
