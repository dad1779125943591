"""Synchronization planning and simulation for a direct quantum channel
paired with a multihop classical channel."""

from qcsync.errors import (
    CapacityExceeded,
    DelayExceedsBudget,
    Infeasible,
    InvalidGeometry,
    LengthUnderflow,
    NonPositiveTime,
    NotSynchronized,
    ParseError,
    PoolTooLarge,
    RefractionOutOfRange,
    ScenarioError,
    SyncError,
    UnknownNode,
    ValidationError,
)
from qcsync.optimizer import (
    DelayPool,
    DelaySelection,
    apply_selection,
    brute_force_select,
    select_delays,
)
from qcsync.physics import (
    DelayElement,
    MediumProfile,
    NodeLink,
    classical_path_length,
    photon_velocity,
    quantum_path_length,
    synchronized_link,
    transit_times,
)
from qcsync.planner import (
    MultinodePlan,
    PlanModel,
    SyncPlan,
    plan_lengthen_pmf,
    plan_multinode,
    plan_replace_delays,
    plan_shorten_classical,
)
from qcsync.report import emit_plans, emit_report, parse_report
from qcsync.scenario import Scenario, emit_scenario, load_scenario, parse_scenario
from qcsync.simulator import (
    Emission,
    EmissionSchedule,
    GateDecision,
    Jitter,
    NodeStats,
    SyncReport,
    TransitEvent,
    Verdict,
    run_sync_loop,
    simulate,
    sync_gate,
)

__version__ = "0.1.0"
