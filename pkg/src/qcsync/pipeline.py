"""Scenario-level workflows shared by the CLI: plan, simulate, verify."""

from __future__ import annotations

from dataclasses import dataclass

from qcsync.planner import MultinodePlan, PlanModel, plan_multinode
from qcsync.scenario import Scenario
from qcsync.simulator import Emission, EmissionSchedule, SyncReport, run_sync_loop, simulate

MODEL_NAMES = {
    "linear": PlanModel.SHORTEN_CLASSICAL,
    "pmf": PlanModel.LENGTHEN_PMF,
    "delays": PlanModel.REPLACE_DELAYS,
}


def plan_scenario(scenario: Scenario, model: PlanModel) -> MultinodePlan:
    """Plan every link of *scenario* with its target lead (0 when absent)."""
    links = scenario.links
    leads = [scenario.lead_for(link.node_id) for link in links]
    pool = scenario.effective_pool() if model is PlanModel.REPLACE_DELAYS else None
    return plan_multinode(links, scenario.medium, leads, model, pool=pool)


def simulate_scenario(scenario: Scenario, tolerance=None) -> SyncReport:
    """Run the scenario's links as given, with jitter, through the gate."""
    tolerance = scenario.gate_tolerance if tolerance is None else tolerance
    events = simulate(scenario.links, scenario.medium, scenario.schedule, scenario.jitter)
    return run_sync_loop(events, tolerance)


def _failures(result: MultinodePlan):
    return tuple(
        (node, type(exc).__name__, str(exc)) for node, exc in result.errors.items()
    )


@dataclass(frozen=True)
class Verification:
    """Plan-then-simulate outcome for one model.

    ``mismatches`` lists ``(packet_id, node_id, expected_t_delta, t_delta)``
    for every packet whose achieved gap differs from the plan's prediction
    by more than the allowed tolerance.
    """

    model: PlanModel
    plan: MultinodePlan
    report: SyncReport
    mismatches: tuple

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.plan.ok


def verify_scenario(
    scenario: Scenario,
    model: PlanModel,
    tolerance=None,
    gap_tolerance: int = 0,
) -> Verification:
    """Plan, apply the plans, simulate without jitter and compare gaps.

    Nodes without scheduled packets get one probe packet emitted at 0 ps.
    """
    tolerance = scenario.gate_tolerance if tolerance is None else tolerance
    result = plan_scenario(scenario, model)
    planned = {p.node_id: p for p in result.plans}

    emissions = [e for e in scenario.schedule.emissions if e.node_id in planned]
    covered = {e.node_id for e in emissions}
    taken = {e.packet_id for e in scenario.schedule.emissions}
    for node_id in planned:
        if node_id not in covered:
            probe = f"probe:{node_id}"
            while probe in taken:
                probe += "'"
            emissions.insert(0, Emission(0, node_id, probe))
    emissions.sort(key=lambda e: e.emit_time)

    adjusted = [p.adjusted_link() for p in result.plans]
    events = simulate(adjusted, scenario.medium, EmissionSchedule(tuple(emissions)))
    mismatches = tuple(
        (ev.packet_id, ev.node_id, -planned[ev.node_id].predicted_gap, ev.t_delta)
        for ev in events
        if abs(ev.t_delta + planned[ev.node_id].predicted_gap) > gap_tolerance
    )
    report = run_sync_loop(
        events, tolerance, plans=result.plans, failures=_failures(result)
    )
    return Verification(model, result, report, mismatches)
