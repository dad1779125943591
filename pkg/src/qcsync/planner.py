"""Synchronization planners.

Each planner starts from a synchronized link (both channels take the same
time ``T``) and makes the classical signal arrive ``lead`` picoseconds
before the quantum photon by changing exactly one aspect of the link:

* ``SHORTEN_CLASSICAL`` cuts the classical fiber to ``(T - sum(d) - lead) * v_f``;
* ``LENGTHEN_PMF`` extends the PMF to ``(T + lead) * v_p``;
* ``REPLACE_DELAYS`` keeps both cables and reroutes the classical path
  through an optimal subset of a delay pool (see :mod:`qcsync.optimizer`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from qcsync.errors import LengthUnderflow, NotSynchronized, SyncError
from qcsync.optimizer import DelayPool, DelaySelection, select_delays
from qcsync.physics import (
    DelayElement,
    MediumProfile,
    Micrometers,
    NodeId,
    NodeLink,
    Picoseconds,
    round_half_away,
    transit_times,
)


class PlanModel(str, enum.Enum):
    SHORTEN_CLASSICAL = "shorten-classical"
    LENGTHEN_PMF = "lengthen-pmf"
    REPLACE_DELAYS = "replace-delays"


@dataclass(frozen=True)
class SyncPlan:
    """Adjusted geometry for one node and the gap it is predicted to produce.

    ``predicted_gap`` is ``t_quantum - t_classical`` after the plan, i.e. how
    many picoseconds the classical signal leads.
    """

    node_id: NodeId
    model: PlanModel
    lead: Picoseconds
    quantum_length: Micrometers
    classical_length: Micrometers
    delays: tuple[DelayElement, ...]
    predicted_gap: Picoseconds
    selection: Optional[DelaySelection] = None

    @property
    def chosen_delays(self) -> Optional[tuple[DelayElement, ...]]:
        return None if self.selection is None else self.selection.chosen

    def adjusted_link(self) -> NodeLink:
        return NodeLink(
            node_id=self.node_id,
            quantum_length=self.quantum_length,
            classical_length=self.classical_length,
            delays=self.delays,
        )


def _check_lead(lead) -> None:
    if isinstance(lead, bool) or not isinstance(lead, int):
        raise TypeError("lead must be integer picoseconds")
    if lead < 0:
        raise ValueError(f"lead must be >= 0 ps, got {lead}")


def synchronized_time(link: NodeLink, medium: MediumProfile) -> Picoseconds:
    """Common transit time of a synchronized link.

    Raises NotSynchronized when the two channels disagree.
    """
    t_quantum, t_classical = transit_times(link, medium)
    if t_quantum != t_classical:
        raise NotSynchronized(link.node_id, t_quantum, t_classical)
    return t_quantum


def _unchanged(link: NodeLink, model: PlanModel) -> SyncPlan:
    return SyncPlan(
        node_id=link.node_id,
        model=model,
        lead=0,
        quantum_length=link.quantum_length,
        classical_length=link.classical_length,
        delays=link.delays,
        predicted_gap=0,
    )


def plan_shorten_classical(
    link: NodeLink, medium: MediumProfile, lead: Picoseconds
) -> SyncPlan:
    """Shorten the classical fiber so the classical signal leads by *lead*.

    Raises:
        NotSynchronized: the link's channels do not share one transit time.
        LengthUnderflow: the shortened fiber would be zero or negative.
    """
    _check_lead(lead)
    t = synchronized_time(link, medium)
    if lead == 0:
        return _unchanged(link, PlanModel.SHORTEN_CLASSICAL)
    length = round_half_away((t - link.total_delay - lead) * medium.v_f_um_per_ps)
    if length <= 0:
        raise LengthUnderflow(
            f"link {link.node_id!r}: a {lead} ps lead needs a classical fiber "
            f"of {length} um (currently {link.classical_length} um)"
        )
    return SyncPlan(
        node_id=link.node_id,
        model=PlanModel.SHORTEN_CLASSICAL,
        lead=lead,
        quantum_length=link.quantum_length,
        classical_length=length,
        delays=link.delays,
        predicted_gap=lead,
    )


def plan_lengthen_pmf(
    link: NodeLink, medium: MediumProfile, lead: Picoseconds
) -> SyncPlan:
    """Lengthen the PMF so the photon arrives *lead* after the classical signal."""
    _check_lead(lead)
    t = synchronized_time(link, medium)
    if lead == 0:
        return _unchanged(link, PlanModel.LENGTHEN_PMF)
    return SyncPlan(
        node_id=link.node_id,
        model=PlanModel.LENGTHEN_PMF,
        lead=lead,
        quantum_length=round_half_away((t + lead) * medium.v_p_um_per_ps),
        classical_length=link.classical_length,
        delays=link.delays,
        predicted_gap=lead,
    )


def plan_replace_delays(
    link: NodeLink,
    medium: MediumProfile,
    lead: Picoseconds,
    pool,
    **select_options,
) -> SyncPlan:
    """Reroute the classical path through an optimal subset of *pool*.

    The predicted gap is the selection's saving, which may exceed *lead* by
    the selection's slack.
    """
    _check_lead(lead)
    synchronized_time(link, medium)
    selection = select_delays(
        link.delays, pool, lead, node_id=link.node_id, **select_options
    )
    return SyncPlan(
        node_id=link.node_id,
        model=PlanModel.REPLACE_DELAYS,
        lead=lead,
        quantum_length=link.quantum_length,
        classical_length=link.classical_length,
        delays=selection.chosen,
        predicted_gap=selection.saving,
        selection=selection,
    )


@dataclass(frozen=True)
class MultinodePlan:
    """Per-node plans plus the nodes that could not be planned."""

    plans: tuple[SyncPlan, ...]
    errors: Mapping[NodeId, SyncError] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def plan_multinode(
    links: Sequence[NodeLink],
    medium: MediumProfile,
    leads: Sequence[Picoseconds],
    model: PlanModel,
    pool=None,
) -> MultinodePlan:
    """Plan every node independently with the same model.

    Failures are collected per node instead of aborting the other nodes.
    For ``REPLACE_DELAYS`` the pool defaults to the union of all links'
    delays.
    """
    links = list(links)
    leads = list(leads)
    if not links:
        raise ValueError("at least one link is required")
    if len(links) != len(leads):
        raise ValueError(f"{len(links)} links but {len(leads)} lead targets")
    ids = [link.node_id for link in links]
    if len(set(ids)) != len(ids):
        raise ValueError("node ids must be pairwise distinct")

    model = PlanModel(model)
    if model is PlanModel.REPLACE_DELAYS and pool is None:
        pool = DelayPool.union(links)

    plans = []
    errors = {}
    for link, lead in zip(links, leads):
        try:
            if model is PlanModel.SHORTEN_CLASSICAL:
                plans.append(plan_shorten_classical(link, medium, lead))
            elif model is PlanModel.LENGTHEN_PMF:
                plans.append(plan_lengthen_pmf(link, medium, lead))
            else:
                plans.append(plan_replace_delays(link, medium, lead, pool))
        except SyncError as exc:
            errors[link.node_id] = exc
    return MultinodePlan(tuple(plans), errors)
