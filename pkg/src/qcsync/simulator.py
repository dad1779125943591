"""Deterministic transit simulation and the per-packet synchronization gate.

Every emitted packet travels to its node over both channels. The gate
compares the two arrivals: when the classical signal is not later than the
quantum photon (``t_delta = t_ca - t_qa <= 0``) the node continues,
otherwise the photon is dropped and the loop moves on to the next packet.
"""

from __future__ import annotations

import contextlib
import enum
import gc
from operator import itemgetter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence

from qcsync.errors import UnknownNode
from qcsync.physics import MediumProfile, NodeId, NodeLink, Picoseconds, transit_times

PacketId = Hashable


class Verdict(str, enum.Enum):
    CONTINUE = "continue"
    DROP = "drop"


class Emission(NamedTuple):
    emit_time: Picoseconds
    node_id: NodeId
    packet_id: PacketId


@dataclass(frozen=True)
class EmissionSchedule:
    """Packets in emission order. Times never decrease; packet ids are unique."""

    emissions: tuple[Emission, ...]

    def __post_init__(self):
        emissions = tuple(self.emissions)
        ids = [e[2] for e in emissions]
        if len(set(ids)) != len(ids):
            seen = set()
            duplicate = next(i for i in ids if i in seen or seen.add(i))
            raise ValueError(f"duplicate packet id {duplicate!r}")
        times = [e[0] for e in emissions]
        for k in range(1, len(times)):
            if times[k] < times[k - 1]:
                raise ValueError(
                    f"packet {ids[k]!r} emitted at {times[k]} ps, "
                    f"before the previous emission at {times[k - 1]} ps"
                )
        object.__setattr__(self, "emissions", emissions)

    def __len__(self) -> int:
        return len(self.emissions)

    @classmethod
    def periodic(cls, node_id: NodeId, count: int, period: Picoseconds = 1,
                 start: Picoseconds = 0) -> "EmissionSchedule":
        with _bulk():
            return cls(tuple(
                Emission(start + i * period, node_id, i) for i in range(count)
            ))


@dataclass(frozen=True)
class Jitter:
    """Extra per-packet latency added to each channel, in picoseconds."""

    quantum: Picoseconds = 0
    classical: Picoseconds = 0


class TransitEvent(NamedTuple):
    packet_id: PacketId
    node_id: NodeId
    t_qa: Picoseconds
    t_ca: Picoseconds

    @property
    def t_delta(self) -> Picoseconds:
        return self.t_ca - self.t_qa


class GateDecision(NamedTuple):
    packet_id: PacketId
    verdict: Verdict


_by_node_then_packet = itemgetter(1, 0)


@contextlib.contextmanager
def _bulk():
    # per-packet records are acyclic; collector passes during bulk
    # construction only cost time
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def simulate(
    links: Iterable[NodeLink],
    medium: MediumProfile,
    schedule: EmissionSchedule,
    jitter: Optional[Mapping[PacketId, Jitter]] = None,
) -> list[TransitEvent]:
    """Arrival times on both channels for every scheduled packet.

    Events are ordered by ``(node_id, packet_id)``.

    Raises:
        UnknownNode: an emission targets a node with no link.
    """
    transit = {link.node_id: transit_times(link, medium) for link in links}
    jitter = jitter or {}
    none = Jitter()

    events = []
    append = events.append
    with _bulk():
        for emit_time, node_id, packet_id in schedule.emissions:
            try:
                t_quantum, t_classical = transit[node_id]
            except KeyError:
                raise UnknownNode(
                    f"packet {packet_id!r} targets unknown node {node_id!r}"
                ) from None
            j = jitter.get(packet_id, none)
            append(TransitEvent(
                packet_id,
                node_id,
                emit_time + t_quantum + j.quantum,
                emit_time + t_classical + j.classical,
            ))
        events.sort(key=_by_node_then_packet)
    return events


def sync_gate(event: TransitEvent, tolerance: Picoseconds = 0) -> GateDecision:
    """Continue iff the classical arrival is at most *tolerance* late."""
    verdict = Verdict.CONTINUE if event.t_delta <= tolerance else Verdict.DROP
    return GateDecision(event.packet_id, verdict)


@dataclass(frozen=True)
class NodeStats:
    """Gate outcome for one node. Extremes and mean are None when empty."""

    node_id: NodeId
    continued: int = 0
    dropped: int = 0
    min_t_delta: Optional[Picoseconds] = None
    max_t_delta: Optional[Picoseconds] = None
    mean_t_delta: Optional[Fraction] = None

    @property
    def total(self) -> int:
        return self.continued + self.dropped


@dataclass(frozen=True)
class SyncReport:
    """Outcome of a run: plans echoed, every event, decisions and tallies.

    ``events``, ``decisions`` and ``nodes`` are sorted by node then packet,
    so the report does not depend on the order events were processed in.
    ``failures`` maps node ids to a short description of a planning error.
    """

    events: tuple[TransitEvent, ...] = ()
    decisions: tuple[GateDecision, ...] = ()
    nodes: tuple[NodeStats, ...] = ()
    tolerance: Picoseconds = 0
    plans: tuple = ()
    failures: tuple[tuple[NodeId, str, str], ...] = field(default=())

    @property
    def continued(self) -> int:
        return sum(n.continued for n in self.nodes)

    @property
    def dropped(self) -> int:
        return sum(n.dropped for n in self.nodes)

    @property
    def overall(self) -> NodeStats:
        deltas = [n for n in self.nodes if n.total]
        if not deltas:
            return NodeStats(node_id=None)
        total = sum(n.total for n in deltas)
        return NodeStats(
            node_id=None,
            continued=self.continued,
            dropped=self.dropped,
            min_t_delta=min(n.min_t_delta for n in deltas),
            max_t_delta=max(n.max_t_delta for n in deltas),
            mean_t_delta=sum(n.mean_t_delta * n.total for n in deltas) / total,
        )

    @property
    def selection_slack(self) -> Optional[dict]:
        """min/max/total slack over delay-selection plans, None if there are none."""
        slacks = [p.selection.slack for p in self.plans
                  if getattr(p, "selection", None) is not None]
        if not slacks:
            return None
        return {"count": len(slacks), "min": min(slacks), "max": max(slacks),
                "total": sum(slacks)}


def run_sync_loop(
    events: Iterable[TransitEvent],
    tolerance: Picoseconds = 0,
    *,
    plans: Sequence = (),
    failures: Sequence[tuple[NodeId, str, str]] = (),
) -> SyncReport:
    """Apply the gate to every event and aggregate per-node statistics."""
    with _bulk():
        ordered = sorted(events, key=_by_node_then_packet)
        decisions = []
        decide = decisions.append
        acc: dict = {}
        for packet_id, node_id, t_qa, t_ca in ordered:
            delta = t_ca - t_qa
            if delta <= tolerance:
                decide(GateDecision(packet_id, Verdict.CONTINUE))
                passed = 1
            else:
                decide(GateDecision(packet_id, Verdict.DROP))
                passed = 0
            stats = acc.get(node_id)
            if stats is None:
                acc[node_id] = [passed, 1 - passed, delta, delta, delta]
            else:
                stats[0] += passed
                stats[1] += 1 - passed
                if delta < stats[2]:
                    stats[2] = delta
                if delta > stats[3]:
                    stats[3] = delta
                stats[4] += delta

    nodes = tuple(
        NodeStats(node_id, c, d, lo, hi, Fraction(total, c + d))
        for node_id, (c, d, lo, hi, total) in acc.items()
    )
    return SyncReport(
        events=tuple(ordered),
        decisions=tuple(decisions),
        nodes=nodes,
        tolerance=tolerance,
        plans=tuple(plans),
        failures=tuple(failures),
    )
