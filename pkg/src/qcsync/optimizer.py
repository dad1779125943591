"""Delay selection for the replace-delays synchronization model.

A node whose classical path runs through serial delays with total
``S = sum(original)`` must arrive ``lead`` picoseconds earlier. The
programmable network may reroute it through any nonempty set of distinct
delays from a shared pool (every pair of delays is directly connected), so
the task is: choose a nonempty subset with total ``retained`` such that
``S - retained >= lead`` and ``S - retained`` is as small as possible.

Equivalently, maximize ``retained`` subject to ``retained <= S - lead``:
a subset-sum problem with capacity ``S - lead``.

Ties are broken by, in order: fewer elements, lexicographically smaller
ascending duration tuple, lexicographically smaller sorted id tuple. This
order is total, so every solver below returns the same selection.
"""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from qcsync.errors import CapacityExceeded, Infeasible, InvalidGeometry, PoolTooLarge
from qcsync.physics import (
    DelayElement,
    MediumProfile,
    NodeId,
    NodeLink,
    Picoseconds,
    transit_times,
    total_duration,
)

BRUTE_FORCE_LIMIT = 20
MEET_IN_THE_MIDDLE_LIMIT = 40
DEFAULT_CELL_CEILING = 10**9


@dataclass(frozen=True)
class DelayPool:
    """Delays a node may be rerouted through. Ids are unique."""

    elements: tuple[DelayElement, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        seen = set()
        for e in elements:
            if e.id in seen:
                raise InvalidGeometry(f"duplicate delay id {e.id!r} in pool")
            seen.add(e.id)
        object.__setattr__(self, "elements", elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @classmethod
    def union(cls, links: Iterable[NodeLink]) -> "DelayPool":
        """Pool of every delay on any link, deduplicated by id.

        A delay shared by several routes appears once; reusing an id with a
        different duration is an error.
        """
        by_id: dict[str, DelayElement] = {}
        for link in links:
            for d in link.delays:
                known = by_id.get(d.id)
                if known is None:
                    by_id[d.id] = d
                elif known.duration != d.duration:
                    raise InvalidGeometry(
                        f"delay id {d.id!r} has durations {known.duration} ps "
                        f"and {d.duration} ps on different links"
                    )
        return cls(tuple(by_id.values()))


@dataclass(frozen=True)
class DelaySelection:
    """Chosen retained delays for one node.

    ``chosen`` is sorted by (duration, id). ``saving`` is how much earlier
    the classical signal arrives; ``slack = saving - lead`` is the
    over-achievement, minimal over all feasible selections.
    """

    node_id: NodeId
    chosen: tuple[DelayElement, ...]
    retained_total: Picoseconds
    saving: Picoseconds
    slack: Picoseconds
    lead: Picoseconds

    @property
    def chosen_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.chosen)


def _key(elements: Sequence[DelayElement]):
    return (
        len(elements),
        tuple(sorted(e.duration for e in elements)),
        tuple(sorted(e.id for e in elements)),
    )


def _order(elements: Iterable[DelayElement]) -> tuple[DelayElement, ...]:
    return tuple(sorted(elements, key=lambda e: (e.duration, e.id)))


def _elements(pool) -> tuple[DelayElement, ...]:
    if isinstance(pool, DelayPool):
        return pool.elements
    return DelayPool(tuple(pool)).elements


def _check_lead(lead: Picoseconds) -> None:
    if isinstance(lead, bool) or not isinstance(lead, int):
        raise TypeError("lead must be integer picoseconds")
    if lead < 0:
        raise ValueError(f"lead must be >= 0 ps, got {lead}")


def _prepare(original, pool, lead):
    _check_lead(lead)
    original = tuple(original)
    if not original:
        raise InvalidGeometry("original delay list is empty; nothing to replace")
    elements = _elements(pool)
    if not elements:
        raise InvalidGeometry("delay pool is empty")
    total = total_duration(original)
    capacity = total - lead
    smallest = min(e.duration for e in elements)
    if smallest > capacity:
        raise Infeasible(
            f"smallest pool delay {smallest} ps exceeds the retainable budget "
            f"{capacity} ps (original total {total} ps, lead {lead} ps)"
        )
    return elements, total, capacity


def _selection(node_id, chosen, total, lead) -> DelaySelection:
    chosen = _order(chosen)
    retained = total_duration(chosen)
    saving = total - retained
    return DelaySelection(
        node_id=node_id,
        chosen=chosen,
        retained_total=retained,
        saving=saving,
        slack=saving - lead,
        lead=lead,
    )


def _sparse_dp(elements, capacity):
    # best[s] = (key, members) of the best subset with total exactly s.
    # Inserting a common element preserves the key order, so keeping one
    # winner per total is exact.
    best: dict[int, tuple] = {}
    for e in elements:
        d = e.duration
        if d > capacity:
            continue
        updates = {}
        candidates = [(d, (e,))]
        for s, (_, members) in best.items():
            if s + d <= capacity:
                candidates.append((s + d, members + (e,)))
        for s, members in candidates:
            key = _key(members)
            current = updates.get(s) or best.get(s)
            if current is None or key < current[0]:
                updates[s] = (key, members)
        best.update(updates)
    top = max(best)
    return best[top][1]


def _half_subsets(elements):
    """Bitmasks of every subset of *elements* (including empty), by total."""
    groups: dict[int, list[int]] = defaultdict(list)
    sums = [0] * (1 << len(elements))
    groups[0].append(0)
    for mask in range(1, 1 << len(elements)):
        low = (mask & -mask).bit_length() - 1
        sums[mask] = sums[mask & (mask - 1)] + elements[low].duration
        groups[sums[mask]].append(mask)
    return groups


def _members(elements, mask):
    return tuple(e for i, e in enumerate(elements) if mask >> i & 1)


def _meet_in_the_middle(elements, capacity):
    mid = len(elements) // 2
    lo, hi = elements[:mid], elements[mid:]
    left = _half_subsets(lo)
    right = _half_subsets(hi)
    right_totals = sorted(right)

    best_total = 0
    for a in left:
        if a > capacity:
            continue
        i = bisect.bisect_right(right_totals, capacity - a) - 1
        if i >= 0:
            best_total = max(best_total, a + right_totals[i])

    winner = None
    for a, left_masks in left.items():
        right_masks = right.get(best_total - a)
        if not right_masks:
            continue
        for lm in left_masks:
            left_part = _members(lo, lm)
            for rm in right_masks:
                members = left_part + _members(hi, rm)
                key = _key(members)
                if winner is None or key < winner[0]:
                    winner = (key, members)
    return winner[1]


def select_delays(
    original: Iterable[DelayElement],
    pool,
    lead: Picoseconds,
    *,
    node_id: NodeId = None,
    cell_ceiling: int = DEFAULT_CELL_CEILING,
) -> DelaySelection:
    """Optimal retained-delay selection by subset-sum dynamic programming.

    Args:
        original: The node's current serial delays.
        pool: DelayPool or iterable of DelayElement to choose from.
        lead: Required speed-up in picoseconds (>= 0).
        node_id: Echoed into the result.
        cell_ceiling: Largest ``capacity * len(pool)`` table handled by the
            DP. Larger instances use meet-in-the-middle enumeration when the
            pool has at most 40 elements.

    Raises:
        Infeasible: the smallest pool delay alone already exceeds
            ``sum(original) - lead``.
        CapacityExceeded: instance too large for both strategies.
    """
    elements, total, capacity = _prepare(original, pool, lead)
    elements = _order(elements)
    if capacity * len(elements) <= cell_ceiling:
        chosen = _sparse_dp(elements, capacity)
    elif len(elements) <= MEET_IN_THE_MIDDLE_LIMIT:
        chosen = _meet_in_the_middle(elements, capacity)
    else:
        raise CapacityExceeded(
            f"capacity {capacity} ps x {len(elements)} delays exceeds the "
            f"{cell_ceiling}-cell ceiling and the pool is larger than "
            f"{MEET_IN_THE_MIDDLE_LIMIT}"
        )
    return _selection(node_id, chosen, total, lead)


def brute_force_select(
    original: Iterable[DelayElement],
    pool,
    lead: Picoseconds,
    *,
    node_id: NodeId = None,
) -> DelaySelection:
    """Reference solver: enumerate every nonempty subset of the pool."""
    elements = _elements(pool)
    if len(elements) > BRUTE_FORCE_LIMIT:
        raise PoolTooLarge(
            f"brute force is limited to {BRUTE_FORCE_LIMIT} delays, "
            f"pool has {len(elements)}"
        )
    elements, total, capacity = _prepare(original, elements, lead)

    best = None
    for r in range(1, len(elements) + 1):
        for subset in combinations(elements, r):
            retained = sum(e.duration for e in subset)
            if retained > capacity:
                continue
            rank = (-retained, _key(subset))
            if best is None or rank < best[0]:
                best = (rank, subset)
    return _selection(node_id, best[1], total, lead)


def apply_selection(
    link: NodeLink, selection: DelaySelection, medium: MediumProfile
) -> tuple[Picoseconds, Picoseconds]:
    """Classical transit after rerouting through the selection, and the gap.

    The cable is unchanged; only the serial delays differ. Returns
    ``(new_t_classical, t_quantum - new_t_classical)``.
    """
    t_quantum, t_classical = transit_times(link, medium)
    propagation = t_classical - link.total_delay
    new_t_classical = propagation + selection.retained_total
    return new_t_classical, t_quantum - new_t_classical
