"""Scenario documents: strict JSON in, validated :class:`Scenario` out.

A scenario looks like::

    {
      "version": "1",
      "medium": {"n_p": "1.47", "c_vacuum_m_per_s": 299792458},
      "links": [
        {"node": "alice",
         "quantum_length": {"value": 2400, "unit": "m"},
         "classical_length": {"value": 1600, "unit": "m"},
         "delays": [{"id": "s1", "duration": {"value": 1, "unit": "us"}}]}
      ],
      "targets": [{"node": "alice", "lead": {"value": 1, "unit": "us"}}],
      "pool": [{"id": "s9", "duration": {"value": 300, "unit": "ns"}}],
      "schedule": [{"packet": "p0", "node": "alice",
                    "emit": {"value": 0, "unit": "ps"}}],
      "jitter": [{"packet": "p0", "classical": {"value": 1, "unit": "ps"}}],
      "gate_tolerance": {"value": 0, "unit": "ps"}
    }

Times take units ps/ns/us and lengths um/mm/m; values must be integers.
Unknown keys are rejected. Every problem is reported with its 1-based
line and column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from json_source_map import calculate as source_map

from qcsync.errors import Issue, Location, ParseError, SyncError, ValidationError
from qcsync.optimizer import DelayPool
from qcsync.physics import (
    PS_PER_UNIT,
    UM_PER_UNIT,
    DelayElement,
    MediumProfile,
    NodeLink,
    as_fraction,
)
from qcsync.simulator import Emission, EmissionSchedule, Jitter

FORMAT_VERSION = "1"


@dataclass(frozen=True)
class Scenario:
    medium: MediumProfile
    links: tuple[NodeLink, ...]
    targets: dict = field(default_factory=dict)
    pool: Optional[DelayPool] = None
    schedule: EmissionSchedule = field(default_factory=lambda: EmissionSchedule(()))
    jitter: dict = field(default_factory=dict)
    gate_tolerance: int = 0

    def link(self, node_id) -> NodeLink:
        for link in self.links:
            if link.node_id == node_id:
                return link
        raise KeyError(node_id)

    def lead_for(self, node_id) -> int:
        return self.targets.get(node_id, 0)

    def effective_pool(self) -> DelayPool:
        """The explicit pool, or the union of every link's delays."""
        return self.pool if self.pool is not None else DelayPool.union(self.links)

    def restricted(self, node_id) -> "Scenario":
        """Copy keeping only *node_id*'s link, target, packets and jitter.

        The pool is frozen first so restricting never shrinks the default
        (union) pool.
        """
        link = self.link(node_id)
        emissions = tuple(e for e in self.schedule.emissions if e.node_id == node_id)
        packets = {e.packet_id for e in emissions}
        return Scenario(
            medium=self.medium,
            links=(link,),
            targets={k: v for k, v in self.targets.items() if k == node_id},
            pool=self.effective_pool(),
            schedule=EmissionSchedule(emissions),
            jitter={k: v for k, v in self.jitter.items() if k in packets},
            gate_tolerance=self.gate_tolerance,
        )


class _NonFinite:
    """Stand-in for NaN/Infinity literals so they fail type checks with a location."""

    def __init__(self, text):
        self.text = text

    def __repr__(self):
        return self.text


class _Object(dict):
    duplicates: tuple = ()


def _pairs(pairs):
    obj = _Object()
    dupes = []
    for key, value in pairs:
        if key in obj:
            dupes.append(key)
        obj[key] = value
    obj.duplicates = tuple(dupes)
    return obj


def _escape(key: str) -> str:
    return key.replace("~", "~0").replace("/", "~1")


class _Checker:
    """Walks the decoded document, collecting located issues."""

    def __init__(self, text: str):
        try:
            self.positions = source_map(text)
        except Exception:  # best effort: positions degrade to 1:1
            self.positions = {}
        self.issues: list[Issue] = []

    def where(self, pointer: str, key: bool = False) -> Location:
        while True:
            entry = self.positions.get(pointer)
            if entry is not None:
                loc = entry.key_start if key and entry.key_start else entry.value_start
                return Location(loc.line + 1, loc.column + 1)
            if not pointer:
                return Location(1, 1)
            pointer = pointer.rsplit("/", 1)[0]
            key = False

    def error(self, pointer: str, message: str, key: bool = False) -> None:
        self.issues.append(Issue(pointer, self.where(pointer, key), message))

    # -- structural helpers -------------------------------------------------

    def obj(self, value, pointer, required=(), optional=()) -> Optional[dict]:
        if not isinstance(value, dict):
            self.error(pointer, f"expected an object, got {_kind(value)}")
            return None
        for key in getattr(value, "duplicates", ()):
            self.error(f"{pointer}/{_escape(key)}", f"duplicate key {key!r}", key=True)
        allowed = set(required) | set(optional)
        for key in value:
            if key not in allowed:
                self.error(
                    f"{pointer}/{_escape(key)}",
                    f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})",
                    key=True,
                )
        ok = True
        for key in required:
            if key not in value:
                self.error(pointer, f"missing required key {key!r}")
                ok = False
        return value if ok else None

    def array(self, value, pointer, nonempty=False) -> Optional[list]:
        if not isinstance(value, list):
            self.error(pointer, f"expected an array, got {_kind(value)}")
            return None
        if nonempty and not value:
            self.error(pointer, "must contain at least one entry")
            return None
        return value

    def string(self, value, pointer) -> Optional[str]:
        if not isinstance(value, str) or not value:
            self.error(pointer, f"expected a non-empty string, got {_kind(value)}")
            return None
        return value

    def integer(self, value, pointer) -> Optional[int]:
        if isinstance(value, bool) or not isinstance(value, int):
            self.error(pointer, f"expected an integer, got {_kind(value)}")
            return None
        return value

    def quantity(self, value, pointer, units: dict, what: str) -> Optional[int]:
        value = self.obj(value, pointer, required=("value", "unit"))
        if value is None:
            return None
        amount = self.integer(value["value"], f"{pointer}/value")
        unit = value["unit"]
        if not isinstance(unit, str) or unit not in units:
            self.error(
                f"{pointer}/unit",
                f"{what} unit must be one of {', '.join(units)}, got {unit!r}",
            )
            return None
        if amount is None:
            return None
        return amount * units[unit]

    def time(self, value, pointer) -> Optional[int]:
        return self.quantity(value, pointer, PS_PER_UNIT, "time")

    def length(self, value, pointer) -> Optional[int]:
        return self.quantity(value, pointer, UM_PER_UNIT, "length")

    def exact(self, value, pointer) -> Optional[Fraction]:
        if isinstance(value, (bool, _NonFinite)) or not isinstance(
            value, (int, float, str)
        ):
            self.error(pointer, f"expected a number or fraction string, got {_kind(value)}")
            return None
        try:
            return as_fraction(value)
        except (ValueError, ZeroDivisionError, TypeError, OverflowError):
            self.error(pointer, f"cannot read {value!r} as an exact number")
            return None


def _kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, _NonFinite):
        return f"non-finite number {value!r}"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, dict):
        return "object"
    if isinstance(value, list):
        return "array"
    if isinstance(value, str):
        return "string"
    if isinstance(value, float):
        return "non-integer number"
    return type(value).__name__


def _decode(text: str):
    try:
        return json.loads(text, object_pairs_hook=_pairs, parse_constant=_NonFinite)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except RecursionError:
        raise ParseError("document nested too deeply", 1, 1) from None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises:
        ParseError: the text is not JSON.
        ValidationError: the JSON breaks the schema or a model invariant;
            ``issues`` lists every problem found.
    """
    if not isinstance(text, str):
        raise TypeError("scenario text must be str")
    doc = _decode(text)
    check = _Checker(text)
    scenario = _build(doc, check)
    if check.issues:
        raise ValidationError(check.issues)
    return scenario


def load_scenario(path) -> Scenario:
    """Read and parse a scenario file. OSError propagates unchanged."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        column = exc.start - (raw.rfind(b"\n", 0, exc.start) + 1) + 1
        raise ParseError("file is not valid UTF-8", line, column) from None
    return parse_scenario(text)


def _build(doc, check: _Checker) -> Optional[Scenario]:
    top = check.obj(
        doc, "",
        required=("version", "medium", "links", "schedule"),
        optional=("targets", "pool", "jitter", "gate_tolerance"),
    )
    if top is None:
        return None

    if top["version"] != FORMAT_VERSION:
        check.error("/version", f"unsupported version {top['version']!r}; expected \"1\"")

    medium = _medium(top["medium"], check)
    links = _links(top["links"], check)
    node_ids = {link.node_id for link in links} if links is not None else None

    targets = {}
    if "targets" in top:
        targets = _targets(top["targets"], check, node_ids)

    pool = None
    if "pool" in top:
        items = check.array(top["pool"], "/pool", nonempty=True)
        if items is not None:
            delays = _delays(items, "/pool", check, "pool")
            if delays is not None:
                pool = DelayPool(delays)
    elif links:
        try:
            DelayPool.union(links)
        except SyncError as exc:
            check.error("/links", str(exc))

    schedule = _schedule(top["schedule"], check, node_ids)
    packets = (
        {e.packet_id for e in schedule.emissions} if schedule is not None else None
    )

    jitter = {}
    if "jitter" in top:
        jitter = _jitter(top["jitter"], check, packets)

    tolerance = 0
    if "gate_tolerance" in top:
        tolerance = check.time(top["gate_tolerance"], "/gate_tolerance")
        if tolerance is not None and tolerance < 0:
            check.error("/gate_tolerance", "gate tolerance must be >= 0 ps")

    if check.issues:
        return None
    return Scenario(
        medium=medium,
        links=tuple(links),
        targets=targets,
        pool=pool,
        schedule=schedule,
        jitter=jitter,
        gate_tolerance=tolerance,
    )


def _medium(value, check: _Checker) -> Optional[MediumProfile]:
    value = check.obj(value, "/medium", required=("n_p",), optional=("c_vacuum_m_per_s",))
    if value is None:
        return None
    n_p = check.exact(value["n_p"], "/medium/n_p")
    c = Fraction(299_792_458)
    if "c_vacuum_m_per_s" in value:
        c = check.exact(value["c_vacuum_m_per_s"], "/medium/c_vacuum_m_per_s")
        if c is not None and c <= 0:
            check.error("/medium/c_vacuum_m_per_s", "speed of light must be > 0")
            c = None
    if n_p is None or c is None:
        return None
    if not 1 < n_p < Fraction(3, 2):
        check.error(
            "/medium/n_p",
            f"refraction index n_p={n_p} violates 1 < n_p < 3/2",
        )
        return None
    return MediumProfile(n_p=n_p, c_vacuum=c)


def _delays(items, pointer, check: _Checker, owner: str) -> Optional[list]:
    delays = []
    seen = set()
    ok = True
    for i, item in enumerate(items):
        p = f"{pointer}/{i}"
        item = check.obj(item, p, required=("id", "duration"))
        if item is None:
            ok = False
            continue
        delay_id = check.string(item["id"], f"{p}/id")
        duration = check.time(item["duration"], f"{p}/duration")
        if duration is not None and duration <= 0:
            check.error(
                f"{p}/duration",
                f"delay {delay_id!r} in {owner}: duration must be > 0 ps",
            )
            duration = None
        if delay_id is not None and delay_id in seen:
            check.error(f"{p}/id", f"duplicate delay id {delay_id!r} in {owner}")
            delay_id = None
        if delay_id is None or duration is None:
            ok = False
            continue
        seen.add(delay_id)
        delays.append(DelayElement(delay_id, duration))
    return delays if ok else None


def _links(value, check: _Checker) -> Optional[list]:
    items = check.array(value, "/links", nonempty=True)
    if items is None:
        return None
    links = []
    seen = set()
    ok = True
    for i, item in enumerate(items):
        p = f"/links/{i}"
        item = check.obj(
            item, p,
            required=("node", "quantum_length", "classical_length"),
            optional=("delays",),
        )
        if item is None:
            ok = False
            continue
        node = check.string(item["node"], f"{p}/node")
        if node is not None and node in seen:
            check.error(f"{p}/node", f"duplicate node id {node!r}")
            node = None
        quantum = check.length(item["quantum_length"], f"{p}/quantum_length")
        classical = check.length(item["classical_length"], f"{p}/classical_length")
        for name, amount in (("quantum_length", quantum), ("classical_length", classical)):
            if amount is not None and amount < 0:
                check.error(f"{p}/{name}", f"link {node!r}: {name} must be >= 0")
                ok = False
        delays = []
        if "delays" in item:
            raw = check.array(item["delays"], f"{p}/delays")
            delays = None if raw is None else _delays(raw, f"{p}/delays", check, f"link {node!r}")
        if None in (node, quantum, classical, delays):
            ok = False
            continue
        seen.add(node)
        if ok:
            links.append(NodeLink(node, quantum, classical, tuple(delays)))
    return links if ok else None


def _targets(value, check: _Checker, node_ids) -> dict:
    items = check.array(value, "/targets")
    targets = {}
    for i, item in enumerate(items or ()):
        p = f"/targets/{i}"
        item = check.obj(item, p, required=("node", "lead"))
        if item is None:
            continue
        node = check.string(item["node"], f"{p}/node")
        lead = check.time(item["lead"], f"{p}/lead")
        if node is not None and node_ids is not None and node not in node_ids:
            check.error(f"{p}/node", f"target references unknown node {node!r}")
            continue
        if node is not None and node in targets:
            check.error(f"{p}/node", f"second target for node {node!r}")
            continue
        if lead is not None and lead < 0:
            check.error(f"{p}/lead", f"lead for node {node!r} must be >= 0 ps")
            continue
        if node is not None and lead is not None:
            targets[node] = lead
    return targets


def _schedule(value, check: _Checker, node_ids) -> Optional[EmissionSchedule]:
    items = check.array(value, "/schedule")
    if items is None:
        return None
    emissions = []
    seen = set()
    previous = None
    ok = True
    for i, item in enumerate(items):
        p = f"/schedule/{i}"
        item = check.obj(item, p, required=("packet", "node", "emit"))
        if item is None:
            ok = False
            continue
        packet = check.string(item["packet"], f"{p}/packet")
        node = check.string(item["node"], f"{p}/node")
        emit = check.time(item["emit"], f"{p}/emit")
        if packet is not None and packet in seen:
            check.error(f"{p}/packet", f"duplicate packet id {packet!r}")
            packet = None
        if node is not None and node_ids is not None and node not in node_ids:
            check.error(f"{p}/node", f"packet {packet!r} references unknown node {node!r}")
            node = None
        if emit is not None and previous is not None and emit < previous:
            check.error(
                f"{p}/emit",
                f"packet {packet!r} emitted at {emit} ps, before the previous "
                f"emission at {previous} ps",
            )
            emit = None
        if None in (packet, node, emit):
            ok = False
            continue
        seen.add(packet)
        previous = emit
        emissions.append(Emission(emit, node, packet))
    return EmissionSchedule(tuple(emissions)) if ok else None


def _jitter(value, check: _Checker, packets) -> dict:
    items = check.array(value, "/jitter")
    jitter = {}
    for i, item in enumerate(items or ()):
        p = f"/jitter/{i}"
        item = check.obj(item, p, required=("packet",), optional=("quantum", "classical"))
        if item is None:
            continue
        packet = check.string(item["packet"], f"{p}/packet")
        offsets = {}
        for channel in ("quantum", "classical"):
            if channel in item:
                offsets[channel] = check.time(item[channel], f"{p}/{channel}")
        if packet is not None and packets is not None and packet not in packets:
            check.error(f"{p}/packet", f"jitter references unknown packet {packet!r}")
            continue
        if packet is not None and packet in jitter:
            check.error(f"{p}/packet", f"second jitter entry for packet {packet!r}")
            continue
        if packet is None or None in offsets.values():
            continue
        jitter[packet] = Jitter(**offsets)
    return jitter


def _exact_out(x: Fraction):
    return x.numerator if x.denominator == 1 else str(x)


def _time(ps: int) -> dict:
    return {"value": ps, "unit": "ps"}


def _length(um: int) -> dict:
    return {"value": um, "unit": "um"}


def _delay_out(d: DelayElement) -> dict:
    return {"id": d.id, "duration": _time(d.duration)}


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical JSON-ready form (ps and um throughout)."""
    doc = {
        "version": FORMAT_VERSION,
        "medium": {
            "n_p": str(scenario.medium.n_p),
            "c_vacuum_m_per_s": _exact_out(scenario.medium.c_vacuum),
        },
        "links": [
            {
                "node": link.node_id,
                "quantum_length": _length(link.quantum_length),
                "classical_length": _length(link.classical_length),
                "delays": [_delay_out(d) for d in link.delays],
            }
            for link in scenario.links
        ],
        "targets": [
            {"node": node, "lead": _time(lead)}
            for node, lead in scenario.targets.items()
        ],
        "schedule": [
            {"packet": e.packet_id, "node": e.node_id, "emit": _time(e.emit_time)}
            for e in scenario.schedule.emissions
        ],
        "jitter": [
            {"packet": packet, "quantum": _time(j.quantum), "classical": _time(j.classical)}
            for packet, j in scenario.jitter.items()
        ],
        "gate_tolerance": _time(scenario.gate_tolerance),
    }
    if scenario.pool is not None:
        doc["pool"] = [_delay_out(d) for d in scenario.pool.elements]
    return doc


def emit_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"
