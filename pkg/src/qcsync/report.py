"""Serialization of sync reports and plans to JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from qcsync.optimizer import DelaySelection
from qcsync.physics import DelayElement
from qcsync.planner import PlanModel, SyncPlan
from qcsync.simulator import GateDecision, NodeStats, SyncReport, TransitEvent, Verdict

REPORT_VERSION = "1"
EVENT_COLUMNS = ("packet_id", "node_id", "t_qa_ps", "t_ca_ps", "t_delta_ps", "verdict")
PLAN_COLUMNS = (
    "node_id", "model", "lead_ps", "quantum_length_um", "classical_length_um",
    "delay_ids", "retained_ps", "saving_ps", "slack_ps", "predicted_gap_ps",
)


def _fraction_out(x):
    if x is None:
        return None
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fraction_in(x):
    return None if x is None else Fraction(x)


def _delay_dict(d: DelayElement) -> dict:
    return {"id": d.id, "duration_ps": d.duration}


def _delay_from(d: dict) -> DelayElement:
    return DelayElement(d["id"], d["duration_ps"])


def _plan_dict(plan: SyncPlan) -> dict:
    out = {
        "node_id": plan.node_id,
        "model": plan.model.value,
        "lead_ps": plan.lead,
        "quantum_length_um": plan.quantum_length,
        "classical_length_um": plan.classical_length,
        "delays": [_delay_dict(d) for d in plan.delays],
        "predicted_gap_ps": plan.predicted_gap,
        "selection": None,
    }
    s = plan.selection
    if s is not None:
        out["selection"] = {
            "chosen": [_delay_dict(d) for d in s.chosen],
            "retained_total_ps": s.retained_total,
            "saving_ps": s.saving,
            "slack_ps": s.slack,
        }
    return out


def _plan_from(d: dict) -> SyncPlan:
    selection = None
    if d["selection"] is not None:
        s = d["selection"]
        selection = DelaySelection(
            node_id=d["node_id"],
            chosen=tuple(_delay_from(x) for x in s["chosen"]),
            retained_total=s["retained_total_ps"],
            saving=s["saving_ps"],
            slack=s["slack_ps"],
            lead=d["lead_ps"],
        )
    return SyncPlan(
        node_id=d["node_id"],
        model=PlanModel(d["model"]),
        lead=d["lead_ps"],
        quantum_length=d["quantum_length_um"],
        classical_length=d["classical_length_um"],
        delays=tuple(_delay_from(x) for x in d["delays"]),
        predicted_gap=d["predicted_gap_ps"],
        selection=selection,
    )


def _stats_dict(n: NodeStats) -> dict:
    return {
        "node_id": n.node_id,
        "continued": n.continued,
        "dropped": n.dropped,
        "min_t_delta_ps": n.min_t_delta,
        "max_t_delta_ps": n.max_t_delta,
        "mean_t_delta_ps": _fraction_out(n.mean_t_delta),
    }


def report_to_dict(report: SyncReport) -> dict:
    verdicts = {d.packet_id: d.verdict for d in report.decisions}
    overall = report.overall
    return {
        "version": REPORT_VERSION,
        "gate_tolerance_ps": report.tolerance,
        "totals": {
            "packets": len(report.events),
            "continued": report.continued,
            "dropped": report.dropped,
            "min_t_delta_ps": overall.min_t_delta,
            "max_t_delta_ps": overall.max_t_delta,
            "mean_t_delta_ps": _fraction_out(overall.mean_t_delta),
        },
        "selection_slack_ps": report.selection_slack,
        "plans": [_plan_dict(p) for p in report.plans],
        "failures": [
            {"node_id": node, "error": kind, "message": message}
            for node, kind, message in report.failures
        ],
        "nodes": [_stats_dict(n) for n in report.nodes],
        "events": [
            {
                "packet_id": e.packet_id,
                "node_id": e.node_id,
                "t_qa_ps": e.t_qa,
                "t_ca_ps": e.t_ca,
                "t_delta_ps": e.t_delta,
                "verdict": verdicts[e.packet_id].value,
            }
            for e in report.events
        ],
    }


def report_from_dict(doc: dict) -> SyncReport:
    """Inverse of :func:`report_to_dict`; derived totals are recomputed."""
    if doc.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {doc.get('version')!r}")
    events = tuple(
        TransitEvent(e["packet_id"], e["node_id"], e["t_qa_ps"], e["t_ca_ps"])
        for e in doc["events"]
    )
    decisions = tuple(
        GateDecision(e["packet_id"], Verdict(e["verdict"])) for e in doc["events"]
    )
    nodes = tuple(
        NodeStats(
            n["node_id"], n["continued"], n["dropped"], n["min_t_delta_ps"],
            n["max_t_delta_ps"], _fraction_in(n["mean_t_delta_ps"]),
        )
        for n in doc["nodes"]
    )
    return SyncReport(
        events=events,
        decisions=decisions,
        nodes=nodes,
        tolerance=doc["gate_tolerance_ps"],
        plans=tuple(_plan_from(p) for p in doc["plans"]),
        failures=tuple(
            (f["node_id"], f["error"], f["message"]) for f in doc["failures"]
        ),
    )


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_report(report: SyncReport, format: str = "json") -> str:
    """Serialize *report*. Output is a pure function of the report."""
    if format == "json":
        return json.dumps(report_to_dict(report), indent=2) + "\n"
    if format == "csv":
        rows = (
            (e.packet_id, e.node_id, e.t_qa, e.t_ca, e.t_delta, d.verdict.value)
            for e, d in zip(report.events, report.decisions)
        )
        return _csv_text(EVENT_COLUMNS, rows)
    raise ValueError(f"unknown report format {format!r}; use json or csv")


def parse_report(text: str, format: str = "json") -> SyncReport:
    if format == "json":
        return report_from_dict(json.loads(text))
    if format == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
        events = tuple(
            TransitEvent(r["packet_id"], r["node_id"], int(r["t_qa_ps"]), int(r["t_ca_ps"]))
            for r in rows
        )
        decisions = tuple(GateDecision(r["packet_id"], Verdict(r["verdict"])) for r in rows)
        return SyncReport(events=events, decisions=decisions)
    raise ValueError(f"unknown report format {format!r}; use json or csv")


def emit_plans(plans, errors=None, format: str = "json") -> str:
    """Serialize planner output, including per-node failures."""
    errors = errors or {}
    if format == "json":
        doc = {
            "version": REPORT_VERSION,
            "plans": [_plan_dict(p) for p in plans],
            "failures": [
                {"node_id": node, "error": type(exc).__name__, "message": str(exc)}
                for node, exc in errors.items()
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    if format == "csv":
        rows = []
        for p in plans:
            s = p.selection
            rows.append((
                p.node_id, p.model.value, p.lead, p.quantum_length,
                p.classical_length, " ".join(d.id for d in p.delays),
                "" if s is None else s.retained_total,
                "" if s is None else s.saving,
                "" if s is None else s.slack,
                p.predicted_gap,
            ))
        return _csv_text(PLAN_COLUMNS, rows)
    raise ValueError(f"unknown plan format {format!r}; use json or csv")
