"""Serialization of campaign reports to csv, json and markdown."""

from __future__ import annotations

import csv
import io
import json
import math
import os

import numpy as np

from .campaign import BoundReport, ReportRow

FORMATS = ("csv", "json", "md")
CSV_FIELDS = ("trial", "bound", "label", "value", "exact", "status")


def _plain(v):
    """Convert numpy scalars and complex values into JSON-representable objects."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"__complex__": [float(v.real), float(v.imag)]}
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _unplain(obj):
    if isinstance(obj, dict) and set(obj) == {"__complex__"}:
        re, im = obj["__complex__"]
        return complex(re, im)
    return obj


def report_to_dict(r: BoundReport) -> dict:
    return _plain({
        "problem": r.problem,
        "eta": r.eta,
        "seed": r.seed,
        "trials": r.trials,
        "reference": dict(sorted(r.reference.items())),
        "rows": [
            {"trial": x.trial, "bound": x.bound, "label": x.label, "value": x.value,
             "exact": x.exact, "status": x.status, "factors": x.factors}
            for x in r.rows
        ],
        "summary": r.summary(),
    })


def report_from_dict(d: dict) -> BoundReport:
    rows = [ReportRow(x["trial"], x["bound"], x["label"], x["value"], x["exact"], x["status"],
                      x.get("factors", {})) for x in d.get("rows", [])]
    return BoundReport(d["problem"], d["eta"], d["seed"], d["trials"], rows, d.get("reference", {}))


def _num(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return repr(v) if math.isfinite(v) else str(v)


def to_json(r: BoundReport) -> str:
    return json.dumps(report_to_dict(r), indent=1, sort_keys=True) + "\n"


def to_csv(r: BoundReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for x in r.rows:
        w.writerow([x.trial, x.bound, x.label, _num(x.value), _num(x.exact), x.status])
    return buf.getvalue()


def _sci(v) -> str:
    if v is None or not math.isfinite(float(v)):
        return "-"
    return f"{float(v):.4e}"


def to_markdown(r: BoundReport) -> str:
    """One table per bound: eigenvalue | exact | estimate | reference, medians over trials."""
    out = [f"# {r.problem}, eta = {r.eta:g}, seed = {r.seed}, trials = {r.trials}", ""]
    summary = r.summary()
    bounds = list(dict.fromkeys(s["bound"] for s in summary)) or [""]
    for bound in bounds:
        if bound:
            out.append(f"## {bound}")
            out.append("")
        out.append("| eigenvalue | exact value | estimate | reference | violations |")
        out.append("|---|---|---|---|---|")
        for s in summary:
            if s["bound"] != bound:
                continue
            out.append(f"| {s['label']} | {_sci(s['exact_median'])} | {_sci(s['value_median'])} "
                       f"| {_sci(s['reference'])} | {s['violations']} |")
        out.append("")
    return "\n".join(out)


def render(r: BoundReport, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(r)
    if fmt == "json":
        return to_json(r)
    if fmt == "md":
        return to_markdown(r)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def emit_report(r: BoundReport, fmt: str, path) -> str:
    """Write the report and return the path; output is byte-stable for equal inputs."""
    text = render(r, fmt)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return str(path)


def read_report(path) -> BoundReport:
    """Read a json report written by :func:`emit_report`."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh, object_hook=_unplain)
    return report_from_dict(d)
