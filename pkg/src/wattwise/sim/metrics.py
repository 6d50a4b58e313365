"""Acceptance metrics over one or many session logs.

The headline number is the acceptance ratio, accepted / (accepted +
rejected): ignored responses never enter the denominator and are reported as
a separate fraction of everything issued. Per-mode means are averaged over
sessions (one session = one user) with the population standard deviation;
per-projection and fact-type breakdowns pool responses across sessions.
"""

from __future__ import annotations

import io
import math

from ..explain import FACT_TYPES, MODES, PROJECTIONS
from ..model import EV_RECOMMENDATION, EV_RESPONSE, EV_SESSION_STARTED, canonical_json

REPORT_SCHEMA = "wattwise-report-v1"


class ConfigMismatchError(ValueError):
    """Logs produced under different engine configs cannot be pooled."""


def summarize_log(events) -> dict:
    """Per-session counts extracted from a log, independent of the Session
    class so reports can be built from files alone."""
    events = list(events)
    if not events or events[0].kind != EV_SESSION_STARTED:
        raise ValueError("log does not begin with a session_started event")
    head = events[0].data
    facts = {}       # rec id -> (fact type, projection) or ("none", "none")
    responses = []   # (fact type, projection, response)
    for ev in events:
        if ev.kind == EV_RECOMMENDATION:
            rec = ev.data["rec"]
            fact = rec.get("fact")
            facts[rec["id"]] = (fact["fact_type"], fact["projection"]) if fact else ("none", "none")
        elif ev.kind == EV_RESPONSE:
            fact_type, projection = facts[ev.data["rec_id"]]
            responses.append((fact_type, projection, ev.data["response"]))
    accepted = sum(1 for *_, r in responses if r == "accept")
    rejected = sum(1 for *_, r in responses if r == "reject")
    ignored = sum(1 for *_, r in responses if r == "ignore")
    answered = accepted + rejected
    return {
        "session_id": head["session_id"],
        "mode": head["mode"],
        "config_fingerprint": canonical_json(head["config"]),
        "issued": len(facts),
        "accepted": accepted,
        "rejected": rejected,
        "ignored": ignored,
        "acceptance_ratio": accepted / answered if answered else None,
        "responses": responses,
    }


def _pool(cells: dict, key, response) -> None:
    cell = cells.setdefault(key, {"accepted": 0, "rejected": 0, "ignored": 0})
    cell[{"accept": "accepted", "reject": "rejected", "ignore": "ignored"}[response]] += 1


def _ratio(cell: dict) -> float | None:
    n = cell["accepted"] + cell["rejected"]
    return cell["accepted"] / n if n else None


def report_metrics(summaries, force: bool = False) -> dict:
    """Aggregate session summaries (from `summarize_log` or Session.stats
    with responses) into one report."""
    summaries = list(summaries)
    if not summaries:
        raise ValueError("no session logs to report on")
    fingerprints = {s["config_fingerprint"] for s in summaries}
    if len(fingerprints) > 1 and not force:
        raise ConfigMismatchError(
            f"{len(fingerprints)} distinct engine configs in the log set; "
            "pass force to pool them anyway")

    modes: dict = {}
    projections: dict = {}
    heatmap: dict = {}
    issued_total = 0
    ignored_total = 0
    responses_total = 0
    for s in summaries:
        issued_total += s["issued"]
        per_mode = modes.setdefault(s["mode"], {"sessions": 0, "ratios": [],
                                                "accepted": 0, "rejected": 0,
                                                "ignored": 0, "issued": 0})
        per_mode["sessions"] += 1
        per_mode["issued"] += s["issued"]
        per_mode["accepted"] += s["accepted"]
        per_mode["rejected"] += s["rejected"]
        per_mode["ignored"] += s["ignored"]
        if s["acceptance_ratio"] is not None:
            per_mode["ratios"].append(s["acceptance_ratio"])
        for fact_type, projection, response in s["responses"]:
            responses_total += 1
            if response == "ignore":
                ignored_total += 1
            if fact_type != "none":
                _pool(projections, projection, response)
                _pool(heatmap, f"{fact_type}|{projection}", response)

    mode_block = {}
    for mode, agg in sorted(modes.items()):
        ratios = agg.pop("ratios")
        if ratios:
            mean = sum(ratios) / len(ratios)
            stdev = math.sqrt(sum((r - mean) ** 2 for r in ratios) / len(ratios))
        else:
            mean = stdev = None
        mode_block[mode] = {**agg, "mean_acceptance": mean, "stdev_acceptance": stdev}

    return {
        "schema": REPORT_SCHEMA,
        "sessions": len(summaries),
        "issued_total": issued_total,
        "ignored_fraction": ignored_total / responses_total if responses_total else None,
        "modes": mode_block,
        "projections": {p: {**cell, "ratio": _ratio(cell)}
                        for p, cell in sorted(projections.items())},
        "fact_projection": {key: {**cell, "ratio": _ratio(cell)}
                            for key, cell in sorted(heatmap.items())},
    }


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.4f}"
    return str(x)


def render_text(report: dict) -> str:
    out = io.StringIO()
    out.write(f"sessions: {report['sessions']}   issued: {report['issued_total']}   "
              f"ignored fraction: {_fmt(report['ignored_fraction'])}\n")
    out.write("\nmode          sessions  mean acceptance  stdev    accepted/rejected/ignored\n")
    for mode in MODES:
        m = report["modes"].get(mode)
        if not m:
            continue
        out.write(f"{mode:<13} {m['sessions']:>8}  {_fmt(m['mean_acceptance']):>15}  "
                  f"{_fmt(m['stdev_acceptance']):>7}  "
                  f"{m['accepted']}/{m['rejected']}/{m['ignored']}\n")
    if report["projections"]:
        out.write("\nprojection    ratio     accepted/rejected\n")
        for proj in PROJECTIONS:
            cell = report["projections"].get(proj)
            if cell:
                out.write(f"{proj:<13} {_fmt(cell['ratio']):>8}  "
                          f"{cell['accepted']}/{cell['rejected']}\n")
    if report["fact_projection"]:
        out.write("\nfact x projection ratios\n")
        header = "          " + "".join(f"{p:>10}" for p in PROJECTIONS)
        out.write(header + "\n")
        for fact_type in FACT_TYPES:
            row = f"{fact_type:<10}"
            for proj in PROJECTIONS:
                cell = report["fact_projection"].get(f"{fact_type}|{proj}")
                row += f"{_fmt(cell['ratio']) if cell else '-':>10}"
            out.write(row + "\n")
    return out.getvalue()


def render_csv(report: dict) -> str:
    rows = ["section,key,metric,value"]
    rows.append(f"totals,,sessions,{report['sessions']}")
    rows.append(f"totals,,issued,{report['issued_total']}")
    rows.append(f"totals,,ignored_fraction,{_fmt(report['ignored_fraction'])}")
    for mode, m in report["modes"].items():
        for metric in ("sessions", "issued", "accepted", "rejected", "ignored",
                       "mean_acceptance", "stdev_acceptance"):
            rows.append(f"mode,{mode},{metric},{_fmt(m[metric])}")
    for proj, cell in report["projections"].items():
        for metric in ("accepted", "rejected", "ignored", "ratio"):
            rows.append(f"projection,{proj},{metric},{_fmt(cell[metric])}")
    for key, cell in report["fact_projection"].items():
        for metric in ("accepted", "rejected", "ignored", "ratio"):
            rows.append(f"fact_projection,{key},{metric},{_fmt(cell[metric])}")
    return "\n".join(rows) + "\n"


def render_json(report: dict) -> str:
    return canonical_json(report) + "\n"
