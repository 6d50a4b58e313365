"""Operator command line.

Subcommands: `kb build` (readings file -> knowledge snapshot), `trace
generate` (scenario -> readings JSONL), `simulate` (batch persona sessions),
`audit` (verify a log against every engine invariant), `report` (metrics over
log sets) and `serve` (the live HTTP service).

Exit codes: 0 success, 1 invalid input (malformed files, bad flags, config
mismatch), 2 runtime failure including audit violations.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from multiprocessing import Pool
from pathlib import Path

from .audit import audit_events
from .config import ConfigError, EngineConfig
from .explain import MODES
from .knowledge import InsufficientHistoryError, build_kb
from .model import EventLog, LogFormatError, read_readings_jsonl, write_readings_jsonl
from .sim import (
    ConfigMismatchError,
    Persona,
    ScenarioError,
    ScenarioSpec,
    Session,
    default_kb,
    generate_trace,
    load_bundled_persona,
    load_bundled_scenario,
    render_csv,
    render_json,
    render_text,
    report_metrics,
    summarize_log,
)

USAGE_ERRORS = (ConfigError, ConfigMismatchError, InsufficientHistoryError,
                LogFormatError, ScenarioError, FileNotFoundError, ValueError)


def _load_config(args) -> EngineConfig:
    config = EngineConfig.load(args.config) if args.config else EngineConfig()
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        field_types = {f.name: f.type for f in fields(EngineConfig)}
        if key not in field_types:
            raise ConfigError(f"unknown config field {key!r}")
        overrides[key] = json.loads(value)
    if overrides:
        config = EngineConfig.from_json({**config.to_json(), **overrides})
    config.validate()
    return config


def _load_spec(ref: str) -> ScenarioSpec:
    if Path(ref).exists():
        return ScenarioSpec.load(ref)
    return load_bundled_scenario(ref)


def _load_persona(ref: str) -> Persona:
    if Path(ref).exists():
        return Persona.load(ref)
    return load_bundled_persona(ref)


def cmd_kb_build(args) -> int:
    config = _load_config(args)
    readings = read_readings_jsonl(args.readings)
    appliance_ids = sorted({r.sensor_id for r in readings if r.kind == "power"})
    kb = build_kb(readings, appliance_ids, weeks=args.weeks, config=config)
    kb.save(args.out)
    print(f"knowledge base written to {args.out} "
          f"({kb.occupancy.window_weeks} week(s), {len(kb.habits.usage)} appliance(s))")
    return 0


def cmd_trace_generate(args) -> int:
    spec = _load_spec(args.spec)
    write_readings_jsonl(args.out, generate_trace(spec))
    print(f"trace written to {args.out}")
    return 0


def _simulate_one(job) -> dict:
    spec_json, persona_json, mode, seed, config_json, kb_json, out = job
    from .knowledge import KnowledgeBase

    spec = ScenarioSpec.from_json(spec_json)
    persona = Persona.from_json(persona_json)
    config = EngineConfig.from_json(config_json)
    kb = KnowledgeBase.from_json(kb_json)
    session = Session(spec, kb, mode, seed, config=config, persona=persona)
    result = session.run()
    if out:
        session.log.write(out)
    return result.stats


def cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    persona = _load_persona(args.persona)
    config = _load_config(args)
    if args.config is None and not args.set:
        config = spec.engine_config()
    kb = default_kb(spec, config)
    out_path = Path(args.out)
    jobs = []
    for i in range(args.runs):
        seed = args.seed + i
        if args.runs == 1:
            out = str(out_path)
        else:
            out = str(out_path.with_name(f"{out_path.stem}-{i:03d}{out_path.suffix}"))
        jobs.append((spec.to_json(), persona.to_json(), args.mode, seed,
                     config.to_json(), kb.to_json(), out))
    if args.parallel > 1 and len(jobs) > 1:
        with Pool(args.parallel) as pool:
            all_stats = pool.map(_simulate_one, jobs)
    else:
        all_stats = [_simulate_one(job) for job in jobs]
    for stats, job in zip(all_stats, jobs):
        ratio = stats["acceptance_ratio"]
        shown = f"{ratio:.3f}" if ratio is not None else "n/a"
        print(f"{job[6]}: issued {stats['issued']}, acceptance {shown}")
    return 0


def cmd_audit(args) -> int:
    worst = 0
    for log_file in args.log:
        log = EventLog.read(log_file)
        violations = audit_events(log.events)
        if violations:
            worst = 2
            for v in violations:
                print(f"{log_file}: {v}")
        else:
            print(f"{log_file}: ok ({len(log)} events)")
    return worst


def cmd_report(args) -> int:
    paths: list[Path] = []
    for pattern in args.logs:
        p = Path(pattern)
        if p.exists():
            paths.append(p)
        else:
            paths.extend(sorted(p.parent.glob(p.name)))
    if not paths:
        raise FileNotFoundError(f"no logs match {args.logs}")
    summaries = [summarize_log(EventLog.read(p).events) for p in paths]
    report = report_metrics(summaries, force=args.force)
    rendered = {"text": render_text, "csv": render_csv, "json": render_json}[args.format](report)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(rendered)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    data = args.data or os.environ.get("WATTWISE_DATA") or "./wattwise-data"
    app = create_app(data)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wattwise")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", help="engine config JSON file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config field (repeatable)")

    kb = sub.add_parser("kb", help="knowledge base tools")
    kb_sub = kb.add_subparsers(dest="kb_command", required=True)
    kb_build = kb_sub.add_parser("build", help="build a knowledge snapshot from readings")
    kb_build.add_argument("--readings", required=True)
    kb_build.add_argument("--weeks", type=int, default=None)
    kb_build.add_argument("--out", required=True)
    add_config_flags(kb_build)
    kb_build.set_defaults(func=cmd_kb_build)

    trace = sub.add_parser("trace", help="trace tools")
    trace_sub = trace.add_subparsers(dest="trace_command", required=True)
    trace_gen = trace_sub.add_parser("generate", help="generate a readings trace")
    trace_gen.add_argument("--spec", required=True)
    trace_gen.add_argument("--out", required=True)
    trace_gen.set_defaults(func=cmd_trace_generate)

    simulate = sub.add_parser("simulate", help="run batch persona sessions")
    simulate.add_argument("--spec", required=True)
    simulate.add_argument("--persona", required=True)
    simulate.add_argument("--mode", required=True, choices=MODES)
    simulate.add_argument("--seed", type=int, default=1)
    simulate.add_argument("--out", required=True)
    simulate.add_argument("--runs", type=int, default=1)
    simulate.add_argument("--parallel", type=int, default=1)
    add_config_flags(simulate)
    simulate.set_defaults(func=cmd_simulate)

    audit = sub.add_parser("audit", help="verify a session log")
    audit.add_argument("--log", required=True, nargs="+")
    audit.set_defaults(func=cmd_audit)

    report = sub.add_parser("report", help="metrics over session logs")
    report.add_argument("--logs", required=True, nargs="+",
                        help="log files or glob patterns")
    report.add_argument("--format", choices=("text", "csv", "json"), default="text")
    report.add_argument("--out")
    report.add_argument("--force", action="store_true",
                        help="pool logs even when engine configs differ")
    report.set_defaults(func=cmd_report)

    serve = sub.add_parser("serve", help="run the live session service")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data", help="data directory (or WATTWISE_DATA env var)")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
