"""Command line entry points.

    motorbench serve        live service: WebSocket + HTTP, optional TCP
    motorbench run          execute one scripted scenario, print the outcome
    motorbench reliability  repeat one fault's scenario across many seeds

All three take --config; without it the shipped defaults apply.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import RunConfig, load_config
from .events import FaultKind
from .harness import (
    builtin_scenario,
    load_scenario,
    render_report,
    render_table,
    run_reliability,
    run_scenario,
)


def _load(config_path: Optional[str]) -> RunConfig:
    if config_path is None:
        return RunConfig()
    return load_config(config_path)


def _parse_listen(value: str) -> tuple:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import BenchService, create_app

    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    config = _load(args.config)
    service = BenchService(
        config,
        speed=args.speed,
        snapshot_every_ticks=args.snapshot_every,
        log_path=args.log,
    )
    tcp = _parse_listen(args.tcp_listen) if args.tcp_listen else None
    app = create_app(service, tcp_listen=tcp)
    host, port = _parse_listen(args.listen)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args.config)
    if Path(args.scenario).suffix == ".json":
        script = load_scenario(args.scenario)
    else:
        script = builtin_scenario(FaultKind(args.scenario))
    result = run_scenario(config, script, seed=args.seed)

    if args.log:
        with open(args.log, "w", encoding="utf-8") as f:
            for ev in result.events:
                f.write(ev.to_json() + "\n")

    print(f"scenario : {result.scenario} (seed {result.seed})")
    if result.trip is None:
        print(f"outcome  : no trip within {script.timeout_s} s")
        return 1
    t = result.trip
    print(
        f"outcome  : trip {t.ansi_function.value} -> {t.fault_kind.value} "
        f"at t={t.sim_time:.3f} s"
    )
    print(
        f"measured : {t.measured_value:.3f} {t.unit} "
        f"(setting {t.setting_value:.3f} {t.unit})"
    )
    if result.detection_latency_s is not None:
        print(f"latency  : {result.detection_latency_s:.3f} s after injection")
    if result.correct is not None:
        print(f"correct  : {result.correct}")
    return 0


def cmd_reliability(args: argparse.Namespace) -> int:
    import json

    config = _load(args.config)
    if args.fault == "all":
        reports = [
            run_reliability(config, fault, trials=args.n, base_seed=args.base_seed)
            for fault in FaultKind
        ]
        sys.stdout.write(render_table(reports))
        if args.out:
            doc = json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
            Path(args.out).write_text(doc, encoding="utf-8")
            print(f"reports written to {args.out}")
        return 0
    report = run_reliability(
        config, FaultKind(args.fault), trials=args.n, base_seed=args.base_seed
    )
    sys.stdout.write(render_report(report))
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
        print(f"report written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motorbench",
        description="Simulated three-phase induction motor workbench "
        "with a protection relay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the live bench service")
    p_serve.add_argument("--config", help="config JSON path (default: built-ins)")
    p_serve.add_argument(
        "--listen", default="127.0.0.1:8000", help="HTTP/WebSocket host:port"
    )
    p_serve.add_argument(
        "--tcp-listen", default=None, help="optional TCP line-protocol host:port"
    )
    p_serve.add_argument(
        "--speed", type=float, default=1.0, help="sim speed vs real time"
    )
    p_serve.add_argument(
        "--snapshot-every",
        type=int,
        default=10,
        help="quiet-period snapshot interval, ticks",
    )
    p_serve.add_argument("--log", default=None, help="append event log (LDJSON)")
    p_serve.set_defaults(func=cmd_serve)

    p_run = sub.add_parser("run", help="execute one scripted scenario")
    p_run.add_argument(
        "--scenario",
        required=True,
        help="fault kind (builtin scenario) or a scenario JSON path",
    )
    p_run.add_argument("--config", help="config JSON path (default: built-ins)")
    p_run.add_argument("--seed", type=int, default=None, help="RNG seed override")
    p_run.add_argument("--log", default=None, help="write event log (LDJSON)")
    p_run.set_defaults(func=cmd_run)

    p_rel = sub.add_parser(
        "reliability", help="repeat one fault's scenario across seeds"
    )
    p_rel.add_argument(
        "--fault",
        required=True,
        choices=[f.value for f in FaultKind] + ["all"],
    )
    p_rel.add_argument("--n", type=int, default=100, help="number of trials")
    p_rel.add_argument("--config", help="config JSON path (default: built-ins)")
    p_rel.add_argument("--base-seed", type=int, default=0)
    p_rel.add_argument("--out", default=None, help="write JSON report here")
    p_rel.set_defaults(func=cmd_reliability)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
