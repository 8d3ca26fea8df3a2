"""Command-line interface: headless runs, metrics recomputation, seed
batches, and the live gateway.

Exit codes: 0 success, 1 configuration error, 2 run failure (formation
break or goal not reached), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .gateway import GatewayServer
from .metrics import compute_metrics
from .runlog_io import export_runlog, load_runlog, write_summary
from .scenario import ConfigError, resolve_scenario
from .simulation import ScriptedCommands, Simulation, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUN_FAILURE = 2
EXIT_IO = 3


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        try:
            a, b = int(lo), int(hi)
        except ValueError:
            raise ConfigError(f"bad seed range: {text!r}") from None
        if b < a:
            raise ConfigError(f"bad seed range: {text!r}")
        return list(range(a, b + 1))
    try:
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad seed list: {text!r}") from None


def cmd_simulate(args) -> int:
    cfg = resolve_scenario(args.scenario).with_overrides(
        seed=args.seed, policy=args.policy, duration_s=args.duration
    )
    log, metrics = run_scenario(cfg)
    out = Path(args.out) if args.out else Path(f"runs/{cfg.name}-s{cfg.seed}-{cfg.policy}")
    export_runlog(log, out)
    print(json.dumps({"out": str(out), "seed": cfg.seed, "policy": cfg.policy, **metrics.to_dict()}))
    return EXIT_OK if metrics.completed else EXIT_RUN_FAILURE


def cmd_metrics(args) -> int:
    log = load_runlog(args.runlog)
    metrics = compute_metrics(log)
    print(json.dumps(metrics.to_dict()))
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = resolve_scenario(args.scenario)
    seeds = _parse_seeds(args.seeds)
    policies = ["switch", "no-switch"] if args.policy == "both" else [args.policy]
    entries = []
    for policy in policies:
        for seed in seeds:
            run_cfg = cfg.with_overrides(seed=seed, policy=policy, duration_s=args.duration)
            log, metrics = run_scenario(run_cfg)
            if args.out_dir:
                export_runlog(log, Path(args.out_dir) / f"{cfg.name}-s{seed}-{policy}")
            entries.append(
                {
                    "seed": seed,
                    "policy": policy,
                    "completed": metrics.completed,
                    "average_area": metrics.average_area,
                    "area_rmse": metrics.area_rmse,
                }
            )
            print(
                f"{policy:>9} seed {seed:>3}: "
                f"{'completed' if metrics.completed else 'FAILED   '} "
                f"area {metrics.average_area:7.3f}  rmse {metrics.area_rmse:7.3f}",
                file=sys.stderr,
            )
    write_summary(args.summary, entries)
    print(json.dumps({"summary": str(args.summary), "runs": len(entries)}))
    return EXIT_OK


def cmd_serve(args) -> int:
    cfg = resolve_scenario(args.scenario).with_overrides(
        seed=args.seed, policy=args.policy, duration_s=args.duration
    )
    operator = None if args.autopilot else ScriptedCommands([])
    sim = Simulation(cfg, operator=operator, record_commands=True)
    server = GatewayServer(
        sim,
        host=args.host,
        port=args.port,
        frame_hz=args.frame_rate,
        speed_factor=args.speed,
        start_paused=args.paused,
    )
    server.start()
    print(f"gateway listening on ws://{args.host}:{server.port}", file=sys.stderr)
    server.run_forever()
    if args.out:
        export_runlog(sim.log, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blimpswarm",
        description="Deterministic indoor blimp swarm simulator with leader switching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario headlessly and export its logs")
    sim.add_argument("--scenario", required=True, help="scenario file path or bundled name")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--policy", choices=["switch", "no-switch"], default=None)
    sim.add_argument("--duration", type=float, default=None, help="override duration, seconds")
    sim.add_argument("--out", default=None, help="output directory for run.csv / events.json")
    sim.add_argument(
        "--headless",
        action="store_true",
        help="accepted for symmetry; simulate always runs headless",
    )
    sim.set_defaults(fn=cmd_simulate)

    met = sub.add_parser("metrics", help="recompute metrics from an exported run log")
    met.add_argument("--runlog", required=True, help="directory holding run.csv and events.json")
    met.set_defaults(fn=cmd_metrics)

    bat = sub.add_parser("batch", help="run seed sweeps and write a summary table")
    bat.add_argument("--scenario", required=True)
    bat.add_argument("--seeds", required=True, help="range a..b or comma list")
    bat.add_argument("--policy", choices=["switch", "no-switch", "both"], default="both")
    bat.add_argument("--duration", type=float, default=None)
    bat.add_argument("--summary", required=True, help="summary CSV path")
    bat.add_argument("--out-dir", default=None, help="also keep per-run logs here")
    bat.set_defaults(fn=cmd_batch)

    srv = sub.add_parser("serve", help="run live with the WebSocket operator gateway")
    srv.add_argument("--scenario", required=True)
    srv.add_argument("--seed", type=int, default=None)
    srv.add_argument("--policy", choices=["switch", "no-switch"], default=None)
    srv.add_argument("--duration", type=float, default=None)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--frame-rate", type=float, default=20.0, help="telemetry frames per second")
    srv.add_argument("--speed", type=float, default=1.0, help="wall-clock speed factor")
    srv.add_argument("--paused", action="store_true", help="start paused")
    srv.add_argument(
        "--autopilot",
        action="store_true",
        help="keep the scripted operator driving (watch mode) instead of manual control",
    )
    srv.add_argument("--out", default=None, help="export the session log on shutdown")
    srv.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
