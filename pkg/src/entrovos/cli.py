"""Command-line entry points.

Subcommands:
    run        evaluate one sequence and write a metrics report
    bench      evaluate a directory of manifests
    proxy-eval correlate region entropy against IoU over dilation radii
    synth      generate a synthetic benchmark sequence
    serve      run the live-session service
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .formats import load_manifest
from .harness import (
    EpisodeConfig,
    build_tracker,
    episode_report,
    load_episode_config,
    proxy_eval,
    run_benchmark,
    run_episode,
    write_proxy_csv,
    write_report,
)
from .metrics import aggregate_metrics
from .refiner import build_refiner
from .tracker import reference_scenario, synth_generate

CLI_AGENTS = {
    "simulated": "simulated_misclassified",
    "gt-centroid": "simulated_gt_centroid",
    "none": "none",
}
CLI_INITS = {"gt": "gt_mask", "click": "init_click"}


def _config_from_args(args) -> EpisodeConfig:
    config = load_episode_config(args.config) if args.config else EpisodeConfig()
    overrides = {}
    if getattr(args, "agent", None):
        overrides["agent"] = CLI_AGENTS[args.agent]
    if getattr(args, "init", None):
        overrides["init"] = CLI_INITS[args.init]
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    return config


def cmd_run(args) -> int:
    config = _config_from_args(args)
    manifest = load_manifest(args.manifest)
    tracker = build_tracker(manifest, args.manifest)
    refiner = build_refiner(config.refiner, config.refiner_params)
    log = run_episode(manifest, tracker, refiner, config)
    if log.error:
        print(f"episode aborted: {log.error}", file=sys.stderr)
    seq_report = episode_report(log, manifest, config)
    report = {
        "sequences": [seq_report],
        "errors": [] if not log.error else [{"manifest": str(args.manifest), "error": log.error}],
        "summary": aggregate_metrics(seq_report["objects"], config.r_at_taus),
    }
    write_report(report, args.out)
    if args.log:
        Path(args.log).write_text(json.dumps(log.to_json_dict(), indent=2) + "\n")
    print(f"report written to {args.out}")
    return 1 if log.error else 0


def _discover_manifests(directory: Path):
    nested = sorted(directory.glob("**/manifest.json"))
    top = sorted(
        p for p in directory.glob("*.json") if p.name not in ("scenario.json", "manifest.json")
    )
    seen = set()
    out = []
    for p in list(nested) + list(top):
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def cmd_bench(args) -> int:
    config = _config_from_args(args)
    manifests = _discover_manifests(Path(args.manifest_dir))
    if not manifests:
        print(f"no manifests under {args.manifest_dir}", file=sys.stderr)
        return 2
    report = run_benchmark(manifests, config, jobs=args.jobs)
    write_report(report, args.out)
    n_ok, n_err = len(report["sequences"]), len(report["errors"])
    print(f"{n_ok} sequence(s) evaluated, {n_err} error(s); report written to {args.out}")
    return 0


def cmd_proxy_eval(args) -> int:
    radii = [int(r) for r in args.radii.split(",") if r.strip()]
    rows = proxy_eval([args.manifest], radii)
    write_proxy_csv(rows, args.out)
    print(f"{len(rows)} row(s) written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    scenario = reference_scenario(args.scenario, frames=args.frames, seed=args.seed)
    manifest = synth_generate(scenario, args.out)
    print(f"wrote {manifest.num_frames} frames to {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve_session

    config = _config_from_args(args)
    serve_session(args.manifest, config, port=args.port, static_dir=args.static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entrovos")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate one sequence")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--agent", choices=sorted(CLI_AGENTS), default=None)
    p.add_argument("--init", choices=sorted(CLI_INITS), default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None, help="also write the per-frame episode log")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="evaluate a directory of manifests")
    p.add_argument("--manifest-dir", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("proxy-eval", help="entropy-vs-IoU correlation sweep")
    p.add_argument("--manifest", required=True)
    p.add_argument("--radii", default="1,2,3,4,5")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_proxy_eval)

    p = sub.add_parser("synth", help="generate a synthetic sequence")
    p.add_argument("--scenario", choices=("drift", "distractor", "occlusion"), required=True)
    p.add_argument("--frames", type=int, default=80)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="live session service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
