"""``cbfsafe`` command line: train | eval | bench | check.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ._backend import BACKEND
from .errors import ConfigError

log = logging.getLogger("cbfsafe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command, run_cfg, seed, artifacts, extra=None):
    doc = {
        "command": command,
        "seed": seed,
        "backend": BACKEND,
        "config": run_cfg.to_dict() if run_cfg is not None else None,
        "artifacts": {Path(p).name: _sha256(p) for p in artifacts},
    }
    if extra:
        doc.update(extra)
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def _write_rows(path, fields, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return path


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("constraint counts must be positive integers")
    return vals


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser():
    p = _Parser(prog="cbfsafe", description="Closed-form CBF safety layer: train, evaluate, benchmark, check.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="train safe SAC on the reach-avoid task")
    t.add_argument("--config", help="TOML run configuration (defaults if omitted)")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", help="output directory (overrides config output_dir)")
    t.add_argument("--traces", action="store_true", help="also write per-step training traces")

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--episodes", type=_positive_int, default=200)
    e.add_argument("--traces", action="store_true", help="write traces.csv and trajectories.svg")
    e.add_argument("--out", help="output directory (default: next to the checkpoint)")
    e.add_argument("--seed", type=int)
    e.add_argument("--stochastic", action="store_true", help="sample actions instead of the mean")

    b = sub.add_parser("bench", help="time closed-form layer vs QP baseline")
    b.add_argument("--constraints", type=_int_list, default=[3, 10, 30])
    b.add_argument("--reps", type=_positive_int, default=10_000)
    b.add_argument("--out", required=True, help="CSV report path")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--methods", default="closed_form,qp_baseline")

    c = sub.add_parser("check", help="run the oracle/property suites")
    c.add_argument("--full", action="store_true", help="use full sample counts")
    return p


def cmd_train(args):
    from .config import RunConfig, load_config
    from .learner.checkpoint import save_checkpoint
    from .learner.sac import METRIC_FIELDS, train
    from .traces import write_trace_csv

    cfg = load_config(args.config) if args.config else RunConfig().validate()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_dir = args.out
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    def progress(row):
        if row["episode"] % 50 == 0 or row["episode"] == cfg.sac.episodes - 1:
            print(f"episode {row['episode']:5d}  return {row['return']:9.2f}  steps {row['steps']:3d}  "
                  f"min h_i {row['min_hi_episode']:.4f}  min h {row['min_composite_h_episode']:.4f}", flush=True)

    res = train(cfg.env, cfg.sac, cfg.filter, cfg.seed, record_traces=args.traces, progress=progress)
    arts = [_write_rows(out / "metrics.csv", METRIC_FIELDS, res.metrics),
            save_checkpoint(out / "checkpoint.json", res.agent, cfg)]
    if args.traces:
        arts.append(write_trace_csv(out / "train_traces.csv", res.traces, len(cfg.env.obstacles)))
    min_h = min(r["min_composite_h_episode"] for r in res.metrics)
    write_manifest(out, "train", cfg, cfg.seed, arts, {"min_composite_h": min_h, "total_steps": res.total_steps})
    print(f"wrote {out}; min composite h over training {min_h:.6f}")
    return 0


EVAL_FIELDS = ["episode", "return", "steps", "reached_goal", "min_hi_episode", "min_composite_h_episode"]


def cmd_eval(args):
    from .learner.checkpoint import load_checkpoint
    from .learner.sac import evaluate
    from .traces import export_traces

    agent, cfg = load_checkpoint(args.checkpoint)
    seed = cfg.seed if args.seed is None else args.seed
    out = Path(args.out) if args.out else Path(args.checkpoint).parent / "eval"
    out.mkdir(parents=True, exist_ok=True)
    rows, trace, starts = evaluate(agent, args.episodes, seed, deterministic=not args.stochastic,
                                   record_traces=args.traces)
    arts = [_write_rows(out / "eval.csv", EVAL_FIELDS, rows)]
    if args.traces:
        arts += list(export_traces(out, cfg.env, trace, starts))
    success = float(np.mean([r["reached_goal"] for r in rows]))
    min_hi = min(r["min_hi_episode"] for r in rows)
    write_manifest(out, "eval", cfg, seed, arts,
                   {"checkpoint_sha256": _sha256(args.checkpoint), "success_rate": success, "min_hi": min_hi})
    print(f"{args.episodes} episodes: success rate {success:.3f}; min h_i {min_hi:.6f}")
    return 0 if min_hi > 0 else 1


def cmd_bench(args):
    from .bench import BenchSpec, emit_report, run_bench

    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    spec = BenchSpec(constraint_counts=tuple(args.constraints), repetitions=args.reps, methods=methods,
                     seed=args.seed)
    rows = run_bench(spec)
    text, summary = emit_report(rows)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(summary, end="")
    return 0 if all(r.valid for r in rows) else 1


def cmd_check(args):
    from .checks import run_all

    results = run_all(quick=not args.full)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"check failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "bench": cmd_bench, "check": cmd_check}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cbfsafe: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"cbfsafe: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"cbfsafe: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (FileNotFoundError, ValueError)) else 1
    except Exception as exc:  # noqa: BLE001 - last-resort one-line reason
        print(f"cbfsafe: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
