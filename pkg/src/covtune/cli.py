"""Command-line front end: ``covtune {scalar,gen-h,static,dynamic}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import obs_operator
from .assimilation import DegeneratePosteriorError, Method
from .config import ConfigError, RunConfig, config_hash, dump_config, help_epilog, load_config, to_mapping
from .shallow_water import BlowUpError
from .spd import NotPositiveDefiniteError
from .twin import CHAIN_VARIANTS, run_dynamic_chain, run_monte_carlo, run_scalar

log = logging.getLogger("covtune")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (NotPositiveDefiniteError, DegeneratePosteriorError, BlowUpError,
                    FloatingPointError, np.linalg.LinAlgError, ArithmeticError)


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> Path:
    """CSV with full-precision floats (``repr`` gives 17 significant digits when needed)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _parse(cell: str):
    for kind in (int, float):
        try:
            return kind(cell)
        except ValueError:
            pass
    return cell


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _prepare_out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.resolved.yaml")
    return out


def cmd_scalar(cfg: RunConfig) -> Path:
    out = _prepare_out(cfg)
    rows = run_scalar(cfg.scalar)
    path = write_csv(out / "scalar.csv", ["iter", "method", "assumed_var", "exact_var"], rows)
    print(f"wrote {path}")
    return path


def cmd_gen_h(cfg: RunConfig) -> Path:
    out = _prepare_out(cfg)
    H = obs_operator.generate_h(cfg.twin.operator)
    path = obs_operator.save_h(H, out / "H.csv")
    print(f"wrote {path} ({H.shape[0]}x{H.shape[1]}, seed {cfg.twin.operator.seed})")
    print("points per observation: rows")
    for count, rows in obs_operator.row_count_histogram(H).items():
        print(f"  {count}: {rows}")
    return path


def cmd_static(cfg: RunConfig, per_trial: bool = False) -> Path:
    out = _prepare_out(cfg)
    agg = run_monte_carlo(cfg.twin, threads=cfg.threads)
    summary = {
        "seed": cfg.twin.seed,
        "trials": agg.trials,
        "runtime_s": agg.runtime,
        "config_hash": config_hash(cfg),
        "units": {"velocity": "0.1 m/s", "distance": "grid cells (1 mm)"},
        "optimal_mean_err": agg.optimal_mean_err,
        "optimal_std_err": agg.optimal_std_err,
        "background_mean_err": agg.background_mean_err,
        "methods": {},
        "config": to_mapping(cfg),
    }
    for method, m in agg.methods.items():
        write_csv(out / f"aggregate_{method.value}.csv",
                  ["iter", "mean_err", "std_err", "mean_innov", "mean_trace_BA"], m.rows())
        if per_trial:
            rows = ((t, k + 1, e) for t, errs in enumerate(m.errors) for k, e in enumerate(errs))
            write_csv(out / f"trials_{method.value}.csv", ["trial", "iter", "err"], rows)
        summary["methods"][method.value] = {
            "mismatch_initial": m.mismatch_initial,
            "mismatch_final": m.mismatch_final,
            "airm_initial": m.airm_initial,
            "airm_final": m.airm_final,
            "final_mean_err": float(m.mean_err[-1]),
        }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2))
    print(f"wrote {path} ({agg.trials} trials, {agg.runtime:.1f} s)")
    return path


def cmd_dynamic(cfg: RunConfig) -> Path:
    out = _prepare_out(cfg)
    res = run_dynamic_chain(cfg.chain, cfg.twin)
    rows = zip(res.cycles, res.times, *(res.mean_err[v] for v in CHAIN_VARIANTS))
    path = write_csv(out / "chain.csv",
                     ["cycle", "time"] + [f"mean_err_{v}" for v in CHAIN_VARIANTS], rows)
    print(f"wrote {path} ({res.runtime:.1f} s)")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covtune",
        description="Iterative background covariance tuning experiments.",
        epilog=help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=["scalar", "gen-h", "static", "dynamic"])
    parser.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="master seed (overrides twin.seed)")
    parser.add_argument("--trials", type=int, help="trial count (overrides twin.mc_trials / chain.trials)")
    parser.add_argument("--threads", type=int, help="worker threads")
    parser.add_argument("--per-trial", action="store_true", help="static: also write per-trial errors")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _overrides(args) -> dict:
    o = {}
    if args.out is not None:
        o["out"] = args.out
    if args.threads is not None:
        o["threads"] = args.threads
    if args.seed is not None:
        o.setdefault("twin", {})["seed"] = args.seed
    if args.trials is not None:
        o.setdefault("twin", {})["mc_trials"] = args.trials
        o.setdefault("chain", {})["trials"] = args.trials
    return o


COMMANDS = {"scalar": cmd_scalar, "gen-h": cmd_gen_h, "static": cmd_static, "dynamic": cmd_dynamic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        if args.command == "static":
            cmd_static(cfg, per_trial=args.per_trial)
        else:
            COMMANDS[args.command](cfg)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        # trial failures are wrapped with their index
        cause = exc.__cause__
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(cause, NUMERICAL_ERRORS) else 1
    log.info("done in %.1f s", time.perf_counter() - t0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
