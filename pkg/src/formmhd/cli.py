"""Command-line scenario runner.

    formmhd --scenario contraction --n 3 --N 16 --out results/

Writes ``report.json``, ``report.csv`` and HMHD trajectory snapshots to the
output directory. Exits 0 iff every scenario check passed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .experiments import SCENARIOS, ScenarioConfig, run_scenario
from .solver import PicardDivergenceError, save_trajectory

log = logging.getLogger("formmhd")

# flag name -> config key
_FLAGS = {
    "scenario": "scenario",
    "n": "n",
    "N": "N",
    "T": "T",
    "M": "M",
    "p": "p",
    "q": "q",
    "seed": "seed",
    "out": "out",
    "lambda": "lam",
    "tol": "tol",
    "epsilons": "epsilons",
    "samples": "samples",
    "data": "data",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="formmhd", description="Run an MHD mild-solution experiment.")
    ap.add_argument("--config", metavar="PATH", help="JSON file with ScenarioConfig keys")
    ap.add_argument("--scenario", choices=SCENARIOS)
    ap.add_argument("--n", type=int, help="spatial dimension")
    ap.add_argument("--N", type=int, help="grid points per axis (power of two)")
    ap.add_argument("--T", type=float, help="time horizon")
    ap.add_argument("--M", type=int, help="number of time steps")
    ap.add_argument("--p", type=float, help="spatial exponent")
    ap.add_argument("--q", type=float, help="temporal exponent")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", metavar="DIR", help="output directory")
    ap.add_argument("--lambda", type=int, help="integer dilation factor for the scaling scenario")
    ap.add_argument("--tol", type=float, help="Picard tolerance")
    ap.add_argument("--epsilons", type=float, nargs="+", help="data sizes ||u0||_n + ||b0||_n")
    ap.add_argument("--samples", type=int, help="Monte-Carlo sample count")
    ap.add_argument("--data", choices=("random", "taylor_green"), help="initial-data family")
    ap.add_argument("--no-snapshots", action="store_true", help="skip writing trajectory snapshots")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(json.load(fh))
    for flag, key in _FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[key] = v
    return ScenarioConfig.from_dict(values)


def write_outputs(report, out: str, snapshots: bool = True) -> None:
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out, "report.csv"), "w") as fh:
        fh.write(report.to_csv())
    if not snapshots:
        return
    for label, (traj, picard) in report.trajectories.items():
        kw = {}
        if picard is not None:
            kw = {"tol": picard.tol, "iterations": picard.iterations}
        save_trajectory(traj, os.path.join(out, "snapshots", label), **kw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as err:
        print(f"formmhd: invalid configuration: {err}", file=sys.stderr)
        return 2
    try:
        report = run_scenario(cfg)
    except (ValueError, PicardDivergenceError) as err:
        print(f"formmhd: {cfg.scenario} failed: {err}", file=sys.stderr)
        return 1
    write_outputs(report, cfg.out, not args.no_snapshots)
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"{cfg.scenario}: {len(report.rows)} rows, config {cfg.hash[:12]}, written to {cfg.out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
