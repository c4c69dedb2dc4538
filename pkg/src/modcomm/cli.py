"""Command-line surface: compute, sweep, validate, current.

Exit codes: 0 success, 1 validation-suite failure, 2 configuration error,
3 numerical-contract failure (degenerate filling, imaginary residue, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, gaussian
from .calibration import run_calibration_suite
from .config import load_config, partition_from_config
from .errors import (ConfigError, DegenerateFillingError, IncompleteJunctionError,
                     InvalidPartitionError, NumericalContractError)
from .experiments import (EXPERIMENT_OPS, append_csv, current_map, read_done_keys,
                          write_csv, write_jsonl)
from .experiments import _build_model  # single-point runs reuse the sweep machinery
from .regions import validate_partition

CONFIG_EXIT = 2
NUMERIC_EXIT = 3


def _out_dir(cfg: dict, args) -> str:
    out = args.out or os.environ.get("MODCOMM_OUT") or cfg.get("output", {}).get("dir", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _apply_overrides(cfg: dict, args) -> dict:
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    return cfg


def cmd_compute(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = _out_dir(cfg, args)
    model = _build_model(cfg.get("model", {}), {})
    part = partition_from_config(cfg.get("partition", {}), model)
    validate_partition(part)
    if len(part.regions) < 3:
        raise ConfigError("compute needs a partition with at least three regions")
    eps = float(cfg.get("experiment", {}).get("clip_modular", gaussian.MODULAR_CLIP))
    corr = gaussian.ground_state_correlations(model)
    res = gaussian.modular_commutator_detail(corr, *part.regions[:3], eps=eps)
    n = gaussian.geometric_integer(res.value, part.kind)
    print(f"J = {res.value:.12g}")
    print(f"n = {n:.12g}")
    print(f"imag_residue = {res.imag_residue:.3e}")
    result = {
        "J": res.value,
        "n": n,
        "imag_residue": res.imag_residue,
        "partition": part.name,
        "kind": part.kind,
        "model": cfg.get("model", {}),
        "version": __version__,
        "seed": cfg.get("seed"),
    }
    path = os.path.join(out, "compute_result.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
    print(f"result written to {path}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = _out_dir(cfg, args)
    op_name = cfg.get("experiment", {}).get("op")
    if op_name not in EXPERIMENT_OPS:
        raise ConfigError(
            f"experiment.op must be one of {sorted(EXPERIMENT_OPS)}, got {op_name!r}"
        )
    threads = int(cfg.get("threads", 1))
    csv_path = os.path.join(out, cfg.get("output", {}).get("csv", "sweep.csv"))
    jsonl_path = os.path.join(out, cfg.get("output", {}).get("jsonl", "sweep.jsonl"))
    resume = bool(args.resume or cfg.get("output", {}).get("resume", False))
    print(f"running {op_name} with {threads} worker(s)", file=sys.stderr)
    if resume and os.path.exists(csv_path):
        done = read_done_keys(csv_path)
        records = EXPERIMENT_OPS[op_name](cfg, threads=threads, skip=done)
        append_csv(records, csv_path)
        print(f"resumed: {len(done)} rows kept, {len(records)} added", file=sys.stderr)
    else:
        records = EXPERIMENT_OPS[op_name](cfg, threads=threads)
        if not records:
            raise ConfigError("sweep produced no grid points (empty grid)")
        write_csv(records, csv_path)
    write_jsonl(records, jsonl_path)
    n_failed = sum(1 for r in records if r.error)
    print(f"{len(records)} rows -> {csv_path} ({n_failed} failed points)", file=sys.stderr)
    if records and n_failed == len(records):
        print("all grid points failed", file=sys.stderr)
        return NUMERIC_EXIT
    return 0


def cmd_validate(args) -> int:
    report = run_calibration_suite(
        n_cases=args.cases,
        seed=args.seed if args.seed is not None else 20240817,
        max_modes=args.modes,
    )
    for line in report.summary_lines():
        print(line)
    return 0 if report.passed else 1


def cmd_current(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = _out_dir(cfg, args)
    records, _table = current_map(cfg, out_dir=out)
    rec = records[0]
    print(f"J = {rec.J:.12g}")
    print(f"sum f = {rec.extra['current_total']:.12g}")
    print(f"resummation defect = {rec.extra['resummation_defect']:.3e}")
    print(f"per-site map written to {out}/current_map.csv", file=sys.stderr)
    if rec.extra["resummation_defect"] > 1e-9:
        raise NumericalContractError("modular-current resummation defect above 1e-9")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modcomm",
        description="Modular commutators of free-fermion lattice ground states",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--out", default=None, help="output directory override")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("compute", parents=[common],
                       help="single-point modular commutator")
    p.set_defaults(fn=cmd_compute)
    p = sub.add_parser("sweep", parents=[common], help="run an experiment grid")
    p.add_argument("--resume", action="store_true",
                   help="keep existing CSV rows, compute only missing ones")
    p.set_defaults(fn=cmd_sweep)
    p = sub.add_parser("validate", help="oracle calibration and invariant suite")
    p.add_argument("--modes", type=int, default=10)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_validate)
    p = sub.add_parser("current", parents=[common], help="modular-current map")
    p.set_defaults(fn=cmd_current)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, InvalidPartitionError, IncompleteJunctionError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return CONFIG_EXIT
    except (DegenerateFillingError, NumericalContractError) as err:
        print(f"numerical contract failure: {err}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
