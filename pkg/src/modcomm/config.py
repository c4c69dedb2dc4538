"""Run-configuration loading, strict validation and region expressions.

One YAML file describes one run: a model block, a partition block (a named
preset or a declarative region-expression tree), an experiment block and an
output block.  Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import numbers

import numpy as np
import yaml

from .errors import ConfigError
from .lattice import LatticeModel
from .regions import (Partition, cell_rectangle, disk, edge_band, hexagon_cells,
                      intersect, rectangle, region_all, sector, subtract, union)

_NUM = numbers.Real
_SCHEMA = {
    "seed": int,
    "threads": int,
    "model": {
        "name": str,
        "L": int,
        "Lx": int,
        "Ly": int,
        "mu_tilde": _NUM,
        "t1": _NUM,
        "t2": _NUM,
        "phi": _NUM,
        "tau": _NUM,
        "disorder_w": _NUM,
        "disorder_seed": int,
    },
    "partition": {
        "preset": str,
        "r": int,
        "w": _NUM,
        "ellx": int,
        "elly": int,
        "theta0": _NUM,
        "angles": list,
        "fractions": list,
        "variant": str,
        "kind": str,
        "regions": dict,
    },
    "experiment": {
        "op": str,
        "sweep": {
            "var": str,
            "values": list,
            "start": _NUM,
            "stop": _NUM,
            "num": int,
        },
        "clip_entropy": _NUM,
        "clip_modular": _NUM,
        "per_region_entropies": bool,
        "r_core": _NUM,
        "r_inner": _NUM,
        "r_outer": _NUM,
    },
    "output": {
        "dir": str,
        "csv": str,
        "jsonl": str,
        "resume": bool,
    },
}


def _validate(node, schema, path: str) -> None:
    if not isinstance(node, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping")
    for key, value in node.items():
        if key not in schema:
            raise ConfigError(f"unknown configuration key: {path}{key}")
        expected = schema[key]
        if isinstance(expected, dict):
            if key == "regions":  # free-form label -> expression tree
                if not isinstance(value, dict):
                    raise ConfigError(f"{path}{key} must be a mapping")
                continue
            _validate(value, expected, f"{path}{key}.")
        else:
            if expected is int and isinstance(value, bool):
                raise ConfigError(f"{path}{key} must be an integer")
            if expected is _NUM and isinstance(value, bool):
                raise ConfigError(f"{path}{key} must be a number")
            if value is not None and not isinstance(value, expected):
                raise ConfigError(
                    f"{path}{key} has wrong type {type(value).__name__}"
                )


def validate_config(cfg: dict) -> dict:
    _validate(cfg, _SCHEMA, "")
    return cfg


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"config file is not valid YAML: {err}") from err
    if cfg is None:
        cfg = {}
    return validate_config(cfg)


_EXPR_OPS = ("sector", "disk", "rectangle", "hexagon", "cell_rectangle",
             "edge_band", "all", "union", "intersect", "subtract")


def build_region_expr(model: LatticeModel, expr, label: str = ""):
    """Evaluate one declarative region-expression node.

    A node is a single-key mapping, e.g. ``{sector: {theta1: 0, theta2: 2.1}}``
    or ``{union: [node, node]}``; ``center`` defaults to the patch centroid.
    """
    if not isinstance(expr, dict) or len(expr) != 1:
        raise ConfigError(f"region expression must be a single-key mapping, got {expr!r}")
    op, args = next(iter(expr.items()))
    if op not in _EXPR_OPS:
        raise ConfigError(f"unknown region operation {op!r}")
    center = model.positions.mean(axis=0)
    if op in ("union", "intersect"):
        if not isinstance(args, list) or len(args) < 2:
            raise ConfigError(f"{op} needs a list of at least two sub-expressions")
        out = build_region_expr(model, args[0], label)
        fn = union if op == "union" else intersect
        for sub in args[1:]:
            out = fn(out, build_region_expr(model, sub, label), label)
        return out
    if op == "subtract":
        if not isinstance(args, list) or len(args) != 2:
            raise ConfigError("subtract needs exactly two sub-expressions")
        return subtract(build_region_expr(model, args[0], label),
                        build_region_expr(model, args[1], label), label)
    args = dict(args or {})
    if op == "all":
        return region_all(model, label)
    if op == "sector":
        c = np.asarray(args.pop("center", center), dtype=float)
        return sector(model, c, float(args.pop("theta1")), float(args.pop("theta2")), label)
    if op == "disk":
        c = np.asarray(args.pop("center", center), dtype=float)
        return disk(model, c, float(args.pop("radius")), label)
    if op == "rectangle":
        return rectangle(model, args.pop("lo"), args.pop("hi"), label)
    if op == "hexagon":
        return hexagon_cells(model, int(args.pop("side")), label)
    if op == "cell_rectangle":
        return cell_rectangle(model, int(args.pop("ellx")), int(args.pop("elly")), label)
    if op == "edge_band":
        return edge_band(model, float(args.pop("w")), label)
    raise ConfigError(f"unhandled region operation {op!r}")


def partition_from_config(part_cfg: dict, model: LatticeModel) -> Partition:
    """Partition from either a preset name or an expression tree."""
    from .regions import preset as build_preset

    if "preset" in part_cfg:
        kwargs = {k: part_cfg[k] for k in ("r", "w", "ellx", "elly", "theta0",
                                           "angles", "fractions", "variant")
                  if k in part_cfg}
        return build_preset(part_cfg["preset"], model, **kwargs)
    if "regions" not in part_cfg:
        raise ConfigError("partition block needs either 'preset' or 'regions'")
    kind = part_cfg.get("kind", "bulk")
    regs = tuple(
        build_region_expr(model, expr, label)
        for label, expr in part_cfg["regions"].items()
    )
    return Partition(regions=regs, kind=kind, model=model, name="custom",
                     params=dict(part_cfg))
