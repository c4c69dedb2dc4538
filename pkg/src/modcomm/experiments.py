"""Scripted measurement sweeps producing flat record tables.

Each operation takes a validated run-configuration dictionary (see
:mod:`modcomm.config`), executes its grid points in a deterministic order
(optionally in a joblib work pool) and returns :class:`ExperimentRecord`
rows.  Failed points are kept as rows with NaN values and an error tag so
long sweeps survive critical regions.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed

from . import __version__, gaussian
from .lattice import add_disorder, build_haldane, build_pi_flux
from .regions import (annulus, disk, preset, region_all, region_from_indices,
                      subtract, union, validate_partition)

CSV_COLUMNS = ("sweep_var", "value", "partition", "L_or_Lx", "Ly", "r", "w",
               "seed", "J", "n", "imag_residue", "runtime_s")


@dataclass
class ExperimentRecord:
    sweep_var: str
    value: float
    partition: str
    L_or_Lx: int
    Ly: int | None
    r: float | None
    w: float | None
    seed: int | None
    J: float
    n: float
    imag_residue: float
    runtime_s: float
    model: str = ""
    version: str = __version__
    error: str | None = None
    extra: dict = field(default_factory=dict)

    def csv_row(self) -> list[str]:
        out = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            out.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        return out


def write_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(rec.csv_row()) + "\n")


def append_csv(records, path) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(",".join(rec.csv_row()) + "\n")


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")


def read_done_keys(path) -> set:
    """(sweep_var, value, partition) triples already present in a CSV."""
    done = set()
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            iv = header.index("value")
            ivar = header.index("sweep_var")
            ip = header.index("partition")
            for line in fh:
                cells = line.rstrip("\n").split(",")
                if len(cells) >= 3:
                    done.add((cells[ivar], cells[iv], cells[ip]))
    except FileNotFoundError:
        pass
    return done


def record_key(rec: ExperimentRecord) -> tuple:
    return (rec.sweep_var, repr(rec.value), rec.partition)


def grid_values(sweep_cfg: dict | None, default_start: float, default_stop: float,
                default_num: int, default_var: str) -> tuple[str, list[float]]:
    cfg = dict(sweep_cfg or {})
    var = cfg.get("var", default_var)
    if "values" in cfg:
        return var, [float(v) for v in cfg["values"]]
    start = float(cfg.get("start", default_start))
    stop = float(cfg.get("stop", default_stop))
    num = int(cfg.get("num", default_num))
    if num < 1:
        raise ValueError("sweep grid must have at least one point")
    return var, [float(v) for v in np.linspace(start, stop, num)]


def _build_model(model_cfg: dict, overrides: dict):
    cfg = {**model_cfg, **overrides}
    name = cfg.get("name", "haldane")
    if name == "haldane":
        model = build_haldane(
            L=int(cfg.get("L", 24)),
            mu_tilde=float(cfg.get("mu_tilde", 0.0)),
            t1=float(cfg.get("t1", 1.0)),
            t2=float(cfg.get("t2", 1.0)),
            phi=float(cfg.get("phi", np.pi / 2)),
        )
    elif name == "pi_flux":
        model = build_pi_flux(
            Lx=int(cfg.get("Lx", 47)),
            Ly=int(cfg.get("Ly", 46)),
            t1=float(cfg.get("t1", 1.0)),
            tau=float(cfg.get("tau", 1.2)),
        )
    else:
        raise ValueError(f"unknown model {name!r}")
    w_dis = float(cfg.get("disorder_w", 0.0))
    seed = cfg.get("disorder_seed")
    if w_dis > 0.0:
        model = add_disorder(model, w_dis, 0 if seed is None else int(seed))
    return model


def _build_preset(part_cfg: dict, model):
    kwargs = {k: part_cfg[k] for k in ("r", "w", "ellx", "elly", "theta0", "angles",
                                       "fractions", "variant") if k in part_cfg}
    return preset(part_cfg["preset"], model, **kwargs)


def _record_stub(cfg: dict, var: str, val: float, partition_name: str) -> dict:
    model_cfg = cfg.get("model", {})
    part_cfg = cfg.get("partition", {})
    name = model_cfg.get("name", "haldane")
    return dict(
        sweep_var=var,
        value=float(val),
        partition=partition_name,
        L_or_Lx=int(model_cfg.get("L", 24)) if name == "haldane" else int(model_cfg.get("Lx", 47)),
        Ly=None if name == "haldane" else int(model_cfg.get("Ly", 46)),
        r=part_cfg.get("r"),
        w=part_cfg.get("w"),
        seed=model_cfg.get("disorder_seed", cfg.get("seed")),
        model=name,
    )


def _failure_records(stub: dict, err: Exception, tags) -> list[ExperimentRecord]:
    out = []
    for tag in tags:
        d = dict(stub)
        d["partition"] = d["partition"] + tag if tag.startswith("[") else d["partition"]
        out.append(ExperimentRecord(**d, J=float("nan"), n=float("nan"),
                                    imag_residue=float("nan"), runtime_s=0.0,
                                    error=f"{type(err).__name__}: {err}"))
    return out


def _pizza_point(cfg: dict, var: str, val: float) -> list[ExperimentRecord]:
    t0 = time.time()
    part_cfg = cfg["partition"]
    stub = _record_stub(cfg, var, val, part_cfg["preset"])
    try:
        model = _build_model(cfg.get("model", {}), {var: val})
        corr = gaussian.ground_state_correlations(model)
        p = _build_preset(part_cfg, model)
        validate_partition(p)
        eps = float(cfg.get("experiment", {}).get("clip_modular", gaussian.MODULAR_CLIP))
        res = gaussian.modular_commutator_detail(corr, *p.regions[:3], eps=eps)
        n = gaussian.geometric_integer(res.value, p.kind)
        extra = {}
        if cfg.get("experiment", {}).get("per_region_entropies", False):
            extra["entropies"] = {
                reg.label: gaussian.entanglement_entropy(corr, reg) for reg in p.regions
            }
        return [ExperimentRecord(**stub, J=res.value, n=n, imag_residue=res.imag_residue,
                                 runtime_s=time.time() - t0, extra=extra)]
    except Exception as err:  # failed grid point: keep the row, tag the error
        return _failure_records(stub, err, [""])


def _incomplete_point(cfg: dict, var: str, val: float) -> list[ExperimentRecord]:
    t0 = time.time()
    part_cfg = dict(cfg.get("partition", {}))
    part_cfg.setdefault("preset", "incomplete_disk")
    stub = _record_stub(cfg, var, val, "incomplete_disk")
    try:
        model = _build_model(cfg.get("model", {}), {var: val})
        corr = gaussian.ground_state_correlations(model)
        p = _build_preset(part_cfg, model)
        validate_partition(p)
        a, b, c, d = (p.region(lbl) for lbl in "ABCD")
        eps = float(cfg.get("experiment", {}).get("clip_modular", gaussian.MODULAR_CLIP))
        r_abc = gaussian.modular_commutator_detail(corr, a, b, c, eps=eps)
        r_bcd = gaussian.modular_commutator_detail(corr, b, c, d, eps=eps)
        r_ref = gaussian.modular_commutator_detail(corr, a, union(b, c, "BC"), d, eps=eps)
        rows = []
        for tag, res in (("[ABC]", r_abc), ("[BCD]", r_bcd), ("[A,BC,D]", r_ref)):
            s = dict(stub)
            s["partition"] += tag
            rows.append(ExperimentRecord(**s, J=res.value,
                                         n=gaussian.geometric_integer(res.value, "bulk"),
                                         imag_residue=res.imag_residue,
                                         runtime_s=time.time() - t0))
        s = dict(stub)
        s["partition"] += "[sum]"
        total = r_abc.value + r_bcd.value
        rows.append(ExperimentRecord(**s, J=total,
                                     n=gaussian.geometric_integer(total, "bulk"),
                                     imag_residue=max(r_abc.imag_residue, r_bcd.imag_residue),
                                     runtime_s=time.time() - t0,
                                     extra={"reference_pi_over_3": np.pi / 3}))
        return rows
    except Exception as err:
        return _failure_records(stub, err, ["[ABC]", "[BCD]", "[A,BC,D]", "[sum]"])


def _axiom_point(cfg: dict, var: str, val: float) -> list[ExperimentRecord]:
    t0 = time.time()
    exp = cfg.get("experiment", {})
    r_core = float(exp.get("r_core", 3.0))
    r_inner = float(exp.get("r_inner", 6.0))
    r_outer = float(exp.get("r_outer", 10.0))
    stub = _record_stub(cfg, var, val, "axioms")
    tags = ["[delta2]", "[delta3]", "[delta3_twohole]", "[cmi_product]", "[cmi_incomplete]"]
    try:
        model = _build_model(cfg.get("model", {}), {var: val})
        corr = gaussian.ground_state_correlations(model)
        center = model.positions.mean(axis=0)

        def half(reg, upper: bool, label: str):
            ys = model.positions[reg.indices][:, 1] - center[1]
            sel = reg.indices[ys >= 0.0] if upper else reg.indices[ys < 0.0]
            return region_from_indices(model, sel, label)

        inner = disk(model, center, r_inner, "C")
        ring = annulus(model, center, r_inner, r_outer, "B")
        d2 = gaussian.delta_two(corr, ring, inner)
        d3 = gaussian.delta_three(corr, half(ring, True, "B"), inner, half(ring, False, "D"))

        core = disk(model, center, r_core, "A0")
        ring1 = annulus(model, center, r_core, r_inner, "ring1")
        ring2 = annulus(model, center, r_inner, r_outer, "ring2")
        d3_hole = gaussian.delta_three(corr, half(ring1, True, "B"), ring2,
                                       half(ring1, False, "D"))

        off = np.array([max(2.5 * r_core, 6.0), 0.0])
        pa = disk(model, center - off, r_core, "A")
        pc = disk(model, center + off, r_core, "C")
        pb = subtract(subtract(region_all(model, "B"), pa, "B"), pc, "B")
        cmi_prod = gaussian.cond_mutual_info(corr, pa, pb, pc)

        part_cfg = dict(cfg.get("partition", {}))
        part_cfg.setdefault("preset", "incomplete_disk")
        p = _build_preset(part_cfg, model)
        cmi_inc = gaussian.cond_mutual_info(corr, p.region("A"), p.region("B"), p.region("C"))

        rows = []
        for tag, quantity in zip(tags, (d2, d3, d3_hole, cmi_prod, cmi_inc)):
            s = dict(stub)
            s["partition"] += tag
            rows.append(ExperimentRecord(**s, J=quantity,
                                         n=gaussian.geometric_integer(quantity, "bulk"),
                                         imag_residue=0.0, runtime_s=time.time() - t0))
        return rows
    except Exception as err:
        return _failure_records(stub, err, tags)


_POINT_FNS = {
    "sweep_haldane_pizza": _pizza_point,
    "sweep_piflux_edge": _pizza_point,
    "incomplete_disk_sum": _incomplete_point,
    "axiom_report": _axiom_point,
}


def _run_grid(cfg: dict, point_fn, var: str, values, threads: int,
              skip=None) -> list[ExperimentRecord]:
    if skip:
        done_values = {k[1] for k in skip if k[0] == var}
        values = [v for v in values if repr(float(v)) not in done_values]
    if threads and threads > 1:
        chunks = Parallel(n_jobs=threads)(delayed(point_fn)(cfg, var, v) for v in values)
    else:
        chunks = [point_fn(cfg, var, v) for v in values]
    return [rec for chunk in chunks for rec in chunk]


def sweep_haldane_pizza(cfg: dict, threads: int = 1, skip=None) -> list[ExperimentRecord]:
    """Geometric integers of a honeycomb arrangement over a mu_tilde grid."""
    if cfg.get("model", {}).get("name", "haldane") != "haldane":
        raise ValueError("sweep_haldane_pizza runs on the haldane model")
    var, values = grid_values(cfg.get("experiment", {}).get("sweep"), -2.0, 2.0, 41, "mu_tilde")
    return _run_grid(cfg, _pizza_point, var, values, threads, skip)


def sweep_piflux_edge(cfg: dict, threads: int = 1, skip=None) -> list[ExperimentRecord]:
    """Edge geometric integers of the pi-flux model over a tau grid."""
    if cfg.get("model", {}).get("name") != "pi_flux":
        raise ValueError("sweep_piflux_edge runs on the pi_flux model")
    var, values = grid_values(cfg.get("experiment", {}).get("sweep"), 1.0, 1.5, 11, "tau")
    return _run_grid(cfg, _pizza_point, var, values, threads, skip)


def incomplete_disk_sum(cfg: dict, threads: int = 1, skip=None) -> list[ExperimentRecord]:
    """Both incomplete-disk commutators, their sum and the complete reference."""
    name = cfg.get("model", {}).get("name", "haldane")
    if name == "haldane":
        var, values = grid_values(cfg.get("experiment", {}).get("sweep"), 0.5, 1.25, 16, "mu_tilde")
    else:
        var, values = grid_values(cfg.get("experiment", {}).get("sweep"), 1.0, 2.5, 16, "tau")
    return _run_grid(cfg, _incomplete_point, var, values, threads, skip)


def axiom_report(cfg: dict, threads: int = 1, skip=None) -> list[ExperimentRecord]:
    """Area-law combinations, the two-hole variant and CMI sanity values."""
    var, values = grid_values(cfg.get("experiment", {}).get("sweep"), 0.0, 0.0, 1, "mu_tilde")
    return _run_grid(cfg, _axiom_point, var, values, threads, skip)


def current_map(cfg: dict, out_dir: str | None = None) -> tuple[list[ExperimentRecord], np.ndarray]:
    """Modular-current map of one arrangement plus the resummation check.

    Returns the summary records and the per-site table
    ``(site, x, y, outflow)``; when ``out_dir`` is given the table is written
    to ``current_map.csv`` there.
    """
    t0 = time.time()
    part_cfg = cfg["partition"]
    model = _build_model(cfg.get("model", {}), {})
    corr = gaussian.ground_state_correlations(model)
    p = _build_preset(part_cfg, model)
    a, b, c = p.regions[:3]
    eps = float(cfg.get("experiment", {}).get("clip_modular", gaussian.MODULAR_CLIP))
    cur = gaussian.modular_current(corr, a, b, c, eps=eps)
    res = gaussian.modular_commutator_detail(corr, a, b, c, eps=eps)
    sites, outflow = cur.per_site_outflow()
    table = np.column_stack([
        sites.astype(float),
        model.positions[sites][:, 0],
        model.positions[sites][:, 1],
        outflow,
    ])
    if out_dir is not None:
        path = f"{out_dir}/current_map.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("site,x,y,outflow\n")
            for row in table:
                fh.write(f"{int(row[0])},{float(row[1])!r},{float(row[2])!r},{float(row[3])!r}\n")
    stub = _record_stub(cfg, "none", 0.0, part_cfg["preset"] + "[current]")
    rec = ExperimentRecord(**stub, J=res.value,
                           n=gaussian.geometric_integer(res.value, p.kind),
                           imag_residue=res.imag_residue, runtime_s=time.time() - t0,
                           extra={"current_total": cur.total(),
                                  "resummation_defect": abs(cur.total() - res.value)})
    return [rec], table


EXPERIMENT_OPS = {
    "sweep_haldane_pizza": sweep_haldane_pizza,
    "sweep_piflux_edge": sweep_piflux_edge,
    "incomplete_disk_sum": incomplete_disk_sum,
    "axiom_report": axiom_report,
}
