"""Site regions, partitions, figure presets and tri-junction analysis.

Regions are plain sorted index sets over a lattice model, built from
geometric predicates (angular sectors, disks, rectangles, cell hexagons, the
edge band) and closed under set algebra.  Partitions carry the labelled
regions of one measurement arrangement plus enough bookkeeping to validate
them and to predict the geometric integer of multi-junction ("pizza")
arrangements by counting signed tri-junctions of the complement partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import IncompleteJunctionError, InvalidPartitionError
from .lattice import LatticeModel

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Region:
    """Sorted, duplicate-free site indices of one model, with a label."""

    indices: np.ndarray
    label: str = ""
    model_key: int = 0
    n_model_sites: int = 0

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n_model_sites):
            raise ValueError("site indices outside the model range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def same_sites(self, other: "Region") -> bool:
        return self.indices.size == other.indices.size and bool(
            np.all(self.indices == other.indices)
        )

    def __repr__(self):
        return f"<Region {self.label or '?'} ({self.size} sites)>"


def region_from_indices(model: LatticeModel, indices, label: str = "") -> Region:
    return Region(indices=np.asarray(indices, dtype=np.int64), label=label,
                  model_key=id(model), n_model_sites=model.n_sites)


def region_all(model: LatticeModel, label: str = "") -> Region:
    return region_from_indices(model, np.arange(model.n_sites), label)


def _require_same_model(*regions: Region) -> None:
    keys = {r.model_key for r in regions}
    if len(keys) > 1:
        raise ValueError("regions refer to different models")


def sector(model: LatticeModel, center, theta1: float, theta2: float, label: str = "") -> Region:
    """Half-open angular wedge [theta1, theta2), counterclockwise.

    Width >= 2 pi selects every site; width <= 0 selects none.  A site
    exactly on the theta1 ray is included, one on theta2 is excluded, so
    wedges sharing boundary rays tile without overlap.
    """
    width = theta2 - theta1
    if width <= 0:
        return region_from_indices(model, [], label)
    if width >= TWO_PI:
        return region_all(model, label)
    rel = model.positions - np.asarray(center, dtype=float)
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    member = np.mod(ang - theta1, TWO_PI) < width
    return region_from_indices(model, np.nonzero(member)[0], label)


def disk(model: LatticeModel, center, radius: float, label: str = "") -> Region:
    """Sites within the closed Euclidean ball of the given radius."""
    rel = model.positions - np.asarray(center, dtype=float)
    member = np.hypot(rel[:, 0], rel[:, 1]) <= radius
    return region_from_indices(model, np.nonzero(member)[0], label)


def annulus(model: LatticeModel, center, r_in: float, r_out: float, label: str = "") -> Region:
    """Sites with r_in < |pos - center| <= r_out."""
    rel = model.positions - np.asarray(center, dtype=float)
    d = np.hypot(rel[:, 0], rel[:, 1])
    return region_from_indices(model, np.nonzero((d > r_in) & (d <= r_out))[0], label)


def rectangle(model: LatticeModel, corner_lo, corner_hi, label: str = "") -> Region:
    lo = np.asarray(corner_lo, dtype=float)
    hi = np.asarray(corner_hi, dtype=float)
    p = model.positions
    member = (p[:, 0] >= lo[0]) & (p[:, 0] <= hi[0]) & (p[:, 1] >= lo[1]) & (p[:, 1] <= hi[1])
    return region_from_indices(model, np.nonzero(member)[0], label)


def hexagon_cells(model: LatticeModel, side: int, label: str = "") -> Region:
    """Half-open hexagonal cell domain around the patch center (honeycomb).

    Contains exactly ``3 * side**2`` unit cells; the realization of the
    bulk "pizza" disks on the honeycomb patch (867 cells at side 17).
    """
    if model.metadata.get("model") != "haldane":
        raise ValueError("hexagon_cells is defined for the honeycomb patch")
    n1 = model.cell_indices[:, 0]
    n2 = model.cell_indices[:, 1]
    member = (n1 >= -side) & (n1 < side) & (n2 >= -side) & (n2 < side) \
        & (n1 + n2 >= -side) & (n1 + n2 < side)
    return region_from_indices(model, np.nonzero(member)[0], label)


def cell_rectangle(model: LatticeModel, ellx: int, elly: int, label: str = "") -> Region:
    """Centered ellx x elly block of unit cells (square-lattice models)."""
    lx = int(model.metadata["Lx"])
    ly = int(model.metadata["Ly"])
    if ellx > lx or elly > ly:
        raise ValueError("inner rectangle exceeds the patch")
    mlo = (lx - ellx) // 2
    nlo = (ly - elly) // 2
    m = model.cell_indices[:, 0]
    n = model.cell_indices[:, 1]
    member = (m >= mlo) & (m < mlo + ellx) & (n >= nlo) & (n < nlo + elly)
    return region_from_indices(model, np.nonzero(member)[0], label)


def union(r1: Region, r2: Region, label: str = "") -> Region:
    _require_same_model(r1, r2)
    out = Region(indices=np.union1d(r1.indices, r2.indices), label=label or r1.label,
                 model_key=r1.model_key, n_model_sites=r1.n_model_sites)
    return out


def intersect(r1: Region, r2: Region, label: str = "") -> Region:
    _require_same_model(r1, r2)
    return Region(indices=np.intersect1d(r1.indices, r2.indices), label=label or r1.label,
                  model_key=r1.model_key, n_model_sites=r1.n_model_sites)


def subtract(r1: Region, r2: Region, label: str = "") -> Region:
    _require_same_model(r1, r2)
    return Region(indices=np.setdiff1d(r1.indices, r2.indices), label=label or r1.label,
                  model_key=r1.model_key, n_model_sites=r1.n_model_sites)


def complement(model: LatticeModel, r: Region, label: str = "") -> Region:
    return subtract(region_all(model, label), r, label)


def hull_distance(model: LatticeModel) -> np.ndarray:
    """Euclidean distance of every site to the convex hull of the patch."""
    pos = model.positions
    hull = ConvexHull(pos)
    verts = pos[hull.vertices]
    dmin = np.full(pos.shape[0], np.inf)
    n_v = verts.shape[0]
    for i in range(n_v):
        a = verts[i]
        b = verts[(i + 1) % n_v]
        ab = b - a
        denom = float(ab @ ab)
        t = np.clip(((pos - a) @ ab) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.hypot(pos[:, 0] - proj[:, 0], pos[:, 1] - proj[:, 1])
        dmin = np.minimum(dmin, d)
    return dmin


def edge_band(model: LatticeModel, w: float, label: str = "") -> Region:
    """Sites within distance w of the patch's boundary hull."""
    if w <= 0:
        raise ValueError("edge band width must be positive")
    member = hull_distance(model) <= w
    return region_from_indices(model, np.nonzero(member)[0], label)


@dataclass(frozen=True)
class JunctionBall:
    """Junction neighborhood: inner ball r_b plus annuli out to r_d1, r_d2."""

    center: tuple[float, float]
    r_b: float
    r_d1: float
    r_d2: float

    def __post_init__(self):
        if not 0 < self.r_b < self.r_d1 < self.r_d2:
            raise ValueError("junction ball radii must satisfy 0 < r_b < r_d1 < r_d2")


@dataclass(eq=False)
class Partition:
    """Labelled disjoint regions of one arrangement, plus its bookkeeping."""

    regions: tuple[Region, ...]
    kind: str  # "bulk" or "edge"
    model: LatticeModel
    name: str = ""
    params: dict = field(default_factory=dict)
    junction_balls: tuple[JunctionBall, ...] | None = None
    band: Region | None = None

    def __post_init__(self):
        if self.kind not in ("bulk", "edge"):
            raise ValueError("partition kind must be 'bulk' or 'edge'")
        labels = [r.label for r in self.regions]
        if len(set(labels)) != len(labels):
            raise ValueError("region labels must be unique within a partition")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.regions)

    def region(self, label: str) -> Region:
        for r in self.regions:
            if r.label == label:
                return r
        raise KeyError(label)

    def covered(self) -> Region:
        out = self.regions[0]
        for r in self.regions[1:]:
            out = union(out, r, "covered")
        return out


def subpartition(p: Partition, labels) -> Partition:
    """Partition restricted to the given labels, preserving their order."""
    regs = tuple(p.region(lbl) for lbl in labels)
    return Partition(regions=regs, kind=p.kind, model=p.model,
                     name=f"{p.name}[{''.join(labels)}]", params=dict(p.params),
                     band=p.band)


@dataclass(frozen=True)
class PartitionDiagnostics:
    site_counts: dict
    overlap_pairs: tuple
    min_nonadjacent_distance: float | None
    inside_edge_band: bool | None


def validate_partition(p: Partition) -> PartitionDiagnostics:
    """Check pairwise disjointness, report counts and separations.

    Raises InvalidPartitionError when any two regions share sites.
    """
    overlaps = []
    for i in range(len(p.regions)):
        for j in range(i + 1, len(p.regions)):
            common = np.intersect1d(p.regions[i].indices, p.regions[j].indices)
            if common.size:
                overlaps.append((p.regions[i].label, p.regions[j].label, int(common.size)))
    counts = {r.label: r.size for r in p.regions}
    bond = float(p.model.metadata.get("bond_length", 1.0))
    min_dist = None
    pos = p.model.positions
    trees = {r.label: cKDTree(pos[r.indices]) for r in p.regions if r.size}
    for i in range(len(p.regions)):
        for j in range(i + 1, len(p.regions)):
            ri, rj = p.regions[i], p.regions[j]
            if ri.size == 0 or rj.size == 0:
                continue
            d, _ = trees[rj.label].query(pos[ri.indices], k=1)
            dij = float(np.min(d))
            if dij > 1.5 * bond:  # not adjacent
                min_dist = dij if min_dist is None else min(min_dist, dij)
    inside = None
    if p.kind == "edge" and p.band is not None:
        inside = all(np.all(np.isin(r.indices, p.band.indices)) for r in p.regions)
    if overlaps:
        raise InvalidPartitionError(f"overlapping regions: {overlaps}")
    return PartitionDiagnostics(
        site_counts=counts,
        overlap_pairs=tuple(overlaps),
        min_nonadjacent_distance=min_dist,
        inside_edge_band=inside,
    )


def _wedge_partition(model: LatticeModel, base: Region, labels, widths, theta0: float,
                     center: np.ndarray) -> list[Region]:
    """Cut ``base`` into consecutive ccw wedges and merge repeated labels.

    Every base site is binned into exactly one wedge by its polar angle, so
    the pieces tile the base with no seam leaks from rounding.
    """
    widths = np.asarray(widths, dtype=float)
    if abs(float(widths.sum()) - TWO_PI) > 1e-9:
        raise ValueError("wedge widths must sum to 2 pi")
    center = np.round(np.asarray(center, dtype=float), 9)
    rel = model.positions[base.indices] - center
    ang = np.mod(np.arctan2(rel[:, 1], rel[:, 0]) - theta0, TWO_PI)
    cum = np.cumsum(widths)
    which = np.clip(np.searchsorted(cum, ang, side="right"), 0, len(labels) - 1)
    merged: dict[str, Region] = {}
    for k, lbl in enumerate(labels):
        piece = region_from_indices(model, base.indices[which == k], lbl)
        merged[lbl] = piece if lbl not in merged else union(merged[lbl], piece, lbl)
    return [merged[lbl] for lbl in dict.fromkeys(labels)]


def _region_centroid(model: LatticeModel, r: Region) -> np.ndarray:
    return model.positions[r.indices].mean(axis=0)


PRESET_NAMES = (
    "tripartite_disk",
    "bulk_pizza_n2",
    "bulk_pizza_n0",
    "edge_pizza_n2",
    "edge_pizza_alt",
    "edge_pizza_n3",
    "edge_pizza_n4",
    "incomplete_disk",
)


def preset(name: str, model: LatticeModel, r: int | None = None, w: float | None = None,
           ellx: int | None = None, elly: int | None = None, theta0: float = 0.0,
           angles=None, fractions=None, variant: str = "symmetric") -> Partition:
    """Build one of the named measurement arrangements on a model.

    Bulk arrangements slice a central patch (hexagonal cell domain of side
    ``r`` on the honeycomb, centered ``ellx x elly`` cell block on the square
    lattice) into angular wedges.  Edge arrangements slice the edge band
    (width ``w`` from the hull, or everything outside the inner
    ``ellx x elly`` block) into boundary intervals.
    """
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    is_haldane = model.metadata.get("model") == "haldane"

    def bulk_base() -> Region:
        if is_haldane:
            rr = 17 if r is None else int(r)
            return hexagon_cells(model, rr, "base")
        if ellx is None or elly is None:
            raise ValueError("square-lattice bulk presets need ellx and elly")
        return cell_rectangle(model, ellx, elly, "base")

    def edge_base() -> Region:
        if is_haldane:
            ww = 13.0 if w is None else float(w)
            return edge_band(model, ww, "band")
        if ellx is None or elly is None:
            raise ValueError("square-lattice edge presets need ellx and elly")
        return subtract(region_all(model, "band"), cell_rectangle(model, ellx, elly), "band")

    params = {"r": r, "w": w, "ellx": ellx, "elly": elly, "theta0": theta0,
              "variant": variant}

    if name in ("tripartite_disk", "bulk_pizza_n2", "bulk_pizza_n0", "incomplete_disk"):
        base = bulk_base()
        center = _region_centroid(model, base)
        if name == "tripartite_disk":
            labels = ["A", "B", "C"]
            widths = np.full(3, TWO_PI / 3)
        elif name == "bulk_pizza_n2":
            labels = ["A", "B", "C", "A", "B", "C"]
            widths = np.full(6, TWO_PI / 6)
        elif name == "bulk_pizza_n0":
            labels = ["A", "B", "C", "A", "C", "B"]
            widths = np.full(6, TWO_PI / 6)
        else:  # incomplete_disk
            labels = ["A", "B", "C", "D"]
            if angles is not None:
                widths = np.asarray(angles, dtype=float)
            elif variant == "symmetric":
                widths = np.full(4, TWO_PI / 4)
            else:
                widths = np.deg2rad([100.0, 70.0, 110.0, 80.0])
            if abs(float(np.sum(widths)) - TWO_PI) > 1e-9:
                raise ValueError("incomplete_disk wedge widths must sum to 2 pi")
        regs = _wedge_partition(model, base, labels, widths, theta0, center)
        return Partition(regions=tuple(regs), kind="bulk", model=model, name=name,
                         params=params)

    # edge presets
    base = edge_base()
    center = model.positions.mean(axis=0)
    if name == "edge_pizza_n2":
        labels = ["X", "Y", "Z", "X", "Y", "Z"]
        widths = np.full(6, TWO_PI / 6)
    elif name == "edge_pizza_alt":
        labels = ["X", "Y", "Z", "X", "Z", "Y"]
        widths = np.full(6, TWO_PI / 6)
    else:
        repeats = 3 if name == "edge_pizza_n3" else 4
        if fractions is None:
            fractions = (0.40, 0.33, 0.27) if name == "edge_pizza_n3" else (1 / 3,) * 3
        fractions = np.asarray(fractions, dtype=float)
        if fractions.size != 3 or abs(fractions.sum() - 1.0) > 1e-9:
            raise ValueError("fractions must be three numbers summing to 1")
        labels = ["X", "Y", "Z"] * repeats
        widths = np.tile(fractions * (TWO_PI / repeats), repeats)
    regs = _wedge_partition(model, base, labels, widths, theta0, center)
    return Partition(regions=tuple(regs), kind="edge", model=model, name=name,
                     params=params, band=base)


def complement_partition(p: Partition) -> Partition:
    """Roles (R3, D, R1) with D the complement of all three regions.

    On the global pure state J(R1,R2,R3) = J(R3, D, R1) exactly, and the new
    triple has only simple tri-junctions where the old outer boundary meets
    an (R3, R1) interface, which is what the geometric prediction counts.
    """
    if len(p.regions) != 3:
        raise ValueError("complement construction needs exactly three regions")
    r1, r2, r3 = p.regions
    rest = subtract(subtract(subtract(region_all(p.model), r1), r2), r3,
                    "W" if p.kind == "edge" else "D")
    return Partition(regions=(r3, rest, r1), kind=p.kind, model=p.model,
                     name=f"{p.name}_complement", params=dict(p.params))


@dataclass(frozen=True)
class TriJunction:
    position: tuple[float, float]
    labels: tuple[str, ...]
    complete: bool
    sign: int


def find_trijunctions(p: Partition, detection_radius: float = 2.0,
                      ring_inner: float = 2.0, ring_outer: float = 4.2,
                      max_gap_deg: float = 50.0) -> list[TriJunction]:
    """Locate points where at least three partition labels meet.

    A junction is *complete* when the labelled sites on a ring around it
    cover the full circle (largest angular gap below ``max_gap_deg``); the
    sign is +1 when the partition's three roles appear counterclockwise
    around the point in their listed order, -1 for clockwise, 0 when not
    exactly three roles are resolved (e.g. degenerate multi-junctions).
    """
    model = p.model
    pos = model.positions
    lab = np.full(model.n_sites, -1, dtype=np.int64)
    for rank, reg in enumerate(p.regions):
        lab[reg.indices] = rank
    labeled = np.nonzero(lab >= 0)[0]
    if labeled.size == 0:
        return []
    tree = cKDTree(pos[labeled])
    neigh = tree.query_ball_point(pos[labeled], detection_radius)
    cand_mask = np.zeros(labeled.size, dtype=bool)
    for i, nb in enumerate(neigh):
        got = {int(lab[labeled[j]]) for j in nb}
        if len(got) >= 3:
            cand_mask[i] = True
    cand = labeled[cand_mask]
    if cand.size == 0:
        return []
    # cluster candidates within the detection radius
    ctree = cKDTree(pos[cand])
    pairs = ctree.query_pairs(detection_radius, output_type="ndarray")
    parent = np.arange(cand.size)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    roots = np.array([find(i) for i in range(cand.size)])
    junctions = []
    for root in np.unique(roots):
        members = cand[roots == root]
        q = pos[members].mean(axis=0)
        d = np.hypot(pos[labeled][:, 0] - q[0], pos[labeled][:, 1] - q[1])
        on_ring = labeled[(d >= ring_inner) & (d <= ring_outer)]
        nearby = labeled[d <= ring_outer]
        present = tuple(sorted({p.regions[int(lab[s])].label for s in nearby}))
        if on_ring.size == 0:
            junctions.append(TriJunction((float(q[0]), float(q[1])), present, False, 0))
            continue
        ang = np.sort(np.arctan2(pos[on_ring][:, 1] - q[1], pos[on_ring][:, 0] - q[0]))
        gaps = np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))
        complete = bool(np.max(gaps) <= np.deg2rad(max_gap_deg))
        sign = 0
        ring_labels = lab[on_ring]
        if len(p.regions) == 3 and all(np.any(ring_labels == rank) for rank in range(3)):
            means = []
            for rank in range(3):
                sel = on_ring[ring_labels == rank]
                th = np.arctan2(pos[sel][:, 1] - q[1], pos[sel][:, 0] - q[0])
                means.append(float(np.angle(np.sum(np.exp(1j * th)))))
            d1 = np.mod(means[1] - means[0], TWO_PI)
            d2 = np.mod(means[2] - means[0], TWO_PI)
            sign = 1 if d1 < d2 else -1
        junctions.append(TriJunction((float(q[0]), float(q[1])), present, complete, sign))
    junctions.sort(key=lambda t: (round(t.position[0], 6), round(t.position[1], 6)))
    return junctions


def predict_geometric_integer(p: Partition, **junction_kwargs) -> int:
    """Signed tri-junction count of the complement partition.

    Every complete junction of the complemented arrangement contributes one
    unit of (pi/3) c_- to J with its orientation sign; the edge convention
    flips the total sign.  Refuses when any junction is incomplete, whose
    contribution is non-universal.
    """
    pc = complement_partition(p)
    junctions = find_trijunctions(pc, **junction_kwargs)
    if any(not j.complete for j in junctions):
        raise IncompleteJunctionError(
            "partition has an incomplete tri-junction; its modular commutator "
            "is not geometrically quantized"
        )
    total = sum(j.sign for j in junctions)
    return int(total) if p.kind == "bulk" else int(-total)
