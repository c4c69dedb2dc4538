"""Region algebra, geometric predicates, presets and junction analysis."""

import numpy as np
import pytest

import modcomm as mc
from modcomm.errors import IncompleteJunctionError, InvalidPartitionError


@pytest.fixture(scope="module")
def model():
    return mc.build_haldane(L=10, mu_tilde=0.0)


def test_sector_full_circle_and_empty(model):
    c = model.center
    assert mc.sector(model, c, 0.0, 2 * np.pi).size == model.n_sites
    assert mc.sector(model, c, 1.0, 1.0).size == 0
    assert mc.sector(model, c, 1.0, 0.5).size == 0


def test_sectors_tile_the_circle(model):
    c = model.center
    w = 2 * np.pi / 6
    wedges = [mc.sector(model, c, k * w, (k + 1) * w) for k in range(6)]
    total = sum(r.size for r in wedges)
    assert total == model.n_sites
    all_idx = np.concatenate([r.indices for r in wedges])
    assert np.unique(all_idx).size == all_idx.size


def test_set_algebra_properties(model):
    rng = np.random.default_rng(3)
    n = model.n_sites
    for _ in range(25):
        a = mc.region_from_indices(model, rng.choice(n, size=rng.integers(1, n // 2), replace=False), "A")
        b = mc.region_from_indices(model, rng.choice(n, size=rng.integers(1, n // 2), replace=False), "B")
        assert mc.subtract(a, a).size == 0
        assert mc.union(a, mc.subtract(b, a)).same_sites(mc.union(a, b))
        assert mc.intersect(a, b).size == a.size + b.size - mc.union(a, b).size


def test_set_ops_require_same_model(model):
    other = mc.build_haldane(L=2, mu_tilde=0.0)
    a = mc.region_all(model, "A")
    b = mc.region_all(other, "B")
    with pytest.raises(ValueError):
        mc.union(a, b)


def test_disk_and_rectangle(model):
    c = model.center
    d_small = mc.disk(model, c, 2.0)
    d_big = mc.disk(model, c, 1e3)
    assert 0 < d_small.size < model.n_sites
    assert d_big.size == model.n_sites
    r = mc.rectangle(model, c - 1.0, c + 1.0)
    assert 0 < r.size < model.n_sites
    # disk site count tracks the honeycomb density (4/sqrt(3) per unit area)
    d7 = mc.disk(model, c, 7.0)
    expect = 4.0 / np.sqrt(3.0) * np.pi * 49.0
    assert abs(d7.size - expect) / expect < 0.1


def test_hexagon_cells_exact_count(model):
    for side in (1, 2, 5, 8):
        reg = mc.hexagon_cells(model, side)
        assert reg.size == 2 * 3 * side * side  # 3 side^2 cells, 2 sites each


def test_hexagon_cells_867_at_side_17():
    # the paper-scale bulk arrangement: 867 Bravais cells at side 17
    m = mc.build_haldane(L=18, mu_tilde=0.0)
    reg = mc.hexagon_cells(m, 17)
    cells = {tuple(c) for c in m.cell_indices[reg.indices]}
    assert len(cells) == 867
    assert reg.size == 2 * 867


def test_edge_band(model):
    assert mc.edge_band(model, 1e3).size == model.n_sites
    thin = mc.edge_band(model, 0.4)
    thick = mc.edge_band(model, 3.0)
    assert 0 < thin.size < thick.size < model.n_sites
    # hull vertices always belong to any edge band
    from scipy.spatial import ConvexHull
    hull = ConvexHull(model.positions)
    assert np.all(np.isin(hull.vertices, thin.indices))
    with pytest.raises(ValueError):
        mc.edge_band(model, 0.0)


def test_validate_partition_overlap(model):
    a = mc.disk(model, model.center, 3.0, "A")
    b = mc.disk(model, model.center, 3.0, "B")
    p = mc.Partition(regions=(a, b), kind="bulk", model=model, name="bad")
    with pytest.raises(InvalidPartitionError):
        mc.validate_partition(p)


def test_preset_partitions_validate(model):
    for name, kw in [
        ("tripartite_disk", {"r": 7}),
        ("bulk_pizza_n2", {"r": 7}),
        ("bulk_pizza_n0", {"r": 7}),
        ("incomplete_disk", {"r": 7}),
        ("edge_pizza_n2", {"w": 5}),
        ("edge_pizza_alt", {"w": 5}),
    ]:
        p = mc.preset(name, model, **kw)
        diag = mc.validate_partition(p)
        assert all(c > 0 for c in diag.site_counts.values())
        if p.kind == "edge":
            assert diag.inside_edge_band


def test_preset_unknown_name(model):
    with pytest.raises(ValueError):
        mc.preset("mystery", model)


def test_preset_covers_base(model):
    p = mc.preset("bulk_pizza_n2", model, r=7)
    covered = p.covered()
    base = mc.hexagon_cells(model, 7)
    assert covered.same_sites(base)


def test_junction_ball_validation():
    with pytest.raises(ValueError):
        mc.JunctionBall(center=(0.0, 0.0), r_b=3.0, r_d1=2.0, r_d2=4.0)


JUNCTION_KW = dict(ring_outer=3.2)


def test_tripartite_disk_has_single_complete_junction(model):
    p = mc.preset("tripartite_disk", model, r=7)
    js = mc.find_trijunctions(p)
    complete = [j for j in js if j.complete]
    assert len(complete) == 1
    c = model.positions[p.region("A").indices].mean(axis=0)
    d = np.hypot(complete[0].position[0] - c[0], complete[0].position[1] - c[1])
    assert d < 3.0  # the wedge meeting point sits at the center


def test_pizza_complement_junctions(model):
    p = mc.preset("bulk_pizza_n2", model, r=7)
    js = mc.find_trijunctions(mc.complement_partition(p), **JUNCTION_KW)
    assert len(js) == 2
    assert all(j.complete for j in js)
    assert {j.sign for j in js} == {1}
    p0 = mc.preset("bulk_pizza_n0", model, r=7)
    js0 = mc.find_trijunctions(mc.complement_partition(p0), **JUNCTION_KW)
    assert sorted(j.sign for j in js0) == [-1, 1]


def test_incomplete_disk_junction_flagged(model):
    p = mc.preset("incomplete_disk", model, r=7)
    sub = mc.subpartition(p, ["A", "B", "C"])
    js = mc.find_trijunctions(sub)
    assert len(js) == 1
    assert not js[0].complete


def test_predictions_match_expected_integers(model):
    expected = {
        "tripartite_disk": ({"r": 7}, 1),
        "bulk_pizza_n2": ({"r": 7}, 2),
        "bulk_pizza_n0": ({"r": 7}, 0),
        "edge_pizza_n2": ({"w": 5}, 2),
        "edge_pizza_alt": ({"w": 5}, 0),
    }
    for name, (kw, n) in expected.items():
        p = mc.preset(name, model, **kw)
        assert mc.predict_geometric_integer(p, **JUNCTION_KW) == n


def test_prediction_rotation_invariant(model):
    for theta0 in (0.35, 1.2):
        p = mc.preset("bulk_pizza_n2", model, r=7, theta0=theta0)
        assert mc.predict_geometric_integer(p, **JUNCTION_KW) == 2


def test_prediction_r_invariant(model):
    for r in (6, 8):
        p = mc.preset("tripartite_disk", model, r=r)
        assert mc.predict_geometric_integer(p, **JUNCTION_KW) == 1


def test_prediction_refuses_incomplete(model):
    p = mc.preset("incomplete_disk", model, r=7)
    sub = mc.subpartition(p, ["A", "B", "C"])
    with pytest.raises(IncompleteJunctionError):
        mc.predict_geometric_integer(sub)


def test_piflux_edge_preset_predictions():
    m = mc.build_pi_flux(21, 20, 1.0, 1.2)
    for name, n in (("edge_pizza_n3", 3), ("edge_pizza_n4", 4)):
        p = mc.preset(name, m, ellx=11, elly=10)
        mc.validate_partition(p)
        assert mc.predict_geometric_integer(p) == n


def test_incomplete_disk_angle_options(model):
    p = mc.preset("incomplete_disk", model, r=7, variant="asymmetric")
    assert {r.label for r in p.regions} == {"A", "B", "C", "D"}
    widths = [100.0, 70.0, 110.0, 80.0]
    q = mc.preset("incomplete_disk", model, r=7, angles=np.deg2rad(widths))
    mc.validate_partition(q)
    with pytest.raises(ValueError):
        mc.preset("incomplete_disk", model, r=7, angles=[1.0, 1.0, 1.0, 1.0])
