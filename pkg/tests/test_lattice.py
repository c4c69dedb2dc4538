"""Lattice builders: geometry, hermiticity, hopping ranges, disorder."""

import numpy as np
import pytest

import modcomm as mc
from modcomm.lattice import HONEYCOMB_BOND, LatticeModel, Site


def hop_distances(model):
    h = model.h
    off = np.argwhere((np.abs(h) > 1e-14) & ~np.eye(model.n_sites, dtype=bool))
    d = model.positions[off[:, 0]] - model.positions[off[:, 1]]
    return np.unique(np.round(np.hypot(d[:, 0], d[:, 1]), 9))


def test_haldane_site_count_and_cells():
    for L in (2, 4, 7):
        m = mc.build_haldane(L=L, mu_tilde=0.3)
        assert m.n_sites == 6 * L * L  # 3 L^2 cells, two sites each
        assert len({s.position for s in m.sites}) == m.n_sites


def test_haldane_hermitian_and_hopping_range():
    m = mc.build_haldane(L=4, mu_tilde=0.7, phi=1.1)
    assert np.max(np.abs(m.h - m.h.conj().T)) < 1e-12
    dists = hop_distances(m)
    assert np.allclose(dists, [HONEYCOMB_BOND, 1.0], atol=1e-9)


def test_haldane_minimal_patch_bond_counts():
    m = mc.build_haldane(L=2, mu_tilde=0.0)
    assert np.max(np.abs(m.h - m.h.conj().T)) < 1e-12
    a_sites = [s.index for s in m.sites if s.sublattice == "a"]
    for j in a_sites:
        row = np.abs(m.h[j]) > 1e-14
        nn = sum(1 for k in np.nonzero(row)[0]
                 if m.sites[k].sublattice == "b")
        assert nn <= 3


def test_haldane_real_at_phi_zero_and_pi():
    for phi in (0.0, np.pi):
        m = mc.build_haldane(L=3, mu_tilde=0.4, phi=phi)
        assert np.max(np.abs(m.h.imag)) < 1e-12


def test_haldane_real_symmetric_at_mu_zero_phi_zero():
    m = mc.build_haldane(L=3, mu_tilde=0.0, phi=0.0)
    assert np.max(np.abs(m.h.imag)) < 1e-12
    assert np.max(np.abs(m.h - m.h.T)) < 1e-12


def test_haldane_onsite_signs():
    m = mc.build_haldane(L=3, mu_tilde=0.5, t2=1.0)
    mu = 0.5 * 3 * np.sqrt(3)
    for s in m.sites:
        expect = mu if s.sublattice == "a" else -mu
        assert abs(m.h[s.index, s.index] - expect) < 1e-12


def test_haldane_input_validation():
    with pytest.raises(ValueError):
        mc.build_haldane(L=1, mu_tilde=0.0)
    with pytest.raises(ValueError):
        mc.build_haldane(L=4, mu_tilde=0.0, t2=0.0)


def test_pi_flux_site_count_and_ranges():
    m = mc.build_pi_flux(5, 4, 1.0, 1.2)
    assert m.n_sites == 2 * 5 * 4
    assert np.max(np.abs(m.h - m.h.conj().T)) < 1e-12
    assert np.allclose(hop_distances(m), [1.0, np.sqrt(2.0)], atol=1e-9)


def test_pi_flux_input_validation():
    with pytest.raises(ValueError):
        mc.build_pi_flux(1, 4, 1.0, 1.0)


def test_pi_flux_plaquette_flux_is_pi():
    m = mc.build_pi_flux(3, 3, 1.0, 0.0)
    # product of t1 hoppings around the elementary square starting at a(0,0)
    by_pos = {s.position: s.index for s in m.sites}
    loop = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    prod = 1.0
    for i in range(4):
        j = by_pos[loop[i]]
        k = by_pos[loop[(i + 1) % 4]]
        prod *= m.h[k, j]
    assert abs(prod - (-1.0)) < 1e-12


def test_pi_flux_tau_sign_flip_preserves_spectrum():
    e1 = mc.build_pi_flux(4, 4, 1.0, 1.2).eigenvalues()
    e2 = mc.build_pi_flux(4, 4, 1.0, -1.2).eigenvalues()
    assert np.max(np.abs(e1 - e2)) < 1e-12


def test_half_filling_gap_dimer():
    sites = [Site(0, (0.0, 0.0), "a", (0, 0)), Site(1, (1.0, 0.0), "b", (1, 0))]
    h = np.array([[0.0, -1.0], [-1.0, 0.0]], dtype=complex)
    m = LatticeModel(sites, h, {"model": "dimer", "bond_length": 1.0})
    assert abs(mc.half_filling_gap(m) - 2.0) < 1e-12


def test_half_filling_gap_rejects_odd():
    sites = [Site(0, (0.0, 0.0), "a", (0, 0))]
    m = LatticeModel(sites, np.zeros((1, 1), dtype=complex), {"model": "x"})
    with pytest.raises(ValueError):
        mc.half_filling_gap(m)


def test_haldane_gap_closes_at_transition():
    # open-boundary gap decreases toward the critical points mu_tilde = +-1
    g_mid = mc.half_filling_gap(mc.build_haldane(L=6, mu_tilde=0.0))
    g_crit = mc.half_filling_gap(mc.build_haldane(L=6, mu_tilde=1.0))
    assert g_crit < g_mid
    # and the bulk Bloch gap vanishes at the transition
    assert mc.haldane_bulk_gap(1.0, n_k=240) < 0.06
    assert mc.haldane_bulk_gap(0.0, n_k=240) > 1.9


def test_pi_flux_gap_closes_at_tau_zero():
    gaps = [mc.half_filling_gap(mc.build_pi_flux(L, L, 1.0, 0.0)) for L in (4, 8, 12)]
    assert gaps[2] < gaps[0]  # Dirac point: finite-size gap shrinks
    gapped = mc.half_filling_gap(mc.build_pi_flux(12, 12, 1.0, 1.2))
    assert gapped > gaps[2]


def test_disorder_zero_is_identity():
    m = mc.build_haldane(L=3, mu_tilde=0.2)
    m2 = mc.add_disorder(m, 0.0, seed=11)
    assert np.array_equal(m.h, m2.h)


def test_disorder_deterministic_and_recorded():
    m = mc.build_haldane(L=3, mu_tilde=0.2)
    d1 = mc.add_disorder(m, 0.3, seed=42)
    d2 = mc.add_disorder(m, 0.3, seed=42)
    d3 = mc.add_disorder(m, 0.3, seed=43)
    assert np.array_equal(d1.h, d2.h)
    assert not np.array_equal(d1.h, d3.h)
    assert d1.metadata["W"] == 0.3 and d1.metadata["disorder_seed"] == 42
    v = np.real(np.diag(d1.h) - np.diag(m.h))
    assert np.all(np.abs(v) <= 0.15 + 1e-12)
    with pytest.raises(ValueError):
        mc.add_disorder(m, -0.1, seed=1)


def test_l24_half_filling_gap_reference(corr24):
    # frozen disorder-scale reference of the open L=24 patch (edge spacing)
    assert abs(mc.half_filling_gap(corr24.model) - 0.0803215086) < 1e-6
