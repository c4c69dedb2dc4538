"""Exact Fock-space reference: construction, reduction, modular quantities."""

import numpy as np
import pytest

from modcomm import oracle
from modcomm.errors import DegenerateFillingError


def chain_h(n, t=-1.0):
    h = np.zeros((n, n), dtype=complex)
    for j in range(n - 1):
        h[j, j + 1] = h[j + 1, j] = t
    return h


def random_h(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def test_dimer_ground_state():
    st = oracle.exact_ground_state(chain_h(2), 1)
    # bonding orbital: equal weight on |10> and |01>, up to a global sign
    amps = st.amplitudes
    assert abs(amps[0]) < 1e-14 and abs(amps[3]) < 1e-14
    assert abs(abs(amps[1]) - 1 / np.sqrt(2)) < 1e-12
    assert abs(amps[1] - amps[2]) < 1e-12


def test_dimer_correlations():
    st = oracle.exact_ground_state(chain_h(2), 1)
    m = oracle.correlation_matrix(st)
    assert np.allclose(m, 0.5 * np.ones((2, 2)), atol=1e-12)


def test_energy_is_sum_of_occupied_orbitals():
    h = chain_h(5)
    st = oracle.exact_ground_state(h, 2)
    m = oracle.correlation_matrix(st)
    energy = float(np.einsum("jk,jk->", h, m).real)
    eps = np.linalg.eigvalsh(h)
    assert abs(energy - eps[:2].sum()) < 1e-10


def test_degenerate_sector_refused():
    # two decoupled sites at equal energy: 1-particle ground state degenerate
    h = np.zeros((2, 2), dtype=complex)
    with pytest.raises(DegenerateFillingError):
        oracle.exact_ground_state(h, 1)


def test_reduce_full_is_pure_projector():
    st = oracle.exact_ground_state(chain_h(4), 2)
    rho = oracle.reduce_density(st, [0, 1, 2, 3])
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.max(np.abs(rho @ rho - rho)) < 1e-12


def test_complementary_regions_same_spectrum():
    st = oracle.exact_ground_state(chain_h(4), 2)
    s1 = np.sort(np.linalg.eigvalsh(oracle.reduce_density(st, [0, 1])))
    s2 = np.sort(np.linalg.eigvalsh(oracle.reduce_density(st, [2, 3])))
    assert np.allclose(s1, s2, atol=1e-10)


def test_peschel_correspondence():
    # spectrum of rho_X equals products over {n_l, 1-n_l} of C_X occupations
    st = oracle.exact_ground_state(chain_h(4), 2)
    rho = oracle.reduce_density(st, [0, 1])
    lam = np.sort(np.linalg.eigvalsh(rho))
    c_x = oracle.correlation_matrix(st)[np.ix_([0, 1], [0, 1])]
    n = np.linalg.eigvalsh(c_x)
    prods = np.sort([a * b for a in (n[0], 1 - n[0]) for b in (n[1], 1 - n[1])])
    assert np.allclose(lam, prods, atol=1e-10)


def test_modular_hamiltonian_support_convention():
    st = oracle.exact_ground_state(chain_h(6), 3)
    rho = oracle.reduce_density(st, [0, 1, 2])
    k = oracle.modular_hamiltonian(rho)
    s = oracle.entropy_of_density(rho)
    assert abs(float(np.trace(rho @ k).real) - s) < 1e-10


def test_modular_commutator_empty_region_vanishes():
    st = oracle.exact_ground_state(chain_h(6), 3)
    assert oracle.exact_modular_commutator(st, [], [2, 3], [4, 5]) == 0.0
    assert oracle.exact_modular_commutator(st, [0, 1], [], [4, 5]) == 0.0
    assert oracle.exact_modular_commutator(st, [0, 1], [2, 3], []) == 0.0


def test_modular_commutator_antisymmetry():
    rng = np.random.default_rng(5)
    st = oracle.exact_ground_state(random_h(rng, 8), 4)
    j1 = oracle.exact_modular_commutator(st, [0, 1], [2, 3], [4, 5])
    j2 = oracle.exact_modular_commutator(st, [4, 5], [2, 3], [0, 1])
    assert abs(j1 + j2) < 1e-10


def test_overlapping_regions_rejected():
    st = oracle.exact_ground_state(chain_h(6), 3)
    with pytest.raises(ValueError):
        oracle.exact_modular_commutator(st, [0, 1], [1, 2], [4, 5])


def test_embed_operator_preserves_expectations():
    rng = np.random.default_rng(9)
    st = oracle.exact_ground_state(random_h(rng, 6), 3)
    sub = [1, 3]
    rho_sub = oracle.reduce_density(st, sub)
    op = random_h(rng, 2 ** len(sub))
    big = oracle.embed_operator(op, sub, [0, 1, 2, 3, 4, 5])
    rho_full = oracle.reduce_density(st, [0, 1, 2, 3, 4, 5])
    lhs = np.trace(rho_full @ big)
    rhs = np.trace(rho_sub @ op)
    assert abs(lhs - rhs) < 1e-10
