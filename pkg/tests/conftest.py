"""Shared fixtures; the expensive eigendecompositions are computed once.

The paper-scale lattices (honeycomb L=24, pi-flux 47x46) take about a minute
each to diagonalize, so the acceptance tests share their correlation
matrices through session-scoped caches.
"""

import numpy as np
import pytest

import modcomm as mc


def build_corr(model, keep_vectors=False):
    corr = mc.ground_state_correlations(model)
    if not keep_vectors:
        model.drop_eigenvectors()
    return corr


@pytest.fixture(scope="session")
def corr24():
    """Ground-state correlations of the L=24 honeycomb patch at mu_tilde=0."""
    return build_corr(mc.build_haldane(L=24, mu_tilde=0.0))


@pytest.fixture(scope="session")
def haldane_corr_factory(corr24):
    """Correlations for (L, mu_tilde) honeycomb points; only (24, 0) is kept."""

    def get(L, mu_tilde):
        if L == 24 and mu_tilde == 0.0:
            return corr24
        return build_corr(mc.build_haldane(L=L, mu_tilde=mu_tilde))

    return get


@pytest.fixture(scope="session")
def corr14():
    """Mid-size honeycomb patch used by the cheaper physics tests."""
    return build_corr(mc.build_haldane(L=14, mu_tilde=0.0))


@pytest.fixture(scope="session")
def model14(corr14):
    return corr14.model


@pytest.fixture(scope="session")
def piflux_corr_factory():
    def get(Lx, Ly, tau):
        return build_corr(mc.build_pi_flux(Lx, Ly, 1.0, tau))

    return get
