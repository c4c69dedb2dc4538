"""Real-space tight-binding models on open two-dimensional patches.

Two Chern-insulator models are provided: the honeycomb model with complex
next-nearest hopping (phase phi, arrows alternating between sublattices) and
a square-lattice pi-flux model with purely imaginary diagonal hopping.

Geometry conventions
--------------------
Positions are in lattice-constant units (Bravais vector length 1).  The
honeycomb patch is the half-open hexagonal cell domain

    -L <= n1 < L,   -L <= n2 < L,   -L <= n1 + n2 < L

which contains exactly ``3 L**2`` unit cells (``6 L**2`` sites).  Subregions
built with the same rule (see ``regions.hexagon_cells``) therefore have an
exact cell count, e.g. 867 Bravais cells for side 17.  The pi-flux patch is
the full ``Lx x Ly`` rectangle of two-site unit cells stacked vertically,
``2 Lx Ly`` sites in total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

A1 = np.array([1.0, 0.0])
A2 = np.array([0.5, np.sqrt(3.0) / 2.0])
HONEYCOMB_BOND = 1.0 / np.sqrt(3.0)
_B_OFFSET = np.array([0.0, HONEYCOMB_BOND])

# next-nearest-neighbor vectors that carry nu = +1 on sublattice a
# (reversed arrows on sublattice b); overall sign calibrated so that the
# chiral central charge is +1 for -1 < mu_tilde < 1 at phi = pi/2
_NNN_PLUS = (A1, A2 - A1, -A2)


@dataclass(frozen=True)
class Site:
    index: int
    position: tuple[float, float]
    sublattice: str
    unit_cell: tuple[int, int]


class LatticeModel:
    """Immutable site list plus single-particle Hamiltonian.

    The dense eigendecomposition is computed lazily and cached, since the
    gap, the ground-state correlations and most experiments all consume it.
    """

    def __init__(self, sites: list[Site], h: np.ndarray, metadata: dict):
        h = np.asarray(h, dtype=complex)
        n = len(sites)
        if h.shape != (n, n):
            raise ValueError("Hamiltonian size does not match site count")
        herm = np.max(np.abs(h - h.conj().T)) if n else 0.0
        if herm > 1e-12:
            raise ValueError(f"Hamiltonian not Hermitian: max deviation {herm:.3e}")
        pos = np.array([s.position for s in sites], dtype=float)
        if not np.all(np.isfinite(pos)):
            raise ValueError("non-finite site position")
        h.setflags(write=False)
        pos.setflags(write=False)
        self.sites = tuple(sites)
        self.h = h
        self.metadata = dict(metadata)
        self.positions = pos
        self.cell_indices = np.array([s.unit_cell for s in sites], dtype=np.int64)
        self.sublattices = np.array([s.sublattice for s in sites])
        self._evals = None
        self._evecs = None

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def center(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached (eigenvalues, eigenvectors) of h."""
        if self._evecs is None:
            self._evals, self._evecs = np.linalg.eigh(self.h)
        return self._evals, self._evecs

    def eigenvalues(self) -> np.ndarray:
        if self._evals is None:
            self.spectrum()
        return self._evals

    def drop_eigenvectors(self) -> None:
        """Free the dense eigenvector matrix (eigenvalues stay cached)."""
        self._evecs = None

    def __repr__(self):
        name = self.metadata.get("model", "lattice")
        return f"<LatticeModel {name} N={self.n_sites}>"


def hexagon_cell_domain(side: int) -> list[tuple[int, int]]:
    """Unit-cell indices of the half-open hexagon with exactly 3*side**2 cells."""
    cells = []
    for n1 in range(-side, side):
        for n2 in range(-side, side):
            if -side <= n1 + n2 < side:
                cells.append((n1, n2))
    return cells


def build_haldane(L: int, mu_tilde: float, t1: float = 1.0, t2: float = 1.0,
                  phi: float = np.pi / 2) -> LatticeModel:
    """Honeycomb patch with onsite +/-mu, real NN hopping t1 and complex NNN
    hopping ``|t2| exp(-i phi nu_jk)``.

    ``mu = mu_tilde * 3 sqrt(3) * t2``; the Chern phase with c_- = +1 sits at
    ``-1 < mu_tilde < 1`` for ``phi = pi/2``.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    if t2 == 0:
        raise ValueError("t2 must be nonzero (mu_tilde is defined in units of t2)")
    t2 = abs(t2)
    mu = mu_tilde * 3.0 * np.sqrt(3.0) * t2

    cells = hexagon_cell_domain(L)
    cell_rank = {c: i for i, c in enumerate(cells)}
    sites = []
    for i, (n1, n2) in enumerate(cells):
        base = n1 * A1 + n2 * A2
        sites.append(Site(2 * i, (base[0], base[1]), "a", (n1, n2)))
        pb = base + _B_OFFSET
        sites.append(Site(2 * i + 1, (pb[0], pb[1]), "b", (n1, n2)))
    n = len(sites)
    h = np.zeros((n, n), dtype=complex)
    for (n1, n2), i in cell_rank.items():
        a_idx = 2 * i
        b_idx = 2 * i + 1
        h[a_idx, a_idx] = mu
        h[b_idx, b_idx] = -mu
        # nearest neighbors of the a site: b in cells (0,0), (0,-1), (+1,-1)
        for dn1, dn2 in ((0, 0), (0, -1), (1, -1)):
            j = cell_rank.get((n1 + dn1, n2 + dn2))
            if j is not None:
                h[a_idx, 2 * j + 1] += t1
                h[2 * j + 1, a_idx] += t1
        # next-nearest neighbors: +1 arrows on sublattice a, reversed on b
        for dn1, dn2 in ((1, 0), (-1, 1), (0, -1)):  # cell offsets of _NNN_PLUS
            j = cell_rank.get((n1 + dn1, n2 + dn2))
            if j is None:
                continue
            amp = t2 * np.exp(-1j * phi)
            h[a_idx, 2 * j] += amp
            h[2 * j, a_idx] += np.conj(amp)
            h[b_idx, 2 * j + 1] += np.conj(amp)
            h[2 * j + 1, b_idx] += amp
    metadata = {
        "model": "haldane",
        "L": L,
        "mu_tilde": mu_tilde,
        "mu": mu,
        "t1": t1,
        "t2": t2,
        "phi": phi,
        "W": 0.0,
        "disorder_seed": None,
        "bond_length": HONEYCOMB_BOND,
    }
    return LatticeModel(sites, h, metadata)


def build_pi_flux(Lx: int, Ly: int, t1: float = 1.0, tau: float = 1.0) -> LatticeModel:
    """Square-lattice pi-flux model on an open ``Lx x Ly``-cell rectangle.

    Each unit cell stacks sublattice a at (m, 2n) under b at (m, 2n + 1).
    Nearest hopping is ``t1 eta_jk`` with ``eta = -1`` on the horizontal b-b
    links (one minus sign per plaquette); the diagonal terms
    ``i tau c^dag_{r + x, b} c_{r, a} + h.c.`` open the Chern gap, with
    ``c_- = 1`` for ``0 < tau < 2``.
    """
    if Lx < 2 or Ly < 2:
        raise ValueError("Lx and Ly must be at least 2")
    sites = []
    for m in range(Lx):
        for nn in range(Ly):
            i = 2 * (m * Ly + nn)
            sites.append(Site(i, (float(m), float(2 * nn)), "a", (m, nn)))
            sites.append(Site(i + 1, (float(m), float(2 * nn + 1)), "b", (m, nn)))
    n = len(sites)
    h = np.zeros((n, n), dtype=complex)

    def a_of(m, nn):
        return 2 * (m * Ly + nn)

    def b_of(m, nn):
        return 2 * (m * Ly + nn) + 1

    for m in range(Lx):
        for nn in range(Ly):
            a_idx = a_of(m, nn)
            b_idx = b_of(m, nn)
            h[a_idx, b_idx] += t1
            h[b_idx, a_idx] += t1
            if nn + 1 < Ly:
                h[b_idx, a_of(m, nn + 1)] += t1
                h[a_of(m, nn + 1), b_idx] += t1
            if m + 1 < Lx:
                h[a_idx, a_of(m + 1, nn)] += t1
                h[a_of(m + 1, nn), a_idx] += t1
                h[b_idx, b_of(m + 1, nn)] += -t1
                h[b_of(m + 1, nn), b_idx] += -t1
                # diagonal a(m, n) -> b(m+1, n)
                h[b_of(m + 1, nn), a_idx] += 1j * tau
                h[a_idx, b_of(m + 1, nn)] += -1j * tau
    metadata = {
        "model": "pi_flux",
        "Lx": Lx,
        "Ly": Ly,
        "t1": t1,
        "tau": tau,
        "W": 0.0,
        "disorder_seed": None,
        "bond_length": 1.0,
    }
    return LatticeModel(sites, h, metadata)


def add_disorder(model: LatticeModel, W: float, seed: int) -> LatticeModel:
    """Copy of the model with onsite energies V_j ~ U[-W/2, W/2] added.

    Drawn from a Philox counter-based generator keyed by ``seed``, so the
    same (model, W, seed) always produces the same Hamiltonian.
    """
    if W < 0:
        raise ValueError("disorder strength W must be nonnegative")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    v = rng.uniform(-W / 2.0, W / 2.0, model.n_sites)
    h = model.h.copy()
    h[np.diag_indices_from(h)] += v
    metadata = dict(model.metadata)
    metadata["W"] = W
    metadata["disorder_seed"] = int(seed)
    return LatticeModel(list(model.sites), h, metadata)


def half_filling_gap(model: LatticeModel) -> float:
    """Open-boundary single-particle gap at half filling (edge states included)."""
    n = model.n_sites
    if n % 2 != 0:
        raise ValueError("half filling requires an even number of sites")
    e = model.eigenvalues()
    return float(e[n // 2] - e[n // 2 - 1])


def haldane_bulk_gap(mu_tilde: float, t1: float = 1.0, t2: float = 1.0,
                     phi: float = np.pi / 2, n_k: int = 400) -> float:
    """Bulk (infinite-lattice) gap of the honeycomb model from its Bloch bands.

    Used for physical scales such as the disorder strength; the open-patch
    ``half_filling_gap`` measures the edge-state level spacing instead.
    """
    t2 = abs(t2)
    mu = mu_tilde * 3.0 * np.sqrt(3.0) * t2
    b1 = 2.0 * np.pi * np.array([1.0, -1.0 / np.sqrt(3.0)])
    b2 = 2.0 * np.pi * np.array([0.0, 2.0 / np.sqrt(3.0)])
    x = np.linspace(0.0, 1.0, n_k, endpoint=False)
    kx, ky = np.meshgrid(x, x, indexing="ij")
    k = kx[..., None] * b1 + ky[..., None] * b2
    # NN bond cell offsets (0,0), (0,-1), (1,-1) relative to the a site
    f = np.zeros(k.shape[:2], dtype=complex)
    for dn1, dn2 in ((0, 0), (0, -1), (1, -1)):
        r = dn1 * A1 + dn2 * A2
        f += t1 * np.exp(1j * (k @ r))
    alpha = np.full(k.shape[:2], mu, dtype=float)
    beta = np.full(k.shape[:2], -mu, dtype=float)
    for v in _NNN_PLUS:
        alpha += 2.0 * t2 * np.cos(k @ v - phi)
        beta += 2.0 * t2 * np.cos(k @ v + phi)
    mid = 0.5 * (alpha + beta)
    rad = np.sqrt(0.25 * (alpha - beta) ** 2 + np.abs(f) ** 2)
    upper = mid + rad
    lower = mid - rad
    return float(max(upper.min() - lower.max(), 0.0))
