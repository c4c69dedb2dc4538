"""Correlation-matrix engine for fermionic Gaussian ground states.

All reduced density matrices of a Slater-determinant state are Gaussian, so
entropies, entanglement (modular) Hamiltonians and modular commutators reduce
to dense linear algebra on the two-point function.

Storage convention: ``C[j, k] = <c_j^dag c_k>``.  With this choice the
single-particle entanglement Hamiltonian of a region is
``k_X = ln((1 - C_X) / C_X)`` and the modular commutator is

    J(A, B, C) = -i Tr([k_AB, k_BC] C_ABC)

where the small matrices are zero-padded onto the sorted union ABC.  The
overall sign/transpose pair is not a free choice: it is pinned by the exact
Fock-space oracle (see ``modcomm.calibration`` and the calibration tests).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFillingError, NumericalContractError, RegionOverlapError
from .lattice import LatticeModel, half_filling_gap
from .regions import JunctionBall, Region, region_from_indices

ENTROPY_CLIP = 1e-12
MODULAR_CLIP = 1e-10


@dataclass
class CorrelationMatrix:
    """Two-point function ``C[j, k] = <c_j^dag c_k>`` on a set of sites.

    ``indices`` are the absolute model-site indices the rows/columns refer to
    (the full model for a freshly computed ground state).
    """

    C: np.ndarray
    model: LatticeModel | None
    indices: np.ndarray

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=complex)
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.C.shape != (self.indices.size, self.indices.size):
            raise ValueError("matrix/index size mismatch")
        self.C.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def n(self) -> int:
        return self.indices.size


def ground_state_correlations(model: LatticeModel, degeneracy_tol: float = 1e-8) -> CorrelationMatrix:
    """Half-filled ground-state correlation matrix of a lattice model.

    Occupies the ``N/2`` lowest single-particle orbitals.  Refuses to build a
    state when the Fermi level is degenerate (perturb with disorder or move
    the tuning parameter instead).
    """
    n = model.n_sites
    if n % 2 != 0:
        raise ValueError("half filling needs an even number of sites")
    gap = half_filling_gap(model)
    if gap <= degeneracy_tol:
        raise DegenerateFillingError(
            f"Fermi level degenerate: open-boundary gap {gap:.3e} <= {degeneracy_tol:.1e}"
        )
    _, u = model.spectrum()
    occ = u[:, : n // 2]
    c = occ.conj() @ occ.T
    c = 0.5 * (c + c.conj().T)
    corr = CorrelationMatrix(C=c, model=model, indices=np.arange(n))
    check_ground_state_invariants(corr, n // 2)
    return corr


def check_ground_state_invariants(corr: CorrelationMatrix, n_occupied: int) -> None:
    c = corr.C
    herm = np.max(np.abs(c - c.conj().T))
    if herm > 1e-12:
        raise NumericalContractError(f"correlation matrix not Hermitian: {herm:.3e}")
    purity = np.max(np.abs(c @ c - c))
    if purity > 1e-9:
        raise NumericalContractError(f"correlation matrix not a projector: {purity:.3e}")
    tr = float(np.trace(c).real)
    if abs(tr - n_occupied) > 1e-8:
        raise NumericalContractError(f"trace {tr} != occupied orbital count {n_occupied}")


def restrict(corr: CorrelationMatrix, region: Region) -> CorrelationMatrix:
    """Principal submatrix on the region's sites (order preserved)."""
    if region.size == 0:
        raise ValueError("cannot restrict to an empty region")
    pos = np.searchsorted(corr.indices, region.indices)
    if np.any(pos >= corr.indices.size) or np.any(corr.indices[pos] != region.indices):
        raise ValueError("region indices outside this correlation matrix")
    return CorrelationMatrix(
        C=corr.C[np.ix_(pos, pos)], model=corr.model, indices=region.indices
    )


def _occupations(corr: CorrelationMatrix, indices: np.ndarray | None = None) -> np.ndarray:
    if indices is None:
        c = corr.C
    else:
        pos = np.searchsorted(corr.indices, indices)
        c = corr.C[np.ix_(pos, pos)]
    return np.linalg.eigvalsh(c)


def entanglement_entropy(corr: CorrelationMatrix, region: Region | None = None,
                         eps: float = ENTROPY_CLIP) -> float:
    """Von Neumann entropy (nats) of a region from the free-fermion spectrum.

    S = -sum_l [n_l ln n_l + (1 - n_l) ln(1 - n_l)] with occupations clipped
    into [eps, 1 - eps].
    """
    n = _occupations(corr, None if region is None else region.indices)
    n = np.clip(n, eps, 1.0 - eps)
    return float(-np.sum(n * np.log(n) + (1.0 - n) * np.log(1.0 - n)))


@dataclass
class ModularMatrix:
    """Single-particle entanglement Hamiltonian of a region.

    Eigenvalues are ``ln((1 - n) / n)`` for the clipped occupations ``n`` of
    the restricted correlation matrix; eigenvectors are inherited from it.
    """

    k: np.ndarray
    indices: np.ndarray
    eps: float
    kappa: np.ndarray = field(repr=False)

    @property
    def spectral_norm(self) -> float:
        return float(np.max(np.abs(self.kappa))) if self.kappa.size else 0.0


def modular_matrix(corr_x: CorrelationMatrix, eps: float = MODULAR_CLIP) -> ModularMatrix:
    if not 0.0 < eps <= 1e-6:
        raise ValueError("eps must lie in (0, 1e-6]")
    n, v = np.linalg.eigh(corr_x.C)
    n = np.clip(n, eps, 1.0 - eps)
    kappa = np.log((1.0 - n) / n)
    k = (v * kappa) @ v.conj().T
    k = 0.5 * (k + k.conj().T)
    return ModularMatrix(k=k, indices=corr_x.indices, eps=eps, kappa=kappa)


@dataclass(frozen=True)
class CommutatorResult:
    value: float
    imag_residue: float
    norm_ab: float
    norm_bc: float


def _union_indices(*regions: Region) -> np.ndarray:
    return np.unique(np.concatenate([r.indices for r in regions if r.size]))


def _check_disjoint(*regions: Region) -> None:
    idx = np.concatenate([r.indices for r in regions if r.size])
    if np.unique(idx).size != idx.size:
        labels = ", ".join(r.label or "?" for r in regions)
        raise RegionOverlapError(f"regions ({labels}) are not pairwise disjoint")


def modular_commutator_detail(corr: CorrelationMatrix, a: Region, b: Region, c: Region,
                              eps: float = MODULAR_CLIP,
                              residue_factor: float = 1e-8) -> CommutatorResult:
    """J(A,B,C) = i <[K_AB, K_BC]> for the Gaussian state, with diagnostics.

    Evaluated as ``-i Tr([k_AB, k_BC] C_ABC)`` in the storage convention of
    this module (sign pinned by the exact oracle).  The imaginary residue is
    attached and the call fails if it exceeds
    ``residue_factor * |k_AB| * |k_BC|``.
    """
    if a.size == 0 or b.size == 0 or c.size == 0:
        return CommutatorResult(0.0, 0.0, 0.0, 0.0)
    _check_disjoint(a, b, c)
    ab = _union_indices(a, b)
    bc = _union_indices(b, c)
    abc = _union_indices(a, b, c)
    k_ab = modular_matrix(restrict(corr, region_from_indices(corr.model, ab, "AB")), eps)
    k_bc = modular_matrix(restrict(corr, region_from_indices(corr.model, bc, "BC")), eps)
    pos_abc = np.searchsorted(corr.indices, abc)
    c_abc = corr.C[np.ix_(pos_abc, pos_abc)]
    p_ab = np.searchsorted(abc, ab)
    p_bc = np.searchsorted(abc, bc)
    # contract through the shared B block instead of padding to |ABC|
    b_in_ab = np.searchsorted(ab, b.indices)
    b_in_bc = np.searchsorted(bc, b.indices)
    ka_kb = k_ab.k[:, b_in_ab] @ k_bc.k[b_in_bc, :]          # |AB| x |BC|
    kb_ka = k_bc.k[:, b_in_bc] @ k_ab.k[b_in_ab, :]          # |BC| x |AB|
    c_bc_ab = c_abc[np.ix_(p_bc, p_ab)]
    c_ab_bc = c_abc[np.ix_(p_ab, p_bc)]
    val = -1j * (np.einsum("ij,ji->", ka_kb, c_bc_ab) - np.einsum("ij,ji->", kb_ka, c_ab_bc))
    residue = float(abs(val.imag))
    bound = residue_factor * k_ab.spectral_norm * k_bc.spectral_norm
    if residue > bound:
        raise NumericalContractError(
            f"imaginary residue {residue:.3e} exceeds {bound:.3e}"
        )
    return CommutatorResult(float(val.real), residue, k_ab.spectral_norm, k_bc.spectral_norm)


def modular_commutator(corr: CorrelationMatrix, a: Region, b: Region, c: Region,
                       eps: float = MODULAR_CLIP) -> float:
    return modular_commutator_detail(corr, a, b, c, eps).value


def geometric_integer(j: float, kind: str) -> float:
    """(3/pi) J for bulk partitions, -(3/pi) J for edge partitions."""
    if kind == "bulk":
        return 3.0 * j / np.pi
    if kind == "edge":
        return -3.0 * j / np.pi
    raise ValueError(f"kind must be 'bulk' or 'edge', got {kind!r}")


def cond_mutual_info(corr: CorrelationMatrix, a: Region, b: Region, c: Region,
                     eps: float = ENTROPY_CLIP) -> float:
    """I(A:C|B) = S_AB + S_BC - S_B - S_ABC (nonnegative up to noise)."""
    _check_disjoint(a, b, c)
    s = lambda idx: _entropy_of_indices(corr, idx, eps)
    return s(_union_indices(a, b)) + s(_union_indices(b, c)) - s(b.indices) \
        - s(_union_indices(a, b, c))


def _entropy_of_indices(corr: CorrelationMatrix, idx: np.ndarray, eps: float) -> float:
    n = _occupations(corr, idx)
    n = np.clip(n, eps, 1.0 - eps)
    return float(-np.sum(n * np.log(n) + (1.0 - n) * np.log(1.0 - n)))


def delta_two(corr: CorrelationMatrix, b: Region, c: Region, eps: float = ENTROPY_CLIP) -> float:
    """Araki-Lieb combination S_BC + S_C - S_B (vanishes on bulk balls)."""
    if b.size == 0 and c.size == 0:
        return 0.0
    _check_disjoint(b, c)
    s = lambda idx: _entropy_of_indices(corr, idx, eps) if idx.size else 0.0
    return s(_union_indices(b, c)) + s(c.indices) - s(b.indices)


def delta_three(corr: CorrelationMatrix, b: Region, c: Region, d: Region,
                eps: float = ENTROPY_CLIP) -> float:
    """Weak-monotonicity combination S_BC + S_CD - S_B - S_D."""
    if b.size == 0 and c.size == 0 and d.size == 0:
        return 0.0
    _check_disjoint(b, c, d)
    s = lambda idx: _entropy_of_indices(corr, idx, eps) if idx.size else 0.0
    return s(_union_indices(b, c)) + s(_union_indices(c, d)) - s(b.indices) - s(d.indices)


@dataclass(frozen=True)
class AdditivityResult:
    j_total: float
    ball_terms: tuple[float, ...]
    j_residual: float
    defect: float
    imag_residues: tuple[float, ...]


def additivity_decomposition(corr: CorrelationMatrix, u: Region, v: Region, w: Region,
                             balls: list[JunctionBall] | tuple[JunctionBall, ...],
                             eps: float = MODULAR_CLIP) -> AdditivityResult:
    """Split J(U,V,W) into per-junction ball terms plus a residual.

    Each ball contributes ``J(U & B_i, V & B_i, W & B_i)`` with ``B_i`` the
    full ball (radius ``r_d2``); the residual uses the regions minus the small
    inner balls (radius ``r_b``).  The reported defect is
    ``J_total - sum_i J_ball_i - J_residual`` and vanishes for well-separated
    complete junctions deep in a gapped phase.
    """
    balls = tuple(balls)
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            dist = float(np.hypot(balls[i].center[0] - balls[j].center[0],
                                  balls[i].center[1] - balls[j].center[1]))
            if dist <= balls[i].r_d2 + balls[j].r_d2:
                raise ValueError(f"junction balls {i} and {j} overlap")
    model = corr.model
    pos = model.positions

    def clip_ball(region: Region, ball: JunctionBall) -> Region:
        if region.size == 0:
            return region
        p = pos[region.indices]
        d = np.hypot(p[:, 0] - ball.center[0], p[:, 1] - ball.center[1])
        return region_from_indices(model, region.indices[d <= ball.r_d2], region.label)

    def drop_cores(region: Region) -> Region:
        if region.size == 0:
            return region
        p = pos[region.indices]
        keep = np.ones(region.size, dtype=bool)
        for ball in balls:
            d = np.hypot(p[:, 0] - ball.center[0], p[:, 1] - ball.center[1])
            keep &= d > ball.r_b
        return region_from_indices(model, region.indices[keep], region.label)

    total = modular_commutator_detail(corr, u, v, w, eps)
    ball_terms = []
    residues = [total.imag_residue]
    for ball in balls:
        res = modular_commutator_detail(corr, clip_ball(u, ball), clip_ball(v, ball),
                                        clip_ball(w, ball), eps)
        ball_terms.append(res.value)
        residues.append(res.imag_residue)
    res_resid = modular_commutator_detail(corr, drop_cores(u), drop_cores(v), drop_cores(w), eps)
    residues.append(res_resid.imag_residue)
    defect = total.value - sum(ball_terms) - res_resid.value
    return AdditivityResult(
        j_total=total.value,
        ball_terms=tuple(ball_terms),
        j_residual=res_resid.value,
        defect=defect,
        imag_residues=tuple(residues),
    )


@dataclass
class ModularCurrent:
    """Bilinear decomposition J = sum_{v in AB} sum_{u in BC} f[v, u].

    ``f`` is indexed by absolute site indices ``ab_indices`` (rows, local
    terms of K_AB) and ``bc_indices`` (columns, local terms of K_BC).  B sites
    appear on both axes: the row/column slices belong to two different
    operators even at the same site.
    """

    f: np.ndarray
    ab_indices: np.ndarray
    bc_indices: np.ndarray

    def total(self) -> float:
        return float(np.sum(self.f).real)

    def flow(self, left: Region, right: Region) -> float:
        """f(L, R) summed over v in L (within AB) and u in R (within BC)."""
        rows = np.isin(self.ab_indices, left.indices)
        cols = np.isin(self.bc_indices, right.indices)
        return float(np.sum(self.f[np.ix_(rows, cols)]).real)

    def per_site_outflow(self) -> tuple[np.ndarray, np.ndarray]:
        """Net current leaving each AB site: (site indices, sum over u)."""
        return self.ab_indices, np.sum(self.f, axis=1).real


def modular_current(corr: CorrelationMatrix, a: Region, b: Region, c: Region,
                    eps: float = MODULAR_CLIP) -> ModularCurrent:
    """Local current matrix f[v, u] = i <[K_v, K_u]>.

    K_AB is decomposed into symmetrized site slices K_v = (row_v + col_v) / 2
    so that ``sum_v K_v = K_AB`` (likewise for K_BC); the pairwise commutator
    expectations then resum exactly to J(A,B,C).
    """
    _check_disjoint(a, b, c)
    ab = _union_indices(a, b)
    bc = _union_indices(b, c)
    abc = _union_indices(a, b, c)
    m = abc.size
    k_ab = modular_matrix(restrict(corr, region_from_indices(corr.model, ab, "AB")), eps)
    k_bc = modular_matrix(restrict(corr, region_from_indices(corr.model, bc, "BC")), eps)
    p_ab = np.searchsorted(abc, ab)
    p_bc = np.searchsorted(abc, bc)
    av = np.zeros((m, m), dtype=complex)
    bv = np.zeros((m, m), dtype=complex)
    av[np.ix_(p_ab, p_ab)] = k_ab.k
    bv[np.ix_(p_bc, p_bc)] = k_bc.k
    pos_abc = np.searchsorted(corr.indices, abc)
    cm = corr.C[np.ix_(pos_abc, pos_abc)]
    ab_prod = av @ bv
    ba_prod = bv @ av
    a_c = av @ cm
    c_a = cm @ av
    b_c = bv @ cm
    c_b = cm @ bv
    b_c_a = b_c @ av
    a_c_b = a_c @ bv
    f_full = (
        av * b_c.T + ab_prod * cm.T + np.diag(np.diag(b_c_a)) + bv * c_a.T
        - bv.T * a_c - ba_prod.T * cm - np.diag(np.diag(a_c_b)) - av.T * c_b
    )
    f_full *= -0.25j
    f = f_full[np.ix_(p_ab, p_bc)]
    return ModularCurrent(f=f, ab_indices=ab, bc_indices=bc)
