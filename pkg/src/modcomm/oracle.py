"""Exact many-body reference computations on small fermionic systems.

Everything here works with dense vectors/matrices in the full Fock space of
``N <= 14`` modes and serves as the independent cross-check for the fast
correlation-matrix engine in :mod:`modcomm.gaussian`.

Conventions
-----------
Basis states are labelled by integers ``b`` in ``[0, 2**N)``.  Mode 0 is the
*leftmost* bit, i.e. mode ``j`` occupies bit ``N - 1 - j`` of ``b``, and the
basis ket is ``|b> = c0^dag^{n_0} c1^dag^{n_1} ... |vac>`` with creation
operators ordered by ascending mode index.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateFillingError, SupportMismatchWarning

MAX_MODES = 14


@dataclass(frozen=True)
class FockState:
    """A pure state with fixed particle number on ``n_modes`` fermion modes."""

    amplitudes: np.ndarray
    n_modes: int
    n_particles: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (2**self.n_modes,):
            raise ValueError("amplitude vector has wrong length")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        occ = _popcount(np.arange(2**self.n_modes))
        if np.any(np.abs(amp[occ != self.n_particles]) > 1e-12):
            raise ValueError("support outside the declared particle-number sector")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.int64)


def _mode_bit(n_modes: int, mode: int) -> int:
    # mode 0 = leftmost bit
    return 1 << (n_modes - 1 - mode)


def _check_modes(modes, n_modes: int) -> np.ndarray:
    m = np.asarray(sorted(modes), dtype=np.int64)
    if m.size == 0:
        raise ValueError("empty mode set")
    if np.any(m < 0) or np.any(m >= n_modes) or np.unique(m).size != m.size:
        raise ValueError("mode indices must be unique and in range")
    return m


def _split_arrays(n_modes: int, sub: np.ndarray):
    """Index arrays for reordering the Fock basis into (sub, rest) registers.

    For every basis integer ``b`` returns ``(a_sub, a_rest, sign)`` where
    ``a_sub``/``a_rest`` are the packed occupations of the two registers (each
    keeping the global ascending mode order) and ``sign`` is the fermionic
    reordering sign: one factor of -1 for every occupied pair ``(x in sub,
    y in rest)`` with ``y < x``.
    """
    b = np.arange(2**n_modes, dtype=np.int64)
    rest = np.array([m for m in range(n_modes) if m not in set(sub.tolist())], dtype=np.int64)
    a_sub = np.zeros_like(b)
    a_rest = np.zeros_like(b)
    inversions = np.zeros_like(b)
    for i, x in enumerate(sub):
        occ_x = (b >> (n_modes - 1 - x)) & 1
        a_sub |= occ_x << (sub.size - 1 - i)
        mask_rest_below = 0
        for y in rest:
            if y < x:
                mask_rest_below |= _mode_bit(n_modes, int(y))
        inversions += occ_x * _popcount(b & mask_rest_below)
    for i, y in enumerate(rest):
        occ_y = (b >> (n_modes - 1 - y)) & 1
        a_rest |= occ_y << (rest.size - 1 - i)
    sign = 1 - 2 * (inversions & 1)
    return a_sub, a_rest, sign


def exact_ground_state(h: np.ndarray, n_particles: int, gap_tol: float = 1e-10) -> FockState:
    """Slater-determinant ground state of ``sum_jk h_jk c_j^dag c_k``.

    Fills the ``n_particles`` lowest single-particle orbitals and expands the
    resulting determinant in the occupation basis.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    if h.shape != (n, n):
        raise ValueError("h must be square")
    if n > MAX_MODES:
        raise ValueError(f"at most {MAX_MODES} modes supported, got {n}")
    if np.max(np.abs(h - h.conj().T)) > 1e-12:
        raise ValueError("h is not Hermitian")
    if not 0 <= n_particles <= n:
        raise ValueError("bad particle number")
    eps, u = np.linalg.eigh(h)
    if 0 < n_particles < n and eps[n_particles] - eps[n_particles - 1] <= gap_tol:
        raise DegenerateFillingError(
            f"many-body ground state degenerate in the {n_particles}-particle sector "
            f"(orbital gap {eps[n_particles] - eps[n_particles - 1]:.3e})"
        )
    occ = u[:, :n_particles]
    amp = np.zeros(2**n, dtype=complex)
    for subset in combinations(range(n), n_particles):
        b = 0
        for j in subset:
            b |= _mode_bit(n, j)
        amp[b] = np.linalg.det(occ[list(subset), :]) if n_particles else 1.0
    amp /= np.linalg.norm(amp)
    return FockState(amplitudes=amp, n_modes=n, n_particles=n_particles)


def reduce_density(state: FockState, modes) -> np.ndarray:
    """Reduced density matrix on ``modes`` (fermionic signs included)."""
    sub = _check_modes(modes, state.n_modes)
    a_sub, a_rest, sign = _split_arrays(state.n_modes, sub)
    n_rest = state.n_modes - sub.size
    psi = np.zeros((2**sub.size, 2**n_rest), dtype=complex)
    psi[a_sub, a_rest] = sign * state.amplitudes
    rho = psi @ psi.conj().T
    return rho


def embed_operator(op: np.ndarray, modes, ambient) -> np.ndarray:
    """Embed an operator on ``modes`` into the Fock space of ``ambient``.

    Tensors the identity on the remaining ambient modes, with the fermionic
    reordering signs of the fixed (sorted ascending) mode ordering.
    """
    modes = _check_modes(modes, max(ambient) + 1)
    ambient = _check_modes(ambient, max(ambient) + 1)
    if not set(modes.tolist()) <= set(ambient.tolist()):
        raise ValueError("modes must be a subset of ambient")
    m = ambient.size
    positions = np.searchsorted(ambient, modes)
    a_sub, a_rest, sign = _split_arrays(m, positions)
    if op.shape != (2 ** modes.size,) * 2:
        raise ValueError("operator has wrong dimension")
    big = op[np.ix_(a_sub, a_sub)] * (a_rest[:, None] == a_rest[None, :])
    big *= sign[:, None] * sign[None, :]
    return big


def entropy_of_density(rho: np.ndarray, tol: float = 1e-12) -> float:
    """Von Neumann entropy -Tr(rho ln rho) in nats."""
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > tol]
    return float(-np.sum(lam * np.log(lam)))


def modular_hamiltonian(rho: np.ndarray, support_tol: float = 1e-12) -> np.ndarray:
    """K = -ln(rho) on the support of rho, extended by zero elsewhere."""
    lam, v = np.linalg.eigh(rho)
    logs = np.where(lam > support_tol, -np.log(np.clip(lam, support_tol, None)), 0.0)
    k = (v * logs) @ v.conj().T
    return 0.5 * (k + k.conj().T)


def support_projector(rho: np.ndarray, support_tol: float = 1e-12) -> np.ndarray:
    lam, v = np.linalg.eigh(rho)
    keep = lam > support_tol
    vk = v[:, keep]
    return vk @ vk.conj().T


def exact_entropy(state: FockState, modes) -> float:
    return entropy_of_density(reduce_density(state, modes))


def exact_cond_mutual_info(state: FockState, a, b, c) -> float:
    """I(A:C|B) = S_AB + S_BC - S_B - S_ABC from exact reduced states."""
    _assert_disjoint(a, b, c)
    s_ab = exact_entropy(state, sorted(set(a) | set(b)))
    s_bc = exact_entropy(state, sorted(set(b) | set(c)))
    s_b = exact_entropy(state, sorted(b))
    s_abc = exact_entropy(state, sorted(set(a) | set(b) | set(c)))
    return s_ab + s_bc - s_b - s_abc


def _assert_disjoint(*mode_sets):
    seen = set()
    for ms in mode_sets:
        s = set(int(x) for x in ms)
        if seen & s:
            raise ValueError(f"mode sets overlap: {sorted(seen & s)}")
        seen |= s


def exact_modular_commutator(state: FockState, a, b, c, support_tol: float = 1e-12) -> float:
    """i Tr(rho_ABC [K_AB, K_BC]) with K = -ln(rho) on the support.

    The modular Hamiltonians are embedded into the Fock space of the sorted
    union ABC by tensoring the identity on the missing factor.
    """
    if len(a) == 0 or len(b) == 0 or len(c) == 0:
        return 0.0
    _assert_disjoint(a, b, c)
    ab = sorted(set(a) | set(b))
    bc = sorted(set(b) | set(c))
    abc = sorted(set(a) | set(b) | set(c))
    if len(abc) > MAX_MODES:
        raise ValueError(f"|ABC| = {len(abc)} exceeds the {MAX_MODES}-mode limit")
    rho_abc = reduce_density(state, abc)
    k_ab = modular_hamiltonian(reduce_density(state, ab), support_tol)
    k_bc = modular_hamiltonian(reduce_density(state, bc), support_tol)
    k_ab_big = embed_operator(k_ab, ab, abc)
    k_bc_big = embed_operator(k_bc, bc, abc)
    for k_small, region, label in ((k_ab, ab, "AB"), (k_bc, bc, "BC")):
        proj = embed_operator(support_projector(reduce_density(state, region), support_tol), region, abc)
        leak = float(np.real(np.trace(rho_abc) - np.trace(rho_abc @ proj)))
        if leak > 1e-10:
            warnings.warn(
                f"state weight {leak:.3e} outside support of K_{label}",
                SupportMismatchWarning,
            )
    comm = k_ab_big @ k_bc_big - k_bc_big @ k_ab_big
    val = 1j * np.trace(rho_abc @ comm)
    return float(val.real)


def correlation_matrix(state: FockState) -> np.ndarray:
    """Two-point function ``M[j, k] = <c_j^dag c_k>`` from the amplitudes.

    Computed directly with bit operations, independently of any Slater
    structure, so it can calibrate the correlation-matrix engine.
    """
    n = state.n_modes
    amp = state.amplitudes
    b = np.arange(2**n, dtype=np.int64)
    m = np.zeros((n, n), dtype=complex)
    for j in range(n):
        bit_j = _mode_bit(n, j)
        occ_j = (b & bit_j) != 0
        m[j, j] = np.sum(np.abs(amp[occ_j]) ** 2)
        for k in range(n):
            if k == j:
                continue
            bit_k = _mode_bit(n, k)
            # <b'| c_j^dag c_k |b> needs k occupied and j empty in b
            src = ((b & bit_k) != 0) & ((b & bit_j) == 0)
            bs = b[src]
            # sign from anticommuting c_k, then c_j^dag, past lower modes
            mask_below_k = ((1 << n) - 1) & ~((bit_k << 1) - 1)  # modes < k
            mask_below_j = ((1 << n) - 1) & ~((bit_j << 1) - 1)  # modes < j
            sgn_k = 1 - 2 * (_popcount(bs & mask_below_k) & 1)
            mid = bs & ~bit_k
            sgn_j = 1 - 2 * (_popcount(mid & mask_below_j) & 1)
            tgt = mid | bit_j
            m[j, k] = np.sum(amp[tgt].conj() * sgn_k * sgn_j * amp[bs])
    return m


def model_hash(h: np.ndarray) -> str:
    """Short stable identifier of a single-particle Hamiltonian."""
    h = np.ascontiguousarray(np.asarray(h, dtype=complex))
    return hashlib.sha256(h.tobytes()).hexdigest()[:16]


def write_golden(path, rows) -> None:
    """Write golden rows ``(model_hash, regions, quantity, value)`` as text."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# model_hash\tregions\tquantity\tvalue\n")
        for mh, regions, quantity, value in rows:
            fh.write(f"{mh}\t{regions}\t{quantity}\t{value!r}\n")


def read_golden(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            mh, regions, quantity, value = line.split("\t")
            rows.append((mh, regions, quantity, float(value)))
    return rows
