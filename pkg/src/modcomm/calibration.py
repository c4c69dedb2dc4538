"""Cross-validation of the correlation-matrix engine against the exact oracle.

Random few-mode Hamiltonians are solved both ways: exactly in Fock space and
through the Gaussian formulas.  Entropies, conditional mutual information and
modular commutators must agree to tight tolerance; this pins down the
sign/transpose convention of the fast engine (a deliberately transposed
correlation matrix makes the suite fail loudly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gaussian, oracle
from .lattice import LatticeModel, Site
from .regions import region_from_indices


def random_hermitian_model(rng: np.random.Generator, n_modes: int,
                           gap_tol: float = 1e-6) -> LatticeModel:
    """Random dense complex Hermitian Hamiltonian wrapped as a chain model.

    Resamples until the half-filling orbital gap is comfortably open.
    """
    if n_modes % 2 != 0:
        raise ValueError("calibration models use half filling: even mode count")
    while True:
        a = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
        h = a + a.conj().T
        e = np.linalg.eigvalsh(h)
        if e[n_modes // 2] - e[n_modes // 2 - 1] > gap_tol:
            break
    sites = [Site(j, (float(j), 0.0), "a", (j, 0)) for j in range(n_modes)]
    return LatticeModel(sites, h, {"model": "random", "bond_length": 1.0})


def random_tripartition(rng: np.random.Generator, n_modes: int):
    """Three disjoint nonempty mode sets, not necessarily covering everything."""
    modes = rng.permutation(n_modes)
    max_total = n_modes
    while True:
        sizes = 1 + rng.integers(0, max(1, n_modes // 3), size=3)
        if sizes.sum() <= max_total:
            break
    a = np.sort(modes[: sizes[0]])
    b = np.sort(modes[sizes[0]: sizes[0] + sizes[1]])
    c = np.sort(modes[sizes[0] + sizes[1]: sizes.sum()])
    return a, b, c


@dataclass(frozen=True)
class CalibrationCase:
    n_modes: int
    sizes: tuple[int, int, int]
    err_entropy: float
    err_cmi: float
    err_j: float
    err_antisymmetry: float
    err_purity_complement: float
    ssa_violation: float
    passed: bool


@dataclass(frozen=True)
class CalibrationReport:
    cases: tuple[CalibrationCase, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def worst(self) -> dict:
        return {
            "entropy": max(c.err_entropy for c in self.cases),
            "cmi": max(c.err_cmi for c in self.cases),
            "j": max(c.err_j for c in self.cases),
            "antisymmetry": max(c.err_antisymmetry for c in self.cases),
            "purity_complement": max(c.err_purity_complement for c in self.cases),
            "ssa": max(c.ssa_violation for c in self.cases),
        }

    def summary_lines(self):
        yield f"calibration cases: {len(self.cases)}  tolerance: {self.tol:g}"
        for name, val in self.worst.items():
            yield f"  worst {name:18s} {val:.3e}"
        yield f"  result: {'PASS' if self.passed else 'FAIL'}"


def run_calibration_suite(n_cases: int = 200, seed: int = 20240817,
                          min_modes: int = 4, max_modes: int = 10,
                          tol: float = 1e-8,
                          flip_convention: bool = False) -> CalibrationReport:
    """Compare Gaussian-engine S, I(A:C|B) and J against the exact oracle.

    ``flip_convention`` deliberately transposes the correlation matrix before
    the Gaussian computation (a debugging negative control: the suite must
    then fail on every case with appreciable J).
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    even = [m for m in range(min_modes, max_modes + 1) if m % 2 == 0]
    cases = []
    for _ in range(n_cases):
        n_modes = int(rng.choice(even))
        model = random_hermitian_model(rng, n_modes)
        a_idx, b_idx, c_idx = random_tripartition(rng, n_modes)
        corr = gaussian.ground_state_correlations(model)
        if flip_convention:
            corr = gaussian.CorrelationMatrix(C=corr.C.T.copy(), model=model,
                                              indices=corr.indices)
        state = oracle.exact_ground_state(model.h, n_modes // 2)

        ra = region_from_indices(model, a_idx, "A")
        rb = region_from_indices(model, b_idx, "B")
        rc = region_from_indices(model, c_idx, "C")
        abc = np.concatenate([a_idx, b_idx, c_idx])
        r_abc = region_from_indices(model, abc, "ABC")

        s_fast = gaussian.entanglement_entropy(corr, r_abc)
        s_exact = oracle.exact_entropy(state, abc)
        cmi_fast = gaussian.cond_mutual_info(corr, ra, rb, rc)
        cmi_exact = oracle.exact_cond_mutual_info(state, a_idx, b_idx, c_idx)
        j_fast = gaussian.modular_commutator(corr, ra, rb, rc)
        j_exact = oracle.exact_modular_commutator(state, a_idx, b_idx, c_idx)
        j_rev = gaussian.modular_commutator(corr, rc, rb, ra)

        comp = region_from_indices(
            model, np.setdiff1d(np.arange(n_modes), abc), "rest")
        if comp.size:
            purity_err = abs(s_fast - gaussian.entanglement_entropy(corr, comp))
        else:
            purity_err = abs(s_fast)

        case = CalibrationCase(
            n_modes=n_modes,
            sizes=(ra.size, rb.size, rc.size),
            err_entropy=abs(s_fast - s_exact),
            err_cmi=abs(cmi_fast - cmi_exact),
            err_j=abs(j_fast - j_exact),
            err_antisymmetry=abs(j_fast + j_rev),
            err_purity_complement=purity_err,
            ssa_violation=max(0.0, -cmi_fast),
            passed=False,
        )
        ok = (
            case.err_entropy <= tol
            and case.err_cmi <= tol
            and case.err_j <= tol
            and case.err_antisymmetry <= tol
            and case.err_purity_complement <= tol
            and case.ssa_violation <= 1e-8
        )
        cases.append(CalibrationCase(**{**case.__dict__, "passed": ok}))
    return CalibrationReport(cases=tuple(cases), tol=tol)


def reference_chain_model(n_modes: int = 6) -> LatticeModel:
    """Open chain with hopping -1, the documented real reference system."""
    h = np.zeros((n_modes, n_modes), dtype=complex)
    for j in range(n_modes - 1):
        h[j, j + 1] = h[j + 1, j] = -1.0
    sites = [Site(j, (float(j), 0.0), "a", (j, 0)) for j in range(n_modes)]
    return LatticeModel(sites, h, {"model": "chain", "bond_length": 1.0})


def reference_complex_model(n_modes: int = 8) -> LatticeModel:
    """Deterministic chirality-breaking chain: complex NN plus imaginary NNN.

    Small reference system with a nonzero modular commutator, used for the
    frozen golden values (a real Hamiltonian has J identically zero).
    """
    h = np.zeros((n_modes, n_modes), dtype=complex)
    for j in range(n_modes - 1):
        t = np.exp(1j * 0.4 * (j + 1))
        h[j, j + 1] = t
        h[j + 1, j] = np.conj(t)
    for j in range(n_modes - 2):
        h[j, j + 2] = 0.5j
        h[j + 2, j] = -0.5j
    sites = [Site(j, (float(j), 0.0), "a", (j, 0)) for j in range(n_modes)]
    return LatticeModel(sites, h, {"model": "complex_chain", "bond_length": 1.0})


GOLDEN_REGIONS = {
    "chain6": ((0, 1), (2, 3), (4, 5)),
    "complex8": ((0, 1), (2, 3), (4, 5)),
}


def golden_rows():
    """Oracle-computed reference values for the two documented small systems."""
    rows = []
    for name, builder, n_modes in (
        ("chain6", reference_chain_model, 6),
        ("complex8", reference_complex_model, 8),
    ):
        model = builder(n_modes)
        state = oracle.exact_ground_state(model.h, n_modes // 2)
        a_idx, b_idx, c_idx = GOLDEN_REGIONS[name]
        mh = oracle.model_hash(model.h)
        regions = "A=" + ",".join(map(str, a_idx)) + ";B=" + ",".join(map(str, b_idx)) \
            + ";C=" + ",".join(map(str, c_idx))
        rows.append((mh, regions, "S_AB", oracle.exact_entropy(state, a_idx + b_idx)))
        rows.append((mh, regions, "CMI", oracle.exact_cond_mutual_info(state, a_idx, b_idx, c_idx)))
        rows.append((mh, regions, "J", oracle.exact_modular_commutator(state, a_idx, b_idx, c_idx)))
    return rows
