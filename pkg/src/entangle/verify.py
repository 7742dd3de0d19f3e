"""Randomized checks of LU invariance, additivity and LOCC monotonicity."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .measures import EntanglementCombination, ce
from .state import (
    DEFAULT_TOLERANCES,
    PartySubset,
    PureState,
    SystemShape,
    Tolerances,
    nontrivial_subsets,
    subset_entropy,
    tensor_product,
)

PROPERTY_TOL = 1e-8
MIN_PROBABILITY = 1e-12


@dataclass(frozen=True)
class MeasurementOutcome:
    label: int
    probability: float
    state: PureState


@dataclass(frozen=True)
class PropertyCheckResult:
    """Outcome of one randomized property check.

    ``components`` holds the max violation of each sub-check that is
    reported on its own (e.g. the per-subset entropy inequality and CE
    monotonicity for LOCC).  ``passed`` requires every component, and any
    structural condition such as equal EC, to hold.
    """

    name: str
    trials: int
    max_violation: float
    passed: bool
    seed: int
    tolerance: float = PROPERTY_TOL
    components: dict = field(default_factory=dict)
    notes: tuple = ()

    def component_passed(self, key: str) -> bool:
        return self.components[key] <= self.tolerance


class LocalUnitarySet:
    """One unitary per party; checked for unitarity on construction."""

    def __init__(self, unitaries: Sequence[np.ndarray]):
        us = []
        for k, u in enumerate(unitaries):
            u = np.asarray(u, dtype=np.complex128)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise DimensionMismatch(f"unitary for party {k + 1} is not square")
            err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
            if err > 1e-10:
                raise ValueError(f"matrix for party {k + 1} is not unitary (error {err:.2e})")
            us.append(u)
        self.unitaries = tuple(us)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.unitaries)

    def __len__(self):
        return len(self.unitaries)

    def __getitem__(self, k):
        return self.unitaries[k]


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pure_state(shape, seed) -> PureState:
    """Haar-random pure state; standard complex Gaussian amplitudes, normalized."""
    shape = shape if isinstance(shape, SystemShape) else SystemShape(tuple(shape))
    rng = _rng(seed)
    d = shape.total_dim
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(shape, v / np.linalg.norm(v))


def random_local_unitary(dim: int, seed) -> np.ndarray:
    """QR of a complex Gaussian matrix with the diagonal phases of R removed."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_local_unitaries(dims: Sequence[int], seed) -> LocalUnitarySet:
    rng = _rng(seed)
    return LocalUnitarySet([random_local_unitary(d, rng) for d in dims])


def _apply_on_party(tensor: np.ndarray, u: np.ndarray, k: int) -> np.ndarray:
    out = np.tensordot(u, tensor, axes=([1], [k]))
    return np.moveaxis(out, 0, k)


def apply_local_unitaries(state: PureState, us: LocalUnitarySet) -> PureState:
    if us.dims != state.dims:
        raise DimensionMismatch(f"unitary dims {list(us.dims)} do not match state dims {list(state.dims)}")
    t = state.tensor
    for k, u in enumerate(us.unitaries):
        t = _apply_on_party(t, u, k)
    return PureState(state.shape, t.reshape(-1))


def locc_measure(state: PureState, party: int, basis: np.ndarray) -> list[MeasurementOutcome]:
    """Projective measurement of one party in the basis given by the columns of ``basis``.

    The measured party stays in the system, collapsed onto the outcome's
    basis vector.  Outcomes below ``MIN_PROBABILITY`` are dropped.
    """
    basis = np.asarray(basis, dtype=np.complex128)
    d = state.dims[party]
    if basis.shape != (d, d):
        raise DimensionMismatch(f"basis must be {d}x{d} for party {party + 1}, got {basis.shape}")
    # rows: <b_i| contracted onto the party axis
    amps = np.tensordot(basis.conj().T, state.tensor, axes=([1], [party]))
    outcomes = []
    for i in range(d):
        rest = amps[i]
        p = float(np.vdot(rest, rest).real)
        if p < MIN_PROBABILITY:
            continue
        rest = rest / np.sqrt(p)
        post = np.multiply.outer(basis[:, i], rest)
        post = np.moveaxis(post, 0, party)
        outcomes.append(MeasurementOutcome(i, p, PureState(state.shape, post.reshape(-1))))
    return outcomes


def _subset_entropies(state: PureState) -> np.ndarray:
    return np.array([subset_entropy(state, s) for s in nontrivial_subsets(state.n)])


def _trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def lu_invariance_check(
    state: PureState, trials: int, seed: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> PropertyCheckResult:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = ce(state, tol)
    base_ec = base.ec.canonical()
    base_s = _subset_entropies(state) if state.n > 1 else np.zeros(0)
    ce_viol = 0.0
    s_viol = 0.0
    ec_mismatch = 0
    for rng in _trial_rngs(seed, trials):
        us = random_local_unitaries(state.dims, rng)
        rotated = apply_local_unitaries(state, us)
        report = ce(rotated, tol)
        ce_viol = max(ce_viol, abs(report.ce - base.ce))
        if state.n > 1:
            s_viol = max(s_viol, float(np.max(np.abs(_subset_entropies(rotated) - base_s))))
        if report.ec.canonical() != base_ec:
            ec_mismatch += 1
    components = {"ce": ce_viol, "subset_entropy": s_viol}
    worst = max(components.values())
    notes = (f"ec_mismatches={ec_mismatch}",)
    return PropertyCheckResult(
        "lu", trials, worst, worst <= PROPERTY_TOL and ec_mismatch == 0, seed,
        components=components, notes=notes,
    )


def shifted_union(a: EntanglementCombination, b: EntanglementCombination) -> EntanglementCombination:
    """EC of ``a (x) b`` predicted from the ECs of its factors, canonical."""
    n = a.n + b.n
    blocks = [PartySubset(x.mask, n) for x in a.blocks]
    blocks += [PartySubset(x.mask << a.n, n) for x in b.blocks]
    return EntanglementCombination(tuple(blocks), n).canonical()


def additivity_check(
    a: PureState, b: PureState, tol: Tolerances = DEFAULT_TOLERANCES, seed: int = 0
) -> PropertyCheckResult:
    joint = tensor_product(a, b)
    ra, rb, rj = ce(a, tol), ce(b, tol), ce(joint, tol)
    violation = abs(rj.ce - ra.ce - rb.ce)
    ec_ok = rj.ec.canonical() == shifted_union(ra.ec, rb.ec)
    notes = (f"ce(a)={ra.ce:.12g}", f"ce(b)={rb.ce:.12g}", f"ce(a*b)={rj.ce:.12g}", f"ec_consistent={ec_ok}")
    return PropertyCheckResult(
        "additivity", 1, violation, violation <= PROPERTY_TOL and ec_ok, seed,
        components={"ce": violation}, notes=notes,
    )


def _measure_tree(state: PureState, rounds: int, rng: np.random.Generator):
    """Leaves ``(probability, state)`` after ``rounds`` adaptive measurements."""
    leaves = [(1.0, state)]
    for _ in range(rounds):
        nxt = []
        for p, psi in leaves:
            party = int(rng.integers(psi.n))
            basis = random_local_unitary(psi.dims[party], rng)
            for out in locc_measure(psi, party, basis):
                nxt.append((p * out.probability, out.state))
        leaves = nxt
    return leaves


def locc_monotonicity_check(
    state: PureState,
    rounds: int,
    trials: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> PropertyCheckResult:
    """Expected partial entropies and expected CE must not grow under measurement.

    The per-subset inequality (``lemma2``) and the CE inequality
    (``ce_monotonicity``) are tracked as separate components.
    """
    if rounds < 1 or trials < 1:
        raise ValueError("rounds and trials must be >= 1")
    base_ce = ce(state, tol).ce
    base_s = _subset_entropies(state) if state.n > 1 else np.zeros(0)
    lemma_viol = 0.0
    ce_viol = 0.0
    prob_err = 0.0
    for rng in _trial_rngs(seed, trials):
        leaves = _measure_tree(state, rounds, rng)
        prob_err = max(prob_err, abs(sum(p for p, _ in leaves) - 1.0))
        expected_s = np.zeros_like(base_s)
        expected_ce = 0.0
        for p, phi in leaves:
            if state.n > 1:
                expected_s += p * _subset_entropies(phi)
            expected_ce += p * ce(phi, tol).ce
        if state.n > 1:
            lemma_viol = max(lemma_viol, float(np.max(expected_s - base_s)), 0.0)
        ce_viol = max(ce_viol, expected_ce - base_ce, 0.0)
    components = {"lemma2": lemma_viol, "ce_monotonicity": ce_viol}
    worst = max(components.values())
    return PropertyCheckResult(
        "locc", trials, worst, worst <= PROPERTY_TOL, seed,
        components=components, notes=(f"rounds={rounds}", f"max_probability_error={prob_err:.3e}"),
    )
