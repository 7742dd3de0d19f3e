import numpy as np
import pytest

from conftest import epr, ghz, random_state
from entangle.errors import DimensionMismatch
from entangle.measures import ce, entanglement_combination
from entangle.state import PartySubset, basis_state, subset_entropy, tensor_product
from entangle.verify import (
    LocalUnitarySet,
    additivity_check,
    apply_local_unitaries,
    locc_measure,
    locc_monotonicity_check,
    lu_invariance_check,
    random_local_unitary,
    random_pure_state,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]])


def test_random_pure_state_deterministic():
    a = random_pure_state((2, 3, 2), 11)
    b = random_pure_state((2, 3, 2), 11)
    assert a == b
    assert a != random_pure_state((2, 3, 2), 12)


def test_random_pure_state_norm():
    worst = max(abs(np.linalg.norm(random_pure_state((2, 2), s).amplitudes) - 1) for s in range(1000))
    assert worst <= 1e-12


def test_random_three_qubit_states_are_fully_entangled():
    for seed in range(100):
        assert entanglement_combination(random_pure_state((2, 2, 2), seed)).is_fully_entangled()


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_random_unitary_is_unitary(dim):
    u = random_local_unitary(dim, 3)
    assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) <= 1e-10


def test_random_unitary_seeds_differ():
    assert not np.allclose(random_local_unitary(2, 0), random_local_unitary(2, 1))
    with pytest.raises(ValueError):
        random_local_unitary(1, 0)


def test_unitary_round_trip(rng):
    s = random_state((2, 3), rng)
    us = [random_local_unitary(2, 1), random_local_unitary(3, 2)]
    there = apply_local_unitaries(s, LocalUnitarySet(us))
    back = apply_local_unitaries(there, LocalUnitarySet([u.conj().T for u in us]))
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) <= 1e-10


def test_local_unitary_set_validation():
    with pytest.raises(ValueError):
        LocalUnitarySet([np.array([[1, 1], [0, 1]])])
    with pytest.raises(DimensionMismatch):
        LocalUnitarySet([np.ones((2, 3))])
    with pytest.raises(DimensionMismatch):
        apply_local_unitaries(epr(), LocalUnitarySet([np.eye(2)]))


def test_apply_local_unitaries_examples():
    s = ghz()
    assert apply_local_unitaries(s, LocalUnitarySet([np.eye(2)] * 3)) == s
    flipped = apply_local_unitaries(basis_state([0, 0]), LocalUnitarySet([X, np.eye(2)]))
    assert flipped.fidelity(basis_state([1, 0])) == pytest.approx(1.0, abs=1e-15)
    u = random_local_unitary(2, 9)
    rotated = apply_local_unitaries(epr(), LocalUnitarySet([u, u.conj()]))
    assert subset_entropy(rotated, PartySubset.of([0], 2)) == pytest.approx(1.0, abs=1e-10)
    # U (x) U* leaves the EPR state itself unchanged
    assert rotated.fidelity(epr()) == pytest.approx(1.0, abs=1e-12)


def test_lu_check_examples():
    r = lu_invariance_check(ghz(), 50, 1)
    assert r.passed and r.max_violation <= 1e-8
    r = lu_invariance_check(basis_state([0, 0, 0]), 5, 1)
    assert r.passed and r.components["ce"] == 0.0
    r = lu_invariance_check(random_pure_state((2,) * 4, 5), 50, 2)
    assert r.passed


def test_lu_check_deterministic():
    s = random_pure_state((2, 2, 2), 4)
    assert lu_invariance_check(s, 5, 3) == lu_invariance_check(s, 5, 3)


def test_additivity_examples():
    r = additivity_check(epr(), ghz())
    assert r.passed
    assert "ce(a*b)=4" in r.notes[2]
    s = random_pure_state((2, 2, 2), 1)
    r = additivity_check(basis_state([0]), s)
    assert r.passed
    assert ce(tensor_product(basis_state([0]), s)).ce == pytest.approx(ce(s).ce, abs=1e-12)
    for seed in range(5):
        assert additivity_check(random_pure_state((2, 2), seed), random_pure_state((2, 2), seed + 100)).passed


def test_locc_measure_epr():
    outs = locc_measure(epr(), 0, np.eye(2))
    assert [o.label for o in outs] == [0, 1]
    assert [o.probability for o in outs] == pytest.approx([0.5, 0.5], abs=1e-15)
    assert outs[0].state.fidelity(basis_state([0, 0])) == pytest.approx(1.0)
    assert outs[1].state.fidelity(basis_state([1, 1])) == pytest.approx(1.0)


def test_locc_measure_product_state():
    s = basis_state([0, 0])
    outs = locc_measure(s, 0, np.eye(2))
    assert len(outs) == 1
    assert outs[0].probability == 1.0
    assert outs[0].state == s


def test_locc_measure_ghz_hadamard():
    outs = locc_measure(ghz(), 0, H)
    assert [o.probability for o in outs] == pytest.approx([0.5, 0.5], abs=1e-15)
    for o in outs:
        assert subset_entropy(o.state, PartySubset.of([1], 3)) == pytest.approx(1.0, abs=1e-12)
        assert [b.parties for b in entanglement_combination(o.state).canonical().blocks] == [(0,), (1, 2)]


def test_locc_measure_completeness(rng):
    s = random_state((3, 2, 2), rng)
    outs = locc_measure(s, 0, random_local_unitary(3, 0))
    assert abs(sum(o.probability for o in outs) - 1) <= 1e-10
    for o in outs:
        assert abs(np.linalg.norm(o.state.amplitudes) - 1) <= 1e-12
    with pytest.raises(DimensionMismatch):
        locc_measure(s, 0, np.eye(2))


def test_locc_expected_ce_after_epr_measurement():
    outs = locc_measure(epr(), 0, np.eye(2))
    after = sum(o.probability * ce(o.state).ce for o in outs)
    assert after == 0.0
    assert ce(epr()).ce == pytest.approx(1.0)


def test_locc_check_examples():
    r = locc_monotonicity_check(basis_state([0, 1]), 1, 5, 0)
    assert r.passed and r.components["ce_monotonicity"] == 0.0
    assert r.max_violation <= 1e-12
    r = locc_monotonicity_check(ghz(), 1, 100, 0)
    assert r.component_passed("lemma2")
    assert r.components["lemma2"] <= 1e-8
    r = locc_monotonicity_check(random_pure_state((2, 2, 2, 2), 8), 3, 10, 1)
    assert r.passed


def test_locc_check_deterministic():
    s = random_pure_state((2, 2, 2), 4)
    assert locc_monotonicity_check(s, 2, 4, 9) == locc_monotonicity_check(s, 2, 4, 9)


def test_bad_arguments():
    with pytest.raises(ValueError):
        lu_invariance_check(epr(), 0, 0)
    with pytest.raises(ValueError):
        locc_monotonicity_check(epr(), 0, 1, 0)
