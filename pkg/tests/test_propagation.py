import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from htoffoli import routines as R
from htoffoli.analysis import cross_validate, toffoli_state_vector
from htoffoli.pauli import PauliString
from htoffoli.poly import Polynomial
from htoffoli.propagation import (
    TOFFOLI_CLASSES,
    ErrorPattern,
    IncompleteRecords,
    NonPauliFault,
    acceptance_polynomial,
    class_distribution,
    enumerate_patterns,
    inject_faults,
    joint_error_polynomial,
    marginal_error_polynomials,
    propagate_pattern,
    rejection_polynomial,
    toffoli_distill_distribution,
    toffoli_input_distribution,
    twirl_toffoli_classes,
    valid_order,
)
from htoffoli.statevec import fidelity, magic_vector, pauli_matrix, simulate

P = Polynomial.p()


@pytest.fixture(scope="module")
def h2_records():
    return enumerate_patterns(R.h_to_toffoli(2))


def test_records_cover_every_pattern(h2_records):
    assert [r.pattern.mask for r in h2_records] == list(range(256))
    assert valid_order(h2_records) == 8


def test_acceptance_and_rejection_sum_to_one(h2_records):
    assert acceptance_polynomial(h2_records) + rejection_polynomial(h2_records) == Polynomial([1])


def test_random_patterns_agree_with_state_vector():
    rng = random.Random(7)
    masks = rng.sample(range(256), 24)
    checks = cross_validate(R.h_to_toffoli(2), toffoli_state_vector(), masks)
    assert all(c.consistent for c in checks)


def test_class_distribution_sums_to_acceptance(h2_records):
    dist = class_distribution(h2_records)
    assert sum(dist.values(), Polynomial()) == acceptance_polynomial(h2_records)
    assert dist["III"] == acceptance_polynomial(h2_records) - joint_error_polynomial(h2_records)


def test_truncated_enumeration_matches_full_low_orders():
    c = R.h_to_toffoli(2)
    full = enumerate_patterns(c)
    part = enumerate_patterns(c, max_weight=3)
    assert len(part) == 1 + 8 + 28 + 56 and valid_order(part) == 3
    assert acceptance_polynomial(part) == acceptance_polynomial(full).truncate(3)
    assert joint_error_polynomial(part) == joint_error_polynomial(full).truncate(3)


def test_incomplete_records_are_refused(h2_records):
    with pytest.raises(IncompleteRecords):
        acceptance_polynomial(h2_records[:100])


def test_pattern_cap():
    with pytest.raises(ValueError):
        enumerate_patterns(R.twenty_six_to_six(), cap=20)


def test_parallel_enumeration_agrees():
    c = R.fourteen_to_two()
    assert enumerate_patterns(c, workers=2) == enumerate_patterns(c)


def test_single_input_error_on_code_routine_is_always_caught():
    recs = enumerate_patterns(R.fourteen_to_two(), max_weight=1)
    assert [r.accepted for r in recs] == [True] + [False] * 14


def test_marginals_split_by_letter():
    recs = enumerate_patterns(R.fourteen_to_two())
    per = marginal_error_polynomials(recs)
    assert set(per) == set(R.fourteen_to_two().outputs)
    for q, letters in per.items():
        assert set(letters) <= {"X", "Y", "Z"}


def test_propagation_through_non_clifford_is_refused():
    with pytest.raises(Exception):
        propagate_pattern(R.ten_to_two(), ErrorPattern(1, 10))


def test_inject_faults_places_gates_after_preparations():
    c = inject_faults(R.h_to_toffoli(2), {0: "Y", 3: "Y"})
    faults = [op for op in c.ops if getattr(op, "label", None) == "fault"]
    assert len(faults) == 2 and all(op.kind == "Y" for op in faults)


def test_twirl():
    # Z on the target is dropped, Y on the target becomes X; either way the
    # weight spreads evenly over the four control Z patterns
    dist = {"III": 1 - 3 * P, "IIZ": P, "ZIY": P, "IZX": P}
    out = twirl_toffoli_classes(dist)
    q = P * Fraction(1, 4)
    assert out["III"] == 1 - 3 * P + q
    assert out["ZII"] == out["IZI"] == out["ZZI"] == q
    assert out["IIX"] == out["ZIX"] == out["ZZX"] == q
    assert out["IZX"] == P + q
    assert sum(out.values(), Polynomial()) == Polynomial([1])
    with pytest.raises(ValueError):
        twirl_toffoli_classes({"XII": P})


def test_input_distribution():
    d = toffoli_input_distribution(IIX=P, ZII=2 * P)
    assert d["III"] == 1 - 3 * P
    with pytest.raises(ValueError):
        toffoli_input_distribution(XII=P)


# ---------------------------------------------------------------------------
# Toffoli-state distillation against a state-vector oracle


def _oracle_distribution(routine, dist):
    """Simulate every pair of input classes; weight the outcomes by their probabilities."""
    ideal = toffoli_state_vector()
    outs = routine.outputs
    keys = [k for k, v in dist.items() if not v.is_zero()]
    result = {}
    for combo in itertools.product(keys, repeat=routine.magic_count):
        faulty = inject_faults(routine, {j: k for j, k in enumerate(combo)})
        sim = simulate(faulty)
        if sim.acceptance < 1e-9:
            continue
        assert np.isclose(sim.acceptance, 1)
        found = []
        for cls in TOFFOLI_CLASSES:
            target = pauli_matrix(PauliString(outs, cls), outs) @ ideal
            if all(fidelity(b.state.vector(outs), target) > 1 - 1e-9 for b in sim.branches):
                found.append(cls)
        assert len(found) == 1
        weight = Polynomial([1])
        for k in combo:
            weight = weight * dist[k]
        result[found[0]] = result.get(found[0], Polynomial()) + weight
    return dict(sorted(result.items()))


@pytest.mark.parametrize("variant", ["target", "control-1", "control-2"])
def test_distillation_matches_state_vector(variant):
    routine = R.toffoli_distill(variant)
    dist = toffoli_input_distribution(ZII=P, IZI=P, IIX=P)
    got = {k: v for k, v in toffoli_distill_distribution(dist, routine).items() if not v.is_zero()}
    assert got == _oracle_distribution(routine, dist)


def test_distillation_rejects_unrestricted_classes():
    with pytest.raises(ValueError):
        toffoli_distill_distribution({"XII": P, "III": 1 - P}, R.toffoli_distill("target"))
