import random

import numpy as np
import pytest

from htoffoli import routines as R
from htoffoli.circuit import MeasureZ, compose
from htoffoli.statevec import channel_equivalent, fidelity, magic_vector, simulate, unitary_equivalent

TOFFOLI = magic_vector("TOFFOLI")


def product(kind: str, n: int) -> np.ndarray:
    v = np.array([1], dtype=complex)
    for _ in range(n):
        v = np.kron(v, magic_vector(kind))
    return v


def assert_outputs(sim, ideal, acceptance=1.0):
    assert sim.branches
    assert np.isclose(sim.acceptance, acceptance)
    for b in sim.branches:
        assert fidelity(b.state.vector(sim.outputs), ideal) > 1 - 1e-10


@pytest.mark.parametrize("o", [2, 3])
def test_h_to_toffoli_fault_free(o):
    assert_outputs(simulate(R.h_to_toffoli(o)), TOFFOLI)


@pytest.mark.parametrize(
    "build",
    [R.toffoli_state_direct, R.toffoli_state_margolus, R.toffoli_state_resource, R.toffoli_state_prep_4H],
)
def test_toffoli_state_preparations(build):
    assert_outputs(simulate(build()), TOFFOLI)


def test_retargeted_preparation_swaps_roles():
    c = R.toffoli_state_retargeted()
    assert_outputs(simulate(c), TOFFOLI)


@pytest.mark.parametrize("which", ["target", "control-1", "control-2"])
def test_toffoli_distillation_fault_free(which):
    assert_outputs(simulate(R.toffoli_distill(which)), TOFFOLI)


def test_ten_to_two_fault_free():
    c = R.ten_to_two()
    # ideal inputs pass every check deterministically
    assert_outputs(simulate(c), product("H", 2))


@pytest.mark.parametrize("build, k", [(R.fourteen_to_two, 2), (R.twenty_six_to_six, 6)])
def test_triorthogonal_routines_fault_free(build, k):
    """Each ideal run lands on |T>^k; sample fixed outcome strings of the gadget measurements."""
    c = build()
    bits = [op.bit for op in c.ops if isinstance(op, MeasureZ)]
    rng = random.Random(11)
    total = 0.0
    for _ in range(4):
        sim = simulate(c, outcomes={b: rng.randint(0, 1) for b in bits})
        for b in sim.branches:
            assert fidelity(b.state.vector(c.outputs), product("T", k)) > 1 - 1e-10
        total += sim.acceptance
    # every pinned branch is accepted with its full weight
    assert np.isclose(total, 4 / 2 ** len(bits))


@pytest.mark.parametrize("matrix, k", [(R.TRIORTHOGONAL_14, 2), (R.TRIORTHOGONAL_26, 6)])
def test_triorthogonal_matrices(matrix, k):
    R.check_triorthogonal(matrix, k)
    assert len(matrix[0]) == 3 * k + 8


def test_check_triorthogonal_rejects_damage():
    rows = [list(r) for r in R.TRIORTHOGONAL_14]
    rows[2][0] ^= 1
    with pytest.raises(ValueError):
        R.check_triorthogonal(rows, 2)


def test_y_rotation_gadget():
    for sign in (1, -1):
        assert channel_equivalent(R.indirect_y_rotation(sign), R.direct_y_rotation(sign))
    assert not channel_equivalent(R.indirect_y_rotation(1), R.direct_y_rotation(-1))


@pytest.mark.parametrize("expansion", ["left", "right"])
def test_margolus_expansions(expansion):
    assert unitary_equivalent(R.margolus_toffoli(expansion), R.margolus_toffoli("macro"))


def test_margolus_is_not_toffoli():
    assert not unitary_equivalent(R.margolus_toffoli("macro"), R.toffoli_macro())


def test_indirect_toffoli_prepared():
    assert channel_equivalent(R.indirect_toffoli("prepared"), R.toffoli_macro())
    with pytest.raises(ValueError):
        R.indirect_toffoli("borrowed")


def test_indirect_toffoli_fed_by_four_state_preparation():
    prep = R.toffoli_state_prep_4H()
    gate = R.indirect_toffoli("input")
    wiring = dict(zip(gate.inputs[3:], prep.outputs))
    assert channel_equivalent(compose(prep, gate, wiring), R.toffoli_macro())


def test_registry_and_lookup():
    d = R.lookup("h-to-toffoli-4")
    assert d.magic_inputs == 16 and d.outputs == 1 and d.output_kind == "TOFFOLI"
    assert R.lookup("h-to-toffoli").circuit.magic_count == 8
    assert R.REGISTRY["twenty-six-to-six"].outputs == 6
    with pytest.raises(KeyError):
        R.lookup("nine-to-one")
    with pytest.raises(TypeError):
        R.REGISTRY["x"] = None


def test_output_roles():
    roles = R.REGISTRY["h-to-toffoli"].output_roles
    assert roles == ("control-1", "control-2", "target")


def test_h_to_toffoli_needs_two_targets():
    with pytest.raises(ValueError):
        R.h_to_toffoli(1)
