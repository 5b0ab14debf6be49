import numpy as np
import pytest

from htoffoli import routines as R
from htoffoli.circuit import Circuit, Conditioned, DiscardOnOutcome, Macro, MeasureX, MeasureZ, PrepareMagic, PreparePlus, PrepareZero
from htoffoli.pauli import CliffordGate, PauliString
from htoffoli.statevec import (
    QubitCapExceeded,
    StateVector,
    channel_equivalent,
    circuit_unitary,
    fidelity,
    gate_matrix,
    macro_matrix,
    magic_vector,
    pauli_matrix,
    simulate,
    unitary_equivalent,
)

g = CliffordGate
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


@pytest.mark.parametrize(
    "gate, expected",
    [
        (g("H", (0,)), np.array([[1, 1], [1, -1]]) / np.sqrt(2)),
        (g("S", (0,)), np.diag([1, 1j])),
        (g("RZ", (0,), 1), np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)])),
        (g("RY", (0,), 1), (np.eye(2) - 1j * Y) / np.sqrt(2)),
        (g("RY", (0,), 2), -1j * Y),
        (g("CNOT", (0, 1)), np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])),
        (g("CZ", (0, 1)), np.diag([1, 1, 1, -1])),
    ],
)
def test_gate_matrices(gate, expected):
    assert np.allclose(gate_matrix(gate), expected)


def test_magic_vectors():
    h = magic_vector("H")
    assert np.allclose((X + Z) / np.sqrt(2) @ h, h)  # +1 eigenstate of the Hadamard
    t = magic_vector("T")
    assert np.isclose(t[1] / t[0], np.exp(1j * np.pi / 4))
    plus = np.ones(2) / np.sqrt(2)
    zero = np.array([1, 0])
    toffoli = macro_matrix(Macro("TOFFOLI", (0, 1, 2))) @ np.kron(np.kron(plus, plus), zero)
    assert np.allclose(magic_vector("TOFFOLI"), toffoli)


def test_margolus_differs_from_toffoli_by_one_sign():
    diff = macro_matrix(Macro("MARGOLUS", (0, 1, 2))) - macro_matrix(Macro("TOFFOLI", (0, 1, 2)))
    assert np.count_nonzero(np.abs(diff) > 1e-12) == 1 and np.isclose(diff[5, 5], -2)


def test_pauli_matrix_order():
    p = PauliString((3, 7), "XZ", 2)
    assert np.allclose(pauli_matrix(p), -np.kron(X, Z))
    assert np.allclose(pauli_matrix(p, (7, 3)), -np.kron(Z, X))


def test_state_vector_basics():
    s = StateVector.basis((0, 1), (1, 0))
    assert np.allclose(s.vector(), [0, 0, 1, 0])
    assert np.allclose(s.vector((1, 0)), [0, 1, 0, 0])
    s = s.apply(gate_matrix(g("CNOT", (0, 1))), (0, 1))
    assert np.allclose(s.vector(), [0, 0, 0, 1])
    p, rest = s.project(1, 1)
    assert np.isclose(p, 1) and list(rest.qubits) == [0]
    assert s.project(1, 0)[1] is None


def test_bell_measurement_branches():
    c = Circuit.build(
        {0: None, 1: None},
        [PreparePlus(0), PrepareZero(1), g("CNOT", (0, 1)), MeasureZ(0, "m"), Conditioned(("m",), g("X", (1,)))],
        outputs=(1,),
    )
    sim = simulate(c)
    assert len(sim.branches) == 2
    assert np.isclose(sim.acceptance, 1)
    assert all(np.isclose(b.probability, 0.5) for b in sim.branches)
    assert np.allclose(sim.density(), np.diag([1, 0]))


def test_postselection_and_pinning():
    c = Circuit.build(
        {0: None, 1: None},
        [PrepareMagic("H", (0,)), PreparePlus(1), MeasureZ(0, "m"), DiscardOnOutcome("m", 1)],
        outputs=(1,),
    )
    sim = simulate(c)
    assert np.isclose(sim.acceptance, np.cos(np.pi / 8) ** 2)
    assert np.isclose(sim.rejected, np.sin(np.pi / 8) ** 2)
    pinned = simulate(c, outcomes={"m": 1})
    assert pinned.branches == [] and np.isclose(pinned.rejected, np.sin(np.pi / 8) ** 2)


def test_measure_x_on_plus_is_deterministic():
    c = Circuit.build({0: None}, [PreparePlus(0), MeasureX(0, "m")])
    sim = simulate(c)
    assert [b.bits for b in sim.branches] == [{"m": 0}]


def test_qubit_cap():
    c = Circuit.build({q: None for q in range(4)}, [PrepareZero(q) for q in range(4)])
    with pytest.raises(QubitCapExceeded):
        simulate(c, qubit_cap=3)


def test_circuit_unitary_and_equivalence():
    h = Circuit.build({0: None}, [g("H", (0,))], (0,), (0,))
    hzh = Circuit.build({0: None}, [g("H", (0,)), g("Z", (0,)), g("H", (0,))], (0,), (0,))
    x = Circuit.build({0: None}, [g("X", (0,))], (0,), (0,))
    assert np.allclose(circuit_unitary(h) @ circuit_unitary(h), np.eye(2))
    assert unitary_equivalent(hzh, x)
    assert not unitary_equivalent(h, x)
    assert channel_equivalent(hzh, x)


def test_teleporting_injection_preserves_any_input():
    c = R.state_injection()
    assert channel_equivalent(c, Circuit.build({0: None}, [], (0,), (0,)))


def test_fidelity():
    a = np.array([1, 0])
    b = np.array([1, 1]) / np.sqrt(2)
    assert np.isclose(fidelity(a, b), 0.5)
    assert np.isclose(fidelity(b, 1j * b), 1)
