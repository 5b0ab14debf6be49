import numpy as np
import pytest
from hypothesis import given, strategies as st

from htoffoli.pauli import CliffordGate, PauliError, PauliString, conjugate, pauli_mul
from htoffoli.statevec import gate_matrix, pauli_matrix

QUBITS = (0, 1, 2)
paulis = st.builds(
    PauliString,
    st.just(QUBITS),
    st.text(alphabet="IXYZ", min_size=3, max_size=3),
    st.integers(0, 3),
)
one_qubit = st.builds(
    lambda kind, q, k: CliffordGate(kind, (q,), k if kind in ("RY", "RZ") else 0),
    st.sampled_from(["H", "S", "X", "Y", "Z", "RY", "RZ"]),
    st.sampled_from(QUBITS),
    st.integers(0, 3),
)
two_qubit = st.builds(
    lambda kind, pair: CliffordGate(kind, pair),
    st.sampled_from(["CNOT", "CZ"]),
    st.permutations(QUBITS).map(lambda p: tuple(p[:2])),
)
gates = st.one_of(one_qubit, two_qubit)


def dense_gate(g: CliffordGate) -> np.ndarray:
    """Embed a gate on (0, 1, 2) with qubit 0 most significant."""
    u = gate_matrix(g)
    n = len(QUBITS)
    rest = [q for q in QUBITS if q not in g.qubits]
    order = list(g.qubits) + rest
    full = np.kron(u, np.eye(2 ** len(rest)))
    perm = [order.index(q) for q in QUBITS]
    t = full.reshape([2] * (2 * n))
    t = t.transpose(perm + [n + i for i in perm])
    return t.reshape(2**n, 2**n)


@given(paulis, paulis)
def test_product_matches_matrices(a, b):
    assert np.allclose(pauli_matrix(pauli_mul(a, b)), pauli_matrix(a) @ pauli_matrix(b))


@given(paulis, paulis)
def test_commutation_matches_matrices(a, b):
    ma, mb = pauli_matrix(a), pauli_matrix(b)
    assert a.commutes_with(b) == np.allclose(ma @ mb, mb @ ma)


@given(paulis, gates)
def test_conjugation_matches_matrices(p, g):
    u = dense_gate(g)
    expected = u @ pauli_matrix(p) @ u.conj().T
    assert np.allclose(pauli_matrix(conjugate(p, g)), expected)


@given(paulis, gates)
def test_inverse_undoes_conjugation(p, g):
    assert conjugate(conjugate(p, g), g.inverse()) == p


def test_parse_and_str():
    p = PauliString.parse("-iXYZ")
    assert p.qubits == (0, 1, 2) and p.letters == "XYZ" and p.phase == 3
    assert str(p) == "-iXYZ"
    assert PauliString.parse("ZZ", qubits=(4, 7))[7] == "Z"


def test_helpers():
    p = PauliString.from_letters((3, 5, 9), {5: "Y"})
    assert p.letters == "IYI" and p.weight == 1 and p.support() == {5: "Y"}
    assert p.restrict((9, 5)).letters == "IY"
    assert PauliString((0,), "X", 2).unsigned().phase == 0


@pytest.mark.parametrize(
    "make",
    [
        lambda: PauliString((0, 0), "XX"),
        lambda: PauliString((0,), "Q"),
        lambda: PauliString((0, 1), "X"),
        lambda: CliffordGate("CNOT", (1, 1)),
        lambda: CliffordGate("T", (0,)),
        lambda: CliffordGate("H", (0,), 1),
        lambda: pauli_mul(PauliString((0,), "X"), PauliString((1,), "X")),
    ],
)
def test_rejects_malformed(make):
    with pytest.raises(PauliError):
        make()


def test_rotation_multiplier_is_reduced():
    assert CliffordGate("RY", (0,), 5).k == 1
    assert CliffordGate("RZ", (0,), 2).is_pauli
