"""Dense state-vector simulation with full measurement branching.

This is the ground-truth oracle for every circuit identity and for the Pauli
propagation engine.  Qubits are allocated when prepared and removed when
measured, so only the live register is ever held in memory.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuit import (
    Circuit,
    Conditioned,
    Decode,
    DiscardOnOutcome,
    Macro,
    MeasureX,
    MeasureZ,
    PrepareMagic,
    PreparePlus,
    PrepareZero,
)
from .pauli import CliffordGate, PauliString

DEFAULT_QUBIT_CAP = 14
_PRUNE = 1e-14

_C8, _S8 = np.cos(np.pi / 8), np.sin(np.pi / 8)
_SQ2 = np.sqrt(0.5)

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2


def _rotation(letter: str, angle: float) -> np.ndarray:
    """exp(-i angle/2 P)."""
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * PAULI[letter]


def _controlled(u: np.ndarray) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = u
    return m


def gate_matrix(g: CliffordGate) -> np.ndarray:
    """Matrix of ``g`` with operand 0 as the most significant bit."""
    if g.kind == "H":
        return HADAMARD
    if g.kind == "S":
        return np.diag([1, 1j]).astype(complex)
    if g.kind in ("X", "Y", "Z"):
        return PAULI[g.kind]
    if g.kind == "RY":
        return _rotation("Y", g.k * np.pi / 2)
    if g.kind == "RZ":
        return _rotation("Z", g.k * np.pi / 2)
    if g.kind == "CNOT":
        return _controlled(PAULI["X"])
    if g.kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    raise ValueError(f"no matrix for {g.kind}")


def macro_matrix(m: Macro) -> np.ndarray:
    if m.name == "TOFFOLI":
        u = np.eye(8, dtype=complex)
        u[6:, 6:] = PAULI["X"]
        return u
    if m.name == "CCZ":
        return np.diag([1] * 7 + [-1]).astype(complex)
    if m.name == "MARGOLUS":
        u = macro_matrix(Macro("TOFFOLI", m.qubits))
        u[5, 5] = -1  # |c1 c2 t> = |101>
        return u
    if m.name == "YROT8":
        return _rotation("Y", m.sign * np.pi / 4)
    if m.name == "ZROT8":
        return _rotation("Z", m.sign * np.pi / 4)
    raise ValueError(f"no matrix for macro {m.name}")


def magic_vector(kind: str) -> np.ndarray:
    if kind == "H":
        return np.array([_C8, _S8], dtype=complex)
    if kind == "T":
        return np.array([1, np.exp(1j * np.pi / 4)], dtype=complex) * _SQ2
    if kind == "TOFFOLI":
        v = np.zeros(8, dtype=complex)
        v[[0b000, 0b100, 0b010, 0b111]] = 0.5
        return v
    raise ValueError(f"unknown magic state {kind!r}")


def pauli_matrix(p: PauliString, order: Sequence[int] | None = None) -> np.ndarray:
    """Dense matrix of ``p`` (phase included) with ``order[0]`` most significant."""
    order = p.qubits if order is None else tuple(order)
    m = np.array([[1]], dtype=complex)
    for q in order:
        m = np.kron(m, PAULI[p[q]])
    return (1j ** p.phase) * m


class QubitCapExceeded(RuntimeError):
    pass


@dataclass
class StateVector:
    """Amplitudes as an n-axis tensor; axis j holds qubit ``qubits[j]``."""

    qubits: list[int]
    tensor: np.ndarray

    @classmethod
    def from_vector(cls, qubits: Sequence[int], vec: np.ndarray) -> StateVector:
        qubits = list(qubits)
        vec = np.asarray(vec, dtype=complex)
        if vec.size != 2 ** len(qubits):
            raise ValueError("vector length does not match qubit count")
        return cls(qubits, vec.reshape((2,) * len(qubits)) if qubits else vec.reshape(()))

    @classmethod
    def product(cls, factors: Mapping[int, np.ndarray]) -> StateVector:
        state = cls([], np.array(1, dtype=complex))
        for q, v in factors.items():
            state = state.with_qubits([q], v)
        return state

    @classmethod
    def basis(cls, qubits: Sequence[int], bits: Sequence[int]) -> StateVector:
        return cls.product({q: np.eye(2, dtype=complex)[b] for q, b in zip(qubits, bits)})

    @property
    def n(self) -> int:
        return len(self.qubits)

    def vector(self, order: Sequence[int] | None = None) -> np.ndarray:
        if order is None:
            return self.tensor.reshape(-1)
        axes = [self.qubits.index(q) for q in order]
        if sorted(axes) != list(range(self.n)):
            raise ValueError("order must be a permutation of the live qubits")
        return np.transpose(self.tensor, axes).reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def with_qubits(self, qubits: Sequence[int], vec: np.ndarray) -> StateVector:
        clash = set(qubits) & set(self.qubits)
        if clash:
            raise ValueError(f"qubit(s) {sorted(clash)} already live")
        part = np.asarray(vec, dtype=complex).reshape((2,) * len(qubits))
        return StateVector(self.qubits + list(qubits), np.multiply.outer(self.tensor, part))

    def apply(self, u: np.ndarray, qubits: Sequence[int]) -> StateVector:
        k = len(qubits)
        axes = [self.qubits.index(q) for q in qubits]
        t = np.tensordot(u.reshape((2,) * (2 * k)), self.tensor, axes=(list(range(k, 2 * k)), axes))
        t = np.moveaxis(t, list(range(k)), axes)
        return StateVector(self.qubits, t)

    def project(self, qubit: int, outcome: int) -> tuple[float, StateVector | None]:
        """Z-basis projection that removes ``qubit``; returns (probability, normalized rest)."""
        ax = self.qubits.index(qubit)
        part = np.take(self.tensor, outcome, axis=ax)
        prob = float(np.vdot(part, part).real)
        rest = self.qubits[:ax] + self.qubits[ax + 1:]
        if prob < _PRUNE:
            return prob, None
        return prob, StateVector(rest, part / np.sqrt(prob))

    def density(self, keep: Sequence[int]) -> np.ndarray:
        """Reduced density matrix on ``keep`` (in that order), tracing out the rest."""
        keep = list(keep)
        rest = [q for q in self.qubits if q not in keep]
        v = self.vector(keep + rest).reshape(2 ** len(keep), 2 ** len(rest))
        return v @ v.conj().T


@dataclass
class BranchResult:
    probability: float
    state: StateVector
    bits: dict[str, int] = field(default_factory=dict)


@dataclass
class Simulation:
    """Accepted branches plus the probability mass that post-selection removed."""

    branches: list[BranchResult]
    rejected: float = 0.0
    outputs: tuple[int, ...] = ()

    @property
    def acceptance(self) -> float:
        return sum(b.probability for b in self.branches)

    def density(self, normalize: bool = False) -> np.ndarray:
        """Sum over accepted branches of p_b * rho_b on the circuit outputs."""
        rho = sum(b.probability * b.state.density(self.outputs) for b in self.branches)
        if isinstance(rho, int):
            rho = np.zeros((2 ** len(self.outputs),) * 2, dtype=complex)
        if normalize:
            rho = rho / np.trace(rho).real
        return rho


def _apply_op(state: StateVector, op) -> StateVector:
    if isinstance(op, CliffordGate):
        return state.apply(gate_matrix(op), op.qubits)
    if isinstance(op, Macro):
        return state.apply(macro_matrix(op), op.qubits)
    if isinstance(op, Decode):
        return state
    if isinstance(op, PrepareZero):
        return state.with_qubits([op.qubit], np.array([1, 0]))
    if isinstance(op, PreparePlus):
        return state.with_qubits([op.qubit], np.array([_SQ2, _SQ2]))
    if isinstance(op, PrepareMagic):
        return state.with_qubits(op.qubits, magic_vector(op.kind))
    raise TypeError(op)


def simulate(
    c: Circuit,
    initial: StateVector | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
    outcomes: Mapping[str, int] | None = None,
) -> Simulation:
    """Run ``c`` exhaustively over measurement outcomes.

    ``initial`` must hold every declared input (defaults to |0> on each) and
    may carry extra reference qubits that the circuit never touches.  Bits
    named in ``outcomes`` are pinned to the given value, so only that part of
    the branch tree is explored.
    """
    outcomes = outcomes or {}
    if initial is None:
        initial = StateVector.basis(c.inputs, [0] * len(c.inputs))
    missing = set(c.inputs) - set(initial.qubits)
    if missing:
        raise ValueError(f"initial state lacks input qubit(s) {sorted(missing)}")
    foreign = (set(initial.qubits) - set(c.inputs)) & set(c.qubit_ids)
    if foreign:
        raise ValueError(f"initial state holds non-input circuit qubit(s) {sorted(foreign)}")
    ops = c.ops
    result = Simulation([], 0.0, c.outputs)
    stack = [(0, initial, 1.0, {})]
    while stack:
        i, state, prob, bits = stack.pop()
        while i < len(ops):
            op = ops[i]
            i += 1
            if isinstance(op, (MeasureZ, MeasureX)):
                if isinstance(op, MeasureX):
                    state = state.apply(HADAMARD, [op.qubit])
                choices = (outcomes[op.bit],) if op.bit in outcomes else (1, 0)
                for outcome in choices:
                    p, rest = state.project(op.qubit, outcome)
                    if rest is not None:
                        stack.append((i, rest, prob * p, {**bits, op.bit: outcome}))
                break
            if isinstance(op, Conditioned):
                if sum(bits[b] for b in op.bits) % 2:
                    state = _apply_op(state, op.gate)
                continue
            if isinstance(op, DiscardOnOutcome):
                if bits[op.bit] == op.value:
                    result.rejected += prob
                    break
                continue
            state = _apply_op(state, op)
            if state.n > qubit_cap:
                raise QubitCapExceeded(f"{state.n} live qubits exceeds cap {qubit_cap}")
        else:
            result.branches.append(BranchResult(prob, state, bits))
    result.branches.reverse()
    return result


# --------------------------------------------------------------------------
# equivalence checks


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Matrix from the declared inputs to the declared outputs of a measurement-free circuit."""
    if not c.is_measurement_free:
        raise ValueError("circuit contains measurements or feedforward")
    n = len(c.inputs)
    cols = []
    for bits in itertools.product((0, 1), repeat=n):
        sim = simulate(c, StateVector.basis(c.inputs, bits))
        (branch,) = sim.branches
        if set(branch.state.qubits) != set(c.outputs):
            raise ValueError("every live qubit must be a declared output")
        cols.append(branch.state.vector(c.outputs))
    return np.array(cols).T


def _phase_normalized(m: np.ndarray, ref: tuple[int, int]) -> np.ndarray:
    return m * (abs(m[ref]) / m[ref])


def unitary_equivalent(a: Circuit, b: Circuit, tol: float = 1e-10) -> bool:
    """True iff the two induced maps agree up to a global phase (max-entry metric)."""
    ua, ub = circuit_unitary(a), circuit_unitary(b)
    if ua.shape != ub.shape:
        return False
    flat = np.argmax(np.abs(ua) > 1e-6)
    ref = np.unravel_index(flat, ua.shape)
    if abs(ub[ref]) < 1e-6:
        return False
    return float(np.max(np.abs(_phase_normalized(ua, ref) - _phase_normalized(ub, ref)))) <= tol


_SPANNING = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_SQ2, _SQ2], dtype=complex),
    "+i": np.array([_SQ2, 1j * _SQ2], dtype=complex),
}


def spanning_inputs(qubits: Sequence[int]) -> Iterable[tuple[tuple[str, ...], StateVector]]:
    """Product states whose projectors span every operator on ``qubits``."""
    for labels in itertools.product(_SPANNING, repeat=len(qubits)):
        yield labels, StateVector.product({q: _SPANNING[l] for q, l in zip(qubits, labels)})


def channel_equivalent(a: Circuit, b: Circuit, tol: float = 1e-10) -> bool:
    """Compare post-selected channels from declared inputs to declared outputs.

    Inputs and outputs are matched by position.  For each spanning product
    input the accepted (unnormalized) output operators must agree; and when
    ``b`` is deterministic, every accepted branch of ``a`` must reproduce it.
    """
    if len(a.inputs) != len(b.inputs) or len(a.outputs) != len(b.outputs):
        raise ValueError("circuits declare different input/output counts")
    bmap = dict(zip(b.inputs, a.inputs))
    for _, state in spanning_inputs(a.inputs):
        sa = simulate(a, state)
        sb = simulate(b, StateVector(
            [next(k for k, v in bmap.items() if v == q) for q in state.qubits], state.tensor))
        rho_a, rho_b = sa.density(), sb.density()
        if np.max(np.abs(rho_a - rho_b)) > tol:
            return False
        if len(sb.branches) == 1 and sb.acceptance > tol:
            target = sb.density(normalize=True)
            for br in sa.branches:
                if br.probability < tol:
                    continue
                rho = br.state.density(sa.outputs)
                if np.max(np.abs(rho - target)) > tol:
                    return False
    return True


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized pure-state vectors."""
    return float(abs(np.vdot(a, b)) ** 2)
