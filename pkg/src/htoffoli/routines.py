"""Constructors for the distillation and gate-synthesis circuits.

Orientation convention for the Margolus-Toffoli gate: operands are
(control-1, control-2, target); control-2 is the control touched twice by the
rotation decomposition, and the gate differs from Toffoli by a sign on
|c1 c2 t> = |101>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

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
from .pauli import CliffordGate

UNENCODED = "unencoded"


def _g(kind: str, *qubits: int, k: int = 0, label: str | None = None) -> CliffordGate:
    return CliffordGate(kind, qubits, k, label)


class _Builder:
    """Allocates qubit ids and bit names while ops are appended."""

    def __init__(self, name: str = ""):
        self.name = name
        self.qubits: list[tuple[int, str | None]] = []
        self.inputs: list[int] = []
        self.ops: list = []
        self._bits = 0

    def qubit(self, role: str | None = None, input: bool = False) -> int:
        q = len(self.qubits)
        self.qubits.append((q, role))
        if input:
            self.inputs.append(q)
        return q

    def bit(self, stem: str = "m") -> str:
        self._bits += 1
        return f"{stem}{self._bits - 1}"

    def add(self, *ops) -> None:
        self.ops.extend(ops)

    def measure_z(self, q: int, stem: str = "m") -> str:
        b = self.bit(stem)
        self.ops.append(MeasureZ(q, b))
        return b

    def measure_x(self, q: int, stem: str = "m") -> str:
        b = self.bit(stem)
        self.ops.append(MeasureX(q, b))
        return b

    def build(self, outputs) -> Circuit:
        return Circuit.build(self.qubits, self.ops, self.inputs, outputs, self.name)


# --------------------------------------------------------------------------
# Y(+-pi/4) through an |H> state


def emit_y_rotation(b: _Builder, data: int, sign: int) -> int:
    """Append an indirect Y(sign*pi/4) on ``data``; returns the |H> ancilla id.

    The ancilla is coupled through a CZ with ``data`` rotated so that its Y
    axis plays the role of Z, then read out in its own Y basis.  A Y fault on
    the ancilla commutes with that readout and lands as Y on ``data``.
    """
    a = b.qubit("magic")
    b.add(
        PrepareMagic("H", (a,)),
        _g("RZ", data, k=3), _g("H", data),
        _g("CZ", data, a),
        _g("H", data), _g("RZ", data, k=1),
        _g("RZ", a, k=3), _g("H", a),
    )
    if sign < 0:
        b.add(_g("X", a))
    m = b.measure_z(a)
    b.add(Conditioned((m,), _g("RY", data, k=1 if sign > 0 else 3)))
    return a


def indirect_y_rotation(sign: int = 1) -> Circuit:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    b = _Builder(f"indirect-y-rotation{'+' if sign > 0 else '-'}")
    d = b.qubit("data", input=True)
    emit_y_rotation(b, d, sign)
    return b.build([d])


def direct_y_rotation(sign: int = 1) -> Circuit:
    return Circuit.build({0: "data"}, [Macro("YROT8", (0,), sign)], [0], [0], "y-rotation")


# --------------------------------------------------------------------------
# Margolus-Toffoli


# (sign of the rotation or None for a CNOT, control slot) in circuit order
_MARGOLUS_SEQUENCE = (("R", 1), ("C", 2), ("R", 1), ("C", 1), ("R", -1), ("C", 2), ("R", -1))


def emit_margolus(b: _Builder, c1: int, c2: int, t: int, target_fresh: bool = False) -> list[int]:
    """Append an |H>-state Margolus-Toffoli; returns the magic qubit ids it used.

    With ``target_fresh`` the target is created here: Y(pi/4)|0> is exactly
    |H>, so the first rotation becomes the target's own preparation.
    """
    magic = []
    seq = _MARGOLUS_SEQUENCE
    if target_fresh:
        b.add(PrepareMagic("H", (t,)))
        magic.append(t)
        seq = seq[1:]
    for kind, arg in seq:
        if kind == "C":
            b.add(_g("CNOT", c1 if arg == 1 else c2, t))
        else:
            magic.append(emit_y_rotation(b, t, arg))
    return magic


def margolus_toffoli(expansion: str = "right") -> Circuit:
    """Margolus-Toffoli on three inputs.

    ``left``: Toffoli then CCZ then CZ(c1, t).  ``right``: Clifford gates and
    four Y(+-pi/4) rotations.  ``magic``: the right form with every rotation
    done through an |H> state.  ``macro``: the bare named gate.
    """
    b = _Builder(f"margolus-{expansion}")
    c1, c2, t = b.qubit("control-1", True), b.qubit("control-2", True), b.qubit("target", True)
    if expansion == "left":
        b.add(Macro("TOFFOLI", (c1, c2, t)), Macro("CCZ", (c1, c2, t)), _g("CZ", c1, t))
    elif expansion == "right":
        for kind, arg in _MARGOLUS_SEQUENCE:
            if kind == "C":
                b.add(_g("CNOT", c1 if arg == 1 else c2, t))
            else:
                b.add(Macro("YROT8", (t,), arg))
    elif expansion == "magic":
        emit_margolus(b, c1, c2, t)
    elif expansion == "macro":
        b.add(Macro("MARGOLUS", (c1, c2, t)))
    else:
        raise ValueError(f"unknown expansion {expansion!r}")
    return b.build([c1, c2, t])


def toffoli_macro() -> Circuit:
    return Circuit.build(
        [(0, "control-1"), (1, "control-2"), (2, "target")],
        [Macro("TOFFOLI", (0, 1, 2))], [0, 1, 2], [0, 1, 2], "toffoli")


# --------------------------------------------------------------------------
# Toffoli-state preparations


def toffoli_state_direct() -> Circuit:
    """|++0> followed by a true Toffoli."""
    b = _Builder("toffoli-state-direct")
    c1, c2, t = b.qubit("control-1"), b.qubit("control-2"), b.qubit("target")
    b.add(PreparePlus(c1), PreparePlus(c2), PrepareZero(t), Macro("TOFFOLI", (c1, c2, t)))
    return b.build([c1, c2, t])


def toffoli_state_margolus() -> Circuit:
    """|++0> followed by the three-gate Margolus decomposition."""
    b = _Builder("toffoli-state-margolus")
    c1, c2, t = b.qubit("control-1"), b.qubit("control-2"), b.qubit("target")
    b.add(PreparePlus(c1), PreparePlus(c2), PrepareZero(t),
          Macro("TOFFOLI", (c1, c2, t)), Macro("CCZ", (c1, c2, t)), _g("CZ", c1, t))
    return b.build([c1, c2, t])


def toffoli_state_resource() -> Circuit:
    b = _Builder("toffoli-state")
    c1, c2, t = b.qubit("control-1"), b.qubit("control-2"), b.qubit("target")
    b.add(PrepareMagic("TOFFOLI", (c1, c2, t)))
    return b.build([c1, c2, t])


def toffoli_state_retargeted() -> Circuit:
    """Hadamards on control-2 and target turn control-2 into the target.

    Outputs are ordered (control-1, new control = old target, new target)."""
    b = _Builder("toffoli-state-retargeted")
    c1, c2, t = b.qubit("control-1"), b.qubit("target"), b.qubit("control-2")
    b.add(PrepareMagic("TOFFOLI", (c1, c2, t)), _g("H", c2), _g("H", t))
    return b.build([c1, t, c2])


def toffoli_state_direct_on(order: str) -> Circuit:
    """|Toffoli> built directly with the target at position ``order.index('t')``."""
    b = _Builder("toffoli-state-direct")
    qs = [b.qubit() for _ in range(3)]
    ctrls = [q for q, ch in zip(qs, order) if ch == "c"]
    (tgt,) = [q for q, ch in zip(qs, order) if ch == "t"]
    b.add(PreparePlus(ctrls[0]), PreparePlus(ctrls[1]), PrepareZero(tgt), Macro("TOFFOLI", (*ctrls, tgt)))
    return b.build(qs)


def toffoli_state_prep_4H() -> Circuit:
    """Toffoli state from four |H> states through a Margolus-Toffoli on |++0>."""
    b = _Builder("toffoli-state-4H")
    c1, c2, t = b.qubit("control-1"), b.qubit("control-2"), b.qubit("target")
    b.add(PreparePlus(c1), PreparePlus(c2))
    emit_margolus(b, c1, c2, t, target_fresh=True)
    return b.build([c1, c2, t])


# --------------------------------------------------------------------------
# H-to-Toffoli


def h_to_toffoli(o: int = 2) -> Circuit:
    """``o`` Margolus-Toffoli gates share two |+> controls, each on its own target;
    every extra target is compared with the first by CNOT and a Z measurement."""
    if o < 2:
        raise ValueError("h_to_toffoli needs o >= 2 targets")
    b = _Builder(f"h-to-toffoli-{o}")
    c1, c2 = b.qubit("control-1"), b.qubit("control-2")
    targets = [b.qubit("target" if i == 0 else "check") for i in range(o)]
    b.add(PreparePlus(c1), PreparePlus(c2))
    for t in targets:
        emit_margolus(b, c1, c2, t, target_fresh=True)
    for t in targets[1:]:
        b.add(_g("CNOT", targets[0], t))
        m = b.measure_z(t, "parity")
        b.add(DiscardOnOutcome(m))
    return b.build([c1, c2, targets[0]])


# --------------------------------------------------------------------------
# Toffoli gate from a Toffoli state


def emit_indirect_toffoli(b: _Builder, x: int, y: int, z: int, a: int, bq: int, c: int) -> tuple[int, int, int]:
    """Consume the Toffoli state on (a, bq, c) to apply Toffoli(x, y -> z).

    The data ends up on (a, bq, c), which are returned."""
    b.add(_g("CNOT", a, x), _g("CNOT", bq, y), _g("CNOT", z, c))
    m1 = b.measure_z(x)
    m2 = b.measure_z(y)
    m3 = b.measure_x(z)
    b.add(
        Conditioned((m1,), _g("X", a)),
        Conditioned((m2,), _g("CNOT", a, c)),
        Conditioned((m1,), _g("CNOT", bq, c)),
        Conditioned((m2,), _g("X", bq)),
        Conditioned((m3,), _g("Z", c)),
        Conditioned((m3,), _g("CZ", a, bq)),
    )
    return a, bq, c


def indirect_toffoli(resource: str = "prepared") -> Circuit:
    """Toffoli on three data inputs using one Toffoli state.

    ``resource='input'`` leaves the state as three extra inputs (after the data
    inputs) so that a preparation circuit can be composed in front.
    """
    b = _Builder("indirect-toffoli")
    if resource == "input":
        a, bq, c = b.qubit("control-1", True), b.qubit("control-2", True), b.qubit("target", True)
    x, y, z = b.qubit("data", True), b.qubit("data", True), b.qubit("data", True)
    if resource == "prepared":
        a, bq, c = b.qubit("control-1"), b.qubit("control-2"), b.qubit("target")
        b.add(PrepareMagic("TOFFOLI", (a, bq, c)))
    elif resource != "input":
        raise ValueError(f"unknown resource mode {resource!r}")
    if resource == "input":
        b.inputs = [x, y, z, a, bq, c]
    out = emit_indirect_toffoli(b, x, y, z, a, bq, c)
    return b.build(list(out))


# --------------------------------------------------------------------------
# state injection


def state_injection() -> Circuit:
    """Teleport a bare |psi> into a logical qubit through an encoded Bell pair.

    Ops labelled ``unencoded`` act on bare qubits and carry no location cost.
    """
    b = _Builder("state-injection")
    psi = b.qubit("data", input=True)
    out, half = b.qubit("output"), b.qubit("ancilla")
    b.add(PreparePlus(out), PrepareZero(half), _g("CNOT", out, half), Decode(half))
    b.add(_g("CNOT", psi, half, label=UNENCODED), _g("H", psi, label=UNENCODED))
    mz = b.bit()
    mx = b.bit()
    b.add(MeasureZ(psi, mz, label=UNENCODED), MeasureZ(half, mx, label=UNENCODED))
    b.add(Conditioned((mx,), _g("X", out)), Conditioned((mz,), _g("Z", out)))
    return b.build([out])


# --------------------------------------------------------------------------
# Toffoli-state distillation


_SWAPPED = {"target": None, "control-1": (0, 2), "control-2": (1, 2)}


def toffoli_distill(which: str = "target") -> Circuit:
    """Two faulty Toffoli states drive two Toffoli gates on shared |+> controls;
    the targets are compared and the first is kept.

    ``control-1``/``control-2`` first swap that control with the target of each
    input (Hadamards on both), run the same check, and swap back on the output.
    """
    if which not in _SWAPPED:
        raise ValueError(f"unknown variant {which!r}")
    swap = _SWAPPED[which]
    b = _Builder(f"toffoli-distill-{which}")
    c1, c2 = b.qubit("control-1"), b.qubit("control-2")
    t1, t2 = b.qubit("target"), b.qubit("check")
    b.add(PreparePlus(c1), PreparePlus(c2), PrepareZero(t1), PrepareZero(t2))

    def resource() -> tuple[int, int, int]:
        qs = [b.qubit("magic") for _ in range(3)]
        b.add(PrepareMagic("TOFFOLI", tuple(qs)))
        if swap is None:
            return qs[0], qs[1], qs[2]
        i, j = swap
        b.add(_g("H", qs[i]), _g("H", qs[j]))
        roles = list(qs)
        roles[i], roles[j] = qs[j], qs[i]
        return roles[0], roles[1], roles[2]

    a1, b1, first = emit_indirect_toffoli(b, c1, c2, t1, *resource())
    a2, b2, second = emit_indirect_toffoli(b, a1, b1, t2, *resource())
    b.add(_g("CNOT", first, second))
    m = b.measure_z(second, "parity")
    b.add(DiscardOnOutcome(m))
    out = [a2, b2, first]
    if swap is not None:
        i, j = swap
        b.add(_g("H", out[i]), _g("H", out[j]))
        out[i], out[j] = out[j], out[i]
    return b.build(out)


# --------------------------------------------------------------------------
# |H>-state routine on the four-qubit code


def emit_controlled_h(b: _Builder, control: int, target: int) -> list[int]:
    """Controlled-H as Y(pi/4) CZ Y(-pi/4) on the target, two |H> states."""
    first = emit_y_rotation(b, target, -1)
    b.add(_g("CZ", control, target))
    second = emit_y_rotation(b, target, 1)
    return [first, second]


def ten_to_two() -> Circuit:
    """Two noisy |H> states encoded in the [[4,2,2]] code, a transversal-H
    measurement through four controlled-H gates, then decoding with both
    stabilizer checks.

    The code basis is |ab> -> |a^b, a, b, 0> + |complement>; transversal H acts
    as H (x) H followed by a swap of the two encoded qubits.
    """
    b = _Builder("ten-to-two")
    q0, q1, q2, q3 = b.qubit("check"), b.qubit("output"), b.qubit("output"), b.qubit("check")
    b.add(PrepareZero(q0), PrepareMagic("H", (q1,)), PrepareMagic("H", (q2,)), PreparePlus(q3))
    encoder = [_g("CNOT", q1, q0), _g("CNOT", q2, q0), _g("CNOT", q3, q0), _g("CNOT", q3, q1), _g("CNOT", q3, q2)]
    b.add(*encoder)
    a = b.qubit("ancilla")
    b.add(PreparePlus(a))
    for q in (q0, q1, q2, q3):
        emit_controlled_h(b, a, q)
    b.add(DiscardOnOutcome(b.measure_x(a)))
    b.add(*reversed(encoder))
    b.add(DiscardOnOutcome(b.measure_z(q0, "check")), DiscardOnOutcome(b.measure_x(q3, "check")))
    return b.build([q1, q2])


# --------------------------------------------------------------------------
# triorthogonal-matrix routines


def _rows(*lines: str) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(ch) for ch in line) for line in lines)


# k = 2, n = 14: first two rows are the output rows, the rest are checks
TRIORTHOGONAL_14 = _rows(
    "10101001010101",
    "01010101010101",
    "11001100110011",
    "00111100001111",
    "00000011111111",
)

# k = 6, n = 26: six output rows, three checks
TRIORTHOGONAL_26 = _rows(
    "01100000011000000110000001",
    "01010000010100000101000001",
    "01001000010010000100100001",
    "01000100010001000100010001",
    "01000010010000100100001001",
    "01000001010000010100000101",
    "11000000110000001100000011",
    "00111111110000000011111111",
    "00000000001111111111111111",
)


def check_triorthogonal(matrix, k: int) -> None:
    """Raise ValueError unless output rows have odd weight, check rows even weight,
    and every pair and triple of rows overlaps evenly."""
    rows = [tuple(r) for r in matrix]
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ValueError("ragged matrix")
    for i, r in enumerate(rows):
        if sum(r) % 2 != (1 if i < k else 0):
            raise ValueError(f"row {i} has the wrong weight parity")
    for size in (2, 3):
        for idx in itertools.combinations(range(len(rows)), size):
            overlap = sum(all(rows[i][j] for i in idx) for j in range(n))
            if overlap % 2:
                raise ValueError(f"rows {idx} overlap oddly")


def triorthogonal_routine(matrix, k: int, name: str = "triorthogonal") -> Circuit:
    """T-state distillation on k outputs plus one check qubit per remaining row.

    Every column of ``matrix`` applies exp(i pi/4 * parity) over its support
    through one |T> state: CNOTs from the support into the magic qubit and a Z
    measurement.  Outcome 1 calls for an S on each support qubit and a CZ on
    each support pair; these are diagonal on qubits that only ever act as
    controls, so they are deferred to the end, where each row pair receives a
    single CZ conditioned on the parity of the relevant outcomes.  Static S
    and CZ powers then remove the Clifford part of the transversal phase,
    leaving T on the outputs and nothing on the checks, which are finally
    read out in the X basis.
    """
    check_triorthogonal(matrix, k)
    rows = [tuple(r) for r in matrix]
    m, n = len(rows), len(rows[0])
    b = _Builder(name)
    qs = [b.qubit("output" if i < k else "check") for i in range(m)]
    b.add(*(PreparePlus(q) for q in qs))
    bits = []
    for j in range(n):
        t = b.qubit("magic")
        b.add(PrepareMagic("T", (t,)))
        b.add(*(_g("CNOT", qs[i], t) for i in range(m) if rows[i][j]))
        bits.append(b.measure_z(t))
    for i in range(m):
        b.add(*(Conditioned((bits[j],), _g("S", qs[i])) for j in range(n) if rows[i][j]))
    for i, l in itertools.combinations(range(m), 2):
        shared = tuple(bits[j] for j in range(n) if rows[i][j] and rows[l][j])
        if shared:
            b.add(Conditioned(shared, _g("CZ", qs[i], qs[l])))
    for i in range(m):
        power = ((1 if i < k else 0) - sum(rows[i])) % 8
        if power:
            b.add(_g("RZ", qs[i], k=(power // 2) % 4))
    for i, l in itertools.combinations(range(m), 2):
        overlap = sum(x and y for x, y in zip(rows[i], rows[l]))
        if (overlap // 2) % 2:
            b.add(_g("CZ", qs[i], qs[l]))
    for q in qs[k:]:
        b.add(DiscardOnOutcome(b.measure_x(q, "check")))
    return b.build(qs[:k])


def fourteen_to_two() -> Circuit:
    return triorthogonal_routine(TRIORTHOGONAL_14, 2, "fourteen-to-two")


def twenty_six_to_six() -> Circuit:
    return triorthogonal_routine(TRIORTHOGONAL_26, 6, "twenty-six-to-six")


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class RoutineDescriptor:
    """A named routine with the figures it is expected to reproduce.

    ``locations`` and ``marginal`` are the reference figures quoted for the
    routine (None when there is none); ``output_kind`` is the magic state it
    delivers.
    """

    name: str
    build: Callable[[], Circuit] = field(repr=False, compare=False)
    magic_kind: str
    magic_inputs: int
    outputs: int
    output_kind: str
    locations: int | None = None
    marginal: int | None = None

    @property
    def circuit(self) -> Circuit:
        return self.build()

    @property
    def output_roles(self) -> tuple[str | None, ...]:
        c = self.circuit
        roles = c.roles
        return tuple(roles[q] for q in c.outputs)


REGISTRY: Mapping[str, RoutineDescriptor] = MappingProxyType({
    d.name: d
    for d in (
        RoutineDescriptor("h-to-toffoli", lambda: h_to_toffoli(2), "H", 8, 1, "TOFFOLI", 36),
        RoutineDescriptor("toffoli-state-4h", toffoli_state_prep_4H, "H", 4, 1, "TOFFOLI", 23),
        RoutineDescriptor("indirect-toffoli", indirect_toffoli, "TOFFOLI", 1, 1, "gate", 15),
        RoutineDescriptor("state-injection", state_injection, "none", 0, 1, "H", 5),
        RoutineDescriptor("ten-to-two", ten_to_two, "H", 10, 2, "H", 80, 9),
        RoutineDescriptor("fourteen-to-two", fourteen_to_two, "T", 14, 2, "T", 78, 7),
        RoutineDescriptor("twenty-six-to-six", twenty_six_to_six, "T", 26, 6, "T", 192, 76),
        RoutineDescriptor("toffoli-distill-target", lambda: toffoli_distill("target"), "TOFFOLI", 2, 1, "TOFFOLI"),
        RoutineDescriptor("toffoli-distill-control-1", lambda: toffoli_distill("control-1"), "TOFFOLI", 2, 1, "TOFFOLI"),
        RoutineDescriptor("toffoli-distill-control-2", lambda: toffoli_distill("control-2"), "TOFFOLI", 2, 1, "TOFFOLI"),
    )
})


def h_to_toffoli_descriptor(o: int) -> RoutineDescriptor:
    return RoutineDescriptor(f"h-to-toffoli-{o}", lambda: h_to_toffoli(o), "H", 4 * o, 1, "TOFFOLI")


def lookup(name: str) -> RoutineDescriptor:
    """Registry lookup; ``h-to-toffoli-<o>`` builds the o-target variant on demand."""
    if name in REGISTRY:
        return REGISTRY[name]
    if name.startswith("h-to-toffoli-"):
        try:
            o = int(name.rsplit("-", 1)[1])
        except ValueError:
            o = 0
        if o >= 2:
            return h_to_toffoli_descriptor(o)
    raise KeyError(f"unknown routine {name!r}")
