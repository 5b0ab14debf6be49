"""Circuit data model: Clifford gates, preparations, measurements, feedforward.

Circuits are immutable.  Every constructor path (``Circuit.build``,
``append``, ``compose``, ``parse``) replays the op list through the same
validator, so a ``Circuit`` instance is always well formed:

* a qubit is used only while it is live (declared input or prepared, and
  not yet measured);
* classical bits are defined once, by a measurement, before being read;
* declared outputs are live at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence, Union

from .pauli import ONE_QUBIT_KINDS, TWO_QUBIT_KINDS, CliffordGate, PauliError

MAGIC_KINDS = {"H": 1, "T": 1, "TOFFOLI": 3}
MACRO_ARITY = {"TOFFOLI": 3, "CCZ": 3, "MARGOLUS": 3, "YROT8": 1, "ZROT8": 1}

ROLES = ("control-1", "control-2", "target", "ancilla", "magic", "data", "check", "output")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class PrepareZero:
    qubit: int
    label: str | None = None

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class PreparePlus:
    qubit: int
    label: str | None = None

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class PrepareMagic:
    """Prepare a magic resource: ``H`` is cos(pi/8)|0> + sin(pi/8)|1>,
    ``T`` is (|0> + e^{i pi/4}|1>)/sqrt2, ``TOFFOLI`` is
    (|000>+|100>+|010>+|111>)/2 on (control-1, control-2, target)."""

    kind: str
    qubits: tuple[int, ...]
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.kind not in MAGIC_KINDS:
            raise CircuitError(f"unknown magic state {self.kind!r}")
        if len(self.qubits) != MAGIC_KINDS[self.kind]:
            raise CircuitError(f"{self.kind} state needs {MAGIC_KINDS[self.kind]} qubit(s)")


@dataclass(frozen=True)
class MeasureZ:
    qubit: int
    bit: str
    label: str | None = None

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class MeasureX:
    qubit: int
    bit: str
    label: str | None = None

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class Conditioned:
    """Apply ``gate`` when the XOR of ``bits`` is 1."""

    bits: tuple[str, ...]
    gate: CliffordGate
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(self.bits))
        if not self.bits:
            raise CircuitError("Conditioned needs at least one bit")

    @property
    def qubits(self):
        return self.gate.qubits


@dataclass(frozen=True)
class DiscardOnOutcome:
    """Post-selection: the run is rejected when ``bit == value``."""

    bit: str
    value: int = 1
    label: str | None = None

    @property
    def qubits(self):
        return ()


@dataclass(frozen=True)
class Macro:
    """A named non-Clifford gate, simulated densely but never propagated.

    ``MARGOLUS`` flips the sign of |c1=1, c2=0, t=1> relative to ``TOFFOLI``
    on operands (control-1, control-2, target).  ``YROT8``/``ZROT8`` are the
    rotations exp(-/+ i pi/8 P) selected by ``sign``.
    """

    name: str
    qubits: tuple[int, ...]
    sign: int = 1
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.name not in MACRO_ARITY:
            raise CircuitError(f"unknown macro {self.name!r}")
        if len(self.qubits) != MACRO_ARITY[self.name]:
            raise CircuitError(f"{self.name} takes {MACRO_ARITY[self.name]} operands")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.name} operands must differ")
        if self.sign not in (1, -1):
            raise CircuitError("sign must be +1 or -1")


@dataclass(frozen=True)
class Decode:
    """Decode a logical qubit to a bare one.  Identity in simulation; it only
    matters to the location count."""

    qubit: int
    label: str | None = None

    @property
    def qubits(self):
        return (self.qubit,)


CircuitOp = Union[
    CliffordGate, PrepareZero, PreparePlus, PrepareMagic, MeasureZ, MeasureX,
    Conditioned, DiscardOnOutcome, Macro, Decode,
]
PREPARATIONS = (PrepareZero, PreparePlus, PrepareMagic)
MEASUREMENTS = (MeasureZ, MeasureX)


@dataclass
class _Tracker:
    alive: set[int]
    bits: set[str]
    declared: set[int]

    def check(self, op) -> None:
        if isinstance(op, DiscardOnOutcome):
            if op.bit not in self.bits:
                raise CircuitError(f"dangling classical bit {op.bit!r}")
            if op.value not in (0, 1):
                raise CircuitError("discard value must be 0 or 1")
            return
        qs = op.qubits
        for q in qs:
            if q not in self.declared:
                raise CircuitError(f"dangling qubit id {q}")
        if isinstance(op, PREPARATIONS):
            live = [q for q in qs if q in self.alive]
            if live:
                raise CircuitError(f"qubit(s) {live} prepared while live")
            self.alive.update(qs)
            return
        dead = [q for q in qs if q not in self.alive]
        if dead:
            raise CircuitError(f"qubit(s) {dead} used before preparation or after measurement")
        if isinstance(op, Conditioned):
            missing = [b for b in op.bits if b not in self.bits]
            if missing:
                raise CircuitError(f"dangling classical bit(s) {missing}")
        elif isinstance(op, MEASUREMENTS):
            if op.bit in self.bits:
                raise CircuitError(f"classical bit {op.bit!r} written twice")
            self.bits.add(op.bit)
            self.alive.discard(op.qubit)
        elif not isinstance(op, (CliffordGate, Macro, Decode)):
            raise CircuitError(f"not a circuit op: {op!r}")


@dataclass(frozen=True)
class Circuit:
    """An immutable, validated circuit.

    ``qubits`` pairs each stable qubit id with a role tag (or None).
    ``inputs`` are live from the start; everything else must be prepared.
    """

    qubits: tuple[tuple[int, str | None], ...] = ()
    inputs: tuple[int, ...] = ()
    ops: tuple = ()
    outputs: tuple[int, ...] = ()
    name: str = ""
    _tracker: _Tracker | None = field(default=None, compare=False, repr=False)

    @classmethod
    def build(
        cls,
        qubits: Mapping[int, str | None] | Iterable[tuple[int, str | None]],
        ops: Iterable = (),
        inputs: Sequence[int] = (),
        outputs: Sequence[int] = (),
        name: str = "",
    ) -> Circuit:
        items = tuple(qubits.items()) if isinstance(qubits, Mapping) else tuple(qubits)
        ids = [q for q, _ in items]
        if len(set(ids)) != len(ids):
            raise CircuitError("duplicate qubit declaration")
        for _, role in items:
            if role is not None and role not in ROLES:
                raise CircuitError(f"unknown role {role!r}")
        tracker = _Tracker(alive=set(), bits=set(), declared=set(ids))
        for q in inputs:
            if q not in tracker.declared:
                raise CircuitError(f"dangling qubit id {q}")
        tracker.alive.update(inputs)
        ops = tuple(ops)
        for op in ops:
            tracker.check(op)
        bad = [q for q in outputs if q not in tracker.alive]
        if bad:
            raise CircuitError(f"output qubit(s) {bad} are not live at the end")
        return cls(items, tuple(inputs), ops, tuple(outputs), name, tracker)

    @property
    def roles(self) -> dict[int, str | None]:
        return dict(self.qubits)

    @property
    def qubit_ids(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.qubits)

    def role_qubit(self, role: str) -> int:
        found = [q for q, r in self.qubits if r == role]
        if len(found) != 1:
            raise CircuitError(f"{len(found)} qubits carry role {role!r}")
        return found[0]

    @property
    def magic_preps(self) -> list[tuple[int, PrepareMagic]]:
        """(op index, op) for every magic preparation, in circuit order."""
        return [(i, op) for i, op in enumerate(self.ops) if isinstance(op, PrepareMagic)]

    @property
    def magic_count(self) -> int:
        return len(self.magic_preps)

    @property
    def bits(self) -> list[str]:
        return [op.bit for op in self.ops if isinstance(op, MEASUREMENTS)]

    @property
    def is_measurement_free(self) -> bool:
        return not any(isinstance(op, (*MEASUREMENTS, Conditioned, DiscardOnOutcome)) for op in self.ops)

    def _state(self) -> _Tracker:
        if self._tracker is None:
            rebuilt = Circuit.build(self.qubits, self.ops, self.inputs, self.outputs, self.name)
            object.__setattr__(self, "_tracker", rebuilt._tracker)
        return self._tracker

    def append(self, op) -> Circuit:
        """Return a new circuit with ``op`` added; outputs are kept if still live."""
        state = self._state()
        tracker = _Tracker(set(state.alive), set(state.bits), set(state.declared))
        tracker.check(op)
        outputs = tuple(q for q in self.outputs if q in tracker.alive)
        return Circuit(self.qubits, self.inputs, self.ops + (op,), outputs, self.name, tracker)

    def with_outputs(self, outputs: Sequence[int]) -> Circuit:
        return Circuit.build(self.qubits, self.ops, self.inputs, outputs, self.name)

    def structurally_equal(self, other: Circuit) -> bool:
        return (self.qubits, self.inputs, self.ops, self.outputs) == (
            other.qubits, other.inputs, other.ops, other.outputs)


def append(c: Circuit, op) -> Circuit:
    return c.append(op)


# --------------------------------------------------------------------------
# relabelling and composition


def remap_op(op, qmap: Mapping[int, int], bmap: Mapping[str, str] | None = None):
    """Copy of ``op`` with qubit ids and bit names substituted."""
    bmap = bmap or {}
    b = lambda name: bmap.get(name, name)  # noqa: E731
    if isinstance(op, CliffordGate):
        return CliffordGate(op.kind, tuple(qmap[q] for q in op.qubits), op.k, op.label)
    if isinstance(op, (PrepareZero, PreparePlus, Decode)):
        return type(op)(qmap[op.qubit], op.label)
    if isinstance(op, PrepareMagic):
        return PrepareMagic(op.kind, tuple(qmap[q] for q in op.qubits), op.label)
    if isinstance(op, MEASUREMENTS):
        return type(op)(qmap[op.qubit], b(op.bit), op.label)
    if isinstance(op, Conditioned):
        return Conditioned(tuple(b(x) for x in op.bits), remap_op(op.gate, qmap), op.label)
    if isinstance(op, DiscardOnOutcome):
        return DiscardOnOutcome(b(op.bit), op.value, op.label)
    if isinstance(op, Macro):
        return Macro(op.name, tuple(qmap[q] for q in op.qubits), op.sign, op.label)
    raise CircuitError(f"not a circuit op: {op!r}")


def compose(a: Circuit, b: Circuit, wiring: Mapping[int, int] | None = None) -> Circuit:
    """Run ``b`` after ``a``.

    ``wiring`` maps inputs of ``b`` onto outputs of ``a``.  Every other qubit
    of ``b`` gets a fresh id and its classical bits are renamed, so the two
    circuits never collide.  Unwired inputs of ``b`` become inputs of the
    result.
    """
    wiring = dict(wiring or {})
    if len(set(wiring.values())) != len(wiring):
        raise CircuitError("wiring collision: two inputs wired to one output")
    a_roles, b_roles = a.roles, b.roles
    for bq, aq in wiring.items():
        if bq not in b.inputs:
            raise CircuitError(f"qubit {bq} is not an input of the second circuit")
        if aq not in a.outputs:
            raise CircuitError(f"qubit {aq} is not an output of the first circuit")
        ra, rb = a_roles[aq], b_roles[bq]
        if ra is not None and rb is not None and ra != rb:
            raise CircuitError(f"role mismatch wiring {bq} ({rb}) to {aq} ({ra})")
    nxt = max(a.qubit_ids, default=-1) + 1
    qmap: dict[int, int] = {}
    for q in b.qubit_ids:
        if q in wiring:
            qmap[q] = wiring[q]
        else:
            qmap[q] = nxt
            nxt += 1
    taken = set(a.bits)
    bmap = {}
    for bit in b.bits:
        new, n = bit, 0
        while new in taken:
            n += 1
            new = f"{bit}.{n}"
        bmap[bit] = new
        taken.add(new)
    qubits = list(a.qubits)
    for q, role in b.qubits:
        if q not in wiring:
            qubits.append((qmap[q], role))
        elif a_roles[wiring[q]] is None and role is not None:
            idx = [i for i, (x, _) in enumerate(qubits) if x == wiring[q]][0]
            qubits[idx] = (wiring[q], role)
    inputs = a.inputs + tuple(qmap[q] for q in b.inputs if q not in wiring)
    ops = a.ops + tuple(remap_op(op, qmap, bmap) for op in b.ops)
    wired = set(wiring.values())
    outputs = tuple(q for q in a.outputs if q not in wired) + tuple(qmap[q] for q in b.outputs)
    name = "+".join(x for x in (a.name, b.name) if x)
    return Circuit.build(qubits, ops, inputs, outputs, name)


def relabel(c: Circuit, offset: int) -> Circuit:
    qmap = {q: q + offset for q in c.qubit_ids}
    return Circuit.build(
        [(qmap[q], r) for q, r in c.qubits],
        [remap_op(op, qmap) for op in c.ops],
        [qmap[q] for q in c.inputs],
        [qmap[q] for q in c.outputs],
        c.name,
    )


# --------------------------------------------------------------------------
# text format


class ParseError(CircuitError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _q(q: int) -> str:
    return f"q{q}"


def _gate_text(g: CliffordGate) -> str:
    k = f" {g.k}" if g.kind in ("RY", "RZ") else ""
    return f"{g.kind}{k} " + " ".join(_q(q) for q in g.qubits)


def _op_text(op) -> str:
    if isinstance(op, CliffordGate):
        s = _gate_text(op)
    elif isinstance(op, PrepareZero):
        s = f"PREP_ZERO {_q(op.qubit)}"
    elif isinstance(op, PreparePlus):
        s = f"PREP_PLUS {_q(op.qubit)}"
    elif isinstance(op, PrepareMagic):
        s = f"PREP_MAGIC {op.kind} " + " ".join(_q(q) for q in op.qubits)
    elif isinstance(op, MeasureZ):
        s = f"MEASURE_Z {_q(op.qubit)} -> {op.bit}"
    elif isinstance(op, MeasureX):
        s = f"MEASURE_X {_q(op.qubit)} -> {op.bit}"
    elif isinstance(op, Conditioned):
        s = "IF " + " ".join(op.bits) + " THEN " + _gate_text(op.gate)
    elif isinstance(op, DiscardOnOutcome):
        s = f"DISCARD_IF {op.bit} = {op.value}"
    elif isinstance(op, Macro):
        sign = "+" if op.sign > 0 else "-"
        s = f"MACRO {op.name} {sign} " + " ".join(_q(q) for q in op.qubits)
    elif isinstance(op, Decode):
        s = f"DECODE {_q(op.qubit)}"
    else:
        raise CircuitError(f"not a circuit op: {op!r}")
    if isinstance(op, Conditioned) and op.gate.label is not None:
        s += f" @@{op.gate.label}"
    if op.label is not None:
        s += f" @{op.label}"
    return s


def serialize(c: Circuit) -> str:
    lines = []
    if c.name:
        lines.append(f"NAME {c.name}")
    for q, role in c.qubits:
        lines.append(f"QUBIT {_q(q)}" + (f" {role}" if role else ""))
    if c.inputs:
        lines.append("INPUT " + " ".join(_q(q) for q in c.inputs))
    lines.extend(_op_text(op) for op in c.ops)
    if c.outputs:
        lines.append("OUTPUT " + " ".join(_q(q) for q in c.outputs))
    return "\n".join(lines) + "\n"


class _Line:
    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.tokens: list[tuple[str, int]] = []
        col = 0
        for piece in text.split(" "):
            if piece:
                self.tokens.append((piece, col + 1))
            col += len(piece) + 1
        self.pos = 0

    def error(self, message: str, col: int | None = None) -> ParseError:
        if col is None:
            col = self.tokens[self.pos][1] if self.pos < len(self.tokens) else (
                self.tokens[-1][1] + len(self.tokens[-1][0]) if self.tokens else 1)
        return ParseError(message, self.lineno, col)

    def next(self, what: str) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise self.error(f"expected {what}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def qubit(self) -> int:
        tok, col = self.next("qubit")
        if not (tok.startswith("q") and tok[1:].isdigit()):
            raise self.error(f"bad qubit token {tok!r}", col)
        return int(tok[1:])

    def integer(self) -> int:
        tok, col = self.next("integer")
        try:
            return int(tok)
        except ValueError:
            raise self.error(f"bad integer {tok!r}", col) from None

    def done(self) -> None:
        if self.pos < len(self.tokens):
            raise self.error(f"unexpected token {self.tokens[self.pos][0]!r}")


def _parse_gate(line: _Line, kind: str, col: int) -> CliffordGate:
    if kind in ("RY", "RZ"):
        k = line.integer()
        return CliffordGate(kind, (line.qubit(),), k)
    if kind in ONE_QUBIT_KINDS:
        return CliffordGate(kind, (line.qubit(),))
    if kind in TWO_QUBIT_KINDS:
        return CliffordGate(kind, (line.qubit(), line.qubit()))
    raise line.error(f"unknown gate {kind!r}", col)


def parse(text: str) -> Circuit:
    """Inverse of :func:`serialize`.  Undeclared qubits are declared with no role."""
    declared: dict[int, str | None] = {}
    inputs: list[int] = []
    outputs: list[int] = []
    ops = []
    name = ""
    tracker = _Tracker(alive=set(), bits=set(), declared=set())
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        labels = []
        while " @" in body:
            body, lab = body.rsplit(" @", 1)
            labels.append(lab.strip())
        labels.reverse()
        line = _Line(body, lineno)
        if not line.tokens:
            continue
        head, col = line.next("keyword")
        if head == "NAME":
            name = " ".join(t for t, _ in line.tokens[1:])
            continue
        if head == "QUBIT":
            q = line.qubit()
            role = line.next("role")[0] if line.pos < len(line.tokens) else None
            line.done()
            if q in declared:
                raise line.error(f"qubit q{q} declared twice", col)
            if role is not None and role not in ROLES:
                raise line.error(f"unknown role {role!r}", col)
            declared[q] = role
            tracker.declared.add(q)
            continue
        if head in ("INPUT", "OUTPUT"):
            qs = []
            while line.pos < len(line.tokens):
                qs.append(line.qubit())
            for q in qs:
                if q not in declared:
                    declared[q] = None
                    tracker.declared.add(q)
            if head == "INPUT":
                inputs.extend(qs)
                tracker.alive.update(qs)
            else:
                outputs.extend(qs)
            continue
        if head == "PREP_ZERO":
            op = PrepareZero(line.qubit())
        elif head == "PREP_PLUS":
            op = PreparePlus(line.qubit())
        elif head == "PREP_MAGIC":
            kind, kcol = line.next("magic kind")
            if kind not in MAGIC_KINDS:
                raise line.error(f"unknown magic state {kind!r}", kcol)
            op = PrepareMagic(kind, tuple(line.qubit() for _ in range(MAGIC_KINDS[kind])))
        elif head in ("MEASURE_Z", "MEASURE_X"):
            q = line.qubit()
            arrow, acol = line.next("'->'")
            if arrow != "->":
                raise line.error("expected '->'", acol)
            bit = line.next("bit name")[0]
            op = (MeasureZ if head == "MEASURE_Z" else MeasureX)(q, bit)
        elif head == "IF":
            bits = []
            while True:
                tok, _ = line.next("bit name or THEN")
                if tok == "THEN":
                    break
                bits.append(tok)
            kind, kcol = line.next("gate")
            op = Conditioned(tuple(bits), _parse_gate(line, kind, kcol))
        elif head == "DISCARD_IF":
            bit = line.next("bit name")[0]
            eq, ecol = line.next("'='")
            if eq != "=":
                raise line.error("expected '='", ecol)
            op = DiscardOnOutcome(bit, line.integer())
        elif head == "MACRO":
            mname, mcol = line.next("macro name")
            if mname not in MACRO_ARITY:
                raise line.error(f"unknown macro {mname!r}", mcol)
            sign, scol = line.next("sign")
            if sign not in "+-":
                raise line.error("macro sign must be + or -", scol)
            op = Macro(mname, tuple(line.qubit() for _ in range(MACRO_ARITY[mname])),
                       1 if sign == "+" else -1)
        elif head == "DECODE":
            op = Decode(line.qubit())
        else:
            try:
                op = _parse_gate(line, head, col)
            except PauliError as exc:
                raise line.error(str(exc), col) from None
        line.done()
        for lab in labels:
            if lab.startswith("@"):
                if not isinstance(op, Conditioned):
                    raise line.error("'@@' label only applies to IF lines", 1)
                g = op.gate
                op = Conditioned(op.bits, CliffordGate(g.kind, g.qubits, g.k, lab[1:]), op.label)
            else:
                op = _with_label(op, lab)
        for q in op.qubits:
            if q not in declared:
                declared[q] = None
                tracker.declared.add(q)
        try:
            tracker.check(op)
        except CircuitError as exc:
            raise ParseError(str(exc), lineno, col) from None
        ops.append(op)
    try:
        return Circuit.build(list(declared.items()), ops, inputs, outputs, name)
    except CircuitError as exc:
        raise ParseError(str(exc), len(text.splitlines()), 1) from None


def _with_label(op, label: str):
    return replace(op, label=label)
