"""Pauli strings with exact phases and Clifford conjugation rules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

LETTERS = "IXYZ"

# letter -> (x bit, z bit)
_XZ = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_FROM_XZ = {v: k for k, v in _XZ.items()}

# single-qubit products a*b -> (power of i, letter)
_MUL: dict[tuple[str, str], tuple[int, str]] = {}
for _a in LETTERS:
    _MUL[("I", _a)] = (0, _a)
    _MUL[(_a, "I")] = (0, _a)
    _MUL[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL[(_a, _b)] = (1, _c)
    _MUL[(_b, _a)] = (3, _c)

_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"+": 0, "": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """A signed Pauli operator ``i**phase * P`` on an explicit list of qubit ids.

    ``letters[j]`` acts on ``qubits[j]``.  Qubit ids are stable integers, not
    positions, so two strings only multiply when they cover the same ids.
    """

    qubits: tuple[int, ...]
    letters: str
    phase: int = 0

    def __post_init__(self):
        if len(self.qubits) != len(self.letters):
            raise PauliError("qubits and letters differ in length")
        if len(set(self.qubits)) != len(self.qubits):
            raise PauliError("repeated qubit id")
        if any(c not in LETTERS for c in self.letters):
            raise PauliError(f"bad Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, qubits: Sequence[int]) -> PauliString:
        return cls(tuple(qubits), "I" * len(qubits))

    @classmethod
    def parse(cls, text: str, qubits: Sequence[int] | None = None) -> PauliString:
        """Parse ``"+XIZ"``, ``"-iY"`` and friends; qubits default to 0..n-1."""
        text = text.strip()
        i = 0
        while i < len(text) and text[i] not in LETTERS:
            i += 1
        prefix, body = text[:i], text[i:]
        if prefix not in _PREFIX_PHASE:
            raise PauliError(f"bad phase prefix {prefix!r}")
        if qubits is None:
            qubits = range(len(body))
        return cls(tuple(qubits), body, _PREFIX_PHASE[prefix])

    @classmethod
    def from_letters(cls, qubits: Sequence[int], letters: Mapping[int, str]) -> PauliString:
        """Identity on ``qubits`` except for the given ``{qubit: letter}`` entries."""
        qubits = tuple(qubits)
        unknown = set(letters) - set(qubits)
        if unknown:
            raise PauliError(f"qubits {sorted(unknown)} not in support list")
        return cls(qubits, "".join(letters.get(q, "I") for q in qubits))

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + self.letters

    def __getitem__(self, qubit: int) -> str:
        return self.letters[self.qubits.index(qubit)]

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def support(self) -> dict[int, str]:
        return {q: c for q, c in zip(self.qubits, self.letters) if c != "I"}

    def unsigned(self) -> PauliString:
        return PauliString(self.qubits, self.letters, 0)

    def restrict(self, qubits: Iterable[int]) -> PauliString:
        qubits = tuple(qubits)
        return PauliString(qubits, "".join(self[q] for q in qubits), self.phase)

    def commutes_with(self, other: PauliString) -> bool:
        if set(self.qubits) != set(other.qubits):
            raise PauliError("Pauli strings act on different qubit sets")
        anti = 0
        for q, a in zip(self.qubits, self.letters):
            b = other[q]
            anti ^= a != "I" and b != "I" and a != b
        return not anti

    def __mul__(self, other: PauliString) -> PauliString:
        return pauli_mul(self, other)


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Group product ``a * b`` with its phase; both must cover the same qubit ids."""
    if set(a.qubits) != set(b.qubits):
        raise PauliError(f"qubit sets differ: {a.qubits} vs {b.qubits}")
    phase = a.phase + b.phase
    out = []
    for q, la in zip(a.qubits, a.letters):
        k, c = _MUL[(la, b[q])]
        phase += k
        out.append(c)
    return PauliString(a.qubits, "".join(out), phase)


# --------------------------------------------------------------------------
# Clifford gates

ONE_QUBIT_KINDS = ("H", "S", "X", "Y", "Z", "RY", "RZ")
TWO_QUBIT_KINDS = ("CNOT", "CZ")
PAULI_KINDS = ("X", "Y", "Z")


@dataclass(frozen=True)
class CliffordGate:
    """A gate from the working Clifford set.

    ``RY``/``RZ`` with multiplier ``k`` are the rotations ``exp(-i k pi/4 P)``,
    i.e. rotations by ``k * pi/2``.  ``CNOT`` operands are (control, target).
    """

    kind: str
    qubits: tuple[int, ...]
    k: int = 0
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.kind in ONE_QUBIT_KINDS:
            n = 1
        elif self.kind in TWO_QUBIT_KINDS:
            n = 2
        else:
            raise PauliError(f"not a Clifford gate kind: {self.kind!r}")
        if len(self.qubits) != n:
            raise PauliError(f"{self.kind} takes {n} operand(s), got {len(self.qubits)}")
        if n == 2 and self.qubits[0] == self.qubits[1]:
            raise PauliError(f"{self.kind} operands must differ")
        if self.kind in ("RY", "RZ"):
            object.__setattr__(self, "k", self.k % 4)
        elif self.k:
            raise PauliError(f"{self.kind} takes no multiplier")

    @property
    def is_pauli(self) -> bool:
        return self.kind in PAULI_KINDS or (self.kind in ("RY", "RZ") and self.k in (0, 2))

    def inverse(self) -> CliffordGate:
        if self.kind in ("RY", "RZ"):
            return CliffordGate(self.kind, self.qubits, -self.k, self.label)
        if self.kind == "S":
            return CliffordGate("RZ", self.qubits, 3, self.label)
        return self

    def __str__(self) -> str:
        k = f"({self.k})" if self.kind in ("RY", "RZ") else ""
        return f"{self.kind}{k} " + " ".join(f"q{q}" for q in self.qubits)


# Images of X and Z under U . U^dagger, as (phase power of i, letters).
_ONE_QUBIT_IMAGES: dict[tuple[str, int], dict[str, tuple[int, str]]] = {
    ("H", 0): {"X": (0, "Z"), "Z": (0, "X")},
    ("S", 0): {"X": (0, "Y"), "Z": (0, "Z")},
    ("X", 0): {"X": (0, "X"), "Z": (2, "Z")},
    ("Y", 0): {"X": (2, "X"), "Z": (2, "Z")},
    ("Z", 0): {"X": (2, "X"), "Z": (0, "Z")},
    ("RY", 0): {"X": (0, "X"), "Z": (0, "Z")},
    ("RY", 1): {"X": (2, "Z"), "Z": (0, "X")},
    ("RY", 2): {"X": (2, "X"), "Z": (2, "Z")},
    ("RY", 3): {"X": (0, "Z"), "Z": (2, "X")},
    ("RZ", 0): {"X": (0, "X"), "Z": (0, "Z")},
    ("RZ", 1): {"X": (0, "Y"), "Z": (0, "Z")},
    ("RZ", 2): {"X": (2, "X"), "Z": (0, "Z")},
    ("RZ", 3): {"X": (2, "Y"), "Z": (0, "Z")},
}

# Two-qubit images keyed by generator on operand 0/1.
_TWO_QUBIT_IMAGES: dict[str, dict[tuple[int, str], tuple[int, str]]] = {
    "CNOT": {
        (0, "X"): (0, "XX"),
        (0, "Z"): (0, "ZI"),
        (1, "X"): (0, "IX"),
        (1, "Z"): (0, "ZZ"),
    },
    "CZ": {
        (0, "X"): (0, "XZ"),
        (0, "Z"): (0, "ZI"),
        (1, "X"): (0, "ZX"),
        (1, "Z"): (0, "IZ"),
    },
}


def _generator_image(gate: CliffordGate, slot: int, gen: str) -> tuple[int, str]:
    if len(gate.qubits) == 1:
        return _ONE_QUBIT_IMAGES[(gate.kind, gate.k)][gen]
    return _TWO_QUBIT_IMAGES[gate.kind][(slot, gen)]


def conjugate(p: PauliString, gate: CliffordGate) -> PauliString:
    """Return ``U p U^dagger`` for the Clifford ``gate``."""
    if not isinstance(gate, CliffordGate):
        raise PauliError(f"cannot conjugate by non-Clifford {gate!r}")
    ops = gate.qubits
    missing = [q for q in ops if q not in p.qubits]
    if missing:
        raise PauliError(f"gate operands {missing} outside Pauli support list")
    # Split p = phase * rest (x) prod_q i^{y_q} X_q^{x_q} Z_q^{z_q} over operands.
    phase = p.phase
    rest = {q: c for q, c in zip(p.qubits, p.letters) if q not in ops}
    acc = PauliString.from_letters(p.qubits, rest)
    for slot, q in enumerate(ops):
        x, z = _XZ[p[q]]
        phase += x & z  # Y = i X Z
        for bit, gen in ((x, "X"), (z, "Z")):
            if not bit:
                continue
            k, letters = _generator_image(gate, slot, gen)
            img = PauliString.from_letters(p.qubits, dict(zip(ops, letters)))
            acc = pauli_mul(acc, PauliString(img.qubits, img.letters, k))
    return PauliString(acc.qubits, acc.letters, acc.phase + phase)


def letter_xz(letter: str) -> tuple[int, int]:
    return _XZ[letter]


def letter_from_xz(x: int, z: int) -> str:
    return _FROM_XZ[(x & 1, z & 1)]
