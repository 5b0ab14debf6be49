"""Exhaustive fault enumeration through Clifford circuits.

Fault model: each magic preparation independently suffers its twirled Pauli
fault with probability p (Y for |H>, Z for |e^{i pi/4}>).  Clifford gates are
perfect.  A fault is pushed forward by conjugation; a measurement whose
observable anticommutes with the frame has its outcome flipped relative to
the ideal run, and the ideal outcome of every post-selection bit is taken to
be the accepting one.

Two routes compute the same records:

* :func:`propagate_faults` walks the circuit with a :class:`PauliString`;
* :class:`FaultTable` precomputes one response per single fault and combines
  patterns by XOR, which is what makes 2^12 patterns (or all weight <= 2
  patterns of a 26-input routine) cheap.
"""

from __future__ import annotations

import itertools
from math import comb
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
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
from .pauli import CliffordGate, PauliString, conjugate, letter_from_xz, letter_xz, pauli_mul
from .poly import Polynomial

DEFAULT_PATTERN_CAP = 32
FAULT_LETTER = {"H": "Y", "T": "Z"}

# restricted Toffoli-state error model, letters on (control-1, control-2, target)
TOFFOLI_GENERATORS = ("ZII", "IZI", "IIX")
TOFFOLI_CLASSES = tuple(
    "".join(x) for x in itertools.product("IZ", "IZ", "IX")
)


class PropagationError(RuntimeError):
    pass


class NonCliffordError(PropagationError):
    pass


class NonPauliFault(PropagationError):
    """A fault flipped the condition of a non-Pauli Clifford correction."""


class BranchDependentFault(PropagationError):
    """The residual letters would depend on an unflipped random outcome."""


class IncompleteRecords(ValueError):
    pass


@dataclass(frozen=True)
class ErrorPattern:
    """Bitmask over the k magic inputs; bit j flags input j."""

    mask: int
    k: int

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.k) and not (self.k == 0 and self.mask == 0):
            raise ValueError(f"mask {self.mask} out of range for k={self.k}")

    @property
    def flagged(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.k) if self.mask >> j & 1)

    @property
    def weight(self) -> int:
        return bin(self.mask).count("1")


@dataclass(frozen=True)
class OutcomeRecord:
    pattern: ErrorPattern
    accepted: bool
    residual: PauliString  # unsigned, over the circuit outputs

    @property
    def trivial(self) -> bool:
        return self.residual.weight == 0


# --------------------------------------------------------------------------
# direct route


def default_faults(c: Circuit, pattern: ErrorPattern) -> dict[int, str]:
    """Magic-input index -> fault letters for a flagged pattern."""
    preps = c.magic_preps
    if pattern.k != len(preps):
        raise ValueError(f"pattern covers {pattern.k} inputs, circuit has {len(preps)}")
    faults = {}
    for j in pattern.flagged:
        kind = preps[j][1].kind
        if kind not in FAULT_LETTER:
            raise PropagationError(f"no default fault for {kind} inputs")
        faults[j] = FAULT_LETTER[kind]
    return faults


def _gate_as_pauli(g: CliffordGate, qubits: tuple[int, ...]) -> PauliString:
    letter = {"X": "X", "Y": "Y", "Z": "Z", "RY": "Y", "RZ": "Z"}[g.kind]
    if g.kind in ("RY", "RZ") and g.k == 0:
        letter = "I"
    return PauliString.from_letters(qubits, {g.qubits[0]: letter})


def propagate_faults(
    c: Circuit, faults: Mapping[int, str], strict: bool = True
) -> tuple[bool, PauliString, dict[str, int]]:
    """Push faults (magic-input index -> letters on that input's qubits) to the end.

    Returns (accepted, unsigned residual on outputs, flipped-bit map).  With
    ``strict=False`` a flipped non-Pauli correction is left for the caller to
    account for instead of raising.
    """
    qubits = c.qubit_ids
    frame = PauliString.identity(qubits)
    flips: dict[str, int] = {}
    accepted = True
    magic_index = 0
    for op in c.ops:
        if isinstance(op, CliffordGate):
            frame = conjugate(frame, op)
        elif isinstance(op, (PrepareZero, PreparePlus, PrepareMagic)):
            sup = frame.support()
            for q in op.qubits:
                sup.pop(q, None)
            if isinstance(op, PrepareMagic):
                letters = faults.get(magic_index)
                magic_index += 1
                if letters is not None:
                    if len(letters) != len(op.qubits):
                        raise ValueError(f"fault {letters!r} does not fit a {op.kind} input")
                    for q, l in zip(op.qubits, letters):
                        if l != "I":
                            sup[q] = l
            frame = PauliString.from_letters(qubits, sup)
        elif isinstance(op, (MeasureZ, MeasureX)):
            x, z = letter_xz(frame[op.qubit])
            flips[op.bit] = x if isinstance(op, MeasureZ) else z
            sup = frame.support()
            sup.pop(op.qubit, None)
            frame = PauliString.from_letters(qubits, sup)
        elif isinstance(op, Conditioned):
            flipped = sum(flips[b] for b in op.bits) % 2
            if flipped:
                if op.gate.is_pauli:
                    frame = pauli_mul(frame, _gate_as_pauli(op.gate, qubits))
                elif strict:
                    raise NonPauliFault(f"fault flips the condition of {op.gate}")
            moved = conjugate(frame, op.gate)
            if moved.letters != frame.letters:
                raise BranchDependentFault(f"frame {frame} is not invariant under conditional {op.gate}")
        elif isinstance(op, DiscardOnOutcome):
            if flips[op.bit]:
                accepted = False
        elif isinstance(op, Decode):
            pass
        elif isinstance(op, Macro):
            raise NonCliffordError(f"macro {op.name} cannot be propagated; expand it first")
        else:
            raise PropagationError(f"unknown op {op!r}")
    return accepted, frame.restrict(c.outputs).unsigned(), flips


def propagate_pattern(c: Circuit, pattern: ErrorPattern) -> OutcomeRecord:
    accepted, residual, _ = propagate_faults(c, default_faults(c, pattern))
    return OutcomeRecord(pattern, accepted, residual)


# --------------------------------------------------------------------------
# linear route


@dataclass(frozen=True)
class Response:
    """XOR-combinable effect of one fault: output frame bits and flipped bits."""

    frame: int        # bit 2*i = x, 2*i+1 = z of output i
    discards: int     # bit j set when post-selection bit j flips
    nonpauli: int     # bit j set when non-Pauli conditional j flips


class FaultTable:
    """Single-fault responses of a circuit, combined linearly over patterns."""

    def __init__(self, c: Circuit, generators: Mapping[int, Sequence[str]] | None = None):
        self.circuit = c
        preps = c.magic_preps
        self.k = len(preps)
        self.outputs = c.outputs
        self._discard_bits = [op.bit for op in c.ops if isinstance(op, DiscardOnOutcome)]
        self._nonpauli = [
            (i, op) for i, op in enumerate(c.ops)
            if isinstance(op, Conditioned) and not op.gate.is_pauli
        ]
        if generators is None:
            generators = {j: (FAULT_LETTER[op.kind],) for j, (_, op) in enumerate(preps)}
        self.generators = {j: tuple(g) for j, g in generators.items()}
        self.responses: dict[tuple[int, str], Response] = {}
        for j, gens in self.generators.items():
            for g in gens:
                self.responses[(j, g)] = self._single(j, g)
        self.single = [self.responses.get((j, self.generators[j][0])) if j in self.generators else None
                       for j in range(self.k)]

    def _single(self, j: int, letters: str) -> Response:
        c = self.circuit
        accepted, residual, flips = propagate_faults(c, {j: letters}, strict=False)
        frame = 0
        for i, q in enumerate(self.outputs):
            x, z = letter_xz(residual[q])
            frame |= x << (2 * i) | z << (2 * i + 1)
        discards = 0
        for i, b in enumerate(self._discard_bits):
            discards |= flips[b] << i
        nonpauli = 0
        for i, (_, op) in enumerate(self._nonpauli):
            nonpauli |= (sum(flips[b] for b in op.bits) % 2) << i
        return Response(frame, discards, nonpauli)

    def combine(self, responses: Iterable[Response]) -> Response:
        f = d = n = 0
        for r in responses:
            f ^= r.frame
            d ^= r.discards
            n ^= r.nonpauli
        return Response(f, d, n)

    def residual(self, frame: int) -> PauliString:
        letters = "".join(
            letter_from_xz(frame >> (2 * i), frame >> (2 * i + 1)) for i in range(len(self.outputs))
        )
        return PauliString(self.outputs, letters)

    def record(self, mask: int) -> OutcomeRecord:
        r = self.combine(self.single[j] for j in range(self.k) if mask >> j & 1)
        if r.nonpauli:
            raise NonPauliFault(f"pattern {mask:#x} flips a non-Pauli correction")
        return OutcomeRecord(ErrorPattern(mask, self.k), r.discards == 0, self.residual(r.frame))


def _chunks(k: int, workers: int) -> list[tuple[int, int]]:
    total = 1 << k
    step = max(1, total // (workers * 4))
    return [(lo, min(total, lo + step)) for lo in range(0, total, step)]


def _records_in_range(args) -> list[OutcomeRecord]:
    c, lo, hi = args
    table = FaultTable(c)
    return [table.record(m) for m in range(lo, hi)]


def enumerate_patterns(
    c: Circuit,
    cap: int = DEFAULT_PATTERN_CAP,
    max_weight: int | None = None,
    workers: int = 1,
) -> list[OutcomeRecord]:
    """One record per error pattern, ordered by mask.

    With ``max_weight`` only patterns up to that weight are produced; the
    resulting polynomials are exact through order ``max_weight``.
    """
    k = c.magic_count
    if k > cap:
        raise ValueError(f"{k} magic inputs exceeds pattern cap {cap}")
    table = FaultTable(c)
    if max_weight is not None and max_weight < k:
        masks = sorted(
            sum(1 << j for j in combo)
            for w in range(max_weight + 1)
            for combo in itertools.combinations(range(k), w)
        )
        return [table.record(m) for m in masks]
    if workers > 1 and k >= 10:
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_records_in_range, [(c, lo, hi) for lo, hi in _chunks(k, workers)])
            return [r for part in parts for r in part]
    return [table.record(m) for m in range(1 << k)]


# --------------------------------------------------------------------------
# polynomials


def _check_complete(records: Sequence[OutcomeRecord]) -> tuple[int, int]:
    """Return (k, max weight covered); raise unless every pattern up to that weight is present."""
    if not records:
        raise IncompleteRecords("no records")
    k = records[0].pattern.k
    if any(r.pattern.k != k for r in records):
        raise IncompleteRecords("records from different circuits")
    masks = {r.pattern.mask for r in records}
    if len(masks) != len(records):
        raise IncompleteRecords("duplicate patterns")
    top = max(r.pattern.weight for r in records)
    expected = sum(_binom(k, w) for w in range(top + 1))
    if len(masks) != expected:
        raise IncompleteRecords(f"{len(masks)} records, expected {expected} for k={k} up to weight {top}")
    return k, top


def _binom(n: int, r: int) -> int:
    return comb(n, r)


def _weighted(records: Iterable[OutcomeRecord], k: int, top: int) -> Polynomial:
    counts: dict[int, int] = {}
    for r in records:
        counts[r.pattern.weight] = counts.get(r.pattern.weight, 0) + 1
    out = Polynomial()
    for w, n in counts.items():
        out = out + n * Polynomial.bernoulli(w, k)
    return out if top >= k else out.truncate(top)


def valid_order(records: Sequence[OutcomeRecord]) -> int:
    """Highest power of p whose coefficient the record set determines exactly."""
    return _check_complete(records)[1]


def acceptance_polynomial(records: Sequence[OutcomeRecord]) -> Polynomial:
    k, top = _check_complete(records)
    return _weighted((r for r in records if r.accepted), k, top)


def rejection_polynomial(records: Sequence[OutcomeRecord]) -> Polynomial:
    k, top = _check_complete(records)
    return _weighted((r for r in records if not r.accepted), k, top)


def joint_error_polynomial(records: Sequence[OutcomeRecord]) -> Polynomial:
    """Probability of (accepted and nontrivial residual)."""
    k, top = _check_complete(records)
    return _weighted((r for r in records if r.accepted and not r.trivial), k, top)


def class_distribution(records: Sequence[OutcomeRecord]) -> dict[str, Polynomial]:
    """Accepted probability grouped by residual letters over the outputs."""
    k, top = _check_complete(records)
    groups: dict[str, list[OutcomeRecord]] = {}
    for r in records:
        if r.accepted:
            groups.setdefault(r.residual.letters, []).append(r)
    return {key: _weighted(rs, k, top) for key, rs in sorted(groups.items())}


def marginal_error_polynomials(records: Sequence[OutcomeRecord]) -> dict[int, dict[str, Polynomial]]:
    """Per output qubit: accepted probability of each non-identity letter there."""
    k, top = _check_complete(records)
    outputs = records[0].residual.qubits
    out: dict[int, dict[str, Polynomial]] = {}
    for q in outputs:
        per: dict[str, list[OutcomeRecord]] = {}
        for r in records:
            if r.accepted and r.residual[q] != "I":
                per.setdefault(r.residual[q], []).append(r)
        out[q] = {l: _weighted(rs, k, top) for l, rs in sorted(per.items())}
    return out


# --------------------------------------------------------------------------
# Toffoli-state inputs


def toffoli_input_distribution(**probabilities: Polynomial | int) -> dict[str, Polynomial]:
    """Build a per-input class distribution, e.g. ``IIX=p``; identity takes the rest."""
    dist = {}
    for key, poly in probabilities.items():
        if key not in TOFFOLI_CLASSES or key == "III":
            raise ValueError(f"{key!r} is outside the restricted Toffoli error model")
        dist[key] = poly if isinstance(poly, Polynomial) else Polynomial.constant(poly)
    dist["III"] = 1 - sum(dist.values(), Polynomial())
    return dict(sorted(dist.items()))


def toffoli_distill_distribution(
    inputs: Mapping[str, Polynomial] | Sequence[Mapping[str, Polynomial]],
    routine: Circuit,
) -> dict[str, Polynomial]:
    """Exact accepted output class distribution for independent faulty Toffoli inputs.

    ``inputs`` is one class distribution shared by every Toffoli input, or one
    per input.  Classes are letters on (control-1, control-2, target) drawn
    from Z/Z/X; anything else is rejected (twirling is assumed upstream).
    """
    preps = routine.magic_preps
    if any(op.kind != "TOFFOLI" for _, op in preps):
        raise ValueError("routine consumes non-Toffoli magic states")
    m = len(preps)
    per_input = [inputs] * m if isinstance(inputs, Mapping) else list(inputs)
    if len(per_input) != m:
        raise ValueError(f"{len(per_input)} input distributions for {m} Toffoli inputs")
    for dist in per_input:
        for key in dist:
            if key not in TOFFOLI_CLASSES:
                raise ValueError(f"input class {key!r} is outside the restricted model")
    table = FaultTable(routine, {j: TOFFOLI_GENERATORS for j in range(m)})

    def response(j: int, key: str) -> Response:
        parts = [table.responses[(j, g)] for g, letter in zip(TOFFOLI_GENERATORS, _split(key)) if letter]
        return table.combine(parts)

    out: dict[str, Polynomial] = {}
    choices = [[(key, poly) for key, poly in dist.items() if not poly.is_zero()] for dist in per_input]
    for combo in itertools.product(*choices):
        r = table.combine(response(j, key) for j, (key, _) in enumerate(combo))
        if r.nonpauli:
            raise NonPauliFault(f"input classes {[k for k, _ in combo]} flip a non-Pauli correction")
        if r.discards:
            continue
        weight = Polynomial.constant(1)
        for _, poly in combo:
            weight = weight * poly
        key = table.residual(r.frame).letters
        out[key] = out.get(key, Polynomial()) + weight
    return dict(sorted(out.items()))


def _split(key: str) -> tuple[bool, bool, bool]:
    return (key[0] == "Z", key[1] == "Z", key[2] == "X")


# --------------------------------------------------------------------------
# helpers for the state-vector cross-check


def inject_faults(c: Circuit, faults: Mapping[int, str]) -> Circuit:
    """Insert the given Pauli faults as explicit gates right after their magic preparations."""
    ops = []
    magic_index = 0
    for op in c.ops:
        ops.append(op)
        if isinstance(op, PrepareMagic):
            letters = faults.get(magic_index, "")
            for q, l in zip(op.qubits, letters):
                if l != "I":
                    ops.append(CliffordGate(l, (q,), label="fault"))
            magic_index += 1
    return Circuit.build(c.qubits, ops, c.inputs, c.outputs, c.name)


def twirl_toffoli_classes(dist: Mapping[str, Polynomial]) -> dict[str, Polynomial]:
    """Project output classes onto the restricted Toffoli model.

    On the Toffoli state Z on the target acts as CZ between the controls;
    twirling that over the state's symmetries spreads it evenly over the four
    control-Z combinations, so a target Z or Y keeps only its X part and a
    quarter of the weight goes to each control pattern.
    """
    out: dict[str, Polynomial] = {}
    for key, poly in dist.items():
        c1, c2, t = key
        if c1 not in "IZ" or c2 not in "IZ":
            raise ValueError(f"class {key!r} has X-type errors on a control")
        if t in "IX":
            spread = [(key, poly)]
        else:
            tx = "X" if t == "Y" else "I"
            spread = [
                (_flip(c1, f1) + _flip(c2, f2) + tx, poly * Fraction(1, 4))
                for f1, f2 in itertools.product((0, 1), repeat=2)
            ]
        for k2, p2 in spread:
            out[k2] = out.get(k2, Polynomial()) + p2
    return dict(sorted(out.items()))


def _flip(letter: str, flip: int) -> str:
    return letter if not flip else ("I" if letter == "Z" else "Z")


# --------------------------------------------------------------------------
# state-vector route for routines whose faults leave the Clifford frame


def simulated_error_polynomials(
    c: Circuit,
    ideal: Sequence[np.ndarray],
    max_weight: int = 2,
    denominator: int = 1 << 12,
) -> tuple[Polynomial, list[Polynomial]]:
    """Acceptance and per-output marginal error, exact through ``p**max_weight``.

    Each pattern up to ``max_weight`` is simulated with its faults inserted;
    the accepted weight and each output's overlap with the state orthogonal to
    ``ideal[i]`` are recovered as rationals (they are dyadic for these
    circuits) and weighted by p^w (1-p)^(k-w).
    """
    from .statevec import simulate

    k = c.magic_count
    if len(ideal) != len(c.outputs):
        raise ValueError("one ideal single-qubit state per output is required")
    wrong = [np.eye(2) - np.outer(v, v.conj()) for v in ideal]
    acc = Polynomial()
    errs = [Polynomial() for _ in c.outputs]
    for w in range(min(max_weight, k) + 1):
        for combo in itertools.combinations(range(k), w):
            mask = sum(1 << j for j in combo)
            sim = simulate(inject_faults(c, default_faults(c, ErrorPattern(mask, k))))
            basis = Polynomial.bernoulli(w, k)
            acc = acc + basis * _rational(sim.acceptance, denominator)
            for i, q in enumerate(c.outputs):
                mass = 0.0
                for br in sim.branches:
                    rho = br.state.density([q])
                    mass += br.probability * float(np.real(np.trace(wrong[i] @ rho)))
                errs[i] = errs[i] + basis * _rational(mass, denominator)
    top = min(max_weight, k)
    return acc.truncate(top), [e.truncate(top) for e in errs]


def _rational(x: float, denominator: int) -> Fraction:
    f = Fraction(x).limit_denominator(denominator)
    if abs(float(f) - x) > 1e-9:
        raise ValueError(f"{x!r} is not a rational with denominator <= {denominator}")
    return f
