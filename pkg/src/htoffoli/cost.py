"""Location counting and the Toffoli-pipeline cost arithmetic.

A location is one qubit for one time step while it is prepared, gated or
stored.  Ops are sorted into categories and each category carries a weight;
the default rules ignore one-qubit unitaries, measurements and idling, so the
count does not depend on how the circuit is scheduled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Mapping

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
from .routines import REGISTRY, UNENCODED, RoutineDescriptor, lookup

CATEGORIES = (
    "magic_prep",
    "data_prep",
    "two_qubit",
    "conditioned_two_qubit",
    "one_qubit",
    "measurement",
    "decode",
    "idle",
)


class CostError(ValueError):
    pass


@dataclass(frozen=True)
class CostRules:
    """Weight per op category; preparations count per qubit, gates per gate."""

    magic_prep: int = 1
    data_prep: int = 1
    two_qubit: int = 2
    conditioned_two_qubit: int = 2
    one_qubit: int = 0
    measurement: int = 0
    decode: int = 1
    idle: int = 0

    def weight(self, category: str) -> int:
        return getattr(self, category)

    def as_dict(self) -> dict[str, int]:
        return {c: self.weight(c) for c in CATEGORIES}

    @classmethod
    def from_mapping(cls, data: Mapping[str, int]) -> CostRules:
        unknown = set(data) - set(CATEGORIES)
        if unknown:
            raise CostError(f"unknown cost categories {sorted(unknown)}")
        for k, v in data.items():
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise CostError(f"weight for {k} must be a non-negative integer, got {v!r}")
        return replace(cls(), **data)

    @classmethod
    def from_file(cls, path: str | Path) -> CostRules:
        """Read a JSON object mapping category names to integer weights."""
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise CostError(f"{path}: {e}") from None
        if not isinstance(data, dict):
            raise CostError(f"{path}: expected a JSON object")
        return cls.from_mapping(data)


PRESETS: Mapping[str, CostRules] = {
    "default": CostRules(),
    # data preparations free, as a literal reading of the exclusions would have it
    "free-preparation": CostRules(data_prep=0),
    # storage counted on an as-soon-as-possible schedule
    "scheduled": CostRules(idle=1),
}


@dataclass
class CostReport:
    """Locations by category (already weighted) plus raw op counts."""

    breakdown: dict[str, Fraction]
    counts: dict[str, int] = field(default_factory=dict)
    magic_count: int = 0
    outputs: int = 1

    @property
    def total(self) -> Fraction:
        return sum(self.breakdown.values(), Fraction(0))

    @property
    def per_output(self) -> Fraction:
        return self.total / self.outputs

    def as_dict(self) -> dict:
        return {
            "total": str(self.total),
            "per_output": str(self.per_output),
            "outputs": self.outputs,
            "magic_count": self.magic_count,
            "breakdown": {k: str(v) for k, v in self.breakdown.items()},
            "counts": dict(self.counts),
        }


def categorize(op) -> tuple[str, int] | None:
    """(category, multiplicity) of one op, or None when it never costs anything."""
    if getattr(op, "label", None) == UNENCODED:
        return None
    if isinstance(op, PrepareMagic):
        return "magic_prep", len(op.qubits)
    if isinstance(op, (PrepareZero, PreparePlus)):
        return "data_prep", 1
    if isinstance(op, CliffordGate):
        return ("two_qubit" if len(op.qubits) == 2 else "one_qubit"), 1
    if isinstance(op, Conditioned):
        return ("conditioned_two_qubit" if len(op.gate.qubits) == 2 else "one_qubit"), 1
    if isinstance(op, (MeasureZ, MeasureX)):
        return "measurement", 1
    if isinstance(op, Decode):
        return "decode", 1
    if isinstance(op, DiscardOnOutcome):
        return None
    if isinstance(op, Macro):
        raise CostError(f"macro {op.name} has no location cost; expand it first")
    raise CostError(f"unknown op {op!r}")


def _op_qubits(op) -> tuple[int, ...]:
    if isinstance(op, Conditioned):
        return op.gate.qubits
    if isinstance(op, (PrepareMagic, CliffordGate, Macro)):
        return tuple(op.qubits)
    return (op.qubit,)


def idle_locations(c: Circuit, rules: CostRules) -> int:
    """Storage slots on an as-soon-as-possible schedule of the weighted ops.

    Each op with nonzero weight takes one step on its qubits; a qubit is alive
    from its first such step to its last, outputs until the final step.
    """
    layer: dict[int, int] = {}
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    busy: dict[int, int] = {}
    for op in c.ops:
        cat = categorize(op)
        if cat is None or cat[0] == "idle" or rules.weight(cat[0]) == 0:
            continue
        qs = _op_qubits(op)
        t = max((layer.get(q, -1) for q in qs), default=-1) + 1
        for q in qs:
            layer[q] = t
            first.setdefault(q, t)
            last[q] = t
            busy[q] = busy.get(q, 0) + 1
    if not layer:
        return 0
    end = max(layer.values())
    for q in c.outputs:
        if q in last:
            last[q] = end
    return sum(last[q] - first[q] + 1 - busy[q] for q in first)


def count_locations(c: Circuit, rules: CostRules | None = None, outputs: int = 1) -> CostReport:
    rules = rules or CostRules()
    counts = {cat: 0 for cat in CATEGORIES}
    for op in c.ops:
        cat = categorize(op)
        if cat is not None:
            counts[cat[0]] += cat[1]
    if rules.idle:
        counts["idle"] = idle_locations(c, rules)
    breakdown = {cat: Fraction(counts[cat] * rules.weight(cat)) for cat in CATEGORIES}
    return CostReport(breakdown, counts, c.magic_count, outputs)


# --------------------------------------------------------------------------
# pipeline arithmetic


@dataclass(frozen=True)
class BaseCounts:
    """Locations of the building blocks the pipeline is assembled from."""

    routines: Mapping[str, Fraction]
    toffoli_prep: Fraction      # Toffoli state from four |H> states
    toffoli_gate: Fraction      # Toffoli gate from a Toffoli state
    injection: Fraction         # per injected magic state
    source: str = ""


def quoted_base_counts() -> BaseCounts:
    """The reference location figures attached to the registry entries."""
    return BaseCounts(
        {name: Fraction(REGISTRY[name].locations) for name in TABLE_ROUTINES},
        Fraction(REGISTRY["toffoli-state-4h"].locations),
        Fraction(REGISTRY["indirect-toffoli"].locations),
        Fraction(REGISTRY["state-injection"].locations),
        "quoted",
    )


@lru_cache(maxsize=None)
def _reconstructed(rules: CostRules) -> BaseCounts:
    def loc(name: str) -> Fraction:
        return count_locations(REGISTRY[name].circuit, rules).total

    return BaseCounts(
        {name: loc(name) for name in TABLE_ROUTINES},
        loc("toffoli-state-4h"),
        loc("indirect-toffoli"),
        loc("state-injection"),
        "reconstructed",
    )


def reconstructed_base_counts(rules: CostRules | None = None) -> BaseCounts:
    """Base counts measured on the circuits built by this package."""
    return _reconstructed(rules or CostRules())


TABLE_ROUTINES = ("ten-to-two", "fourteen-to-two", "twenty-six-to-six", "h-to-toffoli")
TARGETS = ("toffoli-state", "toffoli-gate")

# |H>-type states consumed per Toffoli state when going through the four-state preparation
H_PER_TOFFOLI = 4


def _descriptor(routine: RoutineDescriptor | str) -> RoutineDescriptor:
    if isinstance(routine, RoutineDescriptor):
        return routine
    try:
        return lookup(routine)
    except KeyError:
        raise CostError(f"unknown routine {routine!r}") from None


def _check_target(target: str) -> None:
    if target not in TARGETS:
        raise CostError(f"target must be one of {TARGETS}, got {target!r}")


def pipeline_cost(
    routine: RoutineDescriptor | str,
    target: str = "toffoli-state",
    include_injection: bool = False,
    base: BaseCounts | None = None,
) -> CostReport:
    """Locations per Toffoli state (or gate) built on ``routine``.

    An |H>-output routine feeds four outputs into the four-state Toffoli
    preparation; a Toffoli-output routine is used as is.  The gate target adds
    the Toffoli-from-state circuit, and injection adds its per-state cost for
    every raw magic state consumed.
    """
    d = _descriptor(routine)
    _check_target(target)
    base = base or quoted_base_counts()
    if d.name not in base.routines:
        raise CostError(f"no base count for {d.name!r}")
    per_out = Fraction(base.routines[d.name]) / d.outputs
    raw_per_out = Fraction(d.magic_inputs, d.outputs)
    if d.output_kind == "TOFFOLI":
        parts = {"routine": per_out}
        raw = raw_per_out
    else:
        parts = {"routine": H_PER_TOFFOLI * per_out, "toffoli-prep": Fraction(base.toffoli_prep)}
        raw = H_PER_TOFFOLI * raw_per_out
    if target == "toffoli-gate":
        parts["toffoli-gate"] = Fraction(base.toffoli_gate)
    if include_injection:
        parts["injection"] = Fraction(base.injection) * raw
    return CostReport(parts, {}, d.magic_inputs, 1)


def state_cost(routine: RoutineDescriptor | str, target: str = "toffoli-state") -> Fraction:
    """Raw magic states consumed per Toffoli state (the same for the gate)."""
    d = _descriptor(routine)
    _check_target(target)
    per = Fraction(d.magic_inputs, d.outputs)
    return per if d.output_kind == "TOFFOLI" else H_PER_TOFFOLI * per


# --------------------------------------------------------------------------
# the comparison table


# reference cells: state cost, output error coefficient, state and gate locations
REFERENCE_TABLE: Mapping[str, dict[str, Fraction]] = {
    "ten-to-two": dict(state_cost=Fraction(20), error=Fraction(36), state=Fraction(183), gate=Fraction(298)),
    "fourteen-to-two": dict(state_cost=Fraction(28), error=Fraction(28), state=Fraction(179), gate=Fraction(334)),
    "twenty-six-to-six": dict(state_cost=Fraction(52, 3), error=Fraction(76), state=Fraction(151), gate=Fraction(758, 3)),
    "h-to-toffoli": dict(state_cost=Fraction(8), error=Fraction(28), state=Fraction(36), gate=Fraction(91)),
}
COLUMNS = ("state_cost", "error", "state", "gate")


@dataclass
class Cell:
    """One table entry.

    ``quoted`` is the reference value, ``arithmetic`` the value rebuilt from the
    quoted base counts, ``reconstructed`` the value from this package's own
    circuits.  Status: ``matched`` when the reconstruction gives the reference
    value, ``derived`` when only the arithmetic on quoted base counts does
    (the circuit count is flagged), ``divergent`` otherwise.
    """

    quoted: Fraction
    arithmetic: Fraction | None
    reconstructed: Fraction | None
    status: str
    note: str = ""


@dataclass
class TableReport:
    rows: dict[str, dict[str, Cell]]
    rules: CostRules
    flags: list[str]

    def as_dict(self) -> dict:
        def num(x):
            return None if x is None else str(x)

        return {
            "rules": self.rules.as_dict(),
            "rows": {
                name: {
                    col: {
                        "quoted": num(cell.quoted),
                        "arithmetic": num(cell.arithmetic),
                        "reconstructed": num(cell.reconstructed),
                        "status": cell.status,
                        "note": cell.note,
                    }
                    for col, cell in row.items()
                }
                for name, row in self.rows.items()
            },
            "flags": list(self.flags),
        }

    def render(self) -> str:
        header = ["routine", "state cost", "output error", "loc (state)", "loc (gate)"]
        lines = []
        for name, row in self.rows.items():
            cells = [name]
            for col in COLUMNS:
                cell = row[col]
                value = render_number(cell.quoted) + ("p^2" if col == "error" else "")
                rec = "-" if cell.reconstructed is None else render_number(cell.reconstructed)
                cells.append(f"{value} [{cell.status}; ours {rec}]")
            lines.append(cells)
        widths = [max(len(r[i]) for r in [header] + lines) for i in range(len(header))]
        out = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in lines]
        if self.flags:
            out.append("")
            out += [f"flag: {f}" for f in self.flags]
        return "\n".join(out)


def render_number(x: Fraction) -> str:
    """Integers as is, anything else to one decimal place."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{float(x):.1f}"


def _status(quoted: Fraction, arithmetic: Fraction | None, reconstructed: Fraction | None) -> str:
    if reconstructed == quoted:
        return "matched"
    if arithmetic == quoted:
        return "derived"
    return "divergent"


def table_one(
    rules: CostRules | None = None,
    error_coefficients: Mapping[str, Fraction | None] | None = None,
) -> TableReport:
    """Rebuild the comparison table.

    ``error_coefficients`` maps routine name to the p^2 coefficient of the
    Toffoli-level output error measured on the reconstruction (None when the
    reconstruction is not second order); when omitted the error column is
    computed via :func:`htoffoli.analysis.toffoli_error_coefficient`.
    """
    rules = rules or CostRules()
    quoted = quoted_base_counts()
    ours = reconstructed_base_counts(rules)
    flags = []
    for name in TABLE_ROUTINES:
        if ours.routines[name] != quoted.routines[name]:
            flags.append(f"{name}: circuit has {ours.routines[name]} locations, reference {quoted.routines[name]}")
    for label, a, b in (
        ("four-state Toffoli preparation", ours.toffoli_prep, quoted.toffoli_prep),
        ("Toffoli gate from state", ours.toffoli_gate, quoted.toffoli_gate),
        ("state injection", ours.injection, quoted.injection),
    ):
        if a != b:
            flags.append(f"{label}: circuit has {a} locations, reference {b}")
    if error_coefficients is None:
        from .analysis import toffoli_error_coefficient

        error_coefficients = {name: toffoli_error_coefficient(name) for name in TABLE_ROUTINES}
    rows: dict[str, dict[str, Cell]] = {}
    for name in TABLE_ROUTINES:
        ref = REFERENCE_TABLE[name]
        sc = state_cost(name)
        row = {"state_cost": Cell(ref["state_cost"], sc, sc, _status(ref["state_cost"], sc, sc))}
        err = error_coefficients.get(name)
        row["error"] = Cell(
            ref["error"], None, err, "matched" if err == ref["error"] else "divergent",
            "" if err is not None else "reconstruction is not second order",
        )
        for col, target in (("state", "toffoli-state"), ("gate", "toffoli-gate")):
            inj = target == "toffoli-gate"
            a = pipeline_cost(name, target, inj, quoted).total
            r = pipeline_cost(name, target, inj, ours).total
            row[col] = Cell(ref[col], a, r, _status(ref[col], a, r))
        rows[name] = row
    return TableReport(rows, rules, flags)
