"""Checks and derived figures that combine the routines with both simulators."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import routines as R
from .circuit import Circuit
from .poly import Polynomial, sum_polynomials
from .propagation import (
    ErrorPattern,
    default_faults,
    enumerate_patterns,
    inject_faults,
    joint_error_polynomial,
    marginal_error_polynomials,
    propagate_pattern,
    simulated_error_polynomials,
)
from .statevec import channel_equivalent, fidelity, magic_vector, pauli_matrix, simulate, unitary_equivalent

TOLERANCE = 1e-10


@dataclass
class IdentityResult:
    name: str
    passed: bool
    seconds: float


def _identities() -> dict[str, Callable[[], bool]]:
    macro = R.margolus_toffoli("macro")
    return {
        "margolus-left": lambda: unitary_equivalent(R.margolus_toffoli("left"), macro, TOLERANCE),
        "margolus-right": lambda: unitary_equivalent(R.margolus_toffoli("right"), macro, TOLERANCE),
        "indirect-y-rotation": lambda: all(
            channel_equivalent(R.indirect_y_rotation(s), R.direct_y_rotation(s), TOLERANCE) for s in (1, -1)
        ),
        "indirect-toffoli": lambda: channel_equivalent(R.indirect_toffoli(), R.toffoli_macro(), TOLERANCE),
        "margolus-state-prep": lambda: unitary_equivalent(R.toffoli_state_margolus(), R.toffoli_state_direct(), TOLERANCE),
        "hadamard-retarget": lambda: unitary_equivalent(
            R.toffoli_state_retargeted(), R.toffoli_state_direct_on("cct"), TOLERANCE
        ),
    }


IDENTITY_NAMES = tuple(_identities())


def verify_identities(names=None) -> list[IdentityResult]:
    checks = _identities()
    out = []
    for name in names or checks:
        if name not in checks:
            raise KeyError(f"unknown identity {name!r}")
        t = time.perf_counter()
        ok = bool(checks[name]())
        out.append(IdentityResult(name, ok, time.perf_counter() - t))
    return out


# --------------------------------------------------------------------------
# fault-by-fault comparison of the two simulators


@dataclass
class CrossCheck:
    mask: int
    accepted: bool
    residual: str
    acceptance: float
    fidelity: float | None

    @property
    def consistent(self) -> bool:
        if not self.accepted:
            return self.acceptance < TOLERANCE
        return abs(self.acceptance - 1) < TOLERANCE and self.fidelity is not None and self.fidelity > 1 - TOLERANCE


def cross_validate(c: Circuit, ideal: np.ndarray, masks=None) -> list[CrossCheck]:
    """Simulate every pattern with its faults inserted and compare with propagation.

    ``ideal`` is the fault-free output vector in the order of ``c.outputs``.
    Accepted patterns must be accepted with certainty and land on
    residual * ideal in every branch; rejected ones must never be accepted.
    """
    k = c.magic_count
    out = []
    for mask in masks if masks is not None else range(1 << k):
        pattern = ErrorPattern(mask, k)
        rec = propagate_pattern(c, pattern)
        sim = simulate(inject_faults(c, default_faults(c, pattern)))
        fid = None
        if rec.accepted and sim.branches:
            expected = pauli_matrix(rec.residual, c.outputs) @ ideal
            fid = min(fidelity(b.state.vector(c.outputs), expected) for b in sim.branches)
        out.append(CrossCheck(mask, rec.accepted, rec.residual.letters, sim.acceptance, fid))
    return out


def toffoli_state_vector() -> np.ndarray:
    return magic_vector("TOFFOLI")


# --------------------------------------------------------------------------
# competitor routines


@dataclass(frozen=True)
class MarginalReport:
    name: str
    acceptance: Polynomial
    marginals: tuple[Polynomial, ...]
    exact_through: int
    method: str

    @property
    def worst(self) -> Polynomial:
        """The output whose error has the lowest order, then the largest leading coefficient."""
        def key(p: Polynomial):
            lt = p.leading_term()
            return (float("inf"), 0) if lt is None else (lt[0], -lt[1])

        return min(self.marginals, key=key)

    @property
    def leading_term(self) -> tuple[int, Fraction] | None:
        return self.worst.leading_term()


FULL_ENUMERATION_LIMIT = 16


@lru_cache(maxsize=None)
def marginal_errors(name: str, max_weight: int = 2) -> MarginalReport:
    """Per-output error probability (joint with acceptance) of an |H>- or |T>-output routine.

    Routines whose faults stay Pauli through every gate are enumerated through
    the frame engine, exhaustively when small enough; the |H>-state routine on
    the four-qubit code passes faults through non-Clifford rotations and is
    handled pattern by pattern on the state-vector simulator.
    """
    d = R.lookup(name)
    c = d.circuit
    if d.output_kind == "H":
        acc, errs = simulated_error_polynomials(c, [magic_vector("H")] * len(c.outputs), max_weight)
        return MarginalReport(name, acc, tuple(errs), max_weight, "state-vector")
    if d.output_kind != "T":
        raise ValueError(f"{name} does not output one-qubit magic states")
    full = c.magic_count <= FULL_ENUMERATION_LIMIT
    records = enumerate_patterns(c, max_weight=None if full else max_weight)
    from .propagation import acceptance_polynomial, valid_order

    per = marginal_error_polynomials(records)
    marg = tuple(sum_polynomials(list(per[q].values())) for q in c.outputs)
    top = c.magic_count if full else valid_order(records)
    return MarginalReport(name, acceptance_polynomial(records), marg, top, "enumeration" if full else "truncated")


@lru_cache(maxsize=None)
def toffoli_error_coefficient(name: str) -> Fraction | None:
    """p^2 coefficient of the error on a Toffoli state built from ``name``'s outputs.

    For an |H>/|T> routine four outputs feed one Toffoli state, so the
    coefficient is four times the worst marginal one (None if that marginal is
    not second order).  For the direct routine it is the joint error term.
    """
    d = R.lookup(name)
    if d.output_kind == "TOFFOLI":
        e = joint_error_polynomial(enumerate_patterns(d.circuit))
        return e.coefficient(2) if e.leading_order() == 2 else None
    lt = marginal_errors(name).leading_term
    if lt is None or lt[0] != 2:
        return None
    return 4 * lt[1]
