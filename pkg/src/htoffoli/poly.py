"""Exact univariate polynomials in the fault probability p."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


class Polynomial:
    """Immutable polynomial with exact rational coefficients, lowest order first."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable[Number] = ()):
        c = [Fraction(x) for x in coefficients]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    @classmethod
    def constant(cls, value: Number) -> Polynomial:
        return cls([value])

    @classmethod
    def p(cls) -> Polynomial:
        return cls([0, 1])

    @classmethod
    def bernoulli(cls, weight: int, total: int) -> Polynomial:
        """p**weight * (1-p)**(total-weight), expanded."""
        rest = total - weight
        c = [0] * (total + 1)
        for j in range(rest + 1):
            c[weight + j] = comb(rest, j) * (-1) ** j
        return cls(c)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._c

    def padded(self, length: int) -> tuple[Fraction, ...]:
        return self._c + (Fraction(0),) * (length - len(self._c))

    def integer_coefficients(self) -> tuple[int, ...]:
        if any(x.denominator != 1 for x in self._c):
            raise ValueError(f"non-integer coefficients in {self}")
        return tuple(int(x) for x in self._c)

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def leading_order(self) -> int | None:
        """Lowest power with a nonzero coefficient (None for the zero polynomial)."""
        for i, x in enumerate(self._c):
            if x:
                return i
        return None

    def leading_term(self) -> tuple[int, Fraction] | None:
        order = self.leading_order()
        return None if order is None else (order, self._c[order])

    def coefficient(self, power: int) -> Fraction:
        return self._c[power] if power < len(self._c) else Fraction(0)

    def truncate(self, max_power: int) -> Polynomial:
        return Polynomial(self._c[: max_power + 1])

    def __call__(self, p: Number) -> Fraction | float:
        acc = Fraction(0) if isinstance(p, (int, Fraction)) else 0.0
        for x in reversed(self._c):
            acc = acc * p + x
        return acc

    def _coerce(self, other) -> Polynomial:
        return other if isinstance(other, Polynomial) else Polynomial([other])

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        n = max(len(self._c), len(other._c))
        return Polynomial(a + b for a, b in zip(self.padded(n), other.padded(n)))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(-x for x in self._c)

    def __sub__(self, other) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> Polynomial:
        other = self._coerce(other)
        if not self._c or not other._c:
            return Polynomial()
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a:
                for j, b in enumerate(other._c):
                    out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        out = Polynomial([1])
        for _ in range(n):
            out = out * self
        return out

    def compose(self, inner: Polynomial) -> Polynomial:
        out = Polynomial()
        for x in reversed(self._c):
            out = out * inner + x
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial([other])
        return isinstance(other, Polynomial) and self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def __repr__(self) -> str:
        return f"Polynomial({[str(x) for x in self._c]})"

    def __str__(self) -> str:
        if not self._c:
            return "0"
        terms = []
        for i, x in enumerate(self._c):
            if not x:
                continue
            mag = abs(x)
            base = "" if (mag == 1 and i) else str(mag)
            var = "" if i == 0 else ("p" if i == 1 else f"p^{i}")
            body = base + var if base and var else (base or var)
            terms.append(("-" if x < 0 else "+", body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def sum_polynomials(polys: Sequence[Polynomial]) -> Polynomial:
    out = Polynomial()
    for q in polys:
        out = out + q
    return out
