"""Truncated graded series and Laurent objects over exact polynomials.

A ``GSeries`` is a formal power series in an abstract grading unit (face
count for the closed recursive systems), truncated at a fixed order, whose
coefficients are :class:`~mobile_atlas.poly.AuxPoly`. A ``ZLaurent`` attaches
one ``GSeries`` to each exponent of the crossing variable z; products widen
the exponent window additively and may be clamped.

Both types are value-semantic: operations return new objects and never
mutate their inputs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

from .errors import NonDivisible, NonInvertible
from .poly import AuxPoly, normalize_number


class GSeries:
    """Series c_0 + c_1 t + ... + c_N t^N with AuxPoly coefficients."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Mapping[int, AuxPoly] | None = None):
        if order < 0:
            raise ValueError("order must be non-negative")
        self.order = order
        self.coeffs: dict[int, AuxPoly] = {}
        if coeffs:
            for g, p in coeffs.items():
                if 0 <= g <= order and p:
                    self.coeffs[g] = p

    # --- constructors ---

    @staticmethod
    def zero(order: int) -> "GSeries":
        return GSeries(order)

    @staticmethod
    def one(order: int) -> "GSeries":
        return GSeries(order, {0: AuxPoly.one()})

    @staticmethod
    def of(value, order: int) -> "GSeries":
        if isinstance(value, GSeries):
            return value.truncate(order)
        if isinstance(value, AuxPoly):
            return GSeries(order, {0: value})
        return GSeries(order, {0: AuxPoly.const(value)})

    # --- accessors ---

    def coefficient(self, n: int) -> AuxPoly:
        return self.coeffs.get(n, AuxPoly.zero())

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, GSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, frozenset((g, hash(p)) for g, p in self.coeffs.items())))

    def __repr__(self):
        inner = ", ".join(f"t^{g}: {p.canonical_str()}" for g, p in sorted(self.coeffs.items()))
        return f"GSeries(order={self.order}, {{{inner}}})"

    # --- ring operations (all truncate at self.order) ---

    def truncate(self, order: int) -> "GSeries":
        return GSeries(order, {g: p for g, p in self.coeffs.items() if g <= order})

    def __add__(self, other):
        other = GSeries.of(other, self.order)
        out = dict(self.coeffs)
        for g, p in other.coeffs.items():
            if g > self.order:
                continue
            s = out.get(g, AuxPoly.zero()) + p
            if s:
                out[g] = s
            else:
                out.pop(g, None)
        return GSeries(self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return GSeries(self.order, {g: -p for g, p in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-GSeries.of(other, self.order))

    def __rsub__(self, other):
        return GSeries.of(other, self.order) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, AuxPoly)):
            factor = other if isinstance(other, AuxPoly) else AuxPoly.const(other)
            if not factor:
                return GSeries(self.order)
            return GSeries(self.order, {g: p * factor for g, p in self.coeffs.items()})
        if not isinstance(other, GSeries):
            return NotImplemented
        order = self.order
        out: dict[int, AuxPoly] = {}
        for g1, p1 in self.coeffs.items():
            for g2, p2 in other.coeffs.items():
                g = g1 + g2
                if g > order:
                    continue
                prod = p1 * p2
                if g in out:
                    out[g] = out[g] + prod
                else:
                    out[g] = prod
        return GSeries(order, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers: use inverse() explicitly")
        result = GSeries.one(self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            if k > 1:
                base = base * base
            k >>= 1
        return result

    def shift(self, steps: int) -> "GSeries":
        """Multiply by t^steps, dropping anything beyond the order."""
        if steps == 0:
            return self
        return GSeries(self.order, {g + steps: p for g, p in self.coeffs.items() if g + steps <= self.order})

    shift_grade = shift

    def inverse_of_one_minus(self) -> "GSeries":
        """1/(1 - self); requires zero constant term."""
        if self.coefficient(0):
            raise NonInvertible("argument of 1/(1-x) must have zero constant term")
        result = GSeries.one(self.order)
        # grade-by-grade accumulation: S = 1 + x S
        for _ in range(self.order):
            nxt = GSeries.one(self.order) + self * result
            if nxt == result:
                break
            result = nxt
        return result

    def inverse(self) -> "GSeries":
        """Multiplicative inverse; constant term must be 1 or -1."""
        c0 = self.coefficient(0)
        if c0.is_one():
            return (GSeries.one(self.order) - self).inverse_of_one_minus()
        if (-c0).is_one():
            return -((GSeries.one(self.order) + self).inverse_of_one_minus())
        raise NonInvertible("constant term must be a unit (1 or -1)")

    # --- reporting helpers ---

    def map_coeffs(self, fn: Callable[[AuxPoly], AuxPoly]) -> "GSeries":
        return GSeries(self.order, {g: fn(p) for g, p in self.coeffs.items()})

    def substitute(self, mapping) -> "GSeries":
        return self.map_coeffs(lambda p: p.substitute(mapping))

    def collect(self) -> AuxPoly:
        """Sum of all graded coefficients as a single polynomial."""
        total = AuxPoly.zero()
        for p in self.coeffs.values():
            total = total + p
        return total

    def collect_by(self, var: str, max_power: int | None = None) -> dict[int, AuxPoly]:
        """Grade-summed coefficients grouped by the power of ``var``."""
        grouped = self.collect().split_by(var)
        if max_power is not None:
            grouped = {n: p for n, p in grouped.items() if n <= max_power}
        return grouped

    def derivative_in(self, var: str) -> "GSeries":
        return self.map_coeffs(lambda p: p.derivative(var))

    def divide_exact(self, q) -> "GSeries":
        return self.map_coeffs(lambda p: p.divide_exact(q))


class ZLaurent:
    """Laurent object in z whose coefficients are truncated GSeries."""

    __slots__ = ("order", "coeffs", "window")

    def __init__(self, order: int, coeffs: Mapping[int, GSeries] | None = None,
                 window: tuple[int, int] | None = None):
        self.order = order
        self.window = window
        self.coeffs: dict[int, GSeries] = {}
        if coeffs:
            for e, s in coeffs.items():
                if window is not None and not (window[0] <= e <= window[1]):
                    continue
                if not s.is_zero():
                    self.coeffs[e] = s

    # --- constructors ---

    @staticmethod
    def zero(order: int, window=None) -> "ZLaurent":
        return ZLaurent(order, window=window)

    @staticmethod
    def z_power(exp: int, order: int, scalar=1, window=None) -> "ZLaurent":
        return ZLaurent(order, {exp: GSeries.of(scalar, order)}, window=window)

    @staticmethod
    def of_series(s: GSeries, window=None) -> "ZLaurent":
        return ZLaurent(s.order, {0: s}, window=window)

    # --- accessors ---

    def coefficient(self, exp: int) -> GSeries:
        return self.coeffs.get(exp, GSeries.zero(self.order))

    def exponents(self) -> list[int]:
        return sorted(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def as_series(self) -> GSeries:
        """The exponent-0 part, asserting nothing else is present."""
        for e in self.coeffs:
            if e != 0:
                raise ValueError(f"nonscalar Laurent object (exponent {e} present)")
        return self.coefficient(0)

    def __eq__(self, other):
        if not isinstance(other, ZLaurent):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __repr__(self):
        inner = ", ".join(f"z^{e}" for e in self.exponents())
        return f"ZLaurent(order={self.order}, window={self.window}, exps=[{inner}])"

    def _spawn(self, coeffs) -> "ZLaurent":
        return ZLaurent(self.order, coeffs, window=self.window)

    # --- ring operations ---

    def __add__(self, other):
        if isinstance(other, (int, Fraction, AuxPoly, GSeries)):
            other = ZLaurent.of_series(GSeries.of(other, self.order), self.window)
        if not isinstance(other, ZLaurent):
            return NotImplemented
        out = dict(self.coeffs)
        for e, s in other.coeffs.items():
            t = out.get(e)
            su = s if t is None else t + s
            if su.is_zero():
                out.pop(e, None)
            else:
                out[e] = su
        return self._spawn(out)

    __radd__ = __add__

    def __neg__(self):
        return self._spawn({e: -s for e, s in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, AuxPoly, GSeries)):
            other = ZLaurent.of_series(GSeries.of(other, self.order), self.window)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, AuxPoly)):
            return self._spawn({e: s * other for e, s in self.coeffs.items()})
        if isinstance(other, GSeries):
            return self._spawn({e: s * other for e, s in self.coeffs.items()})
        if not isinstance(other, ZLaurent):
            return NotImplemented
        out: dict[int, GSeries] = {}
        for e1, s1 in self.coeffs.items():
            for e2, s2 in other.coeffs.items():
                e = e1 + e2
                if self.window is not None and not (self.window[0] <= e <= self.window[1]):
                    continue
                prod = s1 * s2
                if prod.is_zero():
                    continue
                if e in out:
                    out[e] = out[e] + prod
                else:
                    out[e] = prod
        return self._spawn(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative Laurent powers are not supported")
        result = ZLaurent.of_series(GSeries.one(self.order), self.window)
        base = self
        while k:
            if k & 1:
                result = result * base
            if k > 1:
                base = base * base
            k >>= 1
        return result

    def shift_grade(self, steps: int) -> "ZLaurent":
        return self._spawn({e: s.shift(steps) for e, s in self.coeffs.items()})

    def map_series(self, fn: Callable[[GSeries], GSeries]) -> "ZLaurent":
        return self._spawn({e: fn(s) for e, s in self.coeffs.items()})

    def substitute(self, mapping) -> "ZLaurent":
        return self.map_series(lambda s: s.substitute(mapping))

    # --- extraction operators ---

    def part(self, selector) -> "ZLaurent":
        """Project onto an exponent range.

        Selectors: 'plus' (>= 0), 'minus' (<= 0), 'zero' (== 0),
        'strict_neg' (< 0), 'strict_pos' (> 0), or ('coeff', k).
        """
        if isinstance(selector, tuple) and selector[0] == "coeff":
            k = selector[1]
            if k not in self.coeffs:
                return self._spawn({})
            return self._spawn({0: self.coeffs[k]})
        tests = {
            "plus": lambda e: e >= 0,
            "minus": lambda e: e <= 0,
            "zero": lambda e: e == 0,
            "strict_neg": lambda e: e < 0,
            "strict_pos": lambda e: e > 0,
        }
        if selector not in tests:
            raise ValueError(f"unknown selector {selector!r}")
        keep = tests[selector]
        return self._spawn({e: s for e, s in self.coeffs.items() if keep(e)})

    def times_z_power(self, k: int) -> "ZLaurent":
        return self._spawn({e + k: s for e, s in self.coeffs.items()})

    def substitute_z_reciprocal(self, scale: GSeries) -> "ZLaurent":
        """z -> scale / z, i.e. coefficient of z^e moves to z^{-e} times scale^e."""
        inv = None
        out: dict[int, GSeries] = {}
        for e, s in self.coeffs.items():
            if e >= 0:
                factor = scale ** e
            else:
                if inv is None:
                    inv = scale.inverse()
                factor = inv ** (-e)
            term = s * factor
            if -e in out:
                out[-e] = out[-e] + term
            else:
                out[-e] = term
        return self._spawn(out)
