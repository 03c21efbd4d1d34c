"""Exact multivariate polynomials over arbitrary-precision rationals.

Monomials are tuples of (variable, exponent) pairs sorted by variable name,
with strictly positive exponents. Coefficients are Python ints whenever the
value is integral and ``fractions.Fraction`` otherwise; no floats ever enter
this module. The zero polynomial stores no terms.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import NonDivisible

Number = Union[int, Fraction]
Monomial = tuple  # tuple[tuple[str, int], ...]

_ZERO_MONO: Monomial = ()


def normalize_number(q) -> Number:
    """Collapse integral Fractions to int; reject floats."""
    if isinstance(q, bool):
        raise TypeError("booleans are not polynomial coefficients")
    if isinstance(q, int):
        return q
    if isinstance(q, Fraction):
        return q.numerator if q.denominator == 1 else q
    raise TypeError(f"expected int or Fraction, got {type(q).__name__}")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps: dict = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


class AuxPoly:
    """Immutable-by-convention polynomial in named auxiliary variables."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        self.terms = dict(terms) if terms else {}

    # --- constructors ---

    @staticmethod
    def zero() -> "AuxPoly":
        return AuxPoly()

    @staticmethod
    def const(q) -> "AuxPoly":
        q = normalize_number(Fraction(q) if not isinstance(q, (int, Fraction)) else q)
        return AuxPoly({_ZERO_MONO: q}) if q else AuxPoly()

    @staticmethod
    def one() -> "AuxPoly":
        return AuxPoly({_ZERO_MONO: 1})

    @staticmethod
    def var(name: str, exp: int = 1, coeff=1) -> "AuxPoly":
        coeff = normalize_number(coeff)
        if not coeff:
            return AuxPoly()
        if exp == 0:
            return AuxPoly({_ZERO_MONO: coeff})
        if exp < 0:
            raise ValueError("negative exponents are not representable")
        return AuxPoly({((name, exp),): coeff})

    # --- predicates and accessors ---

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {_ZERO_MONO: 1}

    def constant_term(self) -> Number:
        return self.terms.get(_ZERO_MONO, 0)

    def variables(self) -> set:
        out = set()
        for mono in self.terms:
            for v, _ in mono:
                out.add(v)
        return out

    def degree(self, var: str) -> int:
        best = 0
        for mono in self.terms:
            for v, e in mono:
                if v == var and e > best:
                    best = e
        return best

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, AuxPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == AuxPoly.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # --- ring operations ---

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = normalize_number(s)
            else:
                out.pop(mono, None)
        return AuxPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return AuxPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.terms, other.terms
        if not a or not b:
            return AuxPoly()
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for mono_a, ca in a.items():
            for mono_b, cb in b.items():
                mono = _mono_mul(mono_a, mono_b)
                s = out.get(mono, 0) + ca * cb
                if s:
                    out[mono] = s
                else:
                    del out[mono]
        for mono, c in out.items():
            out[mono] = normalize_number(c)
        return AuxPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not representable")
        result = AuxPoly.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # --- structural operations ---

    def substitute(self, mapping: Mapping[str, "AuxPoly | Number"]) -> "AuxPoly":
        """Replace variables by polynomials or exact numbers."""
        subs = {}
        for v, val in mapping.items():
            subs[v] = val if isinstance(val, AuxPoly) else AuxPoly.const(val)
        out = AuxPoly()
        for mono, c in self.terms.items():
            term = AuxPoly.const(c)
            for v, e in mono:
                if v in subs:
                    term = term * subs[v] ** e
                else:
                    term = term * AuxPoly.var(v, e)
            out = out + term
        return out

    def split_by(self, var: str) -> dict:
        """Group terms by the exponent of ``var``; the variable is removed."""
        out: dict[int, dict] = {}
        for mono, c in self.terms.items():
            e = 0
            rest = []
            for v, k in mono:
                if v == var:
                    e = k
                else:
                    rest.append((v, k))
            out.setdefault(e, {})[tuple(rest)] = c
        return {e: AuxPoly(terms) for e, terms in sorted(out.items())}

    def coefficient_of(self, var: str, power: int) -> "AuxPoly":
        return self.split_by(var).get(power, AuxPoly.zero())

    def derivative(self, var: str) -> "AuxPoly":
        out: dict = {}
        for mono, c in self.terms.items():
            for i, (v, e) in enumerate(mono):
                if v == var:
                    rest = mono[:i] + ((v, e - 1),) if e > 1 else mono[:i]
                    rest = rest + mono[i + 1:]
                    out[rest] = normalize_number(out.get(rest, 0) + c * e)
                    break
        return AuxPoly({m: c for m, c in out.items() if c})

    def divide_exact(self, q) -> "AuxPoly":
        """Divide every coefficient by ``q``; NonDivisible on any remainder."""
        q = normalize_number(q if isinstance(q, (int, Fraction)) else Fraction(q))
        if q == 0:
            raise ZeroDivisionError("division of a polynomial by zero")
        out = {}
        for mono, c in self.terms.items():
            r = Fraction(c) / q
            if r.denominator != 1:
                raise NonDivisible(f"coefficient {c} not divisible by {q}")
            out[mono] = r.numerator
        return AuxPoly(out)

    def scale(self, q) -> "AuxPoly":
        q = normalize_number(q if isinstance(q, (int, Fraction)) else Fraction(q))
        if not q:
            return AuxPoly()
        return AuxPoly({m: normalize_number(c * q) for m, c in self.terms.items()})

    def divide_by_var(self, var: str) -> "AuxPoly":
        """Exact division by a single variable (every term must contain it)."""
        out = {}
        for mono, c in self.terms.items():
            hit = False
            rest = []
            for v, e in mono:
                if v == var:
                    hit = True
                    if e > 1:
                        rest.append((v, e - 1))
                else:
                    rest.append((v, e))
            if not hit:
                raise NonDivisible(f"term {mono} carries no factor {var}")
            out[tuple(rest)] = c
        return AuxPoly(out)

    def content(self) -> Number:
        """Positive gcd of all coefficients (0 for the zero polynomial)."""
        from math import gcd
        num = 0
        den = 1
        for c in self.terms.values():
            f = Fraction(c)
            num = gcd(num, abs(f.numerator))
            den = den * f.denominator // gcd(den, f.denominator)
        if num == 0:
            return 0
        return normalize_number(Fraction(num, den))

    def evaluate(self, assignment: Mapping[str, Number]) -> Number:
        total: Number = 0
        for mono, c in self.terms.items():
            val = c
            for v, e in mono:
                if v not in assignment:
                    raise KeyError(f"no value for variable {v}")
                val = val * assignment[v] ** e
            total = total + val
        return normalize_number(Fraction(total) if not isinstance(total, (int, Fraction)) else total)

    # --- formatting and parsing ---

    def __repr__(self):
        return f"AuxPoly({self.canonical_str()!r})"

    def canonical_str(self) -> str:
        """Expanded canonical form: terms by total degree, then lexicographic."""
        if not self.terms:
            return "0"

        def mono_key(mono):
            return (sum(e for _, e in mono), mono)

        parts = []
        for mono in sorted(self.terms, key=mono_key):
            c = self.terms[mono]
            body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            mag = abs(c)
            if not mono:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            if not parts:
                parts.append(text if c > 0 else f"-{text}")
            else:
                parts.append(f"+ {text}" if c > 0 else f"- {text}")
        return " ".join(parts)

    def factored_str(self) -> str:
        """Content factored out, mirroring how expansions are usually printed."""
        c = self.content()
        if c in (0, 1):
            return self.canonical_str()
        inner = self.divide_exact(c) if isinstance(c, int) else self.scale(Fraction(1) / c)
        inner_str = inner.canonical_str()
        if len(inner.terms) == 1:
            return self.canonical_str()
        return f"{c}*({inner_str})"

    @staticmethod
    def parse(text: str) -> "AuxPoly":
        """Parse expressions over +, -, *, ^ (or **), integers and rationals."""
        tree = ast.parse(text.replace("^", "**"), mode="eval")
        return _from_ast(tree.body)


def _coerce(value):
    if isinstance(value, AuxPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return AuxPoly.const(value)
    return NotImplemented


def _from_ast(node) -> AuxPoly:
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _from_ast(node.left)
            if not isinstance(node.right, ast.Constant) or not isinstance(node.right.value, int):
                raise ValueError("exponent must be a literal integer")
            return base ** node.right.value
        left, right = _from_ast(node.left), _from_ast(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if len(right.terms) != 1 or _ZERO_MONO not in right.terms:
                raise ValueError("division only by rational constants")
            return left.scale(Fraction(1, 1) / Fraction(right.constant_term()))
        raise ValueError(f"unsupported operator {ast.dump(node.op)}")
    if isinstance(node, ast.UnaryOp):
        inner = _from_ast(node.operand)
        if isinstance(node.op, ast.USub):
            return -inner
        if isinstance(node.op, ast.UAdd):
            return inner
        raise ValueError("unsupported unary operator")
    if isinstance(node, ast.Constant):
        if isinstance(node.value, int):
            return AuxPoly.const(node.value)
        raise ValueError("only integer literals are allowed")
    if isinstance(node, ast.Name):
        return AuxPoly.var(node.id)
    raise ValueError(f"unsupported expression node {ast.dump(node)}")


def rational_str(q: Number) -> str:
    q = normalize_number(q)
    return str(q)


def parse_rational(text: str) -> Number:
    return normalize_number(Fraction(text))
