"""Generic order-by-order solver for closed recursive series systems.

A system is a list of assignments ``name := expression`` over named Laurent
unknowns. Expressions are small ASTs; the one non-ring node, :class:`Face`,
multiplies by a weight polynomial and advances the grading by a fixed step.
Every dependency cycle must gain at least one grading step, which is checked
statically before any sweep runs; the solution is then reached by Gauss-
Seidel sweeps that stabilize within ``order + 2`` passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import NoConvergence, NotContractive
from .poly import AuxPoly
from .series import GSeries, ZLaurent


# --- expression nodes ---

@dataclass(frozen=True)
class Expr:
    def __add__(self, other):
        return Add((self, _coerce(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return Mul((self, _coerce(other)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return Pow(self, k)

    def part(self, selector):
        return Part(self, selector)


@dataclass(frozen=True)
class Lit(Expr):
    value_factory: tuple  # ('z_power', exp, scalar) | ('const', AuxPoly) picklable spec

    def build(self, order, window) -> ZLaurent:
        kind = self.value_factory[0]
        if kind == "z_power":
            _, exp, scalar = self.value_factory
            return ZLaurent.z_power(exp, order, scalar=scalar, window=window)
        if kind == "const":
            return ZLaurent.of_series(GSeries.of(self.value_factory[1], order), window)
        raise ValueError(kind)


def lit_z(exp: int = 1, scalar=1) -> Lit:
    return Lit(("z_power", exp, scalar))


def lit_const(value) -> Lit:
    value = value if isinstance(value, AuxPoly) else AuxPoly.const(value)
    return Lit(("const", value))


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Part(Expr):
    inner: Expr
    selector: object


@dataclass(frozen=True)
class Face(Expr):
    """Attach one face: multiply by ``weight`` and advance the grading.

    ``meta`` carries structural tags (color, valence, charge, marking) used
    by the mobile sampler; it never influences the numeric value.
    """
    weight: AuxPoly
    inner: Expr
    step: int = 1
    meta: tuple = ()


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, AuxPoly)):
        return lit_const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def add_all(terms) -> Expr:
    terms = tuple(terms)
    if not terms:
        return lit_const(0)
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


# --- static analysis ---

def _min_grade(expr: Expr) -> int:
    """Lower bound on the grading of any nonzero output of ``expr``."""
    if isinstance(expr, Lit):
        return 0
    if isinstance(expr, Var):
        return 0
    if isinstance(expr, Add):
        return min(_min_grade(t) for t in expr.terms)
    if isinstance(expr, Mul):
        return sum(_min_grade(f) for f in expr.factors)
    if isinstance(expr, Pow):
        return expr.exponent * _min_grade(expr.base)
    if isinstance(expr, Part):
        return _min_grade(expr.inner)
    if isinstance(expr, Face):
        return expr.step + _min_grade(expr.inner)
    raise TypeError(type(expr))


def _var_gains(expr: Expr) -> dict[str, int]:
    """Minimal grading gain from each referenced unknown to the output."""
    if isinstance(expr, Lit):
        return {}
    if isinstance(expr, Var):
        return {expr.name: 0}
    if isinstance(expr, Add):
        out: dict[str, int] = {}
        for t in expr.terms:
            for v, g in _var_gains(t).items():
                out[v] = min(out.get(v, g), g)
        return out
    if isinstance(expr, Mul):
        out = {}
        mins = [_min_grade(f) for f in expr.factors]
        total = sum(mins)
        for i, f in enumerate(expr.factors):
            sibling = total - mins[i]
            for v, g in _var_gains(f).items():
                cand = g + sibling
                out[v] = min(out.get(v, cand), cand)
        return out
    if isinstance(expr, Pow):
        base_gains = _var_gains(expr.base)
        sibling = (expr.exponent - 1) * _min_grade(expr.base)
        return {v: g + sibling for v, g in base_gains.items()}
    if isinstance(expr, Part):
        return _var_gains(expr.inner)
    if isinstance(expr, Face):
        return {v: g + expr.step for v, g in _var_gains(expr.inner).items()}
    raise TypeError(type(expr))


# --- the system ---

@dataclass
class FixedPointSystem:
    """Assignments solved jointly to a fixed grading order."""

    order: int
    window: Optional[tuple] = None
    assignments: list = field(default_factory=list)  # list[(name, Expr)]

    def add(self, name: str, expr: Expr) -> None:
        if any(n == name for n, _ in self.assignments):
            raise ValueError(f"duplicate assignment for {name}")
        self.assignments.append((name, expr))

    def check_contractive(self) -> None:
        """Reject dependency cycles whose total grading gain is zero."""
        names = {n for n, _ in self.assignments}
        zero_edges: dict[str, set] = {n: set() for n in names}
        for name, expr in self.assignments:
            for v, gain in _var_gains(expr).items():
                if v not in names:
                    raise NotContractive(f"{name} references unknown series {v}")
                if gain == 0:
                    zero_edges[v].add(name)
        # any cycle inside the zero-gain subgraph never gains grading
        color: dict[str, int] = {}

        def dfs(u: str) -> None:
            color[u] = 1
            for w in zero_edges[u]:
                if color.get(w) == 1:
                    raise NotContractive(f"zero-gain dependency cycle through {w}")
                if color.get(w, 0) == 0:
                    dfs(w)
            color[u] = 2

        for n in names:
            if color.get(n, 0) == 0:
                dfs(n)

    def solve(self, initial: Mapping[str, ZLaurent] | None = None) -> dict[str, ZLaurent]:
        self.check_contractive()
        state: dict[str, ZLaurent] = {}
        for name, _ in self.assignments:
            if initial and name in initial:
                state[name] = initial[name]
            else:
                state[name] = ZLaurent.zero(self.order, window=self.window)
        sweeps = 0
        while True:
            changed = False
            for name, expr in self.assignments:
                new = self._eval(expr, state)
                if new != state[name]:
                    state[name] = new
                    changed = True
            sweeps += 1
            if not changed:
                return state
            if sweeps > self.order + 2:
                raise NoConvergence(f"no stabilization after {sweeps} sweeps")

    def solve_with_trace(self):
        """Like solve(), also returning the state snapshot after each sweep."""
        self.check_contractive()
        state = {name: ZLaurent.zero(self.order, window=self.window)
                 for name, _ in self.assignments}
        snapshots = []
        while True:
            changed = False
            for name, expr in self.assignments:
                new = self._eval(expr, state)
                if new != state[name]:
                    state[name] = new
                    changed = True
            snapshots.append(dict(state))
            if not changed:
                return state, snapshots
            if len(snapshots) > self.order + 2:
                raise NoConvergence(f"no stabilization after {len(snapshots)} sweeps")

    def _eval(self, expr: Expr, state: Mapping[str, ZLaurent]) -> ZLaurent:
        if isinstance(expr, Lit):
            return expr.build(self.order, self.window)
        if isinstance(expr, Var):
            return state[expr.name]
        if isinstance(expr, Add):
            total = ZLaurent.zero(self.order, window=self.window)
            for t in expr.terms:
                total = total + self._eval(t, state)
            return total
        if isinstance(expr, Mul):
            prod = None
            for f in expr.factors:
                val = self._eval(f, state)
                prod = val if prod is None else prod * val
            return prod if prod is not None else ZLaurent.of_series(GSeries.one(self.order), self.window)
        if isinstance(expr, Pow):
            return self._eval(expr.base, state) ** expr.exponent
        if isinstance(expr, Part):
            return self._eval(expr.inner, state).part(expr.selector)
        if isinstance(expr, Face):
            inner = self._eval(expr.inner, state)
            return (inner * expr.weight).shift_grade(expr.step)
        raise TypeError(type(expr))


def back_substitute(system: FixedPointSystem, state: Mapping[str, ZLaurent]) -> dict[str, bool]:
    """Re-evaluate every right-hand side on the solution; all must match."""
    return {name: system._eval(expr, state) == state[name]
            for name, expr in system.assignments}
