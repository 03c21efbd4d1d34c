"""Model definitions and solved bundles for every closed recursive system.

A :class:`ModelSpec` lists face-valence weights for the two colors, the
blocking weight, the exclusion parameter and occupancy weights. Solvers
return a :class:`SolutionBundle` holding the solved Laurent family together
with derived series (edge-rooted functions, G, H, Z, ...).

Grading: charged and generic systems advance one grading unit per face of
either color ("faces"); the reduced quadrangulation systems count white
faces only, which the solver's contractivity check still certifies, and
scalar equations count the losing variable's own power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import NonDivisible, NotBivalent
from .poly import AuxPoly
from .series import GSeries, ZLaurent
from .solver import (Add, Face, FixedPointSystem, Mul, Part, Pow, Var,
                     add_all, back_substitute, lit_const, lit_z)

G = AuxPoly.var("g")
Y = AuxPoly.var("y")
Z1 = AuxPoly.var("z1")

REQUIRED = "required"
FORBIDDEN = "forbidden"


@dataclass(frozen=True)
class ModelSpec:
    """Face weights, blocking weight and occupancy data for a model."""

    white: dict            # valence -> AuxPoly weight
    black: dict            # valence -> AuxPoly weight
    y: AuxPoly = field(default_factory=lambda: AuxPoly.var("y"))
    p: int = 0
    occupancy: dict = field(default_factory=dict)   # charge i -> AuxPoly (z_0 = 1)
    mode: str = "directed"
    constraints: dict = field(default_factory=dict)  # valence -> required|forbidden

    def __post_init__(self):
        if 0 in self.occupancy and self.occupancy[0] != AuxPoly.one():
            raise ValueError("the empty-occupancy weight is fixed to 1")
        if self.p < 0:
            raise ValueError("exclusion parameter must be non-negative")

    def occupancy_weight(self, i: int) -> AuxPoly:
        if i == 0:
            return AuxPoly.one()
        return self.occupancy.get(i, AuxPoly.zero())

    def allows(self, valence: int, charge: int) -> bool:
        rule = self.constraints.get(valence)
        if rule == REQUIRED:
            return charge >= 1
        if rule == FORBIDDEN:
            return charge == 0
        return True

    def max_valence(self) -> int:
        vals = list(self.white) + list(self.black)
        return max(vals) if vals else 0

    @staticmethod
    def from_json(data: dict) -> "ModelSpec":
        white = {int(k): AuxPoly.parse(v) for k, v in data.get("white", {}).items()}
        black = {int(k): AuxPoly.parse(v) for k, v in data.get("black", {}).items()}
        y = AuxPoly.parse(str(data["y"])) if "y" in data else AuxPoly.var("y")
        occupancy = {}
        for key, v in data.get("occupancy", {}).items():
            idx = int(str(key).lstrip("z"))
            occupancy[idx] = AuxPoly.parse(v)
        constraints = {}
        for c in data.get("constraints", []):
            constraints[int(c["valence"])] = c["particles"]
        return ModelSpec(white=white, black=black, y=y, p=int(data.get("p", 0)),
                         occupancy=occupancy, mode=data.get("mode", "directed"),
                         constraints=constraints)

    def to_json(self) -> dict:
        out = {
            "white": {str(k): w.canonical_str() for k, w in self.white.items()},
            "black": {str(k): w.canonical_str() for k, w in self.black.items()},
            "y": self.y.canonical_str(),
            "p": self.p,
            "mode": self.mode,
        }
        if self.occupancy:
            out["occupancy"] = {f"z{i}": w.canonical_str()
                                for i, w in self.occupancy.items()}
        if self.constraints:
            out["constraints"] = [{"valence": k, "particles": rule}
                                  for k, rule in sorted(self.constraints.items())]
        return out


# named specs used by the concrete solvers below

def forest_spec() -> ModelSpec:
    return ModelSpec(white={4: G}, black={2: AuxPoly.one()}, mode="pairs")


def quad_one_way_spec() -> ModelSpec:
    return ModelSpec(white={4: G}, black={2: AuxPoly.one()}, mode="directed")


def triangulation_hp_spec() -> ModelSpec:
    return ModelSpec(white={3: G}, black={3: G}, y=AuxPoly.const(-1), p=1,
                     occupancy={1: Z1})


def ising_spec() -> ModelSpec:
    faces = {4: G, 2: AuxPoly.one()}
    return ModelSpec(white=dict(faces), black=dict(faces), y=AuxPoly.const(-1),
                     p=1, occupancy={1: Z1},
                     constraints={2: REQUIRED, 4: FORBIDDEN})


@dataclass
class SolutionBundle:
    """Solved series family for one model at one truncation order."""

    name: str
    spec: Optional[ModelSpec]
    order: int
    grading: str
    state: dict                      # unknown name -> ZLaurent
    system: FixedPointSystem
    derived: dict = field(default_factory=dict)   # name -> GSeries
    g_order: Optional[int] = None

    @property
    def R(self) -> GSeries:
        return self.state["R"].as_series()

    def laurent(self, name: str) -> ZLaurent:
        return self.state[name]

    def series(self, name: str) -> GSeries:
        if name == "R":
            return self.R
        return self.derived[name]

    def series_names(self) -> list:
        return ["R"] + sorted(self.derived)

    def table(self, name: str) -> dict:
        """Collected coefficients grouped by the power of g."""
        return self.series(name).collect_by("g", max_power=self.g_order)

    def verify(self) -> bool:
        return all(back_substitute(self.system, self.state).values())


# --- helpers over solved states ---

def _weight_shift(series, weight: AuxPoly, step: int = 1):
    return (series * weight).shift_grade(step)


def _full_coefficient_family(spec: ModelSpec, q: ZLaurent, weights: dict,
                             charge: int) -> ZLaurent:
    """z_i-weighted sum over valences of Q^{k-1}, one face of grading."""
    out = ZLaurent.zero(q.order, window=q.window)
    zi = spec.occupancy_weight(charge)
    if zi.is_zero() and charge > 0:
        return out
    for k, w in weights.items():
        if not spec.allows(k, charge):
            continue
        out = out + _weight_shift(q ** (k - 1), w * zi)
    return out


def _pair_sum(a: ZLaurent, b: ZLaurent, selector) -> GSeries:
    """sum over selected exponents l of a|_l * b|_{-l}."""
    order = a.order
    total = GSeries.zero(order)
    sel = a.part(selector)
    for e, s in sel.coeffs.items():
        other = b.coefficient(-e)
        if not other.is_zero():
            total = total + s * other
    return total


# --- generic blocked-edge systems (no particles) ---

def build_generic_system(spec: ModelSpec, order: int,
                         window_margin: int = 0) -> FixedPointSystem:
    """The closed three-line system for R, Qo, Qb (directed blockings), or
    its split variant with bivalent black faces blocked in pairs."""
    kmax = max(spec.max_valence(), 2)
    bound = (kmax - 1) * order + 1 + window_margin
    sys_ = FixedPointSystem(order=order, window=(-bound, bound))
    y = spec.y

    if spec.mode == "pairs":
        if set(spec.black) != {2}:
            raise NotBivalent("paired blockings need bivalent black faces only")
        g2 = spec.black[2]
        sys_.add("R", lit_const(1) + add_all(
            Face(w, Part(Mul((Pow(Var("Qo"), k - 1), lit_z(-1))), "zero") * Var("R"),
                 meta=("white", k, 0, None))
            for k, w in spec.white.items()))
        sys_.add("Qo", Mul((Var("R"), lit_z(-1)))
                 + Face(g2, Part(Var("Qbar"), "plus"), meta=("black", 2, 0, False))
                 + Face(g2 * y, Var("Qtil"), meta=("black", 2, 0, True)))
        sys_.add("Qbar", lit_z(1) + add_all(
            Face(w, Part(Pow(Var("Qo"), k - 1), "minus"), meta=("white", k, 0, False))
            for k, w in spec.white.items()))
        sys_.add("Qtil", add_all(
            Face(w, Pow(Var("Qo"), k - 1), meta=("white", k, 0, True))
            for k, w in spec.white.items()))
        return sys_

    sys_.add("R", lit_const(1) + add_all(
        Face(w, Part(Mul((Pow(Var("Qo"), k - 1), lit_z(-1))), "zero") * Var("R"),
             meta=("white", k, 0, None))
        for k, w in spec.white.items()))
    sys_.add("Qo", Mul((Var("R"), lit_z(-1))) + add_all(
        [Face(w, Part(Pow(Var("Qb"), k - 1), "plus"), meta=("black", k, 0, False))
         for k, w in spec.black.items()]
        + [Face(w * y, Pow(Var("Qb"), k - 1), meta=("black", k, 0, True))
           for k, w in spec.black.items()]))
    sys_.add("Qb", lit_z(1) + add_all(
        [Face(w, Part(Pow(Var("Qo"), k - 1), "minus"), meta=("white", k, 0, False))
         for k, w in spec.white.items()]
        + [Face(w * y, Pow(Var("Qo"), k - 1), meta=("white", k, 0, True))
           for k, w in spec.white.items()]))
    return sys_


def generic_blocked(spec: ModelSpec, order: int, name: str = "generic",
                    window_margin: int = 0) -> SolutionBundle:
    """Solve the generic system at the given face-count order."""
    if spec.p:
        raise ValueError("use hard_particles for models with occupancy")
    system = build_generic_system(spec, order, window_margin)
    state = system.solve()
    return SolutionBundle(name=name, spec=spec, order=order, grading="faces",
                          state=state, system=system)


def edge_rooted(bundle: SolutionBundle):
    """Generating functions with a distinguished non-blocked/blocked edge.

    Blocked rooting counts a marked flagged edge for directed blockings and
    a marked bivalent pair for paired blockings; in both cases the explicit
    blocking weight appears once for the distinguished edge.
    """
    spec = bundle.spec
    state = bundle.state
    order = bundle.order
    if spec.p:
        plus, minus = _charged_edge_sums(bundle)
        return bundle.R + plus, -minus
    qo = state["Qo"]
    w_full = ZLaurent.zero(order, window=qo.window)
    for k, w in spec.white.items():
        w_full = w_full + _weight_shift(qo ** (k - 1), w)
    if spec.mode == "pairs":
        b_unmarked = _weight_shift(state["Qbar"].part("plus"), spec.black[2])
        nonblocked = bundle.R + _pair_sum(b_unmarked, w_full.part("minus"), "plus")
        blocked = _pair_sum(w_full, w_full, "plus") + _pair_sum(w_full, w_full, "strict_neg")
        blocked = (blocked * (spec.black[2] * spec.y)).shift(1)
        return nonblocked, blocked
    qb = state["Qb"]
    b_full = ZLaurent.zero(order, window=qo.window)
    for k, w in spec.black.items():
        b_full = b_full + _weight_shift(qb ** (k - 1), w)
    nonblocked = bundle.R + _pair_sum(b_full.part("plus"), w_full.part("minus"), "plus")
    blocked_all = GSeries.zero(order)
    for e, s in b_full.coeffs.items():
        other = w_full.coefficient(-e)
        if not other.is_zero():
            blocked_all = blocked_all + s * other
    return nonblocked, blocked_all * spec.y


def duality_check(bundle: SolutionBundle) -> bool:
    """Self-duality of the solved family when both colors share weights."""
    spec = bundle.spec
    if spec.white != spec.black:
        raise ValueError("duality needs identical white and black weights")
    r = bundle.R
    if spec.p:
        pairs = [(f"Qo{i}", f"Qb{i}") for i in range(spec.p + 1)]
    else:
        pairs = [("Qo", "Qb")]
    for qo_name, qb_name in pairs:
        qo, qb = bundle.state[qo_name], bundle.state[qb_name]
        if qo != qb.substitute_z_reciprocal(r):
            return False
    # alternative fixed-point relation for R through the black series
    alt = GSeries.one(bundle.order)
    for k, w in spec.white.items():
        for j in range(spec.p + 1):
            if spec.p and not spec.allows(k, j):
                continue
            qb = bundle.state[f"Qb{j}"] if spec.p else bundle.state["Qb"]
            zj = spec.occupancy_weight(j) if spec.p else AuxPoly.one()
            if zj.is_zero() and j > 0:
                continue
            term = (qb ** (k - 1)).times_z_power(1).part("zero").as_series()
            alt = alt + _weight_shift(term, w * zj)
            if not spec.p:
                break
    return alt == r


# --- charged systems (particles under a p-exclusion rule) ---

def build_charged_system(spec: ModelSpec, order: int,
                         window_margin: int = 0) -> FixedPointSystem:
    """Boxed closed system for the p-exclusion models at blocking weight -1."""
    p = spec.p
    kmax = max(spec.max_valence(), 2)
    bound = (kmax - 1) * order + 1 + window_margin
    sys_ = FixedPointSystem(order=order, window=(-bound, bound))

    def charged_sum(weights, qname, color, part_kept, part_cut, i):
        terms = []
        for k, w in weights.items():
            for j in range(p + 1):
                if not spec.allows(k, j):
                    continue
                zj = spec.occupancy_weight(j)
                if zj.is_zero() and j > 0:
                    continue
                q = Pow(Var(f"{qname}{j}"), k - 1)
                if j <= p - i:
                    terms.append(Face(w * zj, Part(q, part_kept),
                                      meta=(color, k, j, False)))
                if j >= p + 1 - i:
                    terms.append(Face(w * zj * AuxPoly.const(-1), Part(q, part_cut),
                                      meta=(color, k, j, True)))
        return add_all(terms)

    r_terms = []
    for k, w in spec.white.items():
        for j in range(p + 1):
            if not spec.allows(k, j):
                continue
            zj = spec.occupancy_weight(j)
            if zj.is_zero() and j > 0:
                continue
            r_terms.append(Face(
                w * zj,
                Part(Mul((Pow(Var(f"Qo{j}"), k - 1), lit_z(-1))), "zero") * Var("R"),
                meta=("white", k, j, None)))
    sys_.add("R", lit_const(1) + add_all(r_terms))
    for i in range(p + 1):
        sys_.add(f"Qo{i}", Mul((Var("R"), lit_z(-1)))
                 + charged_sum(spec.black, "Qb", "black", "plus", "strict_neg", i))
    for i in range(p + 1):
        sys_.add(f"Qb{i}", lit_z(1)
                 + charged_sum(spec.white, "Qo", "white", "minus", "strict_pos", i))
    return sys_


def _charged_edge_sums(bundle: SolutionBundle):
    spec = bundle.spec
    order = bundle.order
    p = spec.p
    b_full, w_full = {}, {}
    for i in range(p + 1):
        b_full[i] = _full_coefficient_family(spec, bundle.state[f"Qb{i}"],
                                             spec.black, i)
        w_full[i] = _full_coefficient_family(spec, bundle.state[f"Qo{i}"],
                                             spec.white, i)
    plus = GSeries.zero(order)
    minus = GSeries.zero(order)
    for i in range(p + 1):
        for j in range(p + 1):
            if i + j <= p:
                plus = plus + _pair_sum(b_full[i], w_full[j], "plus")
            else:
                minus = minus + _pair_sum(b_full[i], w_full[j], "strict_neg")
    return plus, minus


def hard_particles(spec: ModelSpec, order: int,
                   name: str = "hard-particles") -> SolutionBundle:
    """Solve the charged system and attach the edge-distinguished series G."""
    if spec.p < 1:
        raise ValueError("hard_particles needs an exclusion parameter p >= 1")
    system = build_charged_system(spec, order)
    state = system.solve()
    bundle = SolutionBundle(name=name, spec=spec, order=order, grading="faces",
                            state=state, system=system)
    plus, minus = _charged_edge_sums(bundle)
    bundle.derived["G"] = bundle.R + plus - minus
    return bundle


# --- quadrangulations with one-way blockings (directed mode) ---

def ternary_coefficient(n: int) -> int:
    """(3n)! / (n! n! (n+1)!)"""
    return math.factorial(3 * n) // (math.factorial(n) ** 2 * math.factorial(n + 1))


def ternary_tree_coefficient(n: int) -> int:
    """(3n)! / (n! (2n+1)!)"""
    return math.factorial(3 * n) // (math.factorial(n) * math.factorial(2 * n + 1))


def _scalar_r_equation(order: int, weight_of_n) -> GSeries:
    """Solve R = 1 + sum_n weight(n) R^{n+1}, grading = n per term."""
    sys_ = FixedPointSystem(order=order)
    terms = [lit_const(1)]
    for n in range(1, order + 1):
        w = weight_of_n(n)
        if not w.is_zero():
            terms.append(Face(w, Pow(Var("R"), n + 1), step=n))
    sys_.add("R", add_all(terms))
    return sys_.solve()["R"].as_series()


def one_way_r_closed_form(order: int) -> GSeries:
    """R = 1 + sum c_n g^n y^{n-1} (1+y)^{2n} R^{n+1}."""
    return _scalar_r_equation(
        order, lambda n: (AuxPoly.const(ternary_coefficient(n))
                          * G ** n * Y ** (n - 1) * (1 + Y) ** (2 * n)))


def forest_r_closed_form(order: int) -> GSeries:
    """R = 1 + sum c_n g^n y^{n-1} R^{n+1}."""
    return _scalar_r_equation(
        order, lambda n: (AuxPoly.const(ternary_coefficient(n))
                          * G ** n * Y ** (n - 1)))


def _reduced_quad_system(order: int, seed_weight: AuxPoly,
                         cubic_weight: AuxPoly) -> FixedPointSystem:
    """Qo = R/z + seed_weight z + cubic_weight Qo^3, graded by white faces."""
    bound = 3 * order + 2
    sys_ = FixedPointSystem(order=order, window=(-bound, bound))
    sys_.add("R", lit_const(1) + Face(
        G, Part(Mul((Pow(Var("Qo"), 3), lit_z(-1))), "zero") * Var("R")))
    sys_.add("Qo", Mul((Var("R"), lit_z(-1))) + lit_z(1, scalar=seed_weight)
             + Face(cubic_weight, Pow(Var("Qo"), 3)))
    return sys_


def quad_one_way(order: int, cross_check_order: int = 2) -> SolutionBundle:
    """Blockable-in-both-directions quadrangulations, reduced route.

    Solves the single-equation reduction at white-face grading and checks it
    against the full directed system (at ``cross_check_order``) and against
    the closed-form equation for R (at full order).
    """
    system = _reduced_quad_system(order, 1 + Y, G * Y * (1 + Y))
    state = system.solve()
    bundle = SolutionBundle(name="quad-one-way", spec=quad_one_way_spec(),
                            order=order, grading="white-faces", state=state,
                            system=system, g_order=order)
    if bundle.R.collect_by("g") != one_way_r_closed_form(order).collect_by("g"):
        raise AssertionError("reduced route disagrees with the closed form for R")
    small = min(order, cross_check_order)
    if small > 0:
        full = generic_blocked(quad_one_way_spec(), 3 * small, name="quad-full")
        if _g_table(full.R, small) != _g_table(bundle.R, small):
            raise AssertionError("reduced route disagrees with the generic system")
    return bundle


def forest(order: int, cross_check_order: int = 2) -> SolutionBundle:
    """Forests on tetravalent maps: paired blockings on quadrangulations.

    Solves the split system at white-face grading, asserts the reduction of
    the black series, and checks R against the closed form and (at low
    order) the generic paired system.
    """
    bound = 3 * order + 2
    system = FixedPointSystem(order=order, window=(-bound, bound))
    system.add("R", lit_const(1) + Face(
        G, Part(Mul((Pow(Var("Qo"), 3), lit_z(-1))), "zero") * Var("R")))
    system.add("Qo", Mul((Var("R"), lit_z(-1))) + Part(Var("Qbar"), "plus")
               + Mul((lit_const(Y), Var("Qtil"))))
    system.add("Qbar", lit_z(1) + Face(G, Part(Pow(Var("Qo"), 3), "minus")))
    system.add("Qtil", Face(G, Pow(Var("Qo"), 3)))
    state = system.solve()
    bundle = SolutionBundle(name="forest", spec=forest_spec(), order=order,
                            grading="white-faces", state=state, system=system,
                            g_order=order)

    # the split system collapses to Qo = R/z + z + g y Qo^3
    qo = state["Qo"]
    reduced = (ZLaurent.z_power(-1, order, window=qo.window) * bundle.R
               + ZLaurent.z_power(1, order, window=qo.window)
               + _weight_shift(qo ** 3, G * Y))
    if reduced != qo:
        raise AssertionError("split system does not satisfy the reduced equation")
    if bundle.R.collect_by("g") != forest_r_closed_form(order).collect_by("g"):
        raise AssertionError("split route disagrees with the closed form for R")
    small = min(order, cross_check_order)
    if small > 0:
        full = generic_blocked(forest_spec(), 3 * small, name="forest-full")
        if _g_table(full.R, small) != _g_table(bundle.R, small):
            raise AssertionError("split route disagrees with the generic system")
    return bundle


def _g_table(series: GSeries, max_power: int) -> dict:
    return series.collect_by("g", max_power=max_power)


# --- spanning trees ---

def spanning_tree_series(order: int, forest_bundle: Optional[SolutionBundle] = None):
    """Vertex-weight series of tetravalent maps carrying a spanning tree.

    Returns the series in the vertex weight a (one grading unit per vertex).
    The coefficients are the dominant blocking-weight terms of the forest
    series, which is asserted when a forest bundle is supplied.
    """
    coeffs = {n: AuxPoly.var("a", n, ternary_coefficient(n))
              for n in range(1, order + 1)}
    f_series = GSeries(order, coeffs)
    if forest_bundle is not None:
        table = forest_bundle.table("R")
        for n in range(1, min(order, forest_bundle.g_order or order) + 1):
            poly = table.get(n, AuxPoly.zero())
            if poly.degree("y") != n - 1:
                raise AssertionError("forest coefficient exceeds expected y-degree")
            top = poly.coefficient_of("y", n - 1)
            if top != AuxPoly.const(ternary_coefficient(n)):
                raise AssertionError("spanning-tree limit disagrees with forests")
    return f_series


def coefficient_factorization_identity(n: int) -> bool:
    """c_n = t_n * binom(2n+2, n+1)/(2n+... ) split into tree/arch/face parts."""
    lhs = ternary_coefficient(n)
    arches = math.factorial(2 * n + 2) // (math.factorial(n + 1) * math.factorial(n + 2))
    rhs = Fraction(ternary_tree_coefficient(n) * arches * (n + 2), 2)
    return lhs == rhs


def ternary_tree_series(order: int) -> GSeries:
    """q(x) = 1 + x q(x)^3 solved as a series in x."""
    sys_ = FixedPointSystem(order=order)
    sys_.add("q", lit_const(1) + Face(AuxPoly.var("x"), Pow(Var("q"), 3)))
    return sys_.solve()["q"].as_series()


# --- Eulerian triangulations with hard particles (closed route) ---

def triangulation_hp(order: int) -> SolutionBundle:
    """Closed finite system; grading equals the power of g (one per face)."""
    sys_ = FixedPointSystem(order=order)
    R, B20, B21 = Var("R"), Var("B2_0"), Var("B2_1")
    Btm1, Btm4 = Var("Bt_m1"), Var("Bt_m4")
    Wm20, Wm21 = Var("W_m2_0"), Var("W_m2_1")
    Wt1, Wt4 = Var("Wt_1"), Var("Wt_4")
    one = lit_const(1)
    sys_.add("R", one + Face(G, Mul((R, Add((
        Mul((lit_const(2), R, Add((B20, B21)))),
        Mul((lit_const(2 * Z1), Add((R, Btm1)), B20)),
    ))))))
    sys_.add("B2_0", Face(G, one))
    sys_.add("W_m2_0", Face(G, Pow(R, 2)))
    sys_.add("B2_1", Face(G * Z1, Add((Pow(Add((one, Wt1)), 2),
                                       Mul((lit_const(2), Wm20, Wt4))))))
    sys_.add("W_m2_1", Face(G * Z1, Add((Pow(Add((R, Btm1)), 2),
                                         Mul((lit_const(2), B20, Btm4))))))
    sys_.add("Bt_m1", Face(G * Z1 * AuxPoly.const(-2), Mul((Wm20, Add((one, Wt1))))))
    sys_.add("Wt_1", Face(G * Z1 * AuxPoly.const(-2), Mul((B20, Add((R, Btm1))))))
    sys_.add("Bt_m4", Face(G * Z1 * AuxPoly.const(-1), Pow(Wm20, 2)))
    sys_.add("Wt_4", Face(G * Z1 * AuxPoly.const(-1), Pow(B20, 2)))
    state = sys_.solve()

    def s(name):
        return state[name].as_series()

    r = s("R")
    b20, b21 = s("B2_0"), s("B2_1")
    btm1, btm4 = s("Bt_m1"), s("Bt_m4")
    wm20, wm21 = s("W_m2_0"), s("W_m2_1")
    wt1, wt4 = s("Wt_1"), s("Wt_4")

    # mirror relations tying white to black coefficients
    if wm20 != r * r * b20 or wm21 != r * r * b21:
        raise AssertionError("white mirrors W_{-2} != R^2 B_2")
    if btm1 != r * wt1 or btm4 != (r ** 4) * wt4:
        raise AssertionError("marked mirrors Bt != R^l Wt")

    g_series = (r + b20 * wm20 + b20 * wm21 + b21 * wm20
                - btm1 * wt1 - btm4 * wt4)
    bundle = SolutionBundle(name="hp-triangulation", spec=triangulation_hp_spec(),
                            order=order, grading="faces", state=state,
                            system=sys_, g_order=order)
    bundle.derived["G"] = g_series
    return bundle


def rooted_from_pointed_edge(g_series: GSeries, *, vertices_of_power) -> GSeries:
    """Drop the origin marking: divide the g^n coefficient by its vertex count."""
    out = {}
    for n, poly in g_series.coeffs.items():
        if n == 0:
            continue
        out[n] = poly.divide_exact(vertices_of_power(n))
    return GSeries(g_series.order, out)


def triangulation_rooted(bundle: SolutionBundle) -> GSeries:
    """Rooted Eulerian triangulations: 2n faces come with n + 2 vertices."""
    return rooted_from_pointed_edge(
        bundle.derived["G"],
        vertices_of_power=lambda power: power // 2 + 2 if power % 2 == 0 else _reject(power))


def _reject(power: int):
    raise NonDivisible(f"odd face count {power} in a triangulation series")


# --- Ising model on quadrangulations (closed route) ---

def ising(order: int) -> SolutionBundle:
    """Closed finite system at face-count grading (3x the target g order)."""
    face_order = 3 * order
    sys_ = FixedPointSystem(order=face_order)
    one = lit_const(1)
    R = Var("R")
    sys_.add("R", one
             + Face(G * 3, Mul((Pow(R, 3), Add((Var("B3_0"), Var("B3_1"))))))
             + Face(G * 3, Mul((Pow(R, 2), Pow(Add((Var("B1_0"), Var("B1_1"))), 2))))
             + Face(Z1, Mul((R, Var("B1_0")))))
    sys_.add("B3_0", Face(G, one))
    sys_.add("B1_0", Face(G * 3, Add((Var("W_m1_0"), Var("W_m1_1")))))
    sys_.add("Bt_m3", Face(Z1 * AuxPoly.const(-1), Var("W_m3_0")))
    sys_.add("Bt_m1", Face(Z1 * AuxPoly.const(-1), Var("W_m1_0")))
    sys_.add("B3_1", Face(Z1, Var("Wt_3")))
    sys_.add("B1_1", Face(Z1, Add((one, Var("Wt_1")))))
    sys_.add("W_m3_0", Face(G, Pow(R, 3)))
    sys_.add("W_m1_0", Face(G * 3, Mul((Pow(R, 2), Add((Var("B1_0"), Var("B1_1")))))))
    sys_.add("Wt_3", Face(Z1 * AuxPoly.const(-1), Var("B3_0")))
    sys_.add("Wt_1", Face(Z1 * AuxPoly.const(-1), Var("B1_0")))
    sys_.add("W_m3_1", Face(Z1, Var("Bt_m3")))
    sys_.add("W_m1_1", Face(Z1, Add((R, Var("Bt_m1")))))
    state = sys_.solve()

    def s(name):
        return state[name].as_series()

    r = s("R")
    b = {name: s(name) for name in
         ("B3_0", "B1_0", "B3_1", "B1_1", "Bt_m3", "Bt_m1",
          "W_m3_0", "W_m1_0", "W_m3_1", "W_m1_1", "Wt_3", "Wt_1")}

    if b["W_m1_0"] != r * b["B1_0"] or b["W_m3_0"] != r ** 3 * b["B3_0"]:
        raise AssertionError("white mirrors W_{-l}^{(0)} != R^l B_l^{(0)}")
    if b["W_m1_1"] != r * b["B1_1"] or b["W_m3_1"] != r ** 3 * b["B3_1"]:
        raise AssertionError("white mirrors W_{-l}^{(1)} != R^l B_l^{(1)}")
    if b["Bt_m1"] != r * b["Wt_1"] or b["Bt_m3"] != r ** 3 * b["Wt_3"]:
        raise AssertionError("marked mirrors Bt_{-l} != R^l Wt_l")

    g_series = (r
                + b["B1_0"] * b["W_m1_0"] + b["B3_0"] * b["W_m3_0"]
                + b["B1_1"] * b["W_m1_0"] + b["B3_1"] * b["W_m3_0"]
                + b["B1_0"] * b["W_m1_1"] + b["B3_0"] * b["W_m3_1"]
                - b["Bt_m1"] * b["Wt_1"] - b["Bt_m3"] * b["Wt_3"])
    bundle = SolutionBundle(name="ising", spec=ising_spec(), order=face_order,
                            grading="faces", state=state, system=sys_,
                            g_order=order)
    bundle.derived["G"] = g_series
    bundle.derived["H"] = ising_rooted(g_series, order)
    return bundle


def ising_rooted(g_series: GSeries, g_order: int) -> GSeries:
    """Rooted quadrangulations with spins: rescale g^n z1^{2p} by
    4n / ((n+2)(2n+2p)); every rescale must be exact."""
    table = g_series.collect_by("g", max_power=g_order)
    out: dict[int, AuxPoly] = {}
    for n, poly in table.items():
        if n == 0:
            continue
        acc = AuxPoly.zero()
        for m, part in poly.split_by("z1").items():
            if m % 2:
                raise NonDivisible("odd spin-interface power in the Ising series")
            rescaled = part.scale(Fraction(4 * n, (n + 2) * (2 * n + m)))
            for coeff in rescaled.terms.values():
                if not isinstance(coeff, int):
                    raise NonDivisible(
                        f"rooted rescale left a remainder at g^{n} z1^{m}")
            if m:
                rescaled = rescaled * AuxPoly.var("z1", m)
            acc = acc + rescaled
        out[n] = acc * AuxPoly.var("g", n)
    return GSeries(g_order, out)


def ising_equation_identity(bundle: SolutionBundle) -> bool:
    """The closed recursion written through the classical quartic form.

    Both sides are multiplied by (1-z1^2) (1-3g(1-z1^2)R)^2 and compared as
    polynomials truncated at the bundle's g order.
    """
    n_g = bundle.g_order
    r_poly = _poly_trunc(bundle.R.collect(), n_g)
    z2 = Z1 * Z1
    d = _poly_trunc(AuxPoly.one() - 3 * G * (1 - z2) * r_poly, n_g)
    lhs = _poly_trunc(r_poly * d * d, n_g)
    rhs = _poly_trunc((1 - z2) * d * d
                      + 3 * G * G * (1 - z2) ** 2 * _poly_trunc(r_poly ** 3, n_g) * d * d
                      + z2 * r_poly, n_g)
    return lhs == rhs


def _poly_trunc(poly: AuxPoly, max_g: int) -> AuxPoly:
    kept = {m: c for m, c in poly.terms.items()
            if sum(e for v, e in m if v == "g") <= max_g}
    return AuxPoly(kept)


# --- maps with even vertex valences ---

def even_valent(v_weights: dict, order: int) -> GSeries:
    """R = 1 + sum_k v_{2k} binom(2k-1, k) R^k, one grading unit per vertex."""
    sys_ = FixedPointSystem(order=order)
    terms = [lit_const(1)]
    for k, w in sorted(v_weights.items()):
        terms.append(Face(w * math.comb(2 * k - 1, k), Pow(Var("R"), k)))
    sys_.add("R", add_all(terms))
    return sys_.solve()["R"].as_series()


def forest_vertex_weights(order: int) -> dict:
    """v_{2k} = g^{k-1} y^{k-2} (3k-3)! / ((k-1)! (2k-1)!) for k >= 2."""
    out = {}
    for k in range(2, order + 2):
        coeff = math.factorial(3 * k - 3) // (math.factorial(k - 1)
                                              * math.factorial(2 * k - 1))
        w = AuxPoly.const(coeff) * G ** (k - 1)
        if k > 2:
            w = w * Y ** (k - 2)
        out[k] = w
    return out


def even_valent_matches_forest(order: int) -> bool:
    r_even = even_valent(forest_vertex_weights(order), order)
    r_forest = forest_r_closed_form(order)
    return (_poly_trunc(r_even.collect(), order)
            == _poly_trunc(r_forest.collect(), order))


# --- maximally blocked maps ---

def max_blocked(alpha_weights: dict, alpha_tilde_weights: dict,
                order: int) -> SolutionBundle:
    """Dominant blocking regime: trees with matched leaves.

    Weights are per node valence; grading counts nodes of either color.
    """
    kmax = max(list(alpha_weights) + list(alpha_tilde_weights) + [2])
    bound = (kmax - 1) * order + 1
    sys_ = FixedPointSystem(order=order, window=(-bound, bound))
    sys_.add("Qo", lit_z(-1) + add_all(
        Face(w, Pow(Var("Qb"), k - 1), meta=("black", k, 0, None))
        for k, w in alpha_tilde_weights.items()))
    sys_.add("Qb", lit_z(1) + add_all(
        Face(w, Pow(Var("Qo"), k - 1), meta=("white", k, 0, None))
        for k, w in alpha_weights.items()))
    state = sys_.solve()
    z_series = GSeries.zero(order)
    for k, w in alpha_weights.items():
        term = (state["Qo"] ** (k - 1)).times_z_power(-1).part("zero").as_series()
        z_series = z_series + _weight_shift(term, w)
    alt = (state["Qb"].times_z_power(-1) - 1).part("zero").as_series()
    if alt != z_series:
        raise AssertionError("the two extractions of Z disagree")
    spec = ModelSpec(white=dict(alpha_weights), black=dict(alpha_tilde_weights),
                     y=AuxPoly.zero(), mode="max")
    state = dict(state)
    state["R"] = ZLaurent.of_series(GSeries.one(order) + z_series)
    bundle = SolutionBundle(name="max-blocked", spec=spec, order=order,
                            grading="nodes", state=state, system=sys_)
    bundle.derived["Z"] = z_series
    return bundle
