"""Dominant-singularity analysis of the forest generating function.

The vertex-count series F(u) = sum c_n u^n with c_n = (3n)!/(n! n! (n+1)!)
has radius 1/27. For a fixed blocking weight y > 0 the map weight is
parametrized by g(u) = u (y - F(u)) / y^2 with u = g y R; the physical
branch ends where dg/du vanishes, i.e. at the unique root u* of
S(u) := F(u) + u F'(u) = y on (0, 1/27). Since d^2g/du^2 < 0 there, the
inverse u(g) and hence R(g) carry a square-root branch point.

Term ratios c_{n+1}/c_n = 3(3n+1)(3n+2) / ((n+1)(n+2)) stay exact; series
are summed by this recurrence so no factorial ever overflows. Evaluations
run in float first to bracket the root, then in mpmath working precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import ToleranceNotMet

SQUARE_ROOT = "square_root"
TREE_LOG = "tree_log"

U_MAX = Fraction(1, 27)


def _term_ratio(n: int) -> Fraction:
    return Fraction(3 * (3 * n + 1) * (3 * n + 2), (n + 1) * (n + 2))


_RATIOS: list = []


def _ratio_pair(n: int) -> tuple:
    while len(_RATIOS) < n:
        k = len(_RATIOS) + 1
        _RATIOS.append((3 * (3 * k + 1) * (3 * k + 2), (k + 1) * (k + 2)))
    return _RATIOS[n - 1]


def series_values(u, eps, max_terms=2_000_000):
    """(F, F', F'') at u by term recurrence.

    Stops once the slope-sum tail bound term*(n+2)/(1-27u)^2 drops below
    eps, so F and F + uF' are computed with truncation error at most eps.
    """
    q = 27 * u
    if not 0 < q < 1:
        raise ValueError("series evaluation requires 0 < u < 1/27")
    tail_scale = 1 / ((1 - q) * (1 - q))
    inv_u = 1 / u
    inv_u2 = inv_u * inv_u
    term = 3 * u  # c_1 u
    F = Fd = Fdd = u * 0
    n = 1
    while n < max_terms:
        F += term
        Fd += n * term * inv_u
        if n >= 2:
            Fdd += n * (n - 1) * term * inv_u2
        if n > 4 and abs(term) * (n + 2) * tail_scale < eps:
            return F, Fd, Fdd
        num, den = _ratio_pair(n)
        term = term * u * num / den
        n += 1
    raise ToleranceNotMet(f"series did not reach {eps} within {max_terms} terms")


def compare_slope_sum(u, y, max_terms=2_000_000):
    """Sign of S(u) - y for S = F + u F' = sum (n+1) c_n u^n.

    Stops as soon as a geometric tail bound decides the sign; near the root
    this still needs the full depth, but bracketing steps exit early. The
    tail bound uses that term ratios increase toward 27 u < 1.
    """
    q = 27 * u
    if q >= 1:
        return 1  # S diverges at the radius; anything finite lies below
    term = 3 * u
    S = u * 0
    n = 1
    while n < max_terms:
        S += (n + 1) * term
        num, den = _ratio_pair(n)
        term = term * u * num / den
        # remaining terms: sum_{m>n} (m+1) c_m u^m <= term * (n+2) / (1-q)^2
        tail = term * (n + 2) / ((1 - q) * (1 - q))
        if S - y > tail:
            return 1
        if S - y < -tail:
            return -1
        n += 1
    raise ToleranceNotMet("sign of the slope sum is numerically ambiguous")


def _g_derivatives(u, y, eps):
    """dg/du and d^2g/du^2 for g(u) = u (y - F(u)) / y^2."""
    F, Fd, Fdd = series_values(u, eps)
    S = F + u * Fd
    dg = (y - S) / (y * y)
    d2g = -(2 * Fd + u * Fdd) / (y * y)
    return dg, d2g, F, S


@dataclass(frozen=True)
class ForestSingularity:
    y_value: float
    u_star: object          # mpmath mpf
    g_star: object          # mpmath mpf
    classification: str
    dg_residual: object
    d2g: object

    def to_json(self) -> dict:
        return {
            "y": self.y_value,
            "u_star": mp.nstr(self.u_star, 30),
            "g_star": mp.nstr(self.g_star, 30),
            "classification": self.classification,
            "dg_du_residual": mp.nstr(self.dg_residual, 6),
            "d2g_du2": mp.nstr(self.d2g, 12),
        }


def forest_singularity(y_value, tol: float = 1e-12,
                       precision_digits: int = 50) -> ForestSingularity:
    """Locate the branch point of the forest series at blocking weight y.

    Bisection on the strictly increasing S(u) = F + u F' over (0, 1/27),
    run until |dg/du| <= tol * |u * d^2g/du^2|; d^2g/du^2 < 0 certifies the
    square-root classification.
    """
    y = float(y_value)
    if y <= 0:
        raise ValueError("the blocking weight must be positive")

    # coarse float bracket: sign comparisons exit early away from the root
    lo, hi = 1e-12, float(U_MAX) * (1 - 1e-13)
    for _ in range(18):
        mid = 0.5 * (lo + hi)
        if compare_slope_sum(mid, y) < 0:
            lo = mid
        else:
            hi = mid
    # guarded Newton sharpens the bracket before the certified bisection
    u = 0.5 * (lo + hi)
    for _ in range(40):
        F, Fd, Fdd = series_values(u, 1e-13 * max(y, 1.0))
        slope = 2 * Fd + u * Fdd
        step = (F + u * Fd - y) / slope
        nxt = u - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if F + u * Fd < y:
            lo = max(lo, u)
        else:
            hi = min(hi, u)
        if abs(step) < 1e-14 * u:
            u = nxt
            break
        u = nxt
    pad = max(1e-11 * u, 1e-13)
    lo, hi = max(lo, u - pad), min(hi, u + pad)

    with mp.workdps(precision_digits):
        mlo = mp.mpf(lo)
        mhi = mp.mpf(hi)
        mhi = min(mhi, mp.mpf(1) / 27 * (1 - mp.mpf("1e-30")))
        my = mp.mpf(y)
        # truncation depth actually needed: the residual threshold scales
        # with d^2g/du^2, estimated once at coarse accuracy
        _, d2g_est, _, _ = _g_derivatives((mlo + mhi) / 2, my, mp.mpf("1e-8"))
        eps = mp.mpf(tol) * abs(mlo * d2g_est) * my * my / 64
        eps = min(eps, mp.mpf("1e-10"))
        best = None
        for sweep in range(precision_digits * 4):
            mid = (mlo + mhi) / 2
            if compare_slope_sum(mid, my) < 0:
                mlo = mid
            else:
                mhi = mid
            if (mhi - mlo) > tol * mid / 4:
                continue
            dg, d2g, F, S = _g_derivatives(mid, my, eps)
            if abs(dg) <= tol * abs(mid * d2g):
                best = (mid, dg, d2g, F)
                break
        if best is None:
            raise ToleranceNotMet(f"bisection stalled for y={y}")
        u_star, dg, d2g, F = best
        if not (0 < u_star < mp.mpf(1) / 27):
            raise ToleranceNotMet("root left the admissible interval")
        if d2g >= 0:
            raise ToleranceNotMet("second derivative not negative at the root")
        if F >= my:
            raise ToleranceNotMet("series value reached the blocking weight")
        g_star = u_star * (my - F) / (my * my)
        return ForestSingularity(y_value=y, u_star=u_star, g_star=g_star,
                                 classification=SQUARE_ROOT,
                                 dg_residual=dg, d2g=d2g)


@dataclass(frozen=True)
class SpanningTreeSingularity:
    alpha_star: Fraction
    classification: str
    ratio_check: bool

    def to_json(self) -> dict:
        return {
            "alpha_star": str(self.alpha_star),
            "classification": self.classification,
            "ratio_check": self.ratio_check,
        }


def spanning_tree_singularity(ratio_order: int = 50) -> SpanningTreeSingularity:
    """Analytic classification of the spanning-tree series.

    The radius is exactly 1/27 (term ratios converge to 27 from below) and
    the coefficients decay like 27^n / n^2, so the series converges at its
    radius while its derivative diverges logarithmically.
    """
    ratios = [_term_ratio(n) for n in range(1, ratio_order + 1)]
    increasing = all(r1 < r2 for r1, r2 in zip(ratios, ratios[1:]))
    below = all(r < 27 for r in ratios)
    # 27 - ratio = (54n + 48)/((n+1)(n+2)) ~ 54/n: coefficients c_n 27^{-n}
    # then decay like n^{-2}, giving a convergent series with divergent slope
    tail_ok = abs((27 - ratios[-1]) * ratio_order - 54) < 11
    return SpanningTreeSingularity(alpha_star=U_MAX, classification=TREE_LOG,
                                   ratio_check=increasing and below and tail_ok)
