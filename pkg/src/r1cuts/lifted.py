"""Lifted cuts in the original (x, y, t) space and their separation.

The hull of the rank-one epigraph admits closed-form nonlinear inequalities
indexed by a sign choice and disjoint index sets (L, R, U) on the heavier
side: with W denoting that side and V the other,

    t >= y(L)^2 / (1 - x(W\\L)) + sum_{i in R} y_i^2 / x_i
         + (y(U) - y(V))^2 / x(U),

valid and tight wherever the ratio conditions of the separation routine hold;
outside those regions the base inequality t >= (y(N+) - y(N-))^2 takes over.
On all-positive sets U is empty and the formula collapses to a two-part
perspective-like bound.  Separation sorts the side by the ratios y_i/x_i and
scans prefixes (and prefix/suffix pairs in the signed case), so it costs
O(n log n) and O(n^2) respectively.

``hull_value_oracle`` re-derives the same values by brute numerical
maximization of the underlying lifting objective; it shares no code with the
closed forms and exists to referee them in tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    INF,
    TOL,
    CapacityError,
    FractionalPoint,
    InputError,
    OracleError,
    safe_ratio,
    sum_over,
)

### types --------------------------------------------------------------------


class Sign(enum.Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class LiftedCut:
    """Index data of one lifted inequality.

    ``sign`` says which side of the partition plays the heavy role (MINUS
    means the roles of the two sides are swapped).  L, R, U partition that
    side; U is empty in the all-positive case.
    """

    sign: Sign
    L: tuple
    R: tuple
    U: tuple

    def __post_init__(self):
        L, R, U = (tuple(sorted(s)) for s in (self.L, self.R, self.U))
        if (set(L) & set(R)) or (set(L) & set(U)) or (set(R) & set(U)):
            raise InputError("LiftedCut: L, R, U must be pairwise disjoint")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "U", U)

    def side_indices(self, p):
        side = p.plus if self.sign is Sign.PLUS else p.minus
        if set(self.L) | set(self.R) | set(self.U) != set(side):
            raise InputError("LiftedCut: (L,R,U) must partition the signed side")
        return side, (p.minus if self.sign is Sign.PLUS else p.plus)


@dataclass(frozen=True)
class SeparationResult:
    cut: LiftedCut | None
    rhs_value: float
    violated: bool
    base_only: bool


### closed forms -------------------------------------------------------------


def _ratio(num_sq, den):
    """num_sq / den with the 0-denominator convention; literal if den < 0."""
    if den > TOL:
        return num_sq / den
    if den >= -TOL:
        return safe_ratio(num_sq, 0.0)
    return num_sq / den  # outside every condition region; formula-literal


def eval_lifted_rhs(x, y, cut, p):
    """Right-hand side of the lifted inequality at (x, y); may be +inf."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    side, other = cut.side_indices(p)
    not_L = tuple(i for i in side if i not in set(cut.L))
    t1 = _ratio(sum_over(y, cut.L) ** 2, 1.0 - sum_over(x, not_L))
    t2 = 0.0
    for i in cut.R:
        t2 += _ratio(y[i] ** 2, x[i])
    t3 = _ratio((sum_over(y, cut.U) - sum_over(y, other)) ** 2, sum_over(x, cut.U))
    return t1 + t2 + t3


def base_value(y, p):
    """(y(N+) - y(N-))^2 — the inequality that always holds."""
    y = np.asarray(y, dtype=float)
    return float(sum_over(y, p.plus) - sum_over(y, p.minus)) ** 2


def xf_hull_value(x, y):
    """Hull bound of the free relaxation: y(N)^2 / min{1, x(N)}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s2 = float(y.sum()) ** 2
    return max(s2, safe_ratio(s2, max(float(x.sum()), 0.0)))


### separation ---------------------------------------------------------------


def _ratio_vec(num, den):
    """Elementwise num/den for nonnegative arrays, 0/0 = 0, pos/0 = inf."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.where(num > 0.0, INF, 0.0)
    good = den > 0.0
    np.divide(num, den, out=out, where=good)
    return out


def _sorted_side(x, y, idx):
    """Ratio-ascending order (ties by index) plus prefix/suffix cumulatives."""
    idx = np.asarray(idx, dtype=int)
    r_all = _ratio_vec(y[idx], x[idx])
    order = idx[np.lexsort((idx, r_all))]
    r = _ratio_vec(y[order], x[order])
    xs, ys = x[order], y[order]
    prefx = np.concatenate([[0.0], np.cumsum(xs)])
    prefy = np.concatenate([[0.0], np.cumsum(ys)])
    sufx = np.concatenate([np.cumsum(xs[::-1])[::-1], [0.0]])
    sufy = np.concatenate([np.cumsum(ys[::-1])[::-1], [0.0]])
    return order, r, prefx, prefy, sufx, sufy


def find_L_positive(x, y):
    """The prefix L whose shaved average ratio interleaves the sorted ratios.

    Checks every prefix of the ratio-ascending order at once: the leftover
    capacity 1 - x(N\\L) must be nonnegative, the ratio y(L)/(1 - x(N\\L))
    strictly below every ratio outside L and weakly above every ratio inside.
    Existence is guaranteed; of the qualifying prefixes the largest is
    returned, and a defensive fallback returns the value-maximizing prefix
    should rounding ever exclude all of them.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    order, r, prefx, prefy, _, _ = _sorted_side(x, y, np.arange(n))
    den = 1.0 - (prefx[n] - prefx)  # den[k] = 1 - x(N \ first k)
    ratio_l = _ratio_vec(prefy, np.maximum(den, 0.0))
    ok = den >= -TOL
    ok &= np.concatenate([ratio_l[:n] < r, [True]])  # strict below outside
    ok &= np.concatenate([[True], ratio_l[1:] >= r - TOL])  # weakly above inside
    hits = np.nonzero(ok)[0]
    if len(hits):
        return tuple(sorted(int(i) for i in order[: hits[-1]]))

    # rounding knocked out every prefix: take the best-valued feasible one
    tail = np.concatenate([np.cumsum(_ratio_vec(y[order] ** 2, x[order])[::-1])[::-1], [0.0]])
    vals = np.where(den >= -TOL, _ratio_vec(prefy**2, np.maximum(den, 0.0)) + tail, -INF)
    return tuple(sorted(int(i) for i in order[: int(np.argmax(vals))]))


def find_L_U_general(x, y, p):
    """Search for (L, U, sign) satisfying the ratio conditions; None if base.

    The heavier side (by y-mass) is sorted by ratio; candidate L's are
    prefixes and candidate U's are suffixes.  For each pair (prefix size l,
    suffix start u) the closed-form conditions reduce to O(1) comparisons
    against the neighboring sorted ratios; the u-scan for a fixed prefix is
    vectorized.  First match in lexicographic (l, u) order wins; all matches
    give the same value.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sign = Sign.PLUS if sum_over(y, p.plus) >= sum_over(y, p.minus) else Sign.MINUS
    side = p.plus if sign is Sign.PLUS else p.minus
    other = p.minus if sign is Sign.PLUS else p.plus
    m = len(side)
    if m == 0:
        return None

    if not other:
        sub = list(side)
        L = find_L_positive(x[sub], y[sub])
        if len(L) == m:
            return None
        return tuple(sorted(side[i] for i in L)), (), sign

    order, r, prefx, prefy, sufx, sufy = _sorted_side(x, y, np.array(side))
    x_side = prefx[m]
    y_other = float(sum_over(y, other))

    num_u = sufy[:m] - y_other
    ratio_u = _ratio_vec(np.maximum(num_u, 0.0), sufx[:m])
    ok_u = num_u >= -TOL
    ok_u &= np.concatenate([[True], ratio_u[1:] > r[:-1]])  # strictly above outside
    ok_u &= ratio_u <= r + TOL  # weakly below inside

    for ell in range(m):
        den_l = 1.0 - (x_side - prefx[ell])
        if den_l < -TOL:
            continue
        ratio_l = safe_ratio(float(prefy[ell]), max(float(den_l), 0.0))
        if not ratio_l < r[ell]:
            continue
        if ell > 0 and not ratio_l >= r[ell - 1] - TOL:
            continue
        cand = ok_u[ell:] & (ratio_l < ratio_u[ell:])
        hits = np.nonzero(cand)[0]
        if len(hits):
            u = ell + int(hits[0])
            L = tuple(sorted(int(i) for i in order[:ell]))
            U = tuple(sorted(int(i) for i in order[u:]))
            return L, U, sign
    return None


def separate(point, p):
    """Best lifted inequality at a fractional point, plus the violation call.

    The reported value is the hull lower bound f(x, y): the lifted rhs when
    the condition search succeeds, the base value otherwise.  Violation uses
    the mixed absolute/relative 1e-3 threshold.
    """
    if not isinstance(point, FractionalPoint):
        raise InputError("separate expects a FractionalPoint")
    x, y, t = point.x, point.y, point.t
    if p.n != point.n:
        raise InputError("partition size mismatch")
    base = base_value(y, p)

    cut = None
    rhs = base
    if p.is_positive:
        L = find_L_positive(x, y)
        if len(L) < p.n:
            R = tuple(i for i in range(p.n) if i not in set(L))
            cut = LiftedCut(Sign.PLUS, L, R, ())
            rhs = eval_lifted_rhs(x, y, cut, p)
    else:
        found = find_L_U_general(x, y, p)
        if found is not None:
            L, U, sign = found
            side = p.plus if sign is Sign.PLUS else p.minus
            R = tuple(i for i in side if i not in set(L) | set(U))
            cut = LiftedCut(sign, L, R, U)
            rhs = eval_lifted_rhs(x, y, cut, p)

    f = max(base, rhs)
    violated = f > t + max(1e-3, 1e-3 * abs(t))
    return SeparationResult(cut, f, violated, base_only=cut is None)


### independent oracle -------------------------------------------------------


def _golden_max(f, lo, hi, iters=36):
    """Golden-section maximization of a 1-d function on [lo, hi]."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    return mid, f(mid)


def _side_objective(ys, xs, y_other):
    """The lifting objective F(a) for one side, a >= 0 componentwise.

    F(a) = a.y - max(a)*y_other - q(a, x) with q the facet envelope
    min_gamma [gamma^2/4 + sum_i max(a_i^2 - gamma^2, 0) x_i / 4].
    """

    def F(a):
        m_val = float(a.max()) if len(a) else 0.0
        g2 = np.concatenate([[0.0], a]) ** 2
        cost = g2 / 4.0 + (np.clip(a * a - g2[:, None], 0.0, None) @ xs) / 4.0
        return float(a @ ys) - m_val * y_other - float(cost.min())

    return F


def _side_supergradient(a, ys, xs, y_other):
    g_cands = np.concatenate([[0.0], a])
    costs = g_cands**2 / 4.0 + (np.clip(a * a - g_cands[:, None] ** 2, 0.0, None) @ xs) / 4.0
    gamma = g_cands[int(np.argmin(costs))]
    grad = ys - np.where(a > gamma, a * xs / 2.0, 0.0)
    grad[int(np.argmax(a))] -= y_other
    return grad


def _max_one_side(ys, xs, y_other, grid, rng):
    m = len(ys)
    if m == 0:
        return 0.0
    # exact divergence test: mass on zero-x indices grows linearly forever
    zero_mass = float(ys[xs <= 1e-12].sum())
    if zero_mass > y_other + TOL:
        return INF

    F = _side_objective(ys, xs, y_other)
    finite_r = [2.0 * ys[i] / xs[i] for i in range(m) if xs[i] > 1e-9]
    B = 8.0 * (1.0 + max(finite_r, default=0.0) + float(ys.sum()) + y_other)

    def ascend(a0, iters=150):
        a = np.clip(a0, 0.0, B)
        fa = F(a)
        step = 0.25 * B
        for _ in range(iters):
            g = _side_supergradient(a, ys, xs, y_other)
            norm = max(float(np.abs(g).max()), 1e-30)
            trial = np.clip(a + step * g / norm, 0.0, B)
            ft = F(trial)
            if ft > fa + 1e-14:
                a, fa = trial, ft
                step = min(step * 1.4, B)
            else:
                step *= 0.5
                if step < 1e-11 * B:
                    break
        return a, fa

    def polish(a):
        a = a.copy()
        fa = F(a)
        for _ in range(4):
            improved = False
            for i in range(m):
                others = np.delete(a, i)

                def f1(v, i=i):
                    b = a.copy()
                    b[i] = v
                    return F(b)

                cands = {0.0, B, a[i]}
                if xs[i] > 1e-9:
                    cands.add(min(2.0 * ys[i] / xs[i], B))
                cands.update(float(v) for v in others)
                cands = sorted(cands)
                vals = [f1(c) for c in cands]
                k = int(np.argmax(vals))
                lo = cands[k - 1] if k > 0 else max(cands[k] - 0.1 * B, 0.0)
                hi = cands[k + 1] if k + 1 < len(cands) else min(cands[k] + 0.1 * B, B)
                v_star, f_star = _golden_max(f1, lo, hi)
                best_v, best_f = (v_star, f_star) if f_star >= vals[k] else (cands[k], vals[k])
                if best_f > fa + 1e-14:
                    a[i] = best_v
                    fa = best_f
                    improved = True
            if not improved:
                break
        return a, fa

    # seed pool: structured prefix/suffix profiles, scaled constants, ratios
    order = sorted(range(m), key=lambda i: (safe_ratio(ys[i], xs[i]), i))
    xs_o, ys_o = xs[order], ys[order]
    prefx = np.concatenate([[0.0], np.cumsum(xs_o)])
    prefy = np.concatenate([[0.0], np.cumsum(ys_o)])
    sufx = np.concatenate([np.cumsum(xs_o[::-1])[::-1], [0.0]])
    sufy = np.concatenate([np.cumsum(ys_o[::-1])[::-1], [0.0]])
    seeds = [np.zeros(m)]
    c_base = 2.0 * max(float(ys.sum()) - y_other, 0.0)
    for c in (0.5, 1.0, 2.0):
        seeds.append(np.full(m, min(c * c_base + 1e-6, B)))
    seeds.append(np.array([min(2.0 * safe_ratio(ys[i], xs[i]), B) for i in range(m)]))
    for ell in range(m + 1):
        den = 1.0 - (float(xs.sum()) - prefx[ell])
        gam = min(2.0 * safe_ratio(prefy[ell], max(den, 0.0)), B)
        for u in range(ell, m + 1):
            mu_v = min(2.0 * safe_ratio(max(sufy[u] - y_other, 0.0), sufx[u]), B)
            a = np.empty(m)
            for pos in range(m):
                if pos < ell:
                    a[order[pos]] = gam
                elif pos < u:
                    a[order[pos]] = min(2.0 * safe_ratio(ys_o[pos], xs_o[pos]), B)
                else:
                    a[order[pos]] = mu_v
            seeds.append(a)
    for _ in range(max(int(grid), 0)):
        seeds.append(rng.uniform(0.0, min(B, 2.0 * c_base + 4.0), size=m))

    ranked = sorted(seeds, key=F, reverse=True)[: max(6, min(10, len(seeds)))]
    best_a, best_f = None, -INF
    for s in ranked:
        a, fa = ascend(s)
        if fa > best_f:
            best_a, best_f = a, fa
    _, best_f2 = polish(best_a)
    best_f = max(best_f, best_f2)
    if np.isnan(best_f):
        raise OracleError("oracle ascent produced NaN")
    return max(best_f, 0.0)


def hull_value_oracle(x, y, p, grid=16):
    """Hull value by direct maximization of the lifting objective.

    Deliberately independent of the closed forms: parametrizes the bounded
    multiplier region by the active side's nonnegative components (the other
    side pinned at minus the running max), and climbs the resulting piecewise
    concave objective with multi-start projected supergradient ascent plus a
    coordinate polish.  Returns +inf when the objective genuinely diverges.
    Desk-scale only (n <= 8).
    """
    if p.n > 8:
        raise CapacityError("hull_value_oracle: n > 8")
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    if x.shape != (p.n,) or y.shape != (p.n,):
        raise InputError("hull_value_oracle: shape mismatch")
    rng = np.random.default_rng(0)
    if p.is_positive:
        return _max_one_side(y, x, 0.0, grid, rng)
    plus, minus = list(p.plus), list(p.minus)
    f_plus = _max_one_side(y[plus], x[plus], float(y[minus].sum()), grid, rng)
    f_minus = _max_one_side(y[minus], x[minus], float(y[plus].sum()), grid, rng)
    return max(f_plus, f_minus)
