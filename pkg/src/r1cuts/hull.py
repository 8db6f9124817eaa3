"""Exact description of conv(G_a) in the discrete (x, t) space.

G_a collects the pairs (x, g_a(S)) over binary supports S.  Because g_a is
supermodular, its convex hull over the unit cube is carved out by the linear
supermodular inequalities; after simplification only n of them remain, the
sorted-form facets

    t >= -a_l^2/4 - sum_{i>l} (a_i^2 - a_l^2)/4 * x_i     (a ascending, a_0=0).

This module builds those inequalities, runs the greedy primal allocation that
solves the hull LP in O(n log n), produces the matching closed-form dual
certificate, and cross-checks the pair (strong duality + complementary
slackness).  ``min_linear_over_X`` is the linear-time linear-optimization
routine used to price candidate multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import InputError, RegionError, TOL, sum_over
from .setfunc import AlphaVector, Region, classify_alpha, eval_g, increment_rho

# threshold below which a residual capacity counts as exhausted
_EPS = 1e-12

### types --------------------------------------------------------------------


@dataclass(frozen=True)
class LinearIneq:
    """t >= const + coeff_x . x"""

    coeff_x: np.ndarray
    const: float

    def __post_init__(self):
        c = np.array(self.coeff_x, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeff_x", c)

    def eval_at(self, x):
        return self.const + float(np.dot(self.coeff_x, np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class LambdaWeights:
    """Convex-combination weights over supports, keyed by sorted index tuple.

    ``ell`` is the split count (number of sorted positions in the prefix) and
    ``order`` the ascending-multiplier permutation of original indices, kept
    for diagnostics.
    """

    entries: dict
    ell: int = 0
    order: tuple = ()

    def coverage(self, n):
        """Vector of per-index coverage sums Σ_{S∋i} λ_S."""
        cov = np.zeros(n)
        for S, w in self.entries.items():
            for i in S:
                cov[i] += w
        return cov

    def total(self):
        return float(sum(self.entries.values()))


@dataclass(frozen=True)
class DualCertificate:
    """Feasible (mu, gamma) for the hull dual; both components nonpositive."""

    mu: np.ndarray
    gamma: float

    def __post_init__(self):
        m = np.array(self.mu, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "mu", m)

    def objective(self, x):
        return float(np.dot(self.mu, np.asarray(x, dtype=float))) + self.gamma


@dataclass(frozen=True)
class DualityReport:
    primal_obj: float
    dual_obj: float
    cs_violations: list = field(default_factory=list)


### helpers ------------------------------------------------------------------


def effective_alpha(alpha, p):
    """Reduce a bounded multiplier vector to the nonnegative chain g sees.

    All-positive sets clip negatives to zero; on sign-partitioned sets the
    active side keeps its clipped values and the inactive side contributes
    zero (its components never attain the max on a bounded vector).
    """
    if isinstance(alpha, AlphaVector):
        a = np.asarray(alpha.values, dtype=float)
        region = alpha.region
    else:
        a = np.asarray(alpha, dtype=float)
        region = classify_alpha(a, p)
    if a.shape != (p.n,):
        raise InputError("alpha length must equal partition size")
    if region is Region.UNBOUNDED:
        raise RegionError("alpha lies outside the bounded multiplier regions")
    eff = np.maximum(a, 0.0)
    if region is Region.BPLUS:
        eff[list(p.minus)] = 0.0
    elif region is Region.BMINUS:
        eff[list(p.plus)] = 0.0
    return eff


def _check_x(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"x must have length {n}")
    if (x < -TOL).any() or (x > 1.0 + TOL).any():
        raise InputError("x outside [0,1]")
    return np.clip(x, 0.0, 1.0)


def _check_sorted_nonneg(alpha):
    a = np.asarray(alpha, dtype=float)
    if (a < -TOL).any():
        raise InputError("alpha must be nonnegative")
    a = np.maximum(a, 0.0)
    order = np.argsort(a, kind="stable")
    return a, order


def _split_count(xs):
    """Smallest k with sum(xs[k:]) <= 1."""
    n = len(xs)
    suffix = np.concatenate([np.cumsum(xs[::-1])[::-1], [0.0]])
    for k in range(n + 1):
        if suffix[k] <= 1.0 + _EPS:
            return k, suffix
    raise AssertionError("unreachable: empty suffix sums to 0")


### operations ---------------------------------------------------------------


def supermodular_ineq(S, alpha, variant, p):
    """One linear supermodular inequality for G_a, anchored at support S.

    Variant 1 uses the large increments rho(i, S) off the support and
    rho(i, N-i) on it; variant 2 uses rho(i, 0) off and rho(i, S-i) on.
    Both are tight at S and valid by supermodularity.
    """
    if variant not in (1, 2):
        raise InputError("variant must be 1 or 2")
    S = tuple(sorted(set(S)))
    for i in S:
        if not (0 <= i < p.n):
            raise InputError(f"index {i} out of range")
    gS = eval_g(alpha, S, p)
    if gS == -np.inf:
        raise RegionError("g_a unbounded on S")
    coeff = np.zeros(p.n)
    const = gS
    inside = set(S)
    full = tuple(range(p.n))
    for i in range(p.n):
        if i in inside:
            anchor = tuple(j for j in (full if variant == 1 else S) if j != i)
            rho = increment_rho(alpha, i, anchor, p)
            coeff[i] = rho
            const -= rho
        else:
            anchor = S if variant == 1 else ()
            coeff[i] = increment_rho(alpha, i, anchor, p)
    return LinearIneq(coeff, const)


def sorted_facets(alpha, p):
    """The n inequalities that describe conv(G_a) on the unit cube."""
    eff = effective_alpha(alpha, p)
    order = np.argsort(eff, kind="stable")
    a = eff[order]
    n = p.n
    facets = []
    for ell in range(n):
        al = 0.0 if ell == 0 else a[ell - 1]
        coeff = np.zeros(n)
        for pos in range(ell, n):
            coeff[order[pos]] = -(a[pos] ** 2 - al**2) / 4.0
        facets.append(LinearIneq(coeff, -(al**2) / 4.0))
    return facets


def greedy_primal(x, alpha):
    """Optimal hull-LP weights by greedy allocation.

    Sorts the multipliers ascending, finds the split count l (smallest prefix
    size whose complement's x-mass is at most 1), shaves the buffer entry at
    the split, then allocates in two sweeps: tail indices largest-first, each
    packaged with the currently-positive prefix entries, then the restored
    split entry with its own prefix.  Every allocation zeroes at least one
    residual, so at most 2n supports appear.
    """
    a_raw, order = _check_sorted_nonneg(alpha)
    x = _check_x(x, len(a_raw))
    xs = x[order].copy()
    n = len(xs)
    ell, suffix = _split_count(xs)

    xhat = xs.copy()
    if ell > 0:
        xhat[ell - 1] -= 1.0 - suffix[ell]

    entries = {}
    allocated = 0.0

    def allocate(positions):
        nonlocal allocated
        v = min(xhat[s] for s in positions)
        key = tuple(sorted(int(order[s]) for s in positions))
        entries[key] = entries.get(key, 0.0) + v
        for s in positions:
            xhat[s] -= v
        allocated += v

    for j in range(n - 1, ell - 1, -1):
        while xhat[j] > _EPS:
            S = [i for i in range(ell) if xhat[i] > _EPS] + [j]
            allocate(S)

    if ell == 0:
        rem = 1.0 - allocated
        if rem > _EPS:
            entries[()] = entries.get((), 0.0) + rem
    else:
        xhat[ell - 1] = 1.0 - suffix[ell]
        while xhat[ell - 1] > _EPS:
            S = [i for i in range(ell - 1) if xhat[i] > _EPS] + [ell - 1]
            allocate(S)

    entries = {S: w for S, w in entries.items() if w > _EPS}
    return LambdaWeights(entries, ell=ell, order=tuple(int(o) for o in order))


def dual_certificate(x, alpha):
    """Closed-form optimal dual: gamma from the split value, mu on the tail."""
    a_raw, order = _check_sorted_nonneg(alpha)
    x = _check_x(x, len(a_raw))
    xs = x[order]
    a = a_raw[order]
    n = len(xs)
    ell, _ = _split_count(xs)
    al = 0.0 if ell == 0 else a[ell - 1]
    mu = np.zeros(n)
    for pos in range(ell, n):
        mu[order[pos]] = -(a[pos] ** 2 - al**2) / 4.0
    return DualCertificate(mu, -(al**2) / 4.0)


def verify_strong_duality(x, alpha):
    """Cross-check greedy primal vs closed-form dual at (x, alpha).

    Returns the two objectives and the list of complementary-slackness
    violations: supports with positive weight whose dual constraint is not
    tight within 1e-8.  Expected empty.
    """
    a_raw, _ = _check_sorted_nonneg(alpha)
    x = _check_x(x, len(a_raw))
    lam = greedy_primal(x, alpha)
    cert = dual_certificate(x, alpha)

    def g_of(S):
        m = max((a_raw[i] for i in S), default=0.0)
        return -(m * m) / 4.0

    primal = sum(w * g_of(S) for S, w in lam.entries.items())
    dual = cert.objective(x)
    violations = []
    for S, w in lam.entries.items():
        slack = sum_over(cert.mu, S) + cert.gamma - g_of(S)
        if abs(slack) > 1e-8:
            violations.append((S, float(slack)))
    return DualityReport(float(primal), float(dual), violations)


def min_linear_over_X(alpha, beta, p):
    """Minimize beta'x - max_i{a_i^2 x_i}/4 over binary x, in one pass.

    The baseline takes every index with negative beta; the max term is then
    best claimed by a single extra (or already-chosen) index, so scanning the
    n candidates covers all optima.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (p.n,):
        raise InputError("beta length must equal partition size")
    eff = effective_alpha(alpha, p)  # raises RegionError when unbounded
    e = eff**2
    base = beta < 0
    v0 = float(beta[base].sum())

    if base.any():
        best_val = v0 - e[base].max() / 4.0
        best_x = base.copy()
    else:
        best_val = 0.0
        best_x = np.zeros(p.n, dtype=bool)
    for j in range(p.n):
        val = v0 + (0.0 if base[j] else beta[j]) - e[j] / 4.0
        if val < best_val:
            best_val = val
            best_x = base.copy()
            best_x[j] = True
    return best_val, best_x.astype(int)
