"""The projected set function g_a and its multiplier regions.

For multipliers a and a subset S of indices, g_a(S) is the optimal value of
minimizing t - a'y over the points of the epigraph whose support is S.  On
the all-positive set the closed form is

    g_a(S) = -max_a(S)^2 / 4          (negative components clipped to 0),

and on the general sign-partitioned set the projection is bounded on S iff

    max_a(S cap N+) + max_a(S cap N-) <= 0        (empty max = 0),

in which case

    g_a(S) = -max(0, max_a(S cap N+), max_a(S cap N-))^2 / 4.

The multipliers with g_a bounded on every subset form two sign-structured
boxes B+ and B-; everything else is tagged Unbounded.  g_a is supermodular
wherever it is finite, which is what makes the whole cutting-plane family
work; ``check_supermodular`` verifies that exhaustively on small ground sets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    INF,
    TOL,
    CapacityError,
    InputError,
    Partition,
    RegionError,
    max_over,
)

### regions ------------------------------------------------------------------


class Region(enum.Enum):
    BPLUS = "BPlus"
    BMINUS = "BMinus"
    UNBOUNDED = "Unbounded"
    POSITIVE_ORTHANT = "PositiveOrthant"


def classify_alpha(alpha, p):
    """Tag a multiplier vector with the region it belongs to.

    PositiveOrthant for all-positive partitions.  Unbounded when some pair
    (i in N+, j in N-) has a_i + a_j > 0 beyond tolerance.  Otherwise the
    bounded vector is tagged BMinus when it carries positive weight on N-,
    with BPlus as the lowest-priority default (the two agree on g wherever
    both apply, so the tie-break is cosmetic).
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (p.n,):
        raise InputError("classify_alpha: alpha length must equal partition size")
    if p.is_positive:
        return Region.POSITIVE_ORTHANT
    if p.plus and p.minus:
        worst = alpha[list(p.plus)].max() + alpha[list(p.minus)].max()
        if worst > TOL:
            return Region.UNBOUNDED
    if p.minus and alpha[list(p.minus)].max() > TOL:
        return Region.BMINUS
    return Region.BPLUS


@dataclass(frozen=True)
class AlphaVector:
    """Multiplier vector together with its region tag.

    Construct via ``AlphaVector.classified(values, p)`` unless you have a
    reason to force the tag.  A BPlus/BMinus tag is validated against its
    sign and pairwise-sum conditions; Unbounded and PositiveOrthant accept
    any values.
    """

    values: np.ndarray
    region: Region

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @staticmethod
    def classified(values, p):
        return AlphaVector(np.asarray(values, dtype=float), classify_alpha(values, p))

    def validate(self, p):
        """Check the tag's invariants against a partition; raises InputError."""
        a = self.values
        if a.shape != (p.n,):
            raise InputError("AlphaVector: length mismatch with partition")
        if self.region in (Region.BPLUS, Region.BMINUS):
            pos = list(p.plus) if self.region is Region.BPLUS else list(p.minus)
            neg = list(p.minus) if self.region is Region.BPLUS else list(p.plus)
            if pos and a[pos].min() < -TOL:
                raise InputError(f"AlphaVector: {self.region.value} needs a >= 0 on its side")
            if neg and a[neg].max() > TOL:
                raise InputError(f"AlphaVector: {self.region.value} needs a <= 0 off its side")
            if pos and neg and a[pos].max() + a[neg].max() > TOL:
                raise InputError("AlphaVector: pairwise sums must be nonpositive")
        return self


### evaluation ---------------------------------------------------------------

# g values are plain floats; -inf is the unbounded marker.  Finite values are
# always <= 0.
GValue = float


def eval_g(alpha, S, p):
    """g_a(S); returns -inf when the projection is unbounded on S."""
    if isinstance(alpha, AlphaVector):
        a = alpha.values
    else:
        a = np.asarray(alpha, dtype=float)
    if a.shape != (p.n,):
        raise InputError("eval_g: alpha length must equal partition size")
    S = tuple(S)
    for i in S:
        if not (0 <= i < p.n):
            raise InputError(f"eval_g: index {i} out of range")
    if p.is_positive:
        m = max(0.0, max_over(np.maximum(a, 0.0), S))
        return -(m * m) / 4.0
    Sp = [i for i in S if i in set(p.plus)]
    Sm = [i for i in S if i in set(p.minus)]
    mp = max_over(a, Sp) if Sp else None
    mm = max_over(a, Sm) if Sm else None
    if Sp and Sm and mp + mm > TOL:
        return -INF
    m = max(0.0, mp if mp is not None else 0.0, mm if mm is not None else 0.0)
    return -(m * m) / 4.0


def increment_rho(alpha, i, S, p):
    """rho(i, S) = g(S + i) - g(S).  Requires both values finite and i not in S."""
    S = tuple(S)
    if i in S:
        raise InputError(f"increment_rho: index {i} already in S")
    g1 = eval_g(alpha, S + (i,), p)
    g0 = eval_g(alpha, S, p)
    if g1 == -INF or g0 == -INF:
        raise RegionError("increment_rho: g unbounded on the given subsets")
    return g1 - g0


### supermodularity ----------------------------------------------------------


def g_table(alpha, p):
    """All 2^n values of g_a indexed by subset bitmask (bit i = index i)."""
    n = p.n
    if n > 20:
        raise CapacityError("g_table: n > 20")
    if isinstance(alpha, AlphaVector):
        a = np.asarray(alpha.values, dtype=float)
    else:
        a = np.asarray(alpha, dtype=float)
    masks = np.arange(1 << n, dtype=np.int64)
    big_neg = -1e300

    def side_max(idx):
        # running max of a over mask-selected indices drawn from idx
        m = np.full(len(masks), big_neg)
        for i in idx:
            sel = ((masks >> i) & 1).astype(bool)
            np.maximum(m, np.where(sel, a[i], big_neg), out=m)
        return m

    if p.is_positive:
        m = np.maximum(side_max(range(n)), 0.0)
        return -(m * m) / 4.0
    mp = side_max(p.plus)
    mm = side_max(p.minus)
    has_p = mp > big_neg / 2
    has_m = mm > big_neg / 2
    unb = has_p & has_m & (mp + mm > TOL)
    m = np.maximum(0.0, np.maximum(np.where(has_p, mp, 0.0), np.where(has_m, mm, 0.0)))
    out = -(m * m) / 4.0
    out[unb] = -INF
    return out


def check_supermodular_table(g, n, tol=TOL):
    """Exhaustive supermodularity check of a 2^n table of finite g values.

    Uses the pairwise characterization g(S+i+j) + g(S) >= g(S+i) + g(S+j)
    for all i < j and S avoiding both, which is equivalent to the increment
    form rho(i, S) <= rho(i, T) for nested S within T (telescope one added
    element at a time).
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (1 << n,):
        raise InputError("check_supermodular_table: table must have 2^n entries")
    if not np.isfinite(g).all():
        raise RegionError("check_supermodular_table: table has unbounded entries")
    masks = np.arange(1 << n, dtype=np.int64)
    for i in range(n):
        bi = 1 << i
        for j in range(i + 1, n):
            bj = 1 << j
            S = masks[(masks & (bi | bj)) == 0]
            if not ((g[S | bi | bj] + g[S]) >= (g[S | bi] + g[S | bj]) - tol).all():
                return False
    return True


def check_supermodular(alpha, p, tol=TOL):
    """True iff rho(i,S) <= rho(i,T) + tol for all i and nested S within T.

    Exhaustive over subsets; capacity-capped at n = 20.  Raises RegionError
    if g_a is unbounded on any subset.
    """
    if p.n > 20:
        raise CapacityError("check_supermodular: n > 20")
    g = g_table(alpha, p)
    if (g == -INF).any():
        raise RegionError("check_supermodular: g_a unbounded on some subset")
    return check_supermodular_table(g, p.n, tol=tol)
