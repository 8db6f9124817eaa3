"""Shared domain records, index-set algebra, and division conventions.

Everything downstream works with a sign partition (N+, N-) of the index set
{0..n-1}, nonnegative continuous variables y with indicator variables x, and
ratios that follow the convention a/0 = +inf for a > 0 and 0/0 = 0.  That
convention is load-bearing: sorting keys, lifting denominators and cut values
all rely on it, so it lives here in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

### tolerances ---------------------------------------------------------------

# Library-wide absolute tolerance for bound/sign comparisons.  Operations that
# need something tighter or looser state it explicitly.
TOL = 1e-9

INF = math.inf


class InputError(ValueError):
    """Invalid argument values (bad indices, shape mismatches, out-of-bounds)."""


class CapacityError(ValueError):
    """Problem size exceeds what an exhaustive operation is willing to do."""


class RegionError(ValueError):
    """Operation required a bounded multiplier region but got an unbounded one."""


class SolverError(RuntimeError):
    """Numerical failure inside an iterative solver."""


class OracleError(RuntimeError):
    """An independent oracle failed to converge or detected a violation."""


### index-set algebra --------------------------------------------------------


def _check_indices(S, n):
    for i in S:
        if not (0 <= i < n):
            raise InputError(f"index {i} out of range for length {n}")


def sum_over(v, S):
    """c(S) = sum_{i in S} c_i, with c(empty) = 0."""
    v = np.asarray(v, dtype=float)
    S = tuple(S)
    _check_indices(S, len(v))
    if not S:
        return 0.0
    return float(v[list(S)].sum())


def max_over(v, S):
    """max_c(S) = max_{i in S} c_i, with max_c(empty) = 0 by convention."""
    v = np.asarray(v, dtype=float)
    S = tuple(S)
    _check_indices(S, len(v))
    if not S:
        return 0.0
    return float(v[list(S)].max())


def argmax_over(v, S):
    """Lowest index attaining max_over(v, S); None for the empty set."""
    v = np.asarray(v, dtype=float)
    S = tuple(sorted(S))
    _check_indices(S, len(v))
    if not S:
        return None
    best = S[0]
    for i in S[1:]:
        if v[i] > v[best]:
            best = i
    return best


def safe_ratio(num, den):
    """num/den under the convention a/0 = +inf (a > 0) and 0/0 = 0.

    Negative numerators keep the same rule on the sign of num: the convention
    only ever sees nonnegative numerators in this library, but -a/0 = -inf is
    the consistent extension and avoids masking sign bugs upstream.
    """
    if den > 0.0:
        return num / den
    if den < 0.0:
        # Ratios in this library always carry nonnegative denominators; a
        # negative one is a caller bug, not a representable value.
        raise InputError(f"safe_ratio: negative denominator {den}")
    if num > 0.0:
        return INF
    if num < 0.0:
        return -INF
    return 0.0


### domain records -----------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Sign partition (N+, N-) of {0..n-1}.

    plus and minus are strictly increasing index tuples, disjoint, covering
    all of {0..n-1}.
    """

    n: int
    plus: tuple = ()
    minus: tuple = ()

    def __post_init__(self):
        if self.n <= 0:
            raise InputError("Partition: n must be positive")
        plus = tuple(self.plus)
        minus = tuple(self.minus)
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)
        _check_indices(plus, self.n)
        _check_indices(minus, self.n)
        if list(plus) != sorted(set(plus)) or list(minus) != sorted(set(minus)):
            raise InputError("Partition: index sets must be strictly increasing")
        if set(plus) & set(minus):
            raise InputError("Partition: plus and minus overlap")
        if set(plus) | set(minus) != set(range(self.n)):
            raise InputError("Partition: plus and minus must cover {0..n-1}")

    @staticmethod
    def all_plus(n):
        """The X+ partition: every index on the positive side."""
        return Partition(n, tuple(range(n)), ())

    @property
    def is_positive(self):
        return not self.minus


@dataclass(frozen=True)
class FractionalPoint:
    """A candidate point (x, y, t) for separation; x in [0,1]^n, y >= 0."""

    x: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise InputError("FractionalPoint: x and y must be 1-d and equal length")
        if (x < -TOL).any() or (x > 1.0 + TOL).any():
            raise InputError("FractionalPoint: x outside [0,1]")
        if (y < -TOL).any():
            raise InputError("FractionalPoint: y must be nonnegative")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self):
        return self.x.shape[0]
