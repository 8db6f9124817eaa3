"""Conic model representation, extended cut templates, and text I/O.

A ConicModel is linear data plus rotated-cone blocks: minimize c'z subject to
linear rows, variable bounds, and blocks w'w <= u*v with u, v >= 0.  Binaries
are marked indices (relaxed to [0,1] by the continuous solver).

``emit_extended_cut`` instantiates the extended formulation of one lifted cut
on a rank-one row t >= (f'y)^2.  Each ratio term q^2/d of the closed form
becomes a rotated cone s*v >= w^2 with linear rows defining the numerator w
and denominator v from the model variables and fresh multipliers (lambda, mu,
zeta); an epigraph row then bounds t by the sum of the split variables s.
The multipliers give the inequality enough slack to hold at every integer
point of the set regardless of which (L, R, U) produced it — the three
denominators always total exactly 1, so by Cauchy-Schwarz the bound can never
exceed the base square — while at condition-satisfying fractional points the
inner minimum collapses to the closed-form value with all multipliers zero.

``eval_extended_min`` computes that inner minimum pointwise (closed form in
the condition regime, coordinate descent otherwise), which is what the
validity and equivalence tests exercise.

The text format (extension ``.cqm``) is line-based with sections
VERSION/VARS/BOUNDS/BIN/OBJ/LIN/RSOC, 17-significant-digit floats, and
round-trips byte-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import INF, TOL, InputError, SolverError, safe_ratio, sum_over
from .lifted import LiftedCut, Sign, eval_lifted_rhs

### model --------------------------------------------------------------------

SENSES = ("<=", "==", ">=")


@dataclass
class LinearRow:
    coeffs: dict
    sense: str
    rhs: float


class ConicModel:
    """Mutable conic-quadratic model; single-owner while being built."""

    def __init__(self):
        self.var_names = []
        self.var_lb = []
        self.var_ub = []
        self.obj = {}
        self.obj_const = 0.0
        self.linear_rows = []
        self.rsoc_blocks = []
        self.binaries = set()

    @property
    def num_vars(self):
        return len(self.var_names)

    def add_var(self, lb=0.0, ub=INF, name=None, binary=False):
        idx = self.num_vars
        if name is None:
            name = f"v{idx}"
        if any(ch.isspace() for ch in name):
            raise InputError(f"variable name {name!r} contains whitespace")
        if lb > ub:
            raise InputError(f"variable {name}: lb > ub")
        self.var_names.append(name)
        self.var_lb.append(float(lb))
        self.var_ub.append(float(ub))
        if binary:
            self.binaries.add(idx)
        return idx

    def _check_idx(self, idx, what):
        if not (0 <= idx < self.num_vars):
            raise InputError(f"{what}: variable index {idx} out of range")

    def add_row(self, coeffs, sense, rhs):
        if sense not in SENSES:
            raise InputError(f"bad row sense {sense!r}")
        coeffs = {int(i): float(c) for i, c in coeffs.items() if c != 0.0}
        for i in coeffs:
            self._check_idx(i, "row")
        self.linear_rows.append(LinearRow(coeffs, sense, float(rhs)))
        return len(self.linear_rows) - 1

    def add_rsoc(self, u, v, w):
        w = tuple(int(i) for i in w)
        for i in (u, v, *w):
            self._check_idx(i, "rsoc")
        for i in (u, v):
            if self.var_lb[i] < 0.0:
                raise InputError("rsoc u/v variables need nonnegative lower bounds")
        self.rsoc_blocks.append((int(u), int(v), w))
        return len(self.rsoc_blocks) - 1

    def set_objective(self, coeffs, const=0.0):
        coeffs = {int(i): float(c) for i, c in coeffs.items() if c != 0.0}
        for i in coeffs:
            self._check_idx(i, "objective")
            if not np.isfinite(coeffs[i]):
                raise InputError("objective coefficients must be finite")
        self.obj = coeffs
        self.obj_const = float(const)

    def copy(self):
        m = ConicModel()
        m.var_names = list(self.var_names)
        m.var_lb = list(self.var_lb)
        m.var_ub = list(self.var_ub)
        m.obj = dict(self.obj)
        m.obj_const = self.obj_const
        m.linear_rows = [LinearRow(dict(r.coeffs), r.sense, r.rhs) for r in self.linear_rows]
        m.rsoc_blocks = list(self.rsoc_blocks)
        m.binaries = set(self.binaries)
        return m


@dataclass(frozen=True)
class RankOneRow:
    """Context tying a rank-one epigraph row to model variables.

    f holds the row coefficients over the instance's continuous variables;
    y_vars/x_vars the model indices of those variables; t_var the epigraph
    variable of this row.
    """

    f: np.ndarray
    y_vars: tuple
    x_vars: tuple
    t_var: int

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "y_vars", tuple(int(i) for i in self.y_vars))
        object.__setattr__(self, "x_vars", tuple(int(i) for i in self.x_vars))
        if len(self.y_vars) != len(f) or len(self.x_vars) != len(f):
            raise InputError("RankOneRow: f, y_vars, x_vars must have equal length")

    def support_partition(self):
        """(plus, minus) index sets of the nonzero row coefficients."""
        plus = tuple(i for i in range(len(self.f)) if self.f[i] > 0.0)
        minus = tuple(i for i in range(len(self.f)) if self.f[i] < 0.0)
        return plus, minus


@dataclass(frozen=True)
class ExtendedCutBlock:
    cut: LiftedCut
    lam: tuple
    mu: tuple
    lam0: int | None
    mu0: int | None
    zeta: int | None
    splits: tuple
    cones: tuple
    rows: tuple


def emit_extended_cut(cut, row, model):
    """Instantiate one lifted cut on a rank-one row; returns the block record.

    The signed side of the row's coefficient pattern must be partitioned by
    (cut.L, cut.R, cut.U).  Scaled variables |f_i| y_i appear through the
    defining rows; indices with f_i = 0 take no part.
    """
    plus, minus = row.support_partition()
    side = plus if cut.sign is Sign.PLUS else minus
    other = minus if cut.sign is Sign.PLUS else plus
    if set(cut.L) | set(cut.R) | set(cut.U) != set(side):
        raise InputError("emit_extended_cut: cut does not partition the row's signed side")

    af = np.abs(row.f)
    xv, yv = row.x_vars, row.y_vars
    rows_added = []
    cones_added = []

    def row_id(coeffs, sense, rhs):
        rid = model.add_row(coeffs, sense, rhs)
        rows_added.append(rid)
        return rid

    def cone_id(u, v, w):
        cid = model.add_rsoc(u, v, w)
        cones_added.append(cid)
        return cid

    R = list(cut.R)
    U = list(cut.U)
    L = list(cut.L)
    tag = f"c{len(model.rsoc_blocks)}"

    positive_case = not other and not U
    s_L = model.add_var(0.0, INF, f"{tag}_sL")
    v_L = model.add_var(0.0, INF, f"{tag}_vL")
    w_L = model.add_var(-INF, INF, f"{tag}_wL")
    mu = tuple(model.add_var(0.0, INF, f"{tag}_mu{i}") for i in R)
    s_R = tuple(model.add_var(0.0, INF, f"{tag}_s{i}") for i in R)
    v_R = tuple(model.add_var(0.0, INF, f"{tag}_v{i}") for i in R)
    w_R = tuple(model.add_var(-INF, INF, f"{tag}_w{i}") for i in R)

    if positive_case:
        lam, lam0, mu0, zeta = (), None, None, None
        s_U = v_U = w_U = None
    else:
        lam = tuple(model.add_var(0.0, INF, f"{tag}_lam{i}") for i in R)
        lam0 = model.add_var(0.0, INF, f"{tag}_lam0")
        mu0 = model.add_var(0.0, INF, f"{tag}_mu0")
        zeta = model.add_var(0.0, INF, f"{tag}_zeta")
        s_U = model.add_var(0.0, INF, f"{tag}_sU")
        v_U = model.add_var(0.0, INF, f"{tag}_vU")
        w_U = model.add_var(-INF, INF, f"{tag}_wU")

    # first denominator: v_L = 1 - x(R) - x(U) + mu(R) (+ mu0)
    c = {v_L: 1.0}
    for k, i in enumerate(R):
        c[xv[i]] = c.get(xv[i], 0.0) + 1.0
        c[mu[k]] = -1.0
    for i in U:
        c[xv[i]] = c.get(xv[i], 0.0) + 1.0
    if mu0 is not None:
        c[mu0] = 1.0
    row_id(c, "==", 1.0)

    # first numerator: w_L = |f|y(L) (- lam0)
    c = {w_L: 1.0}
    for i in L:
        c[yv[i]] = c.get(yv[i], 0.0) - af[i]
    if lam0 is not None:
        c[lam0] = 1.0
    row_id(c, "==", 0.0)
    cone_id(s_L, v_L, (w_L,))

    # per-index terms on R: v_i = x_i - mu_i, w_i = |f_i| y_i (- lam_i)
    for k, i in enumerate(R):
        row_id({v_R[k]: 1.0, xv[i]: -1.0, mu[k]: 1.0}, "==", 0.0)
        c = {w_R[k]: 1.0, yv[i]: -af[i]}
        if lam:
            c[lam[k]] = 1.0
        row_id(c, "==", 0.0)
        row_id({mu[k]: 1.0, xv[i]: -1.0}, "<=", 0.0)
        cone_id(s_R[k], v_R[k], (w_R[k],))

    splits = [s_L, *s_R]
    if not positive_case:
        # third term: v_U = x(U) - mu0, w_U = |f|y(U) - |f|y(other) + lam0 + lam(R) + zeta
        c = {v_U: 1.0, mu0: 1.0}
        for i in U:
            c[xv[i]] = c.get(xv[i], 0.0) - 1.0
        row_id(c, "==", 0.0)
        c = {w_U: 1.0, lam0: -1.0, zeta: -1.0}
        for i in U:
            c[yv[i]] = c.get(yv[i], 0.0) - af[i]
        for i in other:
            c[yv[i]] = c.get(yv[i], 0.0) + af[i]
        for lk in lam:
            c[lk] = -1.0
        row_id(c, "==", 0.0)
        c = {mu0: 1.0}
        for i in U:
            c[xv[i]] = c.get(xv[i], 0.0) - 1.0
        row_id(c, "<=", 0.0)
        cone_id(s_U, v_U, (w_U,))
        splits.append(s_U)

    # epigraph: t >= sum of splits
    c = {row.t_var: 1.0}
    for s in splits:
        c[s] = -1.0
    row_id(c, ">=", 0.0)

    return ExtendedCutBlock(
        cut=cut,
        lam=lam,
        mu=mu,
        lam0=lam0,
        mu0=mu0,
        zeta=zeta,
        splits=tuple(splits),
        cones=tuple(cones_added),
        rows=tuple(rows_added),
    )


### pointwise inner minimum ---------------------------------------------------


def _sq_ratio(num, den):
    return safe_ratio(num * num, den) if den >= 0.0 else (num * num) / den


def _conditions_hold(x, y, cut, p):
    """Prop.-6-style zero-multiplier conditions at (x, y) for this cut."""
    side, other = cut.side_indices(p)
    Lset, Uset = set(cut.L), set(cut.U)
    den_l = 1.0 - sum_over(x, [i for i in side if i not in Lset])
    if den_l < -TOL:
        return False
    ratio_l = safe_ratio(sum_over(y, cut.L), max(den_l, 0.0))
    for i in side:
        if i not in Lset and not ratio_l < safe_ratio(y[i], x[i]):
            return False
    if not other and not cut.U:
        return True
    num_u = sum_over(y, cut.U) - sum_over(y, other)
    if num_u < -TOL:
        return False
    ratio_u = safe_ratio(max(num_u, 0.0), sum_over(x, cut.U))
    for i in side:
        if i not in Uset and not ratio_u > safe_ratio(y[i], x[i]):
            return False
    return ratio_l < ratio_u


def eval_extended_min(x, y, cut, p, force_numeric=False, tol=1e-8, stop_below=None):
    """Inner minimum of the extended cut at (x, y).

    In the condition regime all multipliers vanish and the value is the
    closed-form rhs.  Otherwise (or when ``force_numeric`` requests an
    independent computation) the small convex program is minimized by
    multi-start cyclic coordinate descent, each coordinate solved in closed
    form within its box.  ``stop_below``, when given, allows early exit once
    the running best drops below it (useful in validity sweeps).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    side, other = cut.side_indices(p)
    if not force_numeric and _conditions_hold(x, y, cut, p):
        return eval_lifted_rhs(x, y, cut, p)

    yL = sum_over(y, cut.L)
    R = list(cut.R)
    xR = np.array([x[i] for i in R])
    yR = np.array([y[i] for i in R])
    xU = sum_over(x, cut.U)
    yU = sum_over(y, cut.U)
    y_oth = sum_over(y, other)
    positive_case = not other and not cut.U
    rng = np.random.default_rng(12345)

    if positive_case:
        return _min_positive_template(yL, xR, yR, rng, tol, stop_below)
    return _min_general_template(yL, xR, yR, xU, yU, y_oth, rng, tol, stop_below)


def _min_positive_template(yL, xR, yR, rng, tol, stop_below):
    """min over 0 <= mu <= x of yL^2/(1-x(R)+mu(R)) + sum y_i^2/(x_i-mu_i)."""
    m = len(xR)
    gap = 1.0 - float(xR.sum())

    def value(mu):
        v = _sq_ratio(yL, gap + float(mu.sum()))
        for i in range(m):
            v += _sq_ratio(yR[i], xR[i] - mu[i])
        return v

    def repair(mu):
        mu = np.clip(mu, 0.0, xR)
        need = -(gap + mu.sum())
        for i in range(m):
            if need <= 0:
                break
            room = xR[i] - mu[i]
            add = min(room, need)
            mu[i] += add
            need -= add
        return mu

    starts = [repair(np.zeros(m))]
    tot = yL + float(yR.sum())
    if tot > 0:
        s = 1.0 / tot
        starts.append(repair(xR - yR * s))
    if m:
        starts.append(repair(rng.uniform(0.0, 1.0, m) * xR))

    best = INF
    for mu in starts:
        val = value(mu)
        for _ in range(500):
            moved = 0.0
            D1 = gap + float(mu.sum())
            for i in range(m):
                lo = max(0.0, mu[i] - D1)
                hi = xR[i]
                c1 = D1 - mu[i]
                cands = {lo, hi, mu[i]}
                if yL + yR[i] > 0:
                    cands.add(min(max((yL * xR[i] - yR[i] * c1) / (yL + yR[i]), lo), hi))
                two = lambda v: _sq_ratio(yL, c1 + v) + _sq_ratio(yR[i], xR[i] - v)
                v_new = min(cands, key=two)
                if two(v_new) < two(mu[i]) - 0.0:
                    moved = max(moved, abs(v_new - mu[i]))
                    D1 += v_new - mu[i]
                    mu[i] = v_new
            val = value(mu)
            if stop_below is not None and min(best, val) <= stop_below:
                return min(best, val)
            if moved <= tol:
                break
        best = min(best, val)
        if stop_below is not None and best <= stop_below:
            return best
    return best


def _min_general_template(yL, xR, yR, xU, yU, y_oth, rng, tol, stop_below):
    m = len(xR)
    base_gap = 1.0 - float(xR.sum()) - xU

    def d1_of(mu, mu0):
        return base_gap + float(mu.sum()) + mu0

    def value(st):
        mu, mu0, lam, lam0, zeta = st
        v = _sq_ratio(yL - lam0, d1_of(mu, mu0))
        for i in range(m):
            v += _sq_ratio(yR[i] - lam[i], xR[i] - mu[i])
        v += _sq_ratio(yU - y_oth + lam0 + float(lam.sum()) + zeta, xU - mu0)
        return v

    def repair(st):
        mu, mu0, lam, lam0, zeta = st
        mu = np.clip(mu, 0.0, xR)
        mu0 = min(max(mu0, 0.0), xU)
        need = -d1_of(mu, mu0)
        if need > 0:
            add = min(xU - mu0, need)
            mu0 += add
            need -= add
        for i in range(m):
            if need <= 0:
                break
            add = min(xR[i] - mu[i], need)
            mu[i] += add
            need -= add
        return [mu, mu0, np.maximum(lam, 0.0), max(lam0, 0.0), max(zeta, 0.0)]

    z = np.zeros(m)
    starts = [repair([z.copy(), 0.0, z.copy(), 0.0, 0.0])]
    y_side = yL + float(yR.sum()) + yU
    starts.append(
        repair([xR.copy(), max(0.0, xU - 1.0), yR.copy(), yL, max(0.0, y_oth - y_side)])
    )
    tot = yL + float(yR.sum()) + max(yU - y_oth, 0.0)
    if tot > 0:
        s = 1.0 / tot
        starts.append(repair([xR - yR * s, xU - max(yU - y_oth, 0.0) * s, z.copy(), 0.0, 0.0]))
    starts.append(
        repair(
            [
                rng.uniform(0.0, 1.0, m) * xR,
                rng.uniform(0.0, 1.0) * xU,
                rng.uniform(0.0, 1.5, m) * (yR + 0.1),
                rng.uniform(0.0, 1.5) * (yL + 0.1),
                rng.uniform(0.0, 1.0),
            ]
        )
    )

    def pair_min(A, B, c, e, lo, hi, cur):
        # minimize A^2/(c+v) + B^2/(e-v) over [lo, hi]
        cands = {lo, hi, cur}
        if A + B > 0:
            cands.add(min(max((A * e - B * c) / (A + B), lo), hi))
        f = lambda v: _sq_ratio(A, c + v) + _sq_ratio(B, e - v)
        v = min(cands, key=f)
        return v if f(v) <= f(cur) else cur

    best = INF
    for st in starts:
        mu, mu0, lam, lam0, zeta = st
        val = value(st)
        for _ in range(500):
            moved = 0.0
            # mu0, then mu_i: shift denominator mass against the first term
            D1 = d1_of(mu, mu0)
            N1 = abs(yL - lam0)
            N3 = abs(yU - y_oth + lam0 + float(lam.sum()) + zeta)
            v_new = pair_min(N1, N3, D1 - mu0, xU, max(0.0, mu0 - D1), xU, mu0)
            moved = max(moved, abs(v_new - mu0))
            mu0 = v_new
            D1 = d1_of(mu, mu0)
            for i in range(m):
                Ni = abs(yR[i] - lam[i])
                v_new = pair_min(N1, Ni, D1 - mu[i], xR[i], max(0.0, mu[i] - D1), xR[i], mu[i])
                moved = max(moved, abs(v_new - mu[i]))
                D1 += v_new - mu[i]
                mu[i] = v_new
            # lam0, lam_i, zeta: shift numerator mass into the U term
            d0 = xU - mu0
            C = yU - y_oth + float(lam.sum()) + zeta
            f0 = lambda v: _sq_ratio(yL - v, D1) + _sq_ratio(C + v, d0)
            cands = {0.0, lam0, yL, max(0.0, -C)}
            if D1 + d0 > 0:
                cands.add(max((yL * d0 - C * D1) / (D1 + d0), 0.0))
            v_new = min(cands, key=f0)
            if f0(v_new) <= f0(lam0):
                moved = max(moved, abs(v_new - lam0))
                lam0 = v_new
            for i in range(m):
                di = xR[i] - mu[i]
                Ci = yU - y_oth + lam0 + float(lam.sum()) - lam[i] + zeta
                fi = lambda v: _sq_ratio(yR[i] - v, di) + _sq_ratio(Ci + v, d0)
                cands = {0.0, lam[i], yR[i], max(0.0, -Ci)}
                if di + d0 > 0:
                    cands.add(max((yR[i] * d0 - Ci * di) / (di + d0), 0.0))
                v_new = min(cands, key=fi)
                if fi(v_new) <= fi(lam[i]):
                    moved = max(moved, abs(v_new - lam[i]))
                    lam[i] = v_new
            C0 = yU - y_oth + lam0 + float(lam.sum())
            v_new = max(0.0, -C0)
            moved = max(moved, abs(v_new - zeta))
            zeta = v_new
            val = value([mu, mu0, lam, lam0, zeta])
            if stop_below is not None and min(best, val) <= stop_below:
                return min(best, val)
            if moved <= tol:
                break
        best = min(best, val)
        if stop_below is not None and best <= stop_below:
            return best
    if not np.isfinite(best) and best != INF:
        raise SolverError("extended-min descent diverged")
    return best


### text format ---------------------------------------------------------------


def _fmt(v):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return format(float(v), ".17g")


def _parse_float(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise InputError(f"line {lineno}: bad number {tok!r}") from None


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"line {lineno}: bad integer {tok!r}") from None


def export_model(model):
    """Serialize to the .cqm text format; deterministic, round-trip exact."""
    out = ["VERSION 1"]
    out.append(f"VARS {model.num_vars}")
    out.extend(model.var_names)
    out.append(f"BOUNDS {model.num_vars}")
    for lb, ub in zip(model.var_lb, model.var_ub):
        out.append(f"{_fmt(lb)} {_fmt(ub)}")
    bins = sorted(model.binaries)
    out.append(f"BIN {len(bins)}")
    out.extend(str(i) for i in bins)
    obj = sorted(model.obj.items())
    out.append(f"OBJ {_fmt(model.obj_const)} {len(obj)}")
    for i, cf in obj:
        out.append(f"{i} {_fmt(cf)}")
    out.append(f"LIN {len(model.linear_rows)}")
    for r in model.linear_rows:
        items = sorted(r.coeffs.items())
        out.append(f"{len(items)} {r.sense} {_fmt(r.rhs)}")
        for i, cf in items:
            out.append(f"{i} {_fmt(cf)}")
    out.append(f"RSOC {len(model.rsoc_blocks)}")
    for u, v, w in model.rsoc_blocks:
        out.append(" ".join([str(u), str(v), str(len(w)), *(str(i) for i in w)]))
    return "\n".join(out) + "\n"


def import_model(text):
    """Parse the .cqm text format; exact inverse of export_model."""
    lines = text.splitlines()
    pos = 0

    def next_line(what):
        nonlocal pos
        if pos >= len(lines):
            raise InputError(f"unexpected end of file while reading {what}")
        ln = lines[pos]
        pos += 1
        return ln, pos

    def header(section):
        ln, no = next_line(section)
        parts = ln.split()
        if len(parts) < 2 or parts[0] != section:
            raise InputError(f"line {no}: expected {section} header, got {ln!r}")
        try:
            counts = [int(v) for v in parts[1:]] if section != "OBJ" else parts[1:]
        except ValueError:
            raise InputError(f"line {no}: bad count in {section} header") from None
        return counts, no

    ln, no = next_line("VERSION")
    if ln.split() != ["VERSION", "1"]:
        raise InputError(f"line {no}: unsupported version line {ln!r}")
    model = ConicModel()

    (nvars,), _ = header("VARS")
    names = []
    for _ in range(nvars):
        ln, no = next_line("VARS entry")
        names.append(ln.strip())
    (nb,), _ = header("BOUNDS")
    if nb != nvars:
        raise InputError("BOUNDS count differs from VARS count")
    for k in range(nvars):
        ln, no = next_line("BOUNDS entry")
        parts = ln.split()
        if len(parts) != 2:
            raise InputError(f"line {no}: bounds entry needs two fields")
        model.add_var(_parse_float(parts[0], no), _parse_float(parts[1], no), names[k])
    (nbin,), _ = header("BIN")
    for _ in range(nbin):
        ln, no = next_line("BIN entry")
        i = _parse_int(ln.split()[0], no)
        model._check_idx(i, f"line {no}: BIN")
        model.binaries.add(i)
    counts, no = header("OBJ")
    if len(counts) != 2:
        raise InputError(f"line {no}: OBJ header needs constant and count")
    const = _parse_float(counts[0], no)
    nnz = _parse_int(counts[1], no)
    obj = {}
    for _ in range(nnz):
        ln, no = next_line("OBJ entry")
        parts = ln.split()
        obj[_parse_int(parts[0], no)] = _parse_float(parts[1], no)
    model.set_objective(obj, const)
    (nrows,), _ = header("LIN")
    for k in range(nrows):
        ln, no = next_line("LIN row header")
        parts = ln.split()
        if len(parts) != 3 or parts[1] not in SENSES:
            raise InputError(f"line {no}: bad row header in LIN record {k}")
        cnt = _parse_int(parts[0], no)
        rhs = _parse_float(parts[2], no)
        coeffs = {}
        for _ in range(cnt):
            ln2, no2 = next_line("LIN row entry")
            p2 = ln2.split()
            coeffs[_parse_int(p2[0], no2)] = _parse_float(p2[1], no2)
        model.add_row(coeffs, parts[1], rhs)
    (nblocks,), _ = header("RSOC")
    for k in range(nblocks):
        ln, no = next_line("RSOC entry")
        parts = [_parse_int(v, no) for v in ln.split()]
        if len(parts) < 3 or len(parts) != 3 + parts[2]:
            raise InputError(f"line {no}: malformed RSOC record {k}")
        model.add_rsoc(parts[0], parts[1], parts[3:])
    if pos != len(lines) and any(lines[pos:]):
        raise InputError(f"line {pos + 1}: trailing content after RSOC section")
    return model
