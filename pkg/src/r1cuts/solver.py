"""Continuous relaxation solver and brute-force mixed-integer reference.

solve_relaxation handles ConicModel instances at desk scale: binaries are
relaxed to [0,1], rotated cones w'w <= u*v are rewritten as second-order
cones ||(u-v, 2w)|| <= u+v, and the cone program is handed to cvxopt's
conelp.  Cone-free models go to scipy's HiGHS LP instead.  Variables fixed
by their bounds are substituted out first — an interior-point method needs
a nonempty relative interior, and the brute-force oracle fixes binaries by
pinching bounds.

solve_mip_bruteforce enumerates binary assignments (optionally a caller-
supplied list), fixes them, and keeps the best relaxation; it is the "opt"
reference for gap reporting.  Assignments violating purely-binary linear
rows or the binaries' own bounds are discarded before any conic solve.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import cvxopt
import cvxopt.solvers
from scipy.optimize import linprog

from .core import INF, CapacityError, InputError, SolverError

### statuses -----------------------------------------------------------------

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
ITERATION_LIMIT = "IterationLimit"


@dataclass
class SolveResult:
    status: str
    objective: float
    primal: np.ndarray
    kkt_residuals: dict


class _ConeSolver:
    """Thin wrapper around cvxopt.solvers.conelp with pinned options."""

    def __init__(self, tol, maxiters=200):
        self.tol = float(tol)
        self.maxiters = int(maxiters)

    def solve(self, c, G, h, dims, A, b):
        saved = dict(cvxopt.solvers.options)
        cvxopt.solvers.options.clear()
        cvxopt.solvers.options.update(
            {
                "show_progress": False,
                "abstol": self.tol,
                "reltol": self.tol,
                "feastol": self.tol,
                "maxiters": self.maxiters,
            }
        )
        try:
            return cvxopt.solvers.conelp(c, G, h, dims, A, b)
        finally:
            cvxopt.solvers.options.clear()
            cvxopt.solvers.options.update(saved)


### reduction ----------------------------------------------------------------


class _Reduced:
    """Model with fixed variables substituted and constant rows checked."""

    def __init__(self, model, feastol):
        self.model = model
        n = model.num_vars
        lb = np.array(model.var_lb)
        ub = np.array(model.var_ub)
        fixed = lb == ub
        self.fix_val = np.where(fixed, lb, 0.0)
        self.var_map = np.full(n, -1, dtype=int)
        self.free = np.flatnonzero(~fixed)
        self.var_map[self.free] = np.arange(len(self.free))
        self.nfree = len(self.free)
        self.infeasible_row = None

        self.obj_const = model.obj_const
        self.c = np.zeros(self.nfree)
        for i, cf in model.obj.items():
            if fixed[i]:
                self.obj_const += cf * self.fix_val[i]
            else:
                self.c[self.var_map[i]] += cf

        # rows: (dense coeff over free vars is wasteful; keep sparse dicts)
        self.eq = []
        self.ineq = []  # a'z <= rhs
        for rid, row in enumerate(model.linear_rows):
            coeffs = {}
            shift = 0.0
            for i, cf in row.coeffs.items():
                if fixed[i]:
                    shift += cf * self.fix_val[i]
                else:
                    coeffs[self.var_map[i]] = coeffs.get(self.var_map[i], 0.0) + cf
            rhs = row.rhs - shift
            if not coeffs:
                ok = (
                    abs(rhs) <= feastol
                    if row.sense == "=="
                    else (rhs >= -feastol if row.sense == "<=" else rhs <= feastol)
                )
                if not ok:
                    self.infeasible_row = rid
                continue
            if row.sense == "==":
                self.eq.append((coeffs, rhs))
            elif row.sense == "<=":
                self.ineq.append((coeffs, rhs))
            else:
                self.ineq.append(({k: -v for k, v in coeffs.items()}, -rhs))
        for i in self.free:
            j = self.var_map[i]
            if lb[i] > -INF:
                self.ineq.append(({j: -1.0}, -lb[i]))
            if ub[i] < INF:
                self.ineq.append(({j: 1.0}, ub[i]))
        # cones kept verbatim (fixed members contribute constants in h)
        self.cones = model.rsoc_blocks

    def full_primal(self, z):
        out = self.fix_val.copy()
        out[self.free] = z
        return out


def _terms(model, reduced, idx, sign):
    """(columns, values, const) of +/- variable idx over the reduced space."""
    if reduced.var_map[idx] >= 0:
        return [reduced.var_map[idx]], [sign], 0.0
    return [], [], sign * reduced.fix_val[idx]


def solve_relaxation(model, tol=1e-7, maxiters=200):
    """Solve the continuous relaxation of a ConicModel.

    Binaries are treated as box variables in [0,1] (tightened by their own
    bounds).  Returns a SolveResult whose kkt_residuals report the solver's
    primal/dual infeasibility and relative gap at the reported point.
    """
    work = model
    if model.binaries:
        work = model.copy()
        for i in model.binaries:
            work.var_lb[i] = max(work.var_lb[i], 0.0)
            work.var_ub[i] = min(work.var_ub[i], 1.0)
            if work.var_lb[i] > work.var_ub[i]:
                return SolveResult(
                    INFEASIBLE, np.nan, np.full(model.num_vars, np.nan), _nan_kkt()
                )
    red = _Reduced(work, feastol=max(tol, 1e-9) * 10)
    if red.infeasible_row is not None:
        return SolveResult(INFEASIBLE, np.nan, np.full(model.num_vars, np.nan), _nan_kkt())
    if red.nfree == 0:
        prim = red.full_primal(np.zeros(0))
        viol = _primal_violation(work, prim)
        if viol > max(tol, 1e-9) * 10:
            return SolveResult(INFEASIBLE, np.nan, prim, _nan_kkt())
        return SolveResult(
            OPTIMAL, red.obj_const, prim, {"primal_inf": viol, "dual_inf": 0.0, "gap": 0.0}
        )
    if not red.cones:
        return _solve_lp(model, red, tol)
    return _solve_cone(model, red, tol, maxiters)


def _nan_kkt():
    return {"primal_inf": np.nan, "dual_inf": np.nan, "gap": np.nan}


def _solve_lp(model, red, tol):
    A_eq = b_eq = None
    if red.eq:
        A_eq = np.zeros((len(red.eq), red.nfree))
        b_eq = np.zeros(len(red.eq))
        for k, (coeffs, rhs) in enumerate(red.eq):
            for j, cf in coeffs.items():
                A_eq[k, j] = cf
            b_eq[k] = rhs
    A_ub = b_ub = None
    if red.ineq:
        A_ub = np.zeros((len(red.ineq), red.nfree))
        b_ub = np.zeros(len(red.ineq))
        for k, (coeffs, rhs) in enumerate(red.ineq):
            for j, cf in coeffs.items():
                A_ub[k, j] = cf
            b_ub[k] = rhs
    res = linprog(
        red.c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(None, None)] * red.nfree,
        method="highs",
    )
    if res.status == 2:
        return SolveResult(INFEASIBLE, np.nan, np.full(model.num_vars, np.nan), _nan_kkt())
    if res.status == 3:
        raise SolverError("relaxation is unbounded")
    if res.status != 0:
        return SolveResult(
            ITERATION_LIMIT, np.nan, np.full(model.num_vars, np.nan), _nan_kkt()
        )
    prim = red.full_primal(np.asarray(res.x))
    viol = _primal_violation(model, prim, relax_binaries=True)
    return SolveResult(
        OPTIMAL,
        float(res.fun) + red.obj_const,
        prim,
        {"primal_inf": viol, "dual_inf": 0.0, "gap": 0.0},
    )


def _solve_cone(model, red, tol, maxiters):
    cols, vals, rows_idx, h_list = [], [], [], []

    def add_entry(r, terms):
        tc, tv, const = terms
        for j, v in zip(tc, tv):
            rows_idx.append(r)
            cols.append(j)
            vals.append(-v)  # G z + s = h with s = h - G z; row holds +expr
        return const

    # inequality block first
    nrow = 0
    for coeffs, rhs in red.ineq:
        for j, cf in coeffs.items():
            rows_idx.append(nrow)
            cols.append(j)
            vals.append(cf)
        h_list.append(rhs)
        nrow += 1
    dims = {"l": nrow, "q": [], "s": []}
    for u, v, w in red.cones:
        dims["q"].append(2 + len(w))
        # s_block = (u+v, u-v, 2w); entries of G are negated so s = h - Gz
        # reproduces the expression, with fixed-variable parts landing in h
        const = add_entry(nrow, _combine(model, red, [(u, 1.0), (v, 1.0)]))
        h_list.append(const)
        nrow += 1
        const = add_entry(nrow, _combine(model, red, [(u, 1.0), (v, -1.0)]))
        h_list.append(const)
        nrow += 1
        for wk in w:
            const = add_entry(nrow, _combine(model, red, [(wk, 2.0)]))
            h_list.append(const)
            nrow += 1
    G = cvxopt.spmatrix(
        [float(v) for v in vals],
        [int(r) for r in rows_idx],
        [int(j) for j in cols],
        (nrow, red.nfree),
    )
    h = cvxopt.matrix(np.array(h_list, dtype=float))
    A = b = None
    if red.eq:
        ar, ac, av, bl = [], [], [], []
        for k, (coeffs, rhs) in enumerate(red.eq):
            for j, cf in coeffs.items():
                ar.append(int(k))
                ac.append(int(j))
                av.append(float(cf))
            bl.append(rhs)
        A = cvxopt.spmatrix(av, ar, ac, (len(red.eq), red.nfree))
        b = cvxopt.matrix(np.array(bl, dtype=float))
    c = cvxopt.matrix(red.c)

    solver = _ConeSolver(tol, maxiters)
    loosened = False
    try:
        sol = solver.solve(c, G, h, dims, A, b)
    except (ValueError, ArithmeticError) as exc:
        raise SolverError(f"cone solver failed: {exc}") from exc
    if sol["status"] == "unknown":
        solver = _ConeSolver(max(tol * 100, 1e-5), maxiters)
        sol2 = solver.solve(c, G, h, dims, A, b)
        if sol2["status"] != "unknown":
            sol = sol2
            loosened = True
    status = sol["status"]
    if status == "primal infeasible":
        return SolveResult(INFEASIBLE, np.nan, np.full(model.num_vars, np.nan), _nan_kkt())
    if status == "dual infeasible":
        raise SolverError("relaxation is unbounded")
    if status == "unknown":
        if sol["x"] is None:
            return SolveResult(
                ITERATION_LIMIT, np.nan, np.full(model.num_vars, np.nan), _nan_kkt()
            )
        prim = red.full_primal(np.array(sol["x"]).ravel())
        return SolveResult(
            ITERATION_LIMIT,
            float(sol["primal objective"]) + red.obj_const,
            prim,
            _kkt_from(sol),
        )
    prim = red.full_primal(np.array(sol["x"]).ravel())
    kkt = _kkt_from(sol)
    status_out = OPTIMAL
    if loosened and max(kkt["primal_inf"], kkt["gap"]) > tol:
        status_out = ITERATION_LIMIT
    return SolveResult(
        status_out, float(sol["primal objective"]) + red.obj_const, prim, kkt
    )


def _combine(model, red, items):
    cols, vals = [], []
    const = 0.0
    for idx, sgn in items:
        tc, tv, tconst = _terms(model, red, idx, sgn)
        cols.extend(tc)
        vals.extend(tv)
        const += tconst
    return cols, vals, const


def _kkt_from(sol):
    def val(key):
        v = sol.get(key)
        return float(v) if v is not None else np.inf

    return {
        "primal_inf": val("primal infeasibility"),
        "dual_inf": val("dual infeasibility"),
        "gap": val("relative gap"),
    }


def _primal_violation(model, z, relax_binaries=False):
    """Max normalized constraint violation of z on the original model."""
    worst = 0.0
    for row in model.linear_rows:
        lhs = sum(cf * z[i] for i, cf in row.coeffs.items())
        scale = 1.0 + abs(row.rhs)
        if row.sense == "==":
            worst = max(worst, abs(lhs - row.rhs) / scale)
        elif row.sense == "<=":
            worst = max(worst, (lhs - row.rhs) / scale)
        else:
            worst = max(worst, (row.rhs - lhs) / scale)
    for i in range(model.num_vars):
        lb, ub = model.var_lb[i], model.var_ub[i]
        if relax_binaries and i in model.binaries:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > -INF:
            worst = max(worst, (lb - z[i]) / (1.0 + abs(lb)))
        if ub < INF:
            worst = max(worst, (z[i] - ub) / (1.0 + abs(ub)))
    for u, v, w in model.rsoc_blocks:
        ww = sum(z[k] * z[k] for k in w)
        worst = max(worst, (ww - z[u] * z[v]) / (1.0 + abs(ww)))
        worst = max(worst, -z[u], -z[v])
    return float(worst)


### brute force ---------------------------------------------------------------


def solve_mip_bruteforce(model, max_binaries=16, assignments=None, tol=1e-7):
    """Exact reference by enumeration over binary assignments.

    ``assignments``, when given, is an iterable of 0/1 tuples aligned with
    sorted(model.binaries) and replaces full enumeration (the caller
    guarantees it covers every feasible assignment).  Assignments violating
    purely-binary rows or the binaries' bounds are pruned before solving.
    """
    bins = sorted(model.binaries)
    if len(bins) > max_binaries:
        raise CapacityError(f"{len(bins)} binaries exceed max_binaries={max_binaries}")
    if not bins:
        return solve_relaxation(model, tol)
    pos = {i: k for k, i in enumerate(bins)}
    bin_rows = [
        r for r in model.linear_rows if r.coeffs and all(i in pos for i in r.coeffs)
    ]
    lo = np.array([model.var_lb[i] for i in bins])
    hi = np.array([model.var_ub[i] for i in bins])

    if assignments is None:
        assignments = itertools.product((0, 1), repeat=len(bins))

    work = model.copy()
    best = None
    seen_limit = False
    any_assignment = False
    for a in assignments:
        a = np.asarray(a, dtype=float)
        any_assignment = True
        if np.any(a < lo - 1e-9) or np.any(a > hi + 1e-9):
            continue
        ok = True
        for r in bin_rows:
            lhs = sum(cf * a[pos[i]] for i, cf in r.coeffs.items())
            if r.sense == "==":
                ok = abs(lhs - r.rhs) <= 1e-9
            elif r.sense == "<=":
                ok = lhs <= r.rhs + 1e-9
            else:
                ok = lhs >= r.rhs - 1e-9
            if not ok:
                break
        if not ok:
            continue
        for k, i in enumerate(bins):
            work.var_lb[i] = a[k]
            work.var_ub[i] = a[k]
        res = solve_relaxation(work, tol)
        if res.status == ITERATION_LIMIT:
            seen_limit = True
            continue
        if res.status != OPTIMAL:
            continue
        if best is None or res.objective < best.objective:
            best = res
    if best is None:
        status = ITERATION_LIMIT if seen_limit else INFEASIBLE
        if not any_assignment:
            status = INFEASIBLE
        return SolveResult(status, np.nan, np.full(model.num_vars, np.nan), _nan_kkt())
    return best


def solution_text(model, result):
    """name=value lines, 17 significant digits (the solution file format)."""
    lines = [f"status={result.status}", f"objective={result.objective:.17g}"]
    for name, v in zip(model.var_names, result.primal):
        lines.append(f"{name}={v:.17g}")
    return "\n".join(lines) + "\n"
