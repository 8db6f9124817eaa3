"""Portfolio-style benchmark: instance generator, formulations, cut loop.

Instances follow the factor model q = F'y with F = E*G, E sparse uniform
(zero with probability 0.8), G uniform on [rho, 1], idiosyncratic variances
d_i^2 ~ U[0, v*delta] with v the mean diagonal of FF', return lower bounds
b_i ~ U[0.25, 0.75]*sqrt((FF')_ii + d_i^2), beta = (e'b)/n, and fixed costs
a_i = alpha_fc*(e'b)/n^2.  All randomness flows from numpy SeedSequence
streams spawned per parameter block (E, G, d, b), so changing one block's
use cannot shift another's draws.  The E block draws the sparsity mask
matrix first and then a full value matrix (masked entries consume their
draw and are zeroed).

Three formulations share the variables (y, x binary, one):

  basic   min ||q||^2 + sum d_i^2 y_i^2          (indicators only in rows)
  persp   + perspective cones y_i^2 <= p_i x_i
  super   perspective + per-factor epigraphs t_j >= (F_j'y)^2, which the
          cut loop tightens with extended lifted cuts

The cut loop separates each factor row at the relaxation point, adds at
most r cuts per round and 3r in total, and stops when nothing is violated
by the epsilon = 1e-3 relative rule.  The exact reference value ("opt")
comes from support enumeration: a support S is feasible iff
max_{i in S} b_i >= beta + a(S), in which case the continuous problem on S
is a convex QP solved directly.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass

import numpy as np
import cvxopt
import cvxopt.solvers

from .core import CapacityError, FractionalPoint, InputError, Partition, SolverError
from .lifted import LiftedCut, separate
from .conic import ConicModel, RankOneRow, emit_extended_cut
from .solver import OPTIMAL, solve_relaxation

### instances ----------------------------------------------------------------

METHODS = ("basic", "persp", "super")
METHOD_LABELS = {"basic": "Basic", "persp": "Perspective", "super": "Supermodular"}


@dataclass(frozen=True)
class PortfolioInstance:
    n: int
    r: int
    F: np.ndarray
    d: np.ndarray
    b: np.ndarray
    a: np.ndarray
    beta: float
    seed: int
    params: dict

    def __post_init__(self):
        for field in ("F", "d", "b", "a"):
            arr = np.array(getattr(self, field), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, field, arr)
        if self.F.shape != (self.n, self.r):
            raise InputError("F must be n x r")
        for field in ("d", "b", "a"):
            if getattr(self, field).shape != (self.n,):
                raise InputError(f"{field} must have length n")
        if min(self.d.min(), self.b.min(), self.a.min(), 0.0) < 0.0:
            raise InputError("d, b, a must be nonnegative")


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))


def generate_instance(n, r, rho, delta, alpha_fc, seed):
    if not (n >= r >= 1):
        raise InputError("need n >= r >= 1")
    if delta < 0 or alpha_fc < 0:
        raise InputError("delta and alpha_fc must be nonnegative")
    if rho > 1:
        raise InputError("rho must be <= 1")
    rng_e = _block_rng(seed, 0)
    mask = rng_e.random((n, r)) < 0.2
    values = rng_e.uniform(0.0, 1.0, (n, r))
    E = np.where(mask, values, 0.0)
    G = _block_rng(seed, 1).uniform(rho, 1.0, (r, r))
    F = E @ G
    diag = np.sum(F * F, axis=1)
    v = float(diag.mean())
    d = np.sqrt(_block_rng(seed, 2).uniform(0.0, v * delta, n))
    b = _block_rng(seed, 3).uniform(0.25, 0.75, n) * np.sqrt(diag + d * d)
    total_b = float(b.sum())
    beta = total_b / n
    a = np.full(n, alpha_fc * total_b / (n * n))
    return PortfolioInstance(
        n=n,
        r=r,
        F=F,
        d=d,
        b=b,
        a=a,
        beta=beta,
        seed=int(seed),
        params={"rho": float(rho), "delta": float(delta), "alpha_fc": float(alpha_fc)},
    )


def instance_to_json(inst):
    obj = {
        "n": inst.n,
        "r": inst.r,
        "rho": inst.params["rho"],
        "delta": inst.params["delta"],
        "alpha_fc": inst.params["alpha_fc"],
        "seed": inst.seed,
        "F": [float(v) for v in inst.F.ravel()],
        "d": [float(v) for v in inst.d],
        "b": [float(v) for v in inst.b],
        "a": [float(v) for v in inst.a],
        "beta": inst.beta,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def instance_from_json(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad instance JSON: {exc}") from None
    try:
        n, r = int(obj["n"]), int(obj["r"])
        F = np.array(obj["F"], dtype=float).reshape(n, r)
        inst = PortfolioInstance(
            n=n,
            r=r,
            F=F,
            d=np.array(obj["d"], dtype=float),
            b=np.array(obj["b"], dtype=float),
            a=np.array(obj["a"], dtype=float),
            beta=float(obj["beta"]),
            seed=int(obj["seed"]),
            params={
                "rho": float(obj["rho"]),
                "delta": float(obj["delta"]),
                "alpha_fc": float(obj["alpha_fc"]),
            },
        )
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad instance JSON: {exc}") from None
    return inst


def instance_feasible(inst):
    """Some support admits a feasible point iff a singleton does."""
    return float(np.max(inst.b - inst.a)) >= inst.beta + 1e-9


### exact reference over supports --------------------------------------------


def enumerate_supports(inst):
    """Supports whose feasible set is nonempty, as sorted index tuples.

    With e'y = 1, 0 <= y <= 1_S the best return is max_{i in S} b_i, so S is
    feasible iff max_{i in S} b_i >= beta + a(S).
    """
    n = inst.n
    if n > 20:
        raise CapacityError("support enumeration limited to n <= 20")
    masks = np.arange(1, 1 << n, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    cost = member @ inst.a
    best = np.where(member, inst.b[None, :], -np.inf).max(axis=1)
    keep = best >= inst.beta + cost - 1e-12
    out = []
    for m in masks[keep]:
        out.append(tuple(int(i) for i in range(n) if (m >> i) & 1))
    return out


def _qp_options(tol):
    return {
        "show_progress": False,
        "abstol": tol,
        "reltol": tol,
        "feastol": tol,
        "maxiters": 200,
    }


def _support_qp(Q, b_vec, target, tol):
    """min y'Qy over e'y=1, b'y >= target, y >= 0; returns value or None."""
    m = len(b_vec)
    P = cvxopt.matrix(2.0 * Q)
    q = cvxopt.matrix(np.zeros(m))
    G = cvxopt.matrix(np.vstack([-np.eye(m), -b_vec[None, :]]))
    h = cvxopt.matrix(np.concatenate([np.zeros(m), [-target]]))
    A = cvxopt.matrix(np.ones((1, m)))
    bb = cvxopt.matrix(np.ones(1))
    saved = dict(cvxopt.solvers.options)
    cvxopt.solvers.options.clear()
    cvxopt.solvers.options.update(_qp_options(tol))
    try:
        for ridge in (0.0, 1e-10, 1e-8):
            try:
                Pr = cvxopt.matrix(2.0 * (Q + ridge * np.eye(m)))
                sol = cvxopt.solvers.coneqp(Pr, q, G, h, A=A, b=bb)
            except (ValueError, ArithmeticError):
                continue
            if sol["status"] == "optimal":
                y = np.array(sol["x"]).ravel()
                return float(y @ Q @ y), y
        return None
    finally:
        cvxopt.solvers.options.clear()
        cvxopt.solvers.options.update(saved)


def compute_opt(inst, tol=1e-9):
    """Exact mixed-integer optimum by support enumeration + per-support QP.

    Falls back to the best feasible vertex of a support when the QP solver
    cannot certify it (which only happens when the support's feasible set
    has empty interior, i.e. is that single vertex).
    """
    supports = enumerate_supports(inst)
    if not supports:
        raise InputError("instance admits no feasible support")
    Q = inst.F @ inst.F.T + np.diag(inst.d * inst.d)
    best_val = np.inf
    best_support = None
    best_y = None
    for S in supports:
        idx = list(S)
        target = inst.beta + float(inst.a[idx].sum())
        bS = inst.b[idx]
        QS = Q[np.ix_(idx, idx)]
        vert = [QS[k, k] for k in range(len(idx)) if bS[k] >= target - 1e-12]
        res = _support_qp(QS, bS, target, tol)
        if res is not None:
            val, yS = res
        elif vert:
            k = int(np.argmin(vert))
            val = float(min(vert))
            yS = np.zeros(len(idx))
            yS[[k2 for k2 in range(len(idx)) if bS[k2] >= target - 1e-12][k]] = 1.0
        else:
            continue
        if val < best_val:
            best_val = val
            best_support = S
            y = np.zeros(inst.n)
            y[idx] = yS
            best_y = y
    if best_support is None:
        raise SolverError("no support could be certified")
    return best_val, best_support, best_y


### formulations --------------------------------------------------------------


def build_formulation(inst, method):
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}")
    n, r = inst.n, inst.r
    m = ConicModel()
    y = [m.add_var(0.0, np.inf, f"y{i}") for i in range(n)]
    x = [m.add_var(0.0, 1.0, f"x{i}", binary=True) for i in range(n)]
    one = m.add_var(1.0, 1.0, "one")
    q = [m.add_var(-np.inf, np.inf, f"q{j}") for j in range(r)]
    p = [m.add_var(0.0, np.inf, f"p{i}") for i in range(n)]

    for j in range(r):
        coeffs = {q[j]: 1.0}
        for i in range(n):
            if inst.F[i, j] != 0.0:
                coeffs[y[i]] = -inst.F[i, j]
        m.add_row(coeffs, "==", 0.0)
    m.add_row({y[i]: 1.0 for i in range(n)}, "==", 1.0)
    ret = {y[i]: inst.b[i] for i in range(n)}
    for i in range(n):
        ret[x[i]] = ret.get(x[i], 0.0) - inst.a[i]
    m.add_row(ret, ">=", inst.beta)
    for i in range(n):
        m.add_row({y[i]: 1.0, x[i]: -1.0}, "<=", 0.0)

    obj = {p[i]: inst.d[i] ** 2 for i in range(n)}
    layout = {"y": y, "x": x, "one": one, "q": q, "p": p}
    if method == "basic":
        s = m.add_var(0.0, np.inf, "s")
        m.add_rsoc(s, one, q)
        for i in range(n):
            m.add_rsoc(p[i], one, (y[i],))
        obj[s] = 1.0
        layout["s"] = s
    elif method == "persp":
        s = m.add_var(0.0, np.inf, "s")
        m.add_rsoc(s, one, q)
        for i in range(n):
            m.add_rsoc(p[i], x[i], (y[i],))
        obj[s] = 1.0
        layout["s"] = s
    else:
        t = [m.add_var(0.0, np.inf, f"t{j}") for j in range(r)]
        for j in range(r):
            m.add_rsoc(t[j], one, (q[j],))
            obj[t[j]] = 1.0
        for i in range(n):
            m.add_rsoc(p[i], x[i], (y[i],))
        layout["t"] = t
        layout["rank_rows"] = [
            RankOneRow(f=inst.F[:, j], y_vars=y, x_vars=x, t_var=t[j]) for j in range(r)
        ]
    m.set_objective(obj, 0.0)
    m.layout = layout
    return m


### cut loop -------------------------------------------------------------------


def _separate_row(prim, row):
    """Run separation on one rank-one row at the relaxation point."""
    f = row.f
    supp = np.flatnonzero(f != 0.0)
    if len(supp) == 0:
        return None, 0.0, 0.0
    xs = np.clip(np.array([prim[row.x_vars[i]] for i in supp]), 0.0, 1.0)
    ys = np.abs(f[supp]) * np.maximum(
        np.array([prim[row.y_vars[i]] for i in supp]), 0.0
    )
    tbar = max(float(prim[row.t_var]), 0.0)
    plus = tuple(k for k in range(len(supp)) if f[supp[k]] > 0.0)
    minus = tuple(k for k in range(len(supp)) if f[supp[k]] < 0.0)
    p = Partition(len(supp), plus, minus)
    result = separate(FractionalPoint(xs, ys, tbar), p)
    cut = result.cut
    if cut is not None:
        cut = LiftedCut(
            sign=cut.sign,
            L=tuple(int(supp[k]) for k in cut.L),
            R=tuple(int(supp[k]) for k in cut.R),
            U=tuple(int(supp[k]) for k in cut.U),
        )
    return cut, result.rhs_value, tbar


def cut_loop(model, inst, max_rounds=50, tol=1e-7, eps=1e-3):
    """Solve-separate-add loop on the supermodular formulation.

    Returns (model, history, cuts_added) where history holds the relaxation
    value after each solve (index 0 is the cut-free value).  At most r cuts
    per round and 3r in total; a row's cut is added when its epigraph value
    tbar is violated by the relative epsilon rule.
    """
    rows = getattr(model, "layout", {}).get("rank_rows")
    if rows is None:
        raise InputError("cut_loop needs a supermodular formulation")
    budget = 3 * inst.r
    history = []
    seen = set()
    cuts_added = 0
    for round_idx in range(max_rounds + 1):
        res = solve_relaxation(model, tol)
        if res.status != OPTIMAL:
            raise SolverError(f"round {round_idx}: relaxation returned {res.status}")
        history.append(res.objective)
        if cuts_added >= budget or round_idx == max_rounds:
            break
        added = 0
        for j, row in enumerate(rows):
            if cuts_added >= budget:
                break
            cut, nu, tbar = _separate_row(res.primal, row)
            if cut is None:
                continue
            gain = nu - tbar
            if not ((tbar < eps and gain > eps) or (tbar >= eps and gain / tbar > eps)):
                continue
            key = (j, cut.sign.value, cut.L, cut.R, cut.U)
            if key in seen:
                continue
            seen.add(key)
            emit_extended_cut(cut, row, model)
            added += 1
            cuts_added += 1
        if added == 0:
            break
    return model, history, cuts_added


### reporting ------------------------------------------------------------------


@dataclass
class ExperimentRow:
    method: str
    val: float
    gap_pct: float
    imp_pct: float | None
    time_s: float
    cuts: int


def run_instance(inst, tol=1e-7, max_rounds=50):
    """Run the three formulations; returns (opt, raw per-method results)."""
    opt, _, _ = compute_opt(inst)
    raw = []
    for method in METHODS:
        t0 = time.perf_counter()
        model = build_formulation(inst, method)
        if method == "super":
            _, history, cuts = cut_loop(model, inst, max_rounds=max_rounds, tol=tol)
            val = history[-1]
        else:
            res = solve_relaxation(model, tol)
            if res.status != OPTIMAL:
                raise SolverError(f"{method}: relaxation returned {res.status}")
            val = res.objective
            cuts = 0
        raw.append((method, val, time.perf_counter() - t0, cuts))
    return opt, raw


def make_rows(opt, raw):
    gaps = {}
    for method, val, _, _ in raw:
        gaps[method] = (opt - val) / abs(opt) * 100.0 if opt != 0 else 0.0
    rows = []
    for method, val, secs, cuts in raw:
        imp = None
        if method == "super" and gaps["persp"] > 0:
            imp = (gaps["persp"] - gaps["super"]) / gaps["persp"] * 100.0
        rows.append(
            ExperimentRow(
                method=METHOD_LABELS[method],
                val=100.0 * val / opt if opt != 0 else val,
                gap_pct=gaps[method],
                imp_pct=imp,
                time_s=secs,
                cuts=cuts,
            )
        )
    return rows


def report(inst, opt, rows):
    """CSV text; values scaled so that opt maps to 100 (when opt != 0)."""
    out = ["method,val,gap_pct,imp_pct,time_s,cuts"]
    for row in rows:
        imp = "" if row.imp_pct is None else f"{row.imp_pct:.2f}"
        out.append(
            f"{row.method},{row.val:.4f},{row.gap_pct:.4f},{imp},{row.time_s:.3f},{row.cuts}"
        )
    return "\n".join(out) + "\n"


### batch ----------------------------------------------------------------------

BATCH_HEADER = "n,r,rho,delta,alpha_fc,seed,method,val,gap_pct,imp_pct,time_s,cuts"


def _batch_worker(spec):
    n, r, rho, delta, alpha_fc, seed, tol, max_rounds = spec
    inst = generate_instance(n, r, rho, delta, alpha_fc, seed)
    if not instance_feasible(inst):
        return []
    opt, raw = run_instance(inst, tol=tol, max_rounds=max_rounds)
    lines = []
    for row in make_rows(opt, raw):
        imp = "" if row.imp_pct is None else f"{row.imp_pct:.2f}"
        lines.append(
            f"{n},{r},{rho},{delta},{alpha_fc},{seed},{row.method},"
            f"{row.val:.4f},{row.gap_pct:.4f},{imp},{row.time_s:.3f},{row.cuts}"
        )
    return lines


def run_batch(config, jobs=1):
    """Cartesian product over r/rho/alpha_fc/seeds; returns combined CSV.

    Config keys: n, delta, and lists r, rho, alpha_fc, seeds (scalars are
    promoted); optional tol, max_rounds.  Infeasible instances are skipped.
    """

    def as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    try:
        n = int(config["n"])
        delta = float(config.get("delta", 0.01))
        rs = [int(v) for v in as_list(config["r"])]
        rhos = [float(v) for v in as_list(config["rho"])]
        alphas = [float(v) for v in as_list(config["alpha_fc"])]
        seeds = [int(v) for v in as_list(config["seeds"])]
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad batch config: {exc}") from None
    tol = float(config.get("tol", 1e-7))
    max_rounds = int(config.get("max_rounds", 50))
    specs = [
        (n, r, rho, delta, alpha, seed, tol, max_rounds)
        for r, rho, alpha, seed in itertools.product(rs, rhos, alphas, seeds)
    ]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            chunks = pool.map(_batch_worker, specs)
    else:
        chunks = [_batch_worker(s) for s in specs]
    lines = [BATCH_HEADER]
    for chunk in chunks:
        lines.extend(chunk)
    return "\n".join(lines) + "\n"
