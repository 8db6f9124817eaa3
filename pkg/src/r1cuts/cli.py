"""Command-line surface.

Subcommands: generate, build, solve, separate, cuts, experiment,
oracle-check, export.  Every run echoes its resolved configuration as the
first stdout line, prefixed ``#config``, so any output can be reproduced
from the file alone.  No output is colorized (NO_COLOR is therefore
honored trivially).  All randomness is seeded through flags.

Exit codes: 0 ok, 1 usage, 2 input error, 3 solver error, 4 oracle
violation.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import (
    FractionalPoint,
    InputError,
    OracleError,
    Partition,
    SolverError,
)
from . import experiments, hull, lifted, solver
from .conic import export_model, import_model


### helpers ------------------------------------------------------------------


def _echo_config(args):
    skip = {"func", "command"}
    items = sorted((k, v) for k, v in vars(args).items() if k not in skip)
    line = " ".join(f"{k}={v}" for k, v in items)
    print(f"#config {args.command} {line}".rstrip())


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _parse_partition(spec, n):
    signs = [c for c in spec.replace(",", "") if not c.isspace()]
    if len(signs) != n or any(c not in "+-" for c in signs):
        raise InputError(f"partition spec {spec!r} must give +/- for each of {n} indices")
    plus = tuple(i for i, c in enumerate(signs) if c == "+")
    minus = tuple(i for i, c in enumerate(signs) if c == "-")
    return Partition(n, plus, minus)


### subcommands --------------------------------------------------------------


def _cmd_generate(args):
    inst = experiments.generate_instance(
        args.n, args.r, args.rho, args.delta, args.alpha, args.seed
    )
    _write(args.output, experiments.instance_to_json(inst))
    print(f"wrote instance n={inst.n} r={inst.r} to {args.output}")
    return 0


def _cmd_build(args):
    inst = experiments.instance_from_json(_read(args.input))
    model = experiments.build_formulation(inst, args.method)
    _write(args.output, export_model(model))
    print(
        f"wrote {args.method} model: {model.num_vars} vars, "
        f"{len(model.linear_rows)} rows, {len(model.rsoc_blocks)} cones"
    )
    return 0


def _cmd_solve(args):
    model = import_model(_read(args.input))
    res = solver.solve_relaxation(model, tol=args.tol)
    print(f"status={res.status}")
    print(f"objective={res.objective:.17g}")
    for k, v in res.kkt_residuals.items():
        print(f"{k}={v:.3g}")
    if args.output:
        _write(args.output, solver.solution_text(model, res))
    if res.status == solver.ITERATION_LIMIT:
        raise SolverError("relaxation hit the iteration limit")
    return 0


def _cmd_separate(args):
    try:
        obj = json.loads(_read(args.input))
        x = np.array(obj["x"], dtype=float)
        y = np.array(obj["y"], dtype=float)
        t = float(obj["t"])
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InputError(f"bad point JSON: {exc}") from None
    p = _parse_partition(args.partition, len(x))
    result = lifted.separate(FractionalPoint(x, y, t), p)
    out = {
        "rhs_value": result.rhs_value,
        "violated": bool(result.violated),
        "base_only": bool(result.base_only),
        "cut": None,
    }
    if result.cut is not None:
        out["cut"] = {
            "sign": result.cut.sign.value,
            "L": list(result.cut.L),
            "R": list(result.cut.R),
            "U": list(result.cut.U),
        }
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_cuts(args):
    inst = experiments.instance_from_json(_read(args.input))
    model = experiments.build_formulation(inst, "super")
    _, history, cuts = experiments.cut_loop(
        model, inst, max_rounds=args.max_rounds, tol=args.tol
    )
    print("round,value")
    for k, v in enumerate(history):
        print(f"{k},{v:.10g}")
    print(f"cuts_added={cuts}")
    return 0


def _cmd_experiment(args):
    try:
        config = json.loads(_read(args.batch))
    except json.JSONDecodeError as exc:
        raise InputError(f"bad batch config: {exc}") from None
    csv_text = experiments.run_batch(config, jobs=args.jobs)
    _write(args.output, csv_text)
    nrows = csv_text.count("\n") - 1
    print(f"wrote {nrows} result rows to {args.output}")
    return 0


def _cmd_oracle_check(args):
    rng = np.random.default_rng(args.seed)
    if args.suite == "hull":
        worst = _suite_hull(rng, args.n, args.trials)
    elif args.suite == "duality":
        worst = _suite_duality(rng, args.n, args.trials)
    else:
        worst = _suite_validity(rng, args.n, args.trials)
    print(f"suite={args.suite} trials={args.trials} max_deviation={worst:.3e}")
    return 0


def _cmd_export(args):
    text = _read(args.input)
    if args.input.endswith(".cqm"):
        model = import_model(text)
        obj = {
            "vars": model.var_names,
            "lb": list(model.var_lb),
            "ub": list(model.var_ub),
            "binaries": sorted(model.binaries),
            "objective": {"const": model.obj_const, "coeffs": model.obj},
            "rows": [
                {"coeffs": r.coeffs, "sense": r.sense, "rhs": r.rhs}
                for r in model.linear_rows
            ],
            "rsoc": [{"u": u, "v": v, "w": list(w)} for u, v, w in model.rsoc_blocks],
        }
        _write(args.output, json.dumps(obj, sort_keys=True, default=str) + "\n")
        print(f"wrote model JSON to {args.output}")
    else:
        inst = experiments.instance_from_json(text)
        model = experiments.build_formulation(inst, args.method)
        _write(args.output, export_model(model))
        print(f"wrote {args.method} model to {args.output}")
    return 0


### oracle suites -------------------------------------------------------------


def _suite_hull(rng, n, trials):
    if n > 8:
        raise InputError("hull suite needs n <= 8")
    worst = 0.0
    for trial in range(trials):
        signs = rng.random(n) < 0.5
        if not signs.any():
            signs[0] = True
        plus = tuple(int(i) for i in np.flatnonzero(signs))
        minus = tuple(int(i) for i in np.flatnonzero(~signs))
        p = Partition(n, plus, minus)
        x = rng.uniform(0.05, 1.0, n)
        y = rng.uniform(0.0, 1.0, n) * x
        res = lifted.separate(FractionalPoint(x, y, 0.0), p)
        ora = lifted.hull_value_oracle(x, y, p)
        scale = max(1.0, abs(ora))
        dev = abs(res.rhs_value - ora) / scale
        worst = max(worst, dev)
        if dev > 1e-3:
            raise OracleError(
                f"hull trial {trial}: closed form {res.rhs_value:.9g} vs oracle "
                f"{ora:.9g} (rel dev {dev:.2e})"
            )
    return worst


def _suite_duality(rng, n, trials):
    worst = 0.0
    for trial in range(trials):
        m = int(rng.integers(1, n + 1))
        x = rng.uniform(0.0, 1.0, m)
        alpha = np.sort(rng.uniform(0.0, 2.0, m))
        rep = hull.verify_strong_duality(x, alpha)
        if rep.cs_violations:
            raise OracleError(
                f"duality trial {trial}: complementary slackness violated "
                f"on {rep.cs_violations[:3]}"
            )
        facets = hull.sorted_facets(alpha, Partition.all_plus(m))
        fmax = max(f.eval_at(x) for f in facets)
        dev = max(abs(rep.primal_obj - rep.dual_obj), abs(rep.primal_obj - fmax))
        worst = max(worst, dev)
        if dev > 1e-8:
            raise OracleError(
                f"duality trial {trial}: primal {rep.primal_obj:.12g}, "
                f"dual {rep.dual_obj:.12g}, facet max {fmax:.12g}"
            )
    return worst


def _suite_validity(rng, n, trials):
    if n > 10:
        raise InputError("validity suite needs n <= 10")
    worst = 0.0
    for trial in range(trials):
        m = int(rng.integers(1, n + 1))
        signs = rng.random(m) < 0.5
        if not signs.any():
            signs[rng.integers(0, m)] = True
        plus = tuple(int(i) for i in np.flatnonzero(signs))
        minus = tuple(int(i) for i in np.flatnonzero(~signs))
        p = Partition(m, plus, minus)
        side = plus if rng.random() < 0.5 or not minus else minus
        sign = lifted.Sign.PLUS if side == plus else lifted.Sign.MINUS
        labels = rng.integers(0, 3, len(side))
        L = tuple(side[k] for k in range(len(side)) if labels[k] == 0)
        R = tuple(side[k] for k in range(len(side)) if labels[k] == 1)
        U = tuple(side[k] for k in range(len(side)) if labels[k] == 2)
        other = minus if sign is lifted.Sign.PLUS else plus
        if other and not U:
            continue
        cut = lifted.LiftedCut(sign=sign, L=L, R=R, U=U)
        # random convex combination of integer-feasible points
        k = int(rng.integers(2, 6))
        w = rng.dirichlet(np.ones(k))
        xs = np.zeros(m)
        ys = np.zeros(m)
        ts = 0.0
        for j in range(k):
            xi = (rng.random(m) < 0.6).astype(float)
            yi = rng.uniform(0.0, 1.0, m) * xi
            ti = (yi[list(plus)].sum() - yi[list(minus)].sum()) ** 2
            xs += w[j] * xi
            ys += w[j] * yi
            ts += w[j] * ti
        rhs = lifted.eval_lifted_rhs(xs, ys, cut, p)
        dev = rhs - ts
        worst = max(worst, dev)
        if dev > 1e-6:
            raise OracleError(
                f"validity trial {trial}: cut value {rhs:.9g} exceeds hull point "
                f"t {ts:.9g}"
            )
    return max(worst, 0.0)


### parser --------------------------------------------------------------------


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="r1cuts",
        description="Lifted supermodular cuts for rank-one quadratics with indicators.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a portfolio instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--rho", type=float, default=0.0)
    g.add_argument("--delta", type=float, default=0.01)
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_generate)

    b = sub.add_parser("build", help="build a formulation model from an instance")
    b.add_argument("--method", choices=experiments.METHODS, required=True)
    b.add_argument("-i", "--input", required=True)
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=_cmd_build)

    s = sub.add_parser("solve", help="solve the continuous relaxation of a .cqm model")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("-o", "--output", default=None, help="solution file (name=value)")
    s.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("separate", help="separate a lifted cut at a point")
    sp.add_argument("-i", "--input", required=True, help="point JSON {x, y, t}")
    sp.add_argument("--partition", required=True, help="sign per index, e.g. ++-")
    sp.set_defaults(func=_cmd_separate)

    cu = sub.add_parser("cuts", help="run the cut loop on an instance")
    cu.add_argument("-i", "--input", required=True)
    cu.add_argument("--tol", type=float, default=1e-7)
    cu.add_argument("--max-rounds", type=int, default=50)
    cu.set_defaults(func=_cmd_cuts)

    e = sub.add_parser("experiment", help="run a batch of instances")
    e.add_argument("--batch", required=True, help="batch config JSON")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=_cmd_experiment)

    oc = sub.add_parser("oracle-check", help="run an independent-oracle suite")
    oc.add_argument("--suite", choices=("hull", "duality", "validity"), required=True)
    oc.add_argument("--n", type=int, default=4)
    oc.add_argument("--trials", type=int, default=100)
    oc.add_argument("--seed", type=int, default=0)
    oc.set_defaults(func=_cmd_oracle_check)

    ex = sub.add_parser("export", help="convert instance JSON <-> .cqm model")
    ex.add_argument("-i", "--input", required=True)
    ex.add_argument("-o", "--output", required=True)
    ex.add_argument("--method", choices=experiments.METHODS, default="super")
    ex.set_defaults(func=_cmd_export)
    return ap


def run(argv):
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        _echo_config(args)
        return args.func(args)
    except OracleError as exc:
        print(f"oracle violation: {exc}", file=sys.stderr)
        return 4
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    entry()
