"""``riccati`` command-line front end."""

import argparse
import json
import statistics
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import __version__, _accel, bounds, floquet, oracle
from . import spectral as sp
from .errors import ModelError, NumericalError, RiccatiError
from .model import check_initial_condition, load_model, require_q, validate
from .randmodels import default_seed, model_sweep, random_model, random_psd
from .reports import dumps
from .steady_state import steady_state
from .verify import run_suite

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_SUITE = 4


class _Timer:
    def __init__(self):
        self.stages = {}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0


def parse_grid(text):
    """``"0,0.5,1"`` or ``"start:step:end"`` (end inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, end = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ModelError("grid step must be positive")
            n = int(np.floor((end - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(n)
        else:
            grid = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ModelError(f"bad grid {text!r}: {exc}") from exc
    if grid.size == 0:
        raise ModelError("empty grid")
    if np.any(np.diff(grid) < 0):
        raise ModelError("grid must be sorted")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ModelError("grid times must be finite and nonnegative")
    return grid


def _load_matrix(path, dim):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("Q")
    if doc is None:
        raise ModelError(f"{path}: no matrix found")
    return check_initial_condition(np.array(doc, dtype=float), dim)


def _config(args):
    return oracle.IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def _report(args, command, model=None, Q=None):
    rep = {"command": command, "outputs": {}, "checks": {"passed": 0, "failed": 0}, "timings": {}}
    if model is not None:
        rep["model_fingerprint"] = model.fingerprint(Q)
        rep["dim"] = model.dim
    return rep


def _load_validated(args, timer):
    with timer.stage("load"):
        model, Q = load_model(args.model)
    with timer.stage("validate"):
        vr = validate(model, args.sym_tol, args.psd_tol)
    if not vr.passed:
        names = ", ".join(c.name for c in vr.failures())
        err = ModelError(f"validation failed: {names}")
        err.validation = vr.to_dict()
        raise err
    if Q is not None:
        Q = check_initial_condition(Q, model.dim, args.sym_tol, args.psd_tol)
    return model, Q, vr


def _solve(args, timer, model):
    with timer.stage("steady_state"):
        return steady_state(model, args.care_tol, args.lyap_tol)


def cmd_solve(args, timer):
    model, Q, vr = _load_validated(args, timer)
    st = _solve(args, timer, model)
    rep = _report(args, "solve", model, Q)
    res = st.residuals()
    rep["outputs"] = {
        "P_inf": st.P_inf, "P_inf_minus": st.P_inf_minus, "B": st.B, "S_inf": st.S_inf,
        "residuals": res, "validation": vr.to_dict(),
    }
    scale = sp.spectral_norm(model.R)
    ok = [res["care"] <= args.care_tol * scale, res["care_minus"] <= args.care_tol * scale,
          res["spectral_abscissa_B"] < 0, res["lambda_max_P_inf_minus"] < 0,
          res["lambda_min_Sinv_minus_P"] > 0]
    rep["checks"] = {"passed": sum(ok), "failed": len(ok) - sum(ok)}
    return rep, EXIT_OK


def cmd_flow(args, timer):
    model, Q, _ = _load_validated(args, timer)
    Q = require_q(Q)
    grid = parse_grid(args.t)
    rep = _report(args, "flow", model, Q)
    out = rep["outputs"]
    out["grid"] = grid
    closed = orc = None
    if args.method in ("closed", "both"):
        st = _solve(args, timer, model)
        with timer.stage("closed_form"):
            closed = floquet.trajectory(st, Q, grid, with_transition=True)
        out["closed"] = {"phi": closed.values, "E": closed.transitions}
    if args.method in ("oracle", "both"):
        with timer.stage("oracle"):
            orc = oracle.integrate_riccati(model, Q, grid, _config(args), with_transition=True)
        out["oracle"] = {"phi": orc.values, "E": orc.transitions}
    if closed is not None and orc is not None:
        d_phi = max(sp.spectral_norm(a - b) for a, b in zip(closed.values, orc.values))
        d_E = max(sp.spectral_norm(a - b) for a, b in zip(closed.transitions, orc.transitions))
        out["max_discrepancy"] = {"phi": d_phi, "E": d_E}
    return rep, EXIT_OK


def cmd_semigroup(args, timer):
    model, Q, _ = _load_validated(args, timer)
    Q = require_q(Q)
    if args.s > args.t:
        raise ModelError(f"need s <= t, got s={args.s}, t={args.t}")
    st = _solve(args, timer, model)
    rep = _report(args, "semigroup", model, Q)
    with timer.stage("closed_form"):
        phi_s = floquet.flow(st, Q, args.s)
        f = floquet.c_matrix(st, phi_s, args.t - args.s)
    rep["outputs"] = {
        "s": args.s, "t": args.t, "E": f.E, "norm_E": sp.spectral_norm(f.E),
        "phi_s": phi_s, "exp_tB": f.exp_tB, "C": f.C, "C_inv": f.C_inv, "cond_C": f.cond_C,
        "norm_exp_tB": sp.spectral_norm(f.exp_tB),
    }
    return rep, EXIT_OK


def cmd_bounds(args, timer):
    model, Q, _ = _load_validated(args, timer)
    Q = require_q(Q)
    Q2 = _load_matrix(args.q2, model.dim) if args.q2 else None
    grid = parse_grid(args.t)
    st = _solve(args, timer, model)
    rep = _report(args, "bounds", model, Q)
    with timer.stage("envelopes"):
        br = bounds.verify_envelopes(st, Q, grid, args.delta, Q2=Q2, gamma=args.gamma,
                                     check_tol=args.check_tol)
    rep["outputs"] = {"bounds": br.to_dict(), "summary": br.summary()}
    failed = len(br.failures())
    rep["checks"] = {"passed": len(br.envelope_checks) - failed, "failed": failed}
    return rep, EXIT_OK if failed == 0 else EXIT_SUITE


def _verify_cases(args):
    if args.random:
        r, n, seed = args.random
        rng = np.random.default_rng(seed + 1)
        cases = []
        for model, Q in model_sweep(seed, n, [r]):
            Q2 = random_psd(rng, r)
            H = rng.standard_normal((r, r))
            cases.append((model, Q, Q2, (H + H.T) / 2))
        return cases
    if not args.model:
        raise ModelError("verify needs a model file or --random R N SEED")
    model, Q = load_model(args.model)
    vr = validate(model, args.sym_tol, args.psd_tol)
    if not vr.passed:
        raise ModelError("validation failed: " + ", ".join(c.name for c in vr.failures()))
    rng = np.random.default_rng(args.seed)
    r = model.dim
    Q = random_psd(rng, r) if Q is None else check_initial_condition(Q, r)
    H = rng.standard_normal((r, r))
    return [(model, Q, random_psd(rng, r), (H + H.T) / 2)]


def cmd_verify(args, timer):
    with timer.stage("setup"):
        cases = _verify_cases(args)
    with timer.stage("suite"):
        results = run_suite(cases, workers=args.workers, delta=args.delta, config=_config(args),
                            implicit=not args.no_implicit)
    rep = _report(args, "verify")
    if args.random:
        rep["random"] = {"dim": args.random[0], "n": args.random[1], "seed": args.random[2]}
    else:
        rep["model_fingerprint"] = cases[0][0].fingerprint(cases[0][1])
    failing = {}
    for res in results:
        for name, ok in res.passed.items():
            if not ok:
                failing[name] = failing.get(name, 0) + 1
        if res.error:
            failing["error"] = failing.get("error", 0) + 1
    rep["outputs"] = {
        "cases": [
            {"index": r.index, "dim": r.dim, "ok": r.ok, "error": r.error,
             "passed": r.passed, "metrics": r.metrics}
            for r in results
        ],
        "failing_checks": failing,
    }
    n_ok = sum(r.ok for r in results)
    rep["checks"] = {"passed": n_ok, "failed": len(results) - n_ok}
    return rep, EXIT_OK if n_ok == len(results) else EXIT_SUITE


def bench_one(r, n_points, repeats, seed, config, t_max=10.0):
    rng = np.random.default_rng(seed)
    model = random_model(rng, r)
    Q = random_psd(rng, r)
    grid = np.linspace(t_max / n_points, t_max, n_points)

    def closed():
        st = steady_state(model)
        floquet.trajectory(st, Q, grid, with_transition=True)

    def orc():
        oracle.integrate_riccati(model, Q, grid, config, with_transition=True)

    orc()  # triggers compilation outside the timed runs
    timings = {}
    for name, fn in (("closed_form", closed), ("oracle", orc)):
        runs = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            runs.append(time.perf_counter() - t0)
        timings[name] = statistics.median(runs)
    return {
        "r": r, "t_points": n_points, "repeats": repeats,
        "median_closed_form_s": timings["closed_form"],
        "median_oracle_s": timings["oracle"],
        "speedup": timings["oracle"] / timings["closed_form"],
        "closed_form_faster": timings["closed_form"] < timings["oracle"],
    }


def cmd_bench(args, timer):
    dims = [int(x) for x in args.r.split(",")]
    rep = _report(args, "bench")
    rows = []
    with timer.stage("bench"):
        for r in dims:
            rows.append(bench_one(r, args.t_points, args.repeats, args.seed, _config(args)))
    rep["outputs"] = {"rows": rows, "numba": _accel.numba_enabled(), "rel_tol": args.rel_tol}
    ok = sum(row["closed_form_faster"] for row in rows)
    rep["checks"] = {"passed": ok, "failed": len(rows) - ok}
    return rep, EXIT_OK


COMMANDS = {
    "solve": cmd_solve, "flow": cmd_flow, "semigroup": cmd_semigroup,
    "bounds": cmd_bounds, "verify": cmd_verify, "bench": cmd_bench,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="indent JSON output")
    common.add_argument("--seed", type=int, default=default_seed())
    common.add_argument("--care-tol", type=float, default=1e-9)
    common.add_argument("--lyap-tol", type=float, default=1e-9)
    common.add_argument("--sym-tol", type=float, default=sp.SYM_TOL)
    common.add_argument("--psd-tol", type=float, default=sp.PSD_TOL)
    common.add_argument("--rel-tol", type=float, default=oracle.DEFAULT_CONFIG.rel_tol)
    common.add_argument("--abs-tol", type=float, default=oracle.DEFAULT_CONFIG.abs_tol)
    common.add_argument("--check-tol", type=float, default=bounds.CHECK_TOL)

    parser = argparse.ArgumentParser(prog="riccati", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="steady state and residuals")
    p.add_argument("model")

    p = sub.add_parser("flow", parents=[common], help="Riccati flow on a time grid")
    p.add_argument("model")
    p.add_argument("--t", required=True, help="comma list or start:step:end")
    p.add_argument("--method", choices=("closed", "oracle", "both"), default="closed")

    p = sub.add_parser("semigroup", parents=[common], help="transition matrix E_{s,t}(Q)")
    p.add_argument("model")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t", type=float, required=True)

    p = sub.add_parser("bounds", parents=[common], help="contraction constants and envelopes")
    p.add_argument("model")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--t", default="0.01,0.02,0.04,0.08,0.16,0.32,0.64,1.28,2.56,5.12,10.24")
    p.add_argument("--q2", help="JSON file with a second initial condition")

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("model", nargs="?")
    p.add_argument("--random", nargs=3, type=int, metavar=("R", "N", "SEED"))
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-implicit", action="store_true", help="skip the quadrature identity check")

    p = sub.add_parser("bench", parents=[common], help="closed form vs. oracle wall clock")
    p.add_argument("--r", default="10,50", help="comma list of dimensions")
    p.add_argument("--t-points", type=int, default=100)
    p.add_argument("--repeats", type=int, default=5)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    timer = _Timer()
    try:
        rep, code = COMMANDS[args.command](args, timer)
    except ModelError as exc:
        rep = {"command": args.command, "error": str(exc), "exit_code": EXIT_INPUT}
        if hasattr(exc, "validation"):
            rep["validation"] = exc.validation
        code = EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        rep = {"command": args.command, "error": str(exc), "exit_code": EXIT_NUMERIC}
        code = EXIT_NUMERIC
    except RiccatiError as exc:  # pragma: no cover
        rep = {"command": args.command, "error": str(exc)}
        code = exc.exit_code
    rep["timings"] = timer.stages
    text = dumps(rep, args.pretty)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
