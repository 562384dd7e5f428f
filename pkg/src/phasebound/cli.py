"""Command-line driver.

Every run writes a provenance header (tool version, resolved configuration,
seed) followed by data rows, as CSV (``#`` comment header) or JSON.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .continuum import (
    ContinuumFunction,
    dirichlet_ground_state,
    extend_by_zero,
    gaussian_profile,
    p2_expectation,
    q2_expectation,
    scaling_convergence,
    sine_profile,
    uncertainty_check,
)
from .fisher import lub_bound, sld_fisher
from .mse import covariant_mse, kernel, quadrature_mse_oracle
from .optimize import (
    Constraint,
    OptimizationError,
    noon_divergence_sweep,
    noon_local_minimax_lower,
    optimize_avg_constraint,
    optimize_max_constraint,
)
from .simulate import SamplingError, empirical_mse, noon_plateau_demo, sample_outcomes, two_step_demo
from .states import (
    StateVector,
    build_coherent_noon,
    build_gaussian,
    build_noon,
    build_sine,
    metrics,
    vacuum,
)

THREADS_ENV = "PHASEBOUND_THREADS"


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_state_args(p):
    p.add_argument("--state", choices=["vacuum", "noon", "sine", "gaussian", "coherent"], default=None)
    p.add_argument("--state-file", default=None, help="JSON file {lo, hi, amplitudes: [[re, im], ...]}")
    p.add_argument("--n", type=int, default=None, help="photon number for noon")
    p.add_argument("--E", type=float, default=None, help="photon budget for sine/gaussian")
    p.add_argument("--alpha", type=float, default=None, help="coherent amplitude")
    p.add_argument("--emit-state", default=None, help="write the state as JSON to this path")


def _load_state(args) -> StateVector:
    if args.state_file:
        with open(args.state_file) as fh:
            data = json.load(fh)
        return StateVector.from_dict(data.get("state", data))
    kind = args.state
    if kind is None:
        raise UsageError("give --state or --state-file")
    if kind == "vacuum":
        return vacuum()
    if kind == "noon":
        if args.n is None:
            raise UsageError("noon needs --n")
        return build_noon(args.n)
    if kind == "sine":
        if args.E is None or args.E != int(args.E):
            raise UsageError("sine needs an integer --E")
        return build_sine(int(args.E))
    if kind == "gaussian":
        if args.E is None:
            raise UsageError("gaussian needs --E")
        return build_gaussian(args.E)
    if args.alpha is None:
        raise UsageError("coherent needs --alpha")
    return build_coherent_noon(args.alpha)


def _maybe_emit(args, state: StateVector):
    if getattr(args, "emit_state", None):
        with open(args.emit_state, "w") as fh:
            json.dump(state.to_dict(), fh)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def cmd_kernel(args):
    if args.max_lag < 0:
        raise UsageError("--max-lag must be nonnegative")
    k = kernel(args.max_lag)
    return [{"k": i, "theta_k": float(v)} for i, v in enumerate(k.entries)], {}


def cmd_mse(args):
    state = _load_state(args)
    _maybe_emit(args, state)
    m = metrics(state)
    row = {"mse": covariant_mse(state), "n2_avg": m.n2_avg, "n_max": m.n_max, "n_mean": m.n_mean}
    if args.oracle:
        row["quadrature"] = quadrature_mse_oracle(state, max(4096, 8 * (m.n_max + 1)))
    return [row], {"state": state.to_dict()} if args.format == "json" else {}


def cmd_fisher(args):
    state = _load_state(args)
    _maybe_emit(args, state)
    m = metrics(state)
    f = sld_fisher(state)
    row = {"j": f.j, "cr_bound": f.cr_bound, "four_n2_avg": 4 * m.n2_avg, "n_max": m.n_max}
    if m.n_max >= 1:
        row["lub_bound_max"] = lub_bound(Constraint.max_photon(m.n_max))
    return [row], {}


def _optimize_row(kind, E, trunc_factor):
    if kind == "max":
        if E != int(E):
            raise UsageError("--constraint max needs integer E")
        res = optimize_max_constraint(int(E))
    else:
        res = optimize_avg_constraint(E, truncation=int(math.ceil(trunc_factor * E)))
    return {
        "E": E,
        "C": res.value,
        "E2C": E * E * res.value,
        "residual": res.residual,
        "multiplier": res.multiplier if res.multiplier is not None else float("nan"),
        "constraint_value": res.constraint_value,
        "lub_bound": lub_bound(Constraint.avg_square(E)) if E >= 1 else float("nan"),
    }, res


def cmd_optimize(args):
    row, res = _optimize_row(args.constraint, args.E, args.trunc_factor)
    _maybe_emit(args, res.state)
    return [row], {}


def cmd_sweep(args):
    if args.noon:
        if not args.n:
            raise UsageError("sweep --noon needs --n")
        _check_ascending(args.n)
        rows = noon_divergence_sweep(args.n)
        return rows, {"plot": ("n", "n2C")}
    if args.bound is None or not args.E:
        raise UsageError("sweep needs --bound and --E (or --noon --n)")
    _check_ascending(args.E)
    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        rows = list(pool.map(lambda E: _optimize_row(args.bound, E, args.trunc_factor)[0], args.E))
    limit = math.pi**2 / 4 if args.bound == "max" else 0.25
    for r in rows:
        r["limit"] = limit
        r["rel_gap"] = abs(r["E2C"] - limit) / limit
    return rows, {"plot": ("E", "E2C")}


def _check_ascending(vals):
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise UsageError("list must be strictly ascending")


def cmd_noon(args):
    if args.n < 1 or not 0 < args.eps <= math.pi:
        raise UsageError("need n >= 1 and 0 < eps <= pi")
    c = noon_divergence_sweep([args.n])[0]
    return [
        {
            "n": args.n,
            "eps": args.eps,
            "lower_bound": noon_local_minimax_lower(args.n, args.eps),
            "C": c["C"],
            "n2C": c["n2C"],
            "lub_bound": 1 / (4 * args.n**2),
        }
    ], {}


def cmd_continuum(args):
    if args.profile == "dirichlet":
        ev, f = dirichlet_ground_state(args.M)
        unc = uncertainty_check(extend_by_zero(f, -12, 12))
        row = {"profile": "dirichlet", "M": args.M, "eigenvalue": ev, "limit": math.pi**2 / 4,
               "q2": q2_expectation(f), "p2": p2_expectation(f), "uncertainty_product": unc.product}
        return [row], {}
    if args.profile == "gaussian":
        f = ContinuumFunction.from_callable(gaussian_profile, -12, 12, args.M)
        ref = 0.25
    else:
        f = ContinuumFunction.from_callable(sine_profile, -1, 1, args.M)
        ref = math.pi**2 / 4
    rows = []
    if args.E:
        table = scaling_convergence(f, args.E)
        for r in table.rows:
            rows.append({"profile": args.profile, "E": r["E"], "scaled_mse": r["scaled_mse"],
                         "limit": ref, "rel_gap": abs(r["scaled_mse"] - ref) / ref})
    else:
        rows.append({"profile": args.profile, "M": args.M, "q2": q2_expectation(f),
                     "p2": p2_expectation(f), "limit": ref})
    return rows, {}


def cmd_simulate(args):
    if args.plateau:
        if not args.n_list:
            raise UsageError("--plateau needs --n-list")
        rows = noon_plateau_demo(args.n_list, args.eps, args.count, args.seed, contrast_E=args.contrast_E)
        return rows, {}
    state = _load_state(args)
    if args.count < 2:
        raise UsageError("--count must be at least 2")
    batch = sample_outcomes(state, args.theta, args.count, args.seed)
    mse, se = empirical_mse(batch)
    exact = covariant_mse(state)
    return [{"theta": args.theta, "count": args.count, "empirical_mse": mse, "stderr": se,
             "covariant_mse": exact, "z": (mse - exact) / se if se > 0 else 0.0}], {}


def cmd_twostep(args):
    if args.E_total < 8 or not 0 < args.split <= 1:
        raise UsageError("need --E-total >= 8 and 0 < --split <= 1")
    return [two_step_demo(args.E_total, args.split, args.trials, args.seed, stage2=args.stage2)], {}


COMMANDS = {
    "kernel": cmd_kernel,
    "mse": cmd_mse,
    "fisher": cmd_fisher,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "noon": cmd_noon,
    "continuum": cmd_continuum,
    "simulate": cmd_simulate,
    "twostep": cmd_twostep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--gnuplot", action="store_true", help="two-column whitespace output for plotting")

    parser = argparse.ArgumentParser(prog="phasebound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"phasebound {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", parents=[common], help="MSE kernel entries")
    p.add_argument("--max-lag", type=int, default=4)

    p = sub.add_parser("mse", parents=[common], help="covariant MSE of a state")
    _add_state_args(p)
    p.add_argument("--oracle", action="store_true", help="also evaluate by quadrature")

    p = sub.add_parser("fisher", parents=[common], help="SLD Fisher information of a state")
    _add_state_args(p)

    p = sub.add_parser("optimize", parents=[common], help="optimal MSE under a photon constraint")
    p.add_argument("--constraint", choices=["max", "avg"], required=True)
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--trunc-factor", type=float, default=8.0)
    p.add_argument("--emit-state", default=None)

    p = sub.add_parser("sweep", parents=[common], help="E^2 C(E) or n^2 C(noon) over a list")
    p.add_argument("--bound", choices=["max", "avg"])
    p.add_argument("--E", type=_float_list)
    p.add_argument("--noon", action="store_true")
    p.add_argument("--n", type=_int_list)
    p.add_argument("--trunc-factor", type=float, default=8.0)

    p = sub.add_parser("noon", parents=[common], help="noon-state bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("continuum", parents=[common], help="continuum-limit quantities")
    p.add_argument("--profile", choices=["gaussian", "sine", "dirichlet"], required=True)
    p.add_argument("--M", type=int, default=4001)
    p.add_argument("--E", type=_float_list, default=None, help="lattice budgets for the scaling table")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo MSE or the noon plateau")
    _add_state_args(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--plateau", action="store_true")
    p.add_argument("--n-list", type=_int_list, default=None)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--contrast-E", type=int, default=None)

    p = sub.add_parser("twostep", parents=[common], help="two-stage estimation demo")
    p.add_argument("--E-total", type=int, required=True)
    p.add_argument("--split", type=float, default=0.25)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--stage2", choices=["sine", "noon"], default="sine")
    return parser


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(config: dict, rows: list[dict], extra: dict, fmt: str, gnuplot: bool) -> str:
    provenance = {"tool": "phasebound", "version": __version__, "config": config, "seed": config.get("seed")}
    if fmt == "json":
        payload = {"provenance": provenance, "rows": rows}
        payload.update({k: v for k, v in extra.items() if k != "plot"})
        return json.dumps(_jsonable(payload), indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# phasebound {__version__}\n")
    buf.write(f"# config: {json.dumps(_jsonable(config), sort_keys=True)}\n")
    buf.write(f"# seed: {config.get('seed')}\n")
    if gnuplot and "plot" in extra:
        xk, yk = extra["plot"]
        buf.write(f"# {xk} {yk}\n")
        for r in rows:
            buf.write(f"{_fmt(r[xk])} {_fmt(r[yk])}\n")
        return buf.getvalue()
    if rows:
        fields = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(k, "")) for k in fields])
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = {k: v for k, v in vars(args).items() if k not in ("output",)}
    try:
        rows, extra = COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"phasebound {args.command}: error: {exc}", file=stderr)
        return 2
    except (OptimizationError, SamplingError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"phasebound {args.command}: numerical failure: {exc}", file=stderr)
        return 1
    text = render(config, rows, extra, args.format, args.gnuplot)
    if args.output == "-":
        stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
