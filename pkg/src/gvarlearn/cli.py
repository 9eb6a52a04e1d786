"""Command-line interface: ``gvarlearn {learn,simulate,evaluate}``.

Exit codes: 0 ok, 2 input error, 3 numerical degeneracy, 4 simulation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import DegenerateResidualsError, SimulationError, SingularDesignError, SingularScatterError
from .evaluate import one_step_mse, precision_recall
from .model import center, detrend
from .params import fit_parameters
from .search import learn_structure
from .simulate import SimConfig, draw_series, random_gvar

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_SIMULATION = 4

DEGENERATE = (SingularScatterError, SingularDesignError, DegenerateResidualsError)


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _describe_degenerate(exc, names) -> str:
    if isinstance(exc, SingularScatterError) and names:
        d = len(names)
        label = names[exc.node % d] if exc.node is not None else "?"
        return f"{exc} (variable {label!r})"
    return str(exc)


def cmd_learn(args) -> int:
    try:
        series = io.read_csv(args.data)
    except io.InputError as exc:
        return _fail(EXIT_INPUT, str(exc))
    if series.n <= args.max_lag:
        return _fail(EXIT_INPUT, f"series has {series.n} rows; need more than --max-lag={args.max_lag}")

    prep = {"detrend": bool(args.detrend), "center": not args.no_center}
    if args.detrend:
        series, slope, intercept = detrend(series)
        prep.update(slope=slope.tolist(), intercept=intercept.tolist())
    if not args.no_center:
        series, mean = center(series)
        prep["mean"] = mean.tolist()

    flat = [j for j in range(series.d) if np.ptp(series.values[:, j]) == 0.0]
    if flat:
        labels = ", ".join(repr(series.names[j]) if series.names else str(j) for j in flat)
        return _fail(EXIT_DEGENERATE, f"constant column(s) {labels}: scatter matrix would be singular")

    try:
        result = learn_structure(series, args.max_lag, args.gamma, threads=args.threads, jitter=args.jitter)
        model, diag = fit_parameters(series, result.structure, args.delta, args.max_iter)
    except DEGENERATE as exc:
        return _fail(EXIT_DEGENERATE, _describe_degenerate(exc, series.names))
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    result.model, result.diagnostics = model, diag

    diagnostics = {
        "objective_per_k": {str(k): v for k, v in result.temporal.objective_per_k.items()},
        "loglik_trajectory": diag.loglik_trajectory,
        "timings_ms": result.timings_ms,
        "iterations": diag.iterations,
        "converged": diag.converged,
    }
    payload = io.model_to_dict(
        result.structure,
        model,
        gamma=args.gamma,
        diagnostics=diagnostics,
        names=list(series.names) if series.names else None,
        contemporaneous_blankets=[list(b) for b in result.contemporaneous_blankets],
        preprocessing=prep,
    )
    if args.out:
        io.write_json(args.out, payload)

    print(f"{'k_hat':>8} {'n_t':>6} {'n_c':>6} {'time_ms':>10} {'converged':>10}")
    print(
        f"{result.structure.k:>8d} {result.structure.n_temporal:>6d} {result.structure.n_contemporaneous:>6d} "
        f"{result.timings_ms['total']:>10.1f} {str(diag.converged):>10}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = SimConfig(
            args.d, args.k, args.q,
            coef_low=args.coef_low, coef_high=args.coef_high,
            margin=args.margin, burn_in=args.burn_in, seed=args.seed,
        )
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        model, truth = random_gvar(cfg)
        series = draw_series(model, args.n, cfg.burn_in, cfg.seed)
    except SimulationError as exc:
        return _fail(EXIT_SIMULATION, str(exc))
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))

    prefix = Path(args.out)
    io.write_csv(prefix.with_name(prefix.name + ".csv"), series)
    config = {
        "d": cfg.d, "k": cfg.k, "q": cfg.q, "n": args.n, "seed": cfg.seed,
        "coef_low": cfg.coef_low, "coef_high": cfg.coef_high,
        "margin": cfg.margin, "burn_in": cfg.burn_in, "rng": "numpy PCG64",
    }
    io.write_json(prefix.with_name(prefix.name + ".truth.json"), io.model_to_dict(truth, model, config=config))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    try:
        data = io.read_json(args.model)
        structure = io.structure_from_dict(data)
        reference = Path(args.reference)
        if reference.suffix.lower() == ".json":
            truth = io.structure_from_dict(io.read_json(reference))
            scores = precision_recall(structure, truth)
            metrics = dict(scores._asdict())
            metrics["k_estimated"] = structure.k
            metrics["k_true"] = truth.k
        else:
            model = io.model_from_dict(data)
            if model is None:
                return _fail(EXIT_INPUT, f"{args.model} carries no fitted parameters")
            test = io.read_csv(reference)
            prep = data.get("preprocessing") or {}
            if prep.get("detrend"):
                test, _, _ = detrend(test)
            if prep.get("center") and prep.get("mean") is not None:
                test = type(test)(test.values - prep["mean"], test.names)
            metrics = {
                "mse": one_step_mse(model, test),
                "n_t": structure.n_temporal,
                "n_c": structure.n_contemporaneous,
            }
    except io.InputError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))

    width = max(len(k) for k in metrics)
    for key, value in metrics.items():
        shown = f"{value:.6g}" if isinstance(value, float) else str(value)
        print(f"{key:<{width}}  {shown}")
    if args.json:
        io.write_json(args.json, metrics)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gvarlearn", description="Sparse Gaussian VAR structure learning.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn structure and parameters from a CSV series")
    p.add_argument("data", help="CSV file, rows = time steps, columns = variables")
    p.add_argument("--max-lag", type=int, default=5, help="largest lag length considered (default 5)")
    p.add_argument("--gamma", type=float, default=0.5, help="structure prior strength (default 0.5)")
    p.add_argument("--no-center", action="store_true", help="do not subtract column means")
    p.add_argument("--detrend", action="store_true", help="remove a per-column linear trend first")
    p.add_argument("--delta", type=float, default=1e-6, help="log-likelihood convergence threshold")
    p.add_argument("--max-iter", type=int, default=100, help="maximum parameter-fit iterations")
    p.add_argument("--jitter", type=float, default=0.0, help="diagonal jitter added to scatter submatrices")
    p.add_argument("--threads", type=int, default=1, help="worker threads for per-node searches")
    p.add_argument("--out", help="write the learned model as JSON here")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("simulate", help="draw a random sparse GVAR model and a series from it")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--q", type=float, default=3.0, help="expected temporal indegree")
    p.add_argument("--n", type=int, default=800, help="series length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--margin", type=float, default=0.05, help="stability margin on the spectral radius")
    p.add_argument("--coef-low", type=float, default=0.1)
    p.add_argument("--coef-high", type=float, default=0.9)
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv and PREFIX.truth.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score a learned model against a truth JSON or a test CSV")
    p.add_argument("model", help="model JSON written by 'learn'")
    p.add_argument("reference", help="truth JSON (structure recovery) or test CSV (one-step MSE)")
    p.add_argument("--json", help="also write the metrics as JSON here")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
