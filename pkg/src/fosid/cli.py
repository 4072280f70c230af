"""Command line interface.

Subcommands: gen, simulate, estimate, sweep, aberration, paper-mode.
Every report path writes delimited data and, unless --no-plot is given,
a PNG figure next to it.  Exit status is 0 on success (including runs
that did not converge, which are reported in the output files) and 2 on
I/O or validation failures.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .estimator import EstimationConfig, estimate
from .generators import aberration_demo, example_names, gen_example, get_example
from .glkernel import FosModel, simulate_fos
from .history import HistorySpec, apply_history, build_duplicate_history
from .io import (
    as_float_list,
    fmt_float,
    parse_intervals,
    read_dataset_csv,
    read_history_csv,
    read_kv,
    write_dataset_csv,
    write_kv,
)
from .metrics import relative_error_param
from .protocols import paper_mode_experiment, reconstruct_output, run_sweep
from .signalkit import Dataset, HistorySegment, SampledSignal, make_grid


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fosid",
        description="simulate fractional-order systems and estimate their parameters and orders",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a named synthetic example")
    p.add_argument("name", choices=example_names())
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="dataset CSV path (truth file lands next to it)")
    p.add_argument("--samples", type=int, default=None, help="override the record length")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("simulate", help="simulate a model file against an input record")
    p.add_argument("--model", required=True, help="key-value file with a, alpha, b")
    p.add_argument("--input", required=True, help="CSV with a t,u record (t,u,y also accepted)")
    p.add_argument("--history", default=None, help="optional t,f history CSV")
    p.add_argument("--out", required=True, help="output dataset CSV")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate parameters and orders from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True, help="key-value config with at least alpha0")
    p.add_argument("--out", required=True, help="report file; reconstruction CSV lands next to it")
    p.add_argument("--truth", default=None, help="optional truth file for error reporting")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("sweep", help="grid of estimations over history/record splits")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--gen", dest="generator", choices=sorted(set(example_names()) - {"aberration"}))
    src.add_argument("--data")
    p.add_argument("--truth", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--nc-list", type=int, nargs="+", required=True)
    p.add_argument("--n0-list", type=int, nargs="+", required=True)
    p.add_argument("--alpha0-list", nargs="+", required=True,
                   help="initial guesses, comma-joined per entry (e.g. 0.6,1.4 0.5,1.5)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("aberration", help="pre-start sensitivity demo of the half-order system")
    p.add_argument("--tend", type=float, default=10.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_aberration)

    p = sub.add_parser("paper-mode", help="mismatch-protocol experiment on a named example")
    p.add_argument("name", choices=sorted(set(example_names()) - {"aberration"}))
    p.add_argument("--nc", type=int, required=True, help="duplicated history cycles")
    p.add_argument("--n0", type=int, required=True, help="measured cycles")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_paper_mode)

    return parser


def _sibling(out, suffix: str) -> Path:
    out = Path(out)
    return out.with_name(out.stem + suffix)


def _cmd_gen(args) -> None:
    if args.name == "aberration":
        demo = aberration_demo(10.0, 0.01)
        _write_aberration_csv(args.out, demo)
        if not args.no_plot:
            from .plots import save_aberration_plot

            save_aberration_plot(_sibling(args.out, ".png"), demo.t, demo.outputs)
        return
    gex = gen_example(args.name, args.seed, args.out, n_samples=args.samples)
    if not args.no_plot:
        from .plots import save_dataset_plot

        save_dataset_plot(_sibling(args.out, ".png"), gex.dataset, title=args.name)


def _read_model_file(path) -> FosModel:
    record = read_kv(path)
    for key in ("a", "alpha", "b"):
        if key not in record:
            raise ValueError(f"{path}: model file is missing key {key!r}")
    coeffs = as_float_list(record["a"])
    alphas = as_float_list(record["alpha"])
    intervals = parse_intervals(record["intervals"]) if "intervals" in record else None
    return FosModel.from_values(coeffs, float(record["b"]), alphas, intervals)


def _cmd_simulate(args) -> None:
    model = _read_model_file(args.model)
    u_rec = _read_input_csv(args.input)
    history = read_history_csv(args.history) if args.history else HistorySegment.empty()
    n3 = len(history)
    grid = make_grid(u_rec.h, u_rec.t_start - n3 * u_rec.h, n3, len(u_rec))
    y = simulate_fos(model, u_rec, history, grid)
    dataset = Dataset(grid=grid, u=u_rec, y=y)
    write_dataset_csv(args.out, dataset)
    if not args.no_plot:
        from .plots import save_dataset_plot

        save_dataset_plot(_sibling(args.out, ".png"), dataset, title="simulation")


def _read_input_csv(path) -> SampledSignal:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    cols = [c.strip() for c in header]
    if cols[:2] == ["t", "u"] and len(cols) == 2:
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t, u = rows[:, 0], rows[:, 1]
    elif cols == ["t", "u", "y"]:
        ds = read_dataset_csv(path)
        return ds.u
    else:
        raise ValueError(f"{path}: expected a t,u or t,u,y header, got {','.join(cols)}")
    if t.size < 2:
        raise ValueError(f"{path}: need at least two samples")
    h = float((t[-1] - t[0]) / (t.size - 1))
    return SampledSignal(float(t[0]), h, u)


def _history_from_config(cfg: dict, dataset: Dataset) -> HistorySegment:
    mode = str(cfg.get("history_mode", "zero"))
    if mode == "zero":
        return HistorySegment.empty()
    if mode == "file":
        path = cfg.get("history_file")
        if not path:
            raise ValueError("history_mode = file requires history_file")
        return read_history_csv(path)
    if mode == "duplicate":
        n_cycles = int(cfg.get("n_cycles", 0))
        n0 = int(cfg.get("n_output_cycles", 1))
        k = dataset.grid.n_estimation
        if k % n0:
            raise ValueError(f"record of {k} samples cannot be split into {n0} cycles")
        spec = HistorySpec(mode="duplicate", n_cycles=n_cycles, cycle_length=k // n0)
        return build_duplicate_history(dataset.y, spec.cycle_length, spec.n_cycles)
    raise ValueError(f"unknown history_mode {mode!r}")


def _estimation_config(cfg: dict) -> EstimationConfig:
    if "alpha0" not in cfg:
        raise ValueError("config must provide alpha0")
    kwargs = {"alpha0": tuple(as_float_list(cfg["alpha0"]))}
    for key in ("epsilon", "rank_tol", "bounds_margin"):
        if key in cfg:
            kwargs[key] = float(cfg[key])
    if "max_iter" in cfg:
        kwargs["max_iter"] = int(cfg["max_iter"])
    if "step_halving" in cfg:
        kwargs["step_halving"] = bool(cfg["step_halving"])
    return EstimationConfig(**kwargs)


def _intervals_from_config(cfg: dict, alpha0) -> tuple[tuple[int, int], ...]:
    if "intervals" in cfg:
        return parse_intervals(cfg["intervals"])
    out = []
    for a in alpha0:
        lo = int(np.floor(a))
        out.append((lo, lo + 1))
    return tuple(out)


def _cmd_estimate(args) -> None:
    dataset0 = read_dataset_csv(args.data)
    cfg = read_kv(args.config)
    config = _estimation_config(cfg)
    history = _history_from_config(cfg, dataset0)
    dataset = apply_history(dataset0, history)
    intervals = _intervals_from_config(cfg, config.alpha0)
    result = estimate(dataset, history, intervals, config)

    report = {
        "data": str(args.data),
        "n_history": dataset.grid.n_history,
        "alpha_hat": list(result.alpha_hat),
        "p_hat": list(result.p_hat),
        "iterations": result.iterations,
        "converged": result.converged,
        "final_residual": float(result.residual_history[-1]),
        "re_output_percent": result.final_output_error,
        "residual_history": list(result.residual_history),
    }
    if args.truth:
        truth = read_kv(args.truth)
        a_true = as_float_list(truth["a"])
        alpha_true = as_float_list(truth["alpha"])
        for i, tv in enumerate(a_true):
            report[f"re_a{i + 1}_percent"] = relative_error_param(tv, result.p_hat[i])
        report["re_b_percent"] = relative_error_param(float(truth["b"]), result.p_hat[-1])
        for i, tv in enumerate(alpha_true):
            report[f"re_alpha{i + 1}_percent"] = relative_error_param(tv, result.alpha_hat[i])
    write_kv(args.out, report, header="estimation report")

    y_hat = reconstruct_output(dataset, history, intervals, result)
    _write_reconstruction_csv(_sibling(args.out, "_reconstruction.csv"), dataset, y_hat)
    if not args.no_plot:
        from .plots import save_reconstruction_plot

        save_reconstruction_plot(
            _sibling(args.out, ".png"),
            dataset.grid.estimation_times(),
            dataset.y.values,
            y_hat.values,
            result.residual_history,
        )
    if not result.converged:
        print("estimate did not reach the stopping threshold; see report", file=sys.stderr)


def _write_reconstruction_csv(path, dataset: Dataset, y_hat: SampledSignal) -> None:
    t = dataset.grid.estimation_times()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "y", "y_hat"])
        for tk, yk, yhk in zip(t, dataset.y.values, y_hat.values):
            w.writerow([fmt_float(tk), fmt_float(yk), fmt_float(yhk)])


def _cmd_sweep(args) -> None:
    alpha0_list = [as_float_list(entry) for entry in args.alpha0_list]
    config = _estimation_config(read_kv(args.config)) if args.config else None
    if args.generator:
        source = args.generator
        truth = None
    else:
        source = read_dataset_csv(args.data)
        truth = read_kv(args.truth) if args.truth else None
    report = run_sweep(
        source,
        args.nc_list,
        args.n0_list,
        alpha0_list,
        seed=args.seed,
        config=config,
        truth=truth,
    )
    report.write_csv(args.out)
    failed = sum(1 for row in report.rows if row.get("status") != "ok")
    if failed:
        print(f"{failed} of {len(report.rows)} sweep cells failed; see status column",
              file=sys.stderr)
    if not args.no_plot:
        from .plots import save_sweep_plot

        save_sweep_plot(_sibling(args.out, ".png"), report)


def _write_aberration_csv(path, demo) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "y0", "y1", "y2"])
        for tk, a, b, c in zip(demo.t, *demo.outputs):
            w.writerow([fmt_float(tk), fmt_float(a), fmt_float(b), fmt_float(c)])


def _cmd_aberration(args) -> None:
    demo = aberration_demo(args.tend, args.h)
    _write_aberration_csv(args.out, demo)
    if not args.no_plot:
        from .plots import save_aberration_plot

        save_aberration_plot(_sibling(args.out, ".png"), demo.t, demo.outputs)


def _cmd_paper_mode(args) -> None:
    config = _estimation_config(read_kv(args.config)) if args.config else None
    report = paper_mode_experiment(args.name, args.nc, args.n0, seed=args.seed, config=config)
    write_kv(args.out, report.record(), header=f"paper-mode report for {args.name}")
    spec = get_example(args.name)
    y_hat = reconstruct_output(report.dataset, report.history, spec.intervals, report.result)
    _write_reconstruction_csv(_sibling(args.out, "_reconstruction.csv"), report.dataset, y_hat)
    if not args.no_plot:
        from .plots import save_reconstruction_plot

        save_reconstruction_plot(
            _sibling(args.out, ".png"),
            report.dataset.grid.estimation_times(),
            report.dataset.y.values,
            y_hat.values,
            report.result.residual_history,
            title=f"{args.name} (N_C={args.nc}, N_0={args.n0})",
        )


if __name__ == "__main__":
    sys.exit(main())
