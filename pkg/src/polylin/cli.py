"""Command-line interface.

Subcommands: partition, fit, error, plan, bench, reproduce.  Exit codes:
0 success, 2 configuration problems, 3 numerical failures (fit did not
converge, quadrature failure, degenerate target).  Output is CSV (default)
or JSON, written to --out or stdout, with floats at 17 significant digits
so identical configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, fit, functions, partition
from .core import Partition, PolygonalFunction, TargetFunction
from .evaluate import bench as bench_evaluator
from .evaluate import make_evaluator
from .partition import LinearTargetError
from .quadrature import QuadratureError, default_tolerance

__all__ = ["FunctionSpec", "RunConfig", "main", "entry"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SWEEP_SEGMENTS = (31, 63, 127, 255, 511)
EXPERIMENTS = ("gaussian04", "gaussian08", "chirp", "gain")


class ConfigError(Exception):
    """Invalid combination of command-line options."""


@dataclass(frozen=True)
class FunctionSpec:
    """Parsed --function value plus the interval it is approximated on."""

    name: str
    interval: tuple[float, float]
    coefficients: tuple[float, ...] | None = None
    text: str | None = None

    @staticmethod
    def parse(raw: str, interval: tuple[float, float] | None) -> "FunctionSpec":
        raw = raw.strip()
        if raw in functions.DEFAULT_INTERVALS:
            span = interval if interval is not None else functions.DEFAULT_INTERVALS[raw]
            return FunctionSpec(raw, span)
        if raw.startswith("poly:"):
            body = raw[len("poly:") :]
            try:
                coeffs = tuple(float(c) for c in body.split(","))
            except ValueError as exc:
                raise ConfigError(f"bad polynomial coefficients: {body!r}") from exc
            if interval is None:
                raise ConfigError("poly: functions need an explicit --interval")
            return FunctionSpec("poly", interval, coefficients=coeffs)
        if raw.startswith("expr:"):
            body = raw[len("expr:") :].strip()
            if not body:
                raise ConfigError("empty expression")
            if interval is None:
                raise ConfigError("expr: functions need an explicit --interval")
            return FunctionSpec("expr", interval, text=body)
        raise ConfigError(
            f"unknown function {raw!r}; use gaussian|chirp|poly7|poly:c0,c1,...|expr:<text>"
        )

    def resolve(self) -> TargetFunction:
        if self.name == "gaussian":
            return functions.gaussian(self.interval)
        if self.name == "chirp":
            return functions.chirp(self.interval)
        if self.name == "poly7":
            return functions.poly7(self.interval)
        if self.name == "poly":
            return functions.polynomial(self.coefficients, self.interval)
        if self.name == "expr":
            return functions.expression(self.text, self.interval)
        raise ConfigError(f"unknown function {self.name!r}")

    def describe(self) -> dict:
        out: dict = {"name": self.name, "interval": list(self.interval)}
        if self.coefficients is not None:
            out["coefficients"] = list(self.coefficients)
        if self.text is not None:
            out["expression"] = self.text
        return out

    @staticmethod
    def from_description(desc: dict) -> "FunctionSpec":
        try:
            name = desc["name"]
            interval = tuple(float(v) for v in desc["interval"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed function description: {desc!r}") from exc
        coeffs = desc.get("coefficients")
        text = desc.get("expression")
        return FunctionSpec(
            name,
            interval,
            coefficients=tuple(coeffs) if coeffs is not None else None,
            text=text,
        )


@dataclass(frozen=True)
class RunConfig:
    """One resolved command invocation."""

    function: FunctionSpec
    segments: int | None
    tolerance: float | None
    partition_kind: str
    fit_kind: str
    out: str | None
    format: str
    seed: int


FIT_TO_BOUND_KIND = {"interpolant": "interpolant", "l2": "interpolant", "l1": "best_l1"}


def _build_config(args) -> RunConfig:
    interval = tuple(args.interval) if args.interval is not None else None
    if interval is not None and not interval[0] < interval[1]:
        raise ConfigError(f"empty interval [{interval[0]}, {interval[1]}]")
    spec = FunctionSpec.parse(args.function, interval)
    segments = getattr(args, "segments", None)
    tolerance = getattr(args, "tolerance", None)
    if segments is not None and tolerance is not None:
        raise ConfigError("--segments and --tolerance are mutually exclusive")
    if segments is not None and segments < 1:
        raise ConfigError(f"need at least one segment, got {segments}")
    if tolerance is not None and not tolerance > 0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    return RunConfig(
        function=spec,
        segments=segments,
        tolerance=tolerance,
        partition_kind=getattr(args, "partition", "uniform"),
        fit_kind=getattr(args, "fit", "interpolant"),
        out=args.out,
        format=args.format,
        seed=getattr(args, "seed", 0),
    )


def _segment_count(cfg: RunConfig, f: TargetFunction) -> int:
    if cfg.segments is not None:
        return cfg.segments
    if cfg.tolerance is None:
        raise ConfigError("pass --segments or --tolerance")
    kind = f"{cfg.partition_kind}_{FIT_TO_BOUND_KIND[cfg.fit_kind]}"
    a, b = cfg.function.interval
    return analysis.min_segments_for_tolerance(f, a, b, cfg.tolerance, kind)


def _build_partition(cfg: RunConfig, f: TargetFunction, n: int) -> Partition:
    a, b = cfg.function.interval
    if cfg.partition_kind == "uniform":
        return partition.uniform_partition(a, b, n)
    return partition.optimized_partition(f, a, b, n)


def _fit_function(cfg: RunConfig, f: TargetFunction, p: Partition):
    if cfg.fit_kind == "interpolant":
        return fit.interpolant(f, p), None
    if cfg.fit_kind == "l2":
        return fit.l2_projection(f, p), None
    g, report = fit.best_l1_fit(f, p)
    if not report.converged:
        raise NumericalFailure(
            f"L1 fit did not converge (gradient norm {report.final_gradient_norm:.3e})"
        )
    return g, report


class NumericalFailure(Exception):
    pass


# -- output helpers ----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _emit(rows: list[dict], cfg_format: str, out: str | None) -> None:
    if cfg_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])
        text = buf.getvalue()
    else:
        text = json.dumps(rows, indent=2) + "\n"
    _write(text, out)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_partition(args) -> int:
    cfg = _build_config(args)
    f = cfg.function.resolve()
    n = _segment_count(cfg, f)
    p = _build_partition(cfg, f, n)
    rows = [
        {"index": i, "knot": float(x)} for i, x in enumerate(p.knots)
    ]
    _emit(rows, cfg.format, cfg.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _build_config(args)
    if cfg.format == "csv":
        raise ConfigError("fit writes a JSON model; use --format json")
    f = cfg.function.resolve()
    n = _segment_count(cfg, f)
    p = _build_partition(cfg, f, n)
    g, report = _fit_function(cfg, f, p)
    cost = analysis.l1_distance(f, g)
    model = {
        "schema": 1,
        "kind": "polylin-model",
        "function": cfg.function.describe(),
        "partition": {"kind": cfg.partition_kind, "n_segments": n},
        "fit": {
            "kind": cfg.fit_kind,
            "report": None
            if report is None
            else {
                "iterations": report.iterations,
                "final_cost": report.final_cost,
                "final_gradient_norm": report.final_gradient_norm,
                "converged": report.converged,
                "function_evals": report.function_evals,
                "stage_function_evals": list(report.stage_function_evals),
            },
        },
        "knots": [float(x) for x in p.knots],
        "ordinates": [float(v) for v in g.ordinates],
        "cost": cost,
    }
    _write(json.dumps(model, indent=2) + "\n", cfg.out)
    return EXIT_OK


def _load_model(path: str):
    try:
        with open(path) as fh:
            model = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model {path!r}: {exc}") from exc
    if model.get("kind") != "polylin-model" or model.get("schema") != 1:
        raise ConfigError(f"{path!r} is not a schema-1 polylin model")
    spec = FunctionSpec.from_description(model["function"])
    knots = np.asarray(model["knots"], dtype=float)
    ords = np.asarray(model["ordinates"], dtype=float)
    try:
        g = PolygonalFunction(Partition(knots), ords)
    except ValueError as exc:
        raise ConfigError(f"malformed model arrays: {exc}") from exc
    return model, spec, g


def cmd_error(args) -> int:
    if args.model is not None:
        model, spec, g = _load_model(args.model)
        f = spec.resolve()
        measured = analysis.l1_distance(f, g)
        stored = float(model["cost"])
        rows = [
            {
                "function": spec.name,
                "n_segments": g.partition.n_segments,
                "stored_cost": stored,
                "measured_cost": measured,
                "difference": abs(measured - stored),
            }
        ]
        _emit(rows, args.format, args.out)
        return EXIT_OK

    if args.function is None:
        raise ConfigError("error needs --function (or --model)")
    cfg = _build_config(args)
    f = cfg.function.resolve()
    n = _segment_count(cfg, f)
    p = _build_partition(cfg, f, n)
    g, _report = _fit_function(cfg, f, p)
    measured = analysis.l1_distance(f, g)
    a, b = cfg.function.interval
    row = {
        "function": cfg.function.name,
        "n_segments": n,
        "partition": cfg.partition_kind,
        "fit": cfg.fit_kind,
        "measured": measured,
    }
    for kind in analysis.BOUND_KINDS:
        row[f"bound_{kind}"] = analysis.error_bound(f, a, b, n, kind).value
    _emit([row], cfg.format, cfg.out)
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _build_config(args)
    if cfg.tolerance is None:
        raise ConfigError("plan needs --tolerance")
    f = cfg.function.resolve()
    a, b = cfg.function.interval
    rows = []
    for kind in analysis.BOUND_KINDS:
        n = analysis.min_segments_for_tolerance(f, a, b, cfg.tolerance, kind)
        rows.append({"kind": kind, "tolerance": cfg.tolerance, "n_segments": n})
    _emit(rows, cfg.format, cfg.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _build_config(args)
    f = cfg.function.resolve()
    a, b = cfg.function.interval
    sweep = [cfg.segments] if cfg.segments is not None else list(SWEEP_SEGMENTS)
    rows = []
    for n in sweep:
        uniform = partition.uniform_partition(a, b, n)
        layouts = [
            ("uniform_direct", fit.interpolant(f, uniform)),
            ("binary_search", fit.interpolant(f, _build_partition_for_bench(f, a, b, n))),
        ]
        for mode, g in layouts:
            ev = make_evaluator(g, mode)
            result = bench_evaluator(ev, args.n_evals, cfg.seed)
            rows.append(
                {
                    "n_segments": n,
                    "mode": result.mode,
                    "backend": result.backend,
                    "n_evals": result.n_evals,
                    "mean_ns": result.mean_ns,
                    "min_ns": result.min_ns,
                    "checksum": result.checksum,
                }
            )
    _emit(rows, cfg.format, cfg.out)
    return EXIT_OK


def _build_partition_for_bench(f, a, b, n):
    try:
        return partition.optimized_partition(f, a, b, n)
    except LinearTargetError:
        return partition.uniform_partition(a, b, n)


def _experiment_rows(name: str, n_values) -> list[dict]:
    if name == "gain":
        g_rows = []
        for b in np.arange(0.5, 8.0 + 1e-9, 0.5):
            f = functions.gaussian((0.0, float(b)))
            gain = analysis.partition_gain(f, 0.0, float(b))
            g_rows.append(
                {
                    "b": float(b),
                    "gain": gain,
                    "gain_over_b_squared": gain / float(b) ** 2,
                    "best_l1_advantage": 8.0 / 3.0,
                }
            )
        return g_rows

    interval = {
        "gaussian04": (0.0, 4.0),
        "gaussian08": (0.0, 8.0),
        "chirp": (0.0, 1.0),
    }[name]
    f = functions.chirp(interval) if name == "chirp" else functions.gaussian(interval)
    a, b = interval
    rows = []
    for n in n_values:
        uniform = partition.uniform_partition(a, b, n)
        optimized = partition.optimized_partition(f, a, b, n)
        interp_u = analysis.l1_distance(f, fit.interpolant(f, uniform))
        interp_o = analysis.l1_distance(f, fit.interpolant(f, optimized))
        best_u, rep_u = fit.best_l1_fit(f, uniform)
        best_o, rep_o = fit.best_l1_fit(f, optimized)
        for rep, where in ((rep_u, "uniform"), (rep_o, "optimized")):
            if not rep.converged:
                raise NumericalFailure(
                    f"L1 fit on the {where} partition at N={n} did not converge "
                    f"(gradient norm {rep.final_gradient_norm:.3e})"
                )
        err_u = analysis.l1_distance(f, best_u)
        err_o = analysis.l1_distance(f, best_o)
        row = {
            "n_segments": n,
            "interp_uniform": interp_u,
            "interp_optimized": interp_o,
            "best_l1_uniform": err_u,
            "best_l1_optimized": err_o,
        }
        for kind in analysis.BOUND_KINDS:
            row[f"bound_{kind}"] = analysis.error_bound(f, a, b, n, kind).value
        row["ratio_uniform"] = err_u / interp_u
        row["ratio_optimized"] = err_o / interp_o
        rows.append(row)
    return rows


def cmd_reproduce(args) -> int:
    if args.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {args.experiment!r}; pick from {EXPERIMENTS}")
    n_values = _parse_n_values(args.n_values)
    rows = _experiment_rows(args.experiment, n_values)
    _emit(rows, args.format, args.out)
    return EXIT_OK


def _parse_n_values(raw: str | None):
    if raw is None:
        return SWEEP_SEGMENTS
    try:
        values = tuple(int(v) for v in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --n-values {raw!r}") from exc
    if not values or any(v < 1 for v in values):
        raise ConfigError(f"bad --n-values {raw!r}")
    return values


# -- argument parsing --------------------------------------------------------


def _add_common(sub, *, function=True, segments=True, fitkind=True, seed=False):
    if function:
        sub.add_argument("--function", required=True,
                         help="gaussian|chirp|poly7|poly:c0,c1,...|expr:<text>")
        sub.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    if segments:
        sub.add_argument("--segments", type=int)
        sub.add_argument("--tolerance", type=float)
        sub.add_argument("--partition", choices=("uniform", "optimized"), default="uniform")
    if fitkind:
        sub.add_argument("--fit", choices=("interpolant", "l2", "l1"), default="interpolant")
    if seed:
        sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polylin",
        description="Polygonal approximation under the L1 norm.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("partition", help="compute a knot placement")
    _add_common(p)
    p.set_defaults(func=cmd_partition)

    p = subs.add_parser("fit", help="fit ordinates and write a model file")
    _add_common(p)
    p.set_defaults(func=cmd_fit, format="json")

    p = subs.add_parser("error", help="measure the L1 error and tabulate bounds")
    _add_common(p, function=False)
    p.add_argument("--function", help="gaussian|chirp|poly7|poly:c0,c1,...|expr:<text>")
    p.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--model", help="measure a saved model instead of fitting")
    p.set_defaults(func=cmd_error)

    p = subs.add_parser("plan", help="minimal segment counts for a tolerance")
    _add_common(p, segments=False, fitkind=False)
    p.add_argument("--tolerance", type=float, required=True)
    p.set_defaults(func=cmd_plan)

    p = subs.add_parser("bench", help="time batch evaluation")
    _add_common(p, fitkind=False, seed=True)
    p.add_argument("--n-evals", type=int, default=1_000_000)
    p.set_defaults(func=cmd_bench)

    p = subs.add_parser("reproduce", help="rerun a canned experiment")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--n-values", help="comma-separated segment counts (default sweep)")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        default_tolerance()  # surfaces a malformed POLYLIN_QUAD_TOL early
    except ValueError as exc:
        print(f"polylin: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, functions.ExpressionError) as exc:
        print(f"polylin: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, QuadratureError, LinearTargetError) as exc:
        print(f"polylin: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"polylin: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
