"""Command-line front end: tables of bounds, delta maps, condition reports,
scaling comparisons and Monte Carlo validation runs, as CSV or JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import bounds as B
from .bounds import THIRD
from .conditions import GammaFamily, check_condition1, condition_report
from .errors import InvalidParamsError
from .harness import INSTANCES, validate_bounds
from .scaling import compare_lower, compare_upper

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3

DEFAULT_FIGURE_M = (0.25, 0.5, 1.0, 2.0)

COLUMNS = {
    "bounds": ["t", "tail", "method", "exponent", "probability", "valid", "reason"],
    "figure": ["M", "t", "tail", "method", "exponent", "probability", "valid"],
    "deltas": ["a", "M", "delta_plus", "delta_plus_case", "delta_minus", "delta_minus_case"],
    "conditions": ["a", "M", "b", "mean", "delta_plus", "delta_plus_case",
                   "gamma0_end", "gamma0_bounded", "gamma_shifted", "gamma_shifted_end",
                   "gamma_shifted_failed_on", "lambda_star", "lambda_tilde",
                   "d_positive_end", "condition1_satisfied", "condition2_satisfied",
                   "t_max", "numerical_extension", "notes"],
    "scaling": ["t", "tail", "rescaled_denominator", "direct_denominator",
                "rescaled_exponent", "direct_exponent", "tighter", "crossover_t",
                "paper_threshold_t", "valid"],
    "validate": ["t", "tail", "empirical", "ci_radius", "Mab-symmetric", "Mab-improved",
                 "passed"],
}

# every emitted document has this shape; non-finite floats become strings
OUTPUT_SCHEMA = {
    "type": "object",
    "required": ["command", "config", "columns", "rows"],
    "properties": {
        "command": {"enum": sorted(COLUMNS)},
        "config": {"type": "object"},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": {
                    "anyOf": [
                        {"type": "number"},
                        {"type": "boolean"},
                        {"type": "null"},
                        {"type": "string"},
                    ]
                },
            },
        },
    },
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    M: float | None
    a: float | None
    b: float | None
    mean: float | None
    t_min: float | None
    t_max: float | None
    t_points: int
    t_scale: str
    lambda_max: float | None
    samples: int
    seed: int
    instance: str
    n: int
    alphabet: int
    M_list: tuple[float, ...]
    grid_points: int
    workers: int
    out: str | None
    fmt: str

    def as_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()
                if k not in ("out", "workers")}


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        return float(f"{x:.17g}")
    return x


def _csv_cell(x):
    x = _num(x)
    if isinstance(x, float):
        return f"{x:.17g}"
    if x is None:
        return ""
    return str(x)


def t_grid(cfg: RunConfig, default_max: float) -> np.ndarray:
    if cfg.t_points < 1:
        raise UsageError("t grid is empty (--t-points must be >= 1)")
    hi = default_max if cfg.t_max is None else cfg.t_max
    if not hi > 0:
        raise UsageError("--t-max must be positive")
    if cfg.t_scale == "log":
        lo = hi / 1000.0 if cfg.t_min is None else cfg.t_min
        if not 0 < lo <= hi:
            raise UsageError("log t grid needs 0 < t-min <= t-max")
        return np.geomspace(lo, hi, cfg.t_points)
    if cfg.t_min is None:
        # (0, hi]: points evenly spaced, excluding 0
        return np.linspace(hi / cfg.t_points, hi, cfg.t_points)
    if not 0 <= cfg.t_min <= hi:
        raise UsageError("need 0 <= t-min <= t-max")
    return np.linspace(cfg.t_min, hi, cfg.t_points)


def _params(cfg: RunConfig) -> B.SelfBoundingParams:
    return B.SelfBoundingParams(
        M=1.0 if cfg.M is None else cfg.M,
        a=1.0 if cfg.a is None else cfg.a,
        b=0.0 if cfg.b is None else cfg.b,
        mean_z=5.0 if cfg.mean is None else cfg.mean,
    )


def _bound_row(tb: B.TailBound) -> dict:
    return {"t": tb.t, "tail": tb.tail.value, "method": tb.method.value,
            "exponent": tb.exponent, "probability": tb.probability,
            "valid": tb.valid, "reason": tb.reason}


def cmd_bounds(cfg: RunConfig) -> tuple[list[dict], bool]:
    p = _params(cfg)
    rows = [_bound_row(tb) for t in t_grid(cfg, 2 * p.mean_z) for tb in B.evaluate_all(p, float(t))]
    return rows, True


def cmd_figure(cfg: RunConfig) -> tuple[list[dict], bool]:
    base = _params(cfg)
    rows = []
    for M in cfg.M_list:
        p = B.SelfBoundingParams(M=M, a=base.a, b=base.b, mean_z=base.mean_z)
        for t in t_grid(cfg, 2 * p.mean_z):
            for tb in B.evaluate_all(p, float(t)):
                r = _bound_row(tb)
                r["M"] = M
                rows.append(r)
    return rows, True


def cmd_deltas(cfg: RunConfig) -> tuple[list[dict], bool]:
    a_max = 1.2 if cfg.a is None else cfg.a
    M_max = 3.0 if cfg.M is None else cfg.M
    n = cfg.grid_points
    if n < 2:
        raise UsageError("--grid-points must be >= 2")
    rows = []
    for a in np.linspace(0.0, a_max, n):
        for M in np.linspace(M_max / n, M_max, n):
            dp, dm = B.delta_plus(float(a), float(M)), B.delta_minus(float(a), float(M))
            rows.append({"a": a, "M": M, "delta_plus": dp.value, "delta_plus_case": dp.case,
                         "delta_minus": dm.value, "delta_minus_case": dm.case})
    return rows, True


def cmd_conditions(cfg: RunConfig) -> tuple[list[dict], bool]:
    p = _params(cfg)
    rep = condition_report(p.a, p.M, p)
    shifted = max(p.a - THIRD, 0.0)
    res0 = rep.condition1.get(0.0)
    res1 = rep.condition1.get(shifted)
    if cfg.lambda_max is not None:
        res0 = check_condition1(GammaFamily(p.a, p.M, 0.0), cfg.lambda_max)
        res1 = check_condition1(GammaFamily(p.a, p.M, shifted), cfg.lambda_max)
    row = {
        "a": p.a, "M": p.M, "b": p.b, "mean": p.mean_z,
        "delta_plus": rep.delta.value, "delta_plus_case": rep.delta.case,
        "gamma0_end": res0.end if res0 else None,
        "gamma0_bounded": res0.bounded if res0 else None,
        "gamma_shifted": shifted,
        "gamma_shifted_end": res1.end if res1 else None,
        "gamma_shifted_failed_on": res1.failed_on if res1 else None,
        "lambda_star": rep.lambda_star, "lambda_tilde": rep.lambda_tilde,
        "d_positive_end": rep.d_positive_end,
        "condition1_satisfied": rep.condition1_satisfied,
        "condition2_satisfied": rep.condition2_satisfied,
        "t_max": rep.t_max, "numerical_extension": rep.numerical_extension,
        "notes": "; ".join(rep.notes),
    }
    return [row], True


def cmd_scaling(cfg: RunConfig) -> tuple[list[dict], bool]:
    p = _params(cfg)
    rows = []
    for t in t_grid(cfg, 2 * p.mean_z / p.M):
        for tail, fn in (("upper", compare_upper), ("lower", compare_lower)):
            c = fn(p, float(t))
            rows.append({"t": float(t), "tail": tail,
                         "rescaled_denominator": c.rescaled_denominator,
                         "direct_denominator": c.direct_denominator,
                         "rescaled_exponent": c.rescaled_exponent,
                         "direct_exponent": c.direct_exponent,
                         "tighter": c.tighter, "crossover_t": c.crossover_t,
                         "paper_threshold_t": c.paper_threshold_t, "valid": c.valid})
    return rows, True


def cmd_validate(cfg: RunConfig) -> tuple[list[dict], bool]:
    if cfg.instance not in INSTANCES:
        raise UsageError(f"unknown instance {cfg.instance!r}; choose from {sorted(INSTANCES)}")
    if cfg.samples < 10_000:
        raise UsageError("validate needs --samples >= 10000")
    M = 1.0 if cfg.M is None else cfg.M
    if cfg.instance == "distinct-values":
        inst = INSTANCES[cfg.instance](cfg.n, cfg.alphabet, M)
    else:
        inst = INSTANCES[cfg.instance](cfg.n, 2, M)
    claimed = inst.claimed
    # --a/--b/--mean override what the instance claims (e.g. to test a bad claim)
    p = B.SelfBoundingParams(
        M=claimed.M,
        a=claimed.a if cfg.a is None else cfg.a,
        b=claimed.b if cfg.b is None else cfg.b,
        mean_z=claimed.mean_z if cfg.mean is None else cfg.mean,
    )
    grid = t_grid(cfg, p.mean_z)
    result = validate_bounds(inst, grid, cfg.samples, cfg.seed, params=p, workers=cfg.workers)
    rows = []
    for r in result:
        row = {"t": r.t, "tail": r.tail, "empirical": r.empirical, "ci_radius": r.ci_radius}
        row.update(r.bounds)
        row["passed"] = r.passed
        rows.append(row)
    return rows, all(r.passed for r in result)


COMMANDS = {
    "bounds": cmd_bounds,
    "figure": cmd_figure,
    "deltas": cmd_deltas,
    "conditions": cmd_conditions,
    "scaling": cmd_scaling,
    "validate": cmd_validate,
}


def render(cfg: RunConfig, rows: list[dict]) -> str:
    cols = COLUMNS[cfg.command]
    if cfg.fmt == "json":
        doc = {
            "command": cfg.command,
            "config": {k: _num(v) for k, v in cfg.as_dict().items()},
            "columns": cols,
            "rows": [{c: _num(r.get(c)) for c in cols} for r in rows],
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def _epilog() -> str:
    lines = ["CSV columns by command (fixed order):"]
    for name, cols in COLUMNS.items():
        lines.append(f"  {name}: {', '.join(cols)}")
    lines.append("Exit status: 0 ok, 1 usage error, 2 validation failure, 3 I/O error.")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--M", type=float, default=None, help="difference cap M")
    common.add_argument("--a", type=float, default=None)
    common.add_argument("--b", type=float, default=None)
    common.add_argument("--mean", type=float, default=None, help="E[Z]")
    common.add_argument("--t-min", type=float, default=None)
    common.add_argument("--t-max", type=float, default=None)
    common.add_argument("--t-points", type=int, default=200)
    common.add_argument("--t-scale", choices=("lin", "log"), default="lin")
    common.add_argument("--lambda-max", type=float, default=None)
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--instance", default="distinct-values")
    common.add_argument("--n", type=int, default=50, help="coordinates of the instance")
    common.add_argument("--alphabet", type=int, default=50)
    common.add_argument("--M-list", default=",".join(map(str, DEFAULT_FIGURE_M)),
                        help="comma-separated M values for `figure`")
    common.add_argument("--grid-points", type=int, default=25,
                        help="points per axis for `deltas`")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    parser = argparse.ArgumentParser(
        prog="selfbounding",
        description="Concentration bounds for (M, a, b) self-bounding functions.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bounds": "all tail bounds on a t grid",
        "figure": "tail-bound curves for several M (defaults a=1, b=0, E[Z]=5)",
        "deltas": "delta_plus / delta_minus case map over a in [0, --a], M in (0, --M]",
        "conditions": "condition report for (a, M)",
        "scaling": "direct versus rescaled bounds",
        "validate": "Monte Carlo check of the bounds on a registered instance",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], epilog=_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def _config(ns) -> RunConfig:
    try:
        m_list = tuple(float(x) for x in ns.M_list.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad --M-list: {exc}") from None
    if not m_list:
        raise UsageError("--M-list is empty")
    return RunConfig(ns.command, ns.M, ns.a, ns.b, ns.mean, ns.t_min, ns.t_max, ns.t_points,
                     ns.t_scale, ns.lambda_max, ns.samples, ns.seed, ns.instance, ns.n,
                     ns.alphabet, m_list, ns.grid_points, ns.workers, ns.out, ns.fmt)


def _diag(msg: str) -> None:
    if sys.stderr.isatty() and "NO_COLOR" not in os.environ:
        msg = f"\033[31m{msg}\033[0m"
    print(msg, file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config(ns)
        rows, ok = COMMANDS[cfg.command](cfg)
    except (UsageError, InvalidParamsError, ValueError) as exc:
        _diag(f"error: {exc}")
        return EXIT_USAGE
    text = render(cfg, rows)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            _diag(f"error: cannot write {cfg.out}: {exc.strerror}")
            return EXIT_IO
    if not ok:
        _diag("validation failed: at least one row exceeds a bound")
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
