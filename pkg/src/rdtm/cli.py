"""Command-line front end.

Subcommands: ``table`` (pointwise comparison against the exact traveling
wave), ``surface`` (the same over a dense grid, written as CSV for external
plotting), ``convergence`` (max error and residual slope per order), and
``coefficients`` (the series coefficients as parseable expression text).

A problem descriptor is a single JSON document; every field has a default,
a ``--problem`` file overrides the defaults, and command-line flags override
the file.  The defaults regenerate the benchmark comparison table.

Exit codes: 0 success, 2 invalid input, 3 evaluation or I/O failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from .engine import PdeModel, assemble, assemble_grid, build_series
from .expr import Bindings, ExprError, evaluate, parse, to_text
from .ks import (DEFAULT_NT, DEFAULT_NX, DEFAULT_T_RANGE, DEFAULT_WAVE_NUMBER,
                 DEFAULT_X_RANGE, KsParams, generalized_model, ks_exact_grid,
                 ks_initial, ks_model)
from .verify import compare_table, loglog_slope, residual

__all__ = [
    "ProblemDescriptor", "DescriptorError",
    "run_table", "run_surface", "run_convergence", "run_coefficients",
    "main",
]

CSV_HEADER = "x,t,rdtm,exact,abs_err"

# Log-spaced sample times for the residual-decay slope in `convergence`.
SLOPE_TIMES = tuple(10.0 ** e for e in (-3.0, -2.5, -2.0, -1.5, -1.0))

_TABLE_POINTS = ((0.0, 0.5, 1.0), (0.0, 0.5, 1.0))
_PRESETS = ("ks", "generalized-ks")

_DESCRIPTOR_FIELDS = {
    "preset", "linear_terms", "nonlinear_terms", "initial", "params", "order",
    "xs", "ts", "xmin", "xmax", "nx", "tmin", "tmax", "nt",
}

_DEFAULT_PARAMS = {
    "ks": {"c": 0.1, "kappa": "auto", "x0": -30.0, "gamma": 1.0, "lambda": 1.0},
    "generalized-ks": {"c": 0.1, "kappa": "auto", "x0": -30.0,
                       "alpha": 1.0, "beta": 1, "gamma": 1.0, "tau": 1,
                       "lambda": 1.0},
    None: {},
}


class DescriptorError(ValueError):
    """Invalid problem description; the message names the offending field."""


class ProblemDescriptor:
    """Resolved problem statement: model, initial condition, order, grid.

    Construction validates everything that does not require running a
    build, so failures here are input errors (exit code 2), not runtime
    ones.
    """

    def __init__(self, preset="ks", linear_terms=None, nonlinear_terms=None,
                 initial=None, params=None, order=2,
                 xs=None, ts=None, x_range=None, t_range=None):
        if preset is not None and preset not in _PRESETS:
            raise DescriptorError(
                f"field 'preset': unknown preset {preset!r}; choose from "
                f"{', '.join(_PRESETS)} or null with explicit term lists")
        self.preset = preset
        self.order = _check_order_field(order)
        self.params = _resolve_params(preset, params)
        self.initial_text = _check_initial_field(initial)
        self.model = _build_model(preset, linear_terms, nonlinear_terms,
                                  self.params)
        self.xs = xs
        self.ts = ts
        self.x_range = x_range
        self.t_range = t_range

    def wave_params(self):
        return KsParams(c=self.params["c"], kappa=self.params["kappa"],
                        x0=self.params["x0"])

    def bindings(self):
        constants = {k: v for k, v in self.params.items()
                     if isinstance(v, (int, float))}
        return Bindings(constants=constants)

    def initial_expression(self):
        if self.initial_text is None:
            if self.preset is None:
                raise DescriptorError(
                    "field 'initial': required when no preset is chosen")
            return ks_initial(self.wave_params())
        try:
            return parse(self.initial_text)
        except ExprError as e:
            raise DescriptorError(f"field 'initial': {e}") from e

    def grid(self, default_points=_TABLE_POINTS, default_ranges=None):
        xs = _resolve_axis("x", self.xs, self.x_range,
                           default_points and default_points[0],
                           default_ranges and default_ranges[0])
        ts = _resolve_axis("t", self.ts, self.t_range,
                           default_points and default_points[1],
                           default_ranges and default_ranges[1])
        return xs, ts


def _check_order_field(order):
    if not isinstance(order, int) or isinstance(order, bool) \
            or not 0 <= order <= 6:
        raise DescriptorError(
            f"field 'order': must be an integer in 0..6, got {order!r}")
    return order


def _check_initial_field(initial):
    if initial is None:
        return None
    if not isinstance(initial, str):
        raise DescriptorError(
            f"field 'initial': must be expression text, got {initial!r}")
    try:
        parse(initial)
    except ExprError as e:
        raise DescriptorError(f"field 'initial': {e}") from e
    return initial


def _resolve_params(preset, params):
    merged = dict(_DEFAULT_PARAMS[preset])
    for key, value in (params or {}).items():
        if not isinstance(key, str):
            raise DescriptorError(f"field 'params': names must be strings, "
                                  f"got {key!r}")
        merged[key] = value
    if merged.get("kappa") == "auto":
        merged["kappa"] = DEFAULT_WAVE_NUMBER
    for key, value in merged.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) \
                or not math.isfinite(value):
            raise DescriptorError(
                f"field 'params': {key} must be a finite number, got {value!r}")
    return merged


def _term_list(name, raw, width):
    if raw is None:
        return ()
    try:
        terms = tuple(tuple(entry) for entry in raw)
    except TypeError:
        raise DescriptorError(f"field '{name}': must be a list of "
                              f"{width}-element lists") from None
    for entry in terms:
        if len(entry) != width:
            raise DescriptorError(
                f"field '{name}': each term needs {width} entries, "
                f"got {list(entry)!r}")
    return terms


def _build_model(preset, linear_terms, nonlinear_terms, params):
    if preset is not None and (linear_terms or nonlinear_terms):
        raise DescriptorError(
            "field 'linear_terms': explicit term lists conflict with a preset")
    try:
        if preset == "ks":
            return ks_model(gamma=params["gamma"], lam=params["lambda"])
        if preset == "generalized-ks":
            return generalized_model(
                alpha=params["alpha"], beta=_int_param(params, "beta"),
                gamma=params["gamma"], tau=_int_param(params, "tau"),
                lam=params["lambda"])
        return PdeModel(
            linear_terms=_term_list("linear_terms", linear_terms, 2),
            nonlinear_terms=_term_list("nonlinear_terms", nonlinear_terms, 3))
    except KeyError as e:
        raise DescriptorError(
            f"field 'params': preset {preset!r} needs parameter {e.args[0]!r}"
        ) from e
    except ValueError as e:
        if isinstance(e, DescriptorError):
            raise
        raise DescriptorError(f"field 'linear_terms'/'nonlinear_terms': {e}") \
            from e


def _int_param(params, name):
    value = params[name]
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise DescriptorError(
            f"field 'params': {name} must be a nonnegative integer, "
            f"got {params[name]!r}")
    return value


def _resolve_axis(axis, points, rng, default_points, default_range):
    if points is not None and rng is not None:
        raise DescriptorError(
            f"field '{axis}s': explicit points conflict with "
            f"{axis}min/{axis}max/n{axis}")
    if points is not None:
        values = _point_list(axis, points)
        return np.asarray(values, dtype=float)
    if rng is not None:
        lo, hi, count = rng
        if count < 1:
            raise DescriptorError(f"field 'n{axis}': must be at least 1")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise DescriptorError(
                f"field '{axis}min'/'{axis}max': need finite bounds with "
                f"{axis}min <= {axis}max")
        return np.linspace(lo, hi, count)
    if default_points is not None:
        return np.asarray(default_points, dtype=float)
    lo, hi, count = default_range
    return np.linspace(lo, hi, count)


def _point_list(axis, points):
    try:
        values = [float(v) for v in points]
    except (TypeError, ValueError):
        raise DescriptorError(
            f"field '{axis}s': must be a list of numbers") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise DescriptorError(
            f"field '{axis}s': must be nonempty with finite entries")
    return values


def _require_exact(d, command):
    if d.preset != "ks":
        raise DescriptorError(
            f"field 'preset': '{command}' compares against the exact "
            "traveling wave and needs preset \"ks\"")
    if d.initial_text is not None:
        raise DescriptorError(
            "field 'initial': the comparison commands use the built-in "
            "traveling-wave profile; leave 'initial' unset")


def _fmt(value):
    return f"{value:.9e}"


def run_table(d, fmt="text"):
    """Comparison table on the descriptor grid; returns (table, rendered)."""
    _require_exact(d, "table")
    xs, ts = d.grid()
    table = compare_table(d.wave_params(), d.order, list(xs), list(ts))
    if fmt == "csv":
        lines = [CSV_HEADER]
        lines += [",".join(_fmt(v) for v in
                           (r.x, r.t, r.rdtm, r.exact, r.abs_err))
                  for r in table.rows]
    else:
        lines = [f"{'x':>15} {'t':>15} {'rdtm':>16} {'exact':>16} "
                 f"{'abs_err':>16}"]
        lines += [f"{r.x:>15g} {r.t:>15g} {r.rdtm:>16.9e} {r.exact:>16.9e} "
                  f"{r.abs_err:>16.9e}" for r in table.rows]
    return table, "\n".join(lines) + "\n"


def run_surface(d, out_path):
    """Dense-grid CSV (row-major, x outer) written to out_path.

    Returns the number of data rows.  Output is a pure function of the
    descriptor, so repeated runs produce byte-identical files.
    """
    _require_exact(d, "surface")
    xs, ts = d.grid(default_points=None,
                    default_ranges=(DEFAULT_X_RANGE + (DEFAULT_NX,),
                                    DEFAULT_T_RANGE + (DEFAULT_NT,)))
    p = d.wave_params()
    series = build_series(d.model, ks_initial(p), d.order)
    approx = assemble_grid(series, xs, ts, p.bindings())
    exact = ks_exact_grid(p, xs, ts)
    err = np.abs(approx - exact)
    try:
        with open(out_path, "w", newline="") as handle:
            handle.write(CSV_HEADER + "\n")
            for i, x in enumerate(xs):
                for j, t in enumerate(ts):
                    handle.write(",".join(_fmt(v) for v in
                                          (x, t, approx[i, j], exact[i, j],
                                           err[i, j])) + "\n")
    except OSError as e:
        raise RuntimeError(f"cannot write {out_path}: {e}") from e
    return xs.size * ts.size


def run_convergence(d, orders, fmt="text"):
    """Max grid error and residual-decay slope per order.

    Returns (rows, rendered) where each row is (order, max_abs_err, slope).
    The slope is fitted to |residual| of the assembled approximation at
    x = 0 over t in [1e-3, 1e-1].
    """
    _require_exact(d, "convergence")
    if not orders:
        raise DescriptorError("field 'orders': must list at least one order")
    orders = sorted(set(_check_order_field(n) for n in orders))
    xs, ts = d.grid()
    p = d.wave_params()
    model = d.model
    bindings = d.bindings()
    rows = []
    for n in orders:
        table = compare_table(p, n, list(xs), list(ts))
        series = build_series(model, ks_initial(p), n)

        def u(x, t):
            return assemble(series, x, t, bindings)

        values = [residual(u, model, 0.0, t) for t in SLOPE_TIMES]
        slope = loglog_slope(SLOPE_TIMES, values)
        rows.append((n, table.max_abs_err(), slope))
    if fmt == "csv":
        lines = ["order,max_abs_err,residual_slope"]
        lines += [f"{n},{_fmt(err)},{slope:.6f}" for n, err, slope in rows]
    else:
        lines = [f"{'order':>5} {'max_abs_err':>16} {'residual_slope':>15}"]
        lines += [f"{n:>5} {err:>16.9e} {slope:>15.6f}"
                  for n, err, slope in rows]
    return rows, "\n".join(lines) + "\n"


def run_coefficients(d, fmt="text"):
    """Series coefficients as parseable text plus their values at x = 0.

    Returns (entries, rendered) with entries of (k, expression text, value
    at x = 0 under the descriptor's parameter bindings).
    """
    series = build_series(d.model, d.initial_expression(), d.order)
    bindings = d.bindings().with_x(0.0)
    entries = []
    for k in range(len(series)):
        text = to_text(series[k])
        entries.append((k, text, evaluate(series[k], bindings)))
    if fmt == "csv":
        lines = ["k,expression,value_at_x0"]
        lines += [f"{k},{text},{_fmt(value)}" for k, text, value in entries]
    else:
        lines = []
        for k, text, value in entries:
            lines.append(f"U_{k} = {text}")
            lines.append(f"U_{k}(0) = {_fmt(value)}")
    return entries, "\n".join(lines) + "\n"


def _load_descriptor_file(path):
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except OSError as e:
        raise DescriptorError(f"cannot read problem file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DescriptorError(f"problem file {path} is not valid JSON: {e}") \
            from e
    if not isinstance(raw, dict):
        raise DescriptorError(
            f"problem file {path} must hold a JSON object")
    unknown = sorted(set(raw) - _DESCRIPTOR_FIELDS)
    if unknown:
        raise DescriptorError(
            f"problem file {path}: unknown field(s) {', '.join(unknown)}")
    return raw


def _range_from(mapping, axis):
    keys = (f"{axis}min", f"{axis}max", f"n{axis}")
    present = [k for k in keys if mapping.get(k) is not None]
    if not present:
        return None
    if axis == "x":
        defaults = DEFAULT_X_RANGE + (DEFAULT_NX,)
    else:
        defaults = DEFAULT_T_RANGE + (DEFAULT_NT,)
    lo, hi, count = (mapping.get(k) if mapping.get(k) is not None else dflt
                     for k, dflt in zip(keys, defaults))
    try:
        lo, hi = float(lo), float(hi)
    except (TypeError, ValueError):
        raise DescriptorError(
            f"field '{axis}min'/'{axis}max': must be numbers") from None
    if isinstance(count, bool) or not isinstance(count, int):
        raise DescriptorError(f"field 'n{axis}': must be an integer")
    return (lo, hi, count)


def _comma_floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _comma_ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rdtm",
        description="Series solutions of u_t + (terms in u and its "
                     "x-derivatives) = 0, compared against the exact "
                     "Kuramoto-Sivashinsky traveling wave.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
            ("table", "pointwise comparison table"),
            ("surface", "dense-grid CSV for surface plots"),
            ("convergence", "max error and residual slope per order"),
            ("coefficients", "series coefficients as expression text")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--problem", metavar="FILE",
                         help="JSON problem descriptor")
        cmd.add_argument("--order", type=int, metavar="N")
        cmd.add_argument("--xs", metavar="LIST",
                         help="comma-separated x values")
        cmd.add_argument("--ts", metavar="LIST",
                         help="comma-separated t values")
        cmd.add_argument("--xmin", type=float)
        cmd.add_argument("--xmax", type=float)
        cmd.add_argument("--nx", type=int)
        cmd.add_argument("--tmin", type=float)
        cmd.add_argument("--tmax", type=float)
        cmd.add_argument("--nt", type=int)
        cmd.add_argument("--format", choices=("text", "csv"),
                         default="text", dest="fmt")
        cmd.add_argument("--out", metavar="PATH",
                         help="also write the output to this file "
                              "(required for surface)")
        if name == "convergence":
            cmd.add_argument("--orders", metavar="LIST", default="1,2,3",
                             help="comma-separated orders (default 1,2,3)")
    return parser


def _descriptor_from(args):
    raw = _load_descriptor_file(args.problem) if args.problem else {}
    try:
        if args.xs is not None:
            flag_xs = _comma_floats(args.xs)
        else:
            flag_xs = None
        flag_ts = _comma_floats(args.ts) if args.ts is not None else None
    except ValueError:
        raise DescriptorError(
            "field 'xs'/'ts': must be comma-separated numbers") from None
    flag_x_range = _range_from(
        {"xmin": args.xmin, "xmax": args.xmax, "nx": args.nx}, "x")
    flag_t_range = _range_from(
        {"tmin": args.tmin, "tmax": args.tmax, "nt": args.nt}, "t")

    xs = flag_xs if flag_xs is not None else raw.get("xs")
    ts = flag_ts if flag_ts is not None else raw.get("ts")
    x_range = flag_x_range if flag_x_range is not None \
        else _range_from(raw, "x")
    t_range = flag_t_range if flag_t_range is not None \
        else _range_from(raw, "t")
    # A flag-provided axis spec replaces both forms from the file.
    if flag_xs is not None:
        x_range = flag_x_range
    if flag_x_range is not None:
        xs = flag_xs
    if flag_ts is not None:
        t_range = flag_t_range
    if flag_t_range is not None:
        ts = flag_ts

    order = args.order if args.order is not None else raw.get("order", 2)
    xs = _point_list("x", xs) if xs is not None else None
    ts = _point_list("t", ts) if ts is not None else None
    return ProblemDescriptor(
        preset=raw.get("preset", "ks"),
        linear_terms=raw.get("linear_terms"),
        nonlinear_terms=raw.get("nonlinear_terms"),
        initial=raw.get("initial"),
        params=raw.get("params"),
        order=order,
        xs=xs, ts=ts, x_range=x_range, t_range=t_range)


def _emit(rendered, out_path):
    sys.stdout.write(rendered)
    if out_path:
        try:
            with open(out_path, "w", newline="") as handle:
                handle.write(rendered)
        except OSError as e:
            raise RuntimeError(f"cannot write {out_path}: {e}") from e


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    try:
        d = _descriptor_from(args)
        if args.command == "table":
            _, rendered = run_table(d, fmt=args.fmt)
            _emit(rendered, args.out)
        elif args.command == "surface":
            if not args.out:
                raise DescriptorError(
                    "field 'out': surface needs --out PATH for its CSV")
            count = run_surface(d, args.out)
            print(f"wrote {count} rows to {args.out}")
        elif args.command == "convergence":
            try:
                orders = _comma_ints(args.orders)
            except ValueError:
                raise DescriptorError(
                    "field 'orders': must be comma-separated integers") \
                    from None
            _, rendered = run_convergence(d, orders, fmt=args.fmt)
            _emit(rendered, args.out)
        else:
            _, rendered = run_coefficients(d, fmt=args.fmt)
            _emit(rendered, args.out)
    except DescriptorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ExprError, RuntimeError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
