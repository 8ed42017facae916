"""Independent numerical checks for the series engine.

Everything here works on plain numbers and callables: finite-difference
derivatives, PDE residuals of an approximate solution, a loop-based series
product, and the error table comparing assembled series values against the
closed-form traveling wave.  None of it touches the expression machinery,
so agreement between the two paths is meaningful evidence.
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import assemble, build_series
from .expr import Bindings
from .ks import KsParams, ks_exact, ks_initial, ks_model

__all__ = [
    "ErrorRow", "ErrorTable", "FD_DEFAULT_STEPS",
    "fd_derivative", "residual", "series_product_oracle",
    "compare_table", "loglog_slope",
]

# Step sizes balancing truncation against roundoff for smooth profiles of
# unit scale.  Higher orders divide by h^order, so they need a much larger
# step before roundoff noise (~1e-16 * f / h^order) drops under the target
# accuracy; 1e-3 across the board would bury orders >= 2 in noise.
FD_DEFAULT_STEPS = {1: 1e-2, 2: 5e-2, 3: 1e-1, 4: 3e-1}

# Central stencils of second-order accuracy, (offset, weight) pairs, to be
# divided by h**order.  One Richardson step lifts them to O(h^4).
_STENCILS = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def _central(f, x, order, h):
    acc = 0.0
    for offset, weight in _STENCILS[order]:
        acc += weight * (f(x + offset * h) if offset else f(x))
    return acc / h**order


def fd_derivative(f, x, order, h=None):
    """Estimate f^(order)(x) by central differences plus one Richardson step.

    f must be evaluable on [x - 4h, x + 4h].  The default step depends on
    the order (see FD_DEFAULT_STEPS); pass h explicitly for functions whose
    scale or smoothness makes the default a poor fit.  Error is O(h^4) for
    smooth f.
    """
    if order not in _STENCILS:
        raise ValueError(f"derivative order must be in 1..4, got {order!r}")
    if h is None:
        h = FD_DEFAULT_STEPS[order]
    if not (isinstance(h, (int, float)) and h > 0 and math.isfinite(h)):
        raise ValueError(f"step must be a positive finite number, got {h!r}")
    coarse = _central(f, x, order, h)
    fine = _central(f, x, order, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def _dt(u, x, t, h):
    # Forward 2nd-order one-sided difference keeps the stencil inside t >= 0
    # near the initial time; away from it, central + Richardson.
    if t < 2.0 * h:
        return (-3.0 * u(x, t) + 4.0 * u(x, t + h) - u(x, t + 2.0 * h)) / (2.0 * h)
    return fd_derivative(lambda s: u(x, s), t, 1, h)


def residual(u, model, x, t, x_step=None, t_step=1e-4):
    """Numeric value of u_t + sum(model terms) for a callable u(x, t).

    Spatial derivatives use fd_derivative with x_step (or the per-order
    defaults); the time derivative uses step t_step, switching to one-sided
    differences for t < 2*t_step so the residual exists at t = 0.
    Model terms must stay within derivative order 4.
    """
    total = _dt(u, x, t, t_step)
    u_here = None
    for lt in model.linear_terms:
        if lt.derivative_order == 0:
            if u_here is None:
                u_here = u(x, t)
            total += lt.coefficient * u_here
        else:
            _require_fd_order(lt.derivative_order)
            total += lt.coefficient * fd_derivative(
                lambda s: u(s, t), x, lt.derivative_order, x_step)
    for nt in model.nonlinear_terms:
        if u_here is None:
            u_here = u(x, t)
        if nt.derivative_order == 0:
            factor = u_here
        else:
            _require_fd_order(nt.derivative_order)
            factor = fd_derivative(lambda s: u(s, t), x, nt.derivative_order, x_step)
        total += nt.coefficient * u_here**nt.u_power * factor
    return total


def _require_fd_order(m):
    if m not in _STENCILS:
        raise ValueError(
            f"residual supports derivative orders up to 4, model has {m}")


def series_product_oracle(a, b, k):
    """k-th product coefficient sum_{r<=k} a[r]*b[k-r], plain float loops."""
    if not isinstance(k, int) or k < 0 or k >= min(len(a), len(b)):
        raise IndexError(
            f"index {k!r} out of range for lengths {len(a)}, {len(b)}")
    total = 0.0
    for r in range(k + 1):
        total += a[r] * b[k - r]
    return total


@dataclass(frozen=True)
class ErrorRow:
    x: float
    t: float
    rdtm: float
    exact: float
    abs_err: float


@dataclass(frozen=True)
class ErrorTable:
    """Comparison rows ordered by (x, then t), plus the run's inputs."""

    rows: tuple
    params: KsParams
    order: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ValueError("error table must be nonempty")

    def max_abs_err(self):
        return max(row.abs_err for row in self.rows)


def compare_table(p, n, xs, ts):
    """Assembled order-n values against the exact traveling wave.

    One row per (x, t) pair of the Cartesian product, rows sorted by x then
    t.  The absolute error column is computed from the other two, so the
    table is self-consistent by construction.
    """
    if not xs or not ts:
        raise ValueError("xs and ts must be nonempty")
    series = build_series(ks_model(), ks_initial(p), n)
    bindings = Bindings(constants=p.bindings())
    rows = []
    for x in sorted(float(v) for v in xs):
        for t in sorted(float(v) for v in ts):
            approx = assemble(series, x, t, bindings)
            exact = ks_exact(p, x, t)
            rows.append(ErrorRow(x, t, approx, exact, abs(approx - exact)))
    return ErrorTable(tuple(rows), p, n)


def loglog_slope(ts, values):
    """Least-squares slope of log10|values| against log10(ts)."""
    ts = np.asarray(ts, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if ts.size < 2:
        raise ValueError("need at least two samples for a slope")
    if np.any(ts <= 0.0) or np.any(values <= 0.0):
        raise ValueError("slope needs positive times and nonzero values")
    return float(np.polyfit(np.log10(ts), np.log10(values), 1)[0])
