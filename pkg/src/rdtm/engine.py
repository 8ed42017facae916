"""Series recurrence engine.

A solution is represented as a power series in time, u(x,t) = sum U_k(x) t^k,
and the PDE u_t = -(linear + nonlinear terms) turns into an explicit
recurrence on the coefficient functions U_k.  This module holds the transform
rules for the operations that appear on the right-hand side (products,
powers, shifts, derivatives in x and t), the recurrence step itself, and the
assembly of truncated approximations.

Coefficients are symbolic expressions, so one build serves any evaluation
grid afterwards.
"""

from dataclasses import dataclass

import numpy as np

from .expr import (Expr, X, add, const, differentiate, evaluate,
                   evaluate_many, mul, power)

__all__ = [
    "SpectrumSeries", "PdeModel", "LinearTerm", "NonlinearTerm",
    "MAX_DERIVATIVE_ORDER", "MAX_SERIES_ORDER",
    "cauchy_product", "power_convolution", "time_derivative_transform",
    "monomial_shift", "spatial_derivative", "recurrence_step",
    "build_series", "assemble", "assemble_grid",
]

MAX_DERIVATIVE_ORDER = 8
MAX_SERIES_ORDER = 6


@dataclass(frozen=True)
class LinearTerm:
    """coefficient * d^order u / dx^order"""

    coefficient: float
    derivative_order: int

    def __post_init__(self):
        _check_order(self.derivative_order, minimum=0)


@dataclass(frozen=True)
class NonlinearTerm:
    """coefficient * u^u_power * d^order u / dx^order"""

    coefficient: float
    u_power: int
    derivative_order: int

    def __post_init__(self):
        _check_order(self.derivative_order, minimum=0)
        if not isinstance(self.u_power, int) or self.u_power < 0:
            raise ValueError(f"u_power must be a nonnegative int, got {self.u_power!r}")


def _check_order(m, minimum):
    if not isinstance(m, int) or m < minimum or m > MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"derivative order must be an int in [{minimum}, {MAX_DERIVATIVE_ORDER}],"
            f" got {m!r}")


@dataclass(frozen=True)
class PdeModel:
    """Right-hand side structure of u_t + sum(terms) = 0."""

    linear_terms: tuple
    nonlinear_terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "linear_terms", tuple(
            t if isinstance(t, LinearTerm) else LinearTerm(*t)
            for t in self.linear_terms))
        object.__setattr__(self, "nonlinear_terms", tuple(
            t if isinstance(t, NonlinearTerm) else NonlinearTerm(*t)
            for t in self.nonlinear_terms))


@dataclass(frozen=True)
class SpectrumSeries:
    """Time-Taylor coefficients U_0..U_n of a solution; entry k is U_k(x)."""

    coefficients: tuple

    def __post_init__(self):
        kids = tuple(self.coefficients)
        if not kids or not all(isinstance(c, Expr) for c in kids):
            raise ValueError("coefficients must be a nonempty sequence of Expr")
        object.__setattr__(self, "coefficients", kids)

    @property
    def order(self):
        return len(self.coefficients) - 1

    def __getitem__(self, k):
        if not isinstance(k, int) or k < 0 or k > self.order:
            raise IndexError(f"coefficient index {k!r} outside 0..{self.order}")
        return self.coefficients[k]

    def __len__(self):
        return len(self.coefficients)


def _check_index(k, limit, what="series index"):
    if not isinstance(k, int) or k < 0 or k > limit:
        raise IndexError(f"{what} {k!r} outside 0..{limit}")


def cauchy_product(a, b, k):
    """k-th coefficient of the series product: sum_{r=0}^{k} A_r * B_{k-r}."""
    _check_index(k, min(a.order, b.order))
    return add(*(mul(a[r], b[k - r]) for r in range(k + 1)))


def power_convolution(a, p, k):
    """k-th coefficient of u^p via repeated convolution.

    p = 0 is the series of the constant function 1; p = 1 returns A_k.
    """
    if not isinstance(p, int) or p < 0:
        raise ValueError(f"power must be a nonnegative int, got {p!r}")
    _check_index(k, a.order)
    if p == 0:
        return const(1.0) if k == 0 else const(0.0)
    current = list(a.coefficients[: k + 1])
    for _ in range(p - 1):
        current = [
            add(*(mul(current[r], a[i - r]) for r in range(i + 1)))
            for i in range(k + 1)
        ]
    return current[k]


def time_derivative_transform(a, r, k):
    """Coefficient k of d^r u/dt^r: ((k+r)!/k!) * A_{k+r}."""
    if not isinstance(r, int) or r < 1:
        raise ValueError(f"time-derivative order must be a positive int, got {r!r}")
    _check_index(k, a.order - r)
    factor = 1
    for i in range(1, r + 1):
        factor *= k + i
    return mul(const(float(factor)), a[k + r])


def monomial_shift(a, m, p, k):
    """Coefficient k of x^m t^p u: x^m * A_{k-p}, zero when k < p."""
    if not isinstance(m, int) or m < 0:
        raise ValueError(f"x power must be a nonnegative int, got {m!r}")
    if not isinstance(p, int) or p < 0:
        raise ValueError(f"t power must be a nonnegative int, got {p!r}")
    _check_index(k, a.order + p)
    if k < p:
        return const(0.0)
    return mul(power(X, m), a[k - p])


def spatial_derivative(a, m, k):
    """Coefficient k of d^m u/dx^m: the m-th x-derivative of A_k."""
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"spatial order must be a positive int, got {m!r}")
    _check_index(k, a.order)
    return differentiate(a[k], m)


def _dx(e, m):
    return e if m == 0 else differentiate(e, m)


def recurrence_step(u, model, k):
    """Next coefficient U_{k+1} from U_0..U_k.

    U_{k+1} = -1/(k+1) * [ sum_j c_j * d^{m_j}U_k/dx^{m_j}
                         + sum_i a_i * sum_{r=0}^{k} (u^{p_i})_r * d^{d_i}U_{k-r}/dx^{d_i} ]
    """
    _check_index(k, u.order)
    terms = []
    for lt in model.linear_terms:
        terms.append(mul(const(lt.coefficient), _dx(u[k], lt.derivative_order)))
    for nt in model.nonlinear_terms:
        contributions = [
            mul(power_convolution(u, nt.u_power, r),
                _dx(u[k - r], nt.derivative_order))
            for r in range(k + 1)
        ]
        terms.append(mul(const(nt.coefficient), add(*contributions)))
    if not terms:
        return const(0.0)
    return mul(const(-1.0 / (k + 1)), add(*terms))


def build_series(model, f, n):
    """Series U_0 = f, U_{k+1} by recurrence, up to order n (cap 6)."""
    if not isinstance(n, int) or n < 0 or n > MAX_SERIES_ORDER:
        raise ValueError(f"order must be an int in [0, {MAX_SERIES_ORDER}], got {n!r}")
    if not isinstance(f, Expr):
        raise ValueError("initial condition must be an Expr")
    coefficients = [f]
    for k in range(n):
        coefficients.append(
            recurrence_step(SpectrumSeries(tuple(coefficients)), model, k))
    return SpectrumSeries(tuple(coefficients))


def assemble(s, x, t, bindings):
    """Value of the truncated series at one point, by Horner in t.

    At t = 0 this returns exactly the evaluated initial condition.
    """
    b = bindings.with_x(x)
    if t == 0.0:
        return evaluate(s.coefficients[0], b)
    acc = evaluate(s.coefficients[-1], b)
    for coefficient in reversed(s.coefficients[:-1]):
        acc = acc * t + evaluate(coefficient, b)
    return acc


def assemble_grid(s, xs, ts, constants=None):
    """Truncated-series values on a grid, shape (len(xs), len(ts)).

    Each coefficient is evaluated once over xs with the vectorised
    evaluator (which may differ from scalar evaluation in the last ulp),
    then combined per t by Horner's rule.
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    values = [evaluate_many(c, xs, constants) for c in s.coefficients]
    out = np.empty((xs.size, ts.size), dtype=float)
    for j, t in enumerate(ts):
        acc = values[-1].copy()
        for k in range(len(values) - 2, -1, -1):
            acc = acc * t + values[k]
        out[:, j] = acc
    return out
