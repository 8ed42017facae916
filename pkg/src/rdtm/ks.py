"""Benchmark problem: the Kuramoto-Sivashinsky traveling wave.

The KS equation u_t + u u_x + u_xx + u_xxxx = 0 admits the tanh-polynomial
traveling wave

    u(x,t) = c + A * (11 T^3 - 9 T),   T = tanh(kappa (x - c t - x0)),

which this module provides as initial condition (symbolic, with c, kappa, x0
kept as named constants) and as an exact-solution evaluator, together with
model constructors for the plain and generalized equation families.
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import PdeModel
from .expr import X, add, apply_fn, div, mul, named, neg, power

__all__ = [
    "KsParams", "AMPLITUDE", "DEFAULT_WAVE_NUMBER",
    "DEFAULT_X_RANGE", "DEFAULT_T_RANGE", "DEFAULT_NX", "DEFAULT_NT",
    "ks_initial", "ks_exact", "ks_exact_grid", "ks_model", "generalized_model",
]

# Profile constants: A = (5/19) * sqrt(11/19) and the default wave number
# sqrt(11/19)/4, written exactly as they are evaluated symbolically so the
# scalar and expression paths agree bitwise.
AMPLITUDE = (5.0 / 19.0) * math.sqrt(11.0 / 19.0)
DEFAULT_WAVE_NUMBER = math.sqrt(11.0 / 19.0) / 4.0

DEFAULT_X_RANGE = (-40.0, 40.0)
DEFAULT_T_RANGE = (0.0, 4.0)
DEFAULT_NX = 201
DEFAULT_NT = 101


@dataclass(frozen=True)
class KsParams:
    """Traveling-wave parameters: speed c, wave number kappa, offset x0."""

    c: float = 0.1
    kappa: float = DEFAULT_WAVE_NUMBER
    x0: float = -30.0

    def __post_init__(self):
        if self.kappa == 0.0:
            raise ValueError("wave number kappa must be nonzero")

    def bindings(self):
        return {"c": self.c, "kappa": self.kappa, "x0": self.x0}


def ks_initial(p):
    """Initial profile c + A*(11 tanh^3(kappa(x-x0)) - 9 tanh(kappa(x-x0))).

    c, kappa, and x0 stay named constants in the returned expression; bind
    them with ``p.bindings()`` when evaluating.  The amplitude A folds to a
    literal at construction.
    """
    if not isinstance(p, KsParams):
        raise TypeError("expected KsParams")
    amplitude = mul(div(5.0, 19.0), apply_fn("sqrt", div(11.0, 19.0)))
    profile = apply_fn("tanh", mul(named("kappa"), add(X, neg(named("x0")))))
    shape = add(mul(11.0, power(profile, 3)), neg(mul(9.0, profile)))
    return add(named("c"), mul(amplitude, shape))


def ks_exact(p, x, t):
    """Exact traveling-wave value at one point.

    Arithmetic mirrors the evaluation order of ks_initial so that at t = 0
    the two agree bitwise.
    """
    profile = math.tanh(p.kappa * ((x - p.c * t) - p.x0))
    shape = 11.0 * profile**3 - 9.0 * profile
    return p.c + AMPLITUDE * shape


def ks_exact_grid(p, xs, ts):
    """Exact values over a grid, shape (len(xs), len(ts)).

    Vectorised counterpart of ks_exact; may differ from the scalar path in
    the last ulp (libm vs vector transcendentals).
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    xi = (xs[:, None] - p.c * ts[None, :]) - p.x0
    profile = np.tanh(p.kappa * xi)
    shape = 11.0 * profile**3 - 9.0 * profile
    return p.c + AMPLITUDE * shape


def ks_model(gamma=1.0, lam=1.0):
    """u_t + u u_x + gamma u_xx + lam u_xxxx = 0."""
    return PdeModel(linear_terms=((gamma, 2), (lam, 4)),
                    nonlinear_terms=((1.0, 1, 1),))


def generalized_model(alpha, beta, gamma, tau, lam):
    """u_t + alpha u^beta u_x + gamma u^tau u_xx + lam u_xxxx = 0.

    beta and tau must be nonnegative integers (they become convolution
    powers).  With alpha = beta = 1 and tau = 0 this reduces to ks_model,
    which is covered by a regression test.
    """
    return PdeModel(linear_terms=((lam, 4),),
                    nonlinear_terms=((alpha, beta, 1), (gamma, tau, 2)))
