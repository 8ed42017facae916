"""Traveling-wave problem instance and model presets."""

import math

import numpy as np
import pytest

from rdtm.engine import build_series
from rdtm.expr import Bindings, X, apply_fn, evaluate
from rdtm.ks import (AMPLITUDE, DEFAULT_NT, DEFAULT_NX, DEFAULT_T_RANGE,
                     DEFAULT_WAVE_NUMBER, DEFAULT_X_RANGE, KsParams,
                     generalized_model, ks_exact, ks_exact_grid, ks_initial,
                     ks_model)

from conftest import make_rng


def test_default_parameters():
    p = KsParams()
    assert p.c == 0.1
    assert p.kappa == math.sqrt(11.0 / 19.0) / 4.0
    assert p.x0 == -30.0
    assert p.bindings() == {"c": 0.1, "kappa": DEFAULT_WAVE_NUMBER, "x0": -30.0}
    assert DEFAULT_X_RANGE == (-40.0, 40.0)
    assert DEFAULT_T_RANGE == (0.0, 4.0)
    assert (DEFAULT_NX, DEFAULT_NT) == (201, 101)


def test_zero_wave_number_rejected():
    with pytest.raises(ValueError):
        KsParams(kappa=0.0)


def test_initial_profile_reference_value():
    p = KsParams()
    got = evaluate(ks_initial(p), Bindings(x=0.0, constants=p.bindings()))
    assert abs(got - 0.500360093) < 5e-9


def test_initial_profile_is_speed_at_offset():
    # tanh(0) = 0 leaves the background speed exactly
    for p in (KsParams(), KsParams(c=0.37, x0=12.5)):
        got = evaluate(ks_initial(p), Bindings(x=p.x0, constants=p.bindings()))
        assert got == p.c


def test_initial_profile_saturates():
    p = KsParams()
    b = Bindings(constants=p.bindings())
    far = p.x0 + 50.0 / p.kappa
    high = evaluate(ks_initial(p), b.with_x(far))
    assert abs(high - (p.c + 2.0 * AMPLITUDE)) < 1e-8
    low = evaluate(ks_initial(p), b.with_x(p.x0 - 50.0 / p.kappa))
    assert abs(low - (p.c - 2.0 * AMPLITUDE)) < 1e-8


def test_exact_solution_reference_value():
    assert abs(ks_exact(KsParams(), 1.0, 0.0) - 0.500393690) < 5e-9


def test_exact_solution_matches_initial_data_at_t0():
    # identical floating-point path: equality is exact, not approximate
    p = KsParams()
    f = ks_initial(p)
    b = Bindings(constants=p.bindings())
    for x in np.linspace(-40.0, 40.0, 201):
        assert ks_exact(p, float(x), 0.0) == evaluate(f, b.with_x(float(x)))


def test_traveling_wave_identity():
    # u depends on x - ct only; the wave crosses zero near the front, so the
    # comparison carries an absolute floor
    p = KsParams()
    rng = make_rng(149)
    for _ in range(50):
        x = rng.uniform(-40.0, 40.0)
        t = rng.uniform(0.0, 4.0)
        delta = rng.uniform(-2.0, 2.0)
        a = ks_exact(p, x, t)
        c = ks_exact(p, x - p.c * delta, t - delta)
        assert abs(a - c) <= 1e-14 * max(1.0, abs(c))


def test_exact_grid_matches_scalar():
    p = KsParams()
    xs = np.linspace(-40.0, 40.0, 81)
    ts = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
    grid = ks_exact_grid(p, xs, ts)
    assert grid.shape == (81, 5)
    for i in (0, 17, 40, 63, 80):
        for j in range(5):
            want = ks_exact(p, float(xs[i]), float(ts[j]))
            assert abs(grid[i, j] - want) <= 5e-15 * max(1.0, abs(want))


def test_ks_model_structure():
    m = ks_model()
    assert [(t.coefficient, t.derivative_order) for t in m.linear_terms] == \
        [(1.0, 2), (1.0, 4)]
    assert [(t.coefficient, t.u_power, t.derivative_order)
            for t in m.nonlinear_terms] == [(1.0, 1, 1)]
    m2 = ks_model(0.5, 2.0)
    assert m2.linear_terms[0].coefficient == 0.5
    assert m2.linear_terms[1].coefficient == 2.0


def test_generalized_model_structure():
    m = generalized_model(2.0, 2, 1.0, 1, 1.5)
    assert [(t.coefficient, t.derivative_order) for t in m.linear_terms] == \
        [(1.5, 4)]
    assert [(t.coefficient, t.u_power, t.derivative_order)
            for t in m.nonlinear_terms] == [(2.0, 2, 1), (1.0, 1, 2)]
    with pytest.raises(ValueError):
        generalized_model(1.0, -1, 1.0, 0, 1.0)
    with pytest.raises(ValueError):
        generalized_model(1.0, 1, 1.0, 0.5, 1.0)


def test_generalized_first_coefficient_hand_check():
    # u_t + 2u²u_x + u u_xx + u_xxxx = 0 with u_0 = sin x:
    # U_1 = -(2 sin²x cos x + sin x·(-sin x) + sin x)
    s = build_series(generalized_model(2.0, 2, 1.0, 1, 1.0),
                     apply_fn("sin", X), 1)
    rng = make_rng(151)
    for _ in range(10):
        x = rng.uniform(-4.0, 4.0)
        sin, cos = math.sin(x), math.cos(x)
        want = -(2.0 * sin * sin * cos - sin * sin + sin)
        got = evaluate(s[1], Bindings(x=x))
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_generalized_with_zero_alpha_is_linear_pde():
    # u_t + γ u_xx + λ u_xxxx = 0 via the u^0 convolution route:
    # with u_0 = sin x every coefficient stays a multiple of sin x
    gamma, lam = 0.7, 1.3
    s = build_series(generalized_model(0.0, 2, gamma, 0, lam),
                     apply_fn("sin", X), 1)
    rng = make_rng(157)
    for _ in range(10):
        x = rng.uniform(-4.0, 4.0)
        want = (gamma - lam) * math.sin(x)
        got = evaluate(s[1], Bindings(x=x))
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))
