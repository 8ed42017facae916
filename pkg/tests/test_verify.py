"""Finite-difference oracles, residuals, and the comparison table."""

import math

import pytest

from rdtm.engine import PdeModel
from rdtm.expr import Bindings, differentiate, evaluate, parse
from rdtm.ks import KsParams, ks_initial, ks_model
from rdtm.verify import (ErrorRow, ErrorTable, FD_DEFAULT_STEPS,
                         compare_table, fd_derivative, loglog_slope, residual,
                         series_product_oracle)

from conftest import make_rng


# ---------------------------------------------------------------------------
# fd_derivative.

def test_fd_identity_function():
    for x in (-7.0, 0.0, 0.3, 12.0):
        assert abs(fd_derivative(lambda v: v, x, 1) - 1.0) < 1e-10


def test_fd_quartic_fourth_derivative():
    # the stencil is exact on quartics; only roundoff remains
    assert abs(fd_derivative(lambda v: v**4, 0.0, 4) - 24.0) < 1e-6


def test_fd_matches_symbolic_on_wave_profile():
    # far from the front the 4th derivative is ~1e-6; the default step is
    # sized to keep roundoff (amplified by 1/h^4) below it
    p = KsParams()
    f = ks_initial(p)
    b = Bindings(constants=p.bindings())
    sym = evaluate(differentiate(f, 4), b.with_x(0.0))
    fd = fd_derivative(lambda v: evaluate(f, b.with_x(v)), 0.0, 4)
    assert abs(fd - sym) <= 1e-5 * abs(sym)


def test_fd_gentle_tanh_first_derivative():
    e = parse("tanh(0.25 * x)")
    d = differentiate(e)
    sym = evaluate(d, Bindings(x=1.0))
    fd = fd_derivative(lambda v: evaluate(e, Bindings(x=v)), 1.0, 1)
    assert abs(fd - sym) <= 1e-6 * abs(sym)


def test_fd_validation():
    with pytest.raises(ValueError):
        fd_derivative(lambda v: v, 0.0, 0)
    with pytest.raises(ValueError):
        fd_derivative(lambda v: v, 0.0, 5)
    with pytest.raises(ValueError):
        fd_derivative(lambda v: v, 0.0, 1, h=0.0)
    with pytest.raises(ValueError):
        fd_derivative(lambda v: v, 0.0, 1, h=-1e-3)
    assert set(FD_DEFAULT_STEPS) == {1, 2, 3, 4}


# ---------------------------------------------------------------------------
# residual.

EMPTY = PdeModel((), ())

ROOT = math.sqrt(11.0 / 19.0)


def literature_wave(c=0.1, x0=-30.0):
    """Closed-form traveling wave that satisfies u_t + uu_x + u_xx + u_xxxx = 0.

    Amplitude 15/19*sqrt(11/19) and wave number sqrt(11/19)/2; verified to
    50 digits with arbitrary-precision arithmetic.
    """
    amplitude = 15.0 / 19.0 * ROOT
    kappa = 0.5 * ROOT

    def u(x, t):
        profile = math.tanh(kappa * ((x - c * t) - x0))
        return c + amplitude * (11.0 * profile**3 - 9.0 * profile)

    return u


def test_residual_of_constant_is_zero():
    r = residual(lambda x, t: 0.7, ks_model(), -3.0, 1.5)
    assert abs(r) < 1e-12
    r0 = residual(lambda x, t: 0.7, ks_model(), 0.0, 0.0)
    assert abs(r0) < 1e-12


def test_residual_time_derivative_branches():
    # empty model leaves only u_t; u linear in t makes both the one-sided
    # (t < 2h) and the central branch exact up to roundoff
    u = lambda x, t: math.sin(x) * (1.0 + t)
    for t in (0.0, 1e-5, 1.0):
        r = residual(u, EMPTY, 0.7, t)
        assert abs(r - math.sin(0.7)) < 1e-8, t


def test_residual_certifies_literature_wave():
    # a genuine solution must pass the oracle everywhere, front included;
    # this wave is twice as sharp as the benchmark profile, so the spatial
    # step needs to come down for the truncation term at the front
    u = literature_wave()
    model = ks_model()
    for x in (-40.0, -33.0, -31.0, -30.0, -29.0, -27.0, -24.0, 0.0, 20.0):
        r = residual(u, model, x, 1.0, x_step=5e-2)
        assert abs(r) < 1e-5, x
    # defaults are fine away from the front
    for x in (-40.0, -10.0, 0.0, 20.0):
        assert abs(residual(u, model, x, 1.0)) < 1e-5, x
    # one-sided time branch at the moving front
    assert abs(residual(u, model, -30.0, 0.0, x_step=5e-2)) < 1e-5


def test_residual_zeroth_order_terms():
    # u_t + 2u + 3u*u = 0 residual at u = constant 0.5: 0 + 1.0 + 0.75
    model = PdeModel(linear_terms=((2.0, 0),), nonlinear_terms=((3.0, 1, 0),))
    r = residual(lambda x, t: 0.5, model, 1.0, 1.0)
    assert abs(r - (1.0 + 0.75)) < 1e-10


def test_residual_rejects_high_order_models():
    model = PdeModel(linear_terms=((1.0, 5),), nonlinear_terms=())
    with pytest.raises(ValueError):
        residual(lambda x, t: x, model, 0.0, 1.0)


# ---------------------------------------------------------------------------
# series_product_oracle.

def test_product_oracle_examples():
    assert series_product_oracle([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 2) == 3.0
    rng = make_rng(163)
    b = [rng.uniform(-2.0, 2.0) for _ in range(3)]
    for k in range(3):
        assert series_product_oracle([1.0, 0.0, 0.0], b, k) == b[k]


def test_product_oracle_index_errors():
    with pytest.raises(IndexError) as info:
        series_product_oracle([1.0, 2.0], [3.0, 4.0, 5.0], 2)
    assert "lengths 2, 3" in str(info.value)
    with pytest.raises(IndexError):
        series_product_oracle([1.0], [1.0], -1)
    with pytest.raises(IndexError):
        series_product_oracle([1.0], [1.0], 0.5)


def test_product_oracle_is_a_convolution():
    rng = make_rng(167)
    for _ in range(20):
        a = [rng.uniform(-3.0, 3.0) for _ in range(7)]
        b = [rng.uniform(-3.0, 3.0) for _ in range(7)]
        for k in range(7):
            want = sum(a[r] * b[k - r] for r in range(k + 1))
            got = series_product_oracle(a, b, k)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# compare_table.

def test_compare_table_shape_and_order():
    p = KsParams()
    table = compare_table(p, 2, [1.0, 0.0, 0.5], [1.0, 0.5, 0.0])
    assert len(table.rows) == 9
    assert table.order == 2 and table.params is p
    keys = [(row.x, row.t) for row in table.rows]
    assert keys == sorted(keys)
    for row in table.rows:
        assert row.abs_err == abs(row.rdtm - row.exact)


def test_compare_table_is_exact_at_t0():
    table = compare_table(KsParams(), 2, [0.0, 0.5, 1.0], [0.0])
    for row in table.rows:
        assert row.abs_err < 1e-12


def test_compare_table_improves_with_order():
    p = KsParams()
    worse = compare_table(p, 1, [0.0, 0.5, 1.0], [0.5]).max_abs_err()
    better = compare_table(p, 2, [0.0, 0.5, 1.0], [0.5]).max_abs_err()
    assert better <= worse


def test_compare_table_validation():
    with pytest.raises(ValueError):
        compare_table(KsParams(), 2, [], [0.0])
    with pytest.raises(ValueError):
        compare_table(KsParams(), 2, [0.0], [])


def test_error_table_must_be_nonempty():
    with pytest.raises(ValueError):
        ErrorTable((), KsParams(), 2)


def test_error_table_max():
    rows = (ErrorRow(0.0, 0.0, 1.0, 1.5, 0.5),
            ErrorRow(0.0, 1.0, 1.0, 1.2, 0.2))
    assert ErrorTable(rows, KsParams(), 1).max_abs_err() == 0.5


# ---------------------------------------------------------------------------
# loglog_slope.

def test_loglog_slope_recovers_power_law():
    ts = [1e-3, 1e-2, 1e-1, 1.0]
    values = [t**3 for t in ts]
    assert abs(loglog_slope(ts, values) - 3.0) < 1e-12


def test_loglog_slope_validation():
    with pytest.raises(ValueError):
        loglog_slope([1.0], [1.0])
    with pytest.raises(ValueError):
        loglog_slope([1.0, -2.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        loglog_slope([1.0, 2.0], [1.0, 0.0])
