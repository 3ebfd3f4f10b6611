"""Tests for 2D models, their Fourier grids, and the grid file format.

Grid synthesis is validated against the slow 2D quadrature oracle and, for
slices, against direct 1D integration of the pointwise model.
"""

import pytest
from mpmath import mp

from fourier_edge import (
    ArithmeticContext,
    Background2D,
    CoeffGrid2D,
    Curve,
    Model2D,
    TrigBackground,
    coeff_grid,
    eval2d,
    load_grid,
    quadrature2d_oracle,
    save_grid,
    slice_coeff_exact,
)

_TRIG_CURVE = Curve("trig", (0.2, 0.15 + 0.1j))
_BG = Background2D(
    ((TrigBackground((0.1, 0.2j)), TrigBackground((0.3, -0.1))),)
)


def _trig_model():
    return Model2D(
        d_model=1,
        magnitudes=(1.0, 0.5),
        curve=_TRIG_CURVE,
        background=_BG,
    )


# -- curve -------------------------------------------------------------------

def test_curve_validation():
    with pytest.raises(ValueError):
        Curve("spline")
    with pytest.raises(ValueError):
        Curve("identity", (0.1,))
    with pytest.raises(ValueError):
        Curve("trig", ())


def test_identity_curve(ctx15):
    c = Curve("identity")
    with ctx15.workprec():
        assert c.xi(1.25, ctx15) == mp.mpf(1.25)
    assert c.slope_bound() == 1.0


def test_trig_curve_eval_and_slope_bound(ctx30):
    c = _TRIG_CURVE
    with ctx30.workprec():
        for x in ("-1.5", "0.0", "2.4"):
            xm = mp.mpf(x)
            # mp.mpf(0.2), not mp.mpf("0.2"): the curve stores the float
            want = mp.mpf(0.2) + 2 * (
                mp.mpc(0.15, 0.1) * mp.expj(xm)
            ).real
            assert abs(c.xi(xm, ctx30) - want) < mp.mpf(10) ** -28
        # bound holds on a sample of derivative values
        h = mp.mpf(10) ** -8
        for x in ("-3.0", "-0.7", "1.1", "2.9"):
            xm = mp.mpf(x)
            deriv = (c.xi(xm + h, ctx30) - c.xi(xm - h, ctx30)) / (2 * h)
            assert abs(deriv) <= c.slope_bound() + 1e-6


# -- background --------------------------------------------------------------

def test_background_eval_matches_coefficient_synthesis(ctx15):
    with ctx15.workprec():
        for x, y in ((0.3, -1.0), (-2.0, 2.5)):
            direct = mp.mpc(0)
            for wx in range(-1, 2):
                for wy in range(-1, 2):
                    direct += _BG.coeff2d(wx, wy) * mp.expj(wx * x + wy * y)
            assert abs(direct.imag) < 1e-13
            assert abs(_BG.eval(x, y, ctx15) - direct.real) < 1e-13


def test_background_slice_row_consistency(ctx15):
    with ctx15.workprec():
        x, y = 0.9, -0.4
        synth = mp.mpc(0)
        for wy in range(-1, 2):
            synth += _BG.slice_row(x, wy, ctx15) * mp.expj(wy * y)
        assert abs(synth.real - _BG.eval(x, y, ctx15)) < 1e-13


def test_background_type_checking():
    with pytest.raises(TypeError):
        Background2D(((TrigBackground((1.0,)), 3.0),))


# -- model -------------------------------------------------------------------

def test_canonical_model_shape():
    m = Model2D.canonical(11)
    assert m.d_model == 11
    assert m.magnitudes == (1,) * 12
    assert m.curve.kind == "identity"
    assert m.background is None


def test_model_magnitude_count_must_match():
    with pytest.raises(ValueError):
        Model2D(2, (1.0, 1.0), Curve("identity"))


def test_magnitude_profiles(ctx15):
    prof = TrigBackground((0.5, 0.25))
    m = Model2D(1, (2.0, prof), Curve("identity"))
    with ctx15.workprec():
        assert m.magnitude_value(0, 1.0, ctx15) == 2
        want = mp.mpf("0.5") + 2 * (mp.mpf("0.25") * mp.cos(mp.mpf(1)))
        assert abs(m.magnitude_value(1, 1.0, ctx15) - want) < 1e-14
        assert m.magnitude_coeff(0, 0) == 2
        assert m.magnitude_coeff(0, 3) == 0
        assert m.magnitude_coeff(1, -1) == mp.mpc(0.25)


# -- grids -------------------------------------------------------------------

def test_grid_shape_and_indexing():
    vals = tuple(
        tuple(complex(wx, wy) for wy in range(-1, 2)) for wx in range(-2, 3)
    )
    g = CoeffGrid2D(2, 1, vals)
    assert g.c(-2, -1) == complex(-2, -1)
    assert g.c(1, 0) == complex(1, 0)
    with pytest.raises(ValueError):
        g.c(3, 0)
    row = g.row(1)
    assert row.M == 2
    assert row.c(-2) == complex(-2, 1) and row.c(2) == complex(2, 1)
    with pytest.raises(ValueError):
        CoeffGrid2D(2, 1, vals[:3])


def test_eval2d_jump_across_curve(ctx30):
    # crossing the curve from below changes the value by A_0(x)
    m = _trig_model()
    with ctx30.workprec():
        x = mp.mpf("0.6")
        xi = m.curve.xi(x, ctx30)
        h = mp.mpf(10) ** -9
        jump = eval2d(m, x, xi, ctx30) - eval2d(m, x, xi - h, ctx30)
        assert abs(jump - 1) < 1e-7


def test_slice_coeff_against_direct_y_integration():
    m = _trig_model()
    ctx = ArithmeticContext(precision_digits=20)
    with ctx.workprec():
        x = mp.mpf("0.8")
        xi = m.curve.xi(x, ctx)
        for wy in (0, 1, 3):
            ref = mp.quad(
                lambda y: eval2d(m, x, y, ctx) * mp.expj(-wy * y),
                [-mp.pi, xi, mp.pi],
            ) / (2 * mp.pi)
            got = slice_coeff_exact(m, x, wy, ctx)
            assert abs(got - ref) < 1e-15


def test_closed_form_grid_is_anti_diagonal(ctx15):
    # constant profiles concentrate the spectrum on wx + wy = 0; note the
    # all-ones stack cancels exactly at |wy| = 1 (sum of i^-(l+1) over a
    # full period), so only off-diagonal entries are asserted zero
    grid = coeff_grid(Model2D.canonical(3), 4, 2, ctx15)
    assert grid.diagnostics["method"] == "closed-form"
    for wx in range(-4, 5):
        for wy in range(-2, 3):
            if wy == 0 or wx != -wy:
                assert grid.c(wx, wy) == 0
    with ctx15.workprec():
        # hand value at wy = 2: sum_l (2i)^-(l+1) / 2pi
        want = sum(mp.mpc(0, 2) ** -(l + 1) for l in range(4)) / (2 * mp.pi)
        assert abs(grid.c(-2, 2) - want) < 1e-14
        assert grid.c(-1, 1) == 0  # the period-sum cancellation


def test_closed_form_grid_against_x_quadrature(ctx15):
    """Cross-checks grid entries against composite GL integration in x of
    the exact slice coefficients, an independent path through the algebra."""
    import numpy as np

    m = Model2D.canonical(3)
    grid = coeff_grid(m, 4, 2, ctx15)
    t, w = np.polynomial.legendre.leggauss(32)
    with ctx15.workprec():
        for wx, wy in ((1, -1), (-2, 2), (1, 1), (0, 2)):
            acc = mp.mpc(0)
            panels = 16
            h = 2 * mp.pi / panels
            for p in range(panels):
                mid = -mp.pi + p * h + h / 2
                for ti, wi in zip(t, w):
                    x = mid + h / 2 * mp.mpf(ti)
                    acc += mp.mpf(wi) * slice_coeff_exact(
                        m, x, wy, ctx15
                    ) * mp.expj(-wx * x)
            ref = acc * h / 2 / (2 * mp.pi)
            assert abs(grid.c(wx, wy) - ref) < 1e-10


def test_trapezoid_grid_against_oracle(ctx15):
    m = _trig_model()
    grid = coeff_grid(m, 4, 2, ctx15)
    assert grid.diagnostics["method"] == "trapezoid"
    assert grid.diagnostics["doubling_error"] < 1e-12
    with ctx15.workprec():
        for wx, wy in ((0, 1), (2, -1), (1, 0), (-3, 2)):
            ref = quadrature2d_oracle(m, wx, wy, ctx15)
            assert abs(grid.c(wx, wy) - ref) < 1e-8


def test_oracle_on_pure_background(ctx15):
    m = Model2D(0, (0.0,), Curve("identity"), _BG)
    with ctx15.workprec():
        for wx, wy in ((0, 0), (1, -1), (1, 1)):
            ref = quadrature2d_oracle(m, wx, wy, ctx15)
            assert abs(ref - _BG.coeff2d(wx, wy)) < 1e-10


def test_oracle_node_floor(ctx15):
    with pytest.raises(ValueError):
        quadrature2d_oracle(Model2D.canonical(1), 0, 1, ctx15, nodes=128)


def test_grid_round_trip(tmp_path, ctx30):
    m = _trig_model()
    grid = coeff_grid(m, 3, 2, ctx30)
    path = tmp_path / "grid.fec"
    save_grid(grid, path, 30)
    first = path.read_text().splitlines()[0]
    assert first.startswith("{") and '"M": 3' in first
    back = load_grid(path)
    assert back.M == 3 and back.N == 2
    with ctx30.workprec():
        worst = mp.mpf(0)
        for wx in range(-3, 4):
            for wy in range(-2, 3):
                worst = max(worst, abs(back.c(wx, wy) - grid.c(wx, wy)))
        assert worst < mp.mpf(10) ** -28
