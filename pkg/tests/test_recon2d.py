"""Two-stage 2D pipeline tests.

The canonical identity-curve model keeps every grid row one-sparse, which
makes the row stage exact to working precision; slice-stage tolerances
below come from measured behavior with a wide margin.
"""

import pytest
from mpmath import mp

from fourier_edge import (
    ArithmeticContext,
    CoeffGrid2D,
    LocalizationError,
    Model2D,
    coeff_grid,
    reconstruct_field,
    reconstruct_psi_set,
    reconstruct_slice,
    slice_coeff_vector,
    truncated_baseline,
)
from fourier_edge.model2d import slice_coeff_exact


@pytest.fixture(scope="module")
def ctx40():
    return ArithmeticContext(precision_digits=40)


@pytest.fixture(scope="module")
def canonical_grid(ctx40):
    # N = 12, M = 144: smallest sweep geometry with a non-degenerate slice
    # stage at order 9
    return coeff_grid(Model2D.canonical(11), 144, 12, ctx40)


def test_row_stage_reconstructs_all_rows(canonical_grid, ctx40):
    psi = reconstruct_psi_set(canonical_grid, 9, ctx40)
    assert not psi.degraded
    assert set(psi.rows) == set(range(-12, 13))


def test_row_values_match_exact_slices(canonical_grid, ctx40):
    m = Model2D.canonical(11)
    psi = reconstruct_psi_set(canonical_grid, 9, ctx40)
    with ctx40.workprec():
        for wy in (-5, 1, 12):
            for x in ("-2.1", "0.7"):
                want = slice_coeff_exact(m, mp.mpf(x), wy, ctx40)
                got = psi.row_value(wy, mp.mpf(x), ctx40)
                # one-sparse rows put the row stage in its exact class
                assert abs(got - want) < mp.mpf(10) ** -30


def test_degraded_rows_fall_back_to_raw_series(ctx40):
    # M = 4 cannot host the order-9 known-jump decimation, so every row
    # degrades and row_value must equal the plain truncated series
    grid = coeff_grid(Model2D.canonical(11), 4, 3, ctx40)
    psi = reconstruct_psi_set(grid, 9, ctx40)
    assert set(psi.degraded) == set(range(-3, 4))
    assert all("LocalizationError" in r for r in psi.degraded.values())
    with ctx40.workprec():
        x = mp.mpf("0.4")
        for wy in (-2, 1):
            row = grid.row(wy)
            direct = sum(
                mp.mpc(row.c(k)) * mp.expj(k * x) for k in range(-4, 5)
            )
            assert abs(psi.row_value(wy, x, ctx40) - direct) < mp.mpf(10) ** -35


def test_slice_vector_matches_exact_coefficients(canonical_grid, ctx40):
    m = Model2D.canonical(11)
    psi = reconstruct_psi_set(canonical_grid, 9, ctx40)
    with ctx40.workprec():
        vec = slice_coeff_vector(psi, mp.mpf("1.1"), ctx40)
        assert vec.M == 12
        for wy in range(-12, 13):
            want = slice_coeff_exact(m, mp.mpf("1.1"), wy, ctx40)
            assert abs(vec.c(wy) - want) < mp.mpf(10) ** -30


def test_slice_reconstruction_accuracy(canonical_grid, ctx40):
    psi = reconstruct_psi_set(canonical_grid, 9, ctx40)
    sl = reconstruct_slice(psi, 1.1, 9, ctx40)
    with ctx40.workprec():
        # fitting order 9 to the order-11 stack leaves a location plateau
        # near 1e-7 at N = 12 (measured 7.6e-8) and magnitude errors that
        # scale like N^(l-10): sharp at the bottom of the stack, order one
        # at the top
        assert abs(sl.xi_tilde - mp.mpf(1.1)) < 1e-6
        assert sl.degraded_rows == ()
        assert abs(sl.magnitudes_tilde[0] - 1) < 1e-4
        assert abs(sl.magnitudes_tilde[2] - 1) < 1e-2
        assert abs(sl.magnitudes_tilde[9] - 1) < 50


def test_slice_stage_requires_wide_band(ctx40):
    # N = 8 < d + 2 = 11: no decimation step available
    grid = coeff_grid(Model2D.canonical(11), 64, 8, ctx40)
    psi = reconstruct_psi_set(grid, 9, ctx40)
    with pytest.raises(LocalizationError):
        reconstruct_slice(psi, 1.1, 9, ctx40)


def test_field_reconstruction_and_diagnostics(canonical_grid, ctx40):
    fld = reconstruct_field(
        canonical_grid, d_psi=9, d=9, x_points=(0.7, 1.1), ctx=ctx40
    )
    assert not fld.failures
    curve = fld.xi_curve()
    assert [x for x, _ in curve] == [0.7, 1.1]
    for x, xi in curve:
        assert abs(xi - x) < 1e-6  # identity curve
    assert fld.diagnostics["degraded_rows"] == []
    with pytest.raises(KeyError):
        fld.value(0.123, 0.0, ctx40)


def test_field_warns_when_underresolved(ctx40):
    grid = coeff_grid(Model2D.canonical(11), 8, 4, ctx40)
    with pytest.warns(UserWarning, match="under-resolved"):
        reconstruct_field(grid, d_psi=9, d=2, x_points=(), ctx=ctx40)


def test_failed_slices_are_contained(ctx40):
    # zero grid: the slice stage cannot localize anything, but the call
    # must return with the failure recorded instead of raising
    zero = CoeffGrid2D(
        12, 3, tuple(tuple(0 for _ in range(7)) for _ in range(25))
    )
    fld = reconstruct_field(zero, d_psi=1, d=1, x_points=(0.5,), ctx=ctx40)
    assert not fld.slices
    assert set(fld.failures) == {0.5}


def test_truncated_baseline_equals_dense_sum(ctx40):
    grid = coeff_grid(Model2D.canonical(5), 9, 3, ctx40)
    with ctx40.workprec():
        x, y = mp.mpf("1.3"), mp.mpf("-0.9")
        dense = mp.mpc(0)
        for wx in range(-9, 10):
            for wy in range(-3, 4):
                dense += mp.mpc(grid.c(wx, wy)) * mp.expj(wx * x + wy * y)
        got = truncated_baseline(grid, x, y, ctx40)
        assert abs(got - dense.real) < mp.mpf(10) ** -35


def test_parallel_rows_match_serial(ctx40):
    grid = coeff_grid(Model2D.canonical(5), 36, 6, ctx40)
    serial = reconstruct_psi_set(grid, 5, ctx40, jobs=1)
    parallel = reconstruct_psi_set(grid, 5, ctx40, jobs=2)
    assert set(serial.rows) == set(parallel.rows)
    with ctx40.workprec():
        for wy in serial.rows:
            a, b = serial.rows[wy], parallel.rows[wy]
            assert a.xi_tilde == b.xi_tilde
            assert a.magnitudes_tilde == b.magnitudes_tilde
