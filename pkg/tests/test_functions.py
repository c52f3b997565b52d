'''

f-biharmonic functions have three sources of truth: harmonic weights (f·Δu
must be harmonic), the 1-D closed forms, and the periodic grid where only
constants survive.

solve_1d and the closed forms use different integration constants, so they
are compared modulo an affine function. The comparison is done on the
quadrature grid itself, where no interpolation is involved.

'''

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbiharm import functions, numdiff
from fbiharm.errors import GridTooLarge, InvalidInput, NonPositiveWeight
from fbiharm.functions import TorusOperator
from fbiharm.numdiff import DEFAULT_FD, ScalarField, SingularSet, power_field


def norm_squared():
    return ScalarField(3, lambda p: np.sum(p * p, axis=1), name='|x|²')


def dipole():
    return ScalarField(3, lambda p: p[:, 0] / np.sum(p * p, axis=1), SingularSet.origin(3))


def one():
    return ScalarField(3, lambda p: np.ones(len(p)), positivity_required=True)


def test_harmonic_weight_makes_norm_squared_f_biharmonic():
    assert functions.f_biharmonic_residual(norm_squared(), power_field(3, -1),
                                           (1.0, 1.0, 1.0)) < 1e-5


def test_dipole_is_f_biharmonic_for_norm_weight():
    assert functions.f_biharmonic_residual(dipole(), power_field(3, 1), (1.0, 0.0, 0.0)) < 1e-4


def test_unit_weight_gives_bilaplacian():
    assert functions.f_biharmonic_residual(norm_squared(), one(), (1.0, 2.0, 3.0)) < 1e-8
    quartic = ScalarField(3, lambda p: np.sum(p * p, axis=1) ** 2)
    assert functions.f_biharmonic_residual(quartic, one(), (1.0, 0.0, 0.0)) == pytest.approx(
        120.0, abs=1e-3)


def test_non_harmonic_weight_is_detected():
    # Δ(6|x|) = 12/|x|
    value = functions.f_biharmonic_residual(norm_squared(), power_field(3, 1), (1.0, 0.0, 0.0))
    assert value > 1e-2
    assert value == pytest.approx(12.0, abs=1e-4)


def test_residual_factorizes_through_product_field():
    u = ScalarField(3, lambda p: p[:, 0] ** 3 * p[:, 1] + np.sin(p[:, 2]))
    f = ScalarField(3, lambda p: 2.0 + np.cos(p[:, 0]), positivity_required=True)
    x = (0.3, -0.4, 0.8)
    w = numdiff.product_field(f, numdiff.laplacian_field(u, DEFAULT_FD, wide=True))
    direct = abs(numdiff.laplacian(w, x, DEFAULT_FD.wide()))
    assert functions.f_biharmonic_residual(u, f, x) == pytest.approx(direct, abs=1e-10)


def test_residual_needs_positive_weight():
    f = ScalarField(3, lambda p: p[:, 0], positivity_required=True, name='x¹')
    with pytest.raises(NonPositiveWeight):
        functions.f_biharmonic_residual(norm_squared(), f, (-1.0, 0.0, 0.0))


@pytest.mark.parametrize(('which', 'A', 'B', 'interval'), (
    ('exponential', 1.0, 0.0, (0.0, 1.0)),
    ('rational', 0.0, 1.0, (0.0, 1.0)),
    ('rational', 1.0, 1.0, (0.0, 2.0)),
))
def test_solve_1d_residual(which, A, B, interval):
    solution = functions.solve_1d(functions.closed_form_weight(which), A, B, 0.0, 0.0, interval)
    assert solution.max_residual() < 1e-5


def test_solve_1d_second_derivative():
    solution = functions.solve_1d(functions.closed_form_weight('exponential'), 1.0, 0.0, 0.0,
                                  0.0, (0.0, 1.0))

    def u(s):
        return solution.u.func(s[:, None])

    assert numdiff.derivative_1d(u, 0.5, 2) == pytest.approx(0.5 * np.exp(0.5), abs=1e-6)


def test_solve_1d_left_endpoint_convention():
    f = functions.closed_form_weight('rational')
    solution = functions.solve_1d(f, 1.0, 2.0, 3.0, 4.0, (-1.0, 1.0))
    assert solution.values[0] == pytest.approx(3.0 * -1.0 + 4.0)
    assert solution.quadrature_step == pytest.approx(2.0 / functions.DEFAULT_PANELS)


def test_solve_1d_harmonic_case():
    f = ScalarField.line(lambda x: np.ones_like(x), positivity_required=True)
    solution = functions.solve_1d(f, 0.0, 0.0, 2.0, 3.0, (0.0, 1.0))
    for x in (0.0, 0.3, 0.75, 1.0):
        assert solution(x) == pytest.approx(2.0 * x + 3.0, abs=1e-10)


@pytest.mark.parametrize('which', functions.CLOSED_FORMS)
def test_solve_1d_matches_closed_form_up_to_affine(which, rng):
    weight = functions.closed_form_weight(which)
    for A, B in rng.uniform(-2.0, 2.0, size=(5, 2)):
        solution = functions.solve_1d(weight, A, B, 0.0, 0.0, (0.0, 1.0))
        gap = solution.values - functions.closed_form_1d(which, A, B, 0.0, 0.0, solution.grid)
        slope, intercept = np.polyfit(solution.grid, gap, 1)
        assert np.max(np.abs(gap - (slope * solution.grid + intercept))) < 1e-8, (A, B)


def test_solve_1d_with_tabulated_weight():
    xs = np.linspace(0.0, 1.0, 11)
    weight = functions.tabulated_weight(xs, 1.0 + xs ** 2)
    # not-a-knot cubic splines reproduce quadratics
    assert weight(0.37) == pytest.approx(1.0 + 0.37 ** 2, abs=1e-12)
    assert functions.solve_1d(weight, 0.0, 1.0, 0.0, 0.0, (0.0, 1.0)).max_residual() < 1e-5


def test_tabulated_weight_rejects_zero():
    xs = np.linspace(0.0, 1.0, 5)
    with pytest.raises(NonPositiveWeight):
        functions.tabulated_weight(xs, [1.0, 0.5, 0.0, 0.5, 1.0])


@pytest.mark.parametrize(('xs', 'fs'), (
    ([0.0, 1.0, 2.0], [1.0, 1.0, 1.0]),
    ([0.0, 2.0, 1.0, 3.0], [1.0, 1.0, 1.0, 1.0]),
))
def test_tabulated_weight_rejects_bad_tables(xs, fs):
    with pytest.raises(InvalidInput):
        functions.tabulated_weight(xs, fs)


def test_solve_1d_rejects_non_positive_weight():
    f = ScalarField.line(lambda x: x, name='x')
    with pytest.raises(NonPositiveWeight):
        functions.solve_1d(f, 1.0, 0.0, 0.0, 0.0, (-1.0, 1.0))


@pytest.mark.parametrize('step', (0.3, 0.2))
def test_solve_1d_rejects_bad_quadrature_step(step):
    with pytest.raises(InvalidInput):
        functions.solve_1d(functions.closed_form_weight('rational'), 1.0, 0.0, 0.0, 0.0,
                           (0.0, 1.0), quadrature_step=step)


def test_solve_1d_rejects_empty_interval():
    with pytest.raises(InvalidInput):
        functions.solve_1d(functions.closed_form_weight('rational'), 1.0, 0.0, 0.0, 0.0,
                           (1.0, 1.0))


@pytest.mark.parametrize(('which', 'args', 'expected'), (
    ('exponential', (1.0, 0.0, 0.0, 0.0, 0.0), -2.0),
    ('rational', (0.0, 0.0, 1.0, 5.0, 2.0), 7.0),
    ('exponential', (1.0, 2.0, 0.0, 0.0, 1.0), np.e),
))
def test_closed_form_1d(which, args, expected):
    assert functions.closed_form_1d(which, *args) == pytest.approx(expected, abs=1e-12)


def test_closed_form_rejects_unknown_family():
    with pytest.raises(InvalidInput):
        functions.closed_form_1d('cubic', 1.0, 0.0, 0.0, 0.0, 0.5)


def test_torus_kernel_constant_weight():
    op = TorusOperator.assemble(np.ones(32))
    assert op.m == 1
    assert functions.torus_kernel_dimension(op) == 1


def test_torus_kernel_varying_weight():
    j = np.arange(32)
    op = TorusOperator.assemble(2.0 + np.sin(2 * np.pi * j / 32))
    assert functions.torus_kernel_dimension(op) == 1
    basis = op.kernel_basis()
    assert basis.shape == (32, 1)
    assert np.ptp(basis) < 1e-8


@pytest.mark.parametrize('shape', ((32,), (16, 16)))
def test_torus_kernel_for_random_positive_weights(shape, rng):
    for _ in range(6):
        op = TorusOperator.assemble(rng.uniform(0.5, 3.0, size=shape))
        assert functions.torus_kernel_dimension(op) == 1
        assert np.ptp(op.kernel_basis()) < 1e-8


def test_torus_kernel_two_dimensional():
    j = np.add.outer(np.arange(16), np.zeros(16))
    op = TorusOperator.assemble(1.5 + np.cos(2 * np.pi * j / 16))
    assert op.m == 2
    assert op.matrix.shape == (256, 256)
    assert functions.torus_kernel_dimension(op) == 1


def test_torus_rows_sum_to_zero():
    j = np.arange(24)
    op = TorusOperator.assemble(1.0 + 0.5 * np.cos(2 * np.pi * j / 24))
    assert np.max(np.abs(op.row_sums())) < 1e-9 * np.max(np.abs(op.matrix))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.5, 3.0), min_size=8, max_size=40))
def test_torus_kernel_is_constants_for_any_positive_weight(samples):
    assert functions.torus_kernel_dimension(TorusOperator.assemble(samples)) == 1


def test_torus_grid_too_large():
    with pytest.raises(GridTooLarge):
        TorusOperator.assemble(np.ones((65, 65)))


def test_torus_rejects_non_positive_samples():
    with pytest.raises(NonPositiveWeight):
        TorusOperator.assemble([1.0, 2.0, 0.0, 1.0])


def test_torus_rejects_three_dimensional_grid():
    with pytest.raises(InvalidInput):
        TorusOperator.assemble(np.ones((4, 4, 4)))


def test_periodic_laplacian_needs_three_points():
    with pytest.raises(InvalidInput):
        functions.periodic_laplacian((2,))
