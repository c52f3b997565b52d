'''

Maps into R^n are checked component by component. The inversion family
x/|x|^p with weight |x|^k is the main workout: its f-bitension is known in
closed form, so the numeric value, the closed form and the algebraic
predicate have to agree.

The sweep tests divide the residual by f|φ|/|x|^4. That quotient equals the
predicate product exactly, so one pair of thresholds (accept 1e-4, reject
1e-2) separates the two regimes at every sample radius. A point landing
between the thresholds is a failure in its own right.

'''

import numpy as np
import pytest

from fbiharm import maps, numdiff
from fbiharm.errors import InvalidInput, NonPositiveWeight
from fbiharm.maps import INVERSION_ACCEPT, INVERSION_REJECT, InversionFamily
from fbiharm.numdiff import MapField, ScalarField, power_field, radial_config


def identity(dim=3):
    return MapField(dim, dim, lambda p: p.copy(), name='id')


def quadratic_map():
    def func(p):
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        return np.column_stack([x * y, x * x - z * z, y * z + x])

    return MapField(3, 3, func, name='q')


def cubic_map():
    def func(p):
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        return np.column_stack([x ** 3 * y, y * z * z, x * x * y * y])

    return MapField(3, 3, func, name='c')


def one(dim=3):
    return ScalarField(dim, lambda p: np.ones(len(p)), positivity_required=True, name='1')


def test_tension_of_identity_is_zero():
    assert np.all(np.abs(maps.tension(identity(), (0.5, 0.25, -1.0))) < 1e-9)


def test_tension_of_inversion():
    fam = InversionFamily(3, 2, 0)
    x = np.array([1.0, 0.0, 0.0])
    tau = maps.tension(fam.map_field(), x, radial_config(x))
    np.testing.assert_allclose(tau, [-2.0, 0.0, 0.0], atol=1e-6)


def test_tension_of_norm_squared_map():
    phi = MapField(3, 2, lambda p: np.column_stack([np.sum(p * p, axis=1), np.zeros(len(p))]))
    np.testing.assert_allclose(maps.tension(phi, (0.5, 1.0, 0.25)), [6.0, 0.0], atol=1e-7)


def test_bitension_of_quadratic_map_is_zero():
    assert np.all(np.abs(maps.bitension(quadratic_map(), (0.5, 0.25, 1.0))) < 1e-5)


@pytest.mark.parametrize('m', (3, 4, 5))
def test_proper_biharmonic_inversions(m, rng):
    # p = m - 2 and p = -2 with constant weight
    for p in (m - 2, -2):
        fam = InversionFamily(m, p, 0)
        for x in numdiff.annulus_samples(m, 5, 1.0, 2.0, seed=int(rng.integers(1 << 31))):
            assert fam.scaled_residual(x) < INVERSION_ACCEPT


def test_bitension_of_inversion_m4_at_radius_one_and_a_half():
    fam = InversionFamily(4, 2, 0)
    x = 1.5 * np.array([0.5, 0.5, 0.5, 0.5])
    residual = maps.bitension(fam.map_field(), x, radial_config(x))
    assert np.max(np.abs(residual)) < 1e-4


def test_bitension_of_inversion_in_r3():
    fam = InversionFamily(3, 2, 0)
    x = np.array([1.0, 0.0, 0.0])
    numeric = maps.bitension(fam.map_field(), x, radial_config(x))
    # Δ(x|x|^-2) = -2x|x|^-4, then Δ(-2x|x|^-4) = -24x|x|^-6 + 16x|x|^-6
    np.testing.assert_allclose(numeric, fam.exact_residual(x), atol=1e-4)
    np.testing.assert_allclose(numeric, [-8.0, 0.0, 0.0], atol=1e-4)


def test_f_bitension_of_harmonic_map_is_zero():
    x = np.array([0.75, -0.5, 1.25])
    weight = power_field(3, 2)
    assert np.all(np.abs(maps.f_bitension(identity(), weight, x)) < 1e-6)


def test_f_bitension_with_unit_weight_is_bitension():
    x = (0.5, 0.25, 1.0)
    np.testing.assert_allclose(maps.f_bitension(cubic_map(), one(), x),
                               maps.bitension(cubic_map(), x), atol=1e-10)


def test_f_bitension_is_linear_in_the_map():
    x = (0.5, 0.25, 1.0)
    weight = ScalarField(3, lambda p: 2.0 + p[:, 0] ** 2, positivity_required=True)
    a, b = cubic_map(), quadratic_map()
    both = MapField(3, 3, lambda p: 2.0 * a.func(p) + 0.5 * b.func(p))
    np.testing.assert_allclose(
        maps.f_bitension(both, weight, x),
        2.0 * maps.f_bitension(a, weight, x) + 0.5 * maps.f_bitension(b, weight, x),
        atol=1e-6)


def test_f_bitension_component_is_weighted_bilaplacian():
    # the alpha-component equals Δ(f·Δφ^α)
    from fbiharm.functions import f_biharmonic_residual

    x = np.array([0.5, 0.25, 1.0])
    weight = ScalarField(3, lambda p: 1.0 + p[:, 1] ** 2, positivity_required=True)
    phi = cubic_map()
    values = maps.f_bitension(phi, weight, x)
    for alpha, component in enumerate(phi.components):
        assert abs(values[alpha]) == pytest.approx(
            f_biharmonic_residual(component, weight, x), abs=1e-5)


def test_f_bitension_of_proper_example(annulus_points):
    fam = InversionFamily(3, 2, 4)
    for x in annulus_points:
        residual = maps.f_bitension(fam.map_field(), fam.weight(), x, radial_config(x))
        assert np.max(np.abs(residual)) < 1e-4


def test_f_bitension_of_counterexample():
    fam = InversionFamily(3, 1, 1)
    assert fam.coefficient == 4
    x = np.array([1.0, 0.0, 0.0])
    residual = maps.f_bitension(fam.map_field(), fam.weight(), x, radial_config(x))
    np.testing.assert_allclose(residual, [4.0, 0.0, 0.0], atol=1e-4)


def test_f_bitension_needs_positive_weight():
    weight = ScalarField(3, lambda p: p[:, 0], positivity_required=True, name='x¹')
    with pytest.raises(NonPositiveWeight):
        maps.f_bitension(identity(), weight, (-1.0, 0.0, 0.0))


def test_f_tension():
    # φ = identity: τ = 0, so τ_f = dφ(grad f) = grad f
    x = np.array([1.0, 2.0, 2.0])
    weight = power_field(3, 2)
    np.testing.assert_allclose(maps.f_tension(identity(), weight, x), 2 * x, atol=1e-7)


def test_f_bienergy_density():
    phi = MapField(3, 2, lambda p: np.column_stack([np.sum(p * p, axis=1), np.zeros(len(p))]))
    weight = ScalarField(3, lambda p: np.full(len(p), 0.5), positivity_required=True)
    assert maps.f_bienergy_density(phi, weight, (0.5, 0.5, 0.5)) == pytest.approx(9.0)


@pytest.mark.parametrize(('m', 'p', 'k', 'cases', 'kind'), (
    (3, 2, 4, ('iii',), 'proper'),
    (3, 2, 1, ('iv',), 'proper'),
    (3, 0, 7, ('i',), 'harmonic'),
    (3, 3, -2, ('ii',), 'harmonic'),
    (4, 2, 0, ('iv',), 'biharmonic'),
    (3, -2, 0, ('iii',), 'biharmonic'),
))
def test_predicate(m, p, k, cases, kind):
    result = maps.inversion_is_f_biharmonic(InversionFamily(m, p, k))
    assert result.is_f_biharmonic
    assert result.cases == cases
    assert result.kind == kind


def test_predicate_rejects():
    result = InversionFamily(3, 1, 1).classify()
    assert not result.is_f_biharmonic
    assert result.cases == ()
    assert result.kind is None


def test_predicate_reports_every_case():
    # p = 0 and k = p + 2 together
    assert InversionFamily(3, 0, 2).classify().cases == ('i', 'iii')


def test_predicate_tolerance_for_real_inputs():
    assert InversionFamily(3, 2, 4 + 1e-13).classify().is_f_biharmonic
    assert not InversionFamily(3, 2, 4 + 1e-9).classify().is_f_biharmonic


def test_inversion_needs_m_at_least_two():
    with pytest.raises(InvalidInput):
        InversionFamily(1, 1, 1)


def test_inversion_declares_origin_singular():
    fam = InversionFamily(3, 2, 4)
    assert fam.map_field().singular_set == numdiff.SingularSet.origin(3)
    assert fam.weight().singular_set == numdiff.SingularSet.origin(3)


def test_exact_residual_matches_numeric():
    fam = InversionFamily(3, 1, 2)
    assert fam.coefficient == 4
    x = np.array([0.6, -0.3, 0.9])
    numeric = maps.f_bitension(fam.map_field(), fam.weight(), x, radial_config(x))
    np.testing.assert_allclose(numeric, fam.exact_residual(x), atol=1e-4)


def test_scaled_residual_is_the_coefficient():
    fam = InversionFamily(3, 1, 1)
    for x in numdiff.annulus_samples(3, 5, 0.5, 2.0):
        assert fam.scaled_residual(x) == pytest.approx(abs(fam.coefficient), abs=1e-4)


@pytest.mark.parametrize(('m', 'p'), ((3, 4), (4, 4), (4, 5), (5, -2), (5, 3), (5, 5)))
def test_accepted_inversions_clear_the_gate(m, p):
    points = numdiff.annulus_samples(m, 10, 0.5, 2.0, seed=42)
    accepted = [k for k in range(-3, 6) if InversionFamily(m, p, k).classify().is_f_biharmonic]
    assert accepted
    for k in accepted:
        worst = InversionFamily(m, p, k).residual_report(points).max_residual
        assert worst < INVERSION_ACCEPT / 3, (m, p, k, worst)


@pytest.mark.slow
def test_predicate_agrees_with_numeric_sweep():
    for m in (2, 3, 4, 5):
        points = numdiff.annulus_samples(m, 10, 0.5, 2.0, seed=42)
        for p in range(-2, 6):
            for k in range(-3, 6):
                fam = InversionFamily(m, p, k)
                worst = fam.residual_report(points).max_residual
                if fam.classify().is_f_biharmonic:
                    assert worst < INVERSION_ACCEPT, (m, p, k, worst)
                else:
                    assert worst > INVERSION_REJECT, (m, p, k, worst)


def test_residual_report_records_seed(annulus_points):
    report = InversionFamily(3, 2, 4).residual_report(annulus_points, seed=42)
    assert report.passed
    assert report.seed == 42
    assert len(report.samples) == 10


def test_bochner_identity_for_harmonic_map():
    assert maps.bochner_residual(identity(), power_field(3, 2), (1.0, 0.5, 0.5)) < 1e-8


def test_bochner_identity_along_proper_example():
    fam = InversionFamily(3, 2, 4)
    for x in numdiff.annulus_samples(3, 10, 0.8, 1.5, seed=42):
        assert maps.bochner_residual(fam.map_field(), fam.weight(), x, radial_config(x)) < 1e-3


def test_bochner_identity_detects_wrong_weight():
    fam = InversionFamily(3, 2, 4)
    residuals = [maps.bochner_residual(fam.map_field(), power_field(3, 2), x, radial_config(x))
                 for x in numdiff.annulus_samples(3, 10, 0.8, 1.5, seed=42)]
    assert max(residuals) > 1e-2
