'''
Golden checks

Every worked example the package claims to reproduce is a Check: an anchor
string naming the claim, an evaluator that turns the step presets into one
number, and a gate. ``zero`` checks pass when the number is at most the
gate, ``nonzero`` checks when it exceeds the gate, ``at_least`` checks when
it reaches it. A check whose evaluation raises an FBiharmError fails.

run_suite can tighten or loosen every ``zero`` gate at once and can rescale
every step-size preset; both exist so that deliberately bad settings can be
shown to fail.

'''

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import curves, functions, hypersurfaces, maps, numdiff
from .errors import FBiharmError, InvalidInput
from .numdiff import (
    CURVE_FD, DEFAULT_FD, LINE_FD, RADIAL_FD, FDConfig, ScalarField,
    SingularSet, power_field, radial_config,
)

logger = logging.getLogger(__name__)

REFERENCE_STEP = 1e-3
EXPECTATIONS = ('zero', 'nonzero', 'at_least')


@dataclass(frozen=True)
class SuiteContext:
    default: FDConfig = DEFAULT_FD
    radial: FDConfig = RADIAL_FD
    curve: FDConfig = CURVE_FD
    line: FDConfig = LINE_FD
    seed: int = 42

    @classmethod
    def for_step(cls, fd_step=REFERENCE_STEP, seed=42):
        """Every preset with its lengths multiplied by fd_step / 1e-3."""
        factor = fd_step / REFERENCE_STEP
        return cls(DEFAULT_FD.scaled(factor), RADIAL_FD.scaled(factor),
                   CURVE_FD.scaled(factor), LINE_FD.scaled(factor), seed)


@dataclass(frozen=True)
class Check:
    anchor: str
    evaluate: Callable[[SuiteContext], float]
    gate: float
    expectation: str = 'zero'

    def __post_init__(self):
        if self.expectation not in EXPECTATIONS:
            raise InvalidInput(
                f'{self.anchor}: expectation {self.expectation!r} is not one of {EXPECTATIONS}'
            )

    def effective_gate(self, tolerance=None):
        """The gate in force; a run tolerance only replaces the gate of zero checks."""
        if self.expectation == 'zero' and tolerance is not None:
            return tolerance
        return self.gate

    def passes(self, value, tolerance=None):
        if self.expectation == 'zero':
            return value <= self.effective_gate(tolerance)
        if self.expectation == 'nonzero':
            return value > self.gate
        return value >= self.gate


@dataclass(frozen=True)
class CheckResult:
    anchor: str
    max_residual: Optional[float]
    verdict: str
    error: Optional[str] = None
    gate: Optional[float] = None

    def to_dict(self):
        return {'anchor': self.anchor, 'max_residual': self.max_residual,
                'verdict': self.verdict, 'gate': self.gate}


def _norm_squared(dim):
    return ScalarField(dim, lambda p: np.sum(p * p, axis=1), name='|x|²')


def _fixed(ctx, count, r_min, r_max, dim=3):
    return numdiff.annulus_samples(dim, count, r_min, r_max, ctx.seed)


def _laplacian_of_norm_squared(ctx):
    return abs(numdiff.laplacian(_norm_squared(3), (1.0, 2.0, 3.0), ctx.default) - 6.0)


def _laplacian_of_newton_potential(ctx):
    return abs(numdiff.laplacian(power_field(3, -1), (1.0, 1.0, 1.0), ctx.default))


def _bilaplacian_of_norm_squared(ctx):
    return abs(numdiff.bilaplacian(_norm_squared(3), (1.0, 2.0, 3.0), ctx.default))


def _inversion_tension(ctx):
    phi = maps.InversionFamily(3, 2, 0).map_field()
    x = np.array([1.0, 0.0, 0.0])
    return float(np.linalg.norm(maps.tension(phi, x, radial_config(x, ctx.radial))
                                - np.array([-2.0, 0.0, 0.0])))


def _inversion_sweep(m, p, k):
    def evaluate(ctx):
        fam = maps.InversionFamily(m, p, k)
        points = _fixed(ctx, 20, 0.5, 2.0, m)
        return max(fam.scaled_residual(x, ctx.radial) for x in points)

    return evaluate


def _inversion_counterexample(ctx):
    fam = maps.InversionFamily(3, 1, 1)
    x = np.array([1.0, 0.0, 0.0])
    value = maps.f_bitension(fam.map_field(), fam.weight(), x, radial_config(x, ctx.radial))
    return float(np.linalg.norm(value))


def _bochner(k_weight):
    def evaluate(ctx):
        fam = maps.InversionFamily(3, 2, 4)
        f = power_field(3, k_weight)
        return max(maps.bochner_residual(fam.map_field(), f, x, radial_config(x, ctx.radial))
                   for x in _fixed(ctx, 10, 0.8, 1.5))

    return evaluate


def _f_biharmonic_function(u, f, x):
    def evaluate(ctx):
        return functions.f_biharmonic_residual(u, f, x, ctx.default)

    return evaluate


def _dipole():
    def func(points):
        return points[:, 0] / np.sum(points * points, axis=1)

    return ScalarField(3, func, SingularSet.origin(3), name='x¹/|x|²')


def _solve_1d(which, A, B, interval):
    def evaluate(ctx):
        solution = functions.solve_1d(functions.closed_form_weight(which), A, B, 0.0, 0.0,
                                      interval)
        return solution.max_residual(cfg=ctx.line)

    return evaluate


def _affine_gap(which):
    """|(u_solver - u_closed)''| at interior checkpoints."""
    def evaluate(ctx):
        A, B = 1.0, 2.0
        solution = functions.solve_1d(functions.closed_form_weight(which), A, B, 0.0, 0.0,
                                      (0.0, 1.0))

        def gap(s):
            return solution.u.func(s[:, None]) - functions.closed_form_1d(which, A, B, 0, 0, s)

        return max(abs(numdiff.derivative_1d(gap, x, 2, ctx.line))
                   for x in solution.checkpoints(cfg=ctx.line))

    return evaluate


def _torus_kernel(ctx):
    j = np.arange(32)
    one = functions.TorusOperator.assemble(2.0 + np.sin(2 * np.pi * j / 32))
    jj = np.add.outer(np.arange(16), np.zeros(16))
    two = functions.TorusOperator.assemble(1.5 + np.cos(2 * np.pi * jj / 16))
    return float(abs(functions.torus_kernel_dimension(one) - 1)
                 + abs(functions.torus_kernel_dimension(two) - 1))


def _classification(family, points):
    def evaluate(ctx):
        profile = curves.CurvatureProfile.r3(family, (-10.0, 10.0))
        return max(curves.classification_ode_residual(profile, s, ctx.curve) for s in points)

    return evaluate


def _planar_frenet(ctx):
    family = curves.R3Family('planar')
    profile = curves.CurvatureProfile.r3(family, (-10.0, 10.0))
    return float(np.max(np.abs(
        curves.frenet_system_residual(profile, family.weight, 1.0, ctx.curve))))


def _lancret_frenet(ctx):
    profile = curves.CurvatureProfile(curves.lancret_curvature, (-1.9, 1.9), ratio_c=1.0)
    return abs(curves.frenet_system_residual(profile, profile.weight, 0.0, ctx.curve)[1])


def _planar_curve_residual(ctx):
    curve = curves.planar_family_curve()
    weight = curves.R3Family('planar').weight
    return max(curves.euclidean_curve_residual(curve, weight, s, ctx.curve)
               for s in (-2.0, 0.0, 3.0))


def _lancret_estimate(ctx):
    kappa, tau = curves.estimate_curvature_torsion(curves.lancret_curve(), 0.0, ctx.curve)
    expected = 1.0 / (4.0 * np.sqrt(2.0))
    return max(abs(kappa - expected), abs(tau - expected))


def _lancret_curve_residual(ctx):
    def weight(s):
        return curves.lancret_curvature(s) ** -1.5

    return curves.euclidean_curve_residual(curves.lancret_curve(), weight, 0.0, ctx.curve)


def _planar_reconstruction(ctx):
    family = curves.R3Family('planar')
    return curves.reconstruction_error(curves.planar_family_curve(), family.curvature,
                                       family.torsion, cfg=ctx.curve)


def _cylinder_family(ctx):
    worst = 0.0
    for R in (0.5, 1.0, 2.0):
        surface = hypersurfaces.cylinder(R)
        points = surface.interior(3, ctx.seed)
        for C1 in (0.0, -1.0):
            for C2 in (1.0, 2.0):
                for sign in (1, -1):
                    f = hypersurfaces.cylinder_weight(R, C1, C2, sign)
                    for uv in points:
                        worst = max(worst, *hypersurfaces.hypersurface_residual(
                            surface, f, uv, cfg=ctx.default))
    return worst


def _cylinder_wrong_weight(ctx):
    surface = hypersurfaces.cylinder(1.0)
    f = ScalarField(2, lambda p: np.exp(2 * p[:, 1]), positivity_required=True, name='e^2z')
    normal, _ = hypersurfaces.hypersurface_residual(surface, f, (1.0, 0.25), cfg=ctx.default)
    return abs(normal - 1.5)


def _cylinder_geometry(ctx):
    geometry = hypersurfaces.surface_geometry(hypersurfaces.cylinder(1.0), (1.0, 0.25),
                                              ctx.default)
    return max(abs(geometry.H - 0.5), abs(geometry.norm_A_sq - 1.0))


def _sphere_geometry(ctx):
    geometry = hypersurfaces.surface_geometry(hypersurfaces.sphere(), (1.0, 2.0), ctx.default)
    return max(abs(geometry.H + 1.0), abs(geometry.norm_A_sq - 2.0))


def _tension_is_mean_curvature(ctx):
    surface = hypersurfaces.cylinder(1.0)
    uv = (0.7, 0.3)
    geometry = hypersurfaces.surface_geometry(surface, uv, ctx.default)
    tension = hypersurfaces.immersion_tension(surface, uv, ctx.default)
    return float(np.linalg.norm(tension - 2 * geometry.H * geometry.normal))


def _laplacian_order(ctx):
    """Observed order of the plain central Laplacian under step halving."""
    field = ScalarField(2, lambda p: np.sin(p[:, 0]) * np.exp(p[:, 1]), name='sin·exp')
    x = np.array([0.3, 0.2])
    exact = 0.0  # -sin·exp + sin·exp
    h = ctx.default.step * 8
    plain = FDConfig(step=h, richardson=False)
    halved = FDConfig(step=h / 2, richardson=False)
    coarse = abs(numdiff.laplacian(field, x, plain) - exact)
    fine = abs(numdiff.laplacian(field, x, halved) - exact)
    return float(np.log2(coarse / fine))


CHECKS = (
    Check('Δ|x|² = 6 on R³', _laplacian_of_norm_squared, 1e-7),
    Check('Δ(1/|x|) = 0 on R³ minus the origin', _laplacian_of_newton_potential, 1e-6),
    Check('Δ²|x|² = 0 on R³', _bilaplacian_of_norm_squared, 1e-5),
    Check('central Laplacian converges at second order', _laplacian_order, 1.9, 'at_least'),
    Check('tension of x/|x|² at e1 is -2e1', _inversion_tension, 1e-6),
    Check('x/|x|² is f-biharmonic on R³ for f = |x|⁴', _inversion_sweep(3, 2, 4),
          maps.INVERSION_ACCEPT),
    Check('x/|x|² is f-biharmonic on R³ for f = |x|^(4-m)', _inversion_sweep(3, 2, 1),
          maps.INVERSION_ACCEPT),
    Check('x/|x|^(m-2) is biharmonic on R⁴', _inversion_sweep(4, 2, 0),
          maps.INVERSION_ACCEPT),
    Check('x/|x| with f = |x| has f-bitension 4·e1 at e1', _inversion_counterexample,
          maps.INVERSION_REJECT, 'nonzero'),
    Check('Bochner identity along x/|x|² with f = |x|⁴', _bochner(4), 1e-3),
    Check('Bochner identity breaks with the weight |x|²', _bochner(2), 1e-2, 'nonzero'),
    Check('|x|² is f-biharmonic for f = 1/|x|',
          _f_biharmonic_function(_norm_squared(3), power_field(3, -1), (1.0, 1.0, 1.0)),
          1e-5),
    Check('x¹/|x|² is f-biharmonic for f = |x|',
          _f_biharmonic_function(_dipole(), power_field(3, 1), (1.0, 0.0, 0.0)), 1e-4),
    Check('|x|² is not f-biharmonic for the non-harmonic f = |x|',
          _f_biharmonic_function(_norm_squared(3), power_field(3, 1), (1.0, 0.0, 0.0)),
          1e-2, 'nonzero'),
    Check('u = ∫∫(Ax+B)e^x + Cx + D solves (e^-x u\'\')\'\' = 0 on [0, 1]',
          _solve_1d('exponential', 1.0, 0.0, (0.0, 1.0)), 1e-5),
    Check('u = ∫∫(Ax+B)/(1+x²) + Cx + D solves ((1+x²)u\'\')\'\' = 0 on [0, 2]',
          _solve_1d('rational', 1.0, 1.0, (0.0, 2.0)), 1e-5),
    Check('quadrature matches (Ax-2A+B)e^x up to an affine term', _affine_gap('exponential'),
          1e-6),
    Check('quadrature matches ½(Ax-B)ln(1+x²) + (Bx+A)arctan x up to an affine term',
          _affine_gap('rational'), 1e-6),
    Check('periodic Δ_h(fΔ_h u) = 0 only for constants', _torus_kernel, 0.5),
    Check('κ = 4c₂/(16+(c₂s+c₃)²) solves 3κ\'² - 2κκ\'\' = 4κ⁴',
          _classification(curves.R3Family('planar'), np.linspace(-5, 5, 50)), 1e-7),
    Check('κ = 4c₂/(16(1+c²)+(c₂s+c₃)²) solves the helix classification ODE',
          _classification(curves.R3Family('helix', c2=2.0, c=1.0), np.linspace(-5, 5, 50)),
          1e-7),
    Check('planar family with f = c₁κ^(-3/2) solves the Frenet system', _planar_frenet, 1e-6),
    Check('helix with κ = τ = 1/(2√2√(4-s²)) fails the Frenet system', _lancret_frenet,
          1e-3, 'nonzero'),
    Check('(4 ln(√(16+s²)+s), √(16+s²), 0) is f-biharmonic for f = (16+s²)^(3/2)/8',
          _planar_curve_residual, 1e-5),
    Check('helix example has κ(0) = τ(0) = 1/(4√2)', _lancret_estimate, 1e-6),
    Check('helix example is not f-biharmonic for f = κ^(-3/2)', _lancret_curve_residual,
          1e-3, 'nonzero'),
    Check('Frenet reconstruction of the planar family matches the explicit curve',
          _planar_reconstruction, 1e-5),
    Check('cylinder H = 1/(2R), |A|² = 1/R² for the inward normal', _cylinder_geometry, 1e-6),
    Check('unit sphere H = -1, |A|² = 2 for the outward normal', _sphere_geometry, 1e-5),
    Check('tension of a cylinder chart is 2Hξ', _tension_is_mean_curvature, 1e-5),
    Check('cylinder weights (C₂e^(±z/R) - C₁C₂⁻¹R²e^(∓z/R))/2 are f-biharmonic',
          _cylinder_family, 1e-5),
    Check('cylinder with f = e^(2z) has normal residual 3/2', _cylinder_wrong_weight, 1e-3),
)


def run_check(check, ctx, tolerance=None):
    gate = check.effective_gate(tolerance)
    try:
        value = float(check.evaluate(ctx))
    except FBiharmError as exc:
        logger.warning('%s: %s', check.anchor, exc)
        return CheckResult(check.anchor, None, 'fail', str(exc), gate)
    if not np.isfinite(value):
        return CheckResult(check.anchor, None, 'fail', 'non-finite result', gate)
    verdict = 'pass' if check.passes(value, tolerance) else 'fail'
    logger.debug('%s: %.3e (%s)', check.anchor, value, verdict)
    return CheckResult(check.anchor, value, verdict, gate=gate)


def run_suite(tolerance=None, fd_step=REFERENCE_STEP, seed=42, checks=CHECKS):
    ctx = SuiteContext.for_step(fd_step, seed)
    return [run_check(check, ctx, tolerance) for check in checks]
