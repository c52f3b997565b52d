'''
f-biharmonic curves

An arclength curve with Frenet frame (F1, F2, F3), curvature κ and torsion τ
satisfies F1' = κF2, F2' = -κF1 + τF3, F3' = -τF2. Substituted into the
f-biharmonic curve equation this gives four scalar conditions
(frenet_system_residual). In R³ they reduce to a planar family and a
general-helix family whose curvature is explicit, with weight f = c1·κ^-3/2.

Curves come in two shapes. A CurvatureProfile is intrinsic data: κ(s), an
optional constant ratio τ/κ, the ambient curvature C. A ParamCurve is an
explicit arclength map s -> R³. reconstruct_curve turns intrinsic data into a
sampled ParamCurve by integrating the Frenet system with classical RK4, and
estimate_curvature_torsion goes the other way with finite differences.

All functions of s (curvatures, weights, curves) must accept numpy arrays.

'''

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.interpolate import CubicHermiteSpline

from . import numdiff
from .errors import (
    InvalidInput, NonPositiveCurvature, NonPositiveWeight, NotArclength,
    StepTooLarge, VanishingCurvature,
)
from .numdiff import CURVE_FD

logger = logging.getLogger(__name__)

ARCLENGTH_TOLERANCE = 1e-6
CURVATURE_FLOOR = 1e-8
FRAME_TOLERANCE = 1e-10
REORTHONORMALIZE_EVERY = 16
MIN_STEPS = 64
REPARAMETRIZE_DEGREES = (16, 32, 64, 128, 256)
REPARAMETRIZE_TOLERANCE = 1e-10
FAMILY_KINDS = ('planar', 'helix')


def _value(fn, s):
    return np.asarray(fn(np.array([float(s)])), dtype=float)[0]


@dataclass(frozen=True)
class R3Family:
    """Curvature families of proper f-biharmonic curves in R³."""

    kind: str
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise InvalidInput(f'family kind must be one of {FAMILY_KINDS}, got {self.kind!r}')
        if not self.c1 > 0:
            raise InvalidInput(f'c1 must be positive, got {self.c1!r}')
        if not self.c2 > 0:
            raise InvalidInput(f'c2 must be positive, got {self.c2!r}')
        if self.kind == 'helix' and self.c == 0:
            raise InvalidInput('a helix family needs a nonzero ratio c')

    def curvature(self, s):
        s = np.asarray(s, dtype=float)
        base = 16.0 if self.kind == 'planar' else 16.0 * (1.0 + self.c ** 2)
        return 4.0 * self.c2 / (base + (self.c2 * s + self.c3) ** 2)

    def torsion(self, s):
        if self.kind == 'planar':
            return np.zeros_like(np.asarray(s, dtype=float))
        return self.c * self.curvature(s)

    def weight(self, s):
        return self.c1 * self.curvature(s) ** -1.5


def r3_family_curvature(family, s):
    return (float(family.curvature(s)), float(family.torsion(s)),
            float(family.weight(s)))


@dataclass(frozen=True)
class CurvatureProfile:
    kappa1: Callable
    interval: Tuple[float, float]
    ratio_c: Optional[float] = None
    ambient_C: float = 0.0
    f_constant_c1: float = 1.0

    def __post_init__(self):
        s0, s1 = self.interval
        if not s1 > s0:
            raise InvalidInput(f'empty interval {self.interval!r}')
        if not self.f_constant_c1 > 0:
            raise InvalidInput(f'c1 must be positive, got {self.f_constant_c1!r}')
        samples = np.asarray(self.kappa1(np.linspace(s0, s1, 65)), dtype=float)
        if not np.all(np.isfinite(samples)) or np.any(samples <= 0):
            raise NonPositiveCurvature(
                f'curvature must be positive on [{s0!r}, {s1!r}], '
                f'minimum sample {np.nanmin(samples)!r}'
            )

    @classmethod
    def r3(cls, family, interval):
        ratio = family.c if family.kind == 'helix' else None
        return cls(family.curvature, interval, ratio, 0.0, family.c1)

    def kappa2(self, s):
        kappa = np.asarray(self.kappa1(s), dtype=float)
        return kappa * (self.ratio_c or 0.0)

    def weight(self, s):
        return self.f_constant_c1 * np.asarray(self.kappa1(s), dtype=float) ** -1.5


def _profile_terms(profile, f, s, cfg):
    s0, s1 = profile.interval
    if not s0 < s < s1:
        raise InvalidInput(f's = {s!r} is not interior to {profile.interval!r}')
    kappa = _value(profile.kappa1, s)
    if kappa <= 0:
        raise NonPositiveCurvature(f'curvature {kappa!r} at s = {s!r}')
    terms = {
        'k': kappa,
        'k1': numdiff.derivative_1d(profile.kappa1, s, 1, cfg),
        'k2': numdiff.derivative_1d(profile.kappa1, s, 2, cfg),
        'c3': profile.ratio_c or 0.0,
    }
    if f is not None:
        weight = _value(f, s)
        if weight <= 0:
            raise NonPositiveWeight(f'weight {weight!r} at s = {s!r}')
        terms.update(f=weight,
                     f1=numdiff.derivative_1d(f, s, 1, cfg),
                     f2=numdiff.derivative_1d(f, s, 2, cfg))
    return terms


def frenet_system_residual(profile, f, s, cfg=CURVE_FD):
    """The four coefficients of the f-biharmonic equation in the Frenet frame."""
    t = _profile_terms(profile, f, s, cfg)
    k, k1, k2 = t['k'], t['k1'], t['k2']
    g1, g2 = t['f1'] / t['f'], t['f2'] / t['f']
    torsion, torsion1 = t['c3'] * k, t['c3'] * k1
    C = profile.ambient_C
    return np.array([
        -3 * k * k1 - 2 * k ** 2 * g1,
        k2 - k * torsion ** 2 - k ** 3 + k * C + k * g2 + 2 * k1 * g1,
        2 * k1 * torsion + k * torsion1 + 2 * k * torsion * g1,
        0.0,  # κ1κ2κ3, and κ3 = 0 for frames in R³
    ])


def planar_system_residual(profile, f, s, cfg=CURVE_FD):
    """The κ2 = 0 reduction, divided through by κ."""
    t = _profile_terms(profile, f, s, cfg)
    k, k1, k2 = t['k'], t['k1'], t['k2']
    g1, g2 = t['f1'] / t['f'], t['f2'] / t['f']
    return np.array([
        3 * k1 / k + 2 * g1,
        k2 / k - k ** 2 + profile.ambient_C + g2 + 2 * (k1 / k) * g1,
    ])


def helix_system_residual(profile, f, s, cfg=CURVE_FD):
    """The κ2 != 0 reduction: f²κ³ and f²κ²κ2 conserved, plus the balance of (fκ)''."""
    t = _profile_terms(profile, f, s, cfg)
    k, k1, k2, c3 = t['k'], t['k1'], t['k2'], t['c3']
    w, w1, w2 = t['f'], t['f1'], t['f2']
    torsion = c3 * k
    fk2 = w2 * k + 2 * w1 * k1 + w * k2
    return np.array([
        2 * w * w1 * k ** 3 + 3 * w ** 2 * k ** 2 * k1,
        fk2 - w * k * (torsion ** 2 + k ** 2 - profile.ambient_C),
        c3 * (2 * w * w1 * k ** 3 + 3 * w ** 2 * k ** 2 * k1),
        0.0,
    ])


def classification_ode_residual(profile, s, cfg=CURVE_FD):
    """|3κ'² - 2κκ'' - 4κ²((1 + c3²)κ² - C)|."""
    t = _profile_terms(profile, None, s, cfg)
    k, k1, k2, c3 = t['k'], t['k1'], t['k2'], t['c3']
    return abs(3 * k1 ** 2 - 2 * k * k2
               - 4 * k ** 2 * ((1 + c3 ** 2) * k ** 2 - profile.ambient_C))


@dataclass(frozen=True, eq=False)
class ParamCurve:
    """An arclength curve; ``gamma`` maps an array of s to an (N, 3) array.

    ``jet(s, n)``, when given, returns the exact n-th derivative (n = 1..4)
    at an array of s. Derivatives come from it instead of finite
    differences.
    """

    gamma: Callable
    interval: Tuple[float, float]
    jet: Optional[Callable] = None

    def __post_init__(self):
        s0, s1 = self.interval
        if not s1 > s0:
            raise InvalidInput(f'empty interval {self.interval!r}')
        for s in np.linspace(s0, s1, 18)[1:-1]:
            _check_arclength(self, s, CURVE_FD)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        points = np.asarray(self.gamma(np.atleast_1d(s)), dtype=float)
        return points[0] if s.ndim == 0 else points

    def derivative(self, s, n, cfg=CURVE_FD):
        if self.jet is not None:
            return np.asarray(self.jet(np.array([float(s)]), n), dtype=float)[0]
        return numdiff.derivative_1d(self.gamma, s, n, cfg)


@dataclass(frozen=True, eq=False)
class SampledCurve(ParamCurve):
    """A reconstructed curve: Hermite interpolation through RK4 samples."""

    s: np.ndarray = field(default=None)
    points: np.ndarray = field(default=None)
    frames: np.ndarray = field(default=None)
    max_frame_drift: float = 0.0


@dataclass(frozen=True, eq=False)
class FrenetFrame:
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray

    def __post_init__(self):
        for name in ('point', 'tangent', 'normal', 'binormal'):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        axes = self.axes
        defect = np.abs(axes @ axes.T - np.eye(3)).max()
        if defect > FRAME_TOLERANCE:
            raise InvalidInput(f'initial frame is not orthonormal (defect {defect:.2e})')

    @classmethod
    def standard(cls, point=(0.0, 0.0, 0.0)):
        return cls(point, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    @property
    def axes(self):
        return np.stack([self.tangent, self.normal, self.binormal])

    def state(self):
        return np.vstack([self.point, self.axes])


def _check_arclength(curve, s, cfg):
    velocity = curve.derivative(s, 1, cfg)
    speed = float(np.linalg.norm(velocity))
    if abs(speed - 1.0) > ARCLENGTH_TOLERANCE:
        raise NotArclength(f'|gamma\'({s!r})| = {speed!r}')
    return velocity


def _derivatives(curve, s, cfg):
    d1 = _check_arclength(curve, s, cfg)
    return d1, curve.derivative(s, 2, cfg), curve.derivative(s, 3, cfg)


def estimate_curvature_torsion(curve, s, cfg=CURVE_FD):
    d1, d2, d3 = _derivatives(curve, s, cfg)
    kappa = float(np.linalg.norm(d2))
    if kappa < CURVATURE_FLOOR:
        raise VanishingCurvature(f'curvature {kappa!r} at s = {s!r}')
    tau = float(np.dot(np.cross(d1, d2), d3)) / kappa ** 2
    return kappa, tau


def frenet_frame(curve, s, cfg=CURVE_FD):
    d1, d2, _ = _derivatives(curve, s, cfg)
    kappa = float(np.linalg.norm(d2))
    if kappa < CURVATURE_FLOOR:
        raise VanishingCurvature(f'curvature {kappa!r} at s = {s!r}')
    tangent = d1 / np.linalg.norm(d1)
    normal = d2 - np.dot(d2, tangent) * tangent
    normal /= np.linalg.norm(normal)
    return FrenetFrame(curve(s), tangent, normal, np.cross(tangent, normal))


def _orthonormalize(axes):
    """Modified Gram-Schmidt on the rows."""
    q = np.array(axes, dtype=float)
    for i in range(len(q)):
        for j in range(i):
            q[i] -= np.dot(q[j], q[i]) * q[j]
        q[i] /= np.linalg.norm(q[i])
    return q


def _frenet_rhs(state, kappa, tau):
    _, t, n, b = state
    return np.array([t, kappa * n, -kappa * t + tau * b, -tau * n])


def _integrate(kappa, tau, grid, start):
    """RK4 along ``grid`` (increasing or decreasing) from ``start``."""
    mids = 0.5 * (grid[:-1] + grid[1:])
    k_nodes, k_mids = np.asarray(kappa(grid), float), np.asarray(kappa(mids), float)
    t_nodes, t_mids = np.asarray(tau(grid), float), np.asarray(tau(mids), float)
    if np.any(k_nodes <= 0) or np.any(k_mids <= 0):
        raise NonPositiveCurvature('curvature must stay positive during reconstruction')

    states = np.empty((len(grid), 4, 3))
    states[0] = start
    state = start.copy()
    drift = 0.0
    for i in range(len(grid) - 1):
        h = grid[i + 1] - grid[i]
        a = _frenet_rhs(state, k_nodes[i], t_nodes[i])
        b = _frenet_rhs(state + 0.5 * h * a, k_mids[i], t_mids[i])
        c = _frenet_rhs(state + 0.5 * h * b, k_mids[i], t_mids[i])
        d = _frenet_rhs(state + h * c, k_nodes[i + 1], t_nodes[i + 1])
        state = state + (h / 6.0) * (a + 2 * b + 2 * c + d)
        if (i + 1) % REORTHONORMALIZE_EVERY == 0:
            axes = state[1:]
            drift = max(drift, np.abs(axes @ axes.T - np.eye(3)).max())
            state[1:] = _orthonormalize(axes)
        states[i + 1] = state
    return states, drift


def reconstruct_curve(kappa, tau, interval, initial_frame=None, step=1e-3,
                      anchor=None):
    """Integrate the Frenet system from ``initial_frame`` placed at ``anchor``.

    The anchor defaults to the left end; integration runs outwards from it in
    both directions.
    """
    s0, s1 = (float(v) for v in interval)
    if not s1 > s0:
        raise InvalidInput(f'empty interval {interval!r}')
    if not 0 < step <= (s1 - s0) / MIN_STEPS:
        raise StepTooLarge(f'step {step!r} exceeds (s1 - s0)/{MIN_STEPS}')
    anchor = s0 if anchor is None else float(anchor)
    if not s0 <= anchor <= s1:
        raise InvalidInput(f'anchor {anchor!r} outside {interval!r}')
    frame = FrenetFrame.standard() if initial_frame is None else initial_frame
    start = frame.state()

    s, states, drift = np.array([anchor]), start[None], 0.0
    if anchor < s1:
        ahead = np.linspace(anchor, s1, max(int(round((s1 - anchor) / step)), 1) + 1)
        s, (states, drift) = ahead, _integrate(kappa, tau, ahead, start)
    if anchor > s0:
        behind = np.linspace(anchor, s0, max(int(round((anchor - s0) / step)), 1) + 1)
        backward, drift_behind = _integrate(kappa, tau, behind, start)
        s = np.concatenate([behind[:0:-1], s])
        states = np.concatenate([backward[:0:-1], states])
        drift = max(drift, drift_behind)
    logger.debug('reconstructed %d samples on [%g, %g]', len(s), s0, s1)

    points, tangents = states[:, 0], states[:, 1]
    return SampledCurve(CubicHermiteSpline(s, points, tangents, axis=0), (s0, s1),
                        s=s, points=points, frames=states[:, 1:], max_frame_drift=drift)


def _positive_weight(f, s):
    weight = _value(f, s)
    if weight <= 0:
        raise NonPositiveWeight(f'weight {weight!r} at s = {s!r}')
    return weight


def euclidean_curve_residual(curve, f, s, cfg=CURVE_FD):
    """|f·γ'''' + 2f'·γ''' + f''·γ''| for a curve in R³."""
    weight = _positive_weight(f, s)
    _check_arclength(curve, s, cfg)
    g2, g3, g4 = (curve.derivative(s, n, cfg) for n in (2, 3, 4))
    f1 = numdiff.derivative_1d(f, s, 1, cfg)
    f2 = numdiff.derivative_1d(f, s, 2, cfg)
    return float(np.linalg.norm(weight * g4 + 2 * f1 * g3 + f2 * g2))


def product_rule_residual(curve, f, s, cfg=CURVE_FD):
    """|(f·γ'')''|, the product differentiated as a whole.

    With a jet only the outer second derivative is a difference quotient.
    Without one γ'' is itself a difference quotient and both levels run on
    the wide step.
    """
    _positive_weight(f, s)
    _check_arclength(curve, s, cfg)
    if curve.jet is not None:
        def weighted_acceleration(t):
            return np.asarray(f(t), dtype=float)[:, None] * curve.jet(t, 2)

        return float(np.linalg.norm(numdiff.derivative_1d(
            weighted_acceleration, s, 2, cfg)))

    wide = cfg.wide()
    stencil = numdiff.axis_stencil(1, 0, 2, cfg.order)

    def wrapped(points):
        return curve.gamma(points[:, 0])

    def weighted_acceleration(t):
        def at(h):
            return numdiff.apply_stencil(wrapped, t[:, None], stencil, h)[:, 0]

        acceleration = numdiff.extrapolate(at, wide.step, cfg)
        return np.asarray(f(t), dtype=float)[:, None] * acceleration

    return float(np.linalg.norm(
        numdiff.derivative_1d(weighted_acceleration, s, 2, wide)))


def _chain_rule(g, t):
    """Derivatives of γ(t(s)) in s from γ', γ'', ... and t', t'', ..."""
    n = len(g)
    t1 = t[0][:, None]
    if n == 1:
        return g[0] * t1
    t2 = t[1][:, None]
    if n == 2:
        return g[1] * t1 ** 2 + g[0] * t2
    t3 = t[2][:, None]
    if n == 3:
        return g[2] * t1 ** 3 + 3 * g[1] * t1 * t2 + g[0] * t3
    t4 = t[3][:, None]
    return (g[3] * t1 ** 4 + 6 * g[2] * t1 ** 2 * t2
            + g[1] * (3 * t2 ** 2 + 4 * t1 * t3) + g[0] * t4)


def _inverse_arclength(speed, t_interval, degree):
    t0, t1 = t_interval
    arclength = speed.integ(lbnd=t0)
    total = float(arclength(t1))
    if not total > 0:
        raise InvalidInput('curve has zero length')

    def inverse(targets):
        t = t0 + (t1 - t0) * targets / total
        for _ in range(60):
            delta = (arclength(t) - targets) / speed(t)
            t = np.clip(t - delta, t0, t1)
            if np.max(np.abs(delta)) < 1e-15:
                break
        return t

    t_of_s = Chebyshev.interpolate(inverse, degree, domain=[0.0, total])
    return t_of_s.trim(1e-16 * np.abs(t_of_s.coef).max()), total


def arclength_reparametrize(gamma, velocity, t_interval, degree=None, higher=None):
    """Reparametrize a regular curve by arclength.

    Speed and the inverse of the arclength function are both represented by
    Chebyshev series. Without a fixed ``degree`` the degree doubles from 16
    until the speed of the result is 1 within REPARAMETRIZE_TOLERANCE.

    ``higher`` holds γ'', γ''' and γ'''' as functions of t. The curve then
    gets an exact jet through the chain rule on the series' own derivatives.
    """
    t_interval = tuple(float(v) for v in t_interval)
    if higher is not None and len(higher) != 3:
        raise InvalidInput(f'higher needs the 2nd to 4th derivatives, got {len(higher)}')

    def true_speed(t):
        return np.linalg.norm(velocity(t), axis=-1)

    degrees = (degree,) if degree else REPARAMETRIZE_DEGREES
    for d in degrees:
        speed = Chebyshev.interpolate(true_speed, d, domain=list(t_interval))
        t_of_s, total = _inverse_arclength(speed, t_interval, d)
        grid = np.linspace(0.0, total, 257)
        defect = float(np.max(np.abs(true_speed(t_of_s(grid)) * t_of_s.deriv()(grid) - 1)))
        if defect <= REPARAMETRIZE_TOLERANCE:
            break
    logger.debug('arclength reparametrization: degree %d, speed defect %.1e', d, defect)
    if not defect <= ARCLENGTH_TOLERANCE:
        raise NotArclength(f'reparametrized speed is off by {defect!r} at degree {d}')

    jet = None
    if higher is not None:
        series = [t_of_s.deriv(k) for k in (1, 2, 3, 4)]
        derivatives = (velocity,) + tuple(higher)

        def jet(s, n):
            if n not in (1, 2, 3, 4):
                raise InvalidInput(f'derivative order must be 1..4, got {n!r}')
            s = np.asarray(s, dtype=float)
            t = t_of_s(s)
            g = [np.asarray(d(t), dtype=float) for d in derivatives[:n]]
            ts = [series[k](s) for k in range(n)]
            return _chain_rule(g, ts)

    return ParamCurve(lambda s: gamma(t_of_s(s)), (0.0, total), jet)


def reconstruction_error(curve, kappa, tau, step=1e-3, cfg=CURVE_FD):
    """Sup distance between ``curve`` and its rebuild from (κ, τ).

    Position and frame are matched at the midpoint of the interval, so the
    distance measures shape only.
    """
    s0, s1 = curve.interval
    middle = 0.5 * (s0 + s1)
    rebuilt = reconstruct_curve(kappa, tau, curve.interval,
                                frenet_frame(curve, middle, cfg), step, anchor=middle)
    return float(np.max(np.linalg.norm(rebuilt.points - curve(rebuilt.s), axis=1)))


def planar_family_curve(interval=(-5.0, 5.0)):
    """s -> (4 ln(√(16+s²) + s), √(16+s²), 0), curvature 4/(16+s²)."""
    def gamma(s):
        root = np.sqrt(16.0 + s * s)
        return np.column_stack([4.0 * np.log(root + s), root, np.zeros_like(s)])

    return ParamCurve(gamma, interval)


def lancret_curvature(s):
    """κ = τ = 1/(2√2·√(4 - s²)) on |s| < 2."""
    s = np.asarray(s, dtype=float)
    return 1.0 / (2.0 * np.sqrt(2.0) * np.sqrt(4.0 - s * s))


def lancret_curve(interval=(-1.9, 1.9)):
    """A general helix with κ = τ which is f-biharmonic for no weight."""
    def gamma(s):
        return np.column_stack([(2.0 / 3.0) * (1.0 + s / 2.0) ** 1.5,
                                (2.0 / 3.0) * (1.0 - s / 2.0) ** 1.5,
                                s / np.sqrt(2.0)])

    return ParamCurve(gamma, interval)
