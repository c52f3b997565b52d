'''
Finite-difference calculus engine

Every other module asks this one for derivatives. A derivative is a Stencil:
integer offsets (ticks) in units of the step together with the weights for
unit spacing. Applying a stencil evaluates the field once on the whole point
cloud x + step*ticks and contracts the values with the weights, scaled by
step**-degree. Stencils with several rows (the gradient has one row per axis)
share a single cloud.

Composite operators are built by composing stencils. The bi-Laplacian is the
Laplacian stencil composed with itself, which is exactly the nested
application Δ_h(Δ_h u) because the discrete operators are linear. Nonlinear
compositions such as Δ_h(f·Δ_h u) go through derived fields instead
(laplacian_field, product_field), which evaluate the inner operator in a
batch at every outer stencil point.

Steps are powers of two by default. Offsets are then exact binary fractions,
which makes the stencils exact on low-degree polynomials at dyadic points.
Operators of total order three or more use FDConfig.wide_step at every level:
rounding grows like step**-degree and the ordinary step would drown a fourth
derivative in noise.

Richardson extrapolation (2**p * D(h/2) - D(h)) / (2**p - 1), with p the
stencil order, is applied on top of every estimate unless richardson is off.
Central stencils have error expansions in even powers of h, so further
levels (FDConfig.levels) remove h**(p+2), h**(p+4) and so on, each from one
more halving of the step.

Every stencil row sums to zero. The value at the first stencil point is
subtracted from the whole cloud before contracting, so constants
differentiate to exactly zero whatever the rounding in the weights.

'''

import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInput, NonFinite, NonPositiveWeight, SingularEvaluation

logger = logging.getLogger(__name__)

WIDE_RATIO = 16


@dataclass(frozen=True)
class SingularSet:
    """Declared points near which a field must not be evaluated."""

    points: Tuple[Tuple[float, ...], ...] = ()

    @classmethod
    def origin(cls, dim):
        return cls((tuple([0.0] * dim),))

    def __bool__(self):
        return bool(self.points)

    def distance(self, x):
        """Distance from each row of ``x`` to the nearest declared point."""
        if not self.points:
            return np.full(np.atleast_2d(x).shape[0], np.inf)
        centres = np.asarray(self.points, dtype=float)
        batch = np.atleast_2d(np.asarray(x, dtype=float))
        gaps = batch[:, None, :] - centres[None, :, :]
        return np.min(np.linalg.norm(gaps, axis=-1), axis=1)

    def union(self, other):
        merged = list(self.points)
        merged.extend(p for p in other.points if p not in merged)
        return SingularSet(tuple(merged))


@dataclass(frozen=True)
class ScalarField:
    """A real function on an open subset of R^dim.

    ``func`` maps an (N, dim) array of points to N values.
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    singular_set: SingularSet = SingularSet()
    positivity_required: bool = False
    name: str = 'u'

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInput(f'field dimension must be positive, got {self.dim}')

    @classmethod
    def line(cls, fn, name='f', positivity_required=False):
        """Wrap a vectorized one-variable function as a field on R^1."""
        return cls(1, lambda points: fn(points[:, 0]), name=name,
                   positivity_required=positivity_required)

    def __call__(self, x):
        points, single = _as_points(x, self.dim)
        values = _evaluate(self.func, points, self.name)
        if self.positivity_required:
            _require_positive(values, points, self.name)
        return float(values[0]) if single else values

    def check_positive(self, x):
        points, _ = _as_points(x, self.dim)
        value = self(x)
        _require_positive(np.atleast_1d(value), points, self.name)
        return value


@dataclass(frozen=True)
class MapField:
    """A map R^dim_in -> R^dim_out; ``func`` maps (N, dim_in) to (N, dim_out)."""

    dim_in: int
    dim_out: int
    func: Callable[[np.ndarray], np.ndarray]
    singular_set: SingularSet = SingularSet()
    name: str = 'phi'

    @property
    def dim(self):
        return self.dim_in

    @classmethod
    def from_components(cls, fields, name='phi'):
        fields = list(fields)
        if not fields:
            raise InvalidInput('a map needs at least one component')
        dims = {f.dim for f in fields}
        singular = {f.singular_set for f in fields}
        if len(dims) != 1 or len(singular) != 1:
            raise InvalidInput('map components must share dim and singular_set')

        def func(points):
            return np.stack([f.func(points) for f in fields], axis=-1)

        return cls(fields[0].dim, len(fields), func, fields[0].singular_set, name)

    def component(self, index):
        def func(points):
            return self.func(points)[:, index]

        return ScalarField(self.dim_in, func, self.singular_set,
                           name=f'{self.name}^{index + 1}')

    @property
    def components(self):
        return [self.component(i) for i in range(self.dim_out)]

    def __call__(self, x):
        points, single = _as_points(x, self.dim_in)
        values = _evaluate(self.func, points, self.name)
        return values[0] if single else values


Field = Union[ScalarField, MapField]


@dataclass(frozen=True)
class FDConfig:
    """Step sizes and stencil choice for one family of evaluations.

    ``wide_step`` is used at every level of operators of total order three
    or more; ``singular_margin`` is the smallest distance any stencil point
    may have from a declared singular set.
    """

    step: float = 2.0 ** -10
    order: int = 2
    richardson: bool = True
    wide_step: Optional[float] = None
    singular_margin: Optional[float] = None
    levels: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise InvalidInput(f'step must be positive, got {self.step!r}')
        if self.order not in (2, 4):
            raise InvalidInput(f'stencil order must be 2 or 4, got {self.order!r}')
        if self.levels not in (1, 2, 3):
            raise InvalidInput(f'extrapolation levels must be 1..3, got {self.levels!r}')
        if self.wide_step is None:
            object.__setattr__(self, 'wide_step', WIDE_RATIO * self.step)
        if self.singular_margin is None:
            object.__setattr__(self, 'singular_margin', 4 * self.wide_step)
        if self.wide_step < self.step:
            raise InvalidInput('wide_step must not be smaller than step')
        if self.singular_margin < 4 * self.wide_step * (1 - 1e-12):
            raise InvalidInput(
                f'singular_margin {self.singular_margin!r} is below '
                f'4*wide_step = {4 * self.wide_step!r}'
            )

    def scaled(self, factor):
        """The same configuration with every length multiplied by ``factor``."""
        return replace(self, step=self.step * factor,
                       wide_step=self.wide_step * factor,
                       singular_margin=self.singular_margin * factor)

    def wide(self):
        return replace(self, step=self.wide_step)


DEFAULT_FD = FDConfig()
# relative steps; scaled by |x| before use on origin-singular radial fields.
# Fourth derivatives are rounding-bound below a wide step of a few percent of
# |x|, so the wide step is large and two levels take the error to h**8.
RADIAL_FD = FDConfig(step=1e-2, order=4, wide_step=0.05, levels=2)
CURVE_FD = FDConfig(step=2.0 ** -8, order=4, wide_step=2.0 ** -4)
LINE_FD = FDConfig(step=2.0 ** -8, order=4, wide_step=2.0 ** -5)


def radial_config(x, base=RADIAL_FD):
    radius = float(np.linalg.norm(x))
    if radius == 0:
        raise SingularEvaluation('radial configuration requested at the origin')
    return base.scaled(radius)


@dataclass(frozen=True, eq=False)
class Stencil:
    ticks: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def radius(self):
        return float(np.max(np.linalg.norm(self.ticks, axis=1)))

    def compose(self, inner):
        """Apply ``inner`` first, then every row of this stencil."""
        if inner.weights.shape[0] != 1:
            raise InvalidInput('only single-row stencils can be composed inside')
        dim = self.ticks.shape[1]
        ticks = (self.ticks[:, None, :] + inner.ticks[None, :, :]).reshape(-1, dim)
        weights = self.weights[:, :, None] * inner.weights[0][None, None, :]
        return _merged(ticks, weights.reshape(self.weights.shape[0], -1),
                       self.degree + inner.degree)


def _merged(ticks, weights, degree):
    unique, inverse = np.unique(ticks, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    merged = np.stack([
        np.bincount(inverse, weights=row, minlength=len(unique)) for row in weights
    ])
    keep = np.any(merged != 0.0, axis=0)
    unique, merged = unique[keep], merged[:, keep]
    unique.setflags(write=False)
    merged.setflags(write=False)
    return Stencil(unique, merged, degree)


def _stacked(stencils):
    """One multi-row stencil evaluating every input row on a shared cloud."""
    ticks = np.concatenate([s.ticks for s in stencils])
    rows = sum(s.weights.shape[0] for s in stencils)
    weights = np.zeros((rows, len(ticks)))
    row = col = 0
    for s in stencils:
        q, k = s.weights.shape
        weights[row:row + q, col:col + k] = s.weights
        row += q
        col += k
    degrees = {s.degree for s in stencils}
    if len(degrees) != 1:
        raise InvalidInput('stacked stencils must share a degree')
    return _merged(ticks, weights, degrees.pop())


# one-dimensional central differences for unit spacing: (derivative, order)
_TABLES = {
    (1, 2): ((-1, 1), (-0.5, 0.5)),
    (1, 4): ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    (2, 2): ((-1, 0, 1), (1.0, -2.0, 1.0)),
    (2, 4): ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    (3, 2): ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    (3, 4): ((-3, -2, -1, 1, 2, 3), (1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8)),
    (4, 2): ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
    (4, 4): ((-3, -2, -1, 0, 1, 2, 3),
             (-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6)),
}


@functools.lru_cache(maxsize=None)
def axis_stencil(dim, axis, derivative, order):
    offsets, weights = _TABLES[derivative, order]
    ticks = np.zeros((len(offsets), dim), dtype=np.int64)
    ticks[:, axis] = offsets
    return _merged(ticks, np.asarray([weights], dtype=float), derivative)


@functools.lru_cache(maxsize=None)
def gradient_stencil(dim, order):
    return _stacked([axis_stencil(dim, i, 1, order) for i in range(dim)])


@functools.lru_cache(maxsize=None)
def hessian_stencil(dim, order):
    entries = []
    for i in range(dim):
        for j in range(dim):
            if i == j:
                entries.append(axis_stencil(dim, i, 2, order))
            else:
                entries.append(axis_stencil(dim, i, 1, order)
                               .compose(axis_stencil(dim, j, 1, order)))
    return _stacked(entries)


@functools.lru_cache(maxsize=None)
def laplacian_stencil(dim, order):
    stacked = _stacked([axis_stencil(dim, i, 2, order) for i in range(dim)])
    return _merged(stacked.ticks, stacked.weights.sum(axis=0, keepdims=True), 2)


@functools.lru_cache(maxsize=None)
def bilaplacian_stencil(dim, order):
    lap = laplacian_stencil(dim, order)
    return lap.compose(lap)


@functools.lru_cache(maxsize=None)
def grad_laplacian_stencil(dim, order):
    return gradient_stencil(dim, order).compose(laplacian_stencil(dim, order))


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    points = x.reshape(-1, dim)
    single = x.ndim == 0 or (x.ndim == 1 and x.shape[0] == dim)
    return points, single


def _evaluate(func, points, name):
    with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
        values = np.asarray(func(points), dtype=float)
    if values.ndim == 0:
        values = np.full(len(points), float(values))
    if values.shape[:1] != points.shape[:1]:
        raise InvalidInput(
            f'{name} returned shape {values.shape} for {points.shape[0]} points'
        )
    finite = np.isfinite(values).reshape(len(values), -1).all(axis=1)
    if not finite.all():
        bad = points[np.argmin(finite)]
        raise NonFinite(f'{name} is not finite at {bad.tolist()}')
    return values


def _require_positive(values, points, name):
    positive = values > 0
    if not positive.all():
        index = int(np.argmin(positive))
        raise NonPositiveWeight(
            f'weight {name} = {float(values[index])!r} at {points[index].tolist()}'
        )


def apply_stencil(func, x, stencil, step, singular_set=SingularSet(),
                  margin=0.0, name='field', positive=False):
    """Contract ``stencil`` with the values of ``func`` around ``x``.

    ``x`` is one point (dim,) or a batch (N, dim). Returns (q,) or (q, n)
    per point. With ``positive`` every stencil value must be > 0.
    """
    x = np.asarray(x, dtype=float)
    batch = np.atleast_2d(x)
    count, dim = batch.shape
    if dim != stencil.ticks.shape[1]:
        raise InvalidInput(f'point of dimension {dim} for a {stencil.ticks.shape[1]}-d stencil')
    cloud = (batch[:, None, :] + step * stencil.ticks[None, :, :]).reshape(-1, dim)
    if singular_set:
        gaps = singular_set.distance(cloud)
        if gaps.min() < margin:
            worst = cloud[np.argmin(gaps)]
            raise SingularEvaluation(
                f'{name}: stencil point {worst.tolist()} lies within '
                f'{margin!r} of the singular set'
            )
    values = _evaluate(func, cloud, name)
    if positive:
        _require_positive(values, cloud, name)
    values = values.reshape(count, len(stencil.ticks), *values.shape[1:])
    values = values - values[:, :1]
    out = np.einsum('qk,nk...->nq...', stencil.weights, values) / step ** stencil.degree
    return out[0] if x.ndim == 1 else out


def extrapolate(estimate, step, cfg):
    """Richardson extrapolation of ``estimate(h)`` over ``cfg.levels`` halvings."""
    if not cfg.richardson:
        return estimate(step)
    column = [estimate(step / 2 ** i) for i in range(cfg.levels + 1)]
    power = cfg.order
    while len(column) > 1:
        gain = 2.0 ** power
        column = [(gain * fine - coarse) / (gain - 1.0)
                  for coarse, fine in zip(column, column[1:])]
        power += 2
    return column[0]


def _estimate(field, x, stencil, step, cfg):
    def at(h):
        return apply_stencil(field.func, x, stencil, h, field.singular_set,
                             cfg.singular_margin, field.name,
                             getattr(field, 'positivity_required', False))

    return extrapolate(at, step, cfg)


def _single(rows):
    out = rows[0]
    return float(out) if np.ndim(out) == 0 else out


def gradient(field, x, cfg=DEFAULT_FD):
    """Central-difference gradient; rows are axes, columns map components."""
    return _estimate(field, x, gradient_stencil(field.dim, cfg.order), cfg.step, cfg)


def hessian(field, x, cfg=DEFAULT_FD):
    """Second partials; a batch of points gives (N, dim, dim, ...)."""
    rows = _estimate(field, x, hessian_stencil(field.dim, cfg.order), cfg.step, cfg)
    if np.ndim(x) == 2:
        return rows.reshape(len(rows), field.dim, field.dim, *rows.shape[2:])
    return rows.reshape(field.dim, field.dim, *rows.shape[1:])


def laplacian(field, x, cfg=DEFAULT_FD):
    return _single(_estimate(field, x, laplacian_stencil(field.dim, cfg.order),
                             cfg.step, cfg))


def bilaplacian(field, x, cfg=DEFAULT_FD):
    return _single(_estimate(field, x, bilaplacian_stencil(field.dim, cfg.order),
                             cfg.wide_step, cfg))


def grad_laplacian(field, x, cfg=DEFAULT_FD):
    return _estimate(field, x, grad_laplacian_stencil(field.dim, cfg.order),
                     cfg.wide_step, cfg)


def directional_derivative(field, x, direction, cfg=DEFAULT_FD):
    direction = np.asarray(direction, dtype=float)
    value = np.tensordot(direction, gradient(field, x, cfg), axes=1)
    return float(value) if np.ndim(value) == 0 else value


def radial_laplacian(alpha, m, r):
    """Δ|x|^alpha = alpha(alpha - 2 + m)|x|^(alpha - 2) in R^m, at |x| = r."""
    if not (np.isfinite(alpha) and np.isfinite(r)) or r <= 0:
        raise InvalidInput(f'radial Laplacian needs finite alpha and r > 0, got {alpha!r}, {r!r}')
    return alpha * (alpha - 2 + m) * r ** (alpha - 2)


def derivative_1d(func, s, n, cfg=None):
    """n-th derivative (1 <= n <= 4) of a vectorized function of one variable.

    Scalar functions give a float, vector-valued ones an array.
    """
    cfg = CURVE_FD if cfg is None else cfg
    if n not in (1, 2, 3, 4):
        raise InvalidInput(f'derivative order must be 1..4, got {n!r}')
    stencil = axis_stencil(1, 0, n, cfg.order)
    step = cfg.step if n <= 2 else cfg.wide_step

    def wrapped(points):
        return func(points[:, 0])

    def at(h):
        return apply_stencil(wrapped, np.array([float(s)]), stencil, h, name="function")

    return _single(extrapolate(at, step, cfg))


def laplacian_field(field, cfg=DEFAULT_FD, wide=False):
    """The field x -> Δ_h field(x), evaluated in batches."""
    step = cfg.wide_step if wide else cfg.step
    stencil = laplacian_stencil(field.dim, cfg.order)

    def func(points):
        rows = _estimate(field, points, stencil, step, cfg)
        return rows[:, 0]

    name = f'Δ{field.name}'
    if isinstance(field, MapField):
        return MapField(field.dim_in, field.dim_out, func, field.singular_set, name)
    return ScalarField(field.dim, func, field.singular_set, name=name)


def product_field(a, b, name=None):
    """Pointwise product of two scalar fields on the same space."""
    if a.dim != b.dim:
        raise InvalidInput(f'cannot multiply fields on R^{a.dim} and R^{b.dim}')

    def func(points):
        return a.func(points) * b.func(points)

    return ScalarField(a.dim, func, a.singular_set.union(b.singular_set),
                       name=name or f'{a.name}·{b.name}')


def power_field(dim, alpha, name=None):
    """|x|**alpha on R^dim with the origin declared singular."""
    def func(points):
        return np.linalg.norm(points, axis=1) ** alpha

    return ScalarField(dim, func, SingularSet.origin(dim), name=name or f'|x|^{alpha:g}')


def annulus_samples(dim, count, r_min, r_max, seed=42):
    """Fixed-seed points with r_min <= |x| <= r_max."""
    if not 0 < r_min <= r_max:
        raise InvalidInput(f'bad annulus [{r_min!r}, {r_max!r}]')
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.uniform(r_min, r_max, count)
    return directions * radii[:, None]


@dataclass(frozen=True)
class ResidualReport:
    samples: Tuple[Tuple[Tuple[float, ...], float], ...]
    max_residual: float
    mean_residual: float
    tolerance: float
    verdict: str
    seed: Optional[int] = None

    @classmethod
    def from_samples(cls, points, residuals, tolerance, seed=None):
        residuals = [float(r) for r in residuals]
        if not residuals:
            raise InvalidInput('a residual report needs at least one sample')
        for p, r in zip(points, residuals):
            if not np.isfinite(r):
                raise NonFinite(f'residual {r!r} at {np.atleast_1d(p).tolist()}')
            if r < 0:
                raise InvalidInput(f'residual norm {r!r} at {np.atleast_1d(p).tolist()} '
                                   'is negative')
        samples = tuple(
            (tuple(float(c) for c in np.atleast_1d(p)), r)
            for p, r in zip(points, residuals)
        )
        worst = max(residuals)
        return cls(samples, worst, float(np.mean(residuals)), float(tolerance),
                   'pass' if worst <= tolerance else 'fail', seed)

    @property
    def passed(self):
        return self.verdict == 'pass'

    def to_dict(self):
        return {
            'samples': [{'point': list(p), 'residual': r} for p, r in self.samples],
            'max_residual': self.max_residual,
            'mean_residual': self.mean_residual,
            'tolerance': self.tolerance,
            'verdict': self.verdict,
            'seed': self.seed,
        }


def residual_report(residual, points: Sequence, tolerance, seed=None, workers=1):
    """Evaluate ``residual`` at every point; order is kept with any worker count."""
    points = list(points)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(residual, points))
    else:
        values = [residual(p) for p in points]
    report = ResidualReport.from_samples(points, values, tolerance, seed)
    logger.debug('residual report: max %.3e over %d samples (%s)',
                 report.max_residual, len(points), report.verdict)
    return report
