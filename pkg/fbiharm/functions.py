'''
f-biharmonic functions

A function u is f-biharmonic when Δ(f·Δu) = 0, i.e. when f·Δu is harmonic.
Three tools live here:

f_biharmonic_residual evaluates |Δ_h(f·Δ_h u)| at a point, building the inner
product f·Δ_h u as a derived field.

solve_1d integrates (f·u'')'' = 0 on an interval: u'' = (Ax + B)/f, so u is a
double integral of (Ax + B)/f plus Cx + D. Both integrals start at the left
endpoint with zero value, which fixes the integration constants; any other
convention differs by an affine function and is absorbed by C and D. The
closed forms for f = 1 + x² and f = e^-x are provided for comparison.

TorusOperator is the discrete u -> Δ_h(f·Δ_h u) on a periodic grid, and
torus_kernel_dimension counts its kernel with a dense SVD. On a compact
manifold only constants are f-biharmonic, and the grid operator shares that
property.

'''

import functools
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline, make_interp_spline
from scipy.linalg import circulant, null_space, svdvals

from . import numdiff
from .errors import GridTooLarge, InvalidInput, NonPositiveWeight
from .numdiff import DEFAULT_FD, LINE_FD, ScalarField

logger = logging.getLogger(__name__)

DEFAULT_PANELS = 2048
MAX_GRID = 4096
KERNEL_TOLERANCE = 1e-9
CLOSED_FORMS = ('rational', 'exponential')


def f_biharmonic_residual(u, f, x, cfg=DEFAULT_FD):
    """|Δ_h(f·Δ_h u)(x)|, with every level on the wide step."""
    f.check_positive(x)
    inner = numdiff.laplacian_field(u, cfg, wide=True)

    def weighted(points):
        weight = f.func(points)
        if np.any(weight <= 0):
            bad = points[np.argmin(weight)]
            raise NonPositiveWeight(f'weight {f.name} is not positive at {bad.tolist()}')
        return weight * inner.func(points)

    w = ScalarField(u.dim, weighted, u.singular_set.union(f.singular_set),
                    name=f'{f.name}·Δ{u.name}')
    return abs(numdiff.laplacian(w, x, cfg.wide()))


@dataclass(frozen=True, eq=False)
class OneDimSolution:
    A: float
    B: float
    C: float
    D: float
    f: ScalarField
    u: ScalarField
    quadrature_step: float
    interval: Tuple[float, float]
    grid: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        return self.u(x)

    def residual(self, x, cfg=LINE_FD):
        """|(f·u'')''| at x, expanded by the product rule."""
        def weight(s):
            return self.f.func(s[:, None])

        def solution(s):
            return self.u.func(s[:, None])

        f0 = float(weight(np.array([float(x)]))[0])
        f1 = numdiff.derivative_1d(weight, x, 1, cfg)
        f2 = numdiff.derivative_1d(weight, x, 2, cfg)
        u2 = numdiff.derivative_1d(solution, x, 2, cfg)
        u3 = numdiff.derivative_1d(solution, x, 3, cfg)
        u4 = numdiff.derivative_1d(solution, x, 4, cfg)
        return abs(f0 * u4 + 2.0 * f1 * u3 + f2 * u2)

    def checkpoints(self, count=50, cfg=LINE_FD):
        """Interior points far enough from the ends for every stencil."""
        margin = 4 * cfg.wide_step
        x0, x1 = self.interval
        if x1 - x0 <= 2 * margin:
            raise InvalidInput(f'interval {self.interval} too short for residual checks')
        return np.linspace(x0 + margin, x1 - margin, count)

    def max_residual(self, count=50, cfg=LINE_FD):
        return max(self.residual(x, cfg) for x in self.checkpoints(count, cfg))


def solve_1d(f, A, B, C, D, interval, quadrature_step=None):
    """Solve (f·u'')'' = 0 with u'' = (Ax + B)/f by nested composite Simpson.

    The composite rule is read off at every second node, where it is exact
    Simpson; the values are then interpolated by a quintic spline so that the
    solution can be differentiated four times.
    """
    x0, x1 = (float(v) for v in interval)
    length = x1 - x0
    if not length > 0:
        raise InvalidInput(f'empty interval {interval!r}')
    if quadrature_step is None:
        panels = DEFAULT_PANELS
    else:
        ratio = length / quadrature_step
        panels = int(round(ratio))
        if panels < 4 or abs(ratio - panels) > 1e-9 * ratio:
            raise InvalidInput(
                f'quadrature_step {quadrature_step!r} does not divide {length!r}'
            )
    if panels % 2:
        raise InvalidInput(f'Simpson quadrature needs an even panel count, got {panels}')

    fine = np.linspace(x0, x1, panels + 1)
    weight = np.atleast_1d(f(fine))
    if np.any(weight <= 0):
        bad = fine[np.argmin(weight)]
        raise NonPositiveWeight(f'weight {f.name} is not positive at x = {bad!r}')

    slope = cumulative_simpson((A * fine + B) / weight, x=fine, initial=0)
    double = cumulative_simpson(slope, x=fine, initial=0)
    grid = fine[::2]
    values = double[::2] + C * grid + D
    spline = make_interp_spline(grid, values, k=5)
    logger.debug('solve_1d on [%g, %g] with %d panels', x0, x1, panels)

    u = ScalarField.line(spline, name='u')
    return OneDimSolution(float(A), float(B), float(C), float(D), f, u,
                          length / panels, (x0, x1), grid, values)


def closed_form_1d(which, A, B, C, D, x):
    x = np.asarray(x, dtype=float)
    if which == 'rational':
        value = (0.5 * (A * x - B) * np.log1p(x * x)
                 + (B * x + A) * np.arctan(x) + (C - A) * x + D)
    elif which == 'exponential':
        value = (A * x - 2 * A + B) * np.exp(x) + C * x + D
    else:
        raise InvalidInput(f'unknown closed form {which!r}, expected one of {CLOSED_FORMS}')
    return float(value) if value.ndim == 0 else value


def closed_form_weight(which):
    if which == 'rational':
        return ScalarField.line(lambda x: 1.0 + x * x, name='1+x²',
                                positivity_required=True)
    if which == 'exponential':
        return ScalarField.line(lambda x: np.exp(-x), name='e^-x',
                                positivity_required=True)
    raise InvalidInput(f'unknown closed form {which!r}, expected one of {CLOSED_FORMS}')


def tabulated_weight(xs, fs):
    """A weight interpolated from a table by a cubic spline."""
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs.ndim != 1 or xs.shape != fs.shape or len(xs) < 4:
        raise InvalidInput('a weight table needs at least 4 (x, f) rows')
    if np.any(np.diff(xs) <= 0):
        raise InvalidInput('weight table abscissae must increase strictly')
    if np.any(fs <= 0):
        bad = xs[np.argmin(fs)]
        raise NonPositiveWeight(f'tabulated weight is not positive at x = {bad!r}')
    return ScalarField.line(CubicSpline(xs, fs), name='f_table',
                            positivity_required=True)


def periodic_laplacian(grid_sizes, lengths=1.0):
    """Dense 5-point (or 3-point) Laplacian on a periodic grid.

    Grid values are flattened in C order, the last axis fastest.
    """
    sizes = tuple(int(n) for n in grid_sizes)
    if not sizes or any(n < 3 for n in sizes):
        raise InvalidInput(f'periodic grid needs at least 3 points per axis, got {sizes}')
    total = int(np.prod(sizes))
    if total > MAX_GRID:
        raise GridTooLarge(f'{total} grid points exceed the dense limit {MAX_GRID}')
    lengths = np.broadcast_to(np.asarray(lengths, dtype=float), (len(sizes),))

    matrix = np.zeros((total, total))
    for axis, (n, length) in enumerate(zip(sizes, lengths)):
        column = np.zeros(n)
        column[[1, -1]] = 1.0
        column[0] = -2.0
        factors = [np.eye(k) for k in sizes]
        factors[axis] = circulant(column) / (length / n) ** 2
        matrix += functools.reduce(np.kron, factors)
    return matrix


def kernel_dimension(matrix, tol=KERNEL_TOLERANCE):
    """Singular values below tol times the largest one."""
    singular = svdvals(matrix)
    return int(np.sum(singular < tol * singular[0]))


@dataclass(frozen=True, eq=False)
class TorusOperator:
    grid_sizes: Tuple[int, ...]
    f_samples: np.ndarray
    matrix: np.ndarray

    @property
    def m(self):
        return len(self.grid_sizes)

    @classmethod
    def assemble(cls, f_samples, lengths=1.0):
        samples = np.asarray(f_samples, dtype=float)
        if samples.ndim not in (1, 2):
            raise InvalidInput(f'torus grids are 1-d or 2-d, got {samples.ndim}-d samples')
        if np.any(samples <= 0):
            raise NonPositiveWeight('torus weight samples must be positive')
        lap = periodic_laplacian(samples.shape, lengths)
        matrix = lap @ (samples.reshape(-1)[:, None] * lap)
        logger.debug('assembled torus operator on grid %s', samples.shape)
        return cls(samples.shape, samples, matrix)

    def row_sums(self):
        return self.matrix.sum(axis=1)

    def kernel_basis(self, tol=KERNEL_TOLERANCE):
        return null_space(self.matrix, rcond=tol)


def torus_kernel_dimension(op, tol=KERNEL_TOLERANCE):
    return kernel_dimension(op.matrix, tol)
