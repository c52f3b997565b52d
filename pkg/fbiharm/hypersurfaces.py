'''
f-biharmonic surfaces in R³

A surface is given by a chart (u, v) -> R³. Its fundamental forms come from
finite-difference partials of the chart, the shape operator is A = I⁻¹·II
with II_ij = <X_ij, ξ>, and H = ½·trace(A). With this convention the
Laplace-Beltrami of the chart is 2Hξ, so the inward normal of a cylinder has
H = 1/(2R) > 0 and the outward normal of the unit sphere has H = -1.

An isometric immersion into a space form of curvature C is f-biharmonic when

    ΔH - H|A|² + 2CH + H·Δf/f + 2<grad ln f, grad H> = 0
    2A(grad H) + grad H² + 2H·A(grad ln f) = 0

with every Δ and grad taken in the induced metric. Every term of either
equation is even under ξ -> -ξ once H and A flip together, so the residuals
do not depend on the orientation.

'''

import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from . import numdiff
from .errors import DegenerateMetric, InvalidInput, NonPositiveWeight
from .functions import kernel_dimension, periodic_laplacian
from .numdiff import DEFAULT_FD, MapField, ScalarField

logger = logging.getLogger(__name__)

METRIC_FLOOR = 1e-10
SURFACE_DIM = 2


@dataclass(frozen=True, eq=False)
class ParamSurface:
    """A chart mapping an (N, 2) array of (u, v) to (N, 3) points."""

    chart: Callable[[np.ndarray], np.ndarray]
    domain: Tuple[Tuple[float, float], Tuple[float, float]]
    orientation: int = 1
    name: str = 'surface'

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise InvalidInput(f'orientation must be +1 or -1, got {self.orientation!r}')
        (u0, u1), (v0, v1) = self.domain
        if not (u1 > u0 and v1 > v0):
            raise InvalidInput(f'empty chart domain {self.domain!r}')
        us, vs = np.linspace(u0, u1, 7)[1:-1], np.linspace(v0, v1, 7)[1:-1]
        grid = np.stack(np.meshgrid(us, vs, indexing='ij'), axis=-1).reshape(-1, 2)
        _metric(self, grid, DEFAULT_FD)

    @property
    def field(self):
        return MapField(SURFACE_DIM, 3, self.chart, name=self.name)

    def flipped(self):
        return ParamSurface(self.chart, self.domain, -self.orientation, self.name)

    def interior(self, count, seed=42, margin=0.1):
        """Fixed-seed chart points at least ``margin`` (relative) inside the domain."""
        rng = np.random.default_rng(seed)
        (u0, u1), (v0, v1) = self.domain
        du, dv = margin * (u1 - u0), margin * (v1 - v0)
        return np.column_stack([rng.uniform(u0 + du, u1 - du, count),
                                rng.uniform(v0 + dv, v1 - dv, count)])

    def check_interior(self, uv):
        (u0, u1), (v0, v1) = self.domain
        u, v = np.asarray(uv, dtype=float)
        if not (u0 < u < u1 and v0 < v < v1):
            raise InvalidInput(f'{list(map(float, uv))} is not interior to {self.domain!r}')


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    first_form: np.ndarray
    second_form: np.ndarray
    shape_operator: np.ndarray
    H: float
    norm_A_sq: float
    normal: np.ndarray

    @property
    def principal_curvatures(self):
        return np.sort(np.linalg.eigvals(self.shape_operator).real)


def _metric(surface, points, cfg):
    """Partials (N, 2, 3), first form (N, 2, 2) and its determinant."""
    partials = numdiff.gradient(surface.field, points, cfg)
    first = np.einsum('nik,njk->nij', partials, partials)
    det = np.linalg.det(first)
    if np.any(det < METRIC_FLOOR):
        bad = points[np.argmin(det)]
        raise DegenerateMetric(
            f'{surface.name} is not an immersion at {bad.tolist()} (det I = {det.min()!r})'
        )
    return partials, first, det


def _forms(surface, points, cfg):
    partials, first, _ = _metric(surface, points, cfg)
    second_partials = numdiff.hessian(surface.field, points, cfg)
    normal = np.cross(partials[:, 0], partials[:, 1])
    normal *= surface.orientation / np.linalg.norm(normal, axis=1)[:, None]
    second = np.einsum('nijk,nk->nij', second_partials, normal)
    shape = np.linalg.solve(first, second)
    return first, second, shape, normal


def _mean_curvature(surface, points, cfg):
    _, _, shape, _ = _forms(surface, points, cfg)
    return 0.5 * np.trace(shape, axis1=1, axis2=2)


def mean_curvature_field(surface, cfg=DEFAULT_FD):
    return ScalarField(SURFACE_DIM, lambda points: _mean_curvature(surface, points, cfg),
                       name=f'H[{surface.name}]')


def surface_geometry(surface, uv, cfg=DEFAULT_FD):
    surface.check_interior(uv)
    point = np.asarray(uv, dtype=float)[None, :]
    first, second, shape, normal = _forms(surface, point, cfg)
    A = shape[0]
    return SurfaceGeometry(first[0], second[0], A, 0.5 * float(np.trace(A)),
                           float(np.trace(A @ A)), normal[0])


def surface_gradient(surface, g, uv, cfg=DEFAULT_FD):
    """Chart components I⁻¹·dg of the gradient of ``g`` in the induced metric."""
    point = np.asarray(uv, dtype=float)
    _, first, _ = _metric(surface, point[None, :], cfg)
    return np.linalg.solve(first[0], numdiff.gradient(g, point, cfg))


def _norm(first, vector):
    return float(np.sqrt(max(vector @ first @ vector, 0.0)))


def laplace_beltrami(surface, g, uv, cfg=DEFAULT_FD, wide=False):
    """Δg = |I|^-½ ∂_i(|I|^½ I^ij ∂_j g), both levels by finite differences."""
    level = cfg.wide() if wide else cfg

    def flux(points):
        _, first, det = _metric(surface, points, level)
        dg = numdiff.gradient(g, points, level)
        return np.sqrt(det)[:, None] * np.linalg.solve(first, dg[..., None])[..., 0]

    point = np.asarray(uv, dtype=float)
    divergence = np.trace(numdiff.gradient(MapField(SURFACE_DIM, SURFACE_DIM, flux,
                                                    name=f'flux[{g.name}]'),
                                           point, level))
    _, _, det = _metric(surface, point[None, :], level)
    return float(divergence / np.sqrt(det[0]))


def immersion_tension(surface, uv, cfg=DEFAULT_FD):
    """Componentwise Laplace-Beltrami of the chart; equals 2Hξ."""
    return np.array([laplace_beltrami(surface, component, uv, cfg)
                     for component in surface.field.components])


def hypersurface_residual(surface, f, uv, ambient_C=0.0, cfg=DEFAULT_FD):
    """(normal, tangent) residuals of the f-biharmonic hypersurface system."""
    surface.check_interior(uv)
    point = np.asarray(uv, dtype=float)
    weight = f.check_positive(point)
    m = SURFACE_DIM

    geometry = surface_geometry(surface, point, cfg)
    A, H, first = geometry.shape_operator, geometry.H, geometry.first_form
    mean = mean_curvature_field(surface, cfg.wide())

    lap_H = laplace_beltrami(surface, mean, point, cfg, wide=True)
    lap_f = laplace_beltrami(surface, f, point, cfg)
    d_log_f = numdiff.gradient(f, point, cfg) / weight
    grad_log_f = np.linalg.solve(first, d_log_f)
    grad_H = surface_gradient(surface, mean, point, cfg.wide())

    normal = (lap_H - H * geometry.norm_A_sq + m * ambient_C * H
              + H * lap_f / weight + 2.0 * float(d_log_f @ grad_H))
    tangent = 2.0 * A @ grad_H + m * H * grad_H + 2.0 * H * A @ grad_log_f
    return abs(normal), _norm(first, tangent)


def plane(domain=((-1.0, 1.0), (-1.0, 1.0))):
    def chart(points):
        return np.column_stack([points[:, 0], points[:, 1], np.zeros(len(points))])

    return ParamSurface(chart, domain, name='plane')


def cylinder(R=1.0, orientation=-1, z_range=(-1.0, 1.0)):
    """(θ, z) -> (R cos θ, R sin θ, z); orientation -1 is the inward normal."""
    if not R > 0:
        raise InvalidInput(f'cylinder radius must be positive, got {R!r}')

    def chart(points):
        theta, z = points[:, 0], points[:, 1]
        return np.column_stack([R * np.cos(theta), R * np.sin(theta), z])

    return ParamSurface(chart, ((0.0, 2 * np.pi), tuple(z_range)), orientation,
                        name=f'cylinder(R={R:g})')


def sphere(orientation=1):
    """Unit sphere in (polar, azimuth), poles excluded; +1 is outward."""
    def chart(points):
        theta, phi = points[:, 0], points[:, 1]
        return np.column_stack([np.sin(theta) * np.cos(phi),
                                np.sin(theta) * np.sin(phi),
                                np.cos(theta)])

    return ParamSurface(chart, ((0.2, np.pi - 0.2), (0.0, 2 * np.pi)), orientation,
                        name='sphere')


def _check_family(R, C2, sign):
    if not R > 0:
        raise InvalidInput(f'cylinder radius must be positive, got {R!r}')
    if C2 == 0:
        raise InvalidInput('C2 must be nonzero')
    if sign not in (1, -1):
        raise InvalidInput(f'sign must be +1 or -1, got {sign!r}')


def _family_values(R, C1, C2, sign, z):
    return 0.5 * (C2 * np.exp(sign * z / R) - C1 / C2 * R ** 2 * np.exp(-sign * z / R))


def cylinder_f_family(R, C1, C2, sign, z):
    _check_family(R, C2, sign)
    value = float(_family_values(R, C1, C2, sign, z))
    if value <= 0:
        raise NonPositiveWeight(f'cylinder weight {value!r} at z = {z!r}')
    return value


def cylinder_weight(R, C1, C2, sign):
    """The same family as a weight on the (θ, z) chart."""
    _check_family(R, C2, sign)
    return ScalarField(SURFACE_DIM,
                       lambda points: _family_values(R, C1, C2, sign, points[:, 1]),
                       positivity_required=True,
                       name=f'f[R={R:g},C1={C1:g},C2={C2:g},{"+" if sign > 0 else "-"}]')


def cmc_sphere_system_residual(H, norm_A_sq, f, m, uv, cfg=DEFAULT_FD,
                               shape_operator=None):
    """(|Δf - (|A|² - m)f|, |A(grad ln f)|) in flat chart coordinates.

    H and |A|² are constants supplied by the caller; A defaults to the
    umbilic H·Id.
    """
    if H == 0:
        raise InvalidInput('the reduced system needs H != 0')
    if f.dim != m:
        raise InvalidInput(f'weight lives on R^{f.dim}, expected R^{m}')
    weight = f.check_positive(uv)
    A = H * np.eye(m) if shape_operator is None else np.asarray(shape_operator, dtype=float)
    first = abs(numdiff.laplacian(f, uv, cfg) - (norm_A_sq - m) * weight)
    second = float(np.linalg.norm(A @ (np.atleast_1d(numdiff.gradient(f, uv, cfg)) / weight)))
    return first, second


def cmc_constancy_kernel_dimension(norm_A_sq, m, grid_sizes, lengths=1.0, tol=1e-9):
    """Kernel dimension of Δ_h - (|A|² - m) on a periodic grid."""
    lap = periodic_laplacian(grid_sizes, lengths)
    op = lap - (norm_A_sq - m) * np.eye(len(lap))
    dimension = kernel_dimension(op, tol)
    logger.debug('constancy operator on %s: kernel dimension %d', tuple(grid_sizes), dimension)
    return dimension
