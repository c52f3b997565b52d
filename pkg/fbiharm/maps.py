'''
Tension fields of maps into Euclidean space

For a target R^n every field here is computed componentwise. The tension is
the Laplacian of each component, the bitension the bi-Laplacian. The
f-bitension of component α is

    f·Δ²φ^α + (Δf)·Δφ^α + 2<grad f, grad Δφ^α>

which is also Δ(f·Δφ^α). The last term is the flat covariant derivative of
the tension along grad f.

The inversion family φ(x) = x|x|^-p with weight f = |x|^k is the worked
example. Its f-bitension is known in closed form:

    p(p-m)(k-p-2)(k-p+m-2) · x·|x|^(k-p-4)

so the map is f-biharmonic exactly when one of the four factors vanishes.
Numerical sweeps over the family divide the residual by f|φ|/|x|^4. The
quotient is then the bare coefficient, independent of the sample radius, and
one pair of thresholds separates accepted from rejected parameters anywhere
in the annulus.

'''

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import numdiff
from .errors import InvalidInput
from .numdiff import (
    DEFAULT_FD, RADIAL_FD, MapField, ScalarField, SingularSet, radial_config,
)

logger = logging.getLogger(__name__)

INVERSION_ACCEPT = 1e-4
INVERSION_REJECT = 1e-2
PREDICATE_TOLERANCE = 1e-12


def tension(phi, x, cfg=DEFAULT_FD):
    return np.atleast_1d(numdiff.laplacian(phi, x, cfg))


def bitension(phi, x, cfg=DEFAULT_FD):
    return np.atleast_1d(numdiff.bilaplacian(phi, x, cfg))


def f_tension(phi, f, x, cfg=DEFAULT_FD):
    """f·τ(φ) + dφ(grad f)."""
    weight = f.check_positive(x)
    jacobian = numdiff.gradient(phi, x, cfg)
    return weight * tension(phi, x, cfg) + numdiff.gradient(f, x, cfg) @ jacobian


def f_bitension(phi, f, x, cfg=DEFAULT_FD):
    weight = f.check_positive(x)
    tau = tension(phi, x, cfg)
    grad_tau = numdiff.grad_laplacian(phi, x, cfg)
    grad_f = numdiff.gradient(f, x, cfg)
    return (weight * bitension(phi, x, cfg)
            + numdiff.laplacian(f, x, cfg) * tau
            + 2.0 * grad_f @ grad_tau)


def f_bienergy_density(phi, f, x, cfg=DEFAULT_FD):
    weight = f.check_positive(x)
    tau = tension(phi, x, cfg)
    return 0.5 * weight * float(tau @ tau)


def bochner_residual(phi, f, x, cfg=DEFAULT_FD):
    """|Δ(½f|τ|²) - f|∇τ|² + ½(Δf)|τ|²| for a Euclidean target.

    The identity holds along f-biharmonic maps; the caller picks the map.
    """
    weight = f.check_positive(x)
    tau_field = numdiff.laplacian_field(phi, cfg, wide=True)

    def density(points):
        tau = tau_field.func(points)
        return 0.5 * f.func(points) * np.einsum('ni,ni->n', tau, tau)

    density_field = ScalarField(phi.dim, density,
                                phi.singular_set.union(f.singular_set),
                                name='½f|τ|²')
    lhs = numdiff.laplacian(density_field, x, cfg.wide())
    tau = tension(phi, x, cfg)
    grad_tau = numdiff.grad_laplacian(phi, x, cfg)
    rhs = (weight * float(np.sum(grad_tau ** 2))
           - 0.5 * numdiff.laplacian(f, x, cfg) * float(tau @ tau))
    return abs(lhs - rhs)


class InversionClassification(NamedTuple):
    is_f_biharmonic: bool
    cases: Tuple[str, ...]
    kind: Optional[str]


@dataclass(frozen=True)
class InversionFamily:
    """φ(x) = x·|x|^-p on R^m minus the origin, weight f(x) = |x|^k."""

    m: int
    p: float
    k: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise InvalidInput(f'inversion needs an integer m >= 2, got {self.m!r}')

    def map_field(self):
        def func(points):
            radius = np.linalg.norm(points, axis=1)
            return points * radius[:, None] ** (-self.p)

        return MapField(self.m, self.m, func, SingularSet.origin(self.m),
                        name=f'x/|x|^{self.p:g}')

    def weight(self):
        def func(points):
            return np.linalg.norm(points, axis=1) ** self.k

        return ScalarField(self.m, func, SingularSet.origin(self.m),
                           positivity_required=True, name=f'|x|^{self.k:g}')

    @property
    def coefficient(self):
        m, p, k = self.m, self.p, self.k
        return p * (p - m) * (k - p - 2) * (k - p + m - 2)

    def exact_residual(self, x):
        x = np.asarray(x, dtype=float)
        radius = np.linalg.norm(x)
        return self.coefficient * x * radius ** (self.k - self.p - 4)

    def scale(self, x):
        """f(x)|φ(x)| / |x|^4, the natural size of each term of the residual."""
        return float(np.linalg.norm(x)) ** (self.k - self.p - 3)

    def scaled_residual(self, x, base=RADIAL_FD):
        residual = f_bitension(self.map_field(), self.weight(), x,
                               radial_config(x, base))
        return float(np.linalg.norm(residual)) / self.scale(x)

    def residual_report(self, points, tolerance=INVERSION_ACCEPT, seed=None,
                        base=RADIAL_FD, workers=1):
        phi, f = self.map_field(), self.weight()

        def residual(x):
            value = f_bitension(phi, f, x, radial_config(x, base))
            return float(np.linalg.norm(value)) / self.scale(x)

        return numdiff.residual_report(residual, points, tolerance, seed, workers)

    def classify(self):
        return inversion_is_f_biharmonic(self)


def inversion_is_f_biharmonic(fam):
    """Which of p = 0, p = m, k = p + 2, k = p + 2 - m hold."""
    factors = {
        'i': fam.p,
        'ii': fam.p - fam.m,
        'iii': fam.k - fam.p - 2,
        'iv': fam.k - fam.p + fam.m - 2,
    }
    cases = tuple(label for label, value in factors.items()
                  if abs(value) <= PREDICATE_TOLERANCE)
    if not cases:
        kind = None
    elif 'i' in cases or 'ii' in cases:
        kind = 'harmonic'
    elif abs(fam.k) <= PREDICATE_TOLERANCE:
        kind = 'biharmonic'
    else:
        kind = 'proper'
    return InversionClassification(bool(cases), cases, kind)
