'''
Exceptions raised by the fbiharm package.

Every error derives from FBiharmError so the command line can turn any of
them into a clean exit code 1 without catching unrelated bugs. The message
always names the offending value, because most of these are raised deep
inside a finite-difference stencil where the caller cannot see which sample
point went wrong.

'''


class FBiharmError(Exception):
    """Base class for every error raised by fbiharm."""


class InvalidInput(FBiharmError, ValueError):
    """A parameter violates the documented invariants."""


class SingularEvaluation(FBiharmError):
    """A stencil point came closer to a declared singular set than allowed."""


class NonFinite(FBiharmError):
    """A field returned nan or inf."""


class NonPositiveWeight(FBiharmError):
    """A weight function f was not strictly positive where it is needed."""


class NonPositiveCurvature(FBiharmError):
    """A curvature function was not strictly positive on its interval."""


class VanishingCurvature(FBiharmError):
    """Curvature is too small for the torsion to be defined."""


class NotArclength(FBiharmError):
    """A curve is not parametrized by arclength."""


class StepTooLarge(FBiharmError):
    """An integration step is too coarse for the requested interval."""


class DegenerateMetric(FBiharmError):
    """A chart fails to be an immersion at a point."""


class GridTooLarge(FBiharmError):
    """A dense periodic-grid operator would be too big to decompose."""
