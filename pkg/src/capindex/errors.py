"""Exception hierarchy shared by all capindex modules."""


class CapIndexError(Exception):
    """Base class for every error raised by capindex."""


class ParamOutOfRange(CapIndexError, ValueError):
    pass


class NoBoundary(CapIndexError):
    pass


class UnsupportedSurface(CapIndexError):
    pass


class EmptyRange(CapIndexError, ValueError):
    pass


class NoRootInRange(CapIndexError):
    pass


class GridTooCoarse(CapIndexError, ValueError):
    pass


class QuadTooCoarse(CapIndexError):
    pass


class NearKernel(CapIndexError):
    """An eigenvalue sits inside the zero band; ``count`` holds the strict count."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


class DirichletKernel(CapIndexError):
    pass


class IllConditioned(CapIndexError):
    pass


class FredholmObstruction(CapIndexError):
    """The inhomogeneous Robin problem has no solution.

    ``kernel`` holds the homogeneous solutions (as sampled profiles) and
    ``compatibility`` the pairings ``(f, v) - (g, v)_bdry`` for each of them.
    """

    def __init__(self, message, kernel, compatibility, singular_ratio):
        super().__init__(message)
        self.kernel = kernel
        self.compatibility = list(compatibility)
        self.singular_ratio = singular_ratio


class ConstraintNotApplicable(CapIndexError):
    pass


class DecompositionMismatch(CapIndexError):
    pass


class NotMinimal(CapIndexError):
    pass


class ConfigError(CapIndexError):
    pass
