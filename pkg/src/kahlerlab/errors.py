"""Exception types shared across the package."""


class KahlerLabError(Exception):
    """Base class for all errors raised by kahlerlab."""


class StructuralError(KahlerLabError, ValueError):
    """Array shapes or index data do not fit together."""


class PreconditionError(KahlerLabError, ValueError):
    """An input violates a documented precondition (non-unit vector, bad dt, ...)."""


class SymmetryError(KahlerLabError, ValueError):
    """A tensor fails the Kähler symmetries beyond tolerance."""


class GenerationError(KahlerLabError, RuntimeError):
    """A randomized constructor could not produce a certified sample."""


class LoadError(KahlerLabError, ValueError):
    """A tensor file is malformed or inconsistent."""


class DegeneracyWarning(UserWarning):
    """Eigenvalue clusters forced a coarser block partition than requested."""
