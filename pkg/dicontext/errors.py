"""Exception hierarchy for dicontext.

Analytic outcomes (a map that is not monotone, a certificate whose chain
does not compose) are reported as `Verdict` values, never raised. The
exceptions below are for malformed input and violated preconditions.
"""
from __future__ import annotations


class DicontextError(Exception):
    """Base class for every error raised by the package."""


# ───── input problems (CLI exit code 2) ─────


class InputError(DicontextError):
    """A document or argument could not be used."""


class SpecError(InputError):
    """A JSON document is malformed or has the wrong shape."""


class UnknownNameError(InputError):
    """An unknown preset, standard space or vertex id was requested."""


# ───── precondition failures ─────


class DimensionError(DicontextError):
    """Points or spaces of different dimension were combined."""


class DomainError(DicontextError):
    """A map was evaluated outside its declared domain."""

    def __init__(self, message: str, point: tuple | None = None) -> None:
        super().__init__(message)
        self.point = point


class GridError(InputError):
    """Grid lines miss a mandatory coordinate or are malformed."""


class MarkingError(InputError):
    """A context marking points at a vertex the space does not have."""


class NeedsBoundError(DicontextError):
    """Path enumeration on a cyclic complex was requested without a bound."""


class EndpointError(DicontextError):
    """Two dipaths (or maps) were compared whose endpoints differ."""


class NotAFunctorError(DicontextError):
    """A combinatorial map sends the two sides of a 2-cell to distinct classes."""

    def __init__(self, message: str, cell: str) -> None:
        super().__init__(message)
        self.cell = cell


class ContextError(DicontextError):
    """Two contexted spaces do not share the same context vertices."""


class InclusionError(DicontextError):
    """A pushout was requested along a map that is not an inclusion."""


class PiecewiseConflictError(SpecError):
    """Overlapping cases of a piecewise expression disagree."""


class DiscretizationError(DicontextError):
    """A PL map does not send grid vertices and pieces onto the target grid."""


class UnsupportedGeometryError(DicontextError):
    """An embedded complex cannot serve as a geometric space."""
