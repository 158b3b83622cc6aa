"""Exception types shared across the package."""


class BandlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidDiscretization(BandlabError):
    """Requested atom layout cannot form a valid discretization."""


class SpaceMismatch(BandlabError):
    """Operands live on different measure spaces or carry different exponents."""


class GeometryMismatch(BandlabError):
    """Operation requires a geometry the space does not carry."""


class InvalidInterval(BandlabError):
    """Interval bounds are out of order."""


class NotAFlat(BandlabError):
    """Multiplier is not constant on the proposed set."""


class SingleBandOnly(BandlabError):
    """Multiplier is constant, so only the trivial band exists."""


class FlatAtScale(BandlabError):
    """No usable equal-norm split exists at the current resolution."""


class PreconditionError(BandlabError):
    """A documented precondition of the operation is violated."""


class NoNonzeroImage(BandlabError):
    """The supplied vector is annihilated by the operator."""


class NotLevelInvariant(BandlabError):
    """Operator fails to leave the sampled level bands invariant."""


class InvarianceViolation(BandlabError):
    """Band invariance broke down in the middle of a recursion step."""


class StarvedSide(BandlabError):
    """The retained side of a split carries no mass; recursion cannot continue."""


class NoClusterPoint(BandlabError):
    """No convergent subsequence was found within the search budget."""


class NotDisjointImages(BandlabError):
    """The supplied sequence is not pairwise disjoint."""
