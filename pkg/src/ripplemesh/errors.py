"""Exception types shared across the toolkit."""


class RippleError(Exception):
    """Base class for all toolkit errors."""


class EmptyInput(RippleError):
    """Mesh has no vertices or no faces."""


class DegenerateGeometry(RippleError):
    """Geometry collapses to a point (or has zero total surface area)."""


class EmptyAfterSanitize(RippleError):
    """Every face was degenerate; nothing left to process."""


class TruncatedFace(RippleError):
    """A coordinate-token run is not a multiple of 9."""


class UnknownToken(RippleError):
    """Token id outside the configured vocabulary."""


class MissingSeparator(RippleError):
    """A coordinate token appeared where a component separator was required."""


class ShapeError(RippleError):
    """Array arguments have incompatible shapes."""


class SequenceClosed(RippleError):
    """A proposal arrived after the end-of-sequence token."""


class RootOutOfRange(RippleError):
    """Root advance would move past the tail of the frontier queue."""


class IoError(RippleError):
    """Mesh file could not be read or parsed."""


class ConstraintViolation(RippleError):
    """Candidate face does not attach to the current root face.

    Carries enough context to audit the rejected step: the emission
    position at which the candidate was proposed, the root ordinal it
    failed to attach to, and the offending attachment edge.
    """

    def __init__(self, position: int, root: int, edge: tuple, message: str = ""):
        self.position = position
        self.root = root
        self.edge = edge
        detail = message or f"face at position {position} does not attach to root {root} via edge {edge}"
        super().__init__(detail)
