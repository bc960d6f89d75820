"""Exception hierarchy.

Every error carries a ``kind`` (the class name) so the CLI can report it as
structured JSON without a lookup table.
"""


class SpectralKwayError(Exception):
    """Base class for all library errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class ValidationError(SpectralKwayError, ValueError):
    """Bad input: malformed graph, invalid parameter, missing file."""


class NonPositiveWeight(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class IsolatedVertex(ValidationError):
    pass


class EmptySet(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class ZeroFunction(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class DegenerateParameters(ValidationError):
    pass


class InputNotFound(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class Overlap(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class EmptyGroup(ValidationError):
    pass


class SeparationViolated(ValidationError):
    def __init__(self, pair, distance, beta):
        super().__init__(
            f"groups {pair[0]} and {pair[1]} are {distance:.6g} apart, need >= {beta:.6g}"
        )
        self.pair = pair
        self.distance = distance
        self.beta = beta


class MassTooSmall(ValidationError):
    pass


class ComputationError(SpectralKwayError, RuntimeError):
    """A numerical or randomized stage did not produce a usable result."""


class ConvergenceFailure(ComputationError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class RetriesExhausted(ComputationError):
    pass


class InsufficientMass(ComputationError):
    pass


class PipelineFailure(ComputationError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
