"""Exception types shared across the package."""


class WreathLabError(Exception):
    """Base class for every error raised by wreathlab."""


class UnsupportedModel(WreathLabError):
    pass


class EncodingError(WreathLabError):
    pass


class NoSubgroup(WreathLabError):
    pass


class BudgetExceeded(WreathLabError):
    pass


class EmptySet(WreathLabError):
    pass


class WindowTooSmall(WreathLabError):
    pass


class ZoneNotPresent(WreathLabError):
    pass


class InexactBudget(WreathLabError):
    """BFS ran out of budget. ``upper_bound`` holds the best known bound, if any."""

    def __init__(self, message, upper_bound=None):
        super().__init__(message)
        self.upper_bound = upper_bound


class SupportTooLarge(WreathLabError):
    pass


class LampOrderMismatch(WreathLabError):
    pass


class FiberUnknown(WreathLabError):
    pass


class ZonesNotBounded(WreathLabError):
    pass


class TruncationMismatch(WreathLabError):
    pass


class PreimageEscape(WreathLabError):
    pass


class NonAmenableRequired(WreathLabError):
    """Matching infeasible; ``witness`` carries the Hall-violating set."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CertificateNotFound(WreathLabError):
    pass


class SectionInvalid(WreathLabError):
    pass


class InexactSample(WreathLabError):
    pass


class SearchBoundExceeded(WreathLabError):
    pass


class ConsistencyFailure(WreathLabError):
    pass
