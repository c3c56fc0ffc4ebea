"""Exception types raised across the package."""


class AuctionError(Exception):
    """Base class for every error raised by the engine."""


class InstanceError(AuctionError):
    """An auction instance violates a structural requirement.

    ``bid_id`` names the offending bid when there is one.
    """

    def __init__(self, message: str, bid_id: str | None = None):
        super().__init__(message)
        self.bid_id = bid_id


class DimensionMismatch(InstanceError):
    pass


class DuplicateBidId(InstanceError):
    pass


class UnboundedDecisionSet(InstanceError):
    pass


class EmptyDecisionSet(InstanceError):
    pass


class HullMismatch(AuctionError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InfeasibleBundle(AuctionError):
    """A value query asked for a bundle the bid cannot trade."""


class BudgetExceeded(AuctionError):
    """A brute-force routine was called on an instance above its size budget."""
