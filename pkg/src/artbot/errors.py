"""Error types shared across the simulator.

Every precondition failure raises a named exception so callers (and the HTTP
gateway) can map failures to stable error codes. All errors leave state
unchanged: operations validate before they mutate.
"""


class SimError(Exception):
    """Base class for all simulator errors. ``code`` is the wire-format name."""

    @property
    def code(self) -> str:
        return type(self).__name__


# -- ledger ------------------------------------------------------------

class DuplicateAccount(SimError):
    pass


class GenesisSealed(SimError):
    pass


class InsufficientFunds(SimError):
    pass


class ZeroAmount(SimError):
    pass


class UnknownAccount(SimError):
    pass


class CorruptLog(SimError):
    pass


# -- contracts ---------------------------------------------------------

class DuplicateArtwork(SimError):
    pass


class NotOwner(SimError):
    pass


class TokenLocked(SimError):
    pass


class AuctionClosed(SimError):
    pass


class BidTooLow(SimError):
    pass


class SelfBid(SimError):
    pass


class NotOpen(SimError):
    pass


class TooEarly(SimError):
    pass


class EmptyOrder(SimError):
    pass


class NotProposed(SimError):
    pass


class NotAccepted(SimError):
    pass


class UnknownLot(SimError):
    pass


class UnknownOrder(SimError):
    pass


class UnknownToken(SimError):
    pass


# -- topic / rendering -------------------------------------------------

class NoTrendData(SimError):
    pass


class TranslationUnavailable(SimError):
    pass


class UnrenderableGlyph(SimError):
    pass


class CanvasTooSmall(SimError):
    pass


# -- strokes / geometry ------------------------------------------------

class NotThin(SimError):
    pass


class DegenerateCanvas(SimError):
    pass


class OutOfWorkspace(SimError):
    pass


# -- agent / scenario --------------------------------------------------

class OutOfSupplies(SimError):
    pass


class Deadlock(SimError):
    pass


class ScenarioError(SimError):
    """Scenario file failed validation; message lists the offending keys."""
