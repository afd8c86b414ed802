"""artbot: a deterministic, replayable economy simulator for an
autonomous painting robot.

The robot picks a trending topic, renders it to glyphs, plans brush
strokes and a timed trajectory, "paints" in simulation, auctions the
result through an escrowed contract engine over an exact integer ledger,
restocks supplies, and repays its investors. Everything is driven by a
seeded discrete-event scheduler, so identical scenarios produce
byte-identical event logs.
"""

from .ledger import TOKEN, AccountId, EventCategory, Ledger, tokens

__version__ = "0.1.0"

__all__ = [
    "TOKEN",
    "AccountId",
    "EventCategory",
    "Ledger",
    "tokens",
    "__version__",
]
