"""Token accounting: accounts, transfers, fee sinks, and an append-only log.

The ledger is the single source of truth for every balance-affecting action
in a simulation run. Amounts are unsigned integers in base units
(10**18 base units = 1 token) so conservation is exact, never floating-point.
Replaying the event log reconstructs all balances bit-identically; the state
hash makes that checkable in one comparison.

Single-writer: all mutations are applied by one logical owner in total order.
Reads are safe from any context on a snapshot.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import (
    CorruptLog,
    DuplicateAccount,
    GenesisSealed,
    InsufficientFunds,
    UnknownAccount,
    ZeroAmount,
)

# 10**18 base units per token; all amounts are ints in base units
TOKEN = 10**18

Tick = int
TokenAmount = int


def tokens(value: float | str) -> int:
    """Convert a decimal token value ("1.5", 0.25) to integer base units.

    Uses string round-tripping so scenario files can state human-readable
    amounts without float dust. Raises ValueError beyond 18 decimal places.
    """
    text = str(value)
    neg = text.startswith("-")
    if neg:
        raise ValueError(f"negative amount: {text}")
    whole, _, frac = text.partition(".")
    if len(frac) > 18:
        raise ValueError(f"more than 18 decimal places: {text}")
    frac = frac.ljust(18, "0")
    return int(whole or "0") * TOKEN + int(frac or "0")


def format_tokens(base_units: int) -> str:
    """Render base units as a decimal token string ("1.5")."""
    whole, frac = divmod(base_units, TOKEN)
    if frac == 0:
        return str(whole)
    return f"{whole}.{str(frac).zfill(18).rstrip('0')}"


@dataclass(frozen=True, order=True)
class AccountId:
    """Opaque 20-byte account identifier, rendered as a hex string."""

    raw: bytes

    def __post_init__(self):
        if len(self.raw) != 20:
            raise ValueError("account id must be 20 bytes")

    @property
    def hex(self) -> str:
        return "0x" + self.raw.hex()

    @classmethod
    def from_hex(cls, text: str) -> "AccountId":
        return cls(bytes.fromhex(text.removeprefix("0x")))

    def __repr__(self):
        return f"AccountId({self.hex})"


def derive_account_id(label: str, nonce: str = "genesis") -> AccountId:
    """Deterministic id from a label: replays never need stored keys."""
    digest = hashlib.sha256(f"acct:{nonce}:{label}".encode()).digest()
    return AccountId(digest[:20])


# Mint source for genesis events; never holds a balance.
ZERO_ACCOUNT = AccountId(b"\x00" * 20)

# Well-known sink credited with every ride-along fee. A protocol constant so
# a bare event log is replayable without out-of-band configuration.
FEE_SINK = derive_account_id("fee-sink", nonce="protocol")


class EventCategory(Enum):
    """Why a balance moved; one category per event."""

    FUNDING = "Funding"
    SALE = "Sale"
    SUPPLY_PURCHASE = "SupplyPurchase"
    NETWORK_FEE = "NetworkFee"
    PLATFORM_FEE = "PlatformFee"
    LOAN_REPAYMENT = "LoanRepayment"
    ESCROW_LOCK = "EscrowLock"
    ESCROW_RELEASE = "EscrowRelease"
    INTERNAL = "Internal"


@dataclass(frozen=True)
class LedgerEvent:
    """Immutable, append-only record of one balance-affecting action."""

    seq: int
    time: Tick
    src: AccountId
    dst: AccountId
    amount: int
    fee: int
    category: EventCategory
    memo: str = ""

    def to_line(self) -> str:
        """Serialize as one tab-separated line (fixed field order)."""
        return "\t".join([
            str(self.seq),
            str(self.time),
            self.src.hex,
            self.dst.hex,
            str(self.amount),
            str(self.fee),
            self.category.value,
            self.memo,
        ])

    @classmethod
    def from_line(cls, line: str) -> "LedgerEvent":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 8:
            raise CorruptLog(f"expected 8 fields, got {len(parts)}")
        seq, time, src, dst, amount, fee, category, memo = parts
        return cls(
            seq=int(seq),
            time=int(time),
            src=AccountId.from_hex(src),
            dst=AccountId.from_hex(dst),
            amount=int(amount),
            fee=int(fee),
            category=EventCategory(category),
            memo=memo,
        )


@dataclass(frozen=True)
class TimelineEntry:
    """One point of an account's balance history (a chart marker)."""

    time: Tick
    balance_after: int
    category: EventCategory


def _sanitize_memo(memo: str) -> str:
    if "\t" in memo or "\n" in memo:
        raise ValueError("memo must not contain tabs or newlines")
    return memo


class Ledger:
    """Account balances plus the append-only event log that produced them.

    Total supply over all accounts (fee sink and escrows included) is
    constant after genesis; no public operation can drive a balance
    negative. Failed preconditions leave state untouched.
    """

    def __init__(self, genesis_nonce: str = "genesis",
                 fee_schedule: Optional[dict[EventCategory, int]] = None):
        self.genesis_nonce = genesis_nonce
        self.fee_sink = FEE_SINK
        self.fee_schedule: dict[EventCategory, int] = dict(fee_schedule or {})
        self.accounts: dict[AccountId, int] = {FEE_SINK: 0}
        self.log: list[LedgerEvent] = []
        self.labels: dict[str, AccountId] = {"fee-sink": FEE_SINK}
        self.genesis_sealed = False

    # -- accounts -------------------------------------------------------

    def create_account(self, seed_label: str) -> AccountId:
        """New zero-balance account with a deterministic id."""
        if seed_label in self.labels:
            raise DuplicateAccount(seed_label)
        account = derive_account_id(seed_label, self.genesis_nonce)
        if account in self.accounts:
            raise DuplicateAccount(f"id collision for label {seed_label!r}")
        self.labels[seed_label] = account
        self.accounts[account] = 0
        return account

    def balance(self, account: AccountId) -> int:
        if account not in self.accounts:
            raise UnknownAccount(account.hex)
        return self.accounts[account]

    def label_for(self, account: AccountId) -> Optional[str]:
        for label, candidate in self.labels.items():
            if candidate == account:
                return label
        return None

    def total_supply(self) -> int:
        return sum(self.accounts.values())

    # -- mutations --------------------------------------------------------

    def seal_genesis(self) -> None:
        self.genesis_sealed = True

    def mint(self, to: AccountId, amount: int, time: Tick = 0,
             category: EventCategory = EventCategory.FUNDING,
             memo: str = "") -> LedgerEvent:
        """Create supply during the genesis phase only."""
        if self.genesis_sealed:
            raise GenesisSealed("mint after genesis sealed")
        if to not in self.accounts:
            raise UnknownAccount(to.hex)
        if amount <= 0:
            raise ZeroAmount("mint amount must be positive")
        event = LedgerEvent(len(self.log), time, ZERO_ACCOUNT, to,
                            amount, 0, category, _sanitize_memo(memo))
        self.accounts[to] += amount
        self.log.append(event)
        return event

    def transfer(self, src: AccountId, dst: AccountId, amount: int,
                 category: EventCategory, time: Tick, memo: str = "",
                 fee: Optional[int] = None) -> LedgerEvent:
        """Move ``amount`` src->dst; the ride-along fee goes to the fee sink.

        ``fee=None`` looks up the per-category schedule. Contract-internal
        moves from escrow accounts pass ``fee=0``: network fees are charged
        to the wallet submitting an action, not to escrow.
        """
        if src not in self.accounts:
            raise UnknownAccount(src.hex)
        if dst not in self.accounts:
            raise UnknownAccount(dst.hex)
        if amount <= 0:
            raise ZeroAmount(f"transfer amount must be positive, got {amount}")
        if fee is None:
            fee = self.fee_schedule.get(category, 0)
        if fee < 0:
            raise ValueError("fee must be non-negative")
        if self.accounts[src] < amount + fee:
            raise InsufficientFunds(
                f"{src.hex} has {self.accounts[src]}, needs {amount + fee}")
        event = LedgerEvent(len(self.log), time, src, dst, amount, fee,
                            category, _sanitize_memo(memo))
        self.accounts[src] -= amount + fee
        self.accounts[dst] += amount
        self.accounts[self.fee_sink] += fee
        self.log.append(event)
        return event

    # -- queries ----------------------------------------------------------

    def balance_timeline(self, account: AccountId) -> list[TimelineEntry]:
        """Balance after every event touching the account, in log order."""
        if account not in self.accounts:
            raise UnknownAccount(account.hex)
        entries = []
        balance = 0
        for event in self.log:
            delta = _event_delta(event, account, self.fee_sink)
            if delta is None:
                continue
            balance += delta
            entries.append(TimelineEntry(event.time, balance, event.category))
        return entries

    def state_hash(self) -> str:
        """SHA-256 over sorted (account, balance) pairs plus the last seq.

        Zero balances are skipped so a ledger and its log replay hash equal
        even when the original created accounts that were never touched.
        """
        h = hashlib.sha256()
        for account in sorted(self.accounts):
            if self.accounts[account] != 0:
                h.update(f"{account.hex}:{self.accounts[account]}\n".encode())
        last_seq = self.log[-1].seq if self.log else -1
        h.update(f"seq:{last_seq}".encode())
        return h.hexdigest()


def _event_delta(event: LedgerEvent, account: AccountId,
                 fee_sink: AccountId) -> Optional[int]:
    """Net balance change of ``account`` under ``event``; None if untouched."""
    touched = False
    delta = 0
    if event.src == account and event.src != ZERO_ACCOUNT:
        delta -= event.amount + event.fee
        touched = True
    if event.dst == account:
        delta += event.amount
        touched = True
    if account == fee_sink and event.fee > 0:
        delta += event.fee
        touched = True
    return delta if touched else None


def replay(log: Iterable[LedgerEvent]) -> Ledger:
    """Reconstruct a ledger from an event log.

    The log must be prefix-valid: consecutive seqs from 0, no balance driven
    negative, mint events only from the zero account. Raises CorruptLog.
    """
    ledger = Ledger()
    for i, event in enumerate(log):
        if event.seq != i:
            raise CorruptLog(f"seq gap: expected {i}, got {event.seq}")
        if event.amount <= 0 or event.fee < 0:
            raise CorruptLog(f"invalid amounts at seq {i}")
        for acct in (event.src, event.dst):
            if acct != ZERO_ACCOUNT and acct not in ledger.accounts:
                ledger.accounts[acct] = 0
        if event.src == ZERO_ACCOUNT:
            if event.fee != 0:
                raise CorruptLog(f"mint with fee at seq {i}")
            ledger.accounts[event.dst] += event.amount
        else:
            ledger.accounts[event.src] -= event.amount + event.fee
            if ledger.accounts[event.src] < 0:
                raise CorruptLog(f"negative balance at seq {i}")
            ledger.accounts[event.dst] += event.amount
            ledger.accounts[ledger.fee_sink] += event.fee
        ledger.log.append(event)
    ledger.seal_genesis()
    return ledger


def write_log(events: Iterable[LedgerEvent], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(event.to_line() + "\n")


def read_log(path) -> list[LedgerEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                events.append(LedgerEvent.from_line(line))
    return events


def log_sha256(events: Iterable[LedgerEvent]) -> str:
    """Hex digest over the serialized event log (replay-stable identity)."""
    digest = hashlib.sha256()
    for event in events:
        digest.update(event.to_line().encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()
