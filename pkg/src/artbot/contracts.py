"""Contract state machines executed against the ledger.

Four cooperating pieces: an ownership-token registry with provenance, an
English auction with escrowed bids, a shop order-escrow protocol with a
fulfillment deadline, and a zero-interest loan book repaid greedily in
registration order.

Every operation is an atomic transaction over ledger + contract state:
preconditions are validated (and transfer plans computed) before the first
mutation, so a failed call leaves no trace. Escrow accounts are real ledger
accounts, one per lot/order, which makes solvency a checkable invariant
instead of a promise: at any time the escrow balances equal the sum of
locked amounts of non-terminal lots and orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import (
    AuctionClosed,
    BidTooLow,
    DuplicateArtwork,
    EmptyOrder,
    InsufficientFunds,
    NotAccepted,
    NotOpen,
    NotOwner,
    NotProposed,
    SelfBid,
    TokenLocked,
    TooEarly,
    UnknownLot,
    UnknownOrder,
    UnknownToken,
)
from .ledger import AccountId, EventCategory, Ledger, LedgerEvent, Tick

BPS_DENOMINATOR = 10_000


class LotState(Enum):
    CREATED = "Created"
    OPEN = "Open"
    SETTLED = "Settled"
    UNSOLD = "Unsold"
    CANCELLED = "Cancelled"


# Legal lot transitions; anything else is a bug, not an input error.
LOT_TRANSITIONS = {
    LotState.CREATED: {LotState.OPEN, LotState.CANCELLED},
    LotState.OPEN: {LotState.SETTLED, LotState.UNSOLD},
    LotState.SETTLED: set(),
    LotState.UNSOLD: set(),
    LotState.CANCELLED: set(),
}


class OrderState(Enum):
    PROPOSED = "Proposed"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    FULFILLED = "Fulfilled"
    REFUNDED = "Refunded"


ORDER_TERMINAL = {OrderState.FULFILLED, OrderState.REJECTED, OrderState.REFUNDED}


class ItemKind(Enum):
    CANVAS = "Canvas"
    PAINT = "Paint"
    BRUSH = "Brush"


@dataclass(frozen=True)
class Bid:
    bidder: AccountId
    amount: int
    time: Tick


@dataclass
class OwnershipToken:
    """Unique token tying an artwork hash to its current owner.

    Provenance is append-only; the first entry is the minter. ``locked``
    is set while the token sits in an open auction.
    """

    token_id: int
    artwork_ref: str
    owner: AccountId
    provenance: list[tuple[Tick, AccountId]]
    locked: bool = False


@dataclass
class AuctionLot:
    lot_id: int
    token_id: int
    seller: AccountId
    reserve: int
    min_increment: int
    open_time: Tick
    close_time: Tick
    platform_fee_bps: int
    escrow: AccountId
    state: LotState = LotState.CREATED
    bids: list[Bid] = field(default_factory=list)
    highest: Optional[Bid] = None


@dataclass
class ShopOrder:
    order_id: int
    buyer: AccountId
    shop: AccountId
    composition: list[tuple[ItemKind, int]]
    amount: int
    deadline: Tick
    escrow: AccountId
    state: OrderState = OrderState.PROPOSED


@dataclass
class LoanRecord:
    investor: AccountId
    principal: int
    repaid: int = 0

    @property
    def outstanding(self) -> int:
        return self.principal - self.repaid


@dataclass(frozen=True)
class SettlementReport:
    """Outcome of closing a lot, serializable for the run summary."""

    lot_id: int
    sold: bool
    winner: Optional[AccountId]
    price: int
    platform_fee: int


def split_platform_fee(amount: int, fee_bps: int) -> tuple[int, int]:
    """(seller_net, platform_fee); integer remainder goes to the platform."""
    seller_net = amount * (BPS_DENOMINATOR - fee_bps) // BPS_DENOMINATOR
    return seller_net, amount - seller_net


class ContractEngine:
    """Owns tokens, lots, orders, and loans; moves money via the ledger."""

    def __init__(self, ledger: Ledger, platform: AccountId,
                 platform_fee_bps: int = 250):
        self.ledger = ledger
        self.platform = platform
        self.platform_fee_bps = platform_fee_bps
        self.tokens: dict[int, OwnershipToken] = {}
        self.lots: dict[int, AuctionLot] = {}
        self.orders: dict[int, ShopOrder] = {}
        self.loans: list[LoanRecord] = []
        self._artwork_refs: set[str] = set()

    # -- ownership tokens ------------------------------------------------

    def mint_token(self, minter: AccountId, artwork_ref: str,
                   time: Tick = 0) -> OwnershipToken:
        if artwork_ref in self._artwork_refs:
            raise DuplicateArtwork(artwork_ref)
        token = OwnershipToken(
            token_id=len(self.tokens),
            artwork_ref=artwork_ref,
            owner=minter,
            provenance=[(time, minter)],
        )
        self._artwork_refs.add(artwork_ref)
        self.tokens[token.token_id] = token
        return token

    def _token(self, token_id: int) -> OwnershipToken:
        if token_id not in self.tokens:
            raise UnknownToken(str(token_id))
        return self.tokens[token_id]

    # -- english auction ---------------------------------------------------

    def open_auction(self, token_id: int, seller: AccountId, reserve: int,
                     min_increment: int, duration: Tick,
                     now: Tick) -> AuctionLot:
        token = self._token(token_id)
        if token.owner != seller:
            raise NotOwner(f"token {token_id} owned by {token.owner.hex}")
        if token.locked:
            raise TokenLocked(f"token {token_id} already in an open lot")
        if duration <= 0:
            raise ValueError("auction duration must be positive")
        if reserve <= 0 or min_increment <= 0:
            raise ValueError("reserve and min_increment must be positive")
        lot_id = len(self.lots)
        lot = AuctionLot(
            lot_id=lot_id,
            token_id=token_id,
            seller=seller,
            reserve=reserve,
            min_increment=min_increment,
            open_time=now,
            close_time=now + duration,
            platform_fee_bps=self.platform_fee_bps,
            escrow=self.ledger.create_account(f"escrow:lot:{lot_id}"),
        )
        self._lot_transition(lot, LotState.OPEN)
        token.locked = True
        self.lots[lot_id] = lot
        return lot

    def _lot(self, lot_id: int) -> AuctionLot:
        if lot_id not in self.lots:
            raise UnknownLot(str(lot_id))
        return self.lots[lot_id]

    @staticmethod
    def _lot_transition(lot: AuctionLot, target: LotState) -> None:
        assert target in LOT_TRANSITIONS[lot.state], (lot.state, target)
        lot.state = target

    def place_bid(self, lot_id: int, bidder: AccountId, amount: int,
                  time: Tick) -> Bid:
        """Escrow-backed bid; the outbid bidder is refunded in full at once.

        The strict increment rule (>= highest + min_increment) doubles as
        the tie-break: equal-amount bids are unacceptable by construction.
        """
        lot = self._lot(lot_id)
        if lot.state is not LotState.OPEN:
            raise AuctionClosed(f"lot {lot_id} is {lot.state.value}")
        if not (lot.open_time <= time < lot.close_time):
            raise AuctionClosed(f"bid at {time} outside "
                                f"[{lot.open_time}, {lot.close_time})")
        if bidder == lot.seller:
            raise SelfBid(bidder.hex)
        floor = lot.reserve
        if lot.highest is not None:
            floor = max(floor, lot.highest.amount + lot.min_increment)
        if amount < floor:
            raise BidTooLow(f"bid {amount} below floor {floor}")
        # Lock first (the only move that can fail), then refund: solvency of
        # the refund is guaranteed because the escrow already holds the funds.
        previous = lot.highest
        self.ledger.transfer(bidder, lot.escrow, amount,
                             EventCategory.ESCROW_LOCK, time,
                             memo=f"lot:{lot_id}:bid")
        if previous is not None:
            self.ledger.transfer(lot.escrow, previous.bidder, previous.amount,
                                 EventCategory.ESCROW_RELEASE, time,
                                 memo=f"lot:{lot_id}:outbid", fee=0)
        bid = Bid(bidder=bidder, amount=amount, time=time)
        lot.bids.append(bid)
        lot.highest = bid
        return bid

    def close_auction(self, lot_id: int, time: Tick) -> SettlementReport:
        """Settle at/after close_time: pay the seller, reassign the token."""
        lot = self._lot(lot_id)
        if lot.state is not LotState.OPEN:
            raise NotOpen(f"lot {lot_id} is {lot.state.value}")
        if time < lot.close_time:
            raise TooEarly(f"close at {time} before {lot.close_time}")
        token = self._token(lot.token_id)
        if lot.highest is None:
            self._lot_transition(lot, LotState.UNSOLD)
            token.locked = False
            return SettlementReport(lot_id, False, None, 0, 0)
        winner = lot.highest
        _, platform_fee = split_platform_fee(winner.amount,
                                             lot.platform_fee_bps)
        # Hammer price goes to the seller whole, then the seller pays the
        # platform commission: the seller's timeline shows both the gross
        # sale and the fee, and escrow drains in a single transfer.
        self.ledger.transfer(lot.escrow, lot.seller, winner.amount,
                             EventCategory.SALE, time,
                             memo=f"lot:{lot_id}:sale", fee=0)
        if platform_fee > 0:
            self.ledger.transfer(lot.seller, self.platform, platform_fee,
                                 EventCategory.PLATFORM_FEE, time,
                                 memo=f"lot:{lot_id}:commission", fee=0)
        token.owner = winner.bidder
        token.provenance.append((time, winner.bidder))
        token.locked = False
        self._lot_transition(lot, LotState.SETTLED)
        return SettlementReport(lot_id, True, winner.bidder, winner.amount,
                                platform_fee)

    # -- shop orders -------------------------------------------------------

    def propose_order(self, buyer: AccountId, shop: AccountId,
                      composition: list[tuple[ItemKind, int]], amount: int,
                      deadline: Tick, now: Tick = 0) -> ShopOrder:
        """Proposal only; funds move when the shop accepts."""
        if not composition or any(qty < 1 for _, qty in composition):
            raise EmptyOrder("order needs at least one item of each line")
        if amount <= 0:
            raise ValueError("order amount must be positive")
        fee = self.ledger.fee_schedule.get(EventCategory.ESCROW_LOCK, 0)
        if self.ledger.balance(buyer) < amount + fee:
            raise InsufficientFunds(
                f"buyer holds {self.ledger.balance(buyer)}, "
                f"order needs {amount + fee}")
        order_id = len(self.orders)
        order = ShopOrder(
            order_id=order_id,
            buyer=buyer,
            shop=shop,
            composition=list(composition),
            amount=amount,
            deadline=deadline,
            escrow=self.ledger.create_account(f"escrow:order:{order_id}"),
        )
        self.orders[order_id] = order
        return order

    def _order(self, order_id: int) -> ShopOrder:
        if order_id not in self.orders:
            raise UnknownOrder(str(order_id))
        return self.orders[order_id]

    def shop_respond(self, order_id: int, accept: bool,
                     time: Tick) -> ShopOrder:
        """Accepting escrows the payment, obliging the shop to deliver."""
        order = self._order(order_id)
        if order.state is not OrderState.PROPOSED:
            raise NotProposed(f"order {order_id} is {order.state.value}")
        if not accept:
            order.state = OrderState.REJECTED
            return order
        self.ledger.transfer(order.buyer, order.escrow, order.amount,
                             EventCategory.ESCROW_LOCK, time,
                             memo=f"order:{order_id}:lock")
        order.state = OrderState.ACCEPTED
        return order

    def fulfill_order(self, order_id: int,
                      time: Tick) -> tuple[ShopOrder, dict[ItemKind, int]]:
        """Release escrow: to the shop in time, back to the buyer when late.

        The payment routes escrow -> buyer -> shop so the purchase shows in
        the buyer's balance timeline as a SupplyPurchase marker. Returns the
        buyer's inventory delta (empty when refunded).
        """
        order = self._order(order_id)
        if order.state is not OrderState.ACCEPTED:
            raise NotAccepted(f"order {order_id} is {order.state.value}")
        if time > order.deadline:
            self.ledger.transfer(order.escrow, order.buyer, order.amount,
                                 EventCategory.ESCROW_RELEASE, time,
                                 memo=f"order:{order_id}:timeout", fee=0)
            order.state = OrderState.REFUNDED
            return order, {}
        self.ledger.transfer(order.escrow, order.buyer, order.amount,
                             EventCategory.ESCROW_RELEASE, time,
                             memo=f"order:{order_id}:release", fee=0)
        self.ledger.transfer(order.buyer, order.shop, order.amount,
                             EventCategory.SUPPLY_PURCHASE, time,
                             memo=f"order:{order_id}:paid", fee=0)
        order.state = OrderState.FULFILLED
        delta: dict[ItemKind, int] = {}
        for kind, qty in order.composition:
            delta[kind] = delta.get(kind, 0) + qty
        return order, delta

    # -- loan book ---------------------------------------------------------

    def record_loan(self, investor: AccountId, principal: int) -> LoanRecord:
        record = LoanRecord(investor=investor, principal=principal)
        self.loans.append(record)
        return record

    def outstanding_debt(self) -> int:
        return sum(loan.outstanding for loan in self.loans)

    def repay_loans(self, payer: AccountId, available: int,
                    time: Tick) -> list[LedgerEvent]:
        """Greedy repayment in registration order, capped by principal.

        The plan is computed first and validated against the payer balance
        (amounts plus ride-along fees), so the batch is all-or-nothing.
        """
        if available <= 0:
            return []
        plan: list[tuple[LoanRecord, int]] = []
        remaining = available
        for loan in self.loans:
            if remaining <= 0:
                break
            pay = min(loan.outstanding, remaining)
            if pay > 0:
                plan.append((loan, pay))
                remaining -= pay
        if not plan:
            return []
        fee = self.ledger.fee_schedule.get(EventCategory.LOAN_REPAYMENT, 0)
        total = sum(pay + fee for _, pay in plan)
        if self.ledger.balance(payer) < total:
            raise InsufficientFunds(
                f"repayment batch needs {total}, payer holds "
                f"{self.ledger.balance(payer)}")
        events = []
        for loan, pay in plan:
            events.append(self.ledger.transfer(
                payer, loan.investor, pay, EventCategory.LOAN_REPAYMENT,
                time, memo="loan:repay"))
            loan.repaid += pay
        return events

    # -- invariant probes ----------------------------------------------------

    def expected_escrow_locked(self) -> int:
        """Sum of locked amounts over non-terminal lots and orders."""
        locked = 0
        for lot in self.lots.values():
            if lot.state is LotState.OPEN and lot.highest is not None:
                locked += lot.highest.amount
        for order in self.orders.values():
            if order.state is OrderState.ACCEPTED:
                locked += order.amount
        return locked

    def actual_escrow_balance(self) -> int:
        total = 0
        for lot in self.lots.values():
            total += self.ledger.balance(lot.escrow)
        for order in self.orders.values():
            total += self.ledger.balance(order.escrow)
        return total
