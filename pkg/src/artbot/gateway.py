"""HTTP gateway: live auction browsing, session bids, event long-polling.

The runner owns one Simulation and is its only writer. HTTP handlers and
the pacing thread serialize on a single lock, so an API bid executes
between ticks at the simulation's current time through exactly the same
engine call scripted bidders use; the event log cannot tell them apart.

Amounts cross the wire as integer base-unit decimal strings.
"""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, Header, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .agent import Scenario, Simulation, timeline_csv
from .contracts import AuctionLot
from .errors import SimError, UnknownLot
from .ledger import AccountId, LedgerEvent


class GatewayRunner:
    """Paces a Simulation against the wall clock; serializes all access."""

    def __init__(self, scenario: Scenario, pace: float = 60.0):
        if pace <= 0:
            raise ValueError("pace must be > 0 ticks/second")
        self.sim = Simulation(scenario)
        self.pace = pace
        self.lock = threading.RLock()
        self.events_ready = threading.Condition(self.lock)
        self.deadlocked = False
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    # -- clock driving -------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, daemon=True,
                                        name="artbot-runner")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        with self.events_ready:
            self.events_ready.notify_all()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def _run(self) -> None:
        interval = 1.0 / self.pace
        while not self._stop.is_set():
            if not self.advance(1):
                break
            self._stop.wait(interval)

    def advance(self, ticks: int) -> bool:
        """Step the clock synchronously; returns False once nothing can
        move (finished or deadlocked)."""
        with self.events_ready:
            for _ in range(ticks):
                if self.sim.finished:
                    return False
                if self.sim.next_event_tick() is None:
                    self.deadlocked = True
                    return False
                before = len(self.sim.ledger.log)
                self.sim.step_tick(self.sim.now + 1)
                if len(self.sim.ledger.log) != before:
                    self.events_ready.notify_all()
            return True

    def fast_forward(self) -> None:
        """Drain the whole scenario without pacing (tests, equivalence)."""
        with self.events_ready:
            while not self.sim.finished:
                nxt = self.sim.next_event_tick()
                if nxt is None:
                    self.deadlocked = True
                    break
                self.sim.step_tick(nxt)
            self.events_ready.notify_all()

    # -- reads and commands --------------------------------------------------

    def resolve_session(self, token: Optional[str]) -> Optional[AccountId]:
        if token is None:
            return None
        with self.lock:
            return self.sim.sessions.get(token)

    def resolve_account(self, ref: str) -> Optional[AccountId]:
        with self.lock:
            if ref in self.sim.ledger.labels:
                return self.sim.ledger.labels[ref]
            try:
                account = AccountId.from_hex(ref)
            except (ValueError, TypeError):
                return None
            if account in self.sim.ledger.accounts:
                return account
        return None

    def label_of(self, account: AccountId) -> Optional[str]:
        with self.lock:
            for label, acct in self.sim.ledger.labels.items():
                if acct == account:
                    return label
        return None

    def place_bid(self, account: AccountId, lot_id: int,
                  amount: int) -> AuctionLot:
        with self.events_ready:
            self.sim.submit_bid(account, lot_id, amount)
            self.events_ready.notify_all()
            return self.sim.engine.lots[lot_id]

    def events_since(self, since: int, timeout: float
                     ) -> tuple[list[LedgerEvent], int]:
        deadline = threading.TIMEOUT_MAX if timeout <= 0 else timeout
        with self.events_ready:
            if timeout > 0 and len(self.sim.ledger.log) <= since:
                self.events_ready.wait(deadline)
            events = list(self.sim.ledger.log[since:])
            return events, len(self.sim.ledger.log)


# -- serialization ------------------------------------------------------------


def _lot_view(runner: GatewayRunner, lot: AuctionLot) -> dict:
    highest = None
    if lot.highest is not None:
        highest = {
            "bidder": lot.highest.bidder.hex,
            "bidder_label": runner.label_of(lot.highest.bidder),
            "amount": str(lot.highest.amount),
            "time": lot.highest.time,
        }
    return {
        "lot_id": lot.lot_id,
        "token_id": lot.token_id,
        "state": lot.state.value,
        "seller": lot.seller.hex,
        "reserve": str(lot.reserve),
        "min_increment": str(lot.min_increment),
        "open_time": lot.open_time,
        "close_time": lot.close_time,
        "platform_fee_bps": lot.platform_fee_bps,
        "bid_count": len(lot.bids),
        "highest": highest,
    }


def _event_view(event: LedgerEvent) -> dict:
    return {
        "seq": event.seq,
        "time": event.time,
        "from": event.src.hex,
        "to": event.dst.hex,
        "amount": str(event.amount),
        "fee": str(event.fee),
        "category": event.category.value,
        "memo": event.memo,
    }


class BidRequest(BaseModel):
    amount: str


def create_app(runner: GatewayRunner) -> FastAPI:
    app = FastAPI(title="artbot gateway")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.runner = runner

    def error(status: int, code: str, detail: str) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"error": code, "detail": detail})

    @app.get("/state")
    def state() -> dict:
        with runner.lock:
            sim = runner.sim
            return {
                "tick": sim.now,
                "stage": sim.state.stage.value,
                "finished": sim.finished,
                "deadlocked": runner.deadlocked,
                "paintings_completed": sim.state.paintings_completed,
                "target_paintings": sim.scenario.target_paintings,
                "inventory": {kind.value: qty for kind, qty
                              in sim.state.inventory.items()},
                "robot_balance": str(sim.ledger.balance(sim.robot)),
                "robot_account": sim.robot.hex,
                "event_count": len(sim.ledger.log),
            }

    @app.get("/session")
    def session(x_session_token: Optional[str] = Header(default=None)):
        account = runner.resolve_session(x_session_token)
        if account is None:
            return error(401, "UnknownSession", "missing or unknown token")
        with runner.lock:
            return {
                "account": account.hex,
                "label": runner.label_of(account),
                "balance": str(runner.sim.ledger.balance(account)),
            }

    @app.get("/auctions")
    def auctions() -> dict:
        with runner.lock:
            lots = [_lot_view(runner, lot)
                    for lot in runner.sim.engine.lots.values()]
            return {"tick": runner.sim.now, "auctions": lots}

    @app.get("/auctions/{lot_id}")
    def auction_detail(lot_id: int):
        with runner.lock:
            lot = runner.sim.engine.lots.get(lot_id)
            if lot is None:
                return error(404, "UnknownLot", f"no lot {lot_id}")
            view = _lot_view(runner, lot)
            record = runner.sim.lot_paintings.get(lot_id)
            if record is not None:
                view["preview_svg"] = record.svg
                view["topic"] = {
                    "keyword": record.topic.keyword_source,
                    "glyphs": record.topic.keyword_glyphs,
                    "date": record.topic.date.isoformat(),
                }
            view["tick"] = runner.sim.now
            return view

    @app.post("/auctions/{lot_id}/bids")
    def post_bid(lot_id: int, bid: BidRequest,
                 x_session_token: Optional[str] = Header(default=None)):
        account = runner.resolve_session(x_session_token)
        if account is None:
            return error(401, "UnknownSession", "missing or unknown token")
        try:
            amount = int(bid.amount)
        except ValueError:
            return error(400, "BadAmount",
                         "amount must be a base-unit decimal string")
        try:
            lot = runner.place_bid(account, lot_id, amount)
        except UnknownLot as exc:
            return error(404, exc.code, str(exc))
        except SimError as exc:
            return error(409, exc.code, str(exc))
        return {"accepted": True, "lot": _lot_view(runner, lot)}

    @app.get("/timeline/{account_ref}")
    def timeline(account_ref: str, format: Optional[str] = Query(None)):
        account = runner.resolve_account(account_ref)
        if account is None:
            return error(404, "UnknownAccount", f"no account {account_ref}")
        with runner.lock:
            entries = runner.sim.ledger.balance_timeline(account)
            if format == "csv":
                return Response(content=timeline_csv(entries),
                                media_type="text/csv")
            return {
                "account": account.hex,
                "label": runner.label_of(account),
                "rows": [{
                    "time": entry.time,
                    "balance": str(entry.balance_after),
                    "category": entry.category.value,
                } for entry in entries],
            }

    @app.get("/events")
    def events(since: int = Query(0, ge=0),
               timeout: float = Query(0.0, ge=0.0, le=30.0)) -> dict:
        batch, next_seq = runner.events_since(since, timeout)
        return {"events": [_event_view(e) for e in batch],
                "next": next_seq}

    return app
