"""The autonomy loop: paint, auction, collect, restock, repay.

A Simulation wires the ledger, contract engine, painting pipeline, and
scripted bidders into one discrete-event run over a minute-granularity
simulated clock. Events execute in (tick, priority, sequence) order from a
heap, and externally submitted commands (gateway bids) drain at the top of
their arrival tick, so a run is a pure function of (scenario, seed,
command trace): replays hash identically.

Scenario files are JSON; `load_scenario` validates the shape and reports
every offending key at once rather than failing one field at a time.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import json
from dataclasses import dataclass, field
from datetime import date as Date
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import canvas as canvas_mod
from . import motion as motion_mod
from . import strokes as strokes_mod
from . import topic as topic_mod
from .contracts import (
    ORDER_TERMINAL,
    ContractEngine,
    ItemKind,
    LotState,
    SettlementReport,
)
from .errors import (
    Deadlock,
    InsufficientFunds,
    OutOfSupplies,
    ScenarioError,
    SimError,
)
from .ledger import (
    FEE_SINK,
    AccountId,
    EventCategory,
    Ledger,
    TimelineEntry,
    format_tokens,
    log_sha256,
    tokens,
    write_log,
)


class Stage(Enum):
    FUNDING = "Funding"
    PRODUCING = "Producing"
    AUCTIONING = "Auctioning"
    SETTLING = "Settling"
    RESTOCKING = "Restocking"
    REPAYING = "Repaying"
    IDLE = "Idle"


# The Settling fan-out covers the policy outcomes; Repaying and Restocking
# feed back into production (or retirement) so one settlement can chain
# repay -> restock -> produce within a single tick.
STAGE_TRANSITIONS: dict[Stage, frozenset[Stage]] = {
    Stage.FUNDING: frozenset({Stage.PRODUCING, Stage.IDLE}),
    Stage.PRODUCING: frozenset({Stage.AUCTIONING}),
    Stage.AUCTIONING: frozenset({Stage.SETTLING}),
    Stage.SETTLING: frozenset({Stage.RESTOCKING, Stage.REPAYING,
                               Stage.PRODUCING, Stage.IDLE}),
    Stage.REPAYING: frozenset({Stage.RESTOCKING, Stage.PRODUCING,
                               Stage.IDLE}),
    Stage.RESTOCKING: frozenset({Stage.PRODUCING, Stage.IDLE}),
    Stage.IDLE: frozenset(),
}


@dataclass
class AgentState:
    wallet: AccountId
    inventory: dict[ItemKind, int]
    loans: list = field(default_factory=list)  # LoanRecord, shared with engine
    stage: Stage = Stage.FUNDING
    paintings_completed: int = 0
    in_flight_order: Optional[int] = None
    stage_history: list[tuple[int, Stage]] = field(default_factory=list)

    def can_produce(self) -> bool:
        return all(self.inventory.get(kind, 0) >= 1 for kind in
                   (ItemKind.CANVAS, ItemKind.PAINT, ItemKind.BRUSH))


# -- scenario configuration -------------------------------------------------


@dataclass(frozen=True)
class InvestorSpec:
    label: str
    loan: int


@dataclass(frozen=True)
class BidderSpec:
    label: str
    budget: int
    strategy: str  # "incremental" | "limit" | "sniper"
    limit: int  # never bids above this amount
    step: int = 0  # incremental: raise over current highest
    delay: int = 5  # sniper: ticks before close
    poll_interval: int = 30


@dataclass(frozen=True)
class SessionSpec:
    token: str
    label: str
    budget: int


@dataclass(frozen=True)
class AuctionParams:
    reserve: int
    min_increment: int
    duration_ticks: int
    platform_fee_bps: int


@dataclass(frozen=True)
class SupplyParams:
    bundle_price: int
    bundle: dict[ItemKind, int]
    response_ticks: int
    delivery_ticks: int
    deadline_ticks: int


@dataclass(frozen=True)
class SetupParams:
    signup_fee: int
    gas_fee: int
    gas_payments: int
    auction_gas: int
    setup_tick: int
    start_tick: int


@dataclass(frozen=True)
class PipelineParams:
    image_width: int
    image_height: int
    simplify_epsilon_px: float
    brush_radius_px: int
    strokes_per_dip: int
    z_hover_m: float
    dip_clearance_m: float
    v_max_mps: float
    a_max_mps2: float
    sample_dt_s: float


@dataclass(frozen=True)
class Scenario:
    seed: int
    horizon_ticks: int
    robot_label: str
    platform_label: str
    shop_label: str
    investors: tuple[InvestorSpec, ...]
    bidders: tuple[BidderSpec, ...]
    sessions: tuple[SessionSpec, ...]
    fee_schedule: dict[EventCategory, int]
    setup: SetupParams
    auction: AuctionParams
    supplies: SupplyParams
    reserve_floor: int
    target_paintings: int
    topic_dates: tuple[Date, ...]
    production_ticks: int
    pipeline: PipelineParams
    canvas: canvas_mod.PoseConfig
    workspace: motion_mod.Workspace
    genesis_inventory: dict[ItemKind, int]


_ITEM_KEYS = {"canvases": ItemKind.CANVAS, "paint_units": ItemKind.PAINT,
              "brushes": ItemKind.BRUSH}


class _SchemaReader:
    """Dict walker that collects schema complaints instead of raising."""

    def __init__(self, data: dict, errors: list[str], prefix: str = ""):
        if not isinstance(data, dict):
            errors.append(f"{prefix or 'scenario'}: expected object")
            data = {}
        self.data = data
        self.errors = errors
        self.prefix = prefix
        self.seen: set[str] = set()

    def _key(self, name: str) -> str:
        return f"{self.prefix}{name}"

    def get(self, name: str, kind, default=None, required: bool = False):
        self.seen.add(name)
        if name not in self.data:
            if required:
                self.errors.append(f"missing key: {self._key(name)}")
            return default
        value = self.data[name]
        if kind is int and isinstance(value, bool):
            value = None
        elif kind is float and isinstance(value, (int, float)) \
                and not isinstance(value, bool):
            return float(value)
        if kind is not None and not isinstance(value, kind):
            self.errors.append(
                f"wrong type for {self._key(name)}: expected "
                f"{getattr(kind, '__name__', kind)}")
            return default
        return value

    def amount(self, name: str, default: str = "0",
               required: bool = False) -> int:
        raw = self.get(name, str, default=default, required=required)
        try:
            return tokens(raw)
        except (ValueError, TypeError):
            self.errors.append(f"bad token amount at {self._key(name)}")
            return 0

    def section(self, name: str, required: bool = True) -> "_SchemaReader":
        self.seen.add(name)
        value = self.data.get(name)
        if value is None:
            if required:
                self.errors.append(f"missing key: {self._key(name)}")
            value = {}
        return _SchemaReader(value, self.errors, f"{self._key(name)}.")

    def finish(self) -> None:
        for name in sorted(set(self.data) - self.seen):
            self.errors.append(f"unknown key: {self._key(name)}")


def _parse_inventory(reader: _SchemaReader) -> dict[ItemKind, int]:
    out = {}
    for key, kind in _ITEM_KEYS.items():
        qty = reader.get(key, int, default=0)
        if qty is not None and qty < 0:
            reader.errors.append(f"negative count at {reader._key(key)}")
            qty = 0
        out[kind] = qty or 0
    reader.finish()
    return out


def _vec3(reader: _SchemaReader, name: str,
          default: tuple[float, float, float]) -> tuple[float, float, float]:
    value = reader.get(name, list, default=list(default))
    if not (isinstance(value, list) and len(value) == 3
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in value)):
        reader.errors.append(
            f"wrong type for {reader._key(name)}: expected [x, y, z]")
        return default
    return (float(value[0]), float(value[1]), float(value[2]))


def parse_scenario(data: dict) -> Scenario:
    """Validate and bind a scenario dict; ScenarioError lists every
    offending key."""
    errors: list[str] = []
    root = _SchemaReader(data, errors)

    seed = root.get("seed", int, default=0)
    horizon = root.get("horizon_ticks", int, default=262080)
    accounts = root.section("accounts", required=False)
    robot_label = accounts.get("robot", str, default="robot")
    platform_label = accounts.get("platform", str, default="auction-platform")
    shop_label = accounts.get("shop", str, default="supply-shop")
    accounts.finish()

    investors = []
    for i, item in enumerate(root.get("investors", list, default=[]) or []):
        r = _SchemaReader(item, errors, f"investors[{i}].")
        investors.append(InvestorSpec(
            label=r.get("label", str, required=True) or f"investor-{i}",
            loan=r.amount("loan", required=True)))
        r.finish()

    bidders = []
    for i, item in enumerate(root.get("bidders", list, default=[]) or []):
        r = _SchemaReader(item, errors, f"bidders[{i}].")
        strategy = r.get("strategy", str, default="incremental")
        if strategy not in ("incremental", "limit", "sniper"):
            errors.append(f"unknown strategy at bidders[{i}].strategy")
            strategy = "incremental"
        bidders.append(BidderSpec(
            label=r.get("label", str, required=True) or f"bidder-{i}",
            budget=r.amount("budget", required=True),
            strategy=strategy,
            limit=r.amount("limit", required=True),
            step=r.amount("step", default="0"),
            delay=r.get("delay", int, default=5),
            poll_interval=r.get("poll_interval", int, default=30)))
        r.finish()

    sessions = []
    for i, item in enumerate(root.get("sessions", list, default=[]) or []):
        r = _SchemaReader(item, errors, f"sessions[{i}].")
        sessions.append(SessionSpec(
            token=r.get("token", str, required=True) or f"session-{i}",
            label=r.get("label", str, required=True) or f"session-{i}",
            budget=r.amount("budget", default="0")))
        r.finish()

    fees_reader = root.section("fees", required=False)
    fee_schedule: dict[EventCategory, int] = {}
    for category in EventCategory:
        fee_schedule[category] = fees_reader.amount(category.value,
                                                    default="0")
    fees_reader.finish()

    setup_r = root.section("setup", required=False)
    setup = SetupParams(
        signup_fee=setup_r.amount("signup_fee", default="0.2"),
        gas_fee=setup_r.amount("gas_fee", default="0.01"),
        gas_payments=setup_r.get("gas_payments", int, default=3),
        auction_gas=setup_r.amount("auction_gas", default="0.005"),
        setup_tick=setup_r.get("setup_tick", int, default=10),
        start_tick=setup_r.get("start_tick", int, default=20))
    setup_r.finish()

    auction_r = root.section("auction", required=False)
    auction = AuctionParams(
        reserve=auction_r.amount("reserve", default="0.4"),
        min_increment=auction_r.amount("min_increment", default="0.05"),
        duration_ticks=auction_r.get("duration_ticks", int, default=2880),
        platform_fee_bps=auction_r.get("platform_fee_bps", int, default=250))
    auction_r.finish()

    supplies_r = root.section("supplies", required=False)
    bundle = _parse_inventory(supplies_r.section("bundle", required=False))
    supplies = SupplyParams(
        bundle_price=supplies_r.amount("bundle_price", default="0.8"),
        bundle=bundle if any(bundle.values()) else {
            ItemKind.CANVAS: 3, ItemKind.PAINT: 3, ItemKind.BRUSH: 1},
        response_ticks=supplies_r.get("response_ticks", int, default=60),
        delivery_ticks=supplies_r.get("delivery_ticks", int, default=720),
        deadline_ticks=supplies_r.get("deadline_ticks", int, default=2880))
    supplies_r.finish()

    repay_r = root.section("repayment", required=False)
    reserve_floor = repay_r.amount("reserve_floor", default="0.9")
    repay_r.finish()

    paintings_r = root.section("paintings", required=False)
    target = paintings_r.get("target", int, default=4)
    raw_dates = paintings_r.get("topic_dates", list, default=[]) or []
    topic_dates = []
    for i, raw in enumerate(raw_dates):
        try:
            topic_dates.append(Date.fromisoformat(raw))
        except (TypeError, ValueError):
            errors.append(f"bad date at paintings.topic_dates[{i}]")
    production_ticks = paintings_r.get("production_ticks", int, default=240)
    paintings_r.finish()
    if target and len(topic_dates) < target:
        errors.append("paintings.topic_dates: need one date per painting")

    pipe_r = root.section("pipeline", required=False)
    pipeline = PipelineParams(
        image_width=pipe_r.get("image_width", int, default=512),
        image_height=pipe_r.get("image_height", int, default=384),
        simplify_epsilon_px=pipe_r.get("simplify_epsilon_px", float,
                                       default=0.75),
        brush_radius_px=pipe_r.get("brush_radius_px", int, default=2),
        strokes_per_dip=pipe_r.get("strokes_per_dip", int, default=4),
        z_hover_m=pipe_r.get("z_hover_m", float, default=0.02),
        dip_clearance_m=pipe_r.get("dip_clearance_m", float, default=0.05),
        v_max_mps=pipe_r.get("v_max_mps", float, default=0.25),
        a_max_mps2=pipe_r.get("a_max_mps2", float, default=0.5),
        sample_dt_s=pipe_r.get("sample_dt_s", float, default=0.05))
    pipe_r.finish()

    canvas_r = root.section("canvas", required=False)
    pose_config = canvas_mod.PoseConfig(
        center=_vec3(canvas_r, "center_m", (0.0, 1.0, 1.2)),
        yaw=canvas_r.get("yaw_rad", float, default=0.0),
        width=canvas_r.get("width_m", float, default=0.5),
        height=canvas_r.get("height_m", float, default=0.4),
        noise_pos=canvas_r.get("noise_pos_m", float, default=0.0),
        noise_yaw=canvas_r.get("noise_yaw_rad", float, default=0.0))
    canvas_r.finish()

    ws_r = root.section("workspace", required=False)
    ws_min = _vec3(ws_r, "min_m", (-1.265, 0.0, 0.0))
    ws_max = _vec3(ws_r, "max_m", (1.265, 2.0, 2.57))
    ws_cup = _vec3(ws_r, "cup_m", (0.8, 0.6, 0.9))
    ws_r.finish()

    genesis_inventory = _parse_inventory(
        root.section("genesis_inventory", required=False))
    if not any(genesis_inventory.values()):
        genesis_inventory = {ItemKind.CANVAS: 2, ItemKind.PAINT: 2,
                             ItemKind.BRUSH: 2}
    root.finish()

    labels = [robot_label, platform_label, shop_label]
    labels += [i.label for i in investors] + [b.label for b in bidders]
    labels += [s.label for s in sessions]
    dupes = {l for l in labels if labels.count(l) > 1}
    if dupes:
        errors.append("duplicate account labels: " + ", ".join(sorted(dupes)))

    if errors:
        raise ScenarioError("scenario schema: " + "; ".join(errors))

    try:
        workspace = motion_mod.Workspace(min_corner=ws_min,
                                         max_corner=ws_max, cup=ws_cup)
    except SimError as exc:
        raise ScenarioError(f"scenario schema: workspace.cup_m: {exc}")

    return Scenario(
        seed=seed, horizon_ticks=horizon, robot_label=robot_label,
        platform_label=platform_label, shop_label=shop_label,
        investors=tuple(investors), bidders=tuple(bidders),
        sessions=tuple(sessions), fee_schedule=fee_schedule, setup=setup,
        auction=auction, supplies=supplies, reserve_floor=reserve_floor,
        target_paintings=target, topic_dates=tuple(topic_dates),
        production_ticks=production_ticks, pipeline=pipeline,
        canvas=pose_config, workspace=workspace,
        genesis_inventory=genesis_inventory)


def load_scenario(path, seed_override: Optional[int] = None) -> Scenario:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario schema: invalid JSON: {exc}")
    if seed_override is not None:
        data = dict(data)
        data["seed"] = seed_override
    return parse_scenario(data)


def default_scenario_path():
    return topic_mod.fixture_path("scenario_default.json")


# -- policies ---------------------------------------------------------------


def restock_policy(state: AgentState,
                   supplies: SupplyParams) -> Optional[dict[ItemKind, int]]:
    """Propose the configured bundle iff the canvas counter reads one and
    no order is already in flight."""
    if state.inventory.get(ItemKind.CANVAS, 0) != 1:
        return None
    if state.in_flight_order is not None:
        return None
    return dict(supplies.bundle)


def repayment_policy(state: AgentState, ledger: Ledger,
                     reserve_floor: int, outstanding: int) -> int:
    """Surplus above the operating reserve, capped by outstanding debt."""
    surplus = ledger.balance(state.wallet) - reserve_floor
    if surplus <= 0 or outstanding <= 0:
        return 0
    return min(surplus, outstanding)


# -- run records ------------------------------------------------------------


@dataclass
class PipelineArtifacts:
    """Everything the painting pipeline produces for one topic."""

    topic: topic_mod.Topic
    pose: canvas_mod.CanvasPose
    raster: np.ndarray
    skeleton: np.ndarray
    strokes: strokes_mod.StrokeSet
    simplified: strokes_mod.StrokeSet
    trajectory: motion_mod.Trajectory
    painted: np.ndarray
    svg: str
    artwork_ref: str


def paint_topic(selected: topic_mod.Topic, pipe: PipelineParams,
                pose_config: canvas_mod.PoseConfig,
                workspace: motion_mod.Workspace,
                noise_seed: int = 0) -> PipelineArtifacts:
    """Pure pipeline: topic -> raster -> strokes -> trajectory -> painting."""
    raster = topic_mod.render_topic(selected, pipe.image_width,
                                    pipe.image_height)
    skeleton = strokes_mod.skeletonize(raster.bits)
    traced = strokes_mod.trace_strokes(skeleton)
    ordered = strokes_mod.order_strokes(traced)
    simplified = strokes_mod.simplify(ordered, pipe.simplify_epsilon_px)
    pose = canvas_mod.pose_provider(pose_config, workspace.bounds,
                                    noise_seed=noise_seed)
    metric = canvas_mod.pixels_to_canvas(simplified, pipe.image_width,
                                         pipe.image_height, pose)
    program = motion_mod.build_program(
        metric, workspace, strokes_per_dip=pipe.strokes_per_dip,
        z_hover=pipe.z_hover_m, dip_clearance=pipe.dip_clearance_m)
    trajectory = motion_mod.time_parameterize(
        program, pipe.v_max_mps, pipe.a_max_mps2, pipe.sample_dt_s)
    painted = motion_mod.simulate_execution(
        trajectory, pose, pipe.brush_radius_px, pipe.image_width,
        pipe.image_height)
    artwork_ref = hashlib.sha256(
        painted.tobytes()
        + f"{pipe.image_width}x{pipe.image_height}".encode()).hexdigest()
    svg = strokes_mod.strokes_to_svg(simplified, pipe.image_width,
                                     pipe.image_height)
    return PipelineArtifacts(
        topic=selected, pose=pose, raster=raster.bits, skeleton=skeleton.bits,
        strokes=ordered, simplified=simplified, trajectory=trajectory,
        painted=painted, svg=svg, artwork_ref=artwork_ref)


def coverage_metrics(skeleton: np.ndarray, painted: np.ndarray,
                     brush_radius_px: int) -> tuple[float, float]:
    """(covered fraction of skeleton, spurious fraction of painted)."""
    skeleton_px = int(skeleton.sum())
    painted_px = int(painted.sum())
    covered = int((skeleton & painted).sum()) / skeleton_px \
        if skeleton_px else 1.0
    band = motion_mod.dilate_disk(skeleton, brush_radius_px)
    spurious = int((painted & ~band).sum()) / painted_px \
        if painted_px else 0.0
    return covered, spurious


@dataclass
class PaintingRecord:
    index: int
    topic: topic_mod.Topic
    token_id: int
    lot_id: int
    artwork_ref: str
    pose: canvas_mod.CanvasPose
    raster: np.ndarray
    skeleton: np.ndarray
    strokes: strokes_mod.StrokeSet
    simplified: strokes_mod.StrokeSet
    painted: np.ndarray
    trajectory: motion_mod.Trajectory
    svg: str
    started_tick: int


@dataclass
class RunResult:
    scenario: Scenario
    ledger: Ledger
    engine: ContractEngine
    state: AgentState
    paintings: list[PaintingRecord]
    reports: list[SettlementReport]
    final_tick: int
    log_hash: str

    def timeline(self, account: Optional[AccountId] = None
                 ) -> list[TimelineEntry]:
        return self.ledger.balance_timeline(account or self.state.wallet)

    def category_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for entry in self.timeline():
            counts[entry.category.value] = \
                counts.get(entry.category.value, 0) + 1
        return counts


def closure_terms(ledger: Ledger, wallet: AccountId) -> dict[str, int]:
    """Category sums over the wallet's events for the closure identity.

    Escrow locks and releases are tracked separately; on a finished run
    they cancel exactly, leaving final == funding + sales - platform fees
    - network fees - supplies - repayments.
    """
    sums = {category: 0 for category in EventCategory}
    fees_paid = 0
    for event in ledger.log:
        if event.dst == wallet:
            sums[event.category] += event.amount
        if event.src == wallet:
            sums[event.category] -= event.amount
            fees_paid += event.fee
    return {
        "funding": sums[EventCategory.FUNDING],
        "sales": sums[EventCategory.SALE],
        "platform_fees": -sums[EventCategory.PLATFORM_FEE],
        "network_fees": -sums[EventCategory.NETWORK_FEE] + fees_paid,
        "supplies": -sums[EventCategory.SUPPLY_PURCHASE],
        "repayments": -sums[EventCategory.LOAN_REPAYMENT],
        "escrow_net": sums[EventCategory.ESCROW_LOCK]
        + sums[EventCategory.ESCROW_RELEASE],
        "internal": sums[EventCategory.INTERNAL],
        "final_balance": ledger.balance(wallet),
    }


# -- the discrete-event simulation -------------------------------------------

# Priorities fix the intra-tick order: external commands, shop protocol,
# scripted bids, lot closes, then agent stage work.
P_COMMAND, P_SHOP, P_BID, P_CLOSE, P_AGENT = range(5)


@dataclass
class _Bidder:
    spec: BidderSpec
    account: AccountId


class Simulation:
    """Single-writer scheduler over one scenario's world state."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.ledger = Ledger(fee_schedule=dict(scenario.fee_schedule))
        self.trends = topic_mod.FileTrendClient()
        self.translator = topic_mod.FileTranslationClient()
        self._heap: list[tuple[int, int, int, Callable[[int], None]]] = []
        self._seq = itertools.count()
        self.now = 0
        self.finished = False
        self.paintings: list[PaintingRecord] = []
        self.reports: list[SettlementReport] = []
        self.lot_paintings: dict[int, PaintingRecord] = {}
        self._genesis()
        self.engine = ContractEngine(
            self.ledger, self.platform,
            platform_fee_bps=scenario.auction.platform_fee_bps)
        self.state = AgentState(wallet=self.robot,
                                inventory=dict(scenario.genesis_inventory),
                                loans=self.engine.loans)
        self.state.stage_history.append((0, Stage.FUNDING))
        self._fund()
        self.schedule(scenario.setup.setup_tick, P_AGENT, self._setup_fees)
        self.schedule(scenario.setup.start_tick, P_AGENT,
                      self._start_painting)

    # -- construction -------------------------------------------------------

    def _genesis(self) -> None:
        sc = self.scenario
        self.robot = self.ledger.create_account(sc.robot_label)
        self.platform = self.ledger.create_account(sc.platform_label)
        self.shop = self.ledger.create_account(sc.shop_label)
        self.investors = [(spec, self.ledger.create_account(spec.label))
                          for spec in sc.investors]
        self.bidders = [_Bidder(spec, self.ledger.create_account(spec.label))
                        for spec in sc.bidders]
        self.sessions: dict[str, AccountId] = {}
        for spec in sc.sessions:
            account = self.ledger.create_account(spec.label)
            self.sessions[spec.token] = account
            if spec.budget > 0:
                self.ledger.mint(account, spec.budget, time=0,
                                 memo="genesis:session")
        for spec, account in self.investors:
            self.ledger.mint(account, spec.loan, time=0,
                             memo="genesis:investor")
        for bidder in self.bidders:
            if bidder.spec.budget > 0:
                self.ledger.mint(bidder.account, bidder.spec.budget, time=0,
                                 memo="genesis:bidder")
        self.ledger.seal_genesis()

    def _fund(self) -> None:
        for spec, account in self.investors:
            self.ledger.transfer(account, self.robot, spec.loan,
                                 EventCategory.FUNDING, 0,
                                 memo=f"loan:{spec.label}")
            self.engine.record_loan(account, spec.loan)

    # -- scheduling core ----------------------------------------------------

    def schedule(self, tick: int, priority: int,
                 action: Callable[[int], None]) -> None:
        heapq.heappush(self._heap, (tick, priority, next(self._seq), action))

    def step_tick(self, tick: int) -> int:
        """Run every event due at `tick`; returns the count executed."""
        self.now = tick
        ran = 0
        while self._heap and self._heap[0][0] <= tick:
            _, _, _, action = heapq.heappop(self._heap)
            action(tick)
            ran += 1
        return ran

    def next_event_tick(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None

    def run_fast(self) -> RunResult:
        """Drive the clock to completion (or Deadlock) without pacing."""
        while not self.finished:
            nxt = self.next_event_tick()
            if nxt is None:
                raise Deadlock(self._diagnostic("event queue empty"))
            if nxt > self.scenario.horizon_ticks:
                raise Deadlock(self._diagnostic(
                    f"next event at {nxt} beyond horizon"))
            self.step_tick(nxt)
        return self.result()

    def result(self) -> RunResult:
        return RunResult(
            scenario=self.scenario, ledger=self.ledger, engine=self.engine,
            state=self.state, paintings=self.paintings, reports=self.reports,
            final_tick=self.now, log_hash=log_sha256(self.ledger.log))

    def _diagnostic(self, reason: str) -> str:
        lots = {lot_id: lot.state.value
                for lot_id, lot in self.engine.lots.items()}
        orders = {oid: order.state.value
                  for oid, order in self.engine.orders.items()}
        return (f"{reason}; tick={self.now} stage={self.state.stage.value} "
                f"paintings={self.state.paintings_completed}/"
                f"{self.scenario.target_paintings} "
                f"inventory={{{self._inventory_str()}}} "
                f"balance={format_tokens(self.ledger.balance(self.robot))} "
                f"lots={lots} orders={orders}")

    def _inventory_str(self) -> str:
        return ", ".join(f"{kind.value}: {qty}"
                         for kind, qty in self.state.inventory.items())

    # -- agent stage machine -------------------------------------------------

    def _transition(self, tick: int, stage: Stage) -> None:
        if stage is self.state.stage:
            return
        if stage not in STAGE_TRANSITIONS[self.state.stage]:
            raise ScenarioError(
                f"illegal stage move {self.state.stage.value} -> "
                f"{stage.value} at tick {tick}")
        self.state.stage = stage
        self.state.stage_history.append((tick, stage))

    def _setup_fees(self, tick: int) -> None:
        """Account setup: auction-site sign-up and wallet gas payments."""
        sc = self.scenario
        if sc.setup.signup_fee > 0:
            self.ledger.transfer(self.robot, self.platform,
                                 sc.setup.signup_fee,
                                 EventCategory.PLATFORM_FEE, tick,
                                 memo="signup:auction-site")
        for i in range(sc.setup.gas_payments):
            if sc.setup.gas_fee > 0:
                self.ledger.transfer(self.robot, FEE_SINK, sc.setup.gas_fee,
                                     EventCategory.NETWORK_FEE, tick,
                                     memo=f"gas:setup:{i}")

    def run_cycle(self, topic_date: Date, tick: int) -> PaintingRecord:
        """One full painting: pipeline, mint, open auction. Atomic.

        All pipeline stages run before any state mutates, so a failure in
        rendering or planning leaves inventory, tokens, and stage intact.
        """
        if self.state.stage is not Stage.PRODUCING:
            raise ScenarioError(
                f"stage {self.state.stage.value} does not permit production")
        if not self.state.can_produce():
            raise OutOfSupplies(self._inventory_str())
        sc = self.scenario
        index = len(self.paintings)

        selected = topic_mod.select_topic(topic_date, self.trends,
                                          self.translator)
        art = paint_topic(selected, sc.pipeline, sc.canvas, sc.workspace,
                          noise_seed=sc.seed * 1000 + index)

        token = self.engine.mint_token(self.robot, art.artwork_ref,
                                       time=tick)
        open_time = tick + sc.production_ticks
        lot = self.engine.open_auction(
            token.token_id, self.robot, sc.auction.reserve,
            sc.auction.min_increment, sc.auction.duration_ticks,
            now=open_time)
        self.state.inventory[ItemKind.CANVAS] -= 1
        self.state.inventory[ItemKind.PAINT] -= 1
        self.state.paintings_completed += 1

        record = PaintingRecord(
            index=index, topic=selected, token_id=token.token_id,
            lot_id=lot.lot_id, artwork_ref=art.artwork_ref, pose=art.pose,
            raster=art.raster, skeleton=art.skeleton, strokes=art.strokes,
            simplified=art.simplified, painted=art.painted,
            trajectory=art.trajectory, svg=art.svg, started_tick=tick)
        self.paintings.append(record)
        self.lot_paintings[lot.lot_id] = record
        return record

    def _start_painting(self, tick: int) -> None:
        sc = self.scenario
        index = len(self.paintings)
        if index >= sc.target_paintings:
            self._continue_or_idle(tick)
            return
        self._transition(tick, Stage.PRODUCING)
        if sc.setup.auction_gas > 0:
            self.ledger.transfer(self.robot, FEE_SINK, sc.setup.auction_gas,
                                 EventCategory.NETWORK_FEE, tick,
                                 memo=f"gas:auction-open:{index}")
        record = self.run_cycle(sc.topic_dates[index], tick)
        self._transition(tick, Stage.AUCTIONING)
        lot = self.engine.lots[record.lot_id]
        self.schedule(lot.close_time, P_CLOSE,
                      lambda t, lot_id=record.lot_id: self._close_lot(
                          lot_id, t))
        for bidder in self.bidders:
            if bidder.spec.strategy == "sniper":
                first = max(lot.open_time, lot.close_time - bidder.spec.delay)
            else:
                first = lot.open_time + bidder.spec.poll_interval
            if first < lot.close_time:
                self.schedule(first, P_BID,
                              lambda t, b=bidder, lot_id=record.lot_id:
                              self._bidder_poll(b, lot_id, t))

    def _close_lot(self, lot_id: int, tick: int) -> None:
        report = self.engine.close_auction(lot_id, tick)
        self.reports.append(report)
        self._transition(tick, Stage.SETTLING)
        self._settle_policies(tick)

    def _settle_policies(self, tick: int) -> None:
        """Post-settlement bookkeeping: repay, restock, then continue."""
        sc = self.scenario
        repay = repayment_policy(self.state, self.ledger, sc.reserve_floor,
                                 self.engine.outstanding_debt())
        if repay > 0:
            self._transition(tick, Stage.REPAYING)
            self.engine.repay_loans(self.robot, repay, tick)
        proposal = restock_policy(self.state, sc.supplies)
        if proposal is not None:
            self._propose_restock(proposal, tick)
        self._continue_or_idle(tick)

    def _propose_restock(self, proposal: dict[ItemKind, int],
                         tick: int) -> None:
        sc = self.scenario
        composition = [(kind, qty) for kind, qty in proposal.items()
                       if qty > 0]
        try:
            order = self.engine.propose_order(
                self.robot, self.shop, composition, sc.supplies.bundle_price,
                deadline=tick + sc.supplies.deadline_ticks, now=tick)
        except InsufficientFunds:
            return  # skip the order; retried at the next settlement
        self._transition(tick, Stage.RESTOCKING)
        self.state.in_flight_order = order.order_id
        self.schedule(tick + sc.supplies.response_ticks, P_SHOP,
                      lambda t, oid=order.order_id: self._shop_respond(
                          oid, t))

    def _shop_respond(self, order_id: int, tick: int) -> None:
        try:
            self.engine.shop_respond(order_id, accept=True, time=tick)
        except InsufficientFunds:
            self.engine.shop_respond(order_id, accept=False, time=tick)
            self.state.in_flight_order = None
            return
        self.schedule(tick + self.scenario.supplies.delivery_ticks, P_SHOP,
                      lambda t, oid=order_id: self._deliver(oid, t))

    def _deliver(self, order_id: int, tick: int) -> None:
        order, delta = self.engine.fulfill_order(order_id, tick)
        self.state.in_flight_order = None
        for kind, qty in delta.items():
            self.state.inventory[kind] = \
                self.state.inventory.get(kind, 0) + qty
        if self.state.stage is Stage.RESTOCKING:
            self._continue_or_idle(tick)

    def _continue_or_idle(self, tick: int) -> None:
        """Schedule the next painting, wait on a delivery, or retire."""
        sc = self.scenario
        done_painting = self.state.paintings_completed >= sc.target_paintings
        if not done_painting and self.state.can_produce():
            self.schedule(tick + 1, P_AGENT, self._start_painting)
            return
        if self.state.in_flight_order is not None:
            if self.state.stage is not Stage.RESTOCKING:
                self._transition(tick, Stage.RESTOCKING)
            return  # delivery (or refund) will re-enter this decision
        if done_painting and self._all_contracts_terminal():
            self._transition(tick, Stage.IDLE)
            self.finished = True
        # otherwise: out of supplies with no order in flight and no income
        # pending; nothing left to schedule, so run_fast surfaces Deadlock
        # with this state in the diagnostic.

    def _all_contracts_terminal(self) -> bool:
        lots_done = all(
            lot.state in (LotState.SETTLED, LotState.UNSOLD,
                          LotState.CANCELLED)
            for lot in self.engine.lots.values())
        orders_done = all(order.state in ORDER_TERMINAL
                          for order in self.engine.orders.values())
        return lots_done and orders_done

    # -- scripted bidders ----------------------------------------------------

    def _bidder_poll(self, bidder: _Bidder, lot_id: int, tick: int) -> None:
        lot = self.engine.lots[lot_id]
        if lot.state is not LotState.OPEN or tick >= lot.close_time:
            return
        spec = bidder.spec

        def reschedule() -> None:
            interval = 1 if spec.strategy == "sniper" else spec.poll_interval
            nxt = tick + interval
            if nxt < lot.close_time:
                self.schedule(nxt, P_BID,
                              lambda t: self._bidder_poll(bidder, lot_id, t))

        if lot.highest is not None \
                and lot.highest.bidder == bidder.account:
            reschedule()
            return
        floor = lot.reserve if lot.highest is None \
            else lot.highest.amount + lot.min_increment
        fee = self.ledger.fee_schedule.get(EventCategory.ESCROW_LOCK, 0)
        spendable = self.ledger.balance(bidder.account) - fee
        if spec.strategy == "limit":
            amount = min(spec.limit, spendable)
        elif spec.strategy == "incremental":
            base = lot.highest.amount if lot.highest else 0
            amount = min(max(floor, base + spec.step), spec.limit, spendable)
        else:  # sniper: minimum leading bid at the last moment
            amount = floor
        if amount < floor or amount > spec.limit or amount > spendable:
            return  # priced out; the floor only rises from here
        try:
            self.engine.place_bid(lot_id, bidder.account, amount, tick)
        except SimError:
            pass  # lost a race within the tick; treat like any failed bid
        reschedule()

    # -- external commands ---------------------------------------------------

    def submit_bid(self, account: AccountId, lot_id: int, amount: int,
                   tick: Optional[int] = None) -> None:
        """Gateway bids share the scripted path: engine validation only."""
        self.engine.place_bid(lot_id, account, amount,
                              self.now if tick is None else tick)


def run_scenario(scenario: Scenario) -> RunResult:
    """Fast-forward a scenario to completion; the gateway paces the same
    Simulation in real time instead."""
    return Simulation(scenario).run_fast()


# -- artifact bundle ---------------------------------------------------------


def timeline_csv(entries: list[TimelineEntry]) -> str:
    lines = ["time,balance,category"]
    for entry in entries:
        lines.append(f"{entry.time},{entry.balance_after},"
                     f"{entry.category.value}")
    return "\n".join(lines) + "\n"


def write_bundle(result: RunResult, out_dir) -> Path:
    """Write the event log, timeline CSV, summary, and per-painting
    artifacts under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_log(result.ledger.log, out / "events.log")
    (out / "timeline.csv").write_text(timeline_csv(result.timeline()),
                                      encoding="utf-8")
    for record in result.paintings:
        pdir = out / "paintings" / f"{record.index:02d}"
        pdir.mkdir(parents=True, exist_ok=True)
        topic_mod.save_raster_png(record.raster, pdir / "raster.png")
        topic_mod.save_raster_png(record.skeleton, pdir / "skeleton.png")
        topic_mod.save_raster_png(record.painted, pdir / "painted.png")
        (pdir / "strokes.svg").write_text(record.svg, encoding="utf-8")
        (pdir / "strokes.txt").write_text(
            strokes_mod.strokes_to_text(record.simplified), encoding="utf-8")
        (pdir / "trajectory.txt").write_text(
            motion_mod.trajectory_to_text(record.trajectory),
            encoding="utf-8")
        (pdir / "pose.json").write_text(json.dumps({
            "center_m": list(record.pose.center),
            "yaw_rad": record.pose.yaw,
            "width_m": record.pose.width,
            "height_m": record.pose.height,
        }, indent=2) + "\n", encoding="utf-8")
    summary = {
        "final_tick": result.final_tick,
        "log_sha256": result.log_hash,
        "stage_history": [[tick, stage.value]
                          for tick, stage in result.state.stage_history],
        "paintings": [{
            "index": r.index,
            "keyword": r.topic.keyword_source,
            "glyphs": r.topic.keyword_glyphs,
            "date": r.topic.date.isoformat(),
            "token_id": r.token_id,
            "lot_id": r.lot_id,
            "artwork_ref": r.artwork_ref,
        } for r in result.paintings],
        "settlements": [{
            "lot_id": rep.lot_id,
            "sold": rep.sold,
            "winner": rep.winner.hex if rep.winner else None,
            "price": str(rep.price),
            "platform_fee": str(rep.platform_fee),
        } for rep in result.reports],
        "loans": [{
            "investor": loan.investor.hex,
            "principal": str(loan.principal),
            "repaid": str(loan.repaid),
        } for loan in result.engine.loans],
        "category_counts": result.category_counts(),
        "final_balance": str(result.ledger.balance(result.state.wallet)),
        "closure": {key: str(value) for key, value in closure_terms(
            result.ledger, result.state.wallet).items()},
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return out
