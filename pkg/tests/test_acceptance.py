"""Acceptance gate: one test per primary criterion, at stated tolerance."""
from __future__ import annotations

import dataclasses
import itertools
import random
import time
from datetime import date as Date

import numpy as np
import pytest

from artbot.agent import (
    Stage,
    closure_terms,
    coverage_metrics,
    default_scenario_path,
    load_scenario,
    paint_topic,
    run_scenario,
)
from artbot.canvas import CanvasPose, canvas_to_pixels, pixels_to_canvas
from artbot.contracts import OrderState
from artbot.errors import SimError
from artbot.ledger import EventCategory, Ledger, tokens
from artbot.motion import segment_duration
from artbot.strokes import StrokeSet, label_components, skeletonize
from artbot.topic import (
    FileTranslationClient,
    FileTrendClient,
    select_topic,
)

from glyph_corpus import corpus_rasters
from test_contracts import run_random_schedule, setup_shop, shop_actions


@pytest.fixture(scope="module")
def scenario():
    return load_scenario(default_scenario_path())


@pytest.fixture(scope="module")
def timed_run(scenario):
    start = time.perf_counter()
    result = run_scenario(scenario)
    return result, time.perf_counter() - start


def test_economic_closure_identity(timed_run):
    # default scenario: 4 paintings, 2 investors, 3 scripted bidders;
    # exact integer identity over the event log; runtime < 10 s
    result, elapsed = timed_run
    terms = closure_terms(result.ledger, result.state.wallet)
    assert terms["final_balance"] == (
        terms["funding"] + terms["sales"] - terms["platform_fees"]
        - terms["network_fees"] - terms["supplies"] - terms["repayments"])
    assert terms["escrow_net"] == 0
    assert terms["final_balance"] >= 0
    for loan in result.engine.loans:
        assert loan.repaid == loan.principal
    assert elapsed < 10.0


def test_fig6_structural_reproduction(timed_run, scenario):
    # >=1 Funding, exactly 4 Sale, >=1 SupplyPurchase/PlatformFee/
    # NetworkFee/LoanRepayment, in stage order; same seed => same SHA-256
    result, _ = timed_run
    counts = result.category_counts()
    assert counts["Funding"] >= 1
    assert counts["Sale"] == 4
    for category in ("SupplyPurchase", "PlatformFee", "NetworkFee",
                     "LoanRepayment"):
        assert counts[category] >= 1

    order = [entry.category for entry in result.timeline()]
    first = {cat: order.index(cat) for cat in set(order)}
    assert first[EventCategory.FUNDING] < first[EventCategory.SALE]
    assert first[EventCategory.SALE] < first[EventCategory.LOAN_REPAYMENT]
    assert first[EventCategory.SALE] < first[EventCategory.SUPPLY_PURCHASE]

    stages = [stage for _, stage in result.state.stage_history]
    assert stages[0] is Stage.FUNDING
    assert stages.index(Stage.AUCTIONING) < stages.index(Stage.REPAYING)
    assert stages.index(Stage.AUCTIONING) < stages.index(Stage.RESTOCKING)

    again = run_scenario(scenario)
    assert again.log_hash == result.log_hash


def test_ledger_conservation_random_operations():
    # 10,000 randomized operations over 50 accounts: supply constant,
    # no negative balance ever; runtime < 5 s
    rng = random.Random(7)
    start = time.perf_counter()
    ledger = Ledger(fee_schedule={EventCategory.NETWORK_FEE: 10**12})
    accounts = [ledger.create_account(f"acct-{i}") for i in range(50)]
    minted = 0
    for account in accounts:
        amount = rng.randint(1, 100) * tokens("0.1")
        ledger.mint(account, amount)
        minted += amount
    ledger.seal_genesis()

    categories = [c for c in EventCategory]
    for op in range(10_000):
        src, dst = rng.sample(accounts, 2)
        balance = ledger.balance(src)
        roll = rng.random()
        try:
            if roll < 0.05:
                ledger.transfer(src, dst, 0, EventCategory.INTERNAL, op)
            elif roll < 0.10:
                ledger.mint(src, tokens(1), time=op)
            elif roll < 0.20:
                ledger.transfer(src, dst, balance + tokens(1),
                                EventCategory.INTERNAL, op)
            else:
                category = rng.choice(categories)
                fee = ledger.fee_schedule.get(category, 0)
                spendable = balance - fee
                if spendable <= 0:
                    continue
                ledger.transfer(src, dst, rng.randint(1, spendable),
                                category, op)
        except SimError:
            pass
        assert ledger.balance(src) >= 0
        assert ledger.balance(dst) >= 0
        if op % 500 == 0:
            assert ledger.total_supply() == minted

    assert ledger.total_supply() == minted
    assert all(ledger.balance(a) >= 0 for a in accounts)
    assert time.perf_counter() - start < 5.0


def test_auction_oracle_equivalence_1000_schedules():
    # winner, price, refund order, and final balances match an independent
    # fold over accepted bids; escrow drains to zero on every terminal lot
    rng = random.Random(1337)
    for case in range(1000):
        run_random_schedule(rng, lock_fee=0)


def test_skeleton_properties_over_corpus():
    # >=20 glyph fixtures: thin (no 2x2 ink block), skeleton within ink,
    # component count preserved, idempotent
    checked = 0
    for glyph, ink in corpus_rasters(size=160):
        skel = skeletonize(ink)
        bits = skel.bits
        blocks = (bits[:-1, :-1] & bits[:-1, 1:]
                  & bits[1:, :-1] & bits[1:, 1:])
        assert not blocks.any(), glyph
        assert not (bits & ~ink).any(), glyph
        assert label_components(bits)[0] == label_components(ink)[0], glyph
        assert (skeletonize(bits).bits == bits).all(), glyph
        checked += 1
    assert checked >= 20


def test_transform_round_trip_precision():
    # 1e5 points across random poses: round trip < 1e-6 px; segment-length
    # ratio equals the scale factor within 1e-9 relative
    rng = np.random.default_rng(2718)
    width, height = 512, 384
    scale = min(0.5 / width, 0.4 / height)
    for trial in range(100):
        pose = CanvasPose(center=(rng.uniform(-0.5, 0.5),
                                  rng.uniform(0.5, 1.5),
                                  rng.uniform(0.8, 1.6)),
                          yaw=rng.uniform(-np.pi, np.pi),
                          width=0.5, height=0.4)
        pixels = np.column_stack([rng.uniform(0, width, 1000),
                                  rng.uniform(0, height, 1000)])
        points = [tuple(p) for p in pixels]
        metric = pixels_to_canvas(StrokeSet(strokes=[points]),
                                  width, height, pose)
        back = canvas_to_pixels(metric.strokes[0], width, height, pose)
        assert np.abs(back - pixels).max() < 1e-6

        seg_px = np.linalg.norm(np.diff(pixels, axis=0), axis=1)
        seg_m = np.linalg.norm(np.diff(metric.strokes[0], axis=0), axis=1)
        keep = seg_px > 1e-9
        ratio = seg_m[keep] / seg_px[keep]
        assert np.abs(ratio - scale).max() < 1e-9 * scale


@pytest.fixture(scope="module")
def fig5_pipeline(scenario):
    selected = select_topic(Date(2021, 3, 22), FileTrendClient(),
                            FileTranslationClient())
    assert selected.keyword_source == "Women's History Month"
    art = paint_topic(selected, scenario.pipeline, scenario.canvas,
                      scenario.workspace)
    return art, scenario.pipeline


def test_trajectory_limit_compliance_full_pipeline(fig5_pipeline):
    # finite-difference speed/acceleration within limits * (1 + 1e-6);
    # duration equals the closed-form per-leg sum within 1e-9 s
    art, pipe = fig5_pipeline
    traj = art.trajectory
    dt = np.diff(traj.times)
    assert (dt > 0).all()
    speed = np.linalg.norm(np.diff(traj.points, axis=0), axis=1) / dt
    assert speed.max() <= pipe.v_max_mps * (1 + 1e-6)
    mid = (traj.times[:-1] + traj.times[1:]) / 2
    accel = np.abs(np.diff(speed)) / np.diff(mid)
    assert accel.max() <= pipe.a_max_mps2 * (1 + 1e-6)

    closed_form = sum(
        segment_duration(float(np.linalg.norm(
            np.subtract(leg.p1, leg.p0))), pipe.v_max_mps, pipe.a_max_mps2)
        for leg in traj.legs)
    assert abs(traj.duration() - closed_form) < 1e-9


def test_painting_fidelity_large_canvas(scenario):
    # 1024x768 full pipeline: >=95% of skeleton covered within the brush
    # radius, <=5% spurious ink outside the dilated skeleton; < 30 s
    start = time.perf_counter()
    selected = select_topic(Date(2021, 3, 22), FileTrendClient(),
                            FileTranslationClient())
    pipe = dataclasses.replace(scenario.pipeline, image_width=1024,
                               image_height=768)
    art = paint_topic(selected, pipe, scenario.canvas, scenario.workspace)
    covered, spurious = coverage_metrics(art.skeleton, art.painted,
                                         pipe.brush_radius_px)
    elapsed = time.perf_counter() - start
    assert covered >= 0.95
    assert spurious <= 0.05
    assert elapsed < 30.0


def test_shop_protocol_exhaustive_model_check():
    # every word of {propose, accept, reject, fulfill, timeout} up to depth
    # 6 ends in a declared state; escrow is released exactly once on paths
    # that locked it
    actions = shop_actions()
    names = sorted(actions)
    declared = {OrderState.PROPOSED, OrderState.ACCEPTED,
                OrderState.FULFILLED, OrderState.REJECTED,
                OrderState.REFUNDED}
    terminal = {OrderState.FULFILLED, OrderState.REJECTED,
                OrderState.REFUNDED}
    explored = 0
    for depth in range(1, 7):
        for word in itertools.product(names, repeat=depth):
            ledger, engine, robot, shop = setup_shop()
            ctx = {"ledger": ledger, "engine": engine, "robot": robot,
                   "shop": shop, "order": None, "t": 0}
            for name in word:
                try:
                    actions[name](ctx)
                except SimError:
                    pass
                ctx["t"] += 1
            explored += 1
            order = ctx["order"]
            if order is None:
                continue
            assert order.state in declared
            releases = sum(
                1 for e in ledger.log
                if e.category is EventCategory.ESCROW_RELEASE
                and e.memo.startswith("order:"))
            if order.state in terminal:
                assert ledger.balance(order.escrow) == 0
            if order.state in (OrderState.FULFILLED, OrderState.REFUNDED):
                assert releases == 1
            else:
                assert releases == 0
    assert explored == sum(len(names) ** d for d in range(1, 7))
