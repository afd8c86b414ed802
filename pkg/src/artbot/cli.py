"""Command line entry points: run a scenario, run the art pipeline alone,
or serve the live auction gateway."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import date as Date
from pathlib import Path
from typing import Optional

from . import agent, motion, strokes, topic
from .errors import Deadlock, ScenarioError, SimError
from .ledger import format_tokens

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DEADLOCK = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artbot",
        description="Autonomous painting-robot economy simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="run a full scenario and write the artifact bundle")
    run_p.add_argument("--scenario", help="scenario JSON path "
                       "(default: bundled scenario)")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.add_argument("--out", default="artbot-out",
                       help="output bundle directory")

    pipe_p = sub.add_parser(
        "pipeline", help="run topic -> strokes -> trajectory -> painting "
        "for one keyword or trend date")
    pipe_p.add_argument("keyword_or_date",
                        help="fixture keyword (e.g. \"Full Moon\") or "
                        "trend date YYYY-MM-DD")
    pipe_p.add_argument("--out", default="artbot-pipeline",
                        help="artifact directory")
    pipe_p.add_argument("--width", type=int, default=512)
    pipe_p.add_argument("--height", type=int, default=384)
    pipe_p.add_argument("--epsilon", type=float, default=0.75,
                        help="stroke simplification tolerance in pixels")
    pipe_p.add_argument("--brush-radius", type=int, default=2)

    serve_p = sub.add_parser(
        "serve", help="run a scenario paced in real time behind the "
        "bidding HTTP API")
    serve_p.add_argument("--scenario")
    serve_p.add_argument("--seed", type=int)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--pace", type=float, default=60.0,
                         help="simulated ticks per wall second")
    return parser


def _load_scenario(path: Optional[str],
                   seed: Optional[int]) -> agent.Scenario:
    source = Path(path) if path else agent.default_scenario_path()
    return agent.load_scenario(source, seed_override=seed)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = _load_scenario(args.scenario, args.seed)
    except (ScenarioError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = agent.run_scenario(scenario)
    except Deadlock as exc:
        print(f"deadlock: {exc}", file=sys.stderr)
        return EXIT_DEADLOCK
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = agent.write_bundle(result, args.out)
    sold = sum(1 for report in result.reports if report.sold)
    print(f"painted {len(result.paintings)} canvases, {sold} sold")
    for report in result.reports:
        if report.sold:
            label = result.ledger.label_for(report.winner) or \
                report.winner.hex
            print(f"  lot {report.lot_id}: sold for "
                  f"{format_tokens(report.price)} to {label} "
                  f"(commission {format_tokens(report.platform_fee)})")
        else:
            print(f"  lot {report.lot_id}: unsold")
    principal = sum(loan.principal for loan in result.engine.loans)
    repaid = sum(loan.repaid for loan in result.engine.loans)
    print(f"loans repaid: {format_tokens(repaid)}/"
          f"{format_tokens(principal)}")
    balance = result.ledger.balance(result.state.wallet)
    print(f"final balance: {format_tokens(balance)}")
    print(f"log sha256: {result.log_hash}")
    print(f"bundle: {out}")
    return EXIT_OK


def _pipeline_topic(keyword_or_date: str) -> topic.Topic:
    trends = topic.FileTrendClient()
    translator = topic.FileTranslationClient()
    try:
        date = Date.fromisoformat(keyword_or_date)
    except ValueError:
        date = None
    if date is not None:
        return topic.select_topic(date, trends, translator)
    keyword = keyword_or_date.strip()
    if not keyword:
        raise ScenarioError("empty keyword")
    return topic.Topic(keyword_source=keyword,
                       keyword_glyphs=translator.translate(keyword),
                       date=Date(2021, 3, 22))


def cmd_pipeline(args: argparse.Namespace) -> int:
    try:
        selected = _pipeline_topic(args.keyword_or_date)
        scenario = _load_scenario(None, None)
        pipe = agent.PipelineParams(
            image_width=args.width, image_height=args.height,
            simplify_epsilon_px=args.epsilon,
            brush_radius_px=args.brush_radius,
            strokes_per_dip=scenario.pipeline.strokes_per_dip,
            z_hover_m=scenario.pipeline.z_hover_m,
            dip_clearance_m=scenario.pipeline.dip_clearance_m,
            v_max_mps=scenario.pipeline.v_max_mps,
            a_max_mps2=scenario.pipeline.a_max_mps2,
            sample_dt_s=scenario.pipeline.sample_dt_s)
        art = agent.paint_topic(selected, pipe, scenario.canvas,
                                scenario.workspace)
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    topic.save_raster_png(art.raster, out / "raster.png")
    topic.save_raster_png(art.skeleton, out / "skeleton.png")
    topic.save_raster_png(art.painted, out / "painted.png")
    (out / "strokes.svg").write_text(art.svg, encoding="utf-8")
    (out / "strokes.txt").write_text(
        strokes.strokes_to_text(art.simplified), encoding="utf-8")
    (out / "trajectory.txt").write_text(
        motion.trajectory_to_text(art.trajectory), encoding="utf-8")
    covered, spurious = agent.coverage_metrics(art.skeleton, art.painted,
                                               args.brush_radius)
    metrics = {
        "keyword": selected.keyword_source,
        "glyphs": selected.keyword_glyphs,
        "strokes": len(art.simplified.strokes),
        "skeleton_pixels": int(art.skeleton.sum()),
        "painted_pixels": int(art.painted.sum()),
        "coverage": round(covered, 6),
        "spurious": round(spurious, 6),
        "duration_s": round(art.trajectory.duration(), 3),
        "artwork_ref": art.artwork_ref,
    }
    (out / "metrics.json").write_text(
        json.dumps(metrics, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    digest = hashlib.sha256((out / "painted.png").read_bytes()).hexdigest()
    print(f"topic: {selected.keyword_source} -> {selected.keyword_glyphs}")
    print(f"strokes: {metrics['strokes']}  "
          f"skeleton px: {metrics['skeleton_pixels']}")
    print(f"coverage: {covered:.4f}  spurious: {spurious:.4f}")
    print(f"trajectory: {metrics['duration_s']} s")
    print(f"painted sha256: {digest}")
    print(f"artifacts: {out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        scenario = _load_scenario(args.scenario, args.seed)
    except (ScenarioError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    import uvicorn

    from .gateway import GatewayRunner, create_app
    runner = GatewayRunner(scenario, pace=args.pace)
    app = create_app(runner)
    runner.start()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        runner.stop()
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "pipeline": cmd_pipeline,
               "serve": cmd_serve}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
