"""Command-line pipeline: unitize -> bundle -> serve -> export -> analyze.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import report as report_mod
from .bundle import BundleError, create_bundle, load_bundle
from .model import (
    ModelError,
    default_questionnaire,
    load_questionnaire,
    load_timeline,
    read_ratings_csv,
    write_ratings_csv,
)
from .service import ServiceError, StudyService
from .simulate import (
    SimulationConfig,
    read_expert_scores,
    simulate_ratings,
    write_expert_scores,
)
from .unitize import (
    ActConfig,
    EstConfig,
    IntervalConfig,
    UnitizeError,
    unitize_act,
    unitize_est,
    unitize_interval,
    write_units_csv,
)

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _cmd_unitize(args: argparse.Namespace) -> int:
    units = []
    for path in args.timelines:
        tl = load_timeline(path)
        if args.technique == "est":
            units.extend(unitize_est(tl, EstConfig(min_unit_duration=args.min_unit)))
        elif args.technique == "act":
            units.extend(unitize_act(tl, ActConfig(max_turn_duration=args.max_turn)))
        else:
            if args.window is None:
                print("error: --window is required for the aut technique", file=sys.stderr)
                return EXIT_USAGE
            units.extend(unitize_interval(tl, IntervalConfig(args.window, args.tail)))
    write_units_csv(units, args.out)
    print(f"wrote {len(units)} units to {args.out}")
    return EXIT_OK


def _cmd_bundle(args: argparse.Namespace) -> int:
    out = create_bundle(
        args.out, args.timelines, args.units,
        questionnaire_path=args.questionnaire, honey_pots_path=args.honey_pots,
    )
    print(f"bundle written to {out}")
    return EXIT_OK


def _service_from_bundle(args: argparse.Namespace) -> StudyService:
    b = load_bundle(args.bundle)
    return StudyService(
        units=b.units,
        questionnaire=b.questionnaire,
        honey_pots=b.honey_pots,
        store_path=args.store,
        seed=args.seed,
        clip_uris={tl.id: tl.clip_uri for tl in b.timelines},
        focus_image_uris={tl.id: tl.focus_image_uri for tl in b.timelines},
    )


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .webapp import create_app

    service = _service_from_bundle(args)
    app = create_app(service, admin_token=args.admin_token)
    host, _, port = args.bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    from .unitize import read_units_csv

    units = read_units_csv(args.units)
    questionnaire = (
        load_questionnaire(args.questionnaire) if args.questionnaire
        else default_questionnaire()
    )
    cfg = SimulationConfig(n_raters=args.raters, noise_sd=args.noise, seed=args.seed)
    ratings, expert = simulate_ratings(units, questionnaire, cfg)
    write_ratings_csv(ratings, args.out)
    write_expert_scores(expert, args.expert_out)
    print(f"wrote {len(ratings)} simulated ratings to {args.out}")
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    service = _service_from_bundle(args)
    service.apply_validity_filter()
    ratings = service.all_ratings()
    if not ratings:
        print("error: store contains no ratings", file=sys.stderr)
        return EXIT_RUNTIME
    write_ratings_csv(ratings, args.out)
    print(f"exported {len(ratings)} ratings to {args.out}")
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    from .unitize import read_units_csv

    units = read_units_csv(args.units)
    ratings = read_ratings_csv(args.ratings)
    expert = read_expert_scores(args.expert) if args.expert else {}
    questionnaire = (
        load_questionnaire(args.questionnaire) if args.questionnaire
        else default_questionnaire()
    )
    cfg = report_mod.ReportConfig(
        significance=args.significance, bf_variant=args.variant, digits=args.digits
    )
    rep = report_mod.analyze(units, ratings, expert, questionnaire, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report_mod.report_to_json(rep))
    (out_dir / "report.txt").write_text(report_mod.report_to_text(rep))
    print(f"report written to {out_dir}/report.json and {out_dir}/report.txt")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohesion-study",
        description="Unitizing, rating collection, and inter-rater analysis pipeline",
    )
    parser.add_argument("--seed", type=int, default=int(os.environ.get("COHESION_SEED", "0")))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("unitize", help="produce coding units from timelines")
    p.add_argument("--technique", choices=["est", "act", "aut"], required=True)
    p.add_argument("--window", type=float, help="window size in seconds (aut)")
    p.add_argument("--tail", choices=["drop", "keep", "merge"], default="drop")
    p.add_argument("--max-turn", type=float, default=20.0, help="same-speaker cap (act)")
    p.add_argument("--min-unit", type=float, default=0.0, help="merge-short threshold (est)")
    p.add_argument("--in", dest="timelines", nargs="+", required=True, metavar="TIMELINE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_unitize)

    p = sub.add_parser("bundle", help="assemble a verified study bundle")
    p.add_argument("--timelines", nargs="+", required=True)
    p.add_argument("--units", required=True)
    p.add_argument("--questionnaire")
    p.add_argument("--honey-pots")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bundle)

    p = sub.add_parser("serve", help="run the rating-collection HTTP service")
    p.add_argument("--bundle", default=os.environ.get("COHESION_BUNDLE"), required=False)
    p.add_argument("--store", default=os.environ.get("COHESION_STORE_PATH"))
    p.add_argument("--bind", default=os.environ.get("COHESION_BIND", "127.0.0.1:8000"))
    p.add_argument("--admin-token", default=os.environ.get("COHESION_ADMIN_TOKEN"))
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("simulate-raters", help="generate seeded synthetic ratings")
    p.add_argument("--units", required=True)
    p.add_argument("--questionnaire")
    p.add_argument("--raters", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--expert-out", required=True)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("export", help="export ratings from a service store")
    p.add_argument("--bundle", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("analyze", help="run the full statistical analysis")
    p.add_argument("--units", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--expert")
    p.add_argument("--questionnaire")
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--variant", choices=["spread", "means"], default="spread")
    p.add_argument("--digits", type=int, default=6)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, UnitizeError, ServiceError, BundleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
