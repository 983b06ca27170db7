import argparse
import json
import logging
import sys
from pathlib import Path

from src.session.session_loader import SessionLoader
from src.session.session_runner import EXIT_PARSE_ERROR, EXIT_TASK_ERROR, SessionRunner
from src.harness.reports import explain
from src.utils.logging_utils import setup_logging
from src.utils.settings import load_settings
from src.utils.validators import SessionError, set_certification


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torhilb",
        description="Sample bivariate Tor Hilbert functions and check their polynomial behaviour.",
    )
    parser.add_argument("--settings", help="settings file (default config/settings.yaml)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a session file")
    run.add_argument("session", help="path to the session YAML file")
    run.add_argument("--seed-order", dest="seed_order",
                     help="variable priority: comma-separated names, or an integer seed for a random permutation")
    run.add_argument("--char", dest="characteristic", type=int, help="prime characteristic of the coefficient field")
    run.add_argument("--budget", type=int, help="search budget for prop5 and stabilization tasks")
    run.add_argument("--max-degree", dest="max_degree", type=int, help="degree cap for polynomial fits")
    run.add_argument("--out", help="output directory")
    run.add_argument("--parallel", action="store_true", help="evaluate grid cells on a thread pool")
    run.add_argument("--certify", action="store_true", help="check engine certificates on every computation")

    show = sub.add_parser("explain", help="print a saved JSON report as text")
    show.add_argument("report", help="path to a report JSON file")
    return parser


def run_command(args, settings):
    logger = logging.getLogger(__name__)
    engine = settings["engine"]
    set_certification(args.certify or engine.get("certify", False))
    overrides = {
        "characteristic": args.characteristic,
        "seed_order": args.seed_order,
        "budget": args.budget,
        "max_degree": args.max_degree,
        "output": args.out,
    }
    loader = SessionLoader(engine["characteristic"], engine["order"], overrides)
    try:
        session = loader.load(args.session)
    except SessionError as e:
        logger.error(f"Error reading session {args.session}: {str(e)}")
        return EXIT_PARSE_ERROR

    parallel = args.parallel or settings["sampling"].get("parallel", False)
    workers = settings["sampling"].get("workers", 4) if parallel else 0
    runner = SessionRunner(session, settings, workers=workers)
    return runner.run()


def explain_command(args):
    logger = logging.getLogger(__name__)
    try:
        payload = json.loads(Path(args.report).read_text())
    except (OSError, ValueError) as e:
        logger.error(f"Error reading report {args.report}: {str(e)}")
        return EXIT_TASK_ERROR
    reports = payload["reports"] if "reports" in payload else [payload]
    for report in reports:
        sys.stdout.write(explain(report))
    return 0


def main(argv=None):
    """Main execution function"""
    args = build_parser().parse_args(argv)
    settings = load_settings(args.settings)
    setup_logging(settings["logging"]["directory"], settings["logging"]["level"])
    logger = logging.getLogger(__name__)

    logger.info("Start of session ---------------------")
    if args.command == "explain":
        status = explain_command(args)
    else:
        status = run_command(args, settings)
    logger.info(f"End of session (exit {status}) ---------------------")
    return status


if __name__ == "__main__":
    sys.exit(main())
