"""Command line entry point.

    llmqas run --config campaign.yaml [--proposer heuristic|llm] [--seed N] [--log-dir DIR]
    llmqas report --log-dir DIR [--format table|csv] [--figures DIR]
    llmqas resume --log-dir DIR [--max-iterations N]
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime

from . import storage
from .campaign import resume_campaign, run_campaign
from .config import PROPOSERS, load_config
from .errors import LLMQASError


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="llmqas", description="LLM-guided ansatz search for qGAN generators")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress per iteration")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="start a new campaign")
    run.add_argument("--config", required=True, help="YAML campaign config")
    run.add_argument("--proposer", choices=PROPOSERS, help="override the configured proposer")
    run.add_argument("--seed", type=int, help="override the configured master seed")
    run.add_argument("--log-dir", help="output directory (default: runs/campaign-<timestamp>)")

    rep = sub.add_parser("report", help="summarise a campaign log")
    rep.add_argument("--log-dir", required=True)
    rep.add_argument("--format", choices=("table", "csv"), default="table")
    rep.add_argument("--figures", metavar="DIR", help="also write PNG figures to DIR")

    res = sub.add_parser("resume", help="continue an interrupted campaign")
    res.add_argument("--log-dir", required=True)
    res.add_argument("--max-iterations", type=int, help="extend the iteration budget")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.proposer:
                cfg.proposer = args.proposer
            if args.seed is not None:
                cfg.seed = args.seed
            cfg.validate()
            log_dir = args.log_dir or f"runs/campaign-{datetime.now():%Y%m%d-%H%M%S}"
            result = run_campaign(cfg, log_dir=log_dir)
            print(storage.emit_report(log_dir, "table"), end="")
            print(f"stop reason: {result.stop_reason}; log: {log_dir}")
        elif args.command == "resume":
            result = resume_campaign(args.log_dir, max_iterations=args.max_iterations)
            print(storage.emit_report(args.log_dir, "table"), end="")
            print(f"stop reason: {result.stop_reason}; log: {args.log_dir}")
        else:
            print(storage.emit_report(args.log_dir, args.format), end="")
            if args.figures:
                from .plotting import render_figures

                for path in render_figures(args.log_dir, args.figures):
                    print(f"wrote {path}", file=sys.stderr)
    except (LLMQASError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
