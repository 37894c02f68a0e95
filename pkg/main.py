import argparse
import asyncio
import sys
from pathlib import Path
from typing import List, Optional

from app.command import CommandCollection, MatchCommand, PdfCommand, VerifyCommand
from app.config import load_run_config
from app.exceptions import ConfigError
from app.logger import logger, set_print_level


def build_commands() -> CommandCollection:
    return CommandCollection(PdfCommand(), MatchCommand(), VerifyCommand())


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    commands = build_commands()
    parser = argparse.ArgumentParser(
        description="Density-matching design optimization under uncertainty"
    )
    parser.add_argument(
        "command",
        choices=commands.names,
        help="; ".join(f"{c.name}: {c.description.strip()}" for c in commands),
    )
    parser.add_argument("--config", required=True, help="Run configuration (TOML)")
    parser.add_argument("--out", default=None, help="Output directory override")
    parser.add_argument("--seed", type=int, default=None, help="Master seed override")
    parser.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    parser.add_argument(
        "--debug-uncorrected-shift",
        action="store_true",
        help="Use the uncorrected closed-form shift b and db/ds",
    )
    parser.add_argument(
        "--fd-tolerance",
        type=float,
        default=None,
        help="Override the finite-difference tolerance of verify",
    )
    return parser.parse_args(argv)


async def run(args: argparse.Namespace) -> int:
    overrides = {
        "output.directory": str(Path(args.out).resolve()) if args.out else None,
        "seed": args.seed,
        "matcher.uncorrected_shift": True if args.debug_uncorrected_shift else None,
        "verify.fd_tolerance": args.fd_tolerance,
    }
    try:
        config = load_run_config(args.config, **overrides)
    except ConfigError as e:
        logger.error(e.message)
        return 2

    result = await build_commands().execute(name=args.command, config=config)
    for path in result.files:
        logger.info(f"Wrote {path}")
    if not result:
        logger.error(f"{args.command} failed: {result}")
    return result.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    if args.verbose:
        set_print_level("DEBUG")
    try:
        return asyncio.run(run(args))
    except KeyboardInterrupt:
        logger.warning("Operation interrupted.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
