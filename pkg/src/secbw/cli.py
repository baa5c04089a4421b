#
# This file is part of Python package: `secbw`
#
#     https://github.com/rmvanhees/secbw.git
#
# Copyright (c) 2026 - R.M. van Hees (SRON)
#    All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Command-line interface of `secbw`.

Subcommands: gen-data, train, evaluate, sweep-dw, sweep-uncertainty and
validate. On failure one line is written to stderr:

    error: category=<category> message=<text>

and the exit code identifies the category, see `EXIT_CODES`.
"""

from __future__ import annotations

__all__ = ["EXIT_CODES", "main"]

import argparse
import logging
import sys
from pathlib import Path

from . import sw_version
from .checkpoint import CheckpointMismatchError
from .config import load_config
from .dataset import DatasetFormatError
from .experiments import (
    evaluate,
    gen_data,
    sweep_dw,
    sweep_uncertainty,
    train_mode,
    validate,
)
from .gnn import TRAIN_MODES
from .scheduling import InfeasibleUserError

# - global parameters ---------------------------------
EXIT_CODES = {
    "ok": 0,
    "usage": 2,
    "config": 3,
    "io": 4,
    "invalid-argument": 5,
    "infeasible": 6,
    "mismatch": 7,
    "validation": 8,
}

LOG_FORMAT = "%(asctime)s |%(levelname)s: %(message)s"


class _ConfigError(Exception):
    """Configuration could not be read or is invalid."""


class ValidationFailedError(Exception):
    """The validate subcommand found violations."""


# - local function -------------------------------------
def _parser() -> argparse.ArgumentParser:
    """Return parser of the command line."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        action="append",
        default=None,
        help=(
            "YAML configuration file or name of a shipped configuration"
            " (desk_scale, full_scale); may be repeated, later files win"
        ),
    )
    common.add_argument("--output-dir", type=Path, help="override output directory")
    common.add_argument("--seed", type=int, help="override master seed")
    common.add_argument("--train-samples", type=int, help="override training size")
    common.add_argument("--test-samples", type=int, help="override test size")
    common.add_argument("--epochs", type=int, help="override number of epochs")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug output")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    parser = argparse.ArgumentParser(
        prog="secbw",
        description="Bandwidth allocation under per-user minimum secrecy rates.",
    )
    parser.add_argument("--version", action="version", version=sw_version(full=True))
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser(
        "gen-data", parents=[common], help="generate training and test datasets"
    )
    sub = subparsers.add_parser(
        "train", parents=[common], help="train the GNN, supervised or unsupervised"
    )
    sub.add_argument(
        "--mode",
        choices=(*TRAIN_MODES, "both"),
        default="both",
        help="training mode (default: both)",
    )
    subparsers.add_parser(
        "evaluate", parents=[common], help="compare all policies on the test set"
    )
    subparsers.add_parser(
        "sweep-dw", parents=[common], help="IvS rate and complexity versus delta_w"
    )
    subparsers.add_parser(
        "sweep-uncertainty",
        parents=[common],
        help="realized rates versus eavesdropper CSI uncertainty",
    )
    subparsers.add_parser(
        "validate", parents=[common], help="re-check datasets and allocations"
    )
    return parser


def _setup_logging(verbose: bool, quiet: bool) -> None:
    """Configure the root logger once."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def _run(args: argparse.Namespace) -> None:
    """Run the selected subcommand."""
    try:
        cfg = load_config(args.config)
    except (KeyError, ValueError, RuntimeError) as exc:
        raise _ConfigError(str(exc)) from exc
    cfg = cfg.with_overrides(
        seed=args.seed,
        output_dir=args.output_dir,
        train_samples=args.train_samples,
        test_samples=args.test_samples,
        epochs=args.epochs,
    )
    logging.getLogger("secbw.cli").debug("configuration:\n%s", cfg)

    match args.command:
        case "gen-data":
            gen_data(cfg)
        case "train":
            modes = TRAIN_MODES if args.mode == "both" else (args.mode,)
            for mode in modes:
                train_mode(cfg, mode)
        case "evaluate":
            evaluate(cfg)
        case "sweep-dw":
            sweep_dw(cfg)
        case "sweep-uncertainty":
            sweep_uncertainty(cfg)
        case "validate":
            messages = validate(cfg)
            for msg in messages:
                logging.getLogger("secbw.cli").warning(msg)
            if messages:
                raise ValidationFailedError(f"{len(messages)} violation(s) found")


def _category(exc: BaseException) -> str:
    """Return error category of an exception."""
    match exc:
        case _ConfigError():
            return "config"
        case ValidationFailedError():
            return "validation"
        case InfeasibleUserError():
            return "infeasible"
        case CheckpointMismatchError() | DatasetFormatError():
            return "mismatch"
        case RuntimeError() | OSError():
            return "io"
        case ValueError() | KeyError():
            return "invalid-argument"
    return "io"


# - main function --------------------------------------
def main(argv: list[str] | None = None) -> int:
    """Parse the command line and run a subcommand.

    Returns
    -------
    int
       exit code, see `EXIT_CODES`

    """
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    _setup_logging(args.verbose, args.quiet)
    try:
        _run(args)
    except (
        _ConfigError,
        ValidationFailedError,
        RuntimeError,
        OSError,
        ValueError,
        KeyError,
    ) as exc:
        category = _category(exc)
        message = " ".join(str(exc).split()) or exc.__class__.__name__
        print(f"error: category={category} message={message}", file=sys.stderr)
        return EXIT_CODES[category]

    return EXIT_CODES["ok"]


# no cover: start
if __name__ == "__main__":
    sys.exit(main())
# no cover: stop
