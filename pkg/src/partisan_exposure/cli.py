"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 numerical or convergence error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import SWING_WINDOWS, load_config
from .errors import ToolkitError, ValidationError
from .pipeline import STAGES, emit_report, run_pipeline, run_stages
from .synth import make_fixture

log = logging.getLogger("partisan_exposure")


def _k_list(text):
    try:
        ks = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    return ks


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration (INI)")
    common.add_argument("--seed", type=_seed, help="override the configured seed")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--k", type=_k_list, help="k-NN sweep, e.g. 5,7,10")
    common.add_argument("--exclude-self", action="store_true", default=None,
                        help="drop self-loops before computing exposures")
    common.add_argument("--swing-window", type=int, choices=sorted(SWING_WINDOWS),
                        help="first election of the swing window")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="partisan-exposure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        sub.add_parser(stage, parents=[common], help=f"run the {stage} stage")
    sub.add_parser("run", parents=[common], help="run every stage and emit the report")
    sub.add_parser("report", parents=[common], help="summarize a completed run directory")
    synth = sub.add_parser("synth", parents=[common], help="write the synthetic fixture")
    synth.add_argument("--side", type=int, default=10, help="lattice side (n = side^2)")
    synth.add_argument("--zero-diagonal", action="store_true",
                       help="write networks without self-loops")
    return parser


def _config(args):
    if args.config is None:
        raise ValidationError("--config is required")
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(seed=args.seed, k_sweep=args.k, exclude_self=args.exclude_self,
                             swing_window=args.swing_window)
    return cfg.validate()


def _out(args):
    if args.out is None:
        raise ValidationError("--out is required")
    return args.out


def dispatch(args) -> None:
    cmd = args.command
    if cmd == "synth":
        make_fixture(_out(args), seed=7 if args.seed is None else args.seed, side=args.side,
                     zero_diagonal=args.zero_diagonal)
    elif cmd == "report":
        out = args.out
        if out is None:
            raise ValidationError("--out (the run directory) is required")
        emit_report(out)
    elif cmd == "run":
        run_pipeline(_config(args), _out(args))
    else:
        run_stages(_config(args), _out(args), (cmd,))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        dispatch(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
