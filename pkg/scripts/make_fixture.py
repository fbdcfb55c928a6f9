"""Write the synthetic 100-county fixture and run the full pipeline on it."""

import argparse
from pathlib import Path

from partisan_exposure.config import load_config
from partisan_exposure.pipeline import run_pipeline
from partisan_exposure.synth import make_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--side", type=int, default=10)
    args = ap.parse_args()
    inputs = make_fixture(args.out / "inputs", seed=args.seed, side=args.side)
    run_pipeline(load_config(inputs / "config.ini"), args.out / "run")
    print((args.out / "run" / "report" / "summary.txt").read_text())


if __name__ == "__main__":
    main()
