"""Recombine published dominance rows and compare with the printed totals."""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from published import DOMINANCE_DEM, DOMINANCE_REP  # noqa: E402

from partisan_exposure.dominance import (  # noqa: E402
    combine_dominance_levels,
    percent_relative_importance,
)


def check(label, table):
    names = list(table)
    inter, ind, ap, total, pct = (np.array(v) for v in zip(*table.values()))
    combined = combine_dominance_levels(ind, ap, inter, len(names))
    pri = percent_relative_importance(total)
    print(f"{label}")
    print(f"  {'predictor':<24}{'total':>10}{'recombined':>12}{'percent':>10}{'recomputed':>12}")
    for j, name in enumerate(names):
        print(f"  {name:<24}{total[j]:>10.6f}{combined[j]:>12.6f}{pct[j]:>10.4f}{pri[j]:>12.4f}")
    err_t = np.max(np.abs(combined - total))
    err_p = np.max(np.abs(pri - pct))
    print(f"  max |total error| {err_t:.2e}, max |percent error| {err_p:.2e}")
    return err_t <= 5e-5 and err_p <= 0.01


def main():
    ok = check("Republican share", DOMINANCE_REP) & check("Democratic share", DOMINANCE_DEM)
    print("ok" if ok else "MISMATCH")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
