"""Monte Carlo check of spatial lag estimates on seeded lattices."""

import argparse
import time

import numpy as np

from partisan_exposure.spatial import fit_spatial_lag
from partisan_exposure.synth import SyntheticSpec, generate_sar


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--side", type=int, default=20)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--beta", type=float, default=1.2)
    ap.add_argument("--sigma", type=float, default=0.2)
    ap.add_argument("--k", type=int, default=5)
    args = ap.parse_args()

    t0 = time.perf_counter()
    rho, beta, covered = [], [], 0
    for seed in range(args.seeds):
        s = generate_sar(SyntheticSpec(side=args.side, rho=args.rho, beta=(args.beta,),
                                       sigma=args.sigma, k=args.k, seed=seed))
        fit = fit_spatial_lag(s.y, s.X, s.W)
        rho.append(fit.rho)
        beta.append(fit.slopes[0])
        covered += abs(fit.rho - args.rho) <= 1.96 * fit.rho_se
    rho, beta = np.array(rho), np.array(beta)
    print(f"n = {args.side ** 2}, {args.seeds} seeds, {time.perf_counter() - t0:.1f} s")
    print(f"rho:  mean {rho.mean():.4f}  sd {rho.std(ddof=1):.4f}  "
          f"in [0.40, 0.60] {np.sum((rho >= 0.4) & (rho <= 0.6))}")
    print(f"beta: mean {beta.mean():.4f}  sd {beta.std(ddof=1):.4f}  "
          f"in [1.1, 1.3] {np.sum((beta >= 1.1) & (beta <= 1.3))}")
    print(f"95% interval for rho covers the truth in {covered}/{args.seeds}")


if __name__ == "__main__":
    main()
