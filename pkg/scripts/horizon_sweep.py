"""How the optimal gains shrink as the horizon grows.

The goal is 21 m away; a short horizon forces large gains to cover it, a long
one lets the effort term pull them down.

    python scripts/horizon_sweep.py --horizons 10 20 30 50
"""

import argparse

import numpy as np

from hrimap.interface import orthogonality_distance
from hrimap.optimizer import reference_config, solve


def main():
    ap = argparse.ArgumentParser(description="Sweep the horizon of the reference problem.")
    ap.add_argument("--horizons", type=float, nargs="+", default=[10, 15, 20, 30, 40, 50])
    ap.add_argument("--steps", type=int, default=200, help="integration steps per horizon")
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'T':>5} {'G':>34} {'sigma':>13} {'ortho':>6} {'cost':>9}")
    for T in args.horizons:
        sol = solve(reference_config(horizon=T, dt=T / args.steps, seeds=args.restarts, rng_seed=args.seed))
        s = np.linalg.svd(sol.G, compute_uv=False)
        print(f"{T:5.0f} {str(sol.G.round(3).tolist()):>34} {s[0]:6.3f},{s[1]:6.3f} "
              f"{orthogonality_distance(sol.G):6.3f} {sol.cost:9.3f}", flush=True)


if __name__ == "__main__":
    main()
