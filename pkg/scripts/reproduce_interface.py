"""Solve the reference teleoperation problem at two horizons and tabulate G.

    python scripts/reproduce_interface.py --seeds 3
"""

import argparse
import math
import time

import numpy as np

from hrimap.dynamics import wrap_angle
from hrimap.optimizer import reference_config, solve


def structure_ok(G):
    off_ok = all(x > 0 and 1.4 <= x <= 2.6 for x in (G[0, 1], G[1, 0]))
    return off_ok and abs(G[0, 0]) < 0.8 and abs(G[1, 1]) < 0.8


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3, help="number of seeded solver runs per horizon")
    ap.add_argument("--restarts", type=int, default=16)
    args = ap.parse_args()

    print(f"{'T':>4} {'seed':>4} {'G00':>7} {'G01':>7} {'G10':>7} {'G11':>7} {'cost':>9} {'pos err':>8} {'hdg err':>8} {'ok':>3} {'sec':>5}")
    for horizon, dt in ((10.0, 0.05), (50.0, 0.25)):
        for seed in range(args.seeds):
            cfg = reference_config(horizon=horizon, dt=dt, rng_seed=seed, seeds=args.restarts)
            t0 = time.perf_counter()
            sol = solve(cfg)
            sec = time.perf_counter() - t0
            f = sol.trajectory.final_state
            pos = math.hypot(f.x_pos - cfg.x_final.x_pos, f.y_pos - cfg.x_final.y_pos)
            hdg = abs(wrap_angle(f.theta - cfg.x_final.theta))
            g = sol.G.ravel()
            print(f"{horizon:4.0f} {seed:4d} {g[0]:7.3f} {g[1]:7.3f} {g[2]:7.3f} {g[3]:7.3f} {sol.cost:9.3f} "
                  f"{pos:8.4f} {hdg:8.4f} {'yes' if structure_ok(sol.G) else 'no':>3} {sec:5.1f}", flush=True)


if __name__ == "__main__":
    main()
