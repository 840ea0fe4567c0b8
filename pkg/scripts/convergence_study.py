"""Time-step convergence of the three schemes and of the L^2 budget residual.

    python3 scripts/convergence_study.py [--n 64] [--t-end 0.2]
"""

import argparse
import math

import numpy as np

from tcm.diagnostics import l2_energy_audit
from tcm.harness import ic_library
from tcm.solver import Params, record, solve
from tcm.spectral import lp_norm


def state_error(a, b):
    d = np.concatenate([a.u - b.u, a.v - b.v, (a.theta - b.theta)[None]])
    return lp_norm(d, 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--t-end", type=float, default=0.2)
    ap.add_argument("--amplitude", type=float, default=0.5)
    args = ap.parse_args()

    x0 = ic_library("random-band", args.amplitude, 1, args.n)
    base = dict(n=args.n, alpha=1.0, eta=0.1, t_end=args.t_end)
    dts = [4e-3, 2e-3, 1e-3]
    ref = solve(x0, Params(dt=dts[-1] / 8, scheme="rk4_explicit", **base)).final
    print(f"{'scheme':14s} {'dt':>8s} {'error':>11s} {'rate':>6s}")
    for scheme in ("imex_euler", "imex_bdf2", "rk4_explicit"):
        prev = None
        for dt in dts:
            err = state_error(solve(x0, Params(dt=dt, scheme=scheme, **base)).final, ref)
            rate = "" if prev is None else f"{math.log2(prev / err):6.2f}"
            print(f"{scheme:14s} {dt:8.1e} {err:11.3e} {rate}")
            prev = err

    print("\nL2 budget residual (imex_bdf2, sampled every step)")
    prev = None
    for dt in dts:
        p = Params(dt=dt, **base)
        res = max(abs(r.residual) for r in l2_energy_audit(record(x0, p, dt), p))
        rate = "" if prev is None else f"{math.log2(prev / res):6.2f}"
        print(f"{dt:8.1e} {res:11.3e} {rate}")
        prev = res


if __name__ == "__main__":
    main()
