"""Largest audit ratio per estimate cell on the seeded corpus, at n and 2n.

    python3 scripts/commutator_baselines.py [--n 64] [--count 20]
"""

import argparse

from tcm.commutators import CorpusSpec
from tcm.harness import commutator_rows


def cell(r):
    return (r["estimate"], r.get("s"), r.get("sigma"), r.get("lam"))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--count", type=int, default=20)
    args = ap.parse_args()
    corpus = CorpusSpec(seeds=tuple(range(args.count)), k_hi=min(16, args.n // 6))
    grids = (args.n, 2 * args.n)
    best = {}
    for n in grids:
        for seed in corpus.seeds:
            for r in commutator_rows(n, seed, (0.5, 1.0, 1.5), (-0.5, 0.0, 1.0), (2.0, 4.0, 8.0, 16.0),
                                     corpus, bony=(n == args.n)):
                d = best.setdefault(cell(r), {})
                d[n] = max(d.get(n, 0.0), r["ratio"])
    print(f"{'estimate':20s} {'s':>4s} {'sigma':>6s} {'lam':>5s} {grids[0]:>10d} {grids[1]:>10d} {'change':>7s}")
    for key in sorted(best, key=lambda k: tuple(str(x) for x in k)):
        a, b = best[key].get(grids[0]), best[key].get(grids[1])
        fmt = lambda v: "" if v is None else str(v)
        change = "" if b is None else f"{abs(b - a) / a:7.3f}"
        print(f"{key[0]:20s} {fmt(key[1]):>4s} {fmt(key[2]):>6s} {fmt(key[3]):>5s} "
              f"{a:10.3e} {'' if b is None else f'{b:10.3e}':>10s} {change}")


if __name__ == "__main__":
    main()
