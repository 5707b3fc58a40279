"""Full regulator sweeps with and without the leverage cap, compared with the published frontiers."""

import argparse
import time

from bankcap import reference as ref
from bankcap.battery import frontier_sweep
from bankcap.frontier import NoFeasiblePoint, frontier, optimize


def show(pts, table, picks, capped):
    fr = frontier(pts, distinct=True)
    print(f"{'capped' if capped else 'uncapped'}: {sum(q.feasible for q in pts)} feasible, "
          f"{sum(q.evaluated for q in pts)} evaluated, {len(fr)} distinct frontier points (published {len(table)})")
    print(f"{'a1':>6} {'a2':>5} {'a3':>5} {'y*':>7} {'v(y0)':>8} {'surv':>6} {'ci':>6} fragile")
    for q in fr:
        print(f"{q.a1:>6} {q.a2:>5} {q.a3:>5} {q.y_star:7.4f} {q.v_y0:8.4f} {q.survival_prob:6.3f} {q.survival_ci:6.3f} {int(q.fragile)}")
    print("published:")
    for row in table:
        print("{:>6} {:>5} {:>5} {:>7} {:>8} {:>6}".format(*row))
    for eta, want in picks.items():
        try:
            got = optimize(pts, eta).triple
        except NoFeasiblePoint:
            got = None
        print(f"eta={eta}: {got} (published {want})")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--capped-only", action="store_true")
    args = ap.parse_args()
    cases = [(True, ref.FRONTIER_CAPPED, ref.PICKS_CAPPED)]
    if not args.capped_only:
        cases.append((False, ref.FRONTIER_UNCAPPED, ref.PICKS_UNCAPPED))
    for capped, table, picks in cases:
        t = time.perf_counter()
        pts = frontier_sweep(capped, n_paths=args.paths, seed=args.seed, workers=args.workers)
        show(pts, table, picks, capped)
        print(f"{time.perf_counter() - t:.1f}s\n")


if __name__ == "__main__":
    main()
