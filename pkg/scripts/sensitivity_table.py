"""Barrier and relative issuance value when one of (a1, a2, a3) moves off baseline."""

import argparse
import time

from bankcap.battery import sensitivity_rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=2000)
    args = ap.parse_args()
    t = time.perf_counter()
    rows = sensitivity_rows(n=args.nodes)
    print(f"{'panel':>5} {'value':>6} {'y*':>8} {'ref':>6} {'dv/v':>8} {'ref':>7}")
    for panel, val, ys, dv, ys_ref, dv_ref, err in rows:
        if err:
            print(f"{panel:>5} {val:>6} {'-':>8} {ys_ref:>6} {'-':>8} {dv_ref:>7}  {err.split(':')[0]}")
        else:
            print(f"{panel:>5} {val:>6} {ys:8.4f} {ys_ref:>6} {dv:8.4f} {dv_ref:>7}")
    print(f"{time.perf_counter() - t:.1f}s")


if __name__ == "__main__":
    main()
