"""50-year Monte Carlo for the six-bank ladder under the uncapped and capped optima."""

import argparse

from bankcap import reference as ref
from bankcap.battery import bank_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    for capped, table in ((False, ref.BANKS_UNCAPPED), (True, ref.BANKS_CAPPED)):
        print("capped" if capped else "uncapped")
        print(f"{'y0':>5} {'issuance':>9} {'ref':>7} {'dividend':>9} {'ref':>7} {'sharpe':>7} {'net':>6} {'div':>6} {'ref':>7}")
        rows = bank_table(capped, n_paths=args.paths, seed=args.seed, workers=args.workers)
        for (y0, iss, div, sh, st), (_, iss_r, div_r, sh_r) in zip(rows, table):
            # sharpe: discounted net payoff; net/div: undiscounted net and dividend-only ratios
            print(f"{y0:>5} {iss:9.4f} {iss_r:>7} {div:9.4f} {div_r:>7} {sh:7.3f} "
                  f"{st.sharpe_net_undiscounted:6.3f} {st.sharpe_dividend:6.3f} {sh_r:>7}")
        print()


if __name__ == "__main__":
    main()
