"""Solve the baseline problem, print thresholds and the policy checks."""

import argparse
import json
from pathlib import Path

from bankcap import reference as ref
from bankcap.battery import baseline_solve, relative_issuance_value
from bankcap.hjb_solver import residual_report
from bankcap.model import ModelParams, RegulatoryParams, feasibility
from bankcap.policy import verify_policy


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=2000)
    ap.add_argument("--out", default=None, help="directory for value_function.csv")
    args = ap.parse_args()

    p, reg = ModelParams(), RegulatoryParams()
    rep = feasibility(p, reg)
    print(f"growth bound {rep.rho_bound:.4f} < rho={p.rho}; A={rep.A:.4f} B={rep.B:.4f} K={rep.K:.4f}")
    vf, pol, dt = baseline_solve(p, reg, n=args.nodes)
    _, dv = relative_issuance_value(p, reg, n=args.nodes)
    print(f"solved on [1, {vf.y[-1]:g}] with {vf.n} nodes in {dt:.3f}s ({vf.iterations} Howard steps)")
    print(f"y*      {pol.y_star:.4f}  (published {ref.BASELINE_Y_STAR})")
    print(f"y_post  {pol.y_post:.4f}  (published {ref.BASELINE_Y_POST})")
    print(f"xi*     {pol.xi_star:.4f}")
    print(f"v(1.2)  {vf(1.2):.4f}  (published {ref.BASELINE_V_Y0})")
    print(f"dv/v    {dv:.4f}  (published {ref.BASELINE_DV_REL})")
    print(f"issuance set [1, {pol.issuance_top:.4f}], slope at 1+ {pol.slope_at_1:.6f} vs 1/(1-k')={1 / (1 - p.kappa_prime):.6f}")
    print("residuals", json.dumps(residual_report(vf), default=float))
    print("checks", json.dumps(verify_policy(vf, pol), indent=1, default=float))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        vf.to_csv(out / "value_function.csv")


if __name__ == "__main__":
    main()
