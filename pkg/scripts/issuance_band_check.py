"""Which policy attains the solved value at baseline.

The solver issues on a band [1, y_k] (jumping to the impulse target from
anywhere in it), while the simulator runs the threshold rule: reflect at
y*, recapitalise only after falling below 1. This script
  (a) simulates the band policy and compares with v(y0),
  (b) simulates the threshold rule and compares with an independent
      central-difference evaluation of that fixed policy.
Both use the same random numbers.
"""

import argparse

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

import bankcap.hjb_solver as S
from bankcap.model import ModelParams, RegulatoryParams, pi_bar
from bankcap.policy import extract_policy


def run(vf, p, reg, y_star, target, top, y0, n, T, dt, seed):
    """Discounted payoff per path; top > 1 switches on the band rule."""
    g = np.random.default_rng(seed)
    y = np.full(n, y0)
    pay = np.zeros(n)
    sq = np.sqrt(dt)
    for s in range(int(round(T / dt))):
        disc = np.exp(-p.rho_L * s * dt)
        zw, zp = g.standard_normal(n), g.standard_normal(n)
        zb = p.c * zw + np.sqrt(1 - p.c**2) * zp
        if top > 1.0:
            inb = y <= top
            pay[inb] -= disc * S.issuance_cost(y[inb], target, p)
            y[inb] = target
        pi = np.clip(np.interp(y, vf.y, vf.pi_opt), 0, pi_bar(y, reg))
        y = y + (y * (p.r + pi * (p.mu - p.r) - p.mu_L) + p.gamma) * dt + pi * y * p.sigma * sq * zb + p.sigma_L * (1 - y) * sq * zw
        over = y > y_star
        pay[over] += disc * (y[over] - y_star)
        y[over] = y_star
        low = y < 1
        pay[low] -= disc * S.issuance_cost(1.0, target, p)
        y[low] = target
    return pay


def threshold_value(vf, p, reg, y_star, target, n=8001):
    """Value of reflect-at-y*, jump-from-1-to-target with pi from vf, by central differences."""
    y = np.linspace(1.0, y_star, n)
    h = y[1] - y[0]
    pi = np.clip(np.interp(y, vf.y, vf.pi_opt), 0, pi_bar(y, reg))
    a, b = S.generator_coeffs(y, pi, p)
    lo = a / h**2 - b / (2 * h)
    hi = a / h**2 + b / (2 * h)
    mid = -2 * a / h**2 - p.rho_L
    A = sp.diags([lo[1:], mid, hi[:-1]], [-1, 0, 1], format="lil")
    rhs = np.zeros(n)
    # u(1) = u(target) - cost, target interpolated linearly
    j = int((target - 1.0) / h)
    w = (target - y[j]) / h
    A[0, :] = 0
    A[0, 0] = 1.0
    A[0, j] -= 1 - w
    A[0, j + 1] -= w
    rhs[0] = -S.issuance_cost(1.0, target, p)
    # u'(y*) = 1
    A[n - 1, :] = 0
    A[n - 1, n - 1], A[n - 1, n - 2] = 1 / h, -1 / h
    rhs[-1] = 1.0
    return y, spsolve(A.tocsr(), rhs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--horizon", type=float, default=120.0)
    ap.add_argument("--dt", type=float, default=1 / 250)
    ap.add_argument("--y0", type=float, default=1.2)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    p, reg = ModelParams(), RegulatoryParams()
    vf = S.solve_vi(p, reg)
    pol = extract_policy(vf)
    _, arg = S.impulse_all(vf.y, vf.v, p)
    target = vf.y[arg[0]]
    y_star = vf.y[vf.barrier_index() - 1]
    se = lambda x: x.std(ddof=1) / np.sqrt(len(x))
    sim = dict(y0=args.y0, n=args.paths, T=args.horizon, dt=args.dt, seed=args.seed)

    band = run(vf, p, reg, y_star, target, pol.issuance_top, **sim)
    print(f"band [1, {pol.issuance_top:.4f}] -> {target:.4f}: solved {vf(args.y0):.4f}, "
          f"simulated {band.mean():.4f} +- {se(band):.4f}")
    thr = run(vf, p, reg, pol.y_star, pol.y_post, 1.0, **sim)
    yy, u = threshold_value(vf, p, reg, pol.y_star, pol.y_post)
    print(f"threshold y*={pol.y_star:.4f}, y_post={pol.y_post:.4f}: evaluated {np.interp(args.y0, yy, u):.4f}, "
          f"simulated {thr.mean():.4f} +- {se(thr):.4f}")
    d = band - thr
    print(f"band minus threshold {d.mean():.4f} +- {se(d):.4f}")


if __name__ == "__main__":
    main()
