"""Acceptance criteria 1-7, one PASS/FAIL line each at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary. Criteria 5 and 6 run the full sweeps and the 10,000-path
bank tables and take several minutes on one core.
"""

import time

import numpy as np
import pytest
from conftest import ACCEPTANCE, BASE, BASE_REG, degenerate_params

from bankcap import reference as ref
from bankcap.battery import bank_table, feasibility_counts, frontier_sweep, rel_close, sensitivity_rows
from bankcap.frontier import NoFeasiblePoint, frontier, optimize
from bankcap.hjb_solver import GridSpec, generator_coeffs, impulse_all, residuals, solve_vi
from bankcap.model import RegulatoryParams, feasibility, pi_bar
from bankcap.policy import extract_policy
from bankcap.simulator import SimConfig, simulate


def verdict(n, ok, detail, capsys):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


# ---------------------------------------------------------------------------

def test_criterion_1_thresholds(capsys):
    t = time.perf_counter()
    vf = solve_vi(BASE, BASE_REG, GridSpec(n=2000))
    pol = extract_policy(vf)
    dt = time.perf_counter() - t
    ys_ok = abs(pol.y_star - ref.BASELINE_Y_STAR) <= 0.01
    yp_ok = pol.issuance_active and abs(pol.y_post - ref.BASELINE_Y_POST) <= 0.01
    detail = (f"y*={pol.y_star:.4f} (target {ref.BASELINE_Y_STAR} +-0.01), "
              f"y_post={pol.y_post:.4f} (target {ref.BASELINE_Y_POST} +-0.01), solve {dt:.2f}s (< 5s)")
    verdict(1, ys_ok and yp_ok and dt < 5.0, detail, capsys)


def test_criterion_2_sensitivity(capsys):
    t = time.perf_counter()
    rows = sensitivity_rows(BASE)
    dt = time.perf_counter() - t
    bad = []
    for panel, val, ys, dv, ys_ref, dv_ref, err in rows:
        if err is not None:
            bad.append(f"{panel}={val}: {err.split(':')[0]}")
        elif not (rel_close(ys, ys_ref, 0.01) and rel_close(dv, dv_ref, 0.015)):
            bad.append(f"{panel}={val}: y*={ys:.3f}/{ys_ref} dv={dv:.4f}/{dv_ref}")
    n_ok = len(rows) - len(bad)
    detail = f"{n_ok}/{len(rows)} rows within (1%, 1.5%), {dt:.1f}s (< 180s)"
    if bad:
        detail += "; first misses: " + "; ".join(bad[:3])
    verdict(2, not bad and len(rows) == 27 and dt < 180, detail, capsys)


def test_criterion_3_degenerate_oracle(capsys):
    p, reg = degenerate_params()
    rep = feasibility(p, reg)
    assert -p.rho_L >= max(rep.A, rep.B) + p.gamma
    vf = solve_vi(p, reg, GridSpec(y_max=5.0, n=2000), allow_degenerate=True)
    err = float(np.max(np.abs(vf.v - (vf.y - 1.0))))
    verdict(3, err < 1e-6, f"max |v - (y - 1)| = {err:.2e} (< 1e-6)", capsys)


def test_criterion_4_feasibility_counts(capsys):
    unc, cap = feasibility_counts(BASE)
    ok = (unc, cap) == (ref.FEASIBLE_UNCAPPED, ref.FEASIBLE_CAPPED)
    verdict(4, ok, f"uncapped {unc} (486), capped {cap} (729)", capsys)


# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def sweeps():
    return {capped: frontier_sweep(capped, BASE, n_paths=1000, seed=0) for capped in (False, True)}


def test_criterion_5_frontier(sweeps, capsys):
    notes, ok = [], True
    # uncapped: 11 points matched by triple, v within 1%, survival within 0.05
    pts = sweeps[False]
    fr = frontier(pts, distinct=True)
    got = {q.triple: q for q in fr}
    if len(fr) != len(ref.FRONTIER_UNCAPPED):
        ok = False
        notes.append(f"uncapped frontier has {len(fr)} points (11)")
    for a1, a2, a3, _, v_ref, s_ref in ref.FRONTIER_UNCAPPED:
        q = got.get((a1, a2, a3))
        if q is None:
            ok = False
            notes.append(f"missing {(a1, a2, a3)}")
        elif not (rel_close(q.v_y0, v_ref, 0.01) and abs(q.survival_prob - s_ref) <= 0.05):
            ok = False
            notes.append(f"{(a1, a2, a3)} v={q.v_y0:.4f}/{v_ref} s={q.survival_prob:.3f}/{s_ref}")
    for eta, triple in ref.PICKS_UNCAPPED.items():
        pick = optimize(pts, eta).triple
        if pick != triple:
            ok = False
            notes.append(f"uncapped eta={eta} pick {pick} ({triple})")
    # capped: 9 points, same a1 progression, v within 1.5%, nothing at eta = 0.9
    pts = sweeps[True]
    fr = frontier(pts, distinct=True)
    a1s = [q.a1 for q in fr]
    if a1s != [row[0] for row in ref.FRONTIER_CAPPED]:
        ok = False
        notes.append(f"capped a1 progression {a1s}")
    for q, row in zip(fr, ref.FRONTIER_CAPPED):
        if not rel_close(q.v_y0, row[4], 0.015):
            ok = False
            notes.append(f"capped a1={q.a1} v={q.v_y0:.4f}/{row[4]}")
    try:
        optimize(pts, 0.9)
        ok = False
        notes.append("capped eta=0.9 has a feasible point")
    except NoFeasiblePoint:
        pass
    detail = "uncapped/capped frontiers and picks" + ("" if ok else "; " + "; ".join(notes[:6]))
    if len(notes) > 6:
        detail += f"; +{len(notes) - 6} more"
    verdict(5, ok, detail, capsys)


# ---------------------------------------------------------------------------

def _bank_check(n_paths, tol_flow, tol_sharpe):
    notes, ok = [], True
    for capped, table in ((False, ref.BANKS_UNCAPPED), (True, ref.BANKS_CAPPED)):
        tag = "capped" if capped else "uncapped"
        rows = bank_table(capped, BASE, n_paths=n_paths, seed=0)
        for (y0, iss, div, sh, _), (_, iss_r, div_r, sh_r) in zip(rows, table):
            for name, x, r, tol in (("iss", iss, iss_r, tol_flow), ("div", div, div_r, tol_flow), ("sharpe", sh, sh_r, tol_sharpe)):
                if not rel_close(x, r, tol):
                    ok = False
                    notes.append(f"{tag} y0={y0} {name} {x:.4g}/{r}")
        divs = [r[2] for r in rows]
        if not all(b > a for a, b in zip(divs, divs[1:])):
            ok = False
            notes.append(f"{tag} dividends not increasing in y0")
    return ok, notes


def test_criterion_6_bank_tables(capsys):
    ok1, n1 = _bank_check(1000, 0.10, 0.15)
    ok2, n2 = _bank_check(10_000, 0.05, 0.08)
    notes = [f"1k: {len(n1)} misses"] + n1[:4] + [f"10k: {len(n2)} misses"] + n2[:4]
    verdict(6, ok1 and ok2, "; ".join(notes), capsys)


# ---------------------------------------------------------------------------

def _brute_pi_gap(vf):
    """Largest gap between the solver's pi and a 1e-4 scan of the upwinded generator."""
    p = vf.params
    ii = np.arange(1, vf.n - 1)
    ii = ii[vf.regime[ii] != 3]
    y, dp, dm, d2 = vf.y[ii], vf.dplus[ii], vf.dminus[ii], vf.d2[ii]
    cap = pi_bar(y, vf.reg)

    def obj(pi):
        a, b = generator_coeffs(y[:, None], pi, p)
        return a * d2[:, None] + np.maximum(b, 0) * dp[:, None] - np.maximum(-b, 0) * dm[:, None]

    ours = obj(vf.pi_opt[ii][:, None])[:, 0]
    best = np.full(len(ii), -np.inf)
    for t in np.array_split(np.linspace(0, 1, 10001), 10):
        best = np.maximum(best, obj(cap[:, None] * t[None, :]).max(axis=1))
    return float(np.max(np.abs(ours - best)))


def test_criterion_7_properties(base_vf, base_pol, capsys):
    vf, pol, tol = base_vf, base_pol, base_vf.tol
    K = feasibility(BASE, BASE_REG).K
    checks = {}
    checks["concavity"] = float(np.max(np.diff(vf.v, 2))) <= tol
    checks["bounds"] = bool(np.all(vf.v >= vf.y - 1 - tol) and np.all(vf.v <= vf.y + K + tol))
    checks["slope>=1"] = bool(np.all(vf.dplus[:-1] >= 1 - tol))
    hv, _ = impulse_all(vf.y, vf.v, BASE)
    checks["v>=Hv"] = bool(np.all(vf.v >= hv - tol))
    phi = vf.y + K
    res = residuals(vf.y, phi, pi_bar(vf.y, BASE_REG), BASE, True)
    checks["supersolution"] = all(np.all(res[b][1:-1] >= -1e-12) for b in ("continuation", "dividend", "issuance"))
    k = vf.barrier_index() - 1
    checks["smooth_fit"] = abs(vf.dplus[k] - vf.dminus[k]) <= 5 * (vf.y[k + 1] - vf.y[k])
    checks["pi_bruteforce"] = _brute_pi_gap(vf) <= 1e-8
    vals = [solve_vi(BASE, BASE_REG, GridSpec(y_max=3.0, n=n))(1.2) for n in (1001, 2001, 4001)]
    checks["self_convergence"] = abs(vals[2] - vals[1]) <= 0.75 * abs(vals[1] - vals[0]) + 1e-9
    cfg = SimConfig(y0=1.05, horizon=50.0, n_paths=1, seed=3, record_trajectory=True)
    tr = simulate(pol, BASE, BASE_REG, cfg).trajectory
    ys = np.array([row[1] for row in tr])
    issues = [row for row in tr if row[4] == "issue"]
    checks["reflection"] = bool(np.all(ys <= pol.y_star + 1e-12))
    checks["impulse"] = bool(issues) and all(row[1] == pol.y_post for row in issues)
    cfg = SimConfig(horizon=5.0, n_paths=300, seed=11)
    a = simulate(pol, BASE, BASE_REG, cfg)
    b = simulate(pol, BASE, BASE_REG, cfg.replace(block=37), workers=2)
    checks["determinism"] = a.stats == b.stats and all(np.array_equal(a.paths[k], b.paths[k]) for k in a.paths)
    failed = [name for name, ok in checks.items() if not ok]
    detail = f"{len(checks) - len(failed)}/{len(checks)} properties hold"
    if failed:
        detail += f"; violated: {', '.join(failed)}"
        if "concavity" in failed:
            detail += f" (max second difference {np.max(np.diff(vf.v, 2)):.2e})"
    verdict(7, not failed, detail, capsys)
