import json

import numpy as np
import pytest
from conftest import BASE, BASE_REG, REGULAR, degenerate_params

from bankcap import reference as ref
from bankcap.hjb_solver import GridSpec, solve_vi
from bankcap.model import RegulatoryParams, feasibility, mu_star, y_hat
from bankcap.policy import (
    BarrierMismatch,
    centered_slopes,
    dividend_barrier,
    extract_policy,
    issuance_policy,
    psi,
    verify_policy,
)


def test_barrier_is_psi_root(base_vf, base_pol):
    # independent evaluation of psi at the reported barrier
    p = BASE
    y = base_pol.y_star
    val = p.rho_L * base_vf(y) + (p.mu_L - mu_star(y, p, BASE_REG)) * y - p.gamma
    h = base_vf.y[1] - base_vf.y[0]
    assert abs(val) < 5 * h * p.rho_L


def test_barrier_agrees_with_slope_one(base_vf, base_pol):
    k = base_vf.barrier_index()
    assert abs(base_pol.y_star - base_vf.y[k - 1]) <= 2 * (base_vf.y[k] - base_vf.y[k - 1])
    assert np.allclose(base_vf.dplus[k:-1], 1.0, atol=1e-9)


def test_barrier_degenerate_is_one():
    p, reg = degenerate_params()
    vf = solve_vi(p, reg, GridSpec(y_max=3.0, n=400))
    pol = extract_policy(vf)
    assert pol.y_star == 1.0
    assert not pol.issuance_active


def test_barrier_mismatch_detected(base_vf):
    from dataclasses import replace

    # shift the slope-one region far from the psi root
    k = base_vf.barrier_index()
    regime = base_vf.regime.copy()
    regime[k - 40:] = 1
    bad = replace(base_vf, regime=regime)
    with pytest.raises(BarrierMismatch):
        dividend_barrier(bad)


def test_issuance_inactive_when_kappa_prime_near_one():
    vf = solve_vi(BASE.replace(kappa_prime=0.99), BASE_REG)
    active, y_post, xi = issuance_policy(vf)
    assert not active and y_post is None and xi is None
    assert vf.v[0] == 0.0


def test_issuance_target_matches_impulse_argmax(base_vf, base_pol):
    j = int(base_vf.target[0])
    h = base_vf.y[j + 1] - base_vf.y[j]
    assert base_pol.issuance_active
    assert abs(base_pol.y_post - base_vf.y[j]) <= h


def test_xi_formula(base_pol):
    assert base_pol.xi_star == pytest.approx((base_pol.y_post - 1) / (1 - BASE.kappa_prime), abs=1e-14)


def test_y_post_below_y_star(base_pol, regular_vf):
    for pol in (base_pol, extract_policy(regular_vf)):
        assert pol.issuance_active
        assert 1.0 < pol.y_post < pol.y_star


def test_regular_regime_issues_one_cell(regular_vf):
    # issuance only at y = 1 and the smallest admissible target: the discrete
    # counterpart of reflecting at 1, where v'(1+) meets 1/(1-k') exactly
    pol = extract_policy(regular_vf)
    thr = 1 / (1 - REGULAR.kappa_prime)
    assert pol.issuance_top == regular_vf.y[0]
    assert regular_vf.target[0] == 1
    assert pol.slope_at_1 == pytest.approx(thr, abs=1e-9)


def test_verify_baseline(base_vf, base_pol):
    rep = verify_policy(base_vf, base_pol)
    assert rep["all_pass"]
    for key in ("barrier_bound", "target_order", "xi_formula", "boundary_value"):
        assert rep[key]["pass"] and rep[key]["slack"] >= 0


def test_verify_flags_barrier_at_y_max(base_vf, base_pol):
    from dataclasses import replace

    bad = replace(base_pol, y_star=float(base_vf.y[-1]) * 10)
    rep = verify_policy(base_vf, bad)
    assert not rep["barrier_bound"]["pass"]
    assert not rep["all_pass"]


def test_verify_no_issuance_benchmark(base_vf_no_issuance):
    pol = extract_policy(base_vf_no_issuance)
    rep = verify_policy(base_vf_no_issuance, pol)
    assert not pol.issuance_active
    assert rep["zero_at_1"]["pass"]
    assert rep["all_pass"]


def test_psi_non_decreasing_above_switch(base_vf, regular_vf):
    # psi' = rho_L v' + mu_L - mu* - y mu*'; on [1, y_hat) the solvency
    # branch gives y mu*' = (mu - r)/(a1 y), which outweighs rho_L v' near 1
    yh = y_hat(BASE_REG)
    for vf in (base_vf, regular_vf):
        ps = psi(vf)
        i = np.searchsorted(vf.y, yh)
        assert np.all(np.diff(ps[i:]) >= -1e-12)
        p = vf.params
        slope_bound = p.rho_L * np.max(vf.dplus[:i]) + p.mu_L - p.r - p.excess / BASE_REG.a1
        assert slope_bound < 0
        assert ps[0] > ps[i - 1]


def _panel(panel):
    base = RegulatoryParams()
    out = []
    for val, _, _ in ref.SENSITIVITY[panel]:
        reg = base.replace(**{panel: val})
        if feasibility(BASE, reg).feasible:
            out.append(extract_policy(solve_vi(BASE, reg)).y_star)
    return np.array(out)


def test_comparative_statics_a1():
    ys = _panel("a1")
    assert len(ys) == 9 and np.all(np.diff(ys) > 0)


def test_comparative_statics_a2():
    ys = _panel("a2")
    assert len(ys) == 9 and np.all(np.diff(ys) < 0)


def test_comparative_statics_a3():
    ys = _panel("a3")
    # a3 in {0.15, 0.2, 0.25} breaks the growth condition at baseline
    assert len(ys) == 6 and np.all(np.diff(ys) < 0)


def test_centered_slopes_interior(base_vf):
    s = centered_slopes(base_vf)
    i = 300
    assert s[i] == pytest.approx((base_vf.v[i + 1] - base_vf.v[i - 1]) / (base_vf.y[i + 1] - base_vf.y[i - 1]))


def test_pi_at_clamps(base_pol):
    assert base_pol.pi_at(1.0, 0.0) == 0.0
    assert base_pol.pi_at(2.0, 0.1) <= 0.1


def test_exports(base_vf, base_pol, tmp_path):
    base_pol.to_json(tmp_path / "p.json", verify_policy(base_vf, base_pol))
    doc = json.loads((tmp_path / "p.json").read_text())
    assert doc["y_star"] == base_pol.y_star and doc["checks"]["all_pass"]
    base_pol.pi_table_csv(tmp_path / "pi.csv")
    lines = (tmp_path / "pi.csv").read_text().splitlines()
    assert lines[0] == "y,pi" and len(lines) == base_vf.n + 1
