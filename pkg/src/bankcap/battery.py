"""Experiment battery shared by the CLI, the scripts and the acceptance tests."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from . import reference as ref
from .frontier import A1_GRID, A2_GRID, A3_GRID, SweepSpec, frontier, optimize, pareto_filter, sweep, NoFeasiblePoint
from .hjb_solver import GridSpec, SolverError, solve_vi
from .model import ModelParams, RegulatoryParams, feasibility
from .policy import extract_policy
from .simulator import SimConfig, simulate


@dataclass
class Comparison:
    name: str
    computed: object
    reference: object
    tol: str
    ok: bool

    def row(self) -> list:
        return [self.name, _show(self.computed), _show(self.reference), self.tol, "PASS" if self.ok else "FAIL"]


def _show(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def rel_close(x, target, rel) -> bool:
    return x is not None and abs(x - target) <= rel * abs(target)


def baseline_solve(p: ModelParams | None = None, reg: RegulatoryParams | None = None, n: int = 2000):
    p, reg = p or ModelParams(), reg or RegulatoryParams()
    t = time.perf_counter()
    vf = solve_vi(p, reg, GridSpec(n=n))
    elapsed = time.perf_counter() - t
    return vf, extract_policy(vf), elapsed


def relative_issuance_value(p: ModelParams, reg: RegulatoryParams, y0: float = 1.2, n: int = 2000):
    """(y*, (v - v_no_issuance)/v at y0); raises SolverError for infeasible rows."""
    g = GridSpec(n=n)
    vf = solve_vi(p, reg, g)
    vb = solve_vi(p, reg, g, with_issuance=False)
    pol = extract_policy(vf)
    v, v0 = vf(y0), vb(y0)
    return pol.y_star, (v - v0) / v


def sensitivity_rows(p: ModelParams | None = None, n: int = 2000):
    """Rows (panel, value, y*, dv/v, ref y*, ref dv/v, error) varying one of a1, a2, a3."""
    p = p or ModelParams()
    base = RegulatoryParams()
    rows = []
    for panel, entries in ref.SENSITIVITY.items():
        for val, ys_ref, dv_ref in entries:
            reg = base.replace(**{panel: val})
            try:
                ys, dv = relative_issuance_value(p, reg, n=n)
                err = None
            except SolverError as exc:
                ys, dv, err = None, None, f"{type(exc).__name__}: {exc}"
            rows.append((panel, val, ys, dv, ys_ref, dv_ref, err))
    return rows


def feasibility_counts(p: ModelParams | None = None) -> tuple[int, int]:
    p = p or ModelParams()
    out = []
    for capped in (False, True):
        out.append(sum(
            feasibility(p, RegulatoryParams(a1, a2, a3, capped)).feasible
            for a1, a2, a3 in itertools.product(A1_GRID, A2_GRID, A3_GRID)
        ))
    return tuple(out)


def frontier_sweep(capped: bool, p: ModelParams | None = None, n_paths: int = 1000, seed: int = 0, workers: int = 1):
    p = p or ModelParams()
    pts = sweep(SweepSpec(leverage_capped=capped, n_paths=n_paths, seed=seed), p, workers=workers)
    return pareto_filter(pts)


def bank_table(capped: bool, p: ModelParams | None = None, n_paths: int = 1000, seed: int = 0,
               horizon: float = 50.0, y0s=ref.BANK_Y0, workers: int = 1):
    """Rows (y0, E[issuance], E[dividend], Sharpe, stats) for the 50-year bank ladder."""
    p = p or ModelParams()
    triple = ref.BANKS_CAPPED_TRIPLE if capped else ref.BANKS_UNCAPPED_TRIPLE
    reg = RegulatoryParams(*triple, leverage_capped=capped)
    vf = solve_vi(p, reg)
    pol = extract_policy(vf)
    rows = []
    for y0 in y0s:
        st = simulate(pol, p, reg, SimConfig(y0=y0, horizon=horizon, n_paths=n_paths, seed=seed), workers=workers).stats
        rows.append((y0, st.mean_total_issuance, st.mean_total_dividend, st.sharpe, st))
    return rows


def reproduce(n_paths: int = 1000, seed: int = 0, workers: int = 1, log=print) -> list[Comparison]:
    """Run the full battery and compare against the published numbers."""
    out = []
    vf, pol, _ = baseline_solve()
    out.append(Comparison("baseline y*", pol.y_star, ref.BASELINE_Y_STAR, "+-0.01", abs(pol.y_star - ref.BASELINE_Y_STAR) <= 0.01))
    yp = pol.y_post if pol.issuance_active else None
    out.append(Comparison("baseline y_post", yp, ref.BASELINE_Y_POST, "+-0.01", yp is not None and abs(yp - ref.BASELINE_Y_POST) <= 0.01))
    out.append(Comparison("baseline v(1.2)", vf(1.2), ref.BASELINE_V_Y0, "1%", rel_close(vf(1.2), ref.BASELINE_V_Y0, 0.01)))
    log("baseline done")
    for panel, val, ys, dv, ys_ref, dv_ref, err in sensitivity_rows():
        tag = f"sensitivity {panel}={val}"
        out.append(Comparison(tag + " y*", ys if err is None else err, ys_ref, "1%", rel_close(ys, ys_ref, 0.01)))
        out.append(Comparison(tag + " dv/v", dv if err is None else err, dv_ref, "1.5%", rel_close(dv, dv_ref, 0.015)))
    log("sensitivity done")
    unc, cap = feasibility_counts()
    out.append(Comparison("feasible uncapped", unc, ref.FEASIBLE_UNCAPPED, "exact", unc == ref.FEASIBLE_UNCAPPED))
    out.append(Comparison("feasible capped", cap, ref.FEASIBLE_CAPPED, "exact", cap == ref.FEASIBLE_CAPPED))
    for capped, table, picks, vtol in ((False, ref.FRONTIER_UNCAPPED, ref.PICKS_UNCAPPED, 0.01),
                                       (True, ref.FRONTIER_CAPPED, ref.PICKS_CAPPED, 0.015)):
        tag = "capped" if capped else "uncapped"
        pts = frontier_sweep(capped, n_paths=n_paths, seed=seed, workers=workers)
        fr = frontier(pts, distinct=True)
        out.append(Comparison(f"frontier {tag} size", len(fr), len(table), "exact", len(fr) == len(table)))
        out.extend(compare_frontier(fr, table, capped, vtol, tag))
        for eta, triple in picks.items():
            try:
                got = optimize(pts, eta).triple
            except NoFeasiblePoint:
                got = None
            out.append(Comparison(f"pick {tag} eta={eta}", got, triple, "exact", got == triple))
        log(f"frontier {tag} done")
    for capped, table in ((False, ref.BANKS_UNCAPPED), (True, ref.BANKS_CAPPED)):
        tag = "capped" if capped else "uncapped"
        rows = bank_table(capped, n_paths=n_paths, seed=seed, workers=workers)
        for (y0, iss, div, sh, _), (_, iss_r, div_r, sh_r) in zip(rows, table):
            out.append(Comparison(f"banks {tag} y0={y0} issuance", iss, iss_r, "10%", rel_close(iss, iss_r, 0.10)))
            out.append(Comparison(f"banks {tag} y0={y0} dividend", div, div_r, "10%", rel_close(div, div_r, 0.10)))
            out.append(Comparison(f"banks {tag} y0={y0} sharpe", sh, sh_r, "15%", rel_close(sh, sh_r, 0.15)))
        divs = [r[2] for r in rows]
        mono = all(b > a for a, b in zip(divs, divs[1:]))
        out.append(Comparison(f"banks {tag} dividend increasing in y0", mono, True, "exact", mono))
        log(f"banks {tag} done")
    return out


def compare_frontier(fr, table, capped: bool, vtol: float, tag: str) -> list[Comparison]:
    """Match computed frontier points to published rows by a1 (capped) or by triple."""
    out = []
    for a1, a2, a3, _, v_ref, s_ref in table:
        if capped:
            cand = [q for q in fr if q.a1 == a1]
        else:
            cand = [q for q in fr if q.triple == (a1, a2, a3)]
        q = cand[0] if cand else None
        name = f"frontier {tag} a1={a1}" + ("" if capped else f" a2={a2} a3={a3}")
        out.append(Comparison(name + " v", q.v_y0 if q else "missing", v_ref, f"{vtol:.1%}", q is not None and rel_close(q.v_y0, v_ref, vtol)))
        if not capped:
            out.append(Comparison(name + " survival", q.survival_prob if q else "missing", s_ref, "+-0.05",
                                  q is not None and abs(q.survival_prob - s_ref) <= 0.05))
    return out
