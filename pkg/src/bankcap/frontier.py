"""Regulator's grid search: value versus survival over (a1, a2, a3)."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from .hjb_solver import GridSpec, SolverError, solve_vi
from .model import ModelParams, RegulatoryParams, describe_violations, feasibility
from .policy import PolicyError, extract_policy
from .simulator import SimConfig, simulate

log = logging.getLogger(__name__)

A1_GRID = (0.045, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.11, 0.12)
A2_GRID = (0.05, 0.06, 0.08, 0.09, 0.10, 0.12, 0.15, 0.18, 0.2)
A3_GRID = (0.15, 0.20, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55)


class NoFeasiblePoint(LookupError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    a1_grid: tuple = A1_GRID
    a2_grid: tuple = A2_GRID
    a3_grid: tuple = A3_GRID
    y0: float = 1.2
    T: float = 5.0
    n_paths: int = 1000
    seed: int = 0
    leverage_capped: bool = False
    dt: float = 1.0 / 250.0
    n_nodes: int = 2000

    def __post_init__(self):
        for name in ("a1_grid", "a2_grid", "a3_grid"):
            g = tuple(getattr(self, name))
            if not g:
                raise ValueError(f"{name} is empty")
            if any(not 0 < a < 1 for a in g):
                raise ValueError(f"{name} values must lie in (0, 1)")
            object.__setattr__(self, name, g)
        if self.y0 < 1:
            raise ValueError("y0 must be >= 1")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")

    def triples(self):
        return list(itertools.product(self.a1_grid, self.a2_grid, self.a3_grid))

    def sim_config(self) -> SimConfig:
        return SimConfig(y0=self.y0, horizon=self.T, dt=self.dt, n_paths=self.n_paths, seed=self.seed, horizon_ref=self.T)


@dataclass
class FrontierPoint:
    a1: float
    a2: float
    a3: float
    feasible: bool
    y_star: float | None = None
    v_y0: float | None = None
    survival_prob: float | None = None
    survival_ci: float | None = None
    on_frontier: bool = False
    fragile: bool = False
    dominated_by: int | None = None  # index of a dominating frontier point
    error: str | None = None

    @property
    def triple(self) -> tuple:
        return (self.a1, self.a2, self.a3)

    @property
    def evaluated(self) -> bool:
        return self.feasible and self.error is None and self.v_y0 is not None


def _evaluate(args):
    """Solve, extract and simulate one cap; returns (y_star, v_y0, survival, ci) or an error string."""
    p, reg, spec = args
    try:
        vf = solve_vi(p, reg, GridSpec(n=spec.n_nodes))
        pol = extract_policy(vf)
        st = simulate(pol, p, reg, spec.sim_config()).stats
    except (SolverError, PolicyError, ValueError) as exc:
        return f"{type(exc).__name__}: {exc}"
    return pol.y_star, float(vf(spec.y0)), st.survival_prob, st.survival_ci


def sweep(spec: SweepSpec, p: ModelParams, workers: int = 1) -> list[FrontierPoint]:
    """Evaluate every grid triple in grid order; triples sharing a cap share one solve."""
    points, jobs, keys = [], {}, []
    for a1, a2, a3 in spec.triples():
        reg = RegulatoryParams(a1, a2, a3, spec.leverage_capped)
        rep = feasibility(p, reg)
        pt = FrontierPoint(a1, a2, a3, feasible=rep.feasible)
        if not rep.feasible:
            pt.error = "infeasible: " + describe_violations(p, reg, rep)
            keys.append(None)
        else:
            key = reg.cap_key()
            jobs.setdefault(key, (p, reg, spec))
            keys.append(key)
        points.append(pt)
    order = list(jobs)
    if workers > 1 and len(order) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_evaluate, [jobs[k] for k in order], chunksize=4))
    else:
        out = [_evaluate(jobs[k]) for k in order]
    results = dict(zip(order, out))
    for pt, key in zip(points, keys):
        if key is None:
            continue
        res = results[key]
        if isinstance(res, str):
            pt.error = res
            log.warning("triple %s failed: %s", pt.triple, res)
        else:
            pt.y_star, pt.v_y0, pt.survival_prob, pt.survival_ci = res
    return points


def _dominates(a: FrontierPoint, b: FrontierPoint) -> bool:
    return (
        a.survival_prob >= b.survival_prob
        and a.v_y0 >= b.v_y0
        and (a.survival_prob > b.survival_prob or a.v_y0 > b.v_y0)
    )


def pareto_filter(points: list[FrontierPoint]) -> list[FrontierPoint]:
    """Mark non-dominated points in (survival_prob, v_y0); identical coordinates are all kept."""
    idx = [i for i, q in enumerate(points) if q.evaluated]
    for i in range(len(points)):
        points[i].on_frontier = False
        points[i].dominated_by = None
        points[i].fragile = False
    # sort by value descending, survival descending: a point is on the
    # frontier iff its survival beats every strictly better-valued point
    order = sorted(idx, key=lambda i: (-points[i].v_y0, -points[i].survival_prob))
    front = []
    for i in idx:
        q = points[i]
        q.on_frontier = not any(_dominates(points[j], q) for j in order if points[j].v_y0 >= q.v_y0)
        if q.on_frontier:
            front.append(i)
    for i in idx:
        q = points[i]
        if q.on_frontier:
            # fragile if a higher-valued point trails it by less than a CI
            for j in idx:
                o = points[j]
                if o.v_y0 > q.v_y0 and 0 <= q.survival_prob - o.survival_prob <= max(q.survival_ci, o.survival_ci):
                    q.fragile = True
                    break
        else:
            doms = [j for j in front if _dominates(points[j], q)]
            q.dominated_by = max(doms, key=lambda j: (points[j].v_y0, points[j].survival_prob, [-x for x in points[j].triple]))
            # fragile if no dominator is ahead in survival by more than a CI
            q.fragile = all(
                points[j].survival_prob - q.survival_prob <= max(q.survival_ci, points[j].survival_ci) for j in doms
            )
    return points


def frontier(points: list[FrontierPoint], distinct: bool = False) -> list[FrontierPoint]:
    """Frontier points sorted by decreasing survival.

    With distinct=True, points sharing identical (survival, value) keep only
    the lexicographically smallest triple: under common random numbers,
    triples with the same cap function produce exactly equal coordinates.
    """
    pts = [q for q in points if q.on_frontier]
    if distinct:
        seen = {}
        for q in sorted(pts, key=lambda q: q.triple):
            seen.setdefault((q.survival_prob, q.v_y0), q)
        pts = list(seen.values())
    return sorted(pts, key=lambda q: (-q.survival_prob, -q.v_y0, q.triple))


def optimize(points: list[FrontierPoint], eta: float) -> FrontierPoint:
    """argmax v_y0 subject to survival_prob >= eta; ties: higher survival, then smaller triple."""
    ok = [q for q in points if q.evaluated and q.survival_prob >= eta]
    if not ok:
        raise NoFeasiblePoint(f"no feasible point with survival >= {eta}")
    return min(ok, key=lambda q: (-q.v_y0, -q.survival_prob, q.triple))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_sweep_csv(points, path) -> None:
    cols = ["a1", "a2", "a3", "feasible", "y_star", "v_y0", "survival", "ci_half", "on_frontier", "fragile"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for q in points:
            w.writerow([_fmt(x) for x in (q.a1, q.a2, q.a3, q.feasible, q.y_star, q.v_y0,
                                          q.survival_prob, q.survival_ci, q.on_frontier, q.fragile)])


def write_plot_csv(points, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["survival", "value", "on_frontier"])
        for q in points:
            if q.evaluated:
                w.writerow([_fmt(q.survival_prob), _fmt(q.v_y0), _fmt(q.on_frontier)])


def point_dict(q: FrontierPoint) -> dict:
    return {k: v for k, v in asdict(q).items()}


def frontier_report(points, etas=()) -> dict:
    picks = {}
    for eta in etas:
        try:
            picks[str(eta)] = point_dict(optimize(points, eta))
        except NoFeasiblePoint as exc:
            picks[str(eta)] = {"error": "no feasible point", "detail": str(exc)}
    failures = [{"triple": q.triple, "error": q.error} for q in points if q.feasible and q.error]
    return {
        "n_triples": len(points),
        "n_feasible": sum(q.feasible for q in points),
        "n_failed": len(failures),
        "frontier": [point_dict(q) for q in frontier(points, distinct=True)],
        "frontier_all_ties": len(frontier(points)),
        "picks": picks,
        "failures": failures,
    }


def write_frontier_json(points, path, etas=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(frontier_report(points, etas), fh, indent=2)
        fh.write("\n")


def sweep_spec_from(section: dict | None, **overrides) -> SweepSpec:
    section = {**(section or {}), **{k: v for k, v in overrides.items() if v is not None}}
    known = {f.name for f in fields(SweepSpec)}
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"unknown sweep fields: {sorted(unknown)}")
    return SweepSpec(**section)
