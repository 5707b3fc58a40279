"""Command line entry point: solve, simulate, frontier, reproduce-paper."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .hjb_solver import GridSpec, InfeasibleParameters, NoConvergence, SolverError, TruncationTooSmall, solve_vi
from .model import describe_violations, feasibility, load_config, params_from_config
from .policy import PolicyError, extract_policy, verify_policy

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SOLVER = 2, 3, 4

log = logging.getLogger("bankcap")


class ConfigError(Exception):
    pass


def tool_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "0.1.0"


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    def __init__(self, command: str, config_path: str | None, resolved: dict, seed: int | None):
        self.command = command
        self.config_path = config_path
        self.resolved = resolved
        self.seed = seed
        self.outputs: list[Path] = []
        self._t0 = time.perf_counter()

    def add(self, path: Path) -> Path:
        self.outputs.append(path)
        return path

    def write(self, out_dir: Path) -> Path:
        doc = {
            "command": self.command,
            "config_path": self.config_path,
            "resolved": self.resolved,
            "seed": self.seed,
            "tool_version": tool_version(),
            "duration_s": round(time.perf_counter() - self._t0, 3),
            "outputs": [{"path": p.name, "sha256": sha256(p)} for p in self.outputs],
        }
        path = out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        return path


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return load_config(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _params(cfg: dict):
    try:
        return params_from_config(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _grid(cfg: dict, args) -> GridSpec:
    sec = dict(cfg.get("grid") or {})
    if getattr(args, "nodes", None):
        sec["n"] = args.nodes
    if getattr(args, "y_max", None):
        sec["y_max"] = args.y_max
    try:
        return GridSpec(**sec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _json(path: Path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _solve(p, reg, grid, allow_degenerate: bool, with_issuance=True):
    rep = feasibility(p, reg)
    if not rep.feasible and not (allow_degenerate and rep.degenerate_liquidation):
        raise InfeasibleParameters(describe_violations(p, reg, rep))
    return solve_vi(p, reg, grid, with_issuance=with_issuance, allow_degenerate=allow_degenerate)


def cmd_solve(args) -> int:
    cfg = _read_config(args.config)
    p, reg = _params(cfg)
    grid = _grid(cfg, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("solve", args.config, {"model": asdict(p), "regulatory": asdict(reg), "grid": asdict(grid)}, None)
    vf = _solve(p, reg, grid, args.allow_degenerate)
    pol = extract_policy(vf)
    checks = verify_policy(vf, pol)
    vf.to_csv(man.add(out / "value_function.csv"))
    pol.to_json(man.add(out / "policy.json"), checks)
    pol.pi_table_csv(man.add(out / "pi_table.csv"))
    report = {"y_star": pol.y_star, "y_post": pol.y_post, "xi_star": pol.xi_star,
              "issuance_active": pol.issuance_active, "y_max": vf.y[-1], "howard_iterations": vf.iterations}
    if args.benchmark:
        vb = _solve(p, reg, grid, args.allow_degenerate, with_issuance=False)
        vb.to_csv(man.add(out / "value_function_no_issuance.csv"))
        y0 = args.y0
        report["relative_issuance_value"] = {"y": y0, "value": (vf(y0) - vb(y0)) / vf(y0) if vf(y0) != 0 else None}
    if args.eval_2d:
        ell, x = args.eval_2d
        report["eval_2d"] = {"ell": ell, "x": x, "value": vf.eval_2d(ell, x)}
    _json(man.add(out / "report.json"), report)
    man.write(out)
    print(json.dumps(report, indent=2, default=str))
    return 0


def _sim_config(cfg, args):
    from .simulator import sim_config_from

    try:
        return sim_config_from(
            cfg.get("sim"), seed=args.seed, n_paths=args.paths, dt=args.dt, horizon=args.horizon, y0=args.y0,
            record_trajectory=True if args.record else None, horizon_ref=args.horizon_ref,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sim: {exc}") from exc


def cmd_simulate(args) -> int:
    from .simulator import simulate

    cfg = _read_config(args.config)
    p, reg = _params(cfg)
    sc = _sim_config(cfg, args)
    grid = _grid(cfg, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("simulate", args.config, {"model": asdict(p), "regulatory": asdict(reg), "sim": asdict(sc)}, sc.seed)
    vf = _solve(p, reg, grid, allow_degenerate=True)
    pol = extract_policy(vf)
    res = simulate(pol, p, reg, sc, workers=args.workers)
    res.ensemble_csv(man.add(out / "ensemble.csv"))
    summary = {"policy": pol.to_dict(), "stats": res.stats.to_dict()}
    _json(man.add(out / "summary.json"), summary)
    if sc.record_trajectory:
        res.trajectory_csv(man.add(out / "trajectory.csv"))
    man.write(out)
    print(json.dumps(res.stats.to_dict(), indent=2))
    return 0


def cmd_frontier(args) -> int:
    from .frontier import sweep, pareto_filter, sweep_spec_from, write_frontier_json, write_plot_csv, write_sweep_csv

    cfg = _read_config(args.config)
    p, _ = _params(cfg)
    try:
        spec = sweep_spec_from(cfg.get("sweep"), seed=args.seed, n_paths=args.paths, y0=args.y0, T=args.horizon,
                               leverage_capped=True if args.capped else None, dt=args.dt)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from exc
    etas = args.eta or [0.8, 0.9]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("frontier", args.config, {"model": asdict(p), "sweep": asdict(spec), "eta": etas}, spec.seed)
    pts = pareto_filter(sweep(spec, p, workers=args.workers))
    write_sweep_csv(pts, man.add(out / "sweep.csv"))
    write_frontier_json(pts, man.add(out / "frontier.json"), etas)
    write_plot_csv(pts, man.add(out / "plot_data.csv"))
    man.write(out)
    feas = [q for q in pts if q.feasible]
    n_ok = sum(q.evaluated for q in feas)
    print(f"{len(pts)} triples, {len(feas)} feasible, {n_ok} evaluated, "
          f"{sum(q.on_frontier for q in pts)} on the frontier")
    if feas and n_ok == 0:
        return EXIT_SOLVER
    return 0


def cmd_reproduce(args) -> int:
    from .battery import reproduce

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("reproduce-paper", None, {"paths": args.paths}, args.seed)
    rows = reproduce(n_paths=args.paths, seed=args.seed, workers=args.workers, log=lambda m: log.info(m))
    path = man.add(out / "comparison.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "computed", "reference", "tolerance", "status"])
        for c in rows:
            w.writerow(c.row())
    man.write(out)
    width = max(len(c.name) for c in rows)
    for c in rows:
        name, comp, refv, tol, st = c.row()
        print(f"{name:<{width}}  {comp:>14}  {refv:>14}  {tol:>7}  {st}")
    n_pass = sum(c.ok for c in rows)
    print(f"{n_pass}/{len(rows)} comparisons within tolerance")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bankcap", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, sim=False):
        sp.add_argument("--config", help="JSON config with sections model/regulatory/grid/sim/sweep")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--nodes", type=int, help="grid node count")
        sp.add_argument("--y-max", type=float, dest="y_max", help="fixed truncation point")
        if sim:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--paths", type=int)
            sp.add_argument("--dt", type=float)
            sp.add_argument("--horizon", type=float)
            sp.add_argument("--y0", type=float)
            sp.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("solve", help="solve the variational inequality and extract the policy")
    common(s)
    s.add_argument("--benchmark", action="store_true", help="also solve without the issuance option")
    s.add_argument("--eval-2d", nargs=2, type=float, metavar=("ELL", "X"), help="report ell * v(x / ell)")
    s.add_argument("--allow-degenerate", action="store_true", help="accept the immediate-liquidation case")
    s.add_argument("--y0", type=float, default=1.2, help="evaluation point for --benchmark")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("simulate", help="Monte Carlo of the controlled leverage ratio")
    common(s, sim=True)
    s.add_argument("--record", action="store_true", help="write the first path's trajectory")
    s.add_argument("--horizon-ref", type=float, dest="horizon_ref", help="stress reference horizon")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("frontier", help="sweep (a1, a2, a3) and extract the Pareto frontier")
    common(s, sim=True)
    s.add_argument("--eta", type=float, action="append", help="survival threshold (repeatable)")
    s.add_argument("--capped", action="store_true", help="impose pi <= 1")
    s.set_defaults(func=cmd_frontier)

    s = sub.add_parser("reproduce-paper", help="run the published battery and compare")
    s.add_argument("--out", default="out/reproduce")
    s.add_argument("--paths", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleParameters as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NoConvergence, TruncationTooSmall, SolverError, PolicyError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
