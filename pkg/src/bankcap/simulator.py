"""Monte Carlo simulation of the controlled leverage ratio.

Euler-Maruyama on dY = (Y[mu(pi) - mu_L] + gamma) dt + pi Y sigma dB + sigma_L (1 - Y) dW,
reflected at the dividend barrier by projection, recapitalised to the
post-issuance target when it drops below 1 (or absorbed if issuance is off).

Every path draws its shocks from its own Philox stream keyed by
(master seed, path index), so results do not depend on how paths are split
into blocks or spread across workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

import numpy as np

from .model import ModelParams, RegulatoryParams, pi_bar
from .policy import OptimalPolicy

EVENTS = ("none", "reflect", "issue", "bankrupt")


@dataclass(frozen=True)
class SimConfig:
    y0: float = 1.2
    horizon: float = 50.0
    dt: float = 1.0 / 250.0
    n_paths: int = 1000
    seed: int = 0
    record_trajectory: bool = False
    horizon_ref: float = 5.0  # stress reference horizon T
    block: int = 500

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.horizon < self.dt:
            raise ValueError("horizon must be at least one step")
        if self.n_paths < 1:
            raise ValueError("need at least one path")
        if self.y0 < 1:
            raise ValueError("y0 must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.horizon_ref <= 0:
            raise ValueError("horizon_ref must be positive")
        if self.block < 1:
            raise ValueError("block must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def replace(self, **kw) -> "SimConfig":
        return SimConfig(**{**asdict(self), **kw})


@dataclass(frozen=True)
class EnsembleStats:
    n_paths: int
    mean_total_issuance: float
    mean_total_dividend: float
    mean_net_payoff: float
    std_net_payoff: float
    sharpe: float | None
    # alternative readings of the ratio on undiscounted totals
    sharpe_net_undiscounted: float | None
    sharpe_dividend: float | None
    survival_prob: float
    survival_ci: float
    stress_count_mean: float
    bankrupt_fraction: float
    horizon_ref: float

    def to_dict(self) -> dict:
        return asdict(self)


class StepResult(NamedTuple):
    y: np.ndarray
    dividend: np.ndarray
    issuance: np.ndarray
    stressed: np.ndarray
    bankrupt: np.ndarray


def correlated_shocks(z_w, z_perp, c: float):
    """(z_B, z_W) with corr(z_B, z_W) = c."""
    return c * z_w + math.sqrt(1.0 - c * c) * z_perp, z_w


def path_normals(seed: int, first: int, count: int, n_steps: int) -> np.ndarray:
    """Standard normals of shape (n_steps, count, 2) for paths first..first+count-1."""
    out = np.empty((n_steps, count, 2))
    for k in range(count):
        g = np.random.Generator(np.random.Philox(key=np.array([seed, first + k], dtype=np.uint64)))
        out[:, k, :] = g.standard_normal((n_steps, 2))
    return out


_normals_cache: dict = {}
CACHE_BYTES = 64 * 2**20


def _cached_normals(seed, first, count, n_steps):
    # sweeps reuse the same streams for every triple (common random numbers),
    # so small blocks are kept rather than regenerated
    if 16 * count * n_steps > CACHE_BYTES // 8:
        return path_normals(seed, first, count, n_steps)
    key = (seed, first, count, n_steps)
    if key not in _normals_cache:
        if len(_normals_cache) >= 8:
            _normals_cache.clear()
        _normals_cache[key] = path_normals(seed, first, count, n_steps)
    return _normals_cache[key]


def step(y, pol: OptimalPolicy, p: ModelParams, reg: RegulatoryParams, dt: float, z_b, z_w) -> StepResult:
    """One Euler step for live paths at states y >= 1 (scalar or array)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 1):
        raise ValueError("step expects y >= 1")
    cap = pi_bar(y, reg)
    pi = pol.pi_at(y, cap)
    sq = math.sqrt(dt)
    drift = y * (p.r + pi * (p.mu - p.r) - p.mu_L) + p.gamma
    y_new = y + drift * dt + pi * y * p.sigma * sq * z_b + p.sigma_L * (1.0 - y) * sq * z_w
    over = y_new > pol.y_star
    div = np.where(over, y_new - pol.y_star, 0.0)
    y_new = np.where(over, pol.y_star, y_new)
    low = y_new < 1.0
    if pol.issuance_active:
        iss = np.where(low, pol.xi_star, 0.0)
        y_new = np.where(low, pol.y_post, y_new)
        bankrupt = np.zeros_like(low)
    else:
        iss = np.zeros_like(y_new)
        y_new = np.where(low, 1.0, y_new)
        bankrupt = low
    return StepResult(y_new, div, iss, low, bankrupt)


def _run_block(pol, p, reg, cfg: SimConfig, first: int, count: int, record: bool):
    n_steps = cfg.n_steps
    n_ref = min(int(round(cfg.horizon_ref / cfg.dt)), n_steps)
    z = _cached_normals(cfg.seed, first, count, n_steps)
    y = np.full(count, float(cfg.y0))
    cum_div = np.zeros(count)
    cum_iss = np.zeros(count)
    pv_div = np.zeros(count)
    pv_iss = np.zeros(count)
    stress = np.zeros(count, dtype=np.int64)
    first_stress = np.full(count, np.inf)
    alive = np.ones(count, dtype=bool)
    traj = None
    if y[0] > pol.y_star:
        # lump-sum dividend at time 0 down to the barrier
        cum_div += y - pol.y_star
        pv_div += y - pol.y_star
        y[:] = pol.y_star
    if record:
        traj = [(0.0, float(y[0]), float(cum_div[0]), 0.0, "reflect" if cum_div[0] > 0 else "none")]
    for s in range(n_steps):
        t = (s + 1) * cfg.dt
        disc = math.exp(-p.rho_L * t)
        z_b, z_w = correlated_shocks(z[s, :, 0], z[s, :, 1], p.c)
        res = step(y, pol, p, reg, cfg.dt, z_b, z_w)
        div = np.where(alive, res.dividend, 0.0)
        iss = np.where(alive, res.issuance, 0.0)
        hit = alive & res.stressed
        cum_div += div
        cum_iss += iss
        # pre-jump state is taken as 1: the continuous path issues on hitting it
        pv_div += disc * div
        pv_iss += disc * iss
        stress += hit
        first_stress = np.where(hit & np.isinf(first_stress), t, first_stress)
        y = np.where(alive, res.y, y)
        alive &= ~res.bankrupt
        if record:
            ev = "bankrupt" if res.bankrupt[0] and hit[0] else "issue" if iss[0] > 0 else "reflect" if div[0] > 0 else "none"
            traj.append((t, float(y[0]), float(cum_div[0]), float(cum_iss[0]), ev))
    survived = ~(first_stress <= n_ref * cfg.dt + 1e-12)
    return {
        "total_dividend": cum_div,
        "total_issuance": cum_iss,
        "pv_dividend": pv_div,
        "pv_issuance": pv_iss,
        "net_payoff": pv_div - pv_iss,
        "stress_count": stress,
        "first_stress": first_stress,
        "bankrupt": ~alive,
        "survived": survived,
    }, traj


def _block_job(args):
    return _run_block(*args)


@dataclass
class SimResult:
    stats: EnsembleStats
    paths: dict
    trajectory: list | None = None

    def ensemble_csv(self, path) -> None:
        cols = ["total_dividend", "total_issuance", "pv_dividend", "pv_issuance", "net_payoff", "stress_count", "first_stress", "bankrupt", "survived"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["path"] + cols)
            for i in range(self.stats.n_paths):
                w.writerow([i] + [_fmt(self.paths[c][i]) for c in cols])
            s = self.stats
            w.writerow([
                "mean", _fmt(s.mean_total_dividend), _fmt(s.mean_total_issuance),
                _fmt(np.mean(self.paths["pv_dividend"])), _fmt(np.mean(self.paths["pv_issuance"])), _fmt(s.mean_net_payoff),
                _fmt(s.stress_count_mean), "", _fmt(s.bankrupt_fraction), _fmt(s.survival_prob),
            ])

    def trajectory_csv(self, path) -> None:
        if self.trajectory is None:
            raise ValueError("trajectory was not recorded")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "y", "cum_dividend", "cum_issuance", "event"])
            for t, y, d, i, ev in self.trajectory:
                w.writerow([_fmt(t), _fmt(y), _fmt(d), _fmt(i), ev])


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _ratio(x: np.ndarray) -> float | None:
    if len(x) < 2:
        return None
    sd = float(np.std(x, ddof=1))
    return float(np.mean(x)) / sd if sd > 0 else None


def summarize(paths: dict, horizon_ref: float) -> EnsembleStats:
    n = len(paths["net_payoff"])
    pay = paths["net_payoff"]
    sd = float(np.std(pay, ddof=1)) if n > 1 else 0.0
    p_hat = float(np.mean(paths["survived"]))
    return EnsembleStats(
        n_paths=n,
        mean_total_issuance=float(np.mean(paths["total_issuance"])),
        mean_total_dividend=float(np.mean(paths["total_dividend"])),
        mean_net_payoff=float(np.mean(pay)),
        std_net_payoff=sd,
        sharpe=_ratio(pay),
        sharpe_net_undiscounted=_ratio(paths["total_dividend"] - paths["total_issuance"]),
        sharpe_dividend=_ratio(paths["total_dividend"]),
        survival_prob=p_hat,
        survival_ci=1.96 * math.sqrt(p_hat * (1.0 - p_hat) / n),
        stress_count_mean=float(np.mean(paths["stress_count"])),
        bankrupt_fraction=float(np.mean(paths["bankrupt"])),
        horizon_ref=horizon_ref,
    )


def simulate(pol: OptimalPolicy, p: ModelParams, reg: RegulatoryParams, cfg: SimConfig, workers: int = 1) -> SimResult:
    jobs = []
    for first in range(0, cfg.n_paths, cfg.block):
        count = min(cfg.block, cfg.n_paths - first)
        jobs.append((pol, p, reg, cfg, first, count, cfg.record_trajectory and first == 0))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_block_job, jobs))
    else:
        results = [_block_job(j) for j in jobs]
    keys = results[0][0].keys()
    paths = {k: np.concatenate([r[0][k] for r in results]) for k in keys}
    return SimResult(summarize(paths, min(cfg.horizon_ref, cfg.horizon)), paths, results[0][1])


def survival_probability(
    pol: OptimalPolicy,
    p: ModelParams,
    reg: RegulatoryParams,
    y0: float,
    T: float,
    n_paths: int = 1000,
    seed: int = 0,
    dt: float = 1.0 / 250.0,
    workers: int = 1,
) -> tuple[float, float]:
    """P(no drop below 1 on [0, T]) and the half-width of its 95% interval."""
    if T <= 0:
        raise ValueError("T must be positive")
    cfg = SimConfig(y0=y0, horizon=max(T, dt), dt=dt, n_paths=n_paths, seed=seed, horizon_ref=T)
    st = simulate(pol, p, reg, cfg, workers=workers).stats
    return st.survival_prob, st.survival_ci


def sim_config_from(section: dict | None, **overrides) -> SimConfig:
    section = {**(section or {}), **{k: v for k, v in overrides.items() if v is not None}}
    known = {f.name for f in fields(SimConfig)}
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"unknown sim fields: {sorted(unknown)}")
    return SimConfig(**section)
