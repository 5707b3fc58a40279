"""Model constants, the regulatory investment cap and the well-posedness test."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np


def pos(x: float) -> float:
    return max(x, 0.0)


def neg(x: float) -> float:
    return max(-x, 0.0)


@dataclass(frozen=True)
class ModelParams:
    r: float = 0.01
    mu: float = 0.04
    mu_L: float = 0.03
    rho: float = 0.12
    sigma: float = 0.08
    sigma_L: float = 0.03
    c: float = 0.20
    gamma: float = 0.01
    kappa: float = 0.01
    kappa_prime: float = 0.02

    def __post_init__(self):
        # sigma = 0 is allowed so the simulator can run deterministic checks
        if self.sigma < 0 or self.sigma_L < 0:
            raise ValueError("volatilities must be non-negative")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if abs(self.c) > 1:
            raise ValueError("correlation c must lie in [-1, 1]")
        if not 0 < self.kappa < 1 or not 0 < self.kappa_prime < 1:
            raise ValueError("kappa and kappa_prime must lie in (0, 1)")

    @property
    def rho_L(self) -> float:
        return self.rho - self.mu_L

    @property
    def r_L(self) -> float:
        return self.mu_L - self.gamma

    @property
    def excess(self) -> float:
        """(mu - r)^+, the premium the bank can lever up."""
        return pos(self.mu - self.r)

    def replace(self, **kw) -> "ModelParams":
        return ModelParams(**{**asdict(self), **kw})


@dataclass(frozen=True)
class RegulatoryParams:
    a1: float = 0.045
    a2: float = 0.05
    a3: float = 0.3
    leverage_capped: bool = False

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            val = getattr(self, name)
            if not 0 < val < 1:
                raise ValueError(f"{name}={val} must lie in (0, 1)")

    @property
    def a_bar(self) -> float:
        return max(self.a1, self.a3)

    @property
    def has_switch(self) -> bool:
        return self.a3 > self.a1

    def cap_key(self) -> tuple:
        """Key identifying the cap function pi_bar; equal keys give identical caps.

        Under the leverage cap the liquidity branch is irrelevant whenever it
        never drops below 1, i.e. (1 - a2)/a3 >= 1 (its value at y = 1).
        """
        if self.leverage_capped and (1 - self.a2) / self.a3 >= 1:
            return (self.a1, None, None, True)
        if not self.has_switch:
            return (self.a1, None, None, self.leverage_capped)
        return (self.a1, self.a2, self.a3, self.leverage_capped)

    def replace(self, **kw) -> "RegulatoryParams":
        return RegulatoryParams(**{**asdict(self), **kw})


class NoSwitchPoint(ValueError):
    """Raised by y_hat when a3 <= a1: the solvency branch binds everywhere."""


def pi_bar(y, reg: RegulatoryParams):
    """Regulatory cap on the risky fraction at leverage ratio y (scalar or array)."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 1):
        raise ValueError("pi_bar is defined for y >= 1 only")
    solv = (1.0 - 1.0 / y_arr) / reg.a1
    liq = (1.0 - reg.a2 / y_arr) / reg.a3
    out = np.minimum(solv, liq)
    if reg.leverage_capped:
        out = np.minimum(out, 1.0)
    out = np.maximum(out, 0.0)
    return float(out) if np.ndim(y) == 0 else out


def y_hat(reg: RegulatoryParams) -> float:
    if not reg.has_switch:
        raise NoSwitchPoint(f"a3={reg.a3} <= a1={reg.a1}: no regime switch point")
    return (reg.a3 - reg.a1 * reg.a2) / (reg.a3 - reg.a1)


def pi_myopic(y, p: ModelParams, reg: RegulatoryParams):
    cap = pi_bar(y, reg)
    return cap if p.mu >= p.r else cap * 0.0


def mu_star(y, p: ModelParams, reg: RegulatoryParams):
    """Drift-maximising return r + pi*(y)(mu - r)."""
    return p.r + pi_myopic(y, p, reg) * (p.mu - p.r)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    rho_bound: float
    A: float
    B: float
    K: float
    degenerate_liquidation: bool
    violations: tuple[str, ...] = ()

    @property
    def solvable(self) -> bool:
        """Well-posed, including the trivial liquidation case."""
        return self.feasible or self.degenerate_liquidation


def growth_bound(p: ModelParams, reg: RegulatoryParams) -> float:
    """Largest drift rate reachable under the cap, floored by mu_L."""
    if reg.leverage_capped:
        top = max(p.r, p.mu)
    else:
        top = p.r + p.excess / reg.a_bar
    return max(p.mu_L, top)


def bound_constants(p: ModelParams, reg: RegulatoryParams) -> tuple[float, float]:
    """The constants (A, B) of the linear upper bound v <= y + K."""
    ex = p.excess
    x1 = p.r + ex / reg.a1 - p.rho
    if reg.has_switch:
        yh = y_hat(reg)
        A = (p.r + ex / reg.a3 - p.rho) * yh - reg.a2 * ex / reg.a3
        B = pos(x1) * yh - neg(x1) - ex / reg.a1
    else:
        # solvency branch everywhere: the liquidity term never enters
        A = -math.inf
        B = (math.inf if x1 > 0 else 0.0) - neg(x1) - ex / reg.a1
    return A, B


def feasibility(p: ModelParams, reg: RegulatoryParams) -> FeasibilityReport:
    rho_bound = growth_bound(p, reg)
    A, B = bound_constants(p, reg)
    violations = []
    if not p.rho > rho_bound:
        violations.append("growth")
    gap = max(A, B) + p.gamma
    degenerate = -p.rho_L >= gap
    if degenerate:
        violations.append("liquidation")
    K = max(-p.rho_L, A + p.gamma, B + p.gamma) / p.rho_L if p.rho_L > 0 else math.inf
    return FeasibilityReport(
        feasible=not violations,
        rho_bound=rho_bound,
        A=A,
        B=B,
        K=K,
        degenerate_liquidation=degenerate and "growth" not in violations,
        violations=tuple(violations),
    )


def describe_violations(p: ModelParams, reg: RegulatoryParams, rep: FeasibilityReport) -> str:
    msgs = []
    if "growth" in rep.violations:
        msgs.append(f"rho={p.rho} must exceed max(mu_L, attainable drift)={rep.rho_bound:.6g}")
    if "liquidation" in rep.violations:
        msgs.append(
            f"-rho_L={-p.rho_L:.6g} >= max(A,B)+gamma={max(rep.A, rep.B) + p.gamma:.6g} "
            "(immediate liquidation is optimal)"
        )
    return "; ".join(msgs)


def load_config(path: str | Path) -> dict:
    """Read a JSON config with optional sections model/regulatory/grid/sim/sweep."""
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config root must be a JSON object")
    return cfg


def _build(cls, section: dict | None):
    section = dict(section or {})
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**section)


def params_from_config(cfg: dict) -> tuple[ModelParams, RegulatoryParams]:
    return _build(ModelParams, cfg.get("model")), _build(RegulatoryParams, cfg.get("regulatory"))
