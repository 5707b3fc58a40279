"""Optimal dividends, equity issuance and regulated risky investment for a bank."""

from .hjb_solver import GridSpec, ValueFunction, solve_vi
from .model import ModelParams, RegulatoryParams, feasibility, mu_star, pi_bar, y_hat
from .policy import OptimalPolicy, extract_policy, verify_policy
from .simulator import SimConfig, simulate, survival_probability

__all__ = [
    "GridSpec", "ModelParams", "OptimalPolicy", "RegulatoryParams", "SimConfig", "ValueFunction",
    "extract_policy", "feasibility", "mu_star", "pi_bar", "simulate", "solve_vi", "survival_probability",
    "verify_policy", "y_hat",
]
