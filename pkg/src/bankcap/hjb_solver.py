"""Finite-difference solver for the dividend / issuance variational inequality.

The scheme is fully implicit and monotone: central second differences,
first differences upwinded on the sign of the drift, the gradient
constraint discretised as a backward difference (paying a dividend moves the
state down) and the impulse operator restricted to grid targets. The discrete
system is solved with Howard policy iteration, each step being one sparse
linear solve.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .model import ModelParams, RegulatoryParams, describe_violations, feasibility, pi_bar

log = logging.getLogger(__name__)

CONTINUATION, DIVIDEND, ISSUANCE, BANKRUPT = 0, 1, 2, 3
REGIME_NAMES = {CONTINUATION: "continuation", DIVIDEND: "dividend", ISSUANCE: "issuance", BANKRUPT: "bankrupt"}


class SolverError(RuntimeError):
    pass


class InfeasibleParameters(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class TruncationTooSmall(SolverError):
    pass


@dataclass(frozen=True)
class GridSpec:
    y_max: float | None = None  # None: start at AUTO_Y_MAX and double as needed
    n: int = 2000
    spacing: str = "uniform"  # or "refined": geometric clustering near y = 1

    def __post_init__(self):
        if self.y_max is not None and self.y_max <= 1:
            raise ValueError("y_max must exceed 1")
        if self.n < 200:
            raise ValueError("at least 200 nodes are required")
        if self.spacing not in ("uniform", "refined"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    def nodes(self, y_max: float | None = None) -> np.ndarray:
        top = y_max or self.y_max or AUTO_Y_MAX
        t = np.linspace(0.0, 1.0, self.n)
        if self.spacing == "refined":
            t = np.expm1(REFINE * t) / math.expm1(REFINE)
        y = 1.0 + (top - 1.0) * t
        y[0], y[-1] = 1.0, top
        return y


AUTO_Y_MAX = 3.0
REFINE = 2.0
EDGE_CELLS = 5


@dataclass
class ValueFunction:
    y: np.ndarray
    v: np.ndarray
    dplus: np.ndarray
    dminus: np.ndarray
    d2: np.ndarray
    pi_opt: np.ndarray
    regime: np.ndarray
    residual: np.ndarray
    target: np.ndarray  # impulse target node per node (-1 if none)
    with_issuance: bool
    params: ModelParams
    reg: RegulatoryParams
    grid: GridSpec
    iterations: int = 0
    tol: float = 1e-9

    @property
    def n(self) -> int:
        return len(self.y)

    def __call__(self, y):
        """Piecewise-linear interpolation; slope-1 extension beyond the grid."""
        y = np.asarray(y, dtype=float)
        out = np.interp(y, self.y, self.v)
        out = np.where(y > self.y[-1], self.v[-1] + (y - self.y[-1]), out)
        return float(out) if out.ndim == 0 else out

    def barrier_index(self) -> int:
        """First node of the terminal run of dividend nodes."""
        div = self.regime == DIVIDEND
        k = self.n - 1
        while k > 0 and div[k - 1]:
            k -= 1
        return k

    def regime_names(self) -> list[str]:
        return [REGIME_NAMES[int(k)] for k in self.regime]

    def eval_2d(self, ell: float, x: float) -> float:
        """Value of the original problem: vhat(ell, x) = ell * v(x / ell)."""
        if ell <= 0 or x < ell:
            raise ValueError("need ell > 0 and x >= ell")
        return ell * self(x / ell)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "v", "dv_plus", "dv_minus", "pi_opt", "regime", "residual"])
            names = self.regime_names()
            for i in range(self.n):
                w.writerow([
                    f"{self.y[i]:.12g}", f"{self.v[i]:.12g}", f"{self.dplus[i]:.12g}",
                    f"{self.dminus[i]:.12g}", f"{self.pi_opt[i]:.12g}", names[i],
                    f"{self.residual[i]:.12g}",
                ])


# ---------------------------------------------------------------------------
# pointwise control


def _quad_coeffs(y, dv, d2v, p: ModelParams):
    """q(pi) = qa pi^2 + qb pi, the pi-dependent part of the generator."""
    qa = 0.5 * p.sigma**2 * y**2 * d2v
    qb = p.c * p.sigma * p.sigma_L * y * (1.0 - y) * d2v + (p.mu - p.r) * y * dv
    return qa, qb


def pointwise_pi_opt(y: float, dv: float, d2v: float, p: ModelParams, reg: RegulatoryParams) -> float:
    """Maximiser over [0, pi_bar(y)] of the pi-dependent part of the generator."""
    cap = pi_bar(y, reg)
    qa, qb = _quad_coeffs(y, dv, d2v, p)
    if cap == 0.0:
        return 0.0
    if qa < 0:
        return min(max(-qb / (2.0 * qa), 0.0), cap)
    # convex or linear: an endpoint wins; ties go to the smaller exposure
    return cap if qa * cap**2 + qb * cap > 0.0 else 0.0


def generator_coeffs(y, pi, p: ModelParams):
    """Half the diffusion variance and the drift of Y under risky fraction pi."""
    a = 0.5 * (
        pi**2 * p.sigma**2 * y**2
        + 2.0 * pi * p.c * p.sigma * p.sigma_L * y * (1.0 - y)
        + p.sigma_L**2 * (1.0 - y) ** 2
    )
    b = y * (p.r + pi * (p.mu - p.r) - p.mu_L) + p.gamma
    return a, b


def _upwind_generator(y, pi, dp, dm, d2, p):
    a, b = generator_coeffs(y, pi, p)
    return a * d2 + np.maximum(b, 0.0) * dp - np.maximum(-b, 0.0) * dm


def upwind_pi_opt(y, dp, dm, d2, cap, p: ModelParams):
    """Vectorised maximiser of the upwinded discrete generator over [0, cap].

    The drift is affine in pi, so [0, cap] splits at the zero of the drift into
    at most two pieces on each of which the objective is a quadratic in pi. The
    maximiser is among the endpoints, the split point and the clamped vertices.
    """
    y, dp, dm, d2, cap = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (y, dp, dm, d2, cap)))
    cands = [np.zeros_like(y), cap]
    slope = y * (p.mu - p.r)
    with np.errstate(divide="ignore", invalid="ignore"):
        split = np.where(slope != 0.0, -(y * (p.r - p.mu_L) + p.gamma) / slope, 0.0)
        cands.append(np.clip(np.nan_to_num(split), 0.0, cap))
        for dv in (dp, dm):
            qa, qb = _quad_coeffs(y, dv, d2, p)
            vert = np.where(qa < 0, -qb / (2.0 * qa), 0.0)
            cands.append(np.clip(np.nan_to_num(vert), 0.0, cap))
    cands = np.stack(cands, axis=-1)
    vals = _upwind_generator(y[..., None], cands, dp[..., None], dm[..., None], d2[..., None], p)
    best = np.argmax(vals, axis=-1)
    pi = np.take_along_axis(cands, best[..., None], axis=-1)[..., 0]
    return pi, np.take_along_axis(vals, best[..., None], axis=-1)[..., 0]


# ---------------------------------------------------------------------------
# impulse operator


def issuance_cost(y_from, y_to, p: ModelParams):
    """Net shareholder cost of jumping from y_from to y_to by issuing equity."""
    return (y_to - (1.0 - p.kappa) * y_from - p.kappa) / (1.0 - p.kappa_prime) - p.kappa * (y_from - 1.0)


def impulse_all(y: np.ndarray, v: np.ndarray, p: ModelParams):
    """H v at every node together with the argmax target node (targets z > y_i)."""
    score = v - y / (1.0 - p.kappa_prime)
    n = len(y)
    best = np.full(n, -np.inf)
    arg = np.full(n, -1, dtype=int)
    run, run_arg = -np.inf, -1
    for i in range(n - 1, -1, -1):
        best[i], arg[i] = run, run_arg
        if score[i] > run:
            run, run_arg = score[i], i
    shift = ((1.0 - p.kappa) * y + p.kappa) / (1.0 - p.kappa_prime) + p.kappa * (y - 1.0)
    return best + shift, arg


def impulse_value(vf: ValueFunction, i: int) -> tuple[float, int]:
    """(H v(y_i), argmax node); (-inf, -1) at the last node."""
    hv, arg = impulse_all(vf.y, vf.v, vf.params)
    return float(hv[i]), int(arg[i])


# ---------------------------------------------------------------------------
# discrete operators


def differences(y: np.ndarray, v: np.ndarray):
    """One-sided slopes and second differences on a (possibly non-uniform) grid."""
    h = np.diff(y)
    dp = np.empty_like(v)
    dm = np.empty_like(v)
    d2 = np.zeros_like(v)
    s = np.diff(v) / h
    dp[:-1] = s
    dp[-1] = 1.0
    dm[1:] = s
    dm[0] = s[0]
    d2[1:-1] = 2.0 * (s[1:] - s[:-1]) / (h[1:] + h[:-1])
    d2[0] = d2[1]
    return dp, dm, d2


def _branch_roots(y, v, cap, p, with_issuance):
    """Node values that make each branch hold with equality, neighbours fixed."""
    n = len(y)
    h = np.diff(y)
    hm, hp = h[:-1], h[1:]
    dp, dm, d2 = differences(y, v)
    ii = slice(1, n - 1)
    pi, _ = upwind_pi_opt(y[ii], dp[ii], dm[ii], d2[ii], cap[ii], p)
    a, b = generator_coeffs(y[ii], pi, p)
    up = 2.0 * a / (hp * (hp + hm)) + np.maximum(b, 0.0) / hp
    dn = 2.0 * a / (hm * (hp + hm)) + np.maximum(-b, 0.0) / hm
    diag = p.rho_L + up + dn
    cont = np.full(n, -np.inf)
    cont[ii] = (up * v[2:] + dn * v[:-2]) / diag
    div = np.full(n, -np.inf)
    div[1:] = v[:-1] + h
    if with_issuance:
        hv, arg = impulse_all(y, v, p)
    else:
        hv, arg = np.full(n, -np.inf), np.full(n, -1)
    pi_full = np.zeros(n)
    pi_full[ii] = pi
    return cont, div, hv, arg, pi_full, (up, dn, diag)


def _select(y, v, cap, p, with_issuance):
    cont, div, hv, arg, pi, coef = _branch_roots(y, v, cap, p, with_issuance)
    n = len(y)
    reg = np.full(n, CONTINUATION)
    best = cont.copy()
    # ties resolve to the earlier branch in the order continuation > dividend > issuance
    m = div > best
    reg[m], best[m] = DIVIDEND, div[m]
    m = hv > best
    reg[m], best[m] = ISSUANCE, hv[m]
    reg[-1], best[-1] = DIVIDEND, div[-1]
    if with_issuance and hv[0] > 0.0:
        reg[0], best[0] = ISSUANCE, hv[0]
    else:
        reg[0], best[0] = BANKRUPT, 0.0
    return reg, pi, arg, best, coef


def _solve_policy(y, reg, arg, coef, p):
    n = len(y)
    h = np.diff(y)
    up, dn, diag = coef
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    idx = np.arange(n)

    def put(r, c, x):
        rows.append(r)
        cols.append(c)
        vals.append(x)

    inner = idx[1:-1]
    m = reg[1:-1] == CONTINUATION
    ci = inner[m]
    put(ci, ci, diag[m])
    put(ci, ci + 1, -up[m])
    put(ci, ci - 1, -dn[m])
    di = idx[1:][reg[1:] == DIVIDEND]
    put(di, di, np.ones(len(di)))
    put(di, di - 1, -np.ones(len(di)))
    rhs[di] = h[di - 1]
    ji = idx[reg == ISSUANCE]
    put(ji, ji, np.ones(len(ji)))
    put(ji, arg[ji], -np.ones(len(ji)))
    rhs[ji] = -issuance_cost(y[ji], y[arg[ji]], p)
    if reg[0] == BANKRUPT:
        put(np.array([0]), np.array([0]), np.array([1.0]))
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return spsolve(A.tocsc(), rhs)


def _howard(y, cap, p, with_issuance, tol, max_iter, v0=None):
    n = len(y)
    if v0 is None:
        v0 = y - 1.0
    v = v0.copy()
    for it in range(1, max_iter + 1):
        reg, pi, arg, _, coef = _select(y, v, cap, p, with_issuance)
        v_new = _solve_policy(y, reg, arg, coef, p)
        if not np.all(np.isfinite(v_new)):
            raise NoConvergence("singular policy system during Howard iteration")
        delta = np.max(np.abs(v_new - v))
        v = v_new
        if delta < tol:
            return v, it
    raise NoConvergence(f"Howard iteration did not converge in {max_iter} sweeps (last update {delta:.3g})")


def residuals(y, v, cap, p, with_issuance):
    """Per-branch VI residuals in value units (branch value minus its root)."""
    cont, div, hv, arg, pi, _ = _branch_roots(y, v, cap, p, with_issuance)
    r_cont = v - cont
    r_div = v - div
    r_imp = v - hv
    r_cont[[0, -1]] = np.inf
    n = len(y)
    total = np.minimum(np.minimum(r_cont, r_div), r_imp)
    bc = v[0] - (max(0.0, hv[0]) if with_issuance else 0.0)
    total[0] = bc
    total[-1] = r_div[-1]
    return {"continuation": r_cont, "dividend": r_div, "issuance": r_imp, "total": total, "pi": pi, "target": arg}


def _package(y, v, cap, p, reg, grid, with_issuance, it, tol):
    res = residuals(y, v, cap, p, with_issuance)
    regime, _, arg, _, _ = _select(y, v, cap, p, with_issuance)
    dp, dm, d2 = differences(y, v)
    # every node reports the HJB maximiser: the bank keeps investing on
    # dividend and issuance nodes between interventions
    return ValueFunction(
        y=y, v=v, dplus=dp, dminus=dm, d2=d2, pi_opt=np.clip(res["pi"], 0.0, cap), regime=regime,
        residual=res["total"], target=np.where(regime == ISSUANCE, arg, -1), with_issuance=with_issuance,
        params=p, reg=reg, grid=grid, iterations=it, tol=tol,
    )


def liquidation_value(p, reg, grid, with_issuance=True, tol=1e-9) -> ValueFunction:
    y = grid.nodes()
    v = y - 1.0
    return _package(y, v, pi_bar(y, reg), p, reg, grid, with_issuance, 0, tol)


def solve_vi(
    p: ModelParams,
    reg: RegulatoryParams,
    grid: GridSpec | None = None,
    with_issuance: bool = True,
    tol: float = 1e-9,
    max_iter: int = 500,
    allow_degenerate: bool = True,
) -> ValueFunction:
    grid = grid or GridSpec()
    rep = feasibility(p, reg)
    if not rep.feasible and not (allow_degenerate and rep.degenerate_liquidation):
        raise InfeasibleParameters(describe_violations(p, reg, rep))
    y_max = grid.y_max or AUTO_Y_MAX
    while True:
        y = grid.nodes(y_max)
        cap = pi_bar(y, reg)
        v, it = _howard(y, cap, p, with_issuance, tol, max_iter)
        vf = _package(y, v, cap, p, reg, replace(grid, y_max=y_max), with_issuance, it, tol)
        k = vf.barrier_index()
        if k < vf.n - 1 - EDGE_CELLS:
            log.debug("solved on [1, %g] in %d Howard steps", y_max, it)
            return vf
        if grid.y_max is not None:
            raise TruncationTooSmall(f"dividend barrier within {EDGE_CELLS} cells of y_max={y_max}")
        y_max = 1.0 + 2.0 * (y_max - 1.0)
        if y_max > 1e4:
            raise TruncationTooSmall("no dividend barrier found below y_max=1e4")


def residual_report(vf: ValueFunction) -> dict:
    """Recompute the VI at every node and report the worst violation per regime."""
    cap = pi_bar(vf.y, vf.reg)
    res = residuals(vf.y, vf.v, cap, vf.params, vf.with_issuance)
    total = np.abs(res["total"])
    # branches that should be non-negative everywhere
    neg = {k: float(max(0.0, -np.min(np.where(np.isfinite(res[k]), res[k], np.inf)))) for k in ("continuation", "dividend", "issuance")}
    regime, *_ = _select(vf.y, vf.v, cap, vf.params, vf.with_issuance)
    per_regime = {}
    for code, name in REGIME_NAMES.items():
        m = regime == code
        per_regime[name] = float(np.max(total[m])) if np.any(m) else 0.0
    return {"max": float(np.max(total)), "per_regime": per_regime, "negative_part": neg}
