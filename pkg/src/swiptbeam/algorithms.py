"""Successive-SOCP ascent loops for the two harvesting objectives.

Each outer iteration linearizes the nonconcave harvesting terms at the
current iterate (a global concave minorant, tight there), solves the
resulting SOCP, and moves to its solution. Because the previous iterate is
feasible for every inner program, the true objective never decreases; the
loop stops on relative objective stall or an iteration cap.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .builder import (
    build_init_program,
    build_max_min_program,
    build_sum_eh_program,
    phase_align,
)
from .ipm import SolverStatus, solve
from .network import DesignPoint, NetworkInstance
from .surrogate import ALPHA_MAX, ALPHA_MIN, ExpansionPoint, clamp_alpha


class InfeasibleError(RuntimeError):
    """The SINR targets cannot be met within the power budget."""


class NumericalError(RuntimeError):
    """The inner solver failed in a way that is not an infeasibility proof."""


@dataclass(frozen=True)
class AlgoConfig:
    tol_converge: float = 1e-4        # relative objective change
    max_outer_iters: int = 50
    alpha_bounds: tuple[float, float] = (ALPHA_MIN, ALPHA_MAX)
    tol_solve: float = 1e-8
    max_solver_iters: int = 200

    def __post_init__(self):
        if self.tol_converge <= 0:
            raise ValueError("tol_converge must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")


@dataclass(frozen=True)
class IterateRecord:
    objective: float          # true objective at the new iterate
    surrogate_value: float    # inner program optimum (minorant at new iterate)
    expansion_value: float    # true objective at the expansion point
    worst_residual: float     # most violated constraint, normalized (>= -tol ok)
    step_norm: float
    solver_status: str
    solver_iterations: int
    wall_ms: float


@dataclass
class IterateTrace:
    records: list[IterateRecord] = field(default_factory=list)
    converged: bool = False
    degraded: bool = False
    hit_iteration_cap: bool = False
    initial_objective: float = np.nan

    @property
    def objectives(self) -> np.ndarray:
        return np.array([self.initial_objective] + [r.objective for r in self.records])

    @property
    def outer_iterations(self) -> int:
        return len(self.records)

    @property
    def total_solver_iterations(self) -> int:
        return sum(r.solver_iterations for r in self.records)

    def is_monotone(self, slack: float) -> bool:
        objs = self.objectives
        return bool(np.all(np.diff(objs) >= -slack))


def _solve_with_retry(prog, cfg: AlgoConfig):
    """Solve an inner program, loosening the tolerance on stalls.

    Stalls show up as MaxIters or a numerical failure within a factor of the
    target tolerance; a Monte-Carlo sweep must ride over them rather than
    abort, so retry at 10x and 100x before giving up.
    """
    res = solve(prog, tol_solve=cfg.tol_solve, max_iters=cfg.max_solver_iters)
    for factor in (10.0, 100.0):
        if res.status in (SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE,
                          SolverStatus.UNBOUNDED):
            break
        res = solve(prog, tol_solve=factor * cfg.tol_solve,
                    max_iters=cfg.max_solver_iters)
    return res


def initialize(inst: NetworkInstance, cfg: AlgoConfig | None = None,
               initial_alpha=None) -> DesignPoint:
    """Find a feasible design via the minimum-power SOCP.

    Raises InfeasibleError when the thresholds are unattainable (certified
    by the solver, or minimum power above the budget); NumericalError when
    the solver fails without a certificate. ``initial_alpha`` pins the SS
    ratios instead of letting the program choose them.
    """
    cfg = cfg or AlgoConfig()
    bounds = cfg.alpha_bounds
    if initial_alpha is not None:
        a0 = np.broadcast_to(np.asarray(initial_alpha, dtype=float), (inst.n_eh,))
        bounds = (a0, a0)
    prog, layout = build_init_program(inst, alpha_bounds=bounds)
    res = _solve_with_retry(prog, cfg)
    if res.status is SolverStatus.INFEASIBLE:
        raise InfeasibleError("SINR constraints are infeasible at any power")
    if res.status in (SolverStatus.NUMERICAL_FAILURE, SolverStatus.UNBOUNDED) or res.x is None:
        raise NumericalError(f"initialization solve failed: {res.status.value}")
    point = layout.unpack(res.x)
    min_power = point.total_power()
    budget = inst.power_budget
    if min_power > budget * (1.0 + 1e-7):
        raise InfeasibleError(
            f"minimum power {min_power:.6g} exceeds budget {budget:.6g}"
        )
    point = DesignPoint(w=phase_align(inst, point.w), alpha=point.alpha, t=point.t)
    return _repair_split_ratios(inst, point)


def _repair_split_ratios(inst: NetworkInstance, point: DesignPoint) -> DesignPoint:
    """Restore splitting-user decoder margins exactly, in closed form.

    The decoder constraint is far more sensitive to alpha than the solver's
    residual (the circuit-noise term carries a 1/alpha^2), so a converged
    inner solution can sit a hair below threshold. Raising alpha to the
    exact boundary costs O(solver tolerance) harvested power and never
    breaks any other constraint.
    """
    powers = inst.received_powers(point)
    alpha = point.alpha.copy()
    changed = False
    for n1 in range(inst.n_eh):
        signal = powers[n1, n1]
        interference = powers[n1].sum() - signal
        budget = signal / inst.gamma_min[n1] - interference - inst.sigma_a_sq
        if budget <= 0:
            continue  # not repairable through the split ratio
        needed = np.sqrt(inst.sigma_c_sq / budget) if inst.sigma_c_sq > 0 else 0.0
        if alpha[n1] < needed < 1.0:
            alpha[n1] = needed
            changed = True
    if not changed:
        return point
    return DesignPoint(w=point.w, alpha=alpha, t=np.maximum(point.t, 1.0 / alpha))


def _ascend(inst: NetworkInstance, cfg: AlgoConfig, objective_fn, build_fn,
            alpha_bounds, initial_alpha):
    point = initialize(inst, cfg, initial_alpha=initial_alpha)
    trace = IterateTrace(initial_objective=objective_fn(point))
    obj = trace.initial_objective
    prev_x = None
    for _ in range(cfg.max_outer_iters):
        t0 = time.perf_counter()
        alpha_k = clamp_alpha(point.alpha, *_bounds_lo_hi(alpha_bounds))
        w_k = phase_align(inst, point.w)
        exp = ExpansionPoint.at(inst, w_k, alpha_k)
        expansion_value = objective_fn(DesignPoint(w=w_k, alpha=alpha_k))
        prog, layout = build_fn(exp, inst, alpha_bounds=alpha_bounds)
        res = _solve_with_retry(prog, cfg)
        if res.status is not SolverStatus.OPTIMAL or res.x is None:
            trace.degraded = True
            break
        new_point = _repair_split_ratios(inst, layout.unpack(res.x))
        new_obj = objective_fn(new_point)
        report = inst.constraint_residuals(new_point)
        worst = min(report.power / inst.power_budget,
                    float((report.sinr / inst.gamma_min).min()))
        if new_obj < obj or worst < -1e-6:
            # ascent and feasibility are guaranteed up to inner-solver
            # accuracy; falling below either floor means the loop is
            # grinding on numerics, so keep the incumbent
            if new_obj >= obj - cfg.tol_converge * max(abs(obj), 1e-30):
                trace.converged = True
            else:
                trace.degraded = True
            break
        x_now = layout.pack(new_point)
        step = np.linalg.norm(x_now - prev_x) if prev_x is not None else np.nan
        prev_x = x_now
        trace.records.append(IterateRecord(
            objective=new_obj,
            surrogate_value=res.objective,
            expansion_value=expansion_value,
            worst_residual=worst,
            step_norm=float(step),
            solver_status=res.status.value,
            solver_iterations=res.iterations,
            wall_ms=1e3 * (time.perf_counter() - t0),
        ))
        point = new_point
        if abs(new_obj - obj) <= cfg.tol_converge * max(abs(obj), 1e-30):
            trace.converged = True
            obj = new_obj
            break
        obj = new_obj
    else:
        trace.hit_iteration_cap = True
    return point, trace


def _bounds_lo_hi(alpha_bounds):
    if alpha_bounds is None:
        return ALPHA_MIN, ALPHA_MAX
    return alpha_bounds


def maximize_sum_eh(inst: NetworkInstance, cfg: AlgoConfig | None = None, *,
                    alpha_bounds=None, initial_alpha=None):
    """Ascent on the total harvested power; returns (point, trace).

    ``alpha_bounds`` restricts the SS box (lo == hi freezes the ratios);
    ``initial_alpha`` only pins the feasibility initialization.
    """
    cfg = cfg or AlgoConfig()
    if inst.n_eh < 1:
        raise ValueError("sum-EH objective needs at least one splitting user")
    bounds = alpha_bounds if alpha_bounds is not None else cfg.alpha_bounds
    return _ascend(inst, cfg, inst.sum_eh, build_sum_eh_program, bounds, initial_alpha)


def maximize_min_eh(inst: NetworkInstance, cfg: AlgoConfig | None = None, *,
                    alpha_bounds=None, initial_alpha=None):
    """Ascent on the worst-user harvested power; returns (point, trace)."""
    cfg = cfg or AlgoConfig()
    if inst.n_eh < 1:
        raise ValueError("max-min objective needs at least one splitting user")
    bounds = alpha_bounds if alpha_bounds is not None else cfg.alpha_bounds
    return _ascend(inst, cfg, inst.min_eh, build_max_min_program, bounds, initial_alpha)
