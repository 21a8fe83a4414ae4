"""Single-run execution: config -> grid, material, context, solve, metrics."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..homogenization import build_context, build_grid, build_rhs
from ..homogenization.materials import DEFAULT_MATERIAL_RANK
from ..solvers import SolveReport, SolverConfig, pcg_full, rank_continuation, rel_error, solve
from ..tensors import TruncationPolicy
from .config import RunConfig


@dataclass
class ExperimentResult:
    config: RunConfig
    report: SolveReport
    metrics: dict = field(default_factory=dict)

    def summary(self):
        """JSON-ready dict: config echo plus derived metrics."""
        out = {"config": self.config.as_dict()}
        out.update(self.metrics)
        return out


def solver_config(config):
    return SolverConfig(method=config.solver, max_iter=config.max_iter,
                        residual_tol=config.tol, stagnation_window=config.stagnation_window,
                        rank_schedule=config.rank_schedule, error_target=config.error_target,
                        unsafe_lowrank_richardson=config.unsafe_richardson)


def _material_rank(config):
    """Rank of the material approximation shared by a low-rank run and its reference."""
    if config.material_rank is not None:
        return config.material_rank
    if config.material_spec().kind == "stochastic" and config.format != "full":
        return DEFAULT_MATERIAL_RANK
    return None


def reference_coefficient(config, n=None):
    """A_eff of a tight full-tensor CG solve on grid ``n`` (default: the run grid)."""
    grid = build_grid(config.dim, config.grid_n if n is None else n)
    ctx = build_context(grid, config.material_spec(), config.scheme, "full",
                        material_rank=_material_rank(config))
    rep = pcg_full(ctx, build_rhs(ctx),
                   SolverConfig(residual_tol=config.reference_tol, max_iter=10 * config.max_iter))
    return rep.a_eff


def build_run_context(config):
    grid = build_grid(config.dim, config.grid_n)
    policy = None
    if config.format != "full":
        policy = TruncationPolicy.fixed(config.rank or config.rank_schedule[0])
    return build_context(grid, config.material_spec(), config.scheme, config.format, policy,
                         material_rank=_material_rank(config))


def run_case(config: RunConfig, reference=None):
    """Execute one configured solve.

    ``reference`` (an A_eff value) overrides the reference solve requested by
    ``config.reference``; it is needed for relative errors and for rank
    continuation with an error target.
    """
    config.validate()
    ctx = build_run_context(config)
    cfg = solver_config(config)
    if reference is None and (config.reference or (config.rank_schedule and
                                                   config.error_target is not None)):
        reference = reference_coefficient(config)
    t0 = time.perf_counter()
    if config.rank_schedule:
        report = rank_continuation(ctx, None, cfg, reference=reference)
    else:
        report = solve(ctx, build_rhs(ctx), cfg)
    wall = time.perf_counter() - t0
    sol = report.solution
    metrics = {
        "a_eff": report.a_eff,
        "reference_a_eff": reference,
        "relative_error": None if reference is None else rel_error(report.a_eff, reference),
        "param_count": int(report.param_count),
        "ranks": list(sol.ranks),
        "stop_reason": report.stop_reason,
        "converged": bool(report.converged),
        "iterations": len(report.iterations),
        "initial_residual": report.initial_residual,
        "final_residual": report.final_residual,
        "achieving_rank": report.achieving_rank,
        "approximate_integration": config.approximate_integration,
        "norm_fallbacks": report.norm_fallbacks,
        "stages": report.stages,
        "wall_s": wall if config.timing else None,
    }
    for key in ("a_eff", "initial_residual", "final_residual"):
        if not np.isfinite(metrics[key]):
            raise FloatingPointError(f"{key} is not finite ({metrics[key]}); the solve diverged")
    return ExperimentResult(config, report, metrics)
