"""Iterative solvers for the preconditioned cell problem.

``pcg_full`` and ``richardson`` work on dense coefficient arrays,
``minres_truncated`` on low-rank tensors with a truncation after every
update.  ``rank_continuation`` drives ``minres_truncated`` through an
increasing rank schedule.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .homogenization.operators import (apply_full, apply_lowrank, build_rhs, check_zero_mean,
                                       effective_coefficient, matvec_error_bound,
                                       operator_norm_bound, spectrum_bounds)
from .tensors import FullTensor, TruncationPolicy, rank_one

METHODS = ("pcg", "richardson", "minres")
BREAKDOWN_TOL = 1e-300


class IndefiniteOperatorError(ArithmeticError):
    """Non-positive curvature in CG: the operator is not SPD, which signals a bug."""


class BreakdownError(ArithmeticError):
    """The minimal-residual step is undefined (residual in the operator kernel)."""


@dataclass(frozen=True)
class SolverConfig:
    method: str = "pcg"
    max_iter: int = 500
    residual_tol: float = 1e-8
    stagnation_window: int = 1
    policy: Optional[TruncationPolicy] = None
    rank_schedule: Tuple[int, ...] = ()
    error_target: Optional[float] = None
    unsafe_lowrank_richardson: bool = False
    core_norm: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown solver {self.method!r}")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iter < 0 or self.stagnation_window < 1:
            raise ValueError("max_iter must be >= 0 and stagnation_window >= 1")
        sched = tuple(int(r) for r in self.rank_schedule)
        if any(b <= a for a, b in zip(sched, sched[1:])) or any(r < 1 for r in sched):
            raise ValueError("rank schedule must be strictly increasing positive ranks")
        object.__setattr__(self, "rank_schedule", sched)


@dataclass
class IterationRecord:
    index: int
    residual_norm: float
    omega: float
    ranks: Tuple[int, ...]
    elapsed_s: float
    truncation_bound: float = 0.0
    perturbation_bound: float = 0.0


@dataclass
class SolveReport:
    method: str
    fmt: str
    iterations: List[IterationRecord] = field(default_factory=list)
    initial_residual: float = float("nan")
    converged: bool = False
    stop_reason: str = "max_iter"
    solution: object = None
    a_eff: float = float("nan")
    param_count: int = 0
    norm_fallbacks: int = 0
    achieving_rank: Optional[int] = None
    stages: list = field(default_factory=list)

    @property
    def residuals(self):
        return np.array([r.residual_norm for r in self.iterations])

    @property
    def final_residual(self):
        return self.iterations[-1].residual_norm if self.iterations else self.initial_residual

    def finish(self, ctx, u):
        self.solution = u
        self.a_eff = effective_coefficient(ctx, u)
        self.param_count = u.param_count()
        return self


class _Clock:
    def __init__(self):
        self.t0 = time.perf_counter()

    def __call__(self):
        return time.perf_counter() - self.t0


def _p_inner(p, x, y):
    return np.vdot(y, p * x).real


def pcg_full(ctx, rhs, cfg=SolverConfig(), x0=None, callback=None):
    """Conjugate gradients in the P-weighted inner product.

    The preconditioned operator is self-adjoint there, so CG applies
    without splitting the preconditioner.  Stops on the Euclidean residual.
    """
    b = np.asarray(rhs.data if isinstance(rhs, FullTensor) else rhs, dtype=complex)
    check_zero_mean(b, ctx.grid.center)
    P = ctx.precond.values
    report = SolveReport("pcg", "full")
    clock = _Clock()
    if x0 is None:
        u = np.zeros_like(b)
        z = b.copy()
    else:
        u = np.array(x0.data, dtype=complex)
        check_zero_mean(u, ctx.grid.center)
        z = b - apply_full(ctx, u)
    res = float(np.linalg.norm(z))
    report.initial_residual = res
    if res <= cfg.residual_tol:
        report.converged, report.stop_reason = True, "tolerance"
        return report.finish(ctx, FullTensor(u))
    p = z.copy()
    rho = _p_inner(P, z, z)
    for i in range(1, cfg.max_iter + 1):
        q = apply_full(ctx, p)
        curv = _p_inner(P, q, p)
        if not curv > 0:
            raise IndefiniteOperatorError(f"non-positive curvature {curv:.3e} at iteration {i}")
        alpha = rho / curv
        u += alpha * p
        z -= alpha * q
        rho_new = _p_inner(P, z, z)
        res = float(np.linalg.norm(z))
        report.iterations.append(IterationRecord(i, res, alpha, (), clock()))
        if callback is not None:
            callback(i, FullTensor(u), FullTensor(z))
        if res <= cfg.residual_tol:
            report.converged, report.stop_reason = True, "tolerance"
            break
        p = z + (rho_new / rho) * p
        rho = rho_new
    return report.finish(ctx, FullTensor(u))


def _norm(v, report, cfg):
    if v.format == "tucker" and cfg.core_norm:
        val, shortcut = v.norm_route()
        if not shortcut:
            report.norm_fallbacks += 1
        return val
    return v.norm()


def _zero(ctx):
    return rank_one([np.zeros(n, dtype=complex) for n in ctx.grid.shape], ctx.fmt)


def _residual_lowrank(ctx, rhs, u, bounds):
    cu = apply_lowrank(ctx, u, bounds)
    mv = matvec_error_bound(ctx, bounds)
    r, b = ctx.truncate_with_bound(rhs.combine(1.0, cu, -1.0))
    return r, mv + b


def richardson(ctx, rhs, cfg=SolverConfig(method="richardson"), x0=None, callback=None,
               omega=None):
    """Fixed-step iteration ``u <- u + omega (d - C u)``.

    The default step ``2/(lambda_min + lambda_max)`` comes from the a priori
    spectrum bounds.  Low-rank use requires ``cfg.unsafe_lowrank_richardson``
    because truncation can make the fixed-step iteration diverge.
    """
    omega = spectrum_bounds(ctx).omega if omega is None else float(omega)
    report = SolveReport("richardson", rhs.format)
    clock = _Clock()
    if rhs.format == "full":
        b = np.asarray(rhs.data, dtype=complex)
        check_zero_mean(b, ctx.grid.center)
        u = np.zeros_like(b) if x0 is None else np.array(x0.data, dtype=complex)
        r = b - apply_full(ctx, u)
        res = float(np.linalg.norm(r))
        report.initial_residual = res
        if res <= cfg.residual_tol:
            report.converged, report.stop_reason = True, "tolerance"
            return report.finish(ctx, FullTensor(u))
        for i in range(1, cfg.max_iter + 1):
            u = u + omega * r
            r = b - apply_full(ctx, u)
            res = float(np.linalg.norm(r))
            report.iterations.append(IterationRecord(i, res, omega, (), clock()))
            if callback is not None:
                callback(i, FullTensor(u), FullTensor(r))
            if res <= cfg.residual_tol:
                report.converged, report.stop_reason = True, "tolerance"
                break
        return report.finish(ctx, FullTensor(u))

    if not cfg.unsafe_lowrank_richardson:
        raise ValueError("Richardson on truncated low-rank tensors may diverge; "
                         "set unsafe_lowrank_richardson to run it anyway")
    u = _zero(ctx) if x0 is None else x0
    r, _ = _residual_lowrank(ctx, rhs, u, [])
    report.initial_residual = _norm(r, report, cfg)
    if report.initial_residual <= cfg.residual_tol:
        report.converged, report.stop_reason = True, "tolerance"
        return report.finish(ctx, u)
    for i in range(1, cfg.max_iter + 1):
        u, bu = ctx.truncate_with_bound(u.combine(1.0, r, omega))
        r, _ = _residual_lowrank(ctx, rhs, u, [])
        res = _norm(r, report, cfg)
        report.iterations.append(IterationRecord(i, res, omega, tuple(u.ranks), clock(), bu))
        if callback is not None:
            callback(i, u, r)
        if not np.isfinite(res):
            report.stop_reason = "diverged"
            break
        if res <= cfg.residual_tol:
            report.converged, report.stop_reason = True, "tolerance"
            break
    return report.finish(ctx, u)


def minres_truncated(ctx, rhs, cfg=SolverConfig(method="minres"), x0=None, callback=None):
    """Minimal-residual iteration with truncation after every update.

    Per step: ``r = T[d - C~u]``, ``omega = Re<C~r, r> / |C~r|^2`` and
    ``u <- T[u + omega r]`` where ``C~`` is the matvec with its three
    truncations.  Stops on the residual tolerance, on stagnation (no
    improvement on the best residual for ``stagnation_window`` steps; the
    best iterate is returned) or after ``max_iter`` steps.

    Each record carries the iterate truncation bound and a bound on how much
    all truncations of that step can raise the residual above its previous
    value.
    """
    if ctx.policy is None and rhs.format != "full":
        raise ValueError("minres_truncated needs a truncation policy on the context")
    report = SolveReport("minres", rhs.format)
    clock = _Clock()
    cnorm = operator_norm_bound(ctx)
    rhs = ctx.truncate(rhs)
    if x0 is None:
        u = _zero(ctx)
        r, err_r = rhs, 0.0
    else:
        u = ctx.truncate(x0)
        r, err_r = _residual_lowrank(ctx, rhs, u, [])
    res = _norm(r, report, cfg)
    report.initial_residual = res
    best, best_u, since = res, u, 0
    if res <= cfg.residual_tol:
        report.converged, report.stop_reason = True, "tolerance"
        return report.finish(ctx, u)
    for i in range(1, cfg.max_iter + 1):
        mv_bounds = []
        cr = apply_lowrank(ctx, r, mv_bounds)
        den = cr.norm() ** 2
        if not den > BREAKDOWN_TOL:
            raise BreakdownError(f"step-size denominator {den:.3e} at iteration {i}")
        omega = float(cr.inner(r).real / den)
        u, bu = ctx.truncate_with_bound(u.combine(1.0, r, omega))
        r, err_new = _residual_lowrank(ctx, rhs, u, [])
        res = _norm(r, report, cfg)
        pert = cnorm * bu + abs(omega) * matvec_error_bound(ctx, mv_bounds) + err_r + err_new
        err_r = err_new
        report.iterations.append(
            IterationRecord(i, res, omega, tuple(u.ranks), clock(), bu, pert))
        if callback is not None:
            callback(i, u, r)
        if res <= cfg.residual_tol:
            report.converged, report.stop_reason = True, "tolerance"
            best_u = u
            break
        if res < best:
            best, best_u, since = res, u, 0
        else:
            since += 1
            if since >= cfg.stagnation_window:
                report.stop_reason = "stagnation"
                break
    return report.finish(ctx, best_u)


def rel_error(a_approx, a_ref):
    """``(A_approx - A_ref) / A_ref``; non-negative for Ga low-rank solutions."""
    return (a_approx - a_ref) / a_ref


def rank_continuation(ctx, rhs, cfg, reference=None):
    """Run ``minres_truncated`` over ``cfg.rank_schedule``, warm-starting each stage.

    A stage meets the target when ``rel_error(A_eff, reference) <=
    cfg.error_target`` (if both are given) or when it converged on the
    residual tolerance otherwise.  With ``rhs=None`` the right-hand side is
    rebuilt at each stage rank; a supplied ``rhs`` should carry more rank
    than the schedule needs since it is only truncated.
    """
    if not cfg.rank_schedule:
        raise ValueError("rank_continuation needs a non-empty rank schedule")
    use_error = reference is not None and cfg.error_target is not None
    report = SolveReport("minres", ctx.fmt)
    x0 = None
    for rank in cfg.rank_schedule:
        base = ctx.policy or TruncationPolicy.fixed(rank)
        policy = replace(base, mode="rank", rank=rank, tol=None)
        stage_ctx = ctx.with_policy(policy)
        stage_rhs = build_rhs(stage_ctx) if rhs is None else stage_ctx.truncate(rhs)
        stage = minres_truncated(stage_ctx, stage_rhs, cfg, x0=x0)
        err = rel_error(stage.a_eff, reference) if reference is not None else None
        met = err <= cfg.error_target if use_error else stage.converged
        report.stages.append({"rank": rank, "a_eff": stage.a_eff, "rel_error": err,
                              "iterations": len(stage.iterations),
                              "final_residual": stage.final_residual,
                              "stop_reason": stage.stop_reason, "met": bool(met)})
        report.iterations.extend(stage.iterations)
        report.norm_fallbacks += stage.norm_fallbacks
        if np.isnan(report.initial_residual):
            report.initial_residual = stage.initial_residual
        x0 = stage.solution
        report.solution, report.a_eff, report.param_count = x0, stage.a_eff, stage.param_count
        if met:
            report.converged, report.achieving_rank = True, rank
            report.stop_reason = "tolerance"
            return report
    report.converged = False
    report.stop_reason = "max_iter"
    return report


def solve(ctx, rhs, cfg):
    """Dispatch on ``cfg.method``."""
    if cfg.method == "pcg":
        if rhs.format != "full":
            raise ValueError("pcg runs on full tensors; use minres for low-rank formats")
        return pcg_full(ctx, rhs, cfg)
    if cfg.method == "richardson":
        return richardson(ctx, rhs, cfg)
    if cfg.rank_schedule:
        return rank_continuation(ctx, None, cfg)
    return minres_truncated(ctx, rhs, cfg)
