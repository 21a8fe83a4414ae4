"""Experiment families reproduced at desk scale.

``residuum``       residual histories of truncated minres per format and rank
``error-vs-rank``  relative error of low-rank A_eff against the full solve
``rank-table``     smallest rank whose low-rank solution on the grid alpha*N
                   is as accurate as the full solution on N
``scaling``        wall time and parameter count against N
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..solvers import rel_error
from .config import RunConfig
from .outputs import write_outputs
from .runner import reference_coefficient, run_case

FAMILIES = ("residuum", "error-vs-rank", "rank-table", "scaling")

SCALES = {
    "desk": {
        "residuum": {2: 135, 3: 15},
        "residuum_ranks": (1, 3, 5, 10),
        "error_vs_rank": {2: 135, 3: 15},
        "error_ranks": {2: tuple(range(1, 11)), 3: tuple(range(1, 7))},
        "rank_table": {2: 45, 3: 15},
        "rank_schedule": (1, 3, 5, 7),
        "scaling": {2: (45, 135, 405), 3: (5, 15, 45)},
        "scaling_rank": 5,
        "scaling_iters": 10,
    },
    "smoke": {
        "residuum": {2: 15, 3: 5},
        "residuum_ranks": (1, 3),
        "error_vs_rank": {2: 15, 3: 5},
        "error_ranks": {2: (1, 2, 3), 3: (1, 2)},
        "rank_table": {2: 5},
        "rank_schedule": (1, 3, 5, 7),
        "scaling": {2: (5, 15), 3: (5,)},
        "scaling_rank": 3,
        "scaling_iters": 3,
    },
}

SWEEP_COLUMNS = {
    "residuum": ["d", "N", "scheme", "format", "rank", "iterations", "initial_residual",
                 "best_residual", "final_residual", "stop_reason", "a_eff"],
    "error-vs-rank": ["d", "N", "scheme", "material", "format", "rank", "a_eff",
                      "reference_a_eff", "rel_error", "iterations", "final_residual"],
    "rank-table": ["d", "N", "N_full", "anisotropic", "format", "rank", "target_error",
                   "rel_error", "full_a_eff", "reference_a_eff", "stage_errors"],
    "scaling": ["d", "N", "scheme", "format", "rank", "wall_s", "iterations", "param_count",
                "param_formula"],
}


@dataclass
class FamilyResult:
    family: str
    results: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def columns(self):
        return SWEEP_COLUMNS[self.family]

    def write(self, out_dir):
        return write_outputs(self.results, out_dir, self.family, self.rows, self.columns,
                             self.series)


def table3_param_count(fmt, d, n, r):
    """Storage of a uniform-rank tensor in each format."""
    if fmt == "full":
        return n ** d
    if fmt == "cp":
        return d * n * r
    if fmt == "tucker":
        return d * n * r + r ** d
    if fmt == "tt":
        return 2 * n * r + (d - 2) * n * r * r
    raise ValueError(fmt)


def _formats(d):
    return ("cp", "tucker", "tt") if d == 2 else ("tucker", "tt")


def _best(report):
    return min([report.initial_residual] + [r.residual_norm for r in report.iterations])


def residuum(scale="desk"):
    s = SCALES[scale]
    out = FamilyResult("residuum")
    hist = []
    for d, n in s["residuum"].items():
        base = RunConfig(dim=d, grid_n=n, scheme="gani", max_iter=200, tol=1e-10)
        cases = [base.replace(solver="pcg", label=f"residuum_{d}d_N{n}_full")]
        cases += [base.replace(solver="minres", format=f, rank=r,
                               label=f"residuum_{d}d_N{n}_{f}_r{r}")
                  for f in _formats(d) for r in s["residuum_ranks"]]
        for cfg in cases:
            res = run_case(cfg)
            rep = res.report
            rank = cfg.rank or 0
            out.results.append(res)
            out.rows.append({"d": d, "N": n, "scheme": cfg.scheme, "format": cfg.format,
                             "rank": rank, "iterations": len(rep.iterations),
                             "initial_residual": rep.initial_residual,
                             "best_residual": _best(rep), "final_residual": rep.final_residual,
                             "stop_reason": rep.stop_reason, "a_eff": rep.a_eff})
            hist.append({"d": d, "N": n, "format": cfg.format, "rank": rank, "iter": 0,
                         "residual_norm": rep.initial_residual})
            hist += [{"d": d, "N": n, "format": cfg.format, "rank": rank, "iter": it.index,
                      "residual_norm": it.residual_norm} for it in rep.iterations]
    out.series["residuum_history"] = (hist, ["d", "N", "format", "rank", "iter",
                                             "residual_norm"])
    return out


def error_vs_rank(scale="desk"):
    """Rank continuation with warm starts; one row per stage."""
    s = SCALES[scale]
    out = FamilyResult("error-vs-rank")
    for d, n in s["error_vs_rank"].items():
        ranks = s["error_ranks"][d]
        for scheme in ("ga", "gani"):
            for material in ("square", "stochastic"):
                if d == 3 and material == "stochastic":
                    continue
                base = RunConfig(dim=d, grid_n=n, scheme=scheme, material=material,
                                 solver="minres", tol=1e-10, max_iter=200)
                fmt = "tt"
                cfg = base.replace(format=fmt, rank_schedule=ranks, error_target=-1.0,
                                   label=f"error_{d}d_N{n}_{scheme}_{material}_{fmt}")
                ref = reference_coefficient(cfg)
                res = run_case(cfg, reference=ref)
                out.results.append(res)
                for st in res.report.stages:
                    out.rows.append({"d": d, "N": n, "scheme": scheme, "material": material,
                                     "format": fmt, "rank": st["rank"], "a_eff": st["a_eff"],
                                     "reference_a_eff": ref, "rel_error": st["rel_error"],
                                     "iterations": st["iterations"],
                                     "final_residual": st["final_residual"]})
    return out


def rank_table(scale="desk"):
    """Achieving rank: full Ga solve on N (CG tol 1e-6) versus low-rank on alpha*N."""
    s = SCALES[scale]
    out = FamilyResult("rank-table")
    for d, n in s["rank_table"].items():
        for aniso in (False, True):
            full_cfg = RunConfig(dim=d, grid_n=n, scheme="ga", anisotropic=aniso, solver="pcg",
                                 tol=1e-6, label=f"ranktable_{d}d_N{n}_aniso{int(aniso)}_full")
            full = run_case(full_cfg)
            out.results.append(full)
            big = n * full_cfg.grid_multiplier
            ref = reference_coefficient(full_cfg.replace(grid_n=big))
            target = rel_error(full.report.a_eff, ref)
            for fmt in _formats(d):
                cfg = full_cfg.replace(grid_n=big, solver="minres", format=fmt, tol=1e-10,
                                       rank_schedule=s["rank_schedule"], error_target=target,
                                       label=f"ranktable_{d}d_N{big}_aniso{int(aniso)}_{fmt}")
                res = run_case(cfg, reference=ref)
                out.results.append(res)
                stages = res.report.stages
                out.rows.append({"d": d, "N": big, "N_full": n, "anisotropic": aniso,
                                 "format": fmt, "rank": res.report.achieving_rank or 0,
                                 "target_error": target, "rel_error": stages[-1]["rel_error"],
                                 "full_a_eff": full.report.a_eff, "reference_a_eff": ref,
                                 "stage_errors": [st["rel_error"] for st in stages]})
    return out


def _timed(cfg):
    """Warm-up run excluded; the second run is timed."""
    run_case(cfg)
    t0 = time.perf_counter()
    res = run_case(cfg)
    return res, time.perf_counter() - t0


def scaling(scale="desk", schemes=("gani", "ga")):
    """Time per solve against N.

    Full: CG to tolerance 1e-6.  Low-rank: a fixed budget of minres steps
    (stagnation disabled) so that the timing compares equal work per N.
    """
    s = SCALES[scale]
    r, iters = s["scaling_rank"], s["scaling_iters"]
    out = FamilyResult("scaling")
    for d, sizes in s["scaling"].items():
        for scheme in schemes:
            for n in sizes:
                base = RunConfig(dim=d, grid_n=n, scheme=scheme)
                cases = [base.replace(solver="pcg", tol=1e-6,
                                      label=f"scaling_{d}d_N{n}_{scheme}_full")]
                cases += [base.replace(solver="minres", format=f, rank=r, max_iter=iters,
                                       stagnation_window=iters, tol=1e-14,
                                       label=f"scaling_{d}d_N{n}_{scheme}_{f}_r{r}")
                          for f in _formats(d)]
                for cfg in cases:
                    res, wall = _timed(cfg)
                    out.results.append(res)
                    rank = cfg.rank or 0
                    ranks = res.metrics["ranks"]
                    uniform = max(ranks, default=0)
                    out.rows.append({"d": d, "N": n, "scheme": scheme, "format": cfg.format,
                                     "rank": rank, "wall_s": wall,
                                     "iterations": len(res.report.iterations),
                                     "param_count": res.metrics["param_count"],
                                     "param_formula": table3_param_count(cfg.format, d, n,
                                                                         uniform)})
    return out


_RUNNERS = {"residuum": residuum, "error-vs-rank": error_vs_rank, "rank-table": rank_table,
            "scaling": scaling}


def replicate_experiment(family, scale="desk", out_dir=None):
    """Run one experiment family; write its files when ``out_dir`` is given."""
    if family not in _RUNNERS:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; choose from {tuple(SCALES)}")
    result = _RUNNERS[family](scale)
    if out_dir is not None:
        result.write(out_dir)
    return result
