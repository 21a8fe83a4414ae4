"""Command-line front-end.

    fftlowrank run [--config FILE] [--dim 2 --grid-n 45 ...]
    fftlowrank replicate --family rank-table [--scale desk] [--out DIR]
"""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .experiments import FAMILIES, SCALES, replicate_experiment
from .outputs import to_json, write_outputs
from .runner import run_case

# flag -> config key
_RUN_FLAGS = {
    "--dim": ("dim", int), "--grid-n": ("grid_n", int), "--material": ("material", str),
    "--contrast": ("contrast", float), "--seed": ("seed", int), "--scheme": ("scheme", str),
    "--solver": ("solver", str), "--format": ("format", str), "--rank": ("rank", int),
    "--rank-schedule": ("rank_schedule", str), "--tol": ("tol", float),
    "--max-iter": ("max_iter", int), "--grid-multiplier": ("grid_multiplier", int),
    "--out": ("out", str), "--error-target": ("error_target", float),
    "--stagnation-window": ("stagnation_window", int),
    "--material-rank": ("material_rank", int),
}


def build_parser():
    p = argparse.ArgumentParser(prog="fftlowrank",
                                description="FFT-based homogenisation with low-rank tensors")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configured solve")
    run.add_argument("--config", help="flat key = value config file")
    for flag, (key, typ) in _RUN_FLAGS.items():
        run.add_argument(flag, dest=key, type=typ, default=None)
    run.add_argument("--anisotropic", dest="anisotropic", action="store_const", const=True,
                     default=None, help="add the constant anisotropic shift")
    run.add_argument("--reference", dest="reference", action="store_const", const=True,
                     default=None, help="also solve the full problem for the relative error")
    run.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                     default=None, help="omit wall times (bit-reproducible outputs)")

    rep = sub.add_parser("replicate", help="run an experiment family")
    rep.add_argument("--family", required=True, choices=FAMILIES)
    rep.add_argument("--scale", default="desk", choices=tuple(SCALES))
    rep.add_argument("--out", default="results")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            overrides = {k: getattr(args, k, None) for k, _ in _RUN_FLAGS.values()}
            for k in ("anisotropic", "reference", "timing"):
                overrides[k] = getattr(args, k)
            cfg = load_config(args.config, overrides)
            result = run_case(cfg)
            write_outputs([result], cfg.out)
            sys.stdout.write(to_json(result.summary()))
        else:
            fam = replicate_experiment(args.family, args.scale, args.out)
            for row in fam.rows:
                sys.stdout.write(" ".join(f"{k}={v}" for k, v in row.items()) + "\n")
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
