"""Run configuration: a flat ``key = value`` file plus command-line overrides."""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple

from ..homogenization.materials import MaterialSpec
from ..tensors import FORMATS

SCHEMES = ("ga", "gani")
SOLVERS = ("pcg", "richardson", "minres")
_SECTION = "run"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dim: int = 2
    grid_n: int = 15
    material: str = "square"
    contrast: float = 10.0
    threshold: float = 0.3
    value: float = 1.0
    anisotropic: bool = False
    seed: int = 0
    n_modes: Optional[int] = None
    material_rank: Optional[int] = None
    scheme: str = "ga"
    solver: str = "pcg"
    format: str = "full"
    rank: Optional[int] = None
    rank_schedule: Tuple[int, ...] = ()
    tol: float = 1e-8
    max_iter: int = 500
    stagnation_window: int = 1
    error_target: Optional[float] = None
    reference: bool = False
    reference_tol: float = 1e-10
    grid_multiplier: int = 3
    unsafe_richardson: bool = False
    timing: bool = True
    out: str = "results"
    label: str = ""

    def __post_init__(self):
        try:
            self.material_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        sched = tuple(int(r) for r in self.rank_schedule)
        object.__setattr__(self, "rank_schedule", sched)
        self.validate()

    def validate(self):
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if self.grid_n < 1 or self.grid_n % 2 == 0:
            raise ConfigError(f"grid_n must be odd, got {self.grid_n}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.format == "cp" and self.dim != 2:
            raise ConfigError("cp format is only supported for dim=2")
        if self.solver == "pcg" and self.format != "full":
            raise ConfigError("pcg runs on full tensors; use solver=minres for low-rank formats")
        lowrank = self.format != "full"
        if lowrank and self.rank is None and not self.rank_schedule:
            raise ConfigError("low-rank formats need rank or rank_schedule")
        if self.rank is not None and self.rank < 1:
            raise ConfigError("rank must be >= 1")
        if self.rank_schedule:
            if self.solver != "minres" or not lowrank:
                raise ConfigError("rank_schedule needs solver=minres and a low-rank format")
            s = self.rank_schedule
            if any(b <= a for a, b in zip(s, s[1:])) or s[0] < 1:
                raise ConfigError("rank_schedule must be strictly increasing positive ranks")
        if self.solver == "richardson" and lowrank and not self.unsafe_richardson:
            raise ConfigError("richardson on low-rank tensors needs unsafe_richardson = true")
        if not self.tol > 0 or not self.reference_tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.max_iter < 0 or self.stagnation_window < 1 or self.grid_multiplier < 1:
            raise ConfigError("max_iter >= 0, stagnation_window >= 1, grid_multiplier >= 1")

    def material_spec(self):
        return MaterialSpec(kind=self.material, contrast=self.contrast,
                            threshold=self.threshold, value=self.value, seed=self.seed,
                            n_modes=self.n_modes, anisotropic=self.anisotropic)

    @property
    def approximate_integration(self):
        """Ga with a non-polynomial material uses quadrature for its coefficients."""
        return self.scheme == "ga" and self.material_spec().kind == "stochastic"

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        out = dataclasses.asdict(self)
        out["rank_schedule"] = list(self.rank_schedule)
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _truthy(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_value(key, text):
    """Convert one textual value to the type of ``RunConfig.<key>``."""
    key = key.replace("-", "_")
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    default = _FIELDS[key].default
    text = str(text).strip()
    if key == "rank_schedule":
        parts = [p for p in text.replace(",", " ").split() if p]
        try:
            return tuple(int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"rank_schedule must list integers, got {text!r}") from None
    if text.lower() in ("none", "") and key in ("n_modes", "material_rank", "rank", "error_target"):
        return None
    try:
        if isinstance(default, bool):
            return _truthy(text)
        if isinstance(default, int) or key in ("n_modes", "material_rank", "rank"):
            return int(text)
        if isinstance(default, float) or key == "error_target":
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None
    return text


def parse_config_text(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    return {k.replace("-", "_"): parse_value(k, v) for k, v in parser[_SECTION].items()}


def load_config(path=None, overrides=None):
    """Build a :class:`RunConfig` from an optional file and a dict of overrides."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k.replace("-", "_")] = v if not isinstance(v, str) else parse_value(k, v)
    return RunConfig(**values)


def dump_config(cfg):
    """Inverse of :func:`parse_config_text` (one ``key = value`` per line)."""
    lines = []
    for k, v in cfg.as_dict().items():
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, float):
            v = "%.17g" % v
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


__all__ = ["ConfigError", "RunConfig", "dump_config", "load_config", "parse_config_text",
           "parse_value"]
