"""Flat ``key = value`` experiment configuration.

Keys are ``<group>.<field>``; ``#`` starts a comment. Example::

    # brighter target, longer curriculum
    reward.target = 0.45
    curriculum.t_easy = 30000
    sac.hidden = 256, 256

Groups: env, camera, reward, action, sac, curriculum, baseline, eval and
bounds. Tuple values are comma-separated. ``dump_config`` writes every key
with its current value, so ``dump_config(ExperimentConfig())`` is the full
reference of defaults. The ``bounds`` group documents the fixed sensor and
illuminance limits; it is accepted only with the built-in values.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields, replace
from typing import Dict, Tuple

from .baselines import DEADBAND, KAPPA, SETPOINT
from .camsim.env import EnvConfig
from .camsim.sensor import GAIN_MAX_DB, GAIN_MIN_DB, L_MAX, L_MIN, T_MAX_MS, T_MIN_MS
from .harness.metrics import DEFAULT_EPSILON
from .sac.agent import SacConfig
from .sac.curriculum import CurriculumSchedule

_SECTION = "expolab"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    setpoint: float = SETPOINT
    kappa: float = KAPPA
    deadband: float = DEADBAND
    nm_budget: int = 200
    nm_tol: float = 1e-3


@dataclass(frozen=True)
class EvalConfig:
    epsilon: float = DEFAULT_EPSILON
    validation_seed: int = 7_000_001


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    sac: SacConfig = field(default_factory=SacConfig)
    curriculum: CurriculumSchedule = field(default_factory=CurriculumSchedule)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


FIXED_BOUNDS: Dict[str, float] = {
    "exposure_min_ms": T_MIN_MS, "exposure_max_ms": T_MAX_MS,
    "gain_min_db": GAIN_MIN_DB, "gain_max_db": GAIN_MAX_DB,
    "illuminance_min": L_MIN, "illuminance_max": L_MAX,
}

# group name -> path of attribute names from ExperimentConfig
_GROUPS: Dict[str, Tuple[str, ...]] = {
    "env": ("env",), "camera": ("env", "camera"), "reward": ("env", "reward"),
    "action": ("env", "action"), "sac": ("sac",), "curriculum": ("curriculum",),
    "baseline": ("baseline",), "eval": ("eval",),
}


def _get(obj, path):
    for name in path:
        obj = getattr(obj, name)
    return obj


def _set(obj, path, value):
    if len(path) == 1:
        return replace(obj, **{path[0]: value})
    return replace(obj, **{path[0]: _set(getattr(obj, path[0]), path[1:], value)})


def _coerce(text: str, current, key: str):
    text = text.strip()
    try:
        if isinstance(current, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
        if isinstance(current, tuple):
            kind = type(current[0]) if current else float
            return tuple(kind(t) for t in text.split(",") if t.strip())
        return text
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {type(current).__name__}") from None


def _scalar_fields(obj):
    return [f.name for f in fields(obj) if not dataclasses.is_dataclass(getattr(obj, f.name))]


def loads_config(text: str, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg = base
    for key, raw in parser[_SECTION].items():
        group, _, name = key.partition(".")
        if group == "bounds":
            if name not in FIXED_BOUNDS:
                raise ConfigError(f"unknown key {key!r}")
            if _coerce(raw, 0.0, key) != FIXED_BOUNDS[name]:
                raise ConfigError(f"{key} is fixed at {FIXED_BOUNDS[name]!r}")
            continue
        if group not in _GROUPS:
            raise ConfigError(f"unknown key {key!r}")
        path = _GROUPS[group]
        target = _get(cfg, path)
        if name not in _scalar_fields(target):
            raise ConfigError(f"unknown key {key!r}")
        try:
            cfg = _set(cfg, path + (name,), _coerce(raw, getattr(target, name), key))
        except ConfigError:
            raise
        except ValueError as exc:  # dataclass validation
            raise ConfigError(f"{key}: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return loads_config(fh.read())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def dump_config(cfg: ExperimentConfig = ExperimentConfig()) -> str:
    lines = []
    for group, path in _GROUPS.items():
        obj = _get(cfg, path)
        lines.append(f"# {group}")
        lines.extend(f"{group}.{name} = {_fmt(getattr(obj, name))}" for name in _scalar_fields(obj))
        lines.append("")
    lines.append("# bounds (fixed)")
    lines.extend(f"bounds.{k} = {_fmt(v)}" for k, v in FIXED_BOUNDS.items())
    return "\n".join(lines) + "\n"
