"""Scripted lighting scenarios and the per-difficulty scenario sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sensor import L_MAX, L_MIN

EPISODE_LENGTH = 200
KINDS = ("constant", "step", "linear_ramp", "sinusoid")
LEVELS = ("easy", "normal", "hard")

EASY_RANGE = (0.5, 5.0)
NORMAL_DARK_RANGE = (0.01, 0.5)
NORMAL_BRIGHT_RANGE = (5.0, 100.0)
HARD_LOW_RANGE = (0.02, 5.0)
HARD_RATIO_RANGE = (10.0, 100.0)


@dataclass(frozen=True)
class LightingScenario:
    kind: str
    level_start: float
    level_end: float
    change_step: int = 0
    period: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        for lv in (self.level_start, self.level_end):
            if not L_MIN <= lv <= L_MAX:
                raise ValueError(f"level {lv} outside [{L_MIN}, {L_MAX}]")
        if self.kind == "constant" and self.level_start != self.level_end:
            raise ValueError("constant scenario needs level_start == level_end")
        if self.kind == "sinusoid" and self.period < 2:
            raise ValueError("sinusoid scenario needs period >= 2")

    @classmethod
    def constant(cls, level: float) -> "LightingScenario":
        return cls("constant", level, level)


def illuminance_at(scenario: LightingScenario, step: int,
                   episode_length: int = EPISODE_LENGTH) -> float:
    """Illuminance at episode step ``step`` (0 is the reset frame)."""
    if step < 0:
        raise ValueError("step must be >= 0")
    a, b = scenario.level_start, scenario.level_end
    if scenario.kind == "constant":
        return a
    if scenario.kind == "step":
        return a if step < scenario.change_step else b
    if scenario.kind == "linear_ramp":
        frac = min(step / episode_length, 1.0)
        level = a + (b - a) * frac
    else:
        # sinusoid: geometric oscillation starting at level_start, reaching
        # level_end half a period later
        phase = 0.5 * (1.0 - math.cos(2.0 * math.pi * step / scenario.period))
        level = math.exp(math.log(a) + (math.log(b) - math.log(a)) * phase)
    # rounding must not push the level outside the scenario's own range
    return float(min(max(level, min(a, b)), max(a, b)))


def sample_scenario(level: str, rng: np.random.Generator) -> LightingScenario:
    if level == "easy":
        return LightingScenario.constant(float(rng.uniform(*EASY_RANGE)))
    if level == "normal":
        lo, hi = NORMAL_DARK_RANGE if rng.random() < 0.5 else NORMAL_BRIGHT_RANGE
        return LightingScenario.constant(float(rng.uniform(lo, hi)))
    if level != "hard":
        raise ValueError(f"unknown difficulty {level!r}")
    kind = ("step", "linear_ramp", "sinusoid")[int(rng.integers(3))]
    lo = math.exp(rng.uniform(*np.log(HARD_LOW_RANGE)))
    hi = min(lo * math.exp(rng.uniform(*np.log(HARD_RATIO_RANGE))), L_MAX)
    start, end = (lo, hi) if rng.random() < 0.5 else (hi, lo)
    change_step = int(rng.integers(20, 181)) if kind == "step" else 0
    period = int(rng.integers(50, 201)) if kind == "sinusoid" else 0
    return LightingScenario(kind, float(start), float(end), change_step, period)
