"""Relative continuous action: multiplicative on exposure time, additive on gain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..camsim.sensor import ExposureParams

ACTION_DIM = 2


@dataclass(frozen=True)
class ActionConfig:
    exposure_factor: float = 3.0   # max per-step exposure multiplier
    gain_step_db: float = 6.0      # max per-step gain change

    def __post_init__(self):
        if self.exposure_factor <= 1.0 or self.gain_step_db <= 0.0:
            raise ValueError(f"invalid action scaling {self}")


def apply_action(params: ExposureParams, action, cfg: ActionConfig = ActionConfig()) -> ExposureParams:
    """New parameters after relative action ``action = (a_exposure, a_gain)`` in [-1, 1]^2."""
    a_exp, a_gain = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
    t = params.exposure_time_ms * math.exp(a_exp * math.log(cfg.exposure_factor))
    g = params.gain_db + cfg.gain_step_db * a_gain
    return ExposureParams.clipped(t, g)
