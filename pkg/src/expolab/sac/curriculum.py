"""Static-to-dynamic lighting curriculum."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

LEVELS = ("easy", "normal", "hard")


@dataclass(frozen=True)
class CurriculumSchedule:
    t_easy: float = 25_000
    t_normal: float = 45_000
    final: Tuple[float, float, float] = (0.1, 0.4, 0.5)
    # "literal": the printed piecewise formulas, p_e rising 0 -> 1 on [T_e, T_n).
    # "monotone": p_e and p_n swapped on that branch, so easy fades out.
    mode: str = "literal"

    def __post_init__(self):
        if not 0 < self.t_easy < self.t_normal:
            raise ValueError("need 0 < t_easy < t_normal")
        if abs(sum(self.final) - 1.0) > 1e-12 or min(self.final) < 0:
            raise ValueError(f"final probabilities {self.final} must be a distribution")
        if self.mode not in ("literal", "monotone"):
            raise ValueError(f"unknown curriculum mode {self.mode!r}")


def curriculum_probs(sched: CurriculumSchedule, t: float) -> Tuple[float, float, float]:
    """(p_easy, p_normal, p_hard) at curriculum clock ``t``."""
    if t < 0:
        raise ValueError("curriculum clock must be >= 0")
    if t < sched.t_easy:
        return 1.0, 0.0, 0.0
    if t < sched.t_normal:
        frac = (t - sched.t_easy) / (sched.t_normal - sched.t_easy)
        if sched.mode == "literal":
            return frac, 1.0 - frac, 0.0
        return 1.0 - frac, frac, 0.0
    return sched.final


def draw_level(probs, u: float) -> str:
    """Inverse-CDF draw of a difficulty level from a uniform variate ``u``."""
    cdf = np.cumsum(probs)
    return LEVELS[min(int(np.searchsorted(cdf, u, side="right")), len(LEVELS) - 1)]
