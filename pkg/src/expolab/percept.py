"""Observation and reward math: intensity-history state and the three-term reward."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .imaging import DimensionError, RoiSpec, resize_linear_1d, sobel_mean

VECTOR_SIZE = 128
HISTORY = 3
STATE_DIM = (HISTORY + 1) * VECTOR_SIZE


@dataclass(frozen=True)
class RewardConfig:
    target: float = 0.5           # M, mid-tone
    exponent: float = 0.5         # p_m
    w_mean: float = 1.5
    w_flicker: float = -1.0
    w_noise: float = -0.1
    # "closeness" rewards 1 - distance; "literal" uses the distance as printed
    mean_term_form: str = "closeness"

    def __post_init__(self):
        if not 0.0 < self.target < 1.0:
            raise ValueError("target must lie in (0, 1)")
        if self.exponent <= 0.0:
            raise ValueError("exponent must be positive")
        if self.mean_term_form not in ("closeness", "literal"):
            raise ValueError(f"unknown mean_term_form {self.mean_term_form!r}")


def vectorize_intensity(img: np.ndarray, roi: Optional[RoiSpec] = None,
                        size: int = VECTOR_SIZE) -> np.ndarray:
    """Column-mean intensity profile of the RoI, resampled to ``size`` entries."""
    img = np.asarray(img, dtype=np.float64)
    patch = roi.crop(img) if roi is not None else img
    if patch.ndim != 2 or patch.size == 0:
        raise DimensionError(f"cannot vectorize patch of shape {patch.shape}")
    profile = patch.mean(axis=0)
    return np.clip(resize_linear_1d(profile, size), 0.0, 1.0)


def initial_state(v: np.ndarray, history: int = HISTORY) -> np.ndarray:
    """History seeded by repeating the first intensity vector."""
    return np.tile(np.asarray(v, dtype=np.float64), history + 1)


def push_state(state: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Drop the oldest slice and append ``v`` as the newest (oldest first order)."""
    v = np.asarray(v, dtype=np.float64)
    s = v.shape[0]
    if state.shape[0] % s:
        raise DimensionError(f"state length {state.shape[0]} is not a multiple of {s}")
    return np.concatenate((state[s:], v))


def r_mean_dist(img: np.ndarray, cfg: RewardConfig = RewardConfig()) -> float:
    """Mean of |I - M|^p over pixels."""
    return float(np.mean(np.abs(np.asarray(img, dtype=np.float64) - cfg.target) ** cfg.exponent))


def r_flk(img_t: np.ndarray, img_prev: np.ndarray) -> float:
    """Mean per-pixel absolute difference between consecutive frames."""
    a = np.asarray(img_t, dtype=np.float64)
    b = np.asarray(img_prev, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


def r_noise(img: np.ndarray) -> float:
    return sobel_mean(img)


def mean_term(img: np.ndarray, cfg: RewardConfig = RewardConfig()) -> float:
    d = r_mean_dist(img, cfg)
    return 1.0 - d if cfg.mean_term_form == "closeness" else d


def r_total(img_t: np.ndarray, img_prev: np.ndarray, cfg: RewardConfig = RewardConfig()) -> float:
    return (cfg.w_mean * mean_term(img_t, cfg)
            + cfg.w_flicker * r_flk(img_t, img_prev)
            + cfg.w_noise * r_noise(img_t))


def reward_bounds(cfg: RewardConfig = RewardConfig()) -> tuple[float, float]:
    """Loose [lo, hi] bounds on r_total for images with pixels in [0, 1].

    The Sobel magnitude of a [0, 1] image is at most 4*sqrt(2).
    """
    dmax = max(cfg.target, 1.0 - cfg.target) ** cfg.exponent
    m_lo, m_hi = (1.0 - dmax, 1.0) if cfg.mean_term_form == "closeness" else (0.0, dmax)
    terms = [
        sorted((cfg.w_mean * m_lo, cfg.w_mean * m_hi)),
        sorted((0.0, cfg.w_flicker * 1.0)),
        sorted((0.0, cfg.w_noise * 4.0 * np.sqrt(2.0))),
    ]
    return sum(t[0] for t in terms), sum(t[1] for t in terms)
