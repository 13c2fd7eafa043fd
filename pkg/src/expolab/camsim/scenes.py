"""Procedural reflectance maps standing in for target objects in the darkroom."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..imaging import resize_bilinear

GENERATORS = ("uniform", "ramp", "checker", "value_noise", "shapes")
REFL_MIN = 0.03
REFL_MAX = 0.97


def _uniform(rng, h, w):
    return np.full((h, w), rng.uniform(0.15, 0.85))


def _ramp(rng, h, w):
    a, b = rng.uniform(REFL_MIN, REFL_MAX, size=2)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    proj = np.cos(angle) * xx / max(w - 1, 1) + np.sin(angle) * yy / max(h - 1, 1)
    proj = (proj - proj.min()) / max(np.ptp(proj), 1e-12)
    return a + (b - a) * proj


def _checker(rng, h, w):
    period = int(rng.integers(4, 33))
    a, b = rng.uniform(REFL_MIN, REFL_MAX, size=2)
    yy, xx = np.mgrid[0:h, 0:w]
    return np.where(((yy // period) + (xx // period)) % 2 == 0, a, b)


def _value_noise(rng, h, w):
    out = np.zeros((h, w))
    amp, total = 1.0, 0.0
    for cells in (4, 8, 16, 32):
        coarse = rng.random((cells, cells))
        out += amp * resize_bilinear(coarse, h, w)
        total += amp
        amp *= 0.5
    out /= total
    lo, hi = np.sort(rng.uniform(REFL_MIN, REFL_MAX, size=2))
    span = max(np.ptp(out), 1e-12)
    return lo + (hi - lo) * (out - out.min()) / span


def _shapes(rng, h, w):
    out = np.full((h, w), rng.uniform(REFL_MIN, REFL_MAX))
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(int(rng.integers(3, 12))):
        val = rng.uniform(REFL_MIN, REFL_MAX)
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        r = rng.uniform(0.05, 0.3) * min(h, w)
        if rng.random() < 0.5:
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        else:
            mask = (np.abs(yy - cy) <= r) & (np.abs(xx - cx) <= r * rng.uniform(0.3, 1.5))
        out[mask] = val
    return out


_BUILDERS = {
    "uniform": _uniform,
    "ramp": _ramp,
    "checker": _checker,
    "value_noise": _value_noise,
    "shapes": _shapes,
}


@dataclass(frozen=True)
class Scene:
    generator_id: str
    seed: int
    height: int = 128
    width: int = 128
    reflectance: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.generator_id not in _BUILDERS:
            raise ValueError(f"unknown scene generator {self.generator_id!r}")
        rng = np.random.default_rng(self.seed)
        refl = np.clip(_BUILDERS[self.generator_id](rng, self.height, self.width), 0.0, 1.0)
        refl.setflags(write=False)
        object.__setattr__(self, "reflectance", refl)

    @classmethod
    def sample(cls, rng: np.random.Generator, height: int = 128, width: int = 128) -> "Scene":
        gid = GENERATORS[int(rng.integers(len(GENERATORS)))]
        return cls(gid, int(rng.integers(2**63)), height, width)
