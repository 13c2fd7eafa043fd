"""Exposure parameters and a parametric image-formation model.

Signal chain per pixel::

    e      = reflectance * L * t / t_ref              (normalized signal)
    e'     = e + sqrt(e / full_well) * N(0, 1)        (shot noise, Gaussian approx.)
    out    = G * e' + G * read_sigma * N(0, 1)        (G = 10^(gain_db / 20))
    out    = quantize(clip(out, 0, 1))

The model is a stand-in for a real sensor: linear in both exposure time and
gain, so gain trades brightness for amplified noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

T_MIN_MS = 0.05
T_MAX_MS = 100.0
GAIN_MIN_DB = 0.0
GAIN_MAX_DB = 40.0
L_MIN = 0.01
L_MAX = 100.0


class IlluminanceError(ValueError):
    """Illuminance outside [L_MIN, L_MAX]."""


@dataclass(frozen=True)
class ExposureParams:
    exposure_time_ms: float
    gain_db: float

    def __post_init__(self):
        if not T_MIN_MS <= self.exposure_time_ms <= T_MAX_MS:
            raise ValueError(f"exposure time {self.exposure_time_ms} ms outside [{T_MIN_MS}, {T_MAX_MS}]")
        if not GAIN_MIN_DB <= self.gain_db <= GAIN_MAX_DB:
            raise ValueError(f"gain {self.gain_db} dB outside [{GAIN_MIN_DB}, {GAIN_MAX_DB}]")

    @classmethod
    def clipped(cls, exposure_time_ms: float, gain_db: float) -> "ExposureParams":
        return cls(float(min(max(exposure_time_ms, T_MIN_MS), T_MAX_MS)),
                   float(min(max(gain_db, GAIN_MIN_DB), GAIN_MAX_DB)))

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "ExposureParams":
        """Log-uniform exposure time, uniform gain."""
        t = math.exp(rng.uniform(math.log(T_MIN_MS), math.log(T_MAX_MS)))
        return cls.clipped(t, rng.uniform(GAIN_MIN_DB, GAIN_MAX_DB))

    @property
    def gain_linear(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)


@dataclass(frozen=True)
class CameraModel:
    t_ref_ms: float = 10.0
    full_well: float = 10000.0
    read_noise_sigma: float = 0.002
    quantize_bits: int = 8

    def __post_init__(self):
        if self.t_ref_ms <= 0 or self.full_well <= 0 or self.read_noise_sigma < 0:
            raise ValueError(f"invalid camera model {self}")
        if self.quantize_bits < 0:
            raise ValueError("quantize_bits must be >= 0")

    @property
    def noiseless(self) -> bool:
        return math.isinf(self.full_well) and self.read_noise_sigma == 0.0

    def without_noise(self) -> "CameraModel":
        return replace(self, full_well=math.inf, read_noise_sigma=0.0, quantize_bits=0)


def render(reflectance: np.ndarray, illuminance: float, params: ExposureParams,
           cam: CameraModel = CameraModel(), rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Form one frame of ``reflectance`` lit at ``illuminance`` with ``params``."""
    if not L_MIN <= illuminance <= L_MAX:
        raise IlluminanceError(f"illuminance {illuminance} outside [{L_MIN}, {L_MAX}]")
    refl = np.asarray(reflectance, dtype=np.float64)
    signal = refl * (illuminance * params.exposure_time_ms / cam.t_ref_ms)
    g = params.gain_linear
    if not math.isinf(cam.full_well):
        if rng is None:
            raise ValueError("a random generator is required when noise is enabled")
        signal = signal + np.sqrt(signal / cam.full_well) * rng.standard_normal(signal.shape)
    out = g * signal
    if cam.read_noise_sigma > 0:
        if rng is None:
            raise ValueError("a random generator is required when noise is enabled")
        out = out + (cam.read_noise_sigma * g) * rng.standard_normal(out.shape)
    out = np.clip(out, 0.0, 1.0)
    if cam.quantize_bits:
        levels = (1 << cam.quantize_bits) - 1
        out = np.floor(out * levels + 0.5) / levels
    return out
