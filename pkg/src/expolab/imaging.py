"""Pixel-level primitives on grayscale rasters.

Images are plain 2-D ``float64`` numpy arrays with values in [0, 1]. The
helpers here never mutate their inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


class DimensionError(ValueError):
    """Raised when an image or region has unusable dimensions."""


class FormatError(ValueError):
    """Raised for malformed or unsupported PGM payloads."""


def as_image(pixels, copy: bool = False) -> np.ndarray:
    """Validate ``pixels`` as an image and return it as a float64 array."""
    img = np.array(pixels, dtype=np.float64) if copy else np.asarray(pixels, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D raster, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("pixel values must lie in [0, 1]")
    return img


@dataclass(frozen=True)
class RoiSpec:
    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.x0 < 0 or self.y0 < 0:
            raise DimensionError(f"negative RoI offset in {self}")
        if self.w < 8 or self.h < 8:
            raise DimensionError(f"RoI must be at least 8x8, got {self.w}x{self.h}")

    @classmethod
    def full(cls, img: np.ndarray) -> "RoiSpec":
        h, w = img.shape
        return cls(0, 0, w, h)

    def fits(self, shape: Tuple[int, int]) -> bool:
        h, w = shape
        return self.x0 + self.w <= w and self.y0 + self.h <= h

    def crop(self, img: np.ndarray) -> np.ndarray:
        if not self.fits(img.shape):
            raise DimensionError(f"{self} does not fit inside image of shape {img.shape}")
        return img[self.y0:self.y0 + self.h, self.x0:self.x0 + self.w]


@dataclass(frozen=True)
class AugmentationSpec:
    """Spatial augmentation, drawn once per episode and then held fixed.

    Photometric changes are deliberately absent: only geometry moves.
    """

    flip_h: bool = False
    flip_v: bool = False
    quarter_turns: int = 0
    crop: Optional[RoiSpec] = None
    resize_to: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.quarter_turns not in (0, 1, 2, 3):
            raise ValueError(f"quarter_turns must be in 0..3, got {self.quarter_turns}")
        if self.resize_to is not None:
            h, w = self.resize_to
            if h < 8 or w < 8:
                raise DimensionError(f"resize target must be at least 8x8, got {self.resize_to}")

    @property
    def is_identity(self) -> bool:
        return (not self.flip_h and not self.flip_v and self.quarter_turns == 0
                and self.crop is None and self.resize_to is None)

    @classmethod
    def sample(cls, rng: np.random.Generator, shape: Tuple[int, int]) -> "AugmentationSpec":
        """Draw a random spec valid for images of ``shape``."""
        h, w = shape
        crop = None
        if rng.random() < 0.5 and min(h, w) > 16:
            ch = int(rng.integers(max(8, h // 4), h + 1))
            cw = int(rng.integers(max(8, w // 4), w + 1))
            crop = RoiSpec(int(rng.integers(0, w - cw + 1)), int(rng.integers(0, h - ch + 1)), cw, ch)
        resize_to = None
        if rng.random() < 0.5:
            resize_to = (int(rng.integers(32, 161)), int(rng.integers(32, 161)))
        return cls(
            flip_h=bool(rng.random() < 0.5),
            flip_v=bool(rng.random() < 0.5),
            quarter_turns=int(rng.integers(0, 4)),
            crop=crop,
            resize_to=resize_to,
        )


def sobel_gradients(img: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical 3x3 Sobel responses with edge replication."""
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise DimensionError(f"Sobel needs at least a 3x3 image, got {img.shape}")
    p = np.pad(img, 1, mode="edge")
    # vertical smoothing [1,2,1] then horizontal difference, and vice versa
    sv = p[:-2, :] + 2.0 * p[1:-1, :] + p[2:, :]
    gx = sv[:, 2:] - sv[:, :-2]
    sh = p[:, :-2] + 2.0 * p[:, 1:-1] + p[:, 2:]
    gy = sh[2:, :] - sh[:-2, :]
    return gx, gy


def sobel_mean(img: np.ndarray) -> float:
    """Mean Sobel gradient magnitude sqrt(Gx^2 + Gy^2) over all pixels."""
    gx, gy = sobel_gradients(np.asarray(img, dtype=np.float64))
    return float(np.mean(np.hypot(gx, gy)))


def _center_aligned_taps(n_in: int, n_out: int):
    """Source indices and weights for pixel-center-aligned linear sampling."""
    pos = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize_linear_1d(values: np.ndarray, n_out: int) -> np.ndarray:
    """Resample a 1-D profile to ``n_out`` samples (pixel-center alignment)."""
    values = np.asarray(values, dtype=np.float64)
    if n_out < 1:
        raise DimensionError("target length must be >= 1")
    if values.shape[0] == n_out:
        return values.copy()
    lo, hi, t = _center_aligned_taps(values.shape[0], n_out)
    a = values[lo]
    return a + t * (values[hi] - a)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment and clamped borders."""
    if out_h < 1 or out_w < 1:
        raise DimensionError(f"target size must be positive, got {out_h}x{out_w}")
    img = np.asarray(img, dtype=np.float64)
    in_h, in_w = img.shape
    if (in_h, in_w) == (out_h, out_w):
        return img.copy()
    out = img
    if in_w != out_w:
        lo, hi, t = _center_aligned_taps(in_w, out_w)
        a = out[:, lo]
        out = a + t * (out[:, hi] - a)
    if in_h != out_h:
        lo, hi, t = _center_aligned_taps(in_h, out_h)
        a = out[lo, :]
        out = a + t[:, None] * (out[hi, :] - a)
    return np.clip(out, 0.0, 1.0)


def apply_augmentation(img: np.ndarray, spec: AugmentationSpec) -> np.ndarray:
    """Apply crop, flips, quarter turns (clockwise) and resize, in that order."""
    out = np.asarray(img, dtype=np.float64)
    if spec.crop is not None:
        out = spec.crop.crop(out)
    if spec.flip_h:
        out = out[:, ::-1]
    if spec.flip_v:
        out = out[::-1, :]
    if spec.quarter_turns:
        out = np.rot90(out, -spec.quarter_turns)
    if spec.resize_to is not None:
        out = resize_bilinear(out, *spec.resize_to)
    return np.ascontiguousarray(out)


# --- PGM (P5) -----------------------------------------------------------------

_HEADER_TOKEN = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")


def quantize(img: np.ndarray, depth: int) -> np.ndarray:
    if depth not in (8, 16):
        raise ValueError(f"depth must be 8 or 16, got {depth}")
    maxval = (1 << depth) - 1
    # round half up; np.rint would round half to even
    return np.floor(np.asarray(img, dtype=np.float64) * maxval + 0.5).astype(np.int64)


def write_pgm(img: np.ndarray, depth: int = 8, comment: Optional[str] = None) -> bytes:
    img = as_image(img)
    q = quantize(img, depth)
    h, w = img.shape
    maxval = (1 << depth) - 1
    header = b"P5\n"
    if comment:
        header += b"# " + comment.replace("\n", " ").encode("ascii", "replace") + b"\n"
    header += f"{w} {h}\n{maxval}\n".encode("ascii")
    payload = q.astype(np.uint8 if depth == 8 else ">u2").tobytes()
    return header + payload


def read_pgm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise FormatError("not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    for _ in range(3):
        m = _HEADER_TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        try:
            fields.append(int(m.group(2)))
        except ValueError:
            raise FormatError(f"bad PGM header field {m.group(2)!r}") from None
        pos = m.end()
    w, h, maxval = fields
    if w < 1 or h < 1:
        raise FormatError(f"bad PGM dimensions {w}x{h}")
    if maxval not in (255, 65535):
        raise FormatError(f"unsupported maxval {maxval}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("missing whitespace after PGM maxval")
    pos += 1
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    nbytes = w * h * (1 if maxval == 255 else 2)
    payload = data[pos:pos + nbytes]
    if len(payload) != nbytes:
        raise FormatError(f"truncated PGM payload: expected {nbytes} bytes, got {len(payload)}")
    q = np.frombuffer(payload, dtype=dtype).reshape(h, w)
    return q.astype(np.float64) / maxval


def save_pgm(path, img: np.ndarray, depth: int = 8) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img, depth))


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())
