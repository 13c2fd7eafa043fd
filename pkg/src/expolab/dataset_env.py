"""Replay environment over a pre-captured (exposure, gain) image grid.

A grid directory holds one PGM per (exposure time, gain) cell and a
``manifest.json``::

    {
      "exposure_us": [100, 250, ...],     strictly increasing integers
      "gain_db": [0, 2, ...],             strictly increasing numbers
      "pattern": "e{e}_g{g}.pgm",         file name template, relative to the manifest
      "width": 128,
      "height": 128
    }

Continuous parameter requests are snapped to the nearest cell in
(log exposure, gain) space, ties going to the larger value.
"""

from __future__ import annotations

import bisect
import json
import math
import os
import pathlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .camsim.env import EnvConfig, ExposureEnv
from .camsim.scenes import GENERATORS, Scene
from .camsim.sensor import CameraModel, ExposureParams, render
from .imaging import AugmentationSpec, FormatError, RoiSpec, load_pgm, save_pgm

MANIFEST_NAME = "manifest.json"
DEFAULT_PATTERN = "e{e}_g{g}.pgm"


class ManifestError(ValueError):
    """Malformed manifest document."""


class GridLoadError(ValueError):
    """A grid cell could not be loaded; ``cell`` is its (exposure_us, gain_db)."""

    def __init__(self, cell, reason: str):
        super().__init__(f"cell (exposure_us={cell[0]}, gain_db={_fmt_gain(cell[1])}): {reason}")
        self.cell = cell


def _fmt_gain(g: float) -> str:
    return str(int(g)) if float(g).is_integer() else repr(float(g))


def _strictly_increasing(xs: Sequence) -> bool:
    return all(a < b for a, b in zip(xs[:-1], xs[1:]))


@dataclass(frozen=True)
class GridManifest:
    exposure_us: Tuple[int, ...]
    gain_db: Tuple[float, ...]
    pattern: str = DEFAULT_PATTERN
    width: int = 128
    height: int = 128
    root: str = "."

    def __post_init__(self):
        object.__setattr__(self, "exposure_us", tuple(int(e) for e in self.exposure_us))
        object.__setattr__(self, "gain_db", tuple(float(g) for g in self.gain_db))
        if not self.exposure_us or not self.gain_db:
            raise ManifestError("exposure and gain lists must be non-empty")
        if not _strictly_increasing(self.exposure_us) or not _strictly_increasing(self.gain_db):
            raise ManifestError("exposure and gain lists must be strictly increasing")
        if self.exposure_us[0] <= 0:
            raise ManifestError("exposure values must be positive")
        if "{e}" not in self.pattern or "{g}" not in self.pattern:
            raise ManifestError("pattern needs {e} and {g} placeholders")
        if self.width < 8 or self.height < 8:
            raise ManifestError("frames must be at least 8x8")

    @property
    def cells(self) -> List[Tuple[int, float]]:
        return [(e, g) for e in self.exposure_us for g in self.gain_db]

    def path(self, e: int, g: float) -> pathlib.Path:
        return pathlib.Path(self.root) / self.pattern.format(e=e, g=_fmt_gain(g))

    def to_json(self) -> str:
        doc = {"exposure_us": list(self.exposure_us),
               "gain_db": [int(g) if g.is_integer() else g for g in self.gain_db],
               "pattern": self.pattern, "width": self.width, "height": self.height}
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str, root=".") -> "GridManifest":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from None
        missing = [k for k in ("exposure_us", "gain_db", "pattern", "width", "height") if k not in doc]
        if missing:
            raise ManifestError(f"manifest missing fields {missing}")
        try:
            return cls(doc["exposure_us"], doc["gain_db"], str(doc["pattern"]),
                       int(doc["width"]), int(doc["height"]), str(root))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ManifestError):
                raise
            raise ManifestError(f"bad manifest field: {exc}") from None

    @classmethod
    def load(cls, path) -> "GridManifest":
        path = pathlib.Path(path)
        if path.is_dir():
            path = path / MANIFEST_NAME
        return cls.from_json(path.read_text(), root=str(path.parent))


def _nearest(values: Sequence[float], x: float) -> int:
    """Index of the value nearest ``x``; exact ties go to the larger value."""
    i = bisect.bisect_left(values, x)
    if i == 0:
        return 0
    if i == len(values):
        return len(values) - 1
    below, above = x - values[i - 1], values[i] - x
    return i if above <= below else i - 1


def snap_params(params: ExposureParams, manifest: GridManifest) -> Tuple[int, float]:
    """Grid cell nearest ``params`` in (log exposure, gain).

    The grid is a Cartesian product, so the joint nearest cell is the nearest
    value on each axis independently.
    """
    log_e = [math.log(e) for e in manifest.exposure_us]
    ie = _nearest(log_e, math.log(params.exposure_time_ms * 1000.0))
    ig = _nearest(manifest.gain_db, params.gain_db)
    return manifest.exposure_us[ie], manifest.gain_db[ig]


# --- grid specs and synthetic generation --------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    exposure_us: Tuple[int, ...]
    gain_db: Tuple[float, ...]
    width: int = 128
    height: int = 128
    pattern: str = DEFAULT_PATTERN
    depth: int = 8


def _arange(lo, hi, step):
    return tuple(range(lo, hi + 1, step))


# Cell layouts of the real indoor/outdoor captures this environment stands in for.
OUTDOOR_GRID = GridSpec(_arange(100, 7450, 150), tuple(float(g) for g in range(0, 21, 2)))
INDOOR_GRID = GridSpec(_arange(4000, 67000, 3000), tuple(float(g) for g in range(0, 25, 2)))


def generate_synthetic_grid(scene: Scene, cam: CameraModel, spec: GridSpec, out_dir,
                            illuminance: float, seed: int = 0) -> GridManifest:
    """Render every cell of ``spec`` under fixed ``illuminance`` and write the
    PGM files plus ``manifest.json`` to ``out_dir``."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = GridManifest(spec.exposure_us, spec.gain_db, spec.pattern, spec.width, spec.height,
                            str(out))
    if scene.reflectance.shape != (spec.height, spec.width):
        scene = Scene(scene.generator_id, scene.seed, spec.height, spec.width)
    rng = np.random.default_rng(seed)
    for e, g in manifest.cells:
        params = ExposureParams.clipped(e / 1000.0, g)
        img = render(scene.reflectance, illuminance, params, cam, rng)
        save_pgm(manifest.path(e, g), img, spec.depth)
    (out / MANIFEST_NAME).write_text(manifest.to_json())
    return manifest


# --- replay environment ----------------------------------------------------------------

class GridEnv(ExposureEnv):
    """Exposure environment whose frames come from a loaded image grid.

    Parameters stay continuous; only the captured frame is snapped to a cell.
    Lighting is whatever was captured, so every episode is fixed-lighting.
    """

    def __init__(self, manifest: GridManifest, frames: Dict[Tuple[int, float], np.ndarray],
                 config: EnvConfig = EnvConfig(randomize=False)):
        super().__init__(config)
        self.manifest = manifest
        self._frames = frames
        for img in frames.values():
            img.setflags(write=False)
        self.difficulty = "grid"
        self.cell: Optional[Tuple[int, float]] = None

    def __len__(self):
        return len(self._frames)

    def frame_at(self, e: int, g: float) -> np.ndarray:
        return self._frames[(e, g)]

    def _capture(self, params: ExposureParams) -> np.ndarray:
        self.cell = snap_params(params, self.manifest)
        return self._frames[self.cell]

    def reset(self, rng=None, *, params: Optional[ExposureParams] = None,
              augmentation: Optional[AugmentationSpec] = None,
              roi: Optional[RoiSpec] = None, seed: Optional[int] = None) -> np.ndarray:
        if seed is not None:
            rng = seed
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.augmentation = augmentation if augmentation is not None else AugmentationSpec()
        self.roi = roi
        if params is None:
            params = ExposureParams.sample(self.rng)
        return self._start(params)


def load_grid(manifest, config: EnvConfig = EnvConfig(randomize=False)) -> GridEnv:
    """Load every cell named by ``manifest`` (a GridManifest or a path)."""
    if not isinstance(manifest, GridManifest):
        manifest = GridManifest.load(manifest)
    frames = {}
    for cell in manifest.cells:
        path = manifest.path(*cell)
        if not os.path.isfile(path):
            raise GridLoadError(cell, f"missing file {path}")
        try:
            img = load_pgm(path)
        except (OSError, FormatError) as exc:
            raise GridLoadError(cell, f"unreadable {path}: {exc}") from None
        if img.shape != (manifest.height, manifest.width):
            raise GridLoadError(cell, f"{path} is {img.shape[1]}x{img.shape[0]}, "
                                      f"manifest declares {manifest.width}x{manifest.height}")
        frames[cell] = img
    return GridEnv(manifest, frames, config)


# --- evaluation suites ---------------------------------------------------------------

@dataclass(frozen=True)
class GridScenario:
    """One synthetic grid environment plus the parameters an episode starts from."""

    scene_generator: str
    scene_seed: int
    illuminance: float
    start: ExposureParams
    seed: int

    def scene(self, spec: GridSpec) -> Scene:
        return Scene(self.scene_generator, self.scene_seed, spec.height, spec.width)


# Illuminances for which the outdoor grid holds a mid-tone cell for mid-grey scenes.
GRID_ILLUMINANCE_RANGE = (0.2, 50.0)


def grid_bounds(spec: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Parameter box covered by a grid, in (ln exposure_ms, gain_db) coordinates."""
    lo = np.array([math.log(spec.exposure_us[0] / 1000.0), spec.gain_db[0]])
    hi = np.array([math.log(spec.exposure_us[-1] / 1000.0), spec.gain_db[-1]])
    return lo, hi


def make_grid_suite(n: int, seed: int, spec: GridSpec = OUTDOOR_GRID) -> List[GridScenario]:
    """Scenarios whose start parameters lie inside the grid (log-uniform exposure, uniform gain)."""
    rng = np.random.default_rng(seed)
    lo, hi = grid_bounds(spec)
    out = []
    for _ in range(n):
        gid = GENERATORS[int(rng.integers(len(GENERATORS)))]
        lum = float(math.exp(rng.uniform(*np.log(GRID_ILLUMINANCE_RANGE))))
        x = rng.uniform(lo, hi)
        start = ExposureParams.clipped(math.exp(x[0]), float(x[1]))
        out.append(GridScenario(gid, int(rng.integers(2**31)), lum, start, int(rng.integers(2**31))))
    return out


def build_grid(scenario: GridScenario, out_dir, spec: GridSpec = OUTDOOR_GRID,
               cam: CameraModel = CameraModel(), config: EnvConfig = EnvConfig(randomize=False)) -> GridEnv:
    generate_synthetic_grid(scenario.scene(spec), cam, spec, out_dir, scenario.illuminance,
                            scenario.seed)
    return load_grid(out_dir, config)


# --- grid requests (input of the gen-grid command) ----------------------------------------

@dataclass(frozen=True)
class GridRequest:
    """What to render: a cell layout, a scene and a fixed illuminance.

    Text form is flat ``key = value``::

        preset = outdoor          # outdoor | indoor | custom
        exposure_us = 100, 400    # custom only
        gain_db = 0, 6            # custom only
        width = 128
        height = 128
        scene = value_noise
        scene_seed = 3
        illuminance = 2.0
        seed = 0
        noise = true
    """

    spec: GridSpec = OUTDOOR_GRID
    scene: str = "value_noise"
    scene_seed: int = 0
    illuminance: float = 2.0
    seed: int = 0
    noise: bool = True

    def run(self, out_dir) -> GridManifest:
        cam = CameraModel() if self.noise else CameraModel().without_noise()
        scene = Scene(self.scene, self.scene_seed, self.spec.height, self.spec.width)
        return generate_synthetic_grid(scene, cam, self.spec, out_dir, self.illuminance, self.seed)


_PRESETS = {"outdoor": OUTDOOR_GRID, "indoor": INDOOR_GRID}
_REQUEST_KEYS = {"preset", "exposure_us", "gain_db", "width", "height", "scene", "scene_seed",
                 "illuminance", "seed", "noise", "depth"}


def loads_grid_request(text: str) -> GridRequest:
    import configparser
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       delimiters=("=",))
    try:
        parser.read_string("[grid]\n" + text)
    except configparser.Error as exc:
        raise ManifestError(f"malformed grid request: {exc}") from None
    kv = dict(parser["grid"])
    unknown = set(kv) - _REQUEST_KEYS
    if unknown:
        raise ManifestError(f"unknown grid request keys {sorted(unknown)}")
    try:
        preset = kv.get("preset", "outdoor")
        if preset == "custom":
            if "exposure_us" not in kv or "gain_db" not in kv:
                raise ManifestError("custom preset needs exposure_us and gain_db")
            spec = GridSpec(tuple(int(x) for x in kv["exposure_us"].split(",")),
                            tuple(float(x) for x in kv["gain_db"].split(",")))
        elif preset in _PRESETS:
            spec = _PRESETS[preset]
        else:
            raise ManifestError(f"unknown preset {preset!r}")
        spec = GridSpec(spec.exposure_us, spec.gain_db, int(kv.get("width", spec.width)),
                        int(kv.get("height", spec.height)), spec.pattern,
                        int(kv.get("depth", spec.depth)))
        # validate the layout early, before anything is rendered
        GridManifest(spec.exposure_us, spec.gain_db, spec.pattern, spec.width, spec.height)
        noise = parser["grid"].getboolean("noise", fallback=True)
        return GridRequest(spec, kv.get("scene", "value_noise"), int(kv.get("scene_seed", 0)),
                           float(kv.get("illuminance", 2.0)), int(kv.get("seed", 0)), noise)
    except ManifestError:
        raise
    except ValueError as exc:
        raise ManifestError(f"bad grid request value: {exc}") from None
