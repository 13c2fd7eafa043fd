"""Plain-text scenario packs.

One episode per line, whitespace-separated ``key=value`` pairs; ``#`` starts a
comment. Keys::

    difficulty   easy | normal | hard
    kind         constant | step | linear_ramp | sinusoid
    level_start  relative illuminance
    level_end    relative illuminance
    change_step  step index of a step change (0 unless kind=step)
    period       sinusoid period in steps (0 unless kind=sinusoid)
    scene        scene generator id
    scene_seed   seed of the scene generator
    seed         episode seed (sensor noise and initial exposure parameters)
"""

from __future__ import annotations

from typing import Iterable, List

import numpy as np

from .env import EpisodeSpec
from .lighting import LightingScenario, sample_scenario
from .scenes import GENERATORS

_KEYS = ("difficulty", "kind", "level_start", "level_end", "change_step", "period",
         "scene", "scene_seed", "seed")


class PackFormatError(ValueError):
    pass


def format_spec(spec: EpisodeSpec) -> str:
    sc = spec.scenario
    return (f"difficulty={spec.difficulty} kind={sc.kind} level_start={sc.level_start!r} "
            f"level_end={sc.level_end!r} change_step={sc.change_step} period={sc.period} "
            f"scene={spec.scene_generator} scene_seed={spec.scene_seed} seed={spec.seed}")


def dumps_pack(specs: Iterable[EpisodeSpec]) -> str:
    lines = ["# expolab scenario pack v1"]
    lines.extend(format_spec(s) for s in specs)
    return "\n".join(lines) + "\n"


def loads_pack(text: str) -> List[EpisodeSpec]:
    specs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            kv = dict(tok.split("=", 1) for tok in line.split())
        except ValueError:
            raise PackFormatError(f"line {lineno}: expected key=value tokens") from None
        missing = [k for k in _KEYS if k not in kv]
        if missing:
            raise PackFormatError(f"line {lineno}: missing keys {missing}")
        try:
            scenario = LightingScenario(kv["kind"], float(kv["level_start"]), float(kv["level_end"]),
                                        int(kv["change_step"]), int(kv["period"]))
            specs.append(EpisodeSpec(kv["difficulty"], scenario, kv["scene"],
                                     int(kv["scene_seed"]), int(kv["seed"])))
        except ValueError as exc:
            raise PackFormatError(f"line {lineno}: {exc}") from None
    return specs


def save_pack(path, specs: Iterable[EpisodeSpec]) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_pack(specs))


def load_pack(path) -> List[EpisodeSpec]:
    with open(path) as fh:
        return loads_pack(fh.read())


def make_pack(counts: dict, seed: int) -> List[EpisodeSpec]:
    """Draw a pack with ``counts[difficulty]`` episodes per difficulty level."""
    unknown = set(counts) - {"easy", "normal", "hard"}
    if unknown:
        raise ValueError(f"unknown difficulty levels {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    specs = []
    for level in ("easy", "normal", "hard"):
        for _ in range(counts.get(level, 0)):
            specs.append(EpisodeSpec(
                level, sample_scenario(level, rng),
                GENERATORS[int(rng.integers(len(GENERATORS)))],
                int(rng.integers(2**63)), int(rng.integers(2**63))))
    return specs
