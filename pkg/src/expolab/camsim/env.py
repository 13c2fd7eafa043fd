"""Episodic exposure-control environments with reset/step semantics.

``ExposureEnv`` owns everything shared between frame sources: parameter
updates, augmentation, RoI cropping, state history and reward. Subclasses only
say how a frame is captured for a given set of exposure parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..imaging import AugmentationSpec, RoiSpec, apply_augmentation
from ..percept import (HISTORY, VECTOR_SIZE, RewardConfig, initial_state, push_state,
                       r_flk, r_total, vectorize_intensity)
from ..sac.action import ActionConfig, apply_action
from .lighting import EPISODE_LENGTH, LightingScenario, illuminance_at, sample_scenario
from .scenes import Scene
from .sensor import CameraModel, ExposureParams, render


class EpisodeStateError(RuntimeError):
    """Stepping an environment that has not been reset or is already done."""


@dataclass(frozen=True)
class EnvConfig:
    frame_size: int = 128
    episode_length: int = EPISODE_LENGTH
    vector_size: int = VECTOR_SIZE
    history: int = HISTORY
    randomize: bool = True
    camera: CameraModel = field(default_factory=CameraModel)
    reward: RewardConfig = field(default_factory=RewardConfig)
    action: ActionConfig = field(default_factory=ActionConfig)

    @property
    def state_dim(self) -> int:
        return (self.history + 1) * self.vector_size


@dataclass(frozen=True)
class EpisodeSpec:
    """Everything needed to replay one evaluation episode exactly."""

    difficulty: str
    scenario: LightingScenario
    scene_generator: str
    scene_seed: int
    seed: int

    def scene(self, size: int = 128) -> Scene:
        return Scene(self.scene_generator, self.scene_seed, size, size)


class ExposureEnv:
    def __init__(self, config: EnvConfig = EnvConfig()):
        self.config = config
        self.steps = 0
        self.done = True
        self.params: Optional[ExposureParams] = None
        self.state: Optional[np.ndarray] = None
        self.frame: Optional[np.ndarray] = None
        self.augmentation = AugmentationSpec()
        self.roi: Optional[RoiSpec] = None
        self.rng = np.random.default_rng()
        self.difficulty = ""
        self.last_reward = 0.0
        self.last_flicker = 0.0

    # subclasses provide the frame source
    def _capture(self, params: ExposureParams) -> np.ndarray:
        raise NotImplementedError

    def _advance_lighting(self) -> None:
        pass

    def _observe(self, params: ExposureParams) -> np.ndarray:
        img = apply_augmentation(self._capture(params), self.augmentation)
        return self.roi.crop(img) if self.roi is not None else img

    def _start(self, params: ExposureParams) -> np.ndarray:
        self.params = params
        self.steps = 0
        self.done = False
        self.frame = self._observe(params)
        v = vectorize_intensity(self.frame, size=self.config.vector_size)
        self.state = initial_state(v, self.config.history)
        return self.state

    def step(self, action) -> tuple[np.ndarray, float, bool]:
        if self.done or self.params is None:
            raise EpisodeStateError("step() called before reset() or after the episode ended")
        return self.step_params(apply_action(self.params, action, self.config.action))

    def step_params(self, params: ExposureParams) -> tuple[np.ndarray, float, bool]:
        """Advance one frame with absolute parameters (for non-relative controllers)."""
        if self.done or self.params is None:
            raise EpisodeStateError("step() called before reset() or after the episode ended")
        self.params = params
        self.steps += 1
        self._advance_lighting()
        prev = self.frame
        self.frame = self._observe(params)
        v = vectorize_intensity(self.frame, size=self.config.vector_size)
        self.state = push_state(self.state, v)
        self.last_flicker = r_flk(self.frame, prev)
        self.last_reward = r_total(self.frame, prev, self.config.reward)
        self.done = self.steps >= self.config.episode_length
        return self.state, self.last_reward, self.done


class DarkroomEnv(ExposureEnv):
    """Synthetic darkroom: procedural scene, scripted lighting, simulated sensor."""

    def __init__(self, config: EnvConfig = EnvConfig()):
        super().__init__(config)
        self.scene: Optional[Scene] = None
        self.scenario: Optional[LightingScenario] = None
        self.illuminance = 0.0

    def reset(self, level: str = "easy", rng=None, *, spec: Optional[EpisodeSpec] = None,
              params: Optional[ExposureParams] = None,
              augmentation: Optional[AugmentationSpec] = None,
              roi: Optional[RoiSpec] = None) -> np.ndarray:
        """Start an episode.

        With ``spec`` the episode is fully determined by it (evaluation); otherwise
        scenario, scene and augmentation are drawn from ``rng`` for ``level``.
        Explicit ``params``/``augmentation``/``roi`` override the random draws.
        """
        size = self.config.frame_size
        if spec is not None:
            self.rng = np.random.default_rng(spec.seed)
            self.difficulty = spec.difficulty
            self.scenario = spec.scenario
            self.scene = spec.scene(size)
            aug = AugmentationSpec()
        else:
            self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
            self.difficulty = level
            self.scenario = sample_scenario(level, self.rng)
            self.scene = Scene.sample(self.rng, size, size)
            aug = AugmentationSpec.sample(self.rng, (size, size)) if self.config.randomize else AugmentationSpec()
        self.augmentation = augmentation if augmentation is not None else aug
        if params is None:
            params = ExposureParams.sample(self.rng)
        self.roi = roi
        self.illuminance = illuminance_at(self.scenario, 0, self.config.episode_length)
        return self._start(params)

    def _advance_lighting(self) -> None:
        self.illuminance = illuminance_at(self.scenario, self.steps, self.config.episode_length)

    def _capture(self, params: ExposureParams) -> np.ndarray:
        return render(self.scene.reflectance, self.illuminance, params, self.config.camera, self.rng)


def rollout_frames(env: ExposureEnv, actions: List) -> List[np.ndarray]:
    """Frames observed while replaying ``actions`` from the current reset state."""
    frames = [env.frame]
    for a in actions:
        env.step(a)
        frames.append(env.frame)
    return frames
