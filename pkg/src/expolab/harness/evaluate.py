"""Episode evaluation, controller comparisons and latency benchmarking."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .. import baselines
from ..camsim.env import DarkroomEnv, EnvConfig, EpisodeSpec, ExposureEnv
from ..camsim.sensor import ExposureParams
from ..imaging import resize_bilinear
from ..nn import Mlp
from ..percept import initial_state, mean_term, push_state, r_noise, vectorize_intensity
from ..sac.action import apply_action
from ..sac.agent import Policy
from .metrics import DEFAULT_EPSILON, convergence_index


# --- controllers ---------------------------------------------------------------
#
# A controller sees the environment after each frame and returns the exposure
# parameters for the next one.

class AgentController:
    name = "drl"

    def __init__(self, actor: Mlp, name: str = "drl"):
        self.policy = Policy(actor)
        self.name = name

    def reset(self) -> None:
        pass

    def next_params(self, env: ExposureEnv) -> ExposureParams:
        return apply_action(env.params, self.policy(env.state), env.config.action)


class BuiltinAEController:
    name = "builtin"

    def __init__(self, setpoint: float = baselines.SETPOINT, kappa: float = baselines.KAPPA,
                 deadband: float = baselines.DEADBAND):
        self.setpoint, self.kappa, self.deadband = setpoint, kappa, deadband

    def reset(self) -> None:
        pass

    def next_params(self, env: ExposureEnv) -> ExposureParams:
        return baselines.builtin_ae_step(float(env.frame.mean()), env.params, self.setpoint,
                                         self.kappa, self.deadband)


class FrozenController:
    name = "frozen"

    def reset(self) -> None:
        pass

    def next_params(self, env: ExposureEnv) -> ExposureParams:
        return env.params


class RandomController:
    """Uniform random relative actions from a fixed seed."""

    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def reset(self) -> None:
        self.rng = np.random.default_rng(self.seed)

    def next_params(self, env: ExposureEnv) -> ExposureParams:
        return apply_action(env.params, self.rng.uniform(-1.0, 1.0, 2), env.config.action)


def single_frame_score(frame: np.ndarray, env: ExposureEnv) -> float:
    """Reward of a frame on its own: mean and noise terms, flicker omitted."""
    cfg = env.config.reward
    return cfg.w_mean * mean_term(frame, cfg) + cfg.w_noise * r_noise(frame)


class NelderMeadController:
    """Online Nelder-Mead: every frame evaluates one simplex point.

    After the search terminates the best point found is held.
    """

    name = "nm"

    def __init__(self, budget: int = 200, tol: float = 1e-3, lower=None, upper=None):
        self.budget = budget
        self.tol = tol
        self.lower = baselines.PARAM_LOWER if lower is None else np.asarray(lower, float)
        self.upper = baselines.PARAM_UPPER if upper is None else np.asarray(upper, float)
        self.reset()

    def reset(self) -> None:
        self._search = None
        self.result: Optional[baselines.SearchResult] = None
        self._hold: Optional[ExposureParams] = None

    @property
    def evaluations(self) -> int:
        return self.result.evaluations if self.result is not None else 0

    def next_params(self, env: ExposureEnv) -> ExposureParams:
        if self._hold is not None:
            return self._hold
        score = single_frame_score(env.frame, env)
        try:
            if self._search is None:
                self._search = baselines.nelder_mead_search(
                    baselines.to_internal(env.params), self.lower, self.upper, self.budget,
                    baselines.PARAM_STEP, self.tol)
                next(self._search)  # first point is the current parameters
            point = self._search.send(score)
        except StopIteration as stop:
            self.result = stop.value
            self._hold = baselines.from_internal(self.result.best)
            return self._hold
        return baselines.from_internal(point)


CONTROLLERS = ("drl", "builtin", "nm", "frozen", "random")


# --- episode evaluation -----------------------------------------------------------

@dataclass
class EpisodeReport:
    scenario: str
    controller: str
    difficulty: str
    frames_to_converge: Optional[int]
    reward_per_frame: float
    flicker_index: float
    final_mean_intensity: float

    @property
    def converged(self) -> bool:
        return self.frames_to_converge is not None


def describe(spec: Optional[EpisodeSpec]) -> str:
    if spec is None:
        return ""
    sc = spec.scenario
    return f"{sc.kind}:{sc.level_start:.4g}->{sc.level_end:.4g}"


def run_episode_eval(env: ExposureEnv, controller, epsilon: float = DEFAULT_EPSILON,
                     **reset_kwargs) -> EpisodeReport:
    """Run one full episode under ``controller`` and summarize it."""
    env.reset(**reset_kwargs)
    controller.reset()
    rewards, diffs = [], []
    done = False
    while not done:
        _, r, done = env.step_params(controller.next_params(env))
        rewards.append(r)
        diffs.append(env.last_flicker)
    spec = reset_kwargs.get("spec")
    return EpisodeReport(
        scenario=describe(spec),
        controller=controller.name,
        difficulty=env.difficulty,
        frames_to_converge=convergence_index(diffs, epsilon),
        reward_per_frame=float(np.mean(rewards)),
        flicker_index=float(np.mean(diffs)),
        final_mean_intensity=float(env.frame.mean()),
    )


def evaluate_specs(actor_or_controller, specs: Sequence[EpisodeSpec], epsilon: float = DEFAULT_EPSILON,
                   env_config: EnvConfig = EnvConfig()) -> List[EpisodeReport]:
    ctrl = AgentController(actor_or_controller) if isinstance(actor_or_controller, Mlp) else actor_or_controller
    env = DarkroomEnv(env_config)
    return [run_episode_eval(env, ctrl, epsilon, spec=s) for s in specs]


# --- comparisons -------------------------------------------------------------------

CSV_COLUMNS = ("row_type", "controller", "scenario_index", "difficulty", "scenario",
               "frames_to_converge", "reward_per_frame", "flicker_index", "final_mean_intensity",
               "converged_fraction", "median_frames_to_converge", "p90_frames_to_converge")


def ftc_values(reports: Sequence[EpisodeReport]) -> List[float]:
    """frames_to_converge with non-converged episodes mapped to +inf."""
    return [math.inf if r.frames_to_converge is None else float(r.frames_to_converge) for r in reports]


def median_ftc(reports: Sequence[EpisodeReport]) -> float:
    return float(np.median(ftc_values(reports)))


def p90_ftc(reports: Sequence[EpisodeReport]) -> float:
    return float(np.percentile(ftc_values(reports), 90, method="inverted_cdf"))


def _fmt(x) -> str:
    if x is None:
        return "NC"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_rows(results: Dict[str, List[EpisodeReport]]) -> List[dict]:
    rows = []
    for name, reports in results.items():
        for i, r in enumerate(reports):
            rows.append({
                "row_type": "episode", "controller": name, "scenario_index": i,
                "difficulty": r.difficulty, "scenario": r.scenario,
                "frames_to_converge": _fmt(r.frames_to_converge),
                "reward_per_frame": _fmt(r.reward_per_frame),
                "flicker_index": _fmt(r.flicker_index),
                "final_mean_intensity": _fmt(r.final_mean_intensity),
                "converged_fraction": "", "median_frames_to_converge": "", "p90_frames_to_converge": "",
            })
    for name, reports in results.items():
        rows.append({
            "row_type": "summary", "controller": name, "scenario_index": "", "difficulty": "",
            "scenario": "", "frames_to_converge": "",
            "reward_per_frame": _fmt(float(np.mean([r.reward_per_frame for r in reports]))),
            "flicker_index": _fmt(float(np.mean([r.flicker_index for r in reports]))),
            "final_mean_intensity": "",
            "converged_fraction": _fmt(sum(r.converged for r in reports) / len(reports)),
            "median_frames_to_converge": _fmt(median_ftc(reports)),
            "p90_frames_to_converge": _fmt(p90_ftc(reports)),
        })
    return rows


def write_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        w.writerows(rows)


def compare(controllers: Sequence, specs: Sequence[EpisodeSpec], out_path=None,
            epsilon: float = DEFAULT_EPSILON, env_config: EnvConfig = EnvConfig()):
    """Evaluate every controller on every scenario.

    Rows are ordered by controller, then scenario index, followed by one
    summary row per controller. Returns ``(results, rows)``.
    """
    if not controllers or not specs:
        raise ValueError("need at least one controller and one scenario")
    env = DarkroomEnv(env_config)
    results = {}
    for ctrl in controllers:
        results[ctrl.name] = [run_episode_eval(env, ctrl, epsilon, spec=s) for s in specs]
    rows = report_rows(results)
    if out_path is not None:
        write_csv(out_path, rows)
    return results, rows


# --- latency -----------------------------------------------------------------------

MIN_BENCH_ITERATIONS = 1000


@dataclass
class LatencyStats:
    iterations: int
    min_ms: float
    median_ms: float
    p99_ms: float


def _stats(samples: List[float]) -> LatencyStats:
    ms = np.asarray(samples) * 1e3
    return LatencyStats(len(ms), float(ms.min()), float(np.median(ms)), float(np.percentile(ms, 99)))


def bench_latency(actor: Mlp, iterations: int = 10_000, frame_shape=(128, 128),
                  source_shapes=((1200, 1600), (600, 800)), seed: int = 0) -> Dict[str, LatencyStats]:
    """Wall-clock cost of one control decision: vectorize a frame, push it into
    the history and run the deterministic actor.

    Resizing large sources to ``frame_shape`` is timed separately per source
    resolution, since the agent's own cost does not depend on it.
    """
    if iterations < MIN_BENCH_ITERATIONS:
        raise ValueError(f"iterations must be >= {MIN_BENCH_ITERATIONS}")
    rng = np.random.default_rng(seed)
    policy = Policy(actor)
    frames = [rng.random(frame_shape) for _ in range(8)]
    state = initial_state(vectorize_intensity(frames[0]))
    for f in frames:  # warm-up
        state = push_state(state, vectorize_intensity(f))
        policy(state)
    samples = []
    clock = time.perf_counter
    for i in range(iterations):
        f = frames[i % len(frames)]
        t0 = clock()
        state = push_state(state, vectorize_intensity(f))
        policy(state)
        samples.append(clock() - t0)
    out = {"agent": _stats(samples)}
    n_resize = max(10, min(100, iterations // 100))
    for shape in source_shapes:
        src = rng.random(shape)
        rs = []
        for _ in range(n_resize):
            t0 = clock()
            resize_bilinear(src, *frame_shape)
            rs.append(clock() - t0)
        out[f"resize_{shape[1]}x{shape[0]}"] = _stats(rs)
    return out
