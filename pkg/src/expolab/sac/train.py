"""The SAC training loop over curriculum-scheduled darkroom episodes."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..harness.metrics import DEFAULT_EPSILON, convergence_index
from ..nn import Mlp
from .agent import SacAgent, SacConfig
from .curriculum import CurriculumSchedule, curriculum_probs, draw_level
from .replay import ReplayBuffer

log = logging.getLogger(__name__)

LOG_COLUMNS = ("step", "episode", "difficulty", "return", "frames_to_converge", "alpha",
               "critic_loss", "actor_loss")
EVAL_COLUMNS = ("step", "reward_per_frame", "median_frames_to_converge", "converged_fraction", "best")
VALIDATION_SEED = 7_000_001


@dataclass
class TrainResult:
    agent: SacAgent
    best_actor: Mlp
    best_score: float
    log_rows: List[dict] = field(default_factory=list)
    eval_rows: List[dict] = field(default_factory=list)


def _f(x) -> str:
    return "" if x is None else repr(float(x))


def _ftc(k) -> str:
    return "NC" if k is None else str(k)


def default_validation_specs(seed: int = VALIDATION_SEED):
    from ..camsim.pack import make_pack
    return make_pack({"easy": 4, "normal": 4, "hard": 4}, seed)


def train(env_factory: Callable, config: SacConfig = SacConfig(),
          schedule: CurriculumSchedule = CurriculumSchedule(), seed: int = 0,
          log_path=None, eval_log_path=None, validation_specs: Optional[Sequence] = None,
          epsilon: float = DEFAULT_EPSILON) -> TrainResult:
    """Train an agent; fully deterministic for a given ``seed``.

    Every ``eval_every`` steps the deterministic policy is scored on
    ``validation_specs`` (mean reward per frame) and the best actor is kept.
    """
    from ..harness.evaluate import evaluate_specs, median_ftc

    root = np.random.SeedSequence(seed)
    init_rng, env_rng, act_rng, upd_rng, cur_rng = (np.random.default_rng(s) for s in root.spawn(5))
    env = env_factory()
    state_dim = env.config.state_dim
    agent = SacAgent(state_dim, config, init_rng)
    buffer = ReplayBuffer(config.buffer_capacity, state_dim,
                          reserve=min(config.buffer_capacity, config.total_steps),
                          dtype=np.dtype(config.dtype))
    if validation_specs is None:
        validation_specs = default_validation_specs()

    result = TrainResult(agent, agent.actor.copy(), -np.inf)
    log_fh = open(log_path, "w", newline="") if log_path else None
    eval_fh = open(eval_log_path, "w", newline="") if eval_log_path else None
    log_w = csv.DictWriter(log_fh, LOG_COLUMNS) if log_fh else None
    eval_w = csv.DictWriter(eval_fh, EVAL_COLUMNS) if eval_fh else None
    if log_w:
        log_w.writeheader()
    if eval_w:
        eval_w.writeheader()

    try:
        step = 0
        episode = 0
        while step < config.total_steps:
            clock = step if config.curriculum_clock == "steps" else episode
            level = draw_level(curriculum_probs(schedule, clock), cur_rng.random())
            state = env.reset(level, np.random.default_rng(env_rng.integers(2**63)))
            ep_return, diffs, c_losses, a_losses = 0.0, [], [], []
            done = False
            while not done and step < config.total_steps:
                step += 1
                if step <= config.initial_random_steps:
                    action = act_rng.uniform(-1.0, 1.0, 2)
                else:
                    action = agent.act(state, act_rng)
                next_state, reward, done = env.step(action)
                terminal = done and not config.bootstrap_on_timeout
                buffer.add(state, action, reward, next_state, terminal)
                state = next_state
                ep_return += reward
                diffs.append(env.last_flicker)
                if step > config.initial_random_steps and len(buffer) >= config.batch_size:
                    batch = buffer.sample(config.batch_size, upd_rng)
                    try:
                        c_loss, a_loss = agent.update(batch, upd_rng)
                    except FloatingPointError as exc:
                        raise FloatingPointError(f"at step {step}, episode {episode}: {exc}") from exc
                    c_losses.append(c_loss)
                    a_losses.append(a_loss)
                if config.eval_every and step % config.eval_every == 0 and validation_specs:
                    reports = evaluate_specs(agent.actor, validation_specs, epsilon, env.config)
                    score = float(np.mean([r.reward_per_frame for r in reports]))
                    best = score > result.best_score
                    if best:
                        result.best_score = score
                        result.best_actor = agent.actor.copy()
                    row = {"step": step, "reward_per_frame": _f(score),
                           "median_frames_to_converge": _f(median_ftc(reports)),
                           "converged_fraction": _f(np.mean([r.converged for r in reports])),
                           "best": int(best)}
                    result.eval_rows.append(row)
                    if eval_w:
                        eval_w.writerow(row)
                        eval_fh.flush()
                    log.info("step %d: validation reward/frame %.4f, median ftc %s, alpha %.4g",
                             step, score, row["median_frames_to_converge"], agent.alpha)
            row = {
                "step": step, "episode": episode, "difficulty": level, "return": _f(ep_return),
                "frames_to_converge": _ftc(convergence_index(diffs, epsilon)),
                "alpha": _f(agent.alpha),
                "critic_loss": _f(np.mean(c_losses)) if c_losses else "",
                "actor_loss": _f(np.mean(a_losses)) if a_losses else "",
            }
            result.log_rows.append(row)
            if log_w:
                log_w.writerow(row)
                log_fh.flush()
            episode += 1
    finally:
        if log_fh:
            log_fh.close()
        if eval_fh:
            eval_fh.close()
    if not result.eval_rows:
        result.best_actor = agent.actor.copy()
    return result
