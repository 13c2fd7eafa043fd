"""Soft actor-critic: twin critics with min-backup, squashed-Gaussian actor and
automatic temperature.

The loss functions are pure (parameters in, loss and gradients out) so they can
be finite-difference checked in isolation; ``SacAgent`` wires them to Adam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..nn import (AdamState, Mlp, NumericError, adam_step, dump_mlp, soft_update,
                  squashed_gaussian)
from .action import ACTION_DIM
from .replay import Batch


@dataclass(frozen=True)
class SacConfig:
    gamma: float = 0.99
    tau: float = 0.05
    batch_size: int = 256
    lr: float = 3e-4
    initial_random_steps: int = 10_000
    total_steps: int = 100_000
    buffer_capacity: int = 1_000_000
    hidden: tuple = (256, 256)
    init_log_alpha: float = 0.0
    target_entropy: float = -float(ACTION_DIM)
    auto_alpha: bool = True
    eval_every: int = 2000
    dtype: str = "float32"
    # time-limit ends are truncations, not terminal states
    bootstrap_on_timeout: bool = True
    # clock fed to the curriculum: "steps" (env steps) or "episodes"
    curriculum_clock: str = "steps"

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.curriculum_clock not in ("steps", "episodes"):
            raise ValueError(f"unknown curriculum clock {self.curriculum_clock!r}")


def _check(loss: float) -> float:
    if not math.isfinite(loss):
        raise NumericError(f"non-finite loss {loss}")
    return loss


def critic_input(state: np.ndarray, action: np.ndarray) -> np.ndarray:
    return np.concatenate((state, action), axis=-1)


def soft_next_value(batch_next_state, actor: Mlp, q1_target: Mlp, q2_target: Mlp,
                    alpha: float, eps: np.ndarray) -> np.ndarray:
    """min(Q1', Q2')(s', a') - alpha * log pi(a'|s') with a' = tanh(mu + sigma * eps)."""
    sample = squashed_gaussian(actor(batch_next_state), eps=eps)
    x = critic_input(batch_next_state, sample.action)
    q_min = np.minimum(q1_target(x)[:, 0], q2_target(x)[:, 0])
    return q_min - alpha * sample.log_prob


def target_q(reward, done, next_value, gamma: float) -> np.ndarray:
    """Bellman target r + gamma * V(s'); terminal transitions keep only r."""
    reward = np.asarray(reward)
    return reward + gamma * (1.0 - np.asarray(done, dtype=reward.dtype)) * np.asarray(next_value)


def critic_loss_and_grads(q: Mlp, state, action, target):
    """J_Q = mean(0.5 * (Q(s, a) - target)^2) and its parameter gradients."""
    out, cache = q.forward_cache(critic_input(state, action))
    resid = out[:, 0] - target
    n = len(resid)
    loss = _check(float(0.5 * np.mean(resid ** 2)))
    grads, _ = q.backward(cache, (resid / n)[:, None])
    return loss, grads


def actor_loss_and_grads(actor: Mlp, q1: Mlp, q2: Mlp, state, eps, alpha: float):
    """J_pi = mean(alpha * log pi(a|s) - min(Q1, Q2)(s, a)), a reparameterized.

    Returns ``(loss, grads, log_prob)``.
    """
    head, a_cache = actor.forward_cache(state)
    sample = squashed_gaussian(head, eps=eps)
    x = critic_input(state, sample.action)
    o1, c1 = q1.forward_cache(x)
    o2, c2 = q2.forward_cache(x)
    q1v, q2v = o1[:, 0], o2[:, 0]
    pick1 = q1v <= q2v
    q_min = np.where(pick1, q1v, q2v)
    n = len(q_min)
    loss = _check(float(np.mean(alpha * sample.log_prob - q_min)))
    # dL/da = -(1/n) dQ_min/da through whichever critic is the minimum
    w1 = pick1.astype(x.dtype)[:, None] / n
    _, gx1 = q1.backward(c1, -w1, param_grads=False, input_grad=True)
    _, gx2 = q2.backward(c2, w1 - 1.0 / n, param_grads=False, input_grad=True)
    k = sample.action.shape[-1]
    g_action = gx1[:, -k:] + gx2[:, -k:]
    g_head = sample.backward(g_action, np.full(n, alpha / n, dtype=head.dtype))
    grads, _ = actor.backward(a_cache, g_head)
    return loss, grads, sample.log_prob


def alpha_loss_and_grad(log_alpha: float, log_prob, target_entropy: float):
    """J(log alpha) = -mean(log_alpha * (log pi + target_entropy))."""
    drive = float(np.mean(np.asarray(log_prob, dtype=np.float64) + target_entropy))
    return _check(-log_alpha * drive), -drive


class SacAgent:
    def __init__(self, state_dim: int, config: SacConfig = SacConfig(),
                 rng: Optional[np.random.Generator] = None, action_dim: int = ACTION_DIM):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.config = config
        dt = np.dtype(config.dtype)
        hid = tuple(config.hidden)
        self.actor = Mlp((state_dim,) + hid + (2 * action_dim,), rng, dt)
        self.q1 = Mlp((state_dim + action_dim,) + hid + (1,), rng, dt)
        self.q2 = Mlp((state_dim + action_dim,) + hid + (1,), rng, dt)
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()
        self.log_alpha = float(config.init_log_alpha)
        self.actor_opt = AdamState.for_params(self.actor.params, lr=config.lr)
        self.q1_opt = AdamState.for_params(self.q1.params, lr=config.lr)
        self.q2_opt = AdamState.for_params(self.q2.params, lr=config.lr)
        self.alpha_opt = AdamState(lr=config.lr, m=[np.zeros(1)], v=[np.zeros(1)])
        self._log_alpha_arr = np.array([self.log_alpha])

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    def act(self, state, rng: Optional[np.random.Generator] = None, deterministic: bool = False):
        head = self.actor(np.asarray(state, dtype=self.actor.dtype))
        return squashed_gaussian(head, rng=rng, deterministic=deterministic).action.astype(np.float64)

    def critic_update(self, batch: Batch, rng: np.random.Generator) -> float:
        eps = rng.standard_normal((len(batch), ACTION_DIM)).astype(self.actor.dtype)
        v_next = soft_next_value(batch.next_state, self.actor, self.q1_target, self.q2_target,
                                 self.alpha, eps)
        y = target_q(batch.reward, batch.done, v_next, self.config.gamma)
        l1, g1 = critic_loss_and_grads(self.q1, batch.state, batch.action, y)
        l2, g2 = critic_loss_and_grads(self.q2, batch.state, batch.action, y)
        adam_step(self.q1.params, g1, self.q1_opt)
        adam_step(self.q2.params, g2, self.q2_opt)
        return 0.5 * (l1 + l2)

    def actor_update(self, batch: Batch, rng: np.random.Generator):
        eps = rng.standard_normal((len(batch), ACTION_DIM)).astype(self.actor.dtype)
        loss, grads, log_prob = actor_loss_and_grads(self.actor, self.q1, self.q2, batch.state,
                                                     eps, self.alpha)
        adam_step(self.actor.params, grads, self.actor_opt)
        return loss, log_prob

    def alpha_update(self, log_prob) -> float:
        if not self.config.auto_alpha:
            return self.alpha
        _, g = alpha_loss_and_grad(self.log_alpha, log_prob, self.config.target_entropy)
        self._log_alpha_arr[0] = self.log_alpha
        adam_step([self._log_alpha_arr], [np.array([g])], self.alpha_opt)
        self.log_alpha = float(self._log_alpha_arr[0])
        return self.alpha

    def update(self, batch: Batch, rng: np.random.Generator):
        """One critic, actor and temperature step, then Polyak-average the targets."""
        c_loss = self.critic_update(batch, rng)
        a_loss, log_prob = self.actor_update(batch, rng)
        self.alpha_update(log_prob)
        soft_update(self.q1_target, self.q1, self.config.tau)
        soft_update(self.q2_target, self.q2, self.config.tau)
        return c_loss, a_loss

    def policy_bytes(self) -> bytes:
        return dump_mlp(self.actor)


class Policy:
    """Deterministic actor wrapper used at evaluation time (never mutated)."""

    def __init__(self, actor: Mlp):
        self.actor = actor

    def __call__(self, state) -> np.ndarray:
        head = self.actor(np.asarray(state, dtype=self.actor.dtype))
        return squashed_gaussian(head, deterministic=True).action.astype(np.float64)
