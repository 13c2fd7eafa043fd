"""A small numpy MLP toolkit: forward/backward, Adam, Polyak averaging, the
tanh-squashed Gaussian policy head and a binary checkpoint format.

Weights are stored as ``(fan_in, fan_out)`` matrices so a batch ``x`` of shape
``(B, fan_in)`` maps through ``x @ W + b``.
"""

from __future__ import annotations

import contextlib
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class NumericError(FloatingPointError):
    """A loss or network output went non-finite."""


class ShapeError(ValueError):
    """Mismatched dimensions between networks, parameters or inputs."""


# Records ReLU on/off patterns of every forward pass while active; the
# finite-difference checks use it to skip coordinates that straddle a kink.
_relu_log: Optional[list] = None


@contextlib.contextmanager
def record_relu_patterns():
    global _relu_log
    prev, _relu_log = _relu_log, []
    try:
        yield _relu_log
    finally:
        _relu_log = prev


class Mlp:
    def __init__(self, dims: Sequence[int], rng: Optional[np.random.Generator] = None,
                 dtype=np.float64):
        if len(dims) < 2 or min(dims) < 1:
            raise ShapeError(f"invalid layer dims {dims}")
        self.dims = tuple(int(d) for d in dims)
        self.dtype = np.dtype(dtype)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)).astype(self.dtype))
            self.biases.append(rng.uniform(-bound, bound, fan_out).astype(self.dtype))

    @property
    def params(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "Mlp":
        new = object.__new__(Mlp)
        new.dims, new.dtype = self.dims, self.dtype
        new.weights = [w.copy() for w in self.weights]
        new.biases = [b.copy() for b in self.biases]
        return new

    def astype(self, dtype) -> "Mlp":
        new = self.copy()
        new.dtype = np.dtype(dtype)
        new.weights = [w.astype(dtype) for w in new.weights]
        new.biases = [b.astype(dtype) for b in new.biases]
        return new

    def forward(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward_cache(x)
        return out

    __call__ = forward

    def forward_cache(self, x: np.ndarray):
        x = np.asarray(x, dtype=self.dtype)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.dims[0]:
            raise ShapeError(f"input width {x.shape[1]} != network input {self.dims[0]}")
        inputs = []
        h = x
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
                if _relu_log is not None:
                    _relu_log.append(h > 0)
        return (h[0] if single else h), (inputs, single)

    def backward(self, cache, grad_out: np.ndarray, param_grads: bool = True,
                 input_grad: bool = False):
        """Backpropagate ``grad_out`` (dLoss/dOutput).

        Returns ``(grads, grad_x)``; ``grads`` follows the order of ``params``.
        The rectifier derivative at exactly zero is taken as 0.
        """
        inputs, single = cache
        g = np.asarray(grad_out, dtype=self.dtype)
        if single:
            g = g[None, :]
        grads: List[Optional[np.ndarray]] = [None] * (2 * self.n_layers)
        for i in range(self.n_layers - 1, -1, -1):
            h_in = inputs[i]
            if param_grads:
                grads[2 * i] = h_in.T @ g
                grads[2 * i + 1] = g.sum(axis=0)
            if i > 0 or input_grad:
                g = g @ self.weights[i].T
                if i > 0:
                    # inputs[i] is the post-ReLU activation of the previous layer
                    g = g * (h_in > 0)
        grad_x = None
        if input_grad:
            grad_x = g[0] if single else g
        return grads, grad_x


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def value_and_grad(net: Mlp, x: np.ndarray,
                   loss_fn: Callable[[np.ndarray], Tuple[float, np.ndarray]]):
    """Evaluate ``loss_fn(net(x))`` and its gradient w.r.t. every parameter.

    ``loss_fn`` returns the scalar loss and dLoss/dOutput.
    """
    out, cache = net.forward_cache(x)
    loss, g_out = loss_fn(out)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss {loss}")
    grads, _ = net.backward(cache, g_out)
    return float(loss), grads


@dataclass
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], **kw) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kw)


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState):
    """Bias-corrected Adam update, applied in place; returns ``params``."""
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.step += 1
    c1 = 1.0 - state.beta1 ** state.step
    c2 = 1.0 - state.beta2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeError(f"shape mismatch: param {p.shape}, grad {np.shape(g)}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


def soft_update(target: Mlp, online: Mlp, tau: float) -> Mlp:
    """target <- (1 - tau) * target + tau * online, in place."""
    if target.dims != online.dims:
        raise ShapeError(f"architectures differ: {target.dims} vs {online.dims}")
    for t, o in zip(target.params, online.params):
        t *= 1.0 - tau
        t += tau * o
    return target


def _log1m_tanh_sq(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), stable for large |u|."""
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


@dataclass
class SquashedSample:
    """One reparameterized draw from the tanh-squashed Gaussian, with its
    intermediates kept for the backward pass."""

    action: np.ndarray
    log_prob: np.ndarray
    u: np.ndarray
    eps: np.ndarray
    std: np.ndarray
    in_range: np.ndarray

    def backward(self, g_action: np.ndarray, g_log_prob: np.ndarray) -> np.ndarray:
        """Map dL/daction and dL/dlog_prob back to dL/d(head output)."""
        g_lp = np.asarray(g_log_prob)[..., None]
        g_u = g_action * (1.0 - self.action ** 2) + g_lp * (2.0 * np.tanh(self.u))
        g_mean = g_u
        g_log_std = (g_u * self.std * self.eps - g_lp) * self.in_range
        return np.concatenate((g_mean, g_log_std), axis=-1)


def squashed_gaussian(head: np.ndarray, rng: Optional[np.random.Generator] = None,
                      deterministic: bool = False, eps: Optional[np.ndarray] = None) -> SquashedSample:
    """Sample ``tanh(mean + std * eps)`` from a head of ``[mean, log_std]``.

    ``log_prob`` includes the tanh change-of-variables correction. In
    deterministic mode the action is ``tanh(mean)``.
    """
    head = np.asarray(head)
    if not np.all(np.isfinite(head)):
        raise NumericError("non-finite policy head output")
    k = head.shape[-1] // 2
    mean, raw_log_std = head[..., :k], head[..., k:]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    in_range = (raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX)
    std = np.exp(log_std)
    if deterministic:
        eps = np.zeros_like(mean)
    elif eps is None:
        if rng is None:
            raise ValueError("rng or eps required for stochastic sampling")
        eps = rng.standard_normal(mean.shape).astype(head.dtype, copy=False)
    u = mean + std * eps
    action = np.tanh(u)
    log_prob = np.sum(-0.5 * eps ** 2 - log_std - _HALF_LOG_2PI - _log1m_tanh_sq(u), axis=-1)
    return SquashedSample(action, log_prob, u, eps, std, in_range)


def gaussian_tanh_log_density(action: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> float:
    """Density of ``action`` under tanh(N(mean, exp(log_std)^2)), evaluated
    directly from the inverse transform (independent of ``squashed_gaussian``)."""
    u = np.arctanh(action)
    std = np.exp(log_std)
    normal = -0.5 * ((u - mean) / std) ** 2 - log_std - _HALF_LOG_2PI
    return float(np.sum(normal - np.log(1.0 - action ** 2)))


# --- checkpoints ---------------------------------------------------------------
#
# Layout (all little-endian):
#   8 bytes   magic b"EXPOMLP\0"
#   uint32    format version (1)
#   uint32    number of dims D
#   D*uint32  layer dims
#   float64[] parameters, layer by layer: W (fan_in x fan_out, row-major) then b

MAGIC = b"EXPOMLP\0"
VERSION = 1


class CheckpointError(ValueError):
    pass


def dump_mlp(net: Mlp) -> bytes:
    head = MAGIC + struct.pack(f"<II{len(net.dims)}I", VERSION, len(net.dims), *net.dims)
    body = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in net.params)
    return head + body


def load_mlp(data: bytes, dtype=np.float64) -> Mlp:
    if data[:8] != MAGIC:
        raise CheckpointError("bad checkpoint magic")
    if len(data) < 16:
        raise CheckpointError("truncated checkpoint header")
    version, n = struct.unpack_from("<II", data, 8)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off = 16 + 4 * n
    if len(data) < off:
        raise CheckpointError("truncated checkpoint header")
    dims = struct.unpack_from(f"<{n}I", data, 16)
    net = Mlp(dims, dtype=dtype)
    for p in net.params:
        nbytes = p.size * 8
        if len(data) < off + nbytes:
            raise CheckpointError("truncated checkpoint payload")
        p[...] = np.frombuffer(data, dtype="<f8", count=p.size, offset=off).reshape(p.shape)
        off += nbytes
    if off != len(data):
        raise CheckpointError(f"{len(data) - off} trailing bytes in checkpoint")
    return net


def save_mlp(path, net: Mlp) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_mlp(net))


def read_mlp(path, dtype=np.float64) -> Mlp:
    with open(path, "rb") as fh:
        return load_mlp(fh.read(), dtype)
