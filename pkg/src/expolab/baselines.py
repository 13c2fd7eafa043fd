"""Classical comparators: a one-by-one proportional AE and a Nelder-Mead search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Generator, List, Optional, Sequence, Tuple

import numpy as np

from .camsim.sensor import (GAIN_MAX_DB, GAIN_MIN_DB, T_MAX_MS, T_MIN_MS, ExposureParams)
from .nn import NumericError

SETPOINT = 0.5
KAPPA = 0.5
DEADBAND = 0.02
_MIN_MEAN = 1e-3


def builtin_ae_step(mean_intensity: float, params: ExposureParams, setpoint: float = SETPOINT,
                    kappa: float = KAPPA, deadband: float = DEADBAND) -> ExposureParams:
    """Surrogate built-in AE: move exposure time toward the setpoint first and
    touch the gain only once exposure time is pinned at the bound it is pushing on."""
    if abs(mean_intensity - setpoint) < deadband:
        return params
    ratio = setpoint / max(mean_intensity, _MIN_MEAN)
    t = params.exposure_time_ms
    pinned = (ratio > 1 and t >= T_MAX_MS) or (ratio < 1 and t <= T_MIN_MS)
    if not pinned:
        return ExposureParams.clipped(t * ratio ** kappa, params.gain_db)
    return ExposureParams.clipped(t, params.gain_db + 20.0 * kappa * math.log10(ratio))


# --- Nelder-Mead -----------------------------------------------------------------

@dataclass
class SearchResult:
    best: np.ndarray
    best_value: float
    evaluations: int
    trace: List[Tuple[np.ndarray, float]] = field(default_factory=list)
    converged: bool = False


def _diameter(simplex: Sequence[np.ndarray]) -> float:
    return max(float(np.linalg.norm(a - b)) for i, a in enumerate(simplex) for b in simplex[i + 1:])


def nelder_mead_search(x0, lower, upper, budget: int, initial_step, tol: float = 1e-3,
                       alpha: float = 1.0, gamma: float = 2.0, rho: float = 0.5,
                       sigma: float = 0.5) -> Generator[np.ndarray, float, SearchResult]:
    """Maximizing Nelder-Mead as a coroutine: yields a point, receives its value.

    Every point is projected onto the box [lower, upper] before it is yielded.
    Stops when the simplex diameter falls below ``tol`` or ``budget``
    evaluations have been spent; the generator's return value is the result.
    """
    if budget < 3:
        raise ValueError("budget must be >= 3")
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    proj = lambda p: np.minimum(np.maximum(p, lower), upper)
    trace: List[Tuple[np.ndarray, float]] = []

    def evaluate(p):
        p = proj(p)
        v = yield p
        v = float(v)
        if not math.isfinite(v):
            raise NumericError(f"objective returned {v} at {p}")
        trace.append((p, v))
        return p, v

    def done():
        best_p, best_v = max(trace, key=lambda t: t[1])
        return SearchResult(best_p, best_v, len(trace), trace, converged)

    converged = False
    x0 = proj(np.asarray(x0, dtype=np.float64))
    step = np.asarray(initial_step, dtype=np.float64)
    vertices = [(yield from evaluate(x0))]
    for i in range(len(x0)):
        if len(trace) >= budget:
            return done()
        p = x0.copy()
        # step inward when the start sits on the upper bound
        p[i] += step[i] if x0[i] + step[i] <= upper[i] else -step[i]
        vertices.append((yield from evaluate(p)))

    while len(trace) < budget:
        vertices.sort(key=lambda t: -t[1])
        pts = [v[0] for v in vertices]
        if _diameter(pts) < tol:
            converged = True
            break
        best, worst, second_worst = vertices[0], vertices[-1], vertices[-2]
        centroid = np.mean(pts[:-1], axis=0)
        xr, fr = yield from evaluate(centroid + alpha * (centroid - worst[0]))
        if fr > best[1]:
            if len(trace) >= budget:
                vertices[-1] = (xr, fr)
                break
            xe, fe = yield from evaluate(centroid + gamma * (xr - centroid))
            vertices[-1] = (xe, fe) if fe > fr else (xr, fr)
            continue
        if fr > second_worst[1]:
            vertices[-1] = (xr, fr)
            continue
        if len(trace) >= budget:
            break
        if fr > worst[1]:
            xc, fc = yield from evaluate(centroid + rho * (xr - centroid))
            accept = fc >= fr
        else:
            xc, fc = yield from evaluate(centroid + rho * (worst[0] - centroid))
            accept = fc > worst[1]
        if accept:
            vertices[-1] = (xc, fc)
            continue
        for k in range(1, len(vertices)):
            if len(trace) >= budget:
                break
            vertices[k] = (yield from evaluate(best[0] + sigma * (vertices[k][0] - best[0])))
    return done()


def run_search(objective: Callable[[np.ndarray], float], search) -> SearchResult:
    """Drive a ``nelder_mead_search`` coroutine with ``objective``."""
    try:
        point = next(search)
        while True:
            point = search.send(objective(point))
    except StopIteration as stop:
        return stop.value


def nelder_mead(objective, x0, lower, upper, budget: int = 200, initial_step=None,
                tol: float = 1e-3) -> SearchResult:
    if initial_step is None:
        initial_step = 0.1 * (np.asarray(upper, float) - np.asarray(lower, float))
    return run_search(objective, nelder_mead_search(x0, lower, upper, budget, initial_step, tol))


# Internal coordinates are (ln exposure_ms, gain_db).
PARAM_LOWER = np.array([math.log(T_MIN_MS), GAIN_MIN_DB])
PARAM_UPPER = np.array([math.log(T_MAX_MS), GAIN_MAX_DB])
PARAM_STEP = np.array([math.log(3.0), 6.0])


def to_internal(p: ExposureParams) -> np.ndarray:
    return np.array([math.log(p.exposure_time_ms), p.gain_db])


def from_internal(x) -> ExposureParams:
    return ExposureParams.clipped(math.exp(x[0]), x[1])


def param_search(start: ExposureParams, budget: int, lower=PARAM_LOWER, upper=PARAM_UPPER,
                 step=PARAM_STEP, tol: float = 1e-3):
    return nelder_mead_search(to_internal(start), lower, upper, budget, step, tol)


def nelder_mead_optimize(objective: Callable[[float, float], float], start: ExposureParams,
                         budget: int = 100, tol: float = 1e-3):
    """Maximize ``objective(exposure_ms, gain_db)`` over the parameter box.

    Returns ``(best params, evaluations used, trace)``; the trace holds one
    ``(ExposureParams, value)`` pair per evaluation.
    """
    res = run_search(lambda x: objective(math.exp(x[0]), x[1]), param_search(start, budget, tol=tol))
    trace = [(from_internal(p), v) for p, v in res.trace]
    return from_internal(res.best), res.evaluations, trace
