import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from expolab.baselines import (PARAM_LOWER, PARAM_UPPER, builtin_ae_step, nelder_mead,
                               nelder_mead_optimize, nelder_mead_search, run_search)
from expolab.camsim import CameraModel, ExposureParams, render
from expolab.camsim.sensor import GAIN_MAX_DB, T_MAX_MS, T_MIN_MS
from expolab.nn import NumericError

params_st = st.builds(ExposureParams, st.floats(T_MIN_MS, T_MAX_MS), st.floats(0, GAIN_MAX_DB))


class TestBuiltin:
    def test_setpoint_unchanged(self):
        p = ExposureParams(5.0, 3.0)
        assert builtin_ae_step(0.5, p) == p
        assert builtin_ae_step(0.515, p) == p

    def test_dark_raises_exposure_only(self):
        p = ExposureParams(5.0, 3.0)
        q = builtin_ae_step(0.25, p)
        assert q.exposure_time_ms > p.exposure_time_ms and q.gain_db == p.gain_db
        assert q.exposure_time_ms == pytest.approx(5.0 * math.sqrt(2))

    def test_pinned_raises_gain(self):
        q = builtin_ae_step(0.25, ExposureParams(100.0, 10.0))
        assert q.exposure_time_ms == 100.0
        assert q.gain_db - 10.0 == pytest.approx(20 * 0.5 * math.log10(2))
        assert q.gain_db - 10.0 == pytest.approx(3.0103, abs=1e-4)

    def test_bright_lowers_exposure_before_gain(self):
        q = builtin_ae_step(0.9, ExposureParams(20.0, 12.0))
        assert q.exposure_time_ms < 20.0 and q.gain_db == 12.0
        q = builtin_ae_step(0.9, ExposureParams(T_MIN_MS, 12.0))
        assert q.exposure_time_ms == T_MIN_MS and q.gain_db < 12.0

    def test_black_frame_finite(self):
        q = builtin_ae_step(0.0, ExposureParams(1.0, 0.0))
        assert q.exposure_time_ms > 1.0 and math.isfinite(q.exposure_time_ms)

    @given(st.floats(0, 1), st.floats(0, 1), params_st)
    def test_monotone(self, m1, m2, p):
        dark, bright = min(m1, m2), max(m1, m2)
        a, b = builtin_ae_step(dark, p), builtin_ae_step(bright, p)
        assert a.exposure_time_ms >= b.exposure_time_ms
        assert a.gain_db >= b.gain_db

    def test_fixed_point_over_random_scenes(self):
        cam = CameraModel().without_noise()
        rng = np.random.default_rng(0)
        for _ in range(100):
            refl = np.full((16, 16), rng.uniform(0.2, 1.0))
            lum = float(np.exp(rng.uniform(np.log(0.01), np.log(100))))
            p = ExposureParams.sample(rng)
            means = []
            for _ in range(80):
                m = float(render(refl, lum, p, cam).mean())
                means.append(m)
                p = builtin_ae_step(m, p)
            inside = [abs(m - 0.5) < 0.02 for m in means]
            first = inside.index(True)
            assert all(inside[first:]), (lum, means)
            assert first < 60


def quadratic(x):
    return -((x[0] - 2.0) ** 2 + (x[1] - 3.0) ** 2)


BOX_LO, BOX_HI = np.array([-10.0, -10.0]), np.array([10.0, 10.0])


class TestNelderMead:
    def test_converges_to_known_optimum(self):
        res = nelder_mead(quadratic, [-6.0, 8.0], BOX_LO, BOX_HI, budget=100,
                          initial_step=[1.0, 1.0])
        assert res.converged
        assert res.evaluations <= 100
        assert np.max(np.abs(res.best - [2.0, 3.0])) < 1e-3

    def test_matches_scipy_point_sequence(self):
        # Same coefficients and initial simplex: while no point leaves the box the
        # evaluation sequence must coincide with scipy's implementation.
        x0, step = np.array([-6.0, 8.0]), np.array([1.0, 1.0])
        ours = nelder_mead(quadratic, x0, BOX_LO, BOX_HI, budget=40, initial_step=step, tol=0.0)
        seen = []

        def f(x):
            seen.append(np.array(x))
            return -quadratic(x)

        simplex = np.array([x0, x0 + [step[0], 0], x0 + [0, step[1]]])
        minimize(f, x0, method="Nelder-Mead",
                 options=dict(initial_simplex=simplex, maxfev=40, xatol=0, fatol=0, adaptive=False))
        n = 30
        ours_pts = np.array([p for p, _ in ours.trace[:n]])
        assert np.allclose(ours_pts, np.array(seen[:n]), rtol=0, atol=1e-12)
        assert scipy_reaches_same_optimum()

    def test_stationary_start(self):
        res = nelder_mead(quadratic, [2.0, 3.0], BOX_LO, BOX_HI, budget=200, initial_step=[0.5, 0.5])
        assert res.converged
        assert np.max(np.abs(res.best - [2.0, 3.0])) < 1e-3

    def test_trace_bookkeeping(self):
        res = nelder_mead(quadratic, [0.0, 0.0], BOX_LO, BOX_HI, budget=17, initial_step=[1.0, 1.0])
        assert len(res.trace) == res.evaluations == 17
        assert not res.converged
        assert res.best_value == max(v for _, v in res.trace)

    def test_never_leaves_box(self):
        # optimum far outside the box: the search presses against the bounds
        lo, hi = np.array([0.0, 0.0]), np.array([1.0, 1.0])
        res = nelder_mead(lambda x: x[0] + 2 * x[1], [0.5, 0.5], lo, hi, budget=80,
                          initial_step=[0.3, 0.3])
        pts = np.array([p for p, _ in res.trace])
        assert np.all(pts >= lo) and np.all(pts <= hi)
        assert np.allclose(res.best, [1.0, 1.0], atol=1e-3)

    @settings(max_examples=30)
    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-30, 30), st.floats(-30, 30))
    def test_box_property(self, x, y, cx, cy):
        res = nelder_mead(lambda p: -((p[0] - cx) ** 2 + (p[1] - cy) ** 2), [x, y], BOX_LO, BOX_HI,
                          budget=60, initial_step=[2.0, 2.0])
        pts = np.array([p for p, _ in res.trace])
        assert np.all(pts >= BOX_LO) and np.all(pts <= BOX_HI)

    def test_non_finite_objective(self):
        with pytest.raises(NumericError):
            nelder_mead(lambda x: math.nan, [0.0, 0.0], BOX_LO, BOX_HI, budget=10)

    def test_small_budget_rejected(self):
        with pytest.raises(ValueError):
            run_search(quadratic, nelder_mead_search([0.0, 0.0], BOX_LO, BOX_HI, 2, [1.0, 1.0]))

    def test_parameter_space_wrapper(self):
        target = (math.log(5.0), 12.0)

        def obj(t_ms, g_db):
            return -((math.log(t_ms) - target[0]) ** 2 + (g_db - target[1]) ** 2 / 36)

        best, evals, trace = nelder_mead_optimize(obj, ExposureParams(0.1, 0.0), budget=150)
        assert len(trace) == evals <= 150
        assert best.exposure_time_ms == pytest.approx(5.0, rel=1e-2)
        assert best.gain_db == pytest.approx(12.0, abs=0.05)
        for p, _ in trace:
            assert T_MIN_MS <= p.exposure_time_ms <= T_MAX_MS and 0 <= p.gain_db <= GAIN_MAX_DB
        assert PARAM_LOWER[0] == pytest.approx(math.log(T_MIN_MS))
        assert PARAM_UPPER[1] == GAIN_MAX_DB


def scipy_reaches_same_optimum():
    res = minimize(lambda x: -quadratic(x), [-6.0, 8.0], method="Nelder-Mead",
                   options=dict(xatol=1e-6, fatol=1e-12))
    return np.max(np.abs(res.x - [2.0, 3.0])) < 1e-3
