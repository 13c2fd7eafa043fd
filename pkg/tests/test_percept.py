import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expolab.camsim import CameraModel, ExposureParams, Scene, render
from expolab.imaging import DimensionError, RoiSpec, sobel_mean
from expolab.percept import (STATE_DIM, VECTOR_SIZE, RewardConfig, initial_state, mean_term,
                             push_state, r_flk, r_mean_dist, r_noise, r_total, reward_bounds,
                             vectorize_intensity)

from oracles import vectorize_loop

LITERAL = RewardConfig(mean_term_form="literal")


class TestVectorize:
    def test_constant(self):
        v = vectorize_intensity(np.full((64, 48), 0.5))
        assert v.shape == (VECTOR_SIZE,)
        assert np.all(v == 0.5)

    def test_ramp(self):
        ramp = np.tile(np.linspace(0.0, 1.0, 32), (16, 1))
        v = vectorize_intensity(ramp)
        assert np.all(np.diff(v) >= 0)
        assert abs(v[0]) < 1e-6 and abs(v[-1] - 1.0) < 1e-6
        assert np.max(np.abs(v - vectorize_loop(ramp, 0, 0, 32, 16))) < 1e-6

    def test_roi_isolation(self):
        img = np.full((32, 32), 0.9)
        img[:, :16] = 0.2
        v = vectorize_intensity(img, RoiSpec(0, 0, 16, 32))
        assert np.allclose(v, 0.2, rtol=0, atol=1e-15)

    def test_invalid_roi(self):
        with pytest.raises(DimensionError):
            vectorize_intensity(np.zeros((16, 16)), RoiSpec(10, 10, 8, 8))

    def test_random_against_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            h, w = rng.integers(8, 60, size=2)
            img = rng.random((h, w))
            x0, y0 = int(rng.integers(0, w - 7)), int(rng.integers(0, h - 7))
            roi = RoiSpec(x0, y0, int(rng.integers(8, w - x0 + 1)), int(rng.integers(8, h - y0 + 1)))
            got = vectorize_intensity(img, roi)
            assert np.max(np.abs(got - vectorize_loop(img, roi.x0, roi.y0, roi.w, roi.h))) < 1e-6

    @settings(max_examples=50)
    @given(arrays(np.float64, (12, 20), elements=st.floats(0, 1)))
    def test_vertical_flip_invariance(self, img):
        a = vectorize_intensity(img)
        b = vectorize_intensity(img[::-1, :])
        assert np.max(np.abs(a - b)) <= 1e-12


class TestHistory:
    def test_shift(self):
        parts = [np.full(VECTOR_SIZE, k / 10) for k in range(5)]
        state = np.concatenate(parts[:4])
        out = push_state(state, parts[4])
        assert np.array_equal(out, np.concatenate(parts[1:]))

    def test_saturation(self):
        state = np.random.default_rng(1).random(STATE_DIM)
        vs = [np.full(VECTOR_SIZE, k / 4) for k in range(4)]
        for v in vs:
            state = push_state(state, v)
        assert np.array_equal(state, np.concatenate(vs))
        assert state.shape == (512,)

    def test_initial_repeats(self):
        v = np.linspace(0, 1, VECTOR_SIZE)
        s = initial_state(v)
        assert s.shape == (512,)
        assert all(np.array_equal(s[i * 128:(i + 1) * 128], v) for i in range(4))


class TestRewardTerms:
    def test_mean_dist_closed_forms(self):
        assert r_mean_dist(np.full((4, 4), 0.5)) == 0.0
        assert r_mean_dist(np.ones((4, 4))) == pytest.approx(math.sqrt(0.5))
        assert r_mean_dist(np.array([[0.25, 0.75]])) == pytest.approx(0.5)

    def test_flicker(self):
        a = np.random.default_rng(2).random((8, 8))
        assert r_flk(a, a) == 0.0
        assert r_flk(np.zeros((8, 8)), np.ones((8, 8))) == 1.0
        with pytest.raises(DimensionError):
            r_flk(np.zeros((8, 8)), np.zeros((8, 9)))

    def test_flicker_matches_loop(self):
        rng = np.random.default_rng(3)
        a, b = rng.random((9, 7)), rng.random((9, 7))
        ref = sum(abs(a[i, j] - b[i, j]) for i in range(9) for j in range(7)) / 63
        assert abs(r_flk(a, b) - ref) < 1e-12

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_flicker_symmetry_and_triangle(self, x, y, z):
        a, b, c = (np.full((4, 4), v) for v in (x, y, z))
        assert r_flk(a, b) == r_flk(b, a)
        assert r_flk(a, c) <= r_flk(a, b) + r_flk(b, c) + 1e-15

    def test_noise_delegates(self):
        img = np.random.default_rng(4).random((10, 10))
        assert r_noise(img) == sobel_mean(img)
        assert r_noise(np.full((5, 5), 0.3)) == 0.0

    def test_noise_grows_with_sensor_noise(self):
        scene = Scene("uniform", 3)
        params = ExposureParams(1.0, 40.0)
        cam = CameraModel()
        clean = render(scene.reflectance, 0.02, params, cam.without_noise())
        noisy = render(scene.reflectance, 0.02, params, cam, np.random.default_rng(0))
        assert r_noise(noisy) > r_noise(clean)


class TestTotal:
    def test_mid_tone_closeness(self):
        f = np.full((8, 8), 0.5)
        assert r_total(f, f) == 1.5

    def test_saturated_closeness(self):
        f = np.ones((8, 8))
        assert r_total(f, f) == pytest.approx(1.5 * (1 - math.sqrt(0.5)))

    def test_literal_form(self):
        f = np.full((8, 8), 0.5)
        assert r_total(f, f, LITERAL) == 0.0

    def test_unique_maximum_at_mid_tone(self):
        # k/256 contains 0.5 exactly; on a k/255 grid 127 and 128 tie.
        levels = np.arange(256) / 256
        scores = [mean_term(np.full((4, 4), v)) for v in levels]
        best = int(np.argmax(scores))
        assert best == int(np.argmin(np.abs(levels - 0.5)))
        assert sum(s == scores[best] for s in scores) == 1

    @settings(max_examples=50)
    @given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)),
           arrays(np.float64, (6, 6), elements=st.floats(0, 1)),
           st.sampled_from([RewardConfig(), LITERAL]))
    def test_bounded(self, a, b, cfg):
        lo, hi = reward_bounds(cfg)
        r = r_total(a, b, cfg)
        assert math.isfinite(r)
        assert lo - 1e-12 <= r <= hi + 1e-12

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RewardConfig(target=1.0)
        with pytest.raises(ValueError):
            RewardConfig(mean_term_form="inverse")
