import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expolab.camsim import (CameraModel, DarkroomEnv, EnvConfig, EpisodeSpec, EpisodeStateError,
                            ExposureParams, IlluminanceError, LightingScenario, PackFormatError,
                            Scene, dumps_pack, illuminance_at, loads_pack, make_pack, render,
                            sample_scenario)
from expolab.camsim.scenes import GENERATORS
from expolab.percept import RewardConfig

NOISELESS = CameraModel().without_noise()


class TestLighting:
    def test_constant(self):
        assert illuminance_at(LightingScenario.constant(1.0), 37) == 1.0

    def test_step(self):
        sc = LightingScenario("step", 0.1, 10.0, change_step=50)
        assert illuminance_at(sc, 49) == 0.1
        assert illuminance_at(sc, 50) == 10.0

    def test_ramp_midpoint(self):
        # 0 -> 100 is outside the illuminance domain; the nearest legal ramp has the same midpoint.
        sc = LightingScenario("linear_ramp", 0.01, 99.99)
        assert illuminance_at(sc, 100, 200) == pytest.approx(50.0, abs=1e-12)
        assert illuminance_at(sc, 0) == 0.01 and illuminance_at(sc, 200) == 99.99

    def test_sinusoid_extremes(self):
        sc = LightingScenario("sinusoid", 0.1, 10.0, period=80)
        assert illuminance_at(sc, 0) == pytest.approx(0.1)
        assert illuminance_at(sc, 40) == pytest.approx(10.0)
        assert illuminance_at(sc, 80) == pytest.approx(0.1)
        vals = [illuminance_at(sc, k) for k in range(201)]
        assert min(vals) >= 0.1 - 1e-12 and max(vals) <= 10.0 + 1e-12

    @pytest.mark.parametrize("kind,period", [("sinusoid", 50), ("sinusoid", 64), ("linear_ramp", 0)])
    def test_levels_stay_within_scenario_range(self, kind, period):
        rng = np.random.default_rng(0)
        for _ in range(200):
            lo = float(np.exp(rng.uniform(np.log(0.01), np.log(1.0))))
            sc = LightingScenario(kind, lo, 100.0, period=period)
            vals = [illuminance_at(sc, k) for k in range(201)]
            assert min(vals) >= lo and max(vals) <= 100.0

    def test_invalid_scenarios(self):
        with pytest.raises(ValueError):
            LightingScenario("constant", 1.0, 2.0)
        with pytest.raises(ValueError):
            LightingScenario("step", 0.0, 2.0)
        with pytest.raises(ValueError):
            LightingScenario("sinusoid", 1.0, 2.0, period=0)

    @pytest.mark.parametrize("seed", range(50))
    def test_sampler_ranges(self, seed):
        easy = sample_scenario("easy", np.random.default_rng(seed))
        assert easy.kind == "constant" and 0.5 <= easy.level_start <= 5
        normal = sample_scenario("normal", np.random.default_rng(seed))
        assert normal.kind == "constant"
        assert 0.01 <= normal.level_start <= 0.5 or 5 <= normal.level_start <= 100
        hard = sample_scenario("hard", np.random.default_rng(seed))
        ratio = hard.level_end / hard.level_start
        assert ratio >= 10 - 1e-9 or ratio <= 0.1 + 1e-12
        assert hard.kind in ("step", "linear_ramp", "sinusoid")

    def test_sampler_deterministic(self):
        for level in ("easy", "normal", "hard"):
            a = sample_scenario(level, np.random.default_rng(11))
            assert a == sample_scenario(level, np.random.default_rng(11))

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            sample_scenario("extreme", np.random.default_rng(0))


class TestRender:
    def test_black_at_minimum(self):
        refl = Scene("value_noise", 2).reflectance
        img = render(refl, 0.01, ExposureParams(0.05, 0.0), NOISELESS)
        assert img.max() <= 1e-4

    def test_mid_grey(self):
        img = render(np.full((8, 8), 0.5), 1.0, ExposureParams(10.0, 0.0), NOISELESS)
        assert np.all(img == 0.5)

    def test_saturated(self):
        img = render(np.ones((8, 8)), 10.0, ExposureParams(100.0, 20.0), NOISELESS)
        assert np.all(img == 1.0)

    def test_illuminance_domain(self):
        with pytest.raises(IlluminanceError):
            render(np.ones((8, 8)), 0.001, ExposureParams(1.0, 0.0), NOISELESS)
        with pytest.raises(IlluminanceError):
            render(np.ones((8, 8)), 101.0, ExposureParams(1.0, 0.0), NOISELESS)

    def test_noise_requires_rng(self):
        with pytest.raises(ValueError):
            render(np.ones((8, 8)), 1.0, ExposureParams(1.0, 0.0), CameraModel())

    @settings(max_examples=60)
    @given(st.floats(0.05, 100), st.floats(0.05, 100), st.floats(0, 40), st.floats(0, 40),
           st.floats(0.01, 100))
    def test_monotone(self, t1, t2, g1, g2, lum):
        refl = Scene("ramp", 5, 16, 16).reflectance
        lo = render(refl, lum, ExposureParams(min(t1, t2), min(g1, g2)), NOISELESS)
        hi = render(refl, lum, ExposureParams(max(t1, t2), max(g1, g2)), NOISELESS)
        assert np.all(hi >= lo)

    @settings(max_examples=30)
    @given(st.floats(0.05, 100), st.floats(0, 40), st.floats(0.01, 100), st.integers(0, 2**31))
    def test_range_with_noise(self, t, g, lum, seed):
        img = render(Scene("checker", 1, 16, 16).reflectance, lum, ExposureParams(t, g),
                     CameraModel(), np.random.default_rng(seed))
        assert img.min() >= 0.0 and img.max() <= 1.0 and np.all(np.isfinite(img))

    def test_deterministic(self):
        refl = Scene("shapes", 9).reflectance
        p = ExposureParams(3.0, 12.0)
        a = render(refl, 2.0, p, CameraModel(), np.random.default_rng(5))
        b = render(refl, 2.0, p, CameraModel(), np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_variance_grows_with_gain(self):
        refl = np.full((100, 100), 0.5)
        # signal 0.005: mid-grey at 40 dB, so clipping does not dominate
        lo = render(refl, 1.0, ExposureParams(0.1, 0.0), CameraModel(), np.random.default_rng(0))
        hi = render(refl, 1.0, ExposureParams(0.1, 40.0), CameraModel(), np.random.default_rng(0))
        assert hi.var(ddof=1) > lo.var(ddof=1)


class TestScenes:
    @pytest.mark.parametrize("gid", GENERATORS)
    def test_valid_and_deterministic(self, gid):
        a, b = Scene(gid, 3), Scene(gid, 3)
        assert a.reflectance.shape == (128, 128)
        assert a.reflectance.min() >= 0 and a.reflectance.max() <= 1
        assert np.array_equal(a.reflectance, b.reflectance)
        assert not a.reflectance.flags.writeable

    def test_unknown_generator(self):
        with pytest.raises(ValueError):
            Scene("fractal", 0)


class TestEnv:
    def test_reset_state(self):
        env = DarkroomEnv()
        s = env.reset("easy", 3)
        assert s.shape == (512,)
        assert 0.5 <= env.illuminance <= 5

    def test_reset_deterministic(self):
        a = DarkroomEnv().reset("hard", 21)
        b = DarkroomEnv().reset("hard", 21)
        assert np.array_equal(a, b)

    def test_episode_length_and_done(self):
        env = DarkroomEnv()
        env.reset("hard", 4)
        rng = np.random.default_rng(0)
        for k in range(1, 201):
            s, r, done = env.step(rng.uniform(-1, 1, 2))
            assert s.shape == (512,) and math.isfinite(r)
            assert done == (k == 200)
        with pytest.raises(EpisodeStateError):
            env.step((0.0, 0.0))

    def test_step_before_reset(self):
        with pytest.raises(EpisodeStateError):
            DarkroomEnv().step((0.0, 0.0))

    def test_zero_action_constant_reward(self):
        cfg = EnvConfig(camera=NOISELESS, randomize=False)
        env = DarkroomEnv(cfg)
        env.reset("easy", 8)
        rewards = [env.step((0.0, 0.0))[1] for _ in range(5)]
        assert len(set(rewards)) == 1

    def test_state_history_order(self):
        env = DarkroomEnv(EnvConfig(camera=NOISELESS))
        env.reset("easy", 2, params=ExposureParams(1.0, 0.0))
        vectors = [env.state[-128:].copy()]
        for _ in range(3):
            env.step((1.0, 0.0))
            vectors.append(env.state[-128:].copy())
        assert np.array_equal(env.state, np.concatenate(vectors))

    def test_spec_replay(self):
        spec = make_pack({"hard": 1}, 3)[0]
        env = DarkroomEnv()
        s1 = env.reset(spec=spec)
        f1 = [env.step((0.3, -0.2))[0] for _ in range(10)]
        s2 = env.reset(spec=spec)
        f2 = [env.step((0.3, -0.2))[0] for _ in range(10)]
        assert np.array_equal(s1, s2)
        assert all(np.array_equal(a, b) for a, b in zip(f1, f2))

    def test_reward_matches_terms(self):
        env = DarkroomEnv(EnvConfig(reward=RewardConfig(w_flicker=0.0, w_noise=0.0)))
        env.reset("easy", 1)
        _, r, _ = env.step((0.0, 0.0))
        dist = np.mean(np.sqrt(np.abs(env.frame - 0.5)))
        assert r == pytest.approx(1.5 * (1 - dist), abs=1e-12)


class TestPack:
    def test_round_trip(self):
        specs = make_pack({"easy": 3, "normal": 3, "hard": 4}, 99)
        assert loads_pack(dumps_pack(specs)) == specs

    def test_counts_and_levels(self):
        specs = make_pack({"easy": 2, "hard": 3}, 1)
        assert [s.difficulty for s in specs] == ["easy"] * 2 + ["hard"] * 3

    def test_comments_ignored(self):
        text = dumps_pack(make_pack({"easy": 1}, 0)) + "# trailing\n\n"
        assert len(loads_pack(text)) == 1

    @pytest.mark.parametrize("line", [
        "difficulty=easy kind=constant",
        "difficulty=easy kind=wobble level_start=1 level_end=1 change_step=0 period=0 scene=uniform scene_seed=0 seed=0",
        "difficulty=easy kind=constant level_start=x level_end=1 change_step=0 period=0 scene=uniform scene_seed=0 seed=0",
        "garbage",
    ])
    def test_malformed(self, line):
        with pytest.raises(PackFormatError):
            loads_pack(line)

    def test_spec_equality_type(self):
        spec = make_pack({"easy": 1}, 0)[0]
        assert isinstance(spec, EpisodeSpec)
