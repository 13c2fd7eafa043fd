from .sensor import (GAIN_MAX_DB, GAIN_MIN_DB, L_MAX, L_MIN, T_MAX_MS, T_MIN_MS, CameraModel,
                     ExposureParams, IlluminanceError, render)
from .scenes import GENERATORS, Scene
from .lighting import EPISODE_LENGTH, LightingScenario, illuminance_at, sample_scenario
from .env import DarkroomEnv, EnvConfig, EpisodeSpec, EpisodeStateError, ExposureEnv
from .pack import PackFormatError, dumps_pack, load_pack, loads_pack, make_pack, save_pack
