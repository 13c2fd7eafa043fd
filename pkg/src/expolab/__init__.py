"""Learned camera exposure control in a synthetic darkroom."""

# camsim must be imported before sac: the environment depends on the action map.
from . import camsim  # noqa: F401
from . import imaging, percept, nn, sac, baselines, dataset_env  # noqa: F401

__version__ = "0.1.0"
