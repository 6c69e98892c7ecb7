"""Training-time data mollification for robust classification.

The package couples schedule-driven input corruption (variance-preserving
noising and heat-equation blurring) with intensity-matched label smoothing,
and ships the supporting pieces: soft-label likelihoods, Monte-Carlo
marginal-likelihood estimators, a deterministic desk-scale MLP trainer,
calibration metrics, and compression/spectral analyses of corruptions.
"""

__version__ = "0.1.0"

from .errors import DataError, TrainingDivergedError
from .schedules import ScheduleConfig
from .tensors import ChannelStats

__all__ = [
    "ChannelStats",
    "DataError",
    "ScheduleConfig",
    "TrainingDivergedError",
    "__version__",
]
