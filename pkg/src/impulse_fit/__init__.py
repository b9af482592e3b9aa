"""Fit the fitness-fatigue impulse-response model and benchmark its optimizers."""
from .dataio import Dataset, SplitPolicy, SyntheticSpec, load_csv, parse_csv
from .model import ModelParams, predict_series
from .objective import ObservationSet, SseObjective, holdout_loss, sse, sse_gradient

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "ModelParams",
    "ObservationSet",
    "SplitPolicy",
    "SseObjective",
    "SyntheticSpec",
    "holdout_loss",
    "load_csv",
    "parse_csv",
    "predict_series",
    "sse",
    "sse_gradient",
]
