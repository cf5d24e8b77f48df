"""odelr: dynamic learning-rate scheduling from a latent-ODE model of training runs.

Pipeline: sweep a small trainee problem over parametric schedules, fit a
latent-ODE model to the logged (loss, accuracy, lr) trajectories, then drive
new training runs by predicting which rate sequence maximizes future
validation performance.
"""

from .estimator import LatentOdeEstimator, check_corpus
from .lode import (LodeModel, TrainConfig, load_checkpoint, predict_from_prefix,
                   rank_runs, save_checkpoint, train_lode)
from .scheduler import (DynamicScheduler, ScheduleSegment, SchedulerConfig,
                        best_corpus_run, lr_bounds_from_corpus, next_segment)
from .schedules import ScheduleSpec, eval_schedule, make_spec
from .testbed import (SweepGrid, SyntheticDataset, estimate_sharpness, eos_ratio,
                      evaluate_comparison, make_dataset, run_sweep, train_run)
from .trajectory import (NormalizationSpec, Trajectory, TrajectoryPoint, Window,
                         fit_normalization, parse_corpus, window, write_corpus)

__version__ = "0.1.0"

__all__ = [
    "LatentOdeEstimator", "check_corpus",
    "LodeModel", "TrainConfig", "train_lode", "predict_from_prefix", "rank_runs",
    "save_checkpoint", "load_checkpoint",
    "DynamicScheduler", "SchedulerConfig", "ScheduleSegment", "next_segment",
    "best_corpus_run", "lr_bounds_from_corpus",
    "ScheduleSpec", "eval_schedule", "make_spec",
    "SyntheticDataset", "SweepGrid", "make_dataset", "run_sweep", "train_run",
    "estimate_sharpness", "eos_ratio", "evaluate_comparison",
    "Trajectory", "TrajectoryPoint", "Window", "NormalizationSpec",
    "parse_corpus", "write_corpus", "fit_normalization", "window",
    "__version__",
]
