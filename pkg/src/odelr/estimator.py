"""Scikit-learn style estimator facade over the latent-ODE trajectory model.

Lets the model participate in the wider ecosystem (get_params/set_params,
clone, grid utilities): X is a corpus (sequence of Trajectory), fit trains
the model, predict reconstructs runs from prefixes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .lode import (TrainConfig, eval_reconstruction, load_checkpoint,
                   predict_from_prefix, rank_runs, save_checkpoint, train_lode)
from .trajectory import Trajectory


def check_corpus(X) -> list[Trajectory]:
    """Validate a corpus argument: a non-empty sequence of Trajectory."""
    runs = list(X)
    if not runs:
        raise ValueError("corpus is empty")
    for item in runs:
        if not isinstance(item, Trajectory):
            raise TypeError(f"expected Trajectory items, got {type(item).__name__}")
    return runs


class LatentOdeEstimator(BaseEstimator):
    """Fit a latent-ODE model of training trajectories; predict their futures.

    Parameters mirror TrainConfig. After fit, ``model_`` holds the trained
    model and ``loss_history_`` the per-update training loss.
    """

    def __init__(self, latent_dim=20, hidden_dim=20, mlp_width=20, substeps=4,
                 path_weight=1e-3, n_updates=10_000, batch_size=20, peak_lr=1e-3,
                 prefix_lo=0.05, prefix_hi=0.5, random_state=0):
        self.latent_dim = latent_dim
        self.hidden_dim = hidden_dim
        self.mlp_width = mlp_width
        self.substeps = substeps
        self.path_weight = path_weight
        self.n_updates = n_updates
        self.batch_size = batch_size
        self.peak_lr = peak_lr
        self.prefix_lo = prefix_lo
        self.prefix_hi = prefix_hi
        self.random_state = random_state

    def _train_config(self) -> TrainConfig:
        return TrainConfig(n_updates=self.n_updates, batch_size=self.batch_size,
                           peak_lr=self.peak_lr, seed=self.random_state,
                           prefix_lo=self.prefix_lo, prefix_hi=self.prefix_hi,
                           latent_dim=self.latent_dim, hidden_dim=self.hidden_dim,
                           mlp_width=self.mlp_width, substeps=self.substeps,
                           path_weight=self.path_weight)

    def fit(self, X, y=None):
        runs = check_corpus(X)
        if len(runs) < 2:
            raise ValueError("fitting needs at least 2 runs")
        self.model_, self.loss_history_ = train_lode(runs, self._train_config())
        return self

    def predict(self, X, prefix_fraction: float = 0.5) -> list[np.ndarray]:
        """Denormalized (T, 3) reconstruction per run, from its leading prefix."""
        check_is_fitted(self, "model_")
        return [predict_from_prefix(self.model_, t, prefix_fraction)[0]
                for t in check_corpus(X)]

    def score(self, X, y=None, prefix_fraction: float = 0.5) -> float:
        """R^2-style score of the validation-metric channel (1 - relative MSE)."""
        check_is_fitted(self, "model_")
        rel = eval_reconstruction(self.model_, check_corpus(X), prefix_fraction)
        return 1.0 - rel["val_metric"]

    def rank(self, X, prefix_epochs: int = 1) -> list[str]:
        """Run ids ordered by predicted final validation metric, best first."""
        check_is_fitted(self, "model_")
        return rank_runs(self.model_, check_corpus(X), prefix_epochs)

    def save(self, path) -> None:
        check_is_fitted(self, "model_")
        save_checkpoint(self.model_, path)

    @classmethod
    def from_checkpoint(cls, path) -> "LatentOdeEstimator":
        model = load_checkpoint(path)
        est = cls(latent_dim=model.latent_dim, hidden_dim=model.hidden_dim,
                  substeps=model.substeps, path_weight=model.path_weight)
        est.model_ = model
        est.loss_history_ = np.empty(0)
        return est
