"""Dynamic learning-rate scheduling from a trained latent-ODE model.

Every ``mu`` epochs the live run's recent window is encoded, an ensemble of
perturbed latents is integrated and decoded into candidate futures, candidates
whose predicted loss passes near the live loss are anchored to the matching
epoch, and the rates of the best few (by predicted validation metric a
horizon past the anchor) are averaged into the next segment. If no candidate
is close enough to the live run, the current rate is simply extended.

Ensemble members integrate and decode independently (batched here); the
selection steps are a sequential reduction. A DynamicScheduler holds no
mutable state between calls except its rng stream and the decision log.

Determinism contract: the noise draw is ``rng.standard_normal((n-1, d_z))``
scaled by sigma, taken once at the start of every invocation, so
(history, model, config, seed) fully determines the emitted segment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lode import LodeModel, encode_windows, rollout
from .trajectory import Trajectory, TrajectoryPoint


class SchedulerError(ValueError):
    pass


@dataclass(frozen=True)
class SchedulerConfig:
    total_epochs: int
    mu: int | None = None            # update/encoding period; default ~5% of T
    ensemble_size: int = 30
    noise: float = 0.15              # stddev of the latent perturbation
    horizon: int | None = None       # epochs past the anchor; default T - t_star
    lr_bounds: tuple[float, float] = (1e-8, 10.0)
    seed: int = 0

    def __post_init__(self):
        if self.total_epochs < 1:
            raise SchedulerError("total_epochs must be >= 1")
        mu = self.resolved_mu()
        if not (1 <= mu <= self.total_epochs):
            raise SchedulerError(f"mu must be in [1, {self.total_epochs}], got {mu}")
        if self.ensemble_size < 1:
            raise SchedulerError("ensemble_size must be >= 1")
        if self.noise < 0:
            raise SchedulerError("noise must be >= 0")
        lo, hi = self.lr_bounds
        if not (0 < lo <= hi):
            raise SchedulerError("lr_bounds must satisfy 0 < lo <= hi")
        if self.horizon is not None and self.horizon < 1:
            raise SchedulerError("horizon must be >= 1")

    def resolved_mu(self) -> int:
        return self.mu if self.mu is not None else max(1, round(0.05 * self.total_epochs))


def lr_bounds_from_corpus(corpus: Sequence[Trajectory]) -> tuple[float, float]:
    """Default clamp: a decade below / above the corpus lr range."""
    lrs = np.concatenate([t.lrs() for t in corpus])
    return float(lrs.min() / 10.0), float(lrs.max() * 10.0)


def best_corpus_run(corpus: Sequence[Trajectory]) -> Trajectory:
    """Bootstrap run for cold starts: highest final validation metric,
    ties broken by lexicographic run_id."""
    if not corpus:
        raise SchedulerError("corpus is empty")
    return min(corpus, key=lambda t: (-t.final_val_metric(), t.run_id))


@dataclass
class EnsembleSample:
    index: int                      # 1-based; sample 1 is the unperturbed latent
    latent: np.ndarray
    trajectory: np.ndarray          # denormalized (T + horizon + 1, 3)
    valid: bool = True
    accepted: bool = False
    anchor: int | None = None
    predicted_metric: float | None = None


@dataclass
class ScheduleSegment:
    start_epoch: int
    rates: np.ndarray               # mu positive learning rates
    provenance: str                 # "ensemble" | "fallback" | "cold_start"


def build_ensemble(z0: np.ndarray, model: LodeModel, cfg: SchedulerConfig,
                   horizon: int | None = None,
                   eps: np.ndarray | None = None) -> list[EnsembleSample]:
    """Perturb z0, integrate each latent over epochs 0..T+horizon, decode.

    Sample 1 uses zero noise exactly; samples 2..n add iid N(0, sigma^2).
    Non-finite decodes mark the sample invalid rather than aborting.
    """
    n = cfg.ensemble_size
    d_z = z0.shape[-1]
    if horizon is None:
        horizon = cfg.horizon if cfg.horizon is not None else cfg.total_epochs
    if eps is None:
        eps = np.random.default_rng(cfg.seed).standard_normal((n - 1, d_z)) * cfg.noise
    if eps.shape != (n - 1, d_z):
        raise SchedulerError(f"eps must have shape {(n - 1, d_z)}, got {eps.shape}")
    latents = np.concatenate([z0[None, :], z0[None, :] + eps], axis=0)
    norm = rollout(model, latents, cfg.total_epochs + horizon)     # (grid, n, 3)
    raw = model.normalization.denormalize_matrix(norm)
    samples = []
    for i in range(n):
        traj = raw[:, i, :]
        samples.append(EnsembleSample(index=i + 1, latent=latents[i].copy(),
                                      trajectory=traj,
                                      valid=bool(np.all(np.isfinite(traj)))))
    return samples


def accept_and_anchor(samples: list[EnsembleSample], history: Sequence[TrajectoryPoint],
                      t_star: int, mu: int, total_epochs: int) -> list[EnsembleSample]:
    """Flag samples whose predicted loss comes within 2 std of the live loss.

    The band is 2x the population std of the last mu observed raw losses; the
    comparison is strict, so a zero-variance history accepts only exact
    matches. Among a sample's qualifying epochs the anchor is the one with
    the highest predicted rate, ties to the smallest epoch.
    """
    if len(history) < mu:
        raise SchedulerError(f"history has {len(history)} points, need >= mu={mu}")
    recent = np.array([p.train_loss for p in history[-mu:]])
    current = history[-1].train_loss
    band = 2.0 * float(np.std(recent))
    for s in samples:
        s.accepted = False
        s.anchor = None
        if not s.valid:
            continue
        losses = s.trajectory[:total_epochs + 1, 0]
        ks = np.nonzero(np.abs(losses - current) < band)[0]
        if ks.size == 0:
            continue
        rates = s.trajectory[ks, 2]
        s.accepted = True
        s.anchor = int(ks[np.argmax(rates)])   # argmax takes the first max: smallest k
    return samples


def _select_top(accepted: list[EnsembleSample]) -> list[EnsembleSample]:
    return sorted(accepted, key=lambda s: (-s.predicted_metric, s.index))[:3]


def condition_and_average(samples: list[EnsembleSample], mu: int, horizon: int,
                          total_epochs: int) -> ScheduleSegment:
    """Score accepted samples a horizon past their anchor and average the
    rates of the top min(3, accepted); lookups past the decoded range clamp
    to the final decoded epoch."""
    last = total_epochs + horizon
    accepted = [s for s in samples if s.accepted]
    if not accepted:
        raise SchedulerError("no accepted samples; caller handles the fallback")
    for s in accepted:
        s.predicted_metric = float(s.trajectory[min(s.anchor + horizon, last), 1])
    top = _select_top(accepted)
    rates = np.array([
        float(np.mean([s.trajectory[min(s.anchor + j, last), 2] for s in top]))
        for j in range(mu)
    ])
    return ScheduleSegment(start_epoch=0, rates=rates, provenance="ensemble")


def _next_segment_full(history: Sequence[TrajectoryPoint], t_star: int, model: LodeModel,
                       cfg: SchedulerConfig, bootstrap: Trajectory,
                       rng: np.random.Generator) -> tuple[ScheduleSegment, dict]:
    mu = cfg.resolved_mu()
    if t_star != len(history):
        raise SchedulerError(f"t_star={t_star} must equal the history length {len(history)}")
    d_z = model.latent_dim
    eps = rng.standard_normal((cfg.ensemble_size - 1, d_z)) * cfg.noise

    cold = t_star < mu
    if cold:
        if len(bootstrap) < mu:
            raise SchedulerError(f"bootstrap run shorter than mu={mu}")
        effective = bootstrap.points[:mu]
    else:
        effective = list(history[-mu:])
    raw = np.array([[p.train_loss, p.val_metric, p.lr] for p in effective])
    win = model.normalization.normalize_matrix(raw)
    z0 = encode_windows(model, win[:, None, :])[0]

    horizon = cfg.horizon if cfg.horizon is not None else max(1, cfg.total_epochs - t_star)
    samples = build_ensemble(z0, model, cfg, horizon=horizon, eps=eps)
    accept_and_anchor(samples, effective, t_star, mu, cfg.total_epochs)
    accepted = [s for s in samples if s.accepted]

    lo, hi = cfg.lr_bounds
    if accepted:
        seg = condition_and_average(samples, mu, horizon, cfg.total_epochs)
        rates = np.clip(seg.rates, lo, hi)
        provenance = "cold_start" if cold else "ensemble"
        selected = [s.index for s in _select_top(accepted)]
    else:
        rates = np.full(mu, float(np.clip(effective[-1].lr, lo, hi)))
        provenance = "fallback"
        selected = []
    segment = ScheduleSegment(start_epoch=t_star, rates=rates, provenance=provenance)
    record = {
        "t_star": t_star,
        "mu": mu,
        "horizon": horizon,
        "accepted": len(accepted),
        "selected": selected,
        "anchors": {s.index: s.anchor for s in accepted},
        "predicted_metric": {s.index: s.predicted_metric for s in accepted},
        "segment": [float(r) for r in rates],
        "provenance": provenance,
    }
    return segment, record


def next_segment(history: Sequence[TrajectoryPoint], t_star: int, model: LodeModel,
                 cfg: SchedulerConfig, bootstrap: Trajectory,
                 rng: np.random.Generator | None = None) -> ScheduleSegment:
    """Produce the rates for epochs t_star..t_star+mu-1 of a live run.

    ``history`` holds the completed epochs 0..t_star-1. While fewer than mu
    epochs exist (cold start), the first mu epochs of the bootstrap run stand
    in for the live history everywhere: encoding, the acceptance band, and
    the fallback rate. The fallback (empty acceptance) repeats the last
    observed rate mu times. Averaged rates are clamped to cfg.lr_bounds;
    candidate trajectories themselves stay unclamped so anchor selection sees
    the model's actual rate predictions.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    segment, _ = _next_segment_full(history, t_star, model, cfg, bootstrap, rng)
    return segment


class DynamicScheduler:
    """Per-epoch learning-rate source driven by the latent-ODE model.

    Call with (epoch, history) for consecutive epochs; a new segment is
    computed whenever ``epoch`` crosses a mu boundary, and every decision is
    kept for offline replay.
    """

    def __init__(self, model: LodeModel, cfg: SchedulerConfig, bootstrap: Trajectory):
        self.model = model
        self.cfg = cfg
        self.bootstrap = bootstrap
        self._rng = np.random.default_rng(cfg.seed)
        self._segment: ScheduleSegment | None = None
        self.segments: list[ScheduleSegment] = []
        self.decisions: list[dict] = []

    def __call__(self, epoch: int, history: Sequence[TrajectoryPoint]) -> float:
        mu = self.cfg.resolved_mu()
        if epoch % mu == 0:
            self._segment, record = _next_segment_full(
                history, epoch, self.model, self.cfg, self.bootstrap, self._rng)
            self.segments.append(self._segment)
            self.decisions.append(record)
        if self._segment is None:
            raise SchedulerError(f"first query must fall on a segment boundary, got epoch {epoch}")
        offset = epoch - self._segment.start_epoch
        if not (0 <= offset < len(self._segment.rates)):
            raise SchedulerError(f"epoch {epoch} outside the active segment")
        return float(self._segment.rates[offset])

    def planned_rates(self) -> list[float]:
        """Concatenation of all emitted segments, in order."""
        return [float(r) for seg in self.segments for r in seg.rates]

    def write_decision_log(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in self.decisions:
                fh.write(json.dumps(record))
                fh.write("\n")
