"""Training-trajectory corpus: types, JSONL ingest, normalization, windowing.

A trajectory is one training run's per-epoch record of (train loss,
validation metric, learning rate) plus provenance. Corpora are JSON Lines,
one run per line:

    {"run_id": str, "seed": int,
     "schedule": {"family": str, "params": {str: float}},
     "epochs": [{"t": int, "train_loss": float, "val_metric": float, "lr": float}, ...]}

Floats are serialized with full round-trip precision, UTF-8, LF endings.

Channel normalization keeps all three channels O(1) for the latent model:
losses in log1p space, learning rates in log10 space (they span decades in
sweep grids), the bounded validation metric affinely to [-1, 1]. Epoch
indices map to continuous time tau = t / time_scale with time_scale the
longest corpus run.

All values here are immutable after construction and safe to share across
workers; parsing is single-threaded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SCHEDULE_FAMILIES = ("constant", "cosine", "onecycle", "expdecay", "lode", "external")

CHANNELS = ("train_loss", "val_metric", "lr")


class CorpusError(ValueError):
    """Malformed corpus file or invariant-violating run."""


@dataclass(frozen=True)
class TrajectoryPoint:
    """One epoch's record: non-negative loss, metric in [0,1], positive lr."""

    t: int
    train_loss: float
    val_metric: float
    lr: float


@dataclass(frozen=True)
class Trajectory:
    run_id: str
    seed: int
    schedule_family: str
    schedule_params: dict[str, float]
    points: tuple[TrajectoryPoint, ...]

    def __post_init__(self):
        _validate_trajectory(self)

    def __len__(self):
        return len(self.points)

    def losses(self) -> np.ndarray:
        return np.array([p.train_loss for p in self.points])

    def metrics(self) -> np.ndarray:
        return np.array([p.val_metric for p in self.points])

    def lrs(self) -> np.ndarray:
        return np.array([p.lr for p in self.points])

    def channel_matrix(self) -> np.ndarray:
        """Raw (T, 3) matrix in channel order (train_loss, val_metric, lr)."""
        return np.array([[p.train_loss, p.val_metric, p.lr] for p in self.points])

    def final_val_metric(self) -> float:
        return self.points[-1].val_metric


def _fail(run_id, msg):
    raise CorpusError(f"run {run_id!r}: {msg}")


def _validate_trajectory(traj: Trajectory):
    rid = traj.run_id
    if not isinstance(rid, str) or not rid:
        raise CorpusError(f"run_id must be a non-empty string, got {rid!r}")
    if traj.schedule_family not in SCHEDULE_FAMILIES:
        _fail(rid, f"unknown schedule family {traj.schedule_family!r}")
    if len(traj.points) < 2:
        _fail(rid, f"needs at least 2 points, got {len(traj.points)}")
    for i, p in enumerate(traj.points):
        if p.t != i:
            _fail(rid, f"epochs must be contiguous from 0; point {i} has t={p.t}")
        for name, val in (("train_loss", p.train_loss), ("val_metric", p.val_metric), ("lr", p.lr)):
            if not math.isfinite(val):
                _fail(rid, f"non-finite {name} at epoch {p.t}")
        if p.train_loss < 0:
            _fail(rid, f"train_loss must be >= 0 at epoch {p.t}")
        if not (0.0 <= p.val_metric <= 1.0):
            _fail(rid, f"val_metric must be in [0, 1] at epoch {p.t}")
        if p.lr <= 0:
            _fail(rid, f"lr must be > 0 at epoch {p.t}")


# ---------------------------------------------------------------------------
# Serialization


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "run_id": traj.run_id,
        "seed": traj.seed,
        "schedule": {"family": traj.schedule_family,
                     "params": {k: float(v) for k, v in traj.schedule_params.items()}},
        "epochs": [{"t": p.t, "train_loss": p.train_loss,
                    "val_metric": p.val_metric, "lr": p.lr}
                   for p in traj.points],
    }


def trajectory_from_dict(d: dict) -> Trajectory:
    try:
        points = tuple(TrajectoryPoint(t=int(e["t"]), train_loss=float(e["train_loss"]),
                                       val_metric=float(e["val_metric"]), lr=float(e["lr"]))
                       for e in d["epochs"])
        return Trajectory(run_id=d["run_id"], seed=int(d["seed"]),
                          schedule_family=d["schedule"]["family"],
                          schedule_params={k: float(v) for k, v in d["schedule"]["params"].items()},
                          points=points)
    except KeyError as e:
        raise CorpusError(f"missing field {e.args[0]!r}") from e


def write_corpus(trajectories: Iterable[Trajectory], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for traj in trajectories:
            fh.write(json.dumps(trajectory_to_dict(traj)))
            fh.write("\n")


def parse_corpus(path) -> list[Trajectory]:
    """Read a JSONL corpus; order preserved, every run validated.

    Raises CorpusError naming the line number for malformed JSON and the
    run_id plus offending field for invariant violations.
    """
    runs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({e.msg})") from e
            try:
                runs.append(trajectory_from_dict(d))
            except CorpusError as e:
                raise CorpusError(f"{path}: line {lineno}: {e}") from e
    return runs


# ---------------------------------------------------------------------------
# Normalization


@dataclass(frozen=True)
class ChannelTransform:
    """normalized = (pre(x) + shift) / scale with pre in {log1p, identity, log10}."""

    kind: str  # "log1p" | "affine" | "log10"
    shift: float
    scale: float
    zero_variance: bool = False

    def normalize(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "log1p":
            x = np.log1p(x)
        elif self.kind == "log10":
            x = np.log10(x)
        return (x + self.shift) / self.scale

    def denormalize(self, y):
        y = np.asarray(y, dtype=np.float64)
        x = y * self.scale - self.shift
        if self.kind == "log1p":
            return np.expm1(x)
        if self.kind == "log10":
            return np.power(10.0, x)
        return x

    def to_dict(self):
        return {"kind": self.kind, "shift": self.shift, "scale": self.scale,
                "zero_variance": self.zero_variance}

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], shift=float(d["shift"]), scale=float(d["scale"]),
                   zero_variance=bool(d["zero_variance"]))


@dataclass(frozen=True)
class NormalizationSpec:
    loss: ChannelTransform
    metric: ChannelTransform
    lr: ChannelTransform
    time_scale: int

    def normalize_matrix(self, raw: np.ndarray) -> np.ndarray:
        """(T, 3) raw channels -> (T, 3) normalized."""
        out = np.empty_like(raw, dtype=np.float64)
        out[:, 0] = self.loss.normalize(raw[:, 0])
        out[:, 1] = self.metric.normalize(raw[:, 1])
        out[:, 2] = self.lr.normalize(raw[:, 2])
        return out

    def denormalize_matrix(self, norm: np.ndarray) -> np.ndarray:
        out = np.empty_like(norm, dtype=np.float64)
        out[..., 0] = self.loss.denormalize(norm[..., 0])
        out[..., 1] = self.metric.denormalize(norm[..., 1])
        out[..., 2] = self.lr.denormalize(norm[..., 2])
        return out

    def tau(self, epoch) -> float:
        return epoch / self.time_scale

    def to_dict(self):
        return {"loss": self.loss.to_dict(), "metric": self.metric.to_dict(),
                "lr": self.lr.to_dict(), "time_scale": self.time_scale}

    @classmethod
    def from_dict(cls, d):
        return cls(loss=ChannelTransform.from_dict(d["loss"]),
                   metric=ChannelTransform.from_dict(d["metric"]),
                   lr=ChannelTransform.from_dict(d["lr"]),
                   time_scale=int(d["time_scale"]))


def fit_normalization(corpus: Sequence[Trajectory]) -> NormalizationSpec:
    """Fit per-channel transforms over the whole corpus.

    Loss and lr channels are standardized (population convention) after their
    log transforms; the metric channel maps corpus min -> -1 and max -> +1.
    A zero-variance channel falls back to scale 1 and is flagged: constant-lr
    runs are legitimate corpus members.
    """
    if not corpus:
        raise CorpusError("cannot fit normalization on an empty corpus")
    losses = np.concatenate([t.losses() for t in corpus])
    metrics = np.concatenate([t.metrics() for t in corpus])
    lrs = np.concatenate([t.lrs() for t in corpus])

    def standardized(values, kind):
        v = np.log1p(values) if kind == "log1p" else np.log10(values)
        mean = float(np.mean(v))
        std = float(np.std(v))
        if std == 0.0:
            return ChannelTransform(kind, shift=-mean, scale=1.0, zero_variance=True)
        return ChannelTransform(kind, shift=-mean, scale=std)

    mn, mx = float(np.min(metrics)), float(np.max(metrics))
    if mx == mn:
        metric_tf = ChannelTransform("affine", shift=-mn, scale=1.0, zero_variance=True)
    else:
        metric_tf = ChannelTransform("affine", shift=-(mn + mx) / 2.0, scale=(mx - mn) / 2.0)

    return NormalizationSpec(loss=standardized(losses, "log1p"),
                             metric=metric_tf,
                             lr=standardized(lrs, "log10"),
                             time_scale=max(len(t) for t in corpus))


# ---------------------------------------------------------------------------
# Windowing


@dataclass(frozen=True)
class Window:
    """A normalized (mu, 3) slice of one run, plus the raw losses of the span."""

    run_id: str
    start_epoch: int
    channels: np.ndarray
    raw_losses: np.ndarray

    def __post_init__(self):
        if self.channels.ndim != 2 or self.channels.shape[1] != 3:
            raise CorpusError(f"window channels must be (mu, 3), got {self.channels.shape}")
        if len(self.raw_losses) != len(self.channels):
            raise CorpusError("raw_losses length must equal window width")


def window(traj: Trajectory, end_epoch: int, mu: int, spec: NormalizationSpec) -> Window:
    """The mu normalized points ending at end_epoch inclusive."""
    if mu < 1:
        raise CorpusError(f"run {traj.run_id!r}: window width must be >= 1, got {mu}")
    start = end_epoch - mu + 1
    if start < 0 or end_epoch >= len(traj):
        raise CorpusError(f"run {traj.run_id!r}: window [{start}, {end_epoch}] out of range "
                          f"for length {len(traj)}")
    raw = traj.channel_matrix()[start:end_epoch + 1]
    return Window(run_id=traj.run_id, start_epoch=start,
                  channels=spec.normalize_matrix(raw),
                  raw_losses=raw[:, 0].copy())
