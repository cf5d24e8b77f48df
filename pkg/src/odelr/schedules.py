"""Parametric learning-rate schedule families: constant, cosine, onecycle, expdecay.

Schedules are epoch-granular (one rate per epoch, matching the trajectory
granularity). The exact endpoint zeros of the cosine shapes are floored at
1e-4 of the reference rate so emitted rates stay strictly positive and
log-normalizable. Pure functions; freely concurrent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PARAMETRIC_FAMILIES = ("constant", "cosine", "onecycle", "expdecay")

ENDPOINT_FLOOR = 1e-4
DEFAULT_PCT_START = 0.3
DEFAULT_DECAY_RATE = 0.9


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleSpec:
    family: str
    params: dict[str, float]
    total_epochs: int

    def __post_init__(self):
        if self.family not in PARAMETRIC_FAMILIES:
            raise ScheduleError(f"unknown schedule family {self.family!r}")
        if self.total_epochs < 2:
            raise ScheduleError("total_epochs must be >= 2")
        p = self.params
        required = {"constant": ("lr",), "cosine": ("lr0",),
                    "onecycle": ("peak_lr", "pct_start"), "expdecay": ("lr0", "decay_rate")}
        for key in required[self.family]:
            if key not in p:
                raise ScheduleError(f"{self.family} schedule needs param {key!r}")
        for key in ("lr", "lr0", "peak_lr"):
            if key in p and p[key] <= 0:
                raise ScheduleError(f"{key} must be > 0")
        if self.family == "onecycle" and not (0.0 < p["pct_start"] < 1.0):
            raise ScheduleError("pct_start must be in (0, 1)")
        if self.family == "expdecay" and not (0.0 < p["decay_rate"] <= 1.0):
            raise ScheduleError("decay_rate must be in (0, 1]")


def constant(lr: float, total_epochs: int) -> ScheduleSpec:
    return ScheduleSpec("constant", {"lr": lr}, total_epochs)


def cosine(lr0: float, total_epochs: int) -> ScheduleSpec:
    return ScheduleSpec("cosine", {"lr0": lr0}, total_epochs)


def onecycle(peak_lr: float, total_epochs: int, pct_start: float = DEFAULT_PCT_START) -> ScheduleSpec:
    return ScheduleSpec("onecycle", {"peak_lr": peak_lr, "pct_start": pct_start}, total_epochs)


def expdecay(lr0: float, total_epochs: int, decay_rate: float = DEFAULT_DECAY_RATE) -> ScheduleSpec:
    return ScheduleSpec("expdecay", {"lr0": lr0, "decay_rate": decay_rate}, total_epochs)


def make_spec(family: str, lr: float, total_epochs: int) -> ScheduleSpec:
    """Build a spec from a family name and its overall learning rate."""
    if family == "constant":
        return constant(lr, total_epochs)
    if family == "cosine":
        return cosine(lr, total_epochs)
    if family == "onecycle":
        return onecycle(lr, total_epochs)
    if family == "expdecay":
        return expdecay(lr, total_epochs)
    raise ScheduleError(f"unknown schedule family {family!r}")


def eval_schedule(spec: ScheduleSpec, t: int) -> float:
    """Learning rate at epoch t (0 <= t < total_epochs); always > 0."""
    last = spec.total_epochs - 1
    if not (0 <= t <= last):
        raise ScheduleError(f"epoch {t} out of range [0, {last}]")
    p = spec.params
    if spec.family == "constant":
        return p["lr"]
    if spec.family == "cosine":
        lr = p["lr0"] * 0.5 * (1.0 + math.cos(math.pi * t / last))
        return max(lr, p["lr0"] * ENDPOINT_FLOOR)
    if spec.family == "expdecay":
        return p["lr0"] * p["decay_rate"] ** t
    # onecycle: cosine warmup 0 -> peak over ceil(pct_start * last) epochs,
    # then cosine decay peak -> 0 over the remainder.
    peak = p["peak_lr"]
    warm_end = math.ceil(p["pct_start"] * last)
    if t <= warm_end:
        lr = peak * 0.5 * (1.0 - math.cos(math.pi * t / warm_end)) if warm_end > 0 else peak
    else:
        lr = peak * 0.5 * (1.0 + math.cos(math.pi * (t - warm_end) / (last - warm_end)))
    return max(lr, peak * ENDPOINT_FLOOR)


def schedule_sequence(spec: ScheduleSpec) -> list[float]:
    return [eval_schedule(spec, t) for t in range(spec.total_epochs)]
