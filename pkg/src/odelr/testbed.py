"""Desk-scale trainee problem: data, training loop, sweeps, and diagnostics.

The trainee is a 2-32-32-3 tanh MLP classifying three Gaussian blobs,
trained with minibatch SGD plus momentum so the applied learning rate is
exactly the scheduled one. Runs are bit-reproducible from (dataset seed,
trainee seed, lr sequence). Divergent runs stay in the corpus with losses
capped at 1e6; seeing failure modes is useful training data for the
trajectory model.

Sharpness is the dominant Hessian eigenvalue of the loss at the current
parameters, estimated by power iteration with Hessian-vector products taken
as central finite differences of gradients (no second-order support needed).

Sweep cells and comparison arms are independent and embarrassingly parallel;
each run is internally single-threaded.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .autodiff import add, backward, constant, eval_graph, matmul, softmax_xent, tanh
from .lode import LodeModel
from .scheduler import (DynamicScheduler, SchedulerConfig, best_corpus_run,
                        lr_bounds_from_corpus)
from .schedules import PARAMETRIC_FAMILIES, ScheduleSpec, eval_schedule, make_spec
from .trajectory import Trajectory, TrajectoryPoint, write_corpus

LOSS_CAP = 1e6
TRAINEE_SIZES = (2, 32, 32, 3)
_TRAINEE_KEYS = ("w1", "b1", "w2", "b2", "w3", "b3")

# (epoch, history so far) -> learning rate for that epoch
LrSource = Callable[[int, Sequence[TrajectoryPoint]], float]


@dataclass(frozen=True)
class SyntheticDataset:
    """Three Gaussian blobs in the plane; splits are class-balanced within 1."""

    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    seed: int


def _balanced_counts(n: int, classes: int = 3) -> list[int]:
    return [n // classes + (1 if c < n % classes else 0) for c in range(classes)]


def make_dataset(seed: int = 0, n_train: int = 1500, n_val: int = 500, n_test: int = 500,
                 radius: float = 2.0, spread: float = 1.0) -> SyntheticDataset:
    rng = np.random.default_rng(seed)
    angles = np.array([0.5, 0.5 + 2.0 / 3.0, 0.5 + 4.0 / 3.0]) * math.pi
    centers = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def draw(n):
        xs, ys = [], []
        for c, n_c in enumerate(_balanced_counts(n)):
            xs.append(centers[c] + spread * rng.standard_normal((n_c, 2)))
            ys.append(np.full(n_c, c, dtype=np.int64))
        return np.concatenate(xs), np.concatenate(ys)

    tx, ty = draw(n_train)
    vx, vy = draw(n_val)
    sx, sy = draw(n_test)
    return SyntheticDataset(tx, ty, vx, vy, sx, sy, seed)


# ---------------------------------------------------------------------------
# Trainee model


def init_trainee(seed: int, rng: np.random.Generator | None = None) -> dict[str, np.ndarray]:
    """Uniform +-1/sqrt(fan_in) weights, zero biases (w1, w2, w3 draw order)."""
    if rng is None:
        rng = np.random.default_rng(seed)
    d0, d1, d2, d3 = TRAINEE_SIZES
    params = {}
    for name, (fi, fo) in (("w1", (d0, d1)), ("w2", (d1, d2)), ("w3", (d2, d3))):
        bound = 1.0 / math.sqrt(fi)
        params[name] = rng.uniform(-bound, bound, size=(fi, fo))
    params["b1"] = np.zeros(d1)
    params["b2"] = np.zeros(d2)
    params["b3"] = np.zeros(d3)
    return dict((k, params[k]) for k in _TRAINEE_KEYS)


def trainee_param_count() -> int:
    d0, d1, d2, d3 = TRAINEE_SIZES
    return d0 * d1 + d1 + d1 * d2 + d2 + d2 * d3 + d3


def _logits(params: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
    h = np.tanh(x @ params["w1"] + params["b1"])
    h = np.tanh(h @ params["w2"] + params["b2"])
    return h @ params["w3"] + params["b3"]


def accuracy(params: dict[str, np.ndarray], x: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.argmax(_logits(params, x), axis=1) == y))


def _onehot(y: np.ndarray, classes: int = 3) -> np.ndarray:
    out = np.zeros((y.size, classes))
    out[np.arange(y.size), y] = 1.0
    return out


def _batch_loss_grads(params, xb, yb_onehot):
    def program(p):
        h1 = tanh(add(matmul(constant(xb), p["w1"]), p["b1"]))
        h2 = tanh(add(matmul(h1, p["w2"]), p["b2"]))
        logits = add(matmul(h2, p["w3"]), p["b3"])
        return softmax_xent(logits, constant(yb_onehot))

    out, g = eval_graph(program, params)
    return float(out.data), backward(g)


def _mean_loss(params, x, y_onehot) -> float:
    def program(p):
        h1 = tanh(add(matmul(constant(x), p["w1"]), p["b1"]))
        h2 = tanh(add(matmul(h1, p["w2"]), p["b2"]))
        return softmax_xent(add(matmul(h2, p["w3"]), p["b3"]), constant(y_onehot))
    return float(eval_graph(program, params)[0].data)


# ---------------------------------------------------------------------------
# Training loop


@dataclass
class RunResult:
    points: list[TrajectoryPoint]
    params: dict[str, np.ndarray]
    test_metric: list[float]
    diverged: bool
    lambda_series: list[tuple[int, float]]


def _train_run_full(dataset: SyntheticDataset, trainee_seed: int, lr_source: LrSource,
                    total_epochs: int, batch_size: int = 64, momentum: float = 0.9,
                    record_test: bool = False, sharpness_every: int = 0,
                    sharpness_iters: int = 50) -> RunResult:
    if total_epochs < 2:
        raise ValueError("total_epochs must be >= 2")
    rng = np.random.default_rng(trainee_seed)
    params = init_trainee(trainee_seed, rng)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    x, y = dataset.train_x, dataset.train_y
    y1h = _onehot(y)
    n = x.shape[0]

    points: list[TrajectoryPoint] = []
    test_metric: list[float] = []
    lambda_series: list[tuple[int, float]] = []
    diverged = False
    for epoch in range(total_epochs):
        lr = float(lr_source(epoch, points))
        perm = rng.permutation(n)
        if not diverged:
            # epoch loss = batch means weighted by batch size, i.e. the mean
            # over the epoch's examples at the parameters each batch saw
            loss_sum = 0.0
            for lo in range(0, n, batch_size):
                sel = perm[lo:lo + batch_size]
                loss, grads = _batch_loss_grads(params, x[sel], y1h[sel])
                if not math.isfinite(loss):
                    diverged = True
                    break
                loss_sum += loss * sel.size
                for k in params:
                    velocity[k] = momentum * velocity[k] + grads[k]
                    params[k] = params[k] - lr * velocity[k]
            if not diverged and not all(np.all(np.isfinite(v)) for v in params.values()):
                diverged = True
        if diverged:
            train_loss, val_acc, test_acc = LOSS_CAP, 0.0, 0.0
        else:
            train_loss = min(loss_sum / n, LOSS_CAP)
            val_acc = accuracy(params, dataset.val_x, dataset.val_y)
            test_acc = accuracy(params, dataset.test_x, dataset.test_y) if record_test else 0.0
        points.append(TrajectoryPoint(t=epoch, train_loss=train_loss,
                                      val_metric=val_acc, lr=lr))
        if record_test:
            test_metric.append(test_acc)
        if sharpness_every and (epoch + 1) % sharpness_every == 0 and not diverged:
            lam = estimate_sharpness(params, dataset.train_x[:256], dataset.train_y[:256],
                                     iters=sharpness_iters)
            lambda_series.append((epoch, lam.value))
    return RunResult(points=points, params=params, test_metric=test_metric,
                     diverged=diverged, lambda_series=lambda_series)


def train_run(dataset: SyntheticDataset, trainee_seed: int, lr_source, total_epochs: int,
              run_id: str = "run", schedule_family: str = "external",
              schedule_params: dict | None = None) -> Trajectory:
    """Train one run and log one point per epoch (epoch-mean train loss,
    validation accuracy, applied lr). ``lr_source`` is a ScheduleSpec or any
    (epoch, history) -> lr callable, e.g. a DynamicScheduler."""
    if isinstance(lr_source, ScheduleSpec):
        spec = lr_source
        schedule_family = spec.family
        schedule_params = dict(spec.params)
        lr_source = schedule_source(spec)
    result = _train_run_full(dataset, trainee_seed, lr_source, total_epochs)
    return Trajectory(run_id=run_id, seed=trainee_seed, schedule_family=schedule_family,
                      schedule_params=schedule_params or {}, points=tuple(result.points))


def schedule_source(spec: ScheduleSpec) -> LrSource:
    return lambda epoch, history: eval_schedule(spec, epoch)


# ---------------------------------------------------------------------------
# Sweeps

DEFAULT_SWEEP_LRS = (1e-3, 5e-3, 1e-2, 5e-2, 1e-1)


@dataclass(frozen=True)
class SweepGrid:
    families: tuple[str, ...] = PARAMETRIC_FAMILIES
    lrs: tuple[float, ...] = DEFAULT_SWEEP_LRS
    seeds: tuple[int, ...] = (0, 1, 2)

    def cells(self) -> list[tuple[str, float, int]]:
        """Full cartesian product, family-major then lr then seed."""
        return [(f, lr, s) for f in self.families for lr in self.lrs for s in self.seeds]


def _sweep_cell(args) -> Trajectory:
    dataset, family, lr, seed, total_epochs = args
    spec = make_spec(family, lr, total_epochs)
    run_id = f"{family}-lr{lr:g}-s{seed}"
    return train_run(dataset, seed, spec, total_epochs, run_id=run_id)


def run_sweep(grid: SweepGrid, dataset: SyntheticDataset, total_epochs: int,
              out_path=None, jobs: int = 1) -> list[Trajectory]:
    """One run per grid cell; optionally written as a JSONL corpus."""
    cells = grid.cells()
    if not cells:
        raise ValueError("sweep grid is empty")
    args = [(dataset, f, lr, s, total_epochs) for f, lr, s in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_sweep_cell, args))
    else:
        runs = [_sweep_cell(a) for a in args]
    if out_path is not None:
        write_corpus(runs, out_path)
    return runs


# ---------------------------------------------------------------------------
# Sharpness diagnostics


@dataclass(frozen=True)
class SharpnessResult:
    value: float
    degenerate: bool
    iterations: int


def flatten_params(params: dict[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([params[k].ravel() for k in _TRAINEE_KEYS])


def unflatten_params(theta: np.ndarray, like: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out, pos = {}, 0
    for k in _TRAINEE_KEYS:
        size = like[k].size
        out[k] = theta[pos:pos + size].reshape(like[k].shape)
        pos += size
    return out


def dominant_curvature(grad_fn: Callable[[np.ndarray], np.ndarray], theta: np.ndarray,
                       iters: int, seed: int = 0, rel_tol: float = 1e-4) -> SharpnessResult:
    """Power iteration on the Hessian via central differences of gradients:
    Hv ~ (g(theta + eps v) - g(theta - eps v)) / (2 eps), eps = 1e-4 (1+|theta|)/|v|.

    Returns the Rayleigh quotient after ``iters`` steps or once successive
    estimates agree to ``rel_tol`` relative; a vanishing Hv reports a
    degenerate zero.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(theta.size)
    v /= np.linalg.norm(v)
    theta_norm = float(np.linalg.norm(theta))
    lam_prev = None
    lam = 0.0
    for i in range(1, iters + 1):
        eps = 1e-4 * (1.0 + theta_norm) / float(np.linalg.norm(v))
        hv = (grad_fn(theta + eps * v) - grad_fn(theta - eps * v)) / (2.0 * eps)
        norm_hv = float(np.linalg.norm(hv))
        if norm_hv < 1e-12:
            return SharpnessResult(0.0, True, i)
        lam = float(v @ hv)
        v = hv / norm_hv
        if lam_prev is not None and abs(lam - lam_prev) < rel_tol * max(abs(lam), 1e-12):
            break
        lam_prev = lam
    return SharpnessResult(lam, False, i)


def estimate_sharpness(params: dict[str, np.ndarray], batch_x: np.ndarray,
                       batch_y: np.ndarray, iters: int = 50, seed: int = 0) -> SharpnessResult:
    """Largest Hessian eigenvalue of the trainee loss on a fixed batch."""
    y1h = _onehot(np.asarray(batch_y))

    def grad_fn(theta):
        p = unflatten_params(theta, params)
        _, grads = _batch_loss_grads(p, batch_x, y1h)
        return np.concatenate([grads[k].ravel() for k in _TRAINEE_KEYS])

    return dominant_curvature(grad_fn, flatten_params(params), iters, seed=seed)


def eos_ratio(lr: float, lambda_max: float) -> float:
    """lr * lambda_max / 2; values above 1 exceed the classical stability bound."""
    if lambda_max < 0:
        raise ValueError("lambda_max must be >= 0")
    return lr * lambda_max / 2.0


# ---------------------------------------------------------------------------
# Comparison harness

_FAMILY_LR_KEY = {"constant": "lr", "cosine": "lr0", "onecycle": "peak_lr", "expdecay": "lr0"}


def best_sweep_lrs(corpus: Sequence[Trajectory]) -> dict[str, float]:
    """Per family, the sweep lr with the highest mean best-epoch validation
    accuracy across seeds; ties go to the smaller lr."""
    table: dict[str, dict[float, list[float]]] = {}
    for run in corpus:
        if run.schedule_family not in _FAMILY_LR_KEY:
            continue
        lr = run.schedule_params[_FAMILY_LR_KEY[run.schedule_family]]
        table.setdefault(run.schedule_family, {}).setdefault(lr, []).append(
            float(np.max(run.metrics())))
    best = {}
    for family, by_lr in table.items():
        scored = sorted(((float(np.mean(v)), -lr) for lr, v in by_lr.items()), reverse=True)
        best[family] = -scored[0][1]
    return best


def _comparison_cell(args):
    (dataset, arm, seed, total_epochs, spec, model, cfg, bootstrap,
     sharpness_iters, sharpness_every) = args
    if arm == "lode":
        source = DynamicScheduler(model, replace(cfg, seed=cfg.seed + seed), bootstrap)
    else:
        source = schedule_source(spec)
    result = _train_run_full(dataset, seed, source, total_epochs, record_test=True,
                             sharpness_every=sharpness_every, sharpness_iters=sharpness_iters)
    if result.diverged:
        lam = None
    else:
        lam = estimate_sharpness(result.params, dataset.train_x[:256],
                                 dataset.train_y[:256], iters=sharpness_iters).value
    return arm, seed, result, lam


def evaluate_comparison(corpus: Sequence[Trajectory], model: LodeModel, cfg: SchedulerConfig,
                        seeds: Sequence[int], dataset: SyntheticDataset,
                        total_epochs: int | None = None, sharpness_iters: int = 50,
                        sharpness_every: int = 0, jobs: int = 1,
                        lode_source_factory=None) -> dict:
    """Train each baseline family at its best sweep lr plus one model-scheduled
    run per seed; report best-epoch test accuracy (epoch chosen by validation
    accuracy) and final sharpness per arm.

    ``lode_source_factory(seed) -> LrSource`` overrides the scheduled arm's
    rate source (used to validate the harness by replaying a baseline).
    """
    if total_epochs is None:
        total_epochs = len(corpus[0])
    best = best_sweep_lrs(corpus)
    bootstrap = best_corpus_run(corpus)
    arms = list(best) + ["lode"]
    specs = {f: make_spec(f, best[f], total_epochs) for f in best}

    results: dict[tuple[str, int], tuple[RunResult, float | None]] = {}
    if lode_source_factory is None and jobs > 1:
        args = [(dataset, arm, seed, total_epochs, specs.get(arm), model, cfg,
                 bootstrap, sharpness_iters, sharpness_every)
                for arm in arms for seed in seeds]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for arm, seed, result, lam in pool.map(_comparison_cell, args):
                results[(arm, seed)] = (result, lam)
    else:
        for arm in arms:
            for seed in seeds:
                if arm == "lode" and lode_source_factory is not None:
                    source = lode_source_factory(seed)
                    result = _train_run_full(dataset, seed, source, total_epochs,
                                             record_test=True, sharpness_every=sharpness_every,
                                             sharpness_iters=sharpness_iters)
                    lam = None if result.diverged else estimate_sharpness(
                        result.params, dataset.train_x[:256], dataset.train_y[:256],
                        iters=sharpness_iters).value
                    results[(arm, seed)] = (result, lam)
                else:
                    _, _, result, lam = _comparison_cell(
                        (dataset, arm, seed, total_epochs, specs.get(arm), model, cfg,
                         bootstrap, sharpness_iters, sharpness_every))
                    results[(arm, seed)] = (result, lam)

    report = {"schema_version": 1, "epochs": total_epochs, "seeds": list(seeds),
              "arms": {}, "runs": []}
    for arm in arms:
        entry = {"schedule": ({"family": arm, "lr": best[arm]} if arm in best else None),
                 "run_ids": [], "best_epoch": [], "test_acc": [], "lambda_max": [],
                 "diverged": []}
        for seed in seeds:
            result, lam = results[(arm, seed)]
            run_id = f"cmp-{arm}-s{seed}"
            vals = np.array([p.val_metric for p in result.points])
            b = int(np.argmax(vals))
            entry["run_ids"].append(run_id)
            entry["best_epoch"].append(b)
            entry["test_acc"].append(result.test_metric[b])
            entry["lambda_max"].append(lam)
            entry["diverged"].append(result.diverged)
            report["runs"].append({
                "run_id": run_id, "arm": arm, "seed": seed,
                "epochs": [{"t": p.t, "train_loss": p.train_loss,
                            "val_metric": p.val_metric, "lr": p.lr}
                           for p in result.points],
                "test_metric": result.test_metric,
                "lambda_series": [[e, v] for e, v in result.lambda_series],
            })
        accs = np.array(entry["test_acc"])
        entry["mean_test_acc"] = float(np.mean(accs))
        entry["std_test_acc"] = float(np.std(accs))
        lams = [v for v in entry["lambda_max"] if v is not None]
        entry["mean_lambda_max"] = float(np.mean(lams)) if lams else None
        report["arms"][arm] = entry
    return report
