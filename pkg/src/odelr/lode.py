"""Latent-ODE model of training trajectories: GRU encoder, MLP dynamics, MLP decoder.

A recent window of the normalized (loss, metric, lr) series is encoded into a
latent state z0; z evolves under a learned time-dependent vector field
integrated with fixed-step classical RK4 on the epoch grid (``substeps``
sub-intervals per epoch); the decoder maps latent states back to the three
normalized channels. Training reconstructs whole runs from sampled prefixes
and adds an l2 path penalty on the vector-field magnitude along the
integrated trajectory, which pushes states with similar metrics toward the
same latent region regardless of when they occur.

Gradients flow by backprop through the unrolled integrator (no adjoint
method, no adaptive stepping). Training is single-threaded and fully
reproducible from the config seed; encode/integrate/decode are pure and may
run concurrently across runs or ensemble members.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .autodiff import (CompGraph, Tensor, add, backward, concat, constant,
                       init_adam, adam_step, matmul, mse, mul, sigmoid, tanh)
from .schedules import eval_schedule, onecycle
from .trajectory import (NormalizationSpec, Trajectory, Window,
                         fit_normalization, window)

LatentState = np.ndarray  # shape (latent_dim,)


class LodeError(ValueError):
    pass


class IntegrationError(RuntimeError):
    """Non-finite state during integration; carries the failing substep index."""

    def __init__(self, step_index: int):
        super().__init__(f"non-finite latent state at substep {step_index}")
        self.step_index = step_index


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"training loss became non-finite at update {step}")
        self.step = step


@dataclass
class EncoderParams:
    """GRU cell (input 3 -> hidden) plus a linear readout (hidden -> latent)."""

    w_xr: np.ndarray
    w_hr: np.ndarray
    b_r: np.ndarray
    w_xu: np.ndarray
    w_hu: np.ndarray
    b_u: np.ndarray
    w_xc: np.ndarray
    w_hc: np.ndarray
    b_c: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray


@dataclass
class MlpParams:
    """Two tanh hidden layers and a linear head."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray


_ENC_FIELDS = ("w_xr", "w_hr", "b_r", "w_xu", "w_hu", "b_u",
               "w_xc", "w_hc", "b_c", "w_out", "b_out")
_MLP_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3")


@dataclass
class LodeModel:
    encoder: EncoderParams
    dynamics: MlpParams
    decoder: MlpParams
    normalization: NormalizationSpec
    latent_dim: int = 20
    hidden_dim: int = 20
    substeps: int = 4
    path_weight: float = 1e-3

    def __post_init__(self):
        if self.substeps < 1:
            raise LodeError("substeps must be >= 1")
        if self.path_weight < 0:
            raise LodeError("path_weight must be >= 0")


def named_parameters(model: LodeModel) -> dict[str, np.ndarray]:
    out = {}
    for f in _ENC_FIELDS:
        out[f"enc.{f}"] = getattr(model.encoder, f)
    for prefix, mlp in (("dyn", model.dynamics), ("dec", model.decoder)):
        for f in _MLP_FIELDS:
            out[f"{prefix}.{f}"] = getattr(mlp, f)
    return out


def _params_from_dict(p: dict[str, np.ndarray]) -> tuple[EncoderParams, MlpParams, MlpParams]:
    enc = EncoderParams(**{f: p[f"enc.{f}"] for f in _ENC_FIELDS})
    dyn = MlpParams(**{f: p[f"dyn.{f}"] for f in _MLP_FIELDS})
    dec = MlpParams(**{f: p[f"dec.{f}"] for f in _MLP_FIELDS})
    return enc, dyn, dec


def init_parameters(rng: np.random.Generator, latent_dim: int, hidden_dim: int,
                    mlp_width: int, in_dim: int = 3, out_dim: int = 3) -> dict[str, np.ndarray]:
    """Uniform +-1/sqrt(fan_in) weights, zero biases, in a fixed draw order."""

    def w(fan_in, fan_out):
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    d_h, d_z, m = hidden_dim, latent_dim, mlp_width
    p = {}
    p["enc.w_xr"] = w(in_dim, d_h)
    p["enc.w_hr"] = w(d_h, d_h)
    p["enc.w_xu"] = w(in_dim, d_h)
    p["enc.w_hu"] = w(d_h, d_h)
    p["enc.w_xc"] = w(in_dim, d_h)
    p["enc.w_hc"] = w(d_h, d_h)
    p["enc.w_out"] = w(d_h, d_z)
    for name in ("b_r", "b_u", "b_c"):
        p[f"enc.{name}"] = np.zeros(d_h)
    p["enc.b_out"] = np.zeros(d_z)
    p["dyn.w1"] = w(d_z + 1, m)
    p["dyn.w2"] = w(m, m)
    p["dyn.w3"] = w(m, d_z)
    p["dyn.b1"] = np.zeros(m)
    p["dyn.b2"] = np.zeros(m)
    p["dyn.b3"] = np.zeros(d_z)
    p["dec.w1"] = w(d_z, m)
    p["dec.w2"] = w(m, m)
    p["dec.w3"] = w(m, out_dim)
    p["dec.b1"] = np.zeros(m)
    p["dec.b2"] = np.zeros(m)
    p["dec.b3"] = np.zeros(out_dim)
    return p


def assemble_model(params: dict[str, np.ndarray], normalization: NormalizationSpec,
                   substeps: int, path_weight: float) -> LodeModel:
    enc, dyn, dec = _params_from_dict(params)
    return LodeModel(encoder=enc, dynamics=dyn, decoder=dec, normalization=normalization,
                     latent_dim=enc.w_out.shape[1], hidden_dim=enc.w_hr.shape[0],
                     substeps=substeps, path_weight=path_weight)


# ---------------------------------------------------------------------------
# Forward pieces (operate on leaf-tensor dicts under an active CompGraph)


def _gru_encode(p: dict[str, Tensor], windows: np.ndarray) -> Tensor:
    """windows: (mu, B, 3) normalized, chronological. Returns (B, latent) tensor."""
    mu, b, _ = windows.shape
    d_h = p["enc.w_hr"].data.shape[0]
    h = constant(np.zeros((b, d_h)))
    one = constant(1.0)
    neg_one = constant(-1.0)
    for i in range(mu):
        x = constant(windows[i])
        r = sigmoid(add(add(matmul(x, p["enc.w_xr"]), matmul(h, p["enc.w_hr"])), p["enc.b_r"]))
        u = sigmoid(add(add(matmul(x, p["enc.w_xu"]), matmul(h, p["enc.w_hu"])), p["enc.b_u"]))
        c = tanh(add(add(matmul(x, p["enc.w_xc"]), matmul(mul(r, h), p["enc.w_hc"])), p["enc.b_c"]))
        # h' = (1 - u) * h + u * c
        h = add(mul(add(one, mul(u, neg_one)), h), mul(u, c))
    return add(matmul(h, p["enc.w_out"]), p["enc.b_out"])


def _mlp(p: dict[str, Tensor], prefix: str, x: Tensor) -> Tensor:
    h = tanh(add(matmul(x, p[f"{prefix}.w1"]), p[f"{prefix}.b1"]))
    h = tanh(add(matmul(h, p[f"{prefix}.w2"]), p[f"{prefix}.b2"]))
    return add(matmul(h, p[f"{prefix}.w3"]), p[f"{prefix}.b3"])


def _dynamics_field(p: dict[str, Tensor], batch: int) -> Callable[[Tensor, float], Tensor]:
    def field(z: Tensor, tau: float) -> Tensor:
        inp = concat([z, constant(np.full((batch, 1), tau))], axis=1)
        return _mlp(p, "dyn", inp)
    return field


def integrate_field(field: Callable[[Tensor, float], Tensor], z0: Tensor,
                    start_epoch: int, end_epoch: int, time_scale: int, substeps: int,
                    check: bool = False) -> tuple[list[Tensor], list[Tensor]]:
    """Classical RK4 with fixed step 1/(time_scale * substeps) in tau units.

    Substep times come from the global substep index, so integrating [a, b]
    then [b, c] is bit-identical to integrating [a, c]. Returns the state at
    every epoch boundary (z(start) first) and the stage-2 field evaluations
    (one per substep, at the step midpoint) for the path penalty.
    """
    h = 1.0 / (time_scale * substeps)
    c_h2 = constant(h / 2.0)
    c_h = constant(h)
    c_h6 = constant(h / 6.0)
    c_2 = constant(2.0)
    states = [z0]
    mids = []
    z = z0
    for j in range(start_epoch * substeps, end_epoch * substeps):
        t0 = j * h
        k1 = field(z, t0)
        k2 = field(add(z, mul(k1, c_h2)), t0 + h / 2.0)
        k3 = field(add(z, mul(k2, c_h2)), t0 + h / 2.0)
        k4 = field(add(z, mul(k3, c_h)), t0 + h)
        z = add(z, mul(add(add(k1, k4), mul(add(k2, k3), c_2)), c_h6))
        if check and not np.all(np.isfinite(z.data)):
            raise IntegrationError(j)
        mids.append(k2)
        if (j + 1) % substeps == 0:
            states.append(z)
    return states, mids


def _decode_states(p: dict[str, Tensor], states: list[Tensor]) -> Tensor:
    stacked = states[0] if len(states) == 1 else concat(states, axis=0)
    return _mlp(p, "dec", stacked)


def _leaf_params(g: CompGraph, model: LodeModel) -> dict[str, Tensor]:
    return {name: g.leaf(arr, name) for name, arr in named_parameters(model).items()}


def _epoch_of_tau(tau: float, time_scale: int) -> int:
    e = tau * time_scale
    rounded = round(e)
    if abs(e - rounded) > 1e-9 * max(1.0, abs(e)):
        raise LodeError(f"time {tau} is not on the epoch grid (1/{time_scale} spacing)")
    return int(rounded)


# ---------------------------------------------------------------------------
# Public operations


def encode(model: LodeModel, w: Window) -> LatentState:
    """Summarize a normalized window into the initial latent state."""
    if w.channels.ndim != 2 or w.channels.shape[1] != 3:
        raise LodeError(f"window must have 3 channels, got shape {w.channels.shape}")
    return encode_windows(model, w.channels[:, None, :])[0]


def encode_windows(model: LodeModel, windows: np.ndarray) -> np.ndarray:
    """Batched encode: (mu, B, 3) normalized windows -> (B, latent)."""
    g = CompGraph()
    with g:
        p = _leaf_params(g, model)
        z0 = _gru_encode(p, np.asarray(windows, dtype=np.float64))
    return z0.data.copy()


def integrate(model: LodeModel, z0: LatentState, t_start: float, t_end: float) -> list[LatentState]:
    """Advance z from t_start to t_end (tau units, epoch-grid-aligned).

    Returns z at every epoch boundary, starting with z(t_start) = z0.
    """
    ts = model.normalization.time_scale
    e0 = _epoch_of_tau(t_start, ts)
    e1 = _epoch_of_tau(t_end, ts)
    if e1 < e0:
        raise LodeError("t_end must be >= t_start")
    z = np.asarray(z0, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise IntegrationError(e0 * model.substeps)
    g = CompGraph()
    with g:
        p = _leaf_params(g, model)
        z_t = g.leaf(z[None, :])
        states, _ = integrate_field(_dynamics_field(p, 1), z_t, e0, e1, ts,
                                    model.substeps, check=True)
    return [s.data[0].copy() for s in states]


def decode(model: LodeModel, zs) -> np.ndarray:
    """Map latent states (S, latent) or a list of vectors to normalized (S, 3)."""
    zmat = np.atleast_2d(np.asarray(zs, dtype=np.float64))
    if not np.all(np.isfinite(zmat)):
        raise LodeError("non-finite latent state passed to decode")
    g = CompGraph()
    with g:
        p = _leaf_params(g, model)
        out = _mlp(p, "dec", g.leaf(zmat))
    return out.data.copy()


def rollout(model: LodeModel, latents: np.ndarray, end_epoch: int) -> np.ndarray:
    """Integrate a batch of latents from epoch 0 to end_epoch and decode.

    Returns normalized channels of shape (end_epoch + 1, B, 3). Non-finite
    rows stay confined to their batch entry (all per-sample math is row-local),
    so callers can mask failed ensemble members instead of aborting.
    """
    zmat = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    b = zmat.shape[0]
    g = CompGraph()
    with g:
        p = _leaf_params(g, model)
        z_t = g.leaf(zmat)
        states, _ = integrate_field(_dynamics_field(p, b), z_t, 0, end_epoch,
                                    model.normalization.time_scale, model.substeps)
        out = _decode_states(p, states)
    return out.data.reshape(end_epoch + 1, b, 3)


# ---------------------------------------------------------------------------
# Loss


def _loss_graph(params: dict[str, np.ndarray], items: list[tuple[np.ndarray, np.ndarray]],
                time_scale: int, substeps: int, path_weight: float) -> tuple[Tensor, CompGraph]:
    """items: (window_channels (mu, 3), target (T, 3)) pairs, all normalized.

    Loss = mean over runs of the per-run reconstruction MSE (all epochs and
    channels) + path_weight * mean over (run, substep) of |field|^2, the
    field sampled at the RK4 stage-2 midpoints. Items are grouped by shape so
    equal-length runs share one batched graph.
    """
    groups: dict[tuple[int, int], list[tuple[np.ndarray, np.ndarray]]] = {}
    for ch, tg in items:
        groups.setdefault((ch.shape[0], tg.shape[0]), []).append((ch, tg))

    n_total = len(items)
    steps_total = sum((t_len - 1) * substeps * len(members)
                      for (_, t_len), members in groups.items())
    g = CompGraph()
    with g:
        p = {name: g.leaf(arr, name) for name, arr in params.items()}
        d_z = p["dyn.b3"].data.shape[0]
        recon_terms = []
        pen_terms = []
        for (mu, t_len), members in groups.items():
            b = len(members)
            wins = np.stack([ch for ch, _ in members], axis=1)          # (mu, B, 3)
            targets = np.stack([tg for _, tg in members], axis=1)       # (T, B, 3)
            z0 = _gru_encode(p, wins)
            states, mids = integrate_field(_dynamics_field(p, b), z0, 0, t_len - 1,
                                           time_scale, substeps)
            pred = _decode_states(p, states)                             # (T*B, 3)
            recon = mse(pred, constant(targets.reshape(t_len * b, 3)))
            recon_terms.append(mul(recon, constant(b / n_total)))
            if path_weight > 0 and mids:
                mid_cat = concat(mids, axis=0)                           # (S*B, d_z)
                pen = mse(mid_cat, constant(np.zeros_like(mid_cat.data)))
                weight = path_weight * d_z * (b * len(mids)) / steps_total
                pen_terms.append(mul(pen, constant(weight)))
        loss = recon_terms[0]
        for term in recon_terms[1:]:
            loss = add(loss, term)
        for term in pen_terms:
            loss = add(loss, term)
    g.output = loss
    return loss, g


def model_loss(model: LodeModel, batch: list[tuple[Window, np.ndarray]]) -> float:
    """Reconstruction + path-penalty loss for (window, normalized target) pairs."""
    if not batch:
        raise LodeError("batch must be non-empty")
    items = [(w.channels, np.asarray(tg, dtype=np.float64)) for w, tg in batch]
    loss, _ = _loss_graph(named_parameters(model), items,
                          model.normalization.time_scale, model.substeps, model.path_weight)
    return float(loss.data)


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainConfig:
    n_updates: int = 10_000
    batch_size: int = 20
    peak_lr: float = 1e-3
    seed: int = 0
    prefix_lo: float = 0.05
    prefix_hi: float = 0.5
    latent_dim: int = 20
    hidden_dim: int = 20
    mlp_width: int = 20
    substeps: int = 4
    path_weight: float = 1e-3

    def __post_init__(self):
        if self.batch_size < 1 or self.n_updates < 1:
            raise LodeError("batch_size and n_updates must be >= 1")
        if not (0.0 < self.prefix_lo <= self.prefix_hi <= 1.0):
            raise LodeError("prefix fraction range must satisfy 0 < lo <= hi <= 1")


def train_lode(corpus: Sequence[Trajectory], cfg: TrainConfig) -> tuple[LodeModel, np.ndarray]:
    """Fit the latent-ODE model on a trajectory corpus.

    Each update samples ``batch_size`` runs (with replacement) and one prefix
    fraction uniform in [prefix_lo, prefix_hi], encodes each run's prefix and
    reconstructs the full run. Adam with a onecycle ramp peaking at
    ``peak_lr``. Fully reproducible from ``cfg.seed``: the rng drives weight
    init, then per update the run indices and the prefix fraction, in that
    order.
    """
    if len(corpus) < 2:
        raise LodeError("training needs at least 2 runs")
    spec = fit_normalization(corpus)
    rng = np.random.default_rng(cfg.seed)
    params = init_parameters(rng, cfg.latent_dim, cfg.hidden_dim, cfg.mlp_width)
    adam = init_adam(params)
    norm_mats = [spec.normalize_matrix(t.channel_matrix()) for t in corpus]
    lengths = [len(t) for t in corpus]
    n_runs = len(corpus)
    lr_spec = onecycle(cfg.peak_lr, cfg.n_updates) if cfg.n_updates >= 2 else None

    history = np.empty(cfg.n_updates)
    for step in range(cfg.n_updates):
        idx = rng.integers(0, n_runs, size=cfg.batch_size)
        frac = rng.uniform(cfg.prefix_lo, cfg.prefix_hi)
        items = []
        for i in idx:
            plen = min(max(2, round(frac * lengths[i])), lengths[i])
            items.append((norm_mats[i][:plen], norm_mats[i]))
        loss, graph = _loss_graph(params, items, spec.time_scale,
                                  cfg.substeps, cfg.path_weight)
        value = float(loss.data)
        if not math.isfinite(value):
            raise TrainingDiverged(step)
        grads = backward(graph)
        lr = eval_schedule(lr_spec, step) if lr_spec is not None else cfg.peak_lr
        params, adam = adam_step(params, grads, adam, lr)
        history[step] = value

    return assemble_model(params, spec, cfg.substeps, cfg.path_weight), history


# ---------------------------------------------------------------------------
# Prediction and evaluation


def _predict_norm(model: LodeModel, channels_list: list[np.ndarray], out_len: int) -> np.ndarray:
    """Encode same-width windows and reconstruct epochs 0..out_len-1 (normalized)."""
    wins = np.stack(channels_list, axis=1)
    z0 = encode_windows(model, wins)
    return rollout(model, z0, out_len - 1)


def relative_mse(pred: np.ndarray, truth: np.ndarray) -> float:
    """sum((pred-truth)^2) / sum((truth-mean)^2); 0 for an exact constant fit,
    inf when truth is constant but pred misses it."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    num = float(np.sum((pred - truth) ** 2))
    den = float(np.sum((truth - truth.mean()) ** 2))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def predict_from_prefix(model: LodeModel, traj: Trajectory,
                        prefix_fraction: float) -> tuple[np.ndarray, dict[str, float]]:
    """Encode the run's leading fraction, reconstruct the whole run, and score it.

    Returns the denormalized (T, 3) prediction and per-channel relative MSE
    against the true run, computed on raw values over the full run.
    """
    if not (0.0 < prefix_fraction <= 1.0):
        raise LodeError("prefix_fraction must be in (0, 1]")
    t_len = len(traj)
    plen = min(int(round(prefix_fraction * t_len)), t_len)
    if plen < 2:
        raise LodeError(f"prefix of {plen} points is too short (need >= 2)")
    w = window(traj, plen - 1, plen, model.normalization)
    norm_pred = _predict_norm(model, [w.channels], t_len)[:, 0, :]
    raw_pred = model.normalization.denormalize_matrix(norm_pred)
    truth = traj.channel_matrix()
    scores = {"train_loss": relative_mse(raw_pred[:, 0], truth[:, 0]),
              "val_metric": relative_mse(raw_pred[:, 1], truth[:, 1]),
              "lr": relative_mse(raw_pred[:, 2], truth[:, 2])}
    return raw_pred, scores


def _predicted_final_metrics(model: LodeModel, corpus: Sequence[Trajectory],
                             prefix_epochs: int) -> dict[str, float]:
    """Predicted final-epoch validation metric per run, from a fixed-width prefix."""
    spec = model.normalization
    by_len: dict[int, list[int]] = {}
    for i, t in enumerate(corpus):
        by_len.setdefault(len(t), []).append(i)
    out: dict[str, float] = {}
    for t_len, idxs in by_len.items():
        chans = [spec.normalize_matrix(corpus[i].channel_matrix())[:prefix_epochs]
                 for i in idxs]
        norm = _predict_norm(model, chans, t_len)
        finals = spec.metric.denormalize(norm[-1, :, 1])
        for j, i in enumerate(idxs):
            out[corpus[i].run_id] = float(finals[j])
    return out


def rank_runs(model: LodeModel, corpus: Sequence[Trajectory], prefix_epochs: int) -> list[str]:
    """Run ids sorted by predicted final validation metric, best first.

    Ties break by lexicographic run_id. Unlike predict_from_prefix, a single
    leading epoch is a valid prefix here (one-point windows encode fine).
    """
    if not corpus:
        raise LodeError("corpus is empty")
    if prefix_epochs < 1 or prefix_epochs > min(len(t) for t in corpus):
        raise LodeError("prefix_epochs must be >= 1 and <= every run's length")
    predicted = _predicted_final_metrics(model, corpus, prefix_epochs)
    return sorted(predicted, key=lambda rid: (-predicted[rid], rid))


def eval_reconstruction(model: LodeModel, runs: Sequence[Trajectory],
                        prefix_fraction: float) -> dict[str, float]:
    """Pooled per-channel relative MSE over a set of runs.

    Numerator and denominator are pooled across all runs and epochs (raw
    space, pooled mean), so constant channels in individual runs stay
    well-defined.
    """
    preds, truths = [], []
    for traj in runs:
        raw_pred, _ = predict_from_prefix(model, traj, prefix_fraction)
        preds.append(raw_pred)
        truths.append(traj.channel_matrix())
    pred = np.concatenate(preds, axis=0)
    truth = np.concatenate(truths, axis=0)
    names = ("train_loss", "val_metric", "lr")
    return {name: relative_mse(pred[:, c], truth[:, c]) for c, name in enumerate(names)}


# ---------------------------------------------------------------------------
# Checkpoints


def save_checkpoint(model: LodeModel, path) -> None:
    doc = {
        "schema_version": 1,
        "d_z": model.latent_dim,
        "d_h": model.hidden_dim,
        "k": model.substeps,
        "lambda_path": model.path_weight,
        "normalization": model.normalization.to_dict(),
        "encoder": {f: getattr(model.encoder, f).tolist() for f in _ENC_FIELDS},
        "dynamics": {f: getattr(model.dynamics, f).tolist() for f in _MLP_FIELDS},
        "decoder": {f: getattr(model.decoder, f).tolist() for f in _MLP_FIELDS},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path) -> LodeModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != 1:
        raise LodeError(f"unsupported checkpoint schema {doc.get('schema_version')!r}")
    enc = EncoderParams(**{f: np.array(doc["encoder"][f], dtype=np.float64) for f in _ENC_FIELDS})
    dyn = MlpParams(**{f: np.array(doc["dynamics"][f], dtype=np.float64) for f in _MLP_FIELDS})
    dec = MlpParams(**{f: np.array(doc["decoder"][f], dtype=np.float64) for f in _MLP_FIELDS})
    return LodeModel(encoder=enc, dynamics=dyn, decoder=dec,
                     normalization=NormalizationSpec.from_dict(doc["normalization"]),
                     latent_dim=int(doc["d_z"]), hidden_dim=int(doc["d_h"]),
                     substeps=int(doc["k"]), path_weight=float(doc["lambda_path"]))
