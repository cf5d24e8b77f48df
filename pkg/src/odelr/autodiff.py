"""Reverse-mode automatic differentiation over a small, closed primitive set.

Graphs are rebuilt per step (define-by-run): primitives called while a
CompGraph is active append one node each, and ``backward`` replays the tape
in reverse. All math is float64; the models here are tiny, so reproducibility
and finite-difference validation matter more than speed.

The primitive set is deliberately minimal: matmul, add, mul, tanh, sigmoid,
concat, slice, sum, mse, softmax_xent. Recurrent cells and MLPs are
compositions of these, which keeps the gradient-audit surface small.
softmax_xent is fused (like mse) because a numerically stable cross-entropy
is not expressible from the elementwise primitives alone.

Graph construction and backward are single-threaded per graph; independent
graphs share no mutable state and may be evaluated concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DTYPE = np.float64


class ShapeError(ValueError):
    """Raised when primitive inputs have incompatible shapes."""


class NonFiniteError(FloatingPointError):
    """Raised when a checked value contains NaN or Inf."""


class Tensor:
    """A node in a computation graph: a float64 array plus an adjoint slot."""

    __slots__ = ("data", "grad", "op", "inputs", "ctx")

    def __init__(self, data, op="leaf", inputs=(), ctx=None):
        self.data = data
        self.grad = None
        self.op = op
        self.inputs = inputs
        self.ctx = ctx

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(op={self.op!r}, shape={self.data.shape})"


class CompGraph:
    """Tape of primitive applications, in topological (construction) order."""

    def __init__(self, validate: bool = False):
        self.nodes: list[Tensor] = []      # primitive outputs only
        self.tensors: list[Tensor] = []    # every tensor created under this graph
        self.leaves: dict[str, Tensor] = {}
        self.output: Tensor | None = None
        self.validate = validate

    def __enter__(self):
        _push(self)
        return self

    def __exit__(self, *exc):
        _pop(self)
        return False

    def leaf(self, data, name: str | None = None) -> Tensor:
        t = Tensor(np.asarray(data, dtype=DTYPE))
        self.tensors.append(t)
        if name is not None:
            if name in self.leaves:
                raise ValueError(f"duplicate leaf name {name!r}")
            self.leaves[name] = t
        return t


_STACK: list[CompGraph] = []


def _push(g):
    _STACK.append(g)


def _pop(g):
    top = _STACK.pop()
    if top is not g:
        raise RuntimeError("mismatched graph context")


def _active() -> CompGraph:
    if not _STACK:
        raise RuntimeError("no active CompGraph; build one with `with CompGraph():`")
    return _STACK[-1]


def constant(x) -> Tensor:
    """Anonymous leaf on the active graph (no gradient is reported for it)."""
    return _active().leaf(x)


def _as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return constant(x)


def _node(op, value, inputs, ctx=None) -> Tensor:
    g = _active()
    t = Tensor(value, op, inputs, ctx)
    if g.validate and not np.all(np.isfinite(value)):
        raise NonFiniteError(f"non-finite output of primitive {op!r}")
    g.nodes.append(t)
    g.tensors.append(t)
    return t


# ---------------------------------------------------------------------------
# Primitives


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.data.shape} @ {b.data.shape}")
    return _node("matmul", a.data @ b.data, (a, b))


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError as e:
        raise ShapeError(f"add: incompatible shapes {a.data.shape} + {b.data.shape}") from e
    return _node("add", out, (a, b))


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError as e:
        raise ShapeError(f"mul: incompatible shapes {a.data.shape} * {b.data.shape}") from e
    return _node("mul", out, (a, b))


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    return _node("tanh", np.tanh(a.data), (a,))


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    # Sign-split form avoids overflow in exp for large |x|.
    x = a.data
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                   np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return _node("sigmoid", out, (a,))


def concat(parts, axis: int = 0) -> Tensor:
    parts = tuple(_as_tensor(p) for p in parts)
    if not parts:
        raise ShapeError("concat: no inputs")
    try:
        out = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: incompatible shapes {[p.data.shape for p in parts]}") from e
    sizes = tuple(p.data.shape[axis] for p in parts)
    return _node("concat", out, parts, (axis, sizes))


def slice_(a, start: int, stop: int, axis: int = 0) -> Tensor:
    a = _as_tensor(a)
    n = a.data.shape[axis]
    if not (0 <= start <= stop <= n):
        raise ShapeError(f"slice: range [{start}:{stop}] out of bounds for axis {axis} of {a.data.shape}")
    idx = tuple(slice(start, stop) if i == axis else slice(None) for i in range(a.data.ndim))
    return _node("slice", a.data[idx], (a,), (axis, start, stop))


def sum_(a) -> Tensor:
    a = _as_tensor(a)
    return _node("sum", np.asarray(np.sum(a.data)), (a,))


def mse(pred, target) -> Tensor:
    pred, target = _as_tensor(pred), _as_tensor(target)
    if pred.data.shape != target.data.shape:
        raise ShapeError(f"mse: shape mismatch {pred.data.shape} vs {target.data.shape}")
    diff = pred.data - target.data
    out = np.asarray(np.mean(diff * diff))
    return _node("mse", out, (pred, target), diff)


def softmax_xent(logits, onehot) -> Tensor:
    """Mean softmax cross-entropy over rows; fused for numerical stability."""
    logits, onehot = _as_tensor(logits), _as_tensor(onehot)
    if logits.data.shape != onehot.data.shape or logits.data.ndim != 2:
        raise ShapeError(f"softmax_xent: shape mismatch {logits.data.shape} vs {onehot.data.shape}")
    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    denom = ez.sum(axis=1, keepdims=True)
    logp = (z - zmax) - np.log(denom)
    out = np.asarray(-np.mean(np.sum(onehot.data * logp, axis=1)))
    return _node("softmax_xent", out, (logits, onehot), (ez / denom, logp))


PRIMITIVES = ("matmul", "add", "mul", "tanh", "sigmoid",
              "concat", "slice", "sum", "mse", "softmax_xent")


# ---------------------------------------------------------------------------
# Backward


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _acc(t: Tensor, delta):
    t.grad = delta if t.grad is None else t.grad + delta


def _bwd_matmul(t, g):
    a, b = t.inputs
    _acc(a, g @ b.data.T)
    _acc(b, a.data.T @ g)


def _bwd_add(t, g):
    a, b = t.inputs
    _acc(a, _unbroadcast(g, a.data.shape))
    _acc(b, _unbroadcast(g, b.data.shape))


def _bwd_mul(t, g):
    a, b = t.inputs
    _acc(a, _unbroadcast(g * b.data, a.data.shape))
    _acc(b, _unbroadcast(g * a.data, b.data.shape))


def _bwd_tanh(t, g):
    (a,) = t.inputs
    _acc(a, g * (1.0 - t.data * t.data))


def _bwd_sigmoid(t, g):
    (a,) = t.inputs
    _acc(a, g * t.data * (1.0 - t.data))


def _bwd_concat(t, g):
    axis, sizes = t.ctx
    offset = 0
    for p, n in zip(t.inputs, sizes):
        idx = tuple(slice(offset, offset + n) if i == axis else slice(None)
                    for i in range(g.ndim))
        _acc(p, g[idx])
        offset += n


def _bwd_slice(t, g):
    (a,) = t.inputs
    axis, start, stop = t.ctx
    full = np.zeros_like(a.data)
    idx = tuple(slice(start, stop) if i == axis else slice(None) for i in range(a.data.ndim))
    full[idx] = g
    _acc(a, full)


def _bwd_sum(t, g):
    (a,) = t.inputs
    _acc(a, np.full(a.data.shape, g, dtype=DTYPE))


def _bwd_mse(t, g):
    pred, target = t.inputs
    scaled = (2.0 / t.ctx.size) * g * t.ctx
    _acc(pred, scaled)
    _acc(target, -scaled)


def _bwd_softmax_xent(t, g):
    logits, onehot = t.inputs
    softmax, logp = t.ctx
    b = logits.data.shape[0]
    row_mass = onehot.data.sum(axis=1, keepdims=True)
    _acc(logits, (g / b) * (row_mass * softmax - onehot.data))
    _acc(onehot, (-g / b) * logp)


# Dispatch by primitive id; tests may monkeypatch entries to simulate a
# corrupted adjoint.
VJPS: dict[str, Callable] = {
    "matmul": _bwd_matmul,
    "add": _bwd_add,
    "mul": _bwd_mul,
    "tanh": _bwd_tanh,
    "sigmoid": _bwd_sigmoid,
    "concat": _bwd_concat,
    "slice": _bwd_slice,
    "sum": _bwd_sum,
    "mse": _bwd_mse,
    "softmax_xent": _bwd_softmax_xent,
}


def eval_graph(program: Callable[[dict[str, Tensor]], Tensor],
               inputs: dict[str, np.ndarray],
               validate: bool = False) -> tuple[Tensor, CompGraph]:
    """Run ``program`` on named leaf tensors under a fresh graph.

    Returns the output tensor and the recorded graph; feed the graph to
    ``backward`` to obtain gradients keyed by input name.
    """
    g = CompGraph(validate=validate)
    with g:
        leaves = {name: g.leaf(val, name) for name, val in inputs.items()}
        out = program(leaves)
    if not isinstance(out, Tensor):
        raise TypeError("program must return a Tensor")
    g.output = out
    return out, g


def backward(graph: CompGraph, seed: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Populate adjoints by the reverse sweep; return leaf gradients by name.

    ``seed`` defaults to 1 and then requires a scalar output; otherwise it
    must match the output shape.
    """
    out = graph.output
    if out is None:
        raise ValueError("graph has no output; build it with eval_graph or set graph.output")
    if seed is None:
        if out.data.ndim != 0 and out.data.size != 1:
            raise ShapeError(f"default seed needs a scalar output, got shape {out.data.shape}")
        seed = np.ones_like(out.data)
    else:
        seed = np.asarray(seed, dtype=DTYPE)
        if seed.shape != out.data.shape:
            raise ShapeError(f"seed shape {seed.shape} does not match output {out.data.shape}")
    for t in graph.tensors:
        t.grad = None
    out.grad = seed
    vjps = VJPS
    for t in reversed(graph.nodes):
        if t.grad is not None:
            vjps[t.op](t, t.grad)
    return {name: (leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data))
            for name, leaf in graph.leaves.items()}


def grad_check(fn: Callable[[dict[str, Tensor]], Tensor],
               params: dict[str, np.ndarray],
               eps: float = 1e-5) -> float:
    """Max relative error between reverse-mode and central-difference gradients.

    Relative error per coordinate is |analytic - fd| / max(1e-8, |analytic| + |fd|).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    params = {k: np.asarray(v, dtype=DTYPE) for k, v in params.items()}
    out, g = eval_graph(fn, params)
    if out.data.ndim != 0 and out.data.size != 1:
        raise ShapeError("grad_check requires a scalar-valued function")
    analytic = backward(g)

    def value_at(p):
        val = eval_graph(fn, p)[0].data
        v = float(val)
        if not np.isfinite(v):
            raise NonFiniteError("non-finite loss at a perturbed point")
        return v

    worst = 0.0
    for name, theta in params.items():
        flat = theta.ravel()
        a_flat = analytic[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = value_at(params)
            flat[i] = orig - eps
            f_minus = value_at(params)
            flat[i] = orig
            fd = (f_plus - f_minus) / (2.0 * eps)
            a = a_flat[i]
            err = abs(a - fd) / max(1e-8, abs(a) + abs(fd))
            if err > worst:
                worst = err
    return worst


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    """Bias-corrected Adam accumulators, keyed like the parameter dict."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: dict[str, np.ndarray], beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    return AdamState(m={k: np.zeros_like(v) for k, v in params.items()},
                     v={k: np.zeros_like(v) for k, v in params.items()},
                     step=0, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, lr: float) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if lr <= 0:
        raise ValueError("lr must be positive")
    t = state.step + 1
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    new_params, new_m, new_v = {}, {}, {}
    for k, theta in params.items():
        gk = grads[k]
        if gk.shape != theta.shape:
            raise ShapeError(f"adam_step: gradient shape {gk.shape} != param shape {theta.shape} for {k!r}")
        if not np.all(np.isfinite(gk)):
            raise NonFiniteError(f"non-finite gradient for {k!r}")
        m = state.beta1 * state.m[k] + (1.0 - state.beta1) * gk
        v = state.beta2 * state.v[k] + (1.0 - state.beta2) * (gk * gk)
        m_hat = m / bc1
        v_hat = v / bc2
        new_params[k] = theta - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m[k] = m
        new_v[k] = v
    return new_params, AdamState(m=new_m, v=new_v, step=t, beta1=state.beta1,
                                 beta2=state.beta2, eps=state.eps)
