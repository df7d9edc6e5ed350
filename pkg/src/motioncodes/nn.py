"""Dense-network numerics: layers, softmax losses, Adam, gradient checking.

Everything operates on float64 numpy arrays and explicit parameter
structures, so that training runs are bit-reproducible under a fixed seed
and analytic gradients can be verified against central finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

RELU = "relu"
IDENTITY = "identity"
ACTIVATIONS = (RELU, IDENTITY)

EPS_CLIP = 1e-12
CHECKPOINT_VERSION = 1


class NNError(ValueError):
    pass


class DimensionMismatchError(NNError):
    pass


class ShapeMismatchError(NNError):
    pass


class TargetOutOfRangeError(NNError):
    pass


class NonFiniteLossError(NNError):
    pass


@dataclass
class Layer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = IDENTITY

    def __post_init__(self) -> None:
        self.weight = np.asarray(self.weight, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeMismatchError(
                f"weight {self.weight.shape} incompatible with bias {self.bias.shape}"
            )
        if self.activation not in ACTIVATIONS:
            raise NNError(f"unknown activation {self.activation!r}")
        if not (np.isfinite(self.weight).all() and np.isfinite(self.bias).all()):
            raise NNError("non-finite layer parameters")


@dataclass
class DenseParams:
    layers: list[Layer]

    def __post_init__(self) -> None:
        if not self.layers:
            raise NNError("DenseParams requires at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.weight.shape[1] != prev.weight.shape[0]:
                raise DimensionMismatchError(
                    f"layer output {prev.weight.shape[0]} feeds layer input "
                    f"{nxt.weight.shape[1]}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weight.shape[0]


def init_dense(
    rng: np.random.Generator, dims: Sequence[int], activations: Sequence[str]
) -> DenseParams:
    """Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases."""
    if len(activations) != len(dims) - 1:
        raise NNError("need one activation per layer")
    layers = []
    for i, act in enumerate(activations):
        fan_in, fan_out = dims[i], dims[i + 1]
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weight = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(Layer(weight, np.zeros(fan_out), act))
    return DenseParams(layers)


@dataclass
class ForwardCache:
    steps: list[tuple[np.ndarray, np.ndarray]]  # (layer input, pre-activation)
    single: bool


def forward(params: DenseParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Affine + activation per layer; accepts one vector or a (N, in) batch."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    h = arr[None, :] if single else arr
    if h.ndim != 2 or h.shape[1] != params.input_dim:
        raise DimensionMismatchError(
            f"input of width {arr.shape[-1] if arr.ndim else 0} does not match "
            f"first layer input {params.input_dim}"
        )
    steps = []
    for layer in params.layers:
        pre = h @ layer.weight.T + layer.bias
        steps.append((h, pre))
        h = np.maximum(pre, 0.0) if layer.activation == RELU else pre
    return (h[0] if single else h), ForwardCache(steps, single)


def backward(
    params: DenseParams, cache: ForwardCache, grad_output: np.ndarray
) -> tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray]:
    """Backprop through the cached forward pass.

    Returns per-layer (dW, db) gradients summed over the batch, plus the
    gradient with respect to the input.
    """
    g = np.asarray(grad_output, dtype=float)
    if cache.single:
        g = g[None, :]
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params.layers)  # type: ignore[list-item]
    for i in range(len(params.layers) - 1, -1, -1):
        x_in, pre = cache.steps[i]
        layer = params.layers[i]
        if layer.activation == RELU:
            g = g * (pre > 0)
        grads[i] = (g.T @ x_in, g.sum(axis=0))
        g = g @ layer.weight
    return grads, (g[0] if cache.single else g)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; invariant under constant shifts."""
    arr = np.asarray(logits, dtype=float)
    shifted = arr - arr.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, target: int) -> float:
    """-log p[target], clipped at 1e-12 so degenerate predictions stay bounded."""
    p = np.asarray(probs, dtype=float)
    if not 0 <= target < p.shape[-1]:
        raise TargetOutOfRangeError(f"target {target} outside [0, {p.shape[-1]})")
    return float(-np.log(max(float(p[target]), EPS_CLIP)))


def softmax_xent(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over batch rows and its gradient w.r.t. the logits."""
    probs = softmax(logits)
    n = logits.shape[0]
    rows = np.arange(n)
    if targets.min() < 0 or targets.max() >= logits.shape[1]:
        raise TargetOutOfRangeError("target index outside logit width")
    loss = float(-np.log(np.maximum(probs[rows, targets], EPS_CLIP)).mean())
    grad = probs.copy()
    grad[rows, targets] -= 1.0
    grad /= n
    return loss, grad


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[Sequence[np.ndarray], AdamState]:
    """One bias-corrected Adam update; mutates params and state in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatchError("params, grads and state must align")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeMismatchError(f"param {p.shape} vs grad {g.shape}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


def dense_arrays(params: DenseParams) -> list[np.ndarray]:
    """The parameter arrays of a network, in [W0, b0, W1, b1, ...] order."""
    out: list[np.ndarray] = []
    for layer in params.layers:
        out.append(layer.weight)
        out.append(layer.bias)
    return out


def grad_check(
    loss_fn: Callable[[Sequence[np.ndarray]], float],
    grad_fn: Callable[[Sequence[np.ndarray]], Sequence[np.ndarray]],
    params: Sequence[np.ndarray],
    eps: float = 1e-5,
) -> float:
    """Max relative error between analytic gradients and central differences.

    Perturbs every coordinate of every array by +-eps; parameters are
    restored afterwards.  Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-8).
    """
    if eps <= 0:
        raise NNError("eps must be positive")
    analytic = [np.asarray(g, dtype=float) for g in grad_fn(params)]
    if len(analytic) != len(params):
        raise ShapeMismatchError("analytic gradient count mismatch")
    worst = 0.0
    for p, a in zip(params, analytic):
        if p.shape != a.shape:
            raise ShapeMismatchError(f"param {p.shape} vs analytic grad {a.shape}")
        flat_p = p.reshape(-1)
        flat_a = a.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            hi = loss_fn(params)
            flat_p[i] = orig - eps
            lo = loss_fn(params)
            flat_p[i] = orig
            if not (math.isfinite(hi) and math.isfinite(lo)):
                raise NonFiniteLossError("loss is non-finite near the given params")
            numeric = (hi - lo) / (2.0 * eps)
            denom = max(abs(flat_a[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(flat_a[i] - numeric) / denom)
    return worst


def fit_multihead(
    trunk: DenseParams,
    heads: Sequence[DenseParams],
    inputs: np.ndarray,
    targets: np.ndarray,
    lambdas: Sequence[float],
    *,
    epochs: int,
    batch_size: int,
    lr: float,
    lr_decay: float,
    lr_decay_every: int,
    seed: int,
    epoch_end: Callable[[int], dict] | None = None,
) -> tuple[list[dict], AdamState]:
    """Mini-batch Adam on a shared trunk with per-head softmax cross-entropies.

    targets is an (N, K) integer array of per-head class indices; the batch
    loss is sum_k lambda_k * mean-CE_k.  Deterministic under the seed: one
    shuffle per epoch, gradient accumulation in fixed head order.
    """
    n = inputs.shape[0]
    rng = np.random.default_rng(seed)
    arrays = dense_arrays(trunk)
    for head in heads:
        arrays += dense_arrays(head)
    state = AdamState.for_params(arrays)
    history: list[dict] = []
    for epoch in range(epochs):
        cur_lr = lr * lr_decay ** (epoch // lr_decay_every)
        order = rng.permutation(n)
        running = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = inputs[idx]
            hidden, trunk_cache = forward(trunk, xb)
            grad_hidden = np.zeros_like(hidden)
            head_grads: list[np.ndarray] = []
            batch_loss = 0.0
            for k, head in enumerate(heads):
                logits, head_cache = forward(head, hidden)
                loss_k, dlogits = softmax_xent(logits, targets[idx, k])
                gk, dh = backward(head, head_cache, lambdas[k] * dlogits)
                grad_hidden += dh
                for dw, db in gk:
                    head_grads.append(dw)
                    head_grads.append(db)
                batch_loss += lambdas[k] * loss_k
            trunk_grads, _ = backward(trunk, trunk_cache, grad_hidden)
            flat: list[np.ndarray] = []
            for dw, db in trunk_grads:
                flat.append(dw)
                flat.append(db)
            flat += head_grads
            adam_step(arrays, flat, state, cur_lr)
            running += batch_loss * len(idx)
        row = {"epoch": epoch, "lr": cur_lr, "train_loss": running / n}
        if epoch_end is not None:
            row.update(epoch_end(epoch))
        history.append(row)
    return history, state


# --- checkpoint serialization -------------------------------------------------

def dense_to_jsonable(params: DenseParams) -> dict:
    return {
        "layers": [
            {
                "activation": layer.activation,
                "shape": list(layer.weight.shape),
                "weight": layer.weight.reshape(-1).tolist(),  # row-major
                "bias": layer.bias.tolist(),
            }
            for layer in params.layers
        ]
    }


def dense_from_jsonable(obj: dict) -> DenseParams:
    layers = []
    for spec in obj["layers"]:
        shape = tuple(spec["shape"])
        weight = np.asarray(spec["weight"], dtype=float).reshape(shape)
        layers.append(Layer(weight, np.asarray(spec["bias"], dtype=float), spec["activation"]))
    return DenseParams(layers)


def adam_to_jsonable(state: AdamState) -> dict:
    return {
        "t": state.t,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "eps": state.eps,
        "m": [{"shape": list(a.shape), "data": a.reshape(-1).tolist()} for a in state.m],
        "v": [{"shape": list(a.shape), "data": a.reshape(-1).tolist()} for a in state.v],
    }


def adam_from_jsonable(obj: dict) -> AdamState:
    def arrays(key: str) -> list[np.ndarray]:
        return [
            np.asarray(e["data"], dtype=float).reshape(tuple(e["shape"]))
            for e in obj[key]
        ]

    return AdamState(
        m=arrays("m"),
        v=arrays("v"),
        t=obj["t"],
        beta1=obj["beta1"],
        beta2=obj["beta2"],
        eps=obj["eps"],
    )


def write_checkpoint(path: str | Path, kind: str, payload: dict) -> None:
    """Write a checkpoint JSON document; identical payloads yield identical bytes."""
    doc = {"format_version": CHECKPOINT_VERSION, "kind": kind}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_checkpoint(path: str | Path, kind: str | None = None) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise NNError(f"unsupported checkpoint version {doc.get('format_version')!r}")
    if kind is not None and doc.get("kind") != kind:
        raise NNError(f"expected checkpoint kind {kind!r}, found {doc.get('kind')!r}")
    return doc
