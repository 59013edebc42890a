"""
Deterministic dense-network math shared by the auction and CommNet models.

Everything works on float64 numpy arrays. Shapes are validated explicitly;
a mismatch raises :class:`DimensionError` instead of broadcasting. Gradients
are derived by hand per architecture, so this module only supplies the
building blocks, the parameter container, plain SGD and a central-difference
checker to verify the hand-derived gradients.
"""
from __future__ import annotations

import logging
from typing import Callable, Iterator

import numpy as np

from .config.exceptions import DimensionError, NumericalError

__all__ = [
    "ParamStore",
    "affine_eval",
    "activation",
    "activation_grad",
    "softmax_temp",
    "group_max_of_min",
    "group_min_of_max",
    "sgd_step",
    "finite_diff_grad",
    "relative_error",
    "ACTIVATIONS",
]

_logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "tanh", "sigmoid")


class ParamStore:
    """Ordered map of named parameter arrays, each with a gradient slot.

    Iteration follows insertion order, which keeps training bit-reproducible.
    A store is mutated only by :func:`sgd_step` and gradient accumulation, and
    must stay on one thread while training.
    """

    def __init__(self):
        self._values: dict[str, np.ndarray] = {}
        self._grads: dict[str, np.ndarray] = {}

    def add(self, name: str, values) -> np.ndarray:
        if name in self._values:
            raise KeyError(f"Parameter '{name}' already exists")
        arr = np.array(values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"initial value of '{name}'")
        self._values[name] = arr
        self._grads[name] = np.zeros_like(arr)
        return arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self._values[name]

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def names(self) -> list[str]:
        return list(self._values)

    def items(self):
        return self._values.items()

    def grad(self, name: str) -> np.ndarray:
        return self._grads[name]

    def accumulate(self, name: str, g) -> None:
        """Add `g` into the gradient slot of `name`."""
        g = np.asarray(g, dtype=np.float64)
        slot = self._grads[name]
        if g.shape != slot.shape:
            raise DimensionError(f"gradient of '{name}'", slot.shape, g.shape)
        slot += g

    def zero_grad(self) -> None:
        for g in self._grads.values():
            g.fill(0.0)

    @property
    def size(self) -> int:
        return sum(v.size for v in self._values.values())

    def grad_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(g * g) for g in self._grads.values())))

    def copy(self) -> ParamStore:
        other = ParamStore()
        for name, v in self._values.items():
            other.add(name, v)
        return other

    def to_json(self) -> dict[str, list]:
        return {name: v.tolist() for name, v in self._values.items()}

    @classmethod
    def from_json(cls, params: dict[str, list]) -> ParamStore:
        store = cls()
        for name, v in params.items():
            store.add(name, v)
        return store

    def __repr__(self):
        shapes = ", ".join(f"{n}{tuple(v.shape)}" for n, v in self._values.items())
        return f"ParamStore({shapes})"


def _check_shape(operation, expected, got):
    if tuple(expected) != tuple(got):
        raise DimensionError(operation, tuple(expected), tuple(got))


def affine_eval(W, x, b) -> np.ndarray:
    """Return ``W x + b``.

    `x` may carry leading batch axes: shape ``(..., cols)`` yields ``(..., rows)``.
    """
    W = np.asarray(W, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if W.ndim != 2:
        raise DimensionError("affine_eval weight", ("rows", "cols"), W.shape)
    rows, cols = W.shape
    if x.ndim == 0:
        raise DimensionError("affine_eval input", (cols,), x.shape)
    _check_shape("affine_eval input", (cols,), x.shape[-1:])
    _check_shape("affine_eval bias", (rows,), b.shape)
    return x @ W.T + b


def activation(kind: str, x) -> np.ndarray:
    """Elementwise non-linearity: relu, tanh or sigmoid."""
    x = np.asarray(x, dtype=np.float64)
    match kind:
        case "relu":
            return np.maximum(x, 0.0)
        case "tanh":
            return np.tanh(x)
        case "sigmoid":
            # tanh form never overflows
            return 0.5 * (1.0 + np.tanh(0.5 * x))
        case _:
            raise ValueError(f"Unknown activation '{kind}', expected one of {ACTIVATIONS}")


def activation_grad(kind: str, x, y) -> np.ndarray:
    """Derivative of the activation at pre-activation `x` with output `y`."""
    match kind:
        case "relu":
            return (np.asarray(x) > 0).astype(np.float64)
        case "tanh":
            return 1.0 - y * y
        case "sigmoid":
            return y * (1.0 - y)
        case _:
            raise ValueError(f"Unknown activation '{kind}', expected one of {ACTIVATIONS}")


def softmax_temp(x, k: float = 1.0, axis: int = -1) -> np.ndarray:
    """Softmax of ``k * x`` along `axis`, with max-subtraction for overflow safety."""
    if not k > 0:
        raise ValueError(f"Softmax temperature must be positive, got {k}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise DimensionError("softmax_temp", ("n >= 1",), x.shape)
    z = k * x
    z = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def _pieces(x, w, theta, operation):
    w = np.asarray(w, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise DimensionError(operation, ("K >= 1", "J >= 1"), w.shape)
    _check_shape(operation, w.shape, theta.shape)
    x = np.asarray(x, dtype=np.float64)
    return x, w, theta


def group_max_of_min(x, w, theta, return_index: bool = False):
    """Evaluate ``max_k min_j (w[k, j] * x + theta[k, j])``.

    `x` may be a scalar or an array; the result has the shape of `x`. With
    `return_index`, the active piece ``(k, j)`` is returned as well; ties pick
    the first attaining index.
    """
    x, w, theta = _pieces(x, w, theta, "group_max_of_min")
    z = x[..., None, None] * w + theta
    j = np.argmin(z, axis=-1)
    t = np.take_along_axis(z, j[..., None], axis=-1)[..., 0]
    k = np.argmax(t, axis=-1)
    out = np.take_along_axis(t, k[..., None], axis=-1)[..., 0]
    if not return_index:
        return out
    j_active = np.take_along_axis(j, k[..., None], axis=-1)[..., 0]
    return out, k, j_active


def group_min_of_max(x, w, theta, return_index: bool = False):
    """Evaluate ``min_k max_j (w[k, j] * x + theta[k, j])``; the dual of
    :func:`group_max_of_min`."""
    x, w, theta = _pieces(x, w, theta, "group_min_of_max")
    z = x[..., None, None] * w + theta
    j = np.argmax(z, axis=-1)
    t = np.take_along_axis(z, j[..., None], axis=-1)[..., 0]
    k = np.argmin(t, axis=-1)
    out = np.take_along_axis(t, k[..., None], axis=-1)[..., 0]
    if not return_index:
        return out
    j_active = np.take_along_axis(j, k[..., None], axis=-1)[..., 0]
    return out, k, j_active


def sgd_step(store: ParamStore, lr: float) -> ParamStore:
    """Apply ``p <- p - lr * grad`` to every parameter, then zero the gradients.

    The step is all-or-nothing: a non-finite gradient anywhere aborts it before
    any parameter changes.
    """
    if lr < 0:
        raise ValueError(f"Learning rate must be non-negative, got {lr}")
    for name in store:
        g = store.grad(name)
        if not np.all(np.isfinite(g)):
            bad = int(np.size(g) - np.count_nonzero(np.isfinite(g)))
            _logger.error("Non-finite gradient in '%s' (%d entries)", name, bad)
            raise NumericalError(f"gradient of '{name}'", bad)
    for name in store:
        values = store[name]
        values -= lr * store.grad(name)
    store.zero_grad()
    return store


def finite_diff_grad(
    f: Callable[[ParamStore], float], store: ParamStore, eps: float = 1e-5
) -> dict[str, np.ndarray]:
    """Central-difference gradient of a scalar function of the store's parameters.

    Every entry is perturbed in place and restored exactly afterwards.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    grads = {}
    for name in store:
        values = store[name]
        g = np.zeros_like(values)
        flat = values.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            up = f(store)
            flat[i] = saved - eps
            down = f(store)
            flat[i] = saved
            gflat[i] = (up - down) / (2.0 * eps)
        grads[name] = g
    return grads


def relative_error(analytic, numeric) -> float:
    """``|a - n| / max(|a|, |n|, 1e-8)`` over the flattened arrays (or dicts of arrays)."""
    if isinstance(analytic, dict):
        names = list(analytic)
        a = np.concatenate([np.ravel(analytic[n]) for n in names])
        n = np.concatenate([np.ravel(numeric[n]) for n in names])
    else:
        a = np.ravel(np.asarray(analytic, dtype=np.float64))
        n = np.ravel(np.asarray(numeric, dtype=np.float64))
    scale = max(np.linalg.norm(a), np.linalg.norm(n), 1e-8)
    return float(np.linalg.norm(a - n) / scale)
