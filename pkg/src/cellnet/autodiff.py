"""Minimal reverse-mode differentiation for the fixed CIN computation graph.

Only the handful of operations the model needs are provided (dense maps,
gather/segment-sum message routing, concatenation, ReLU/ELU, pooling and
the two losses).  Everything is double precision and summation orders are
fixed by the index arrays passed in, so runs are bit-reproducible.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("value", "parents", "grad_fn", "grad")

    def __init__(self, value, parents=(), grad_fn=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.grad_fn = grad_fn
        self.grad = None

    @property
    def shape(self):
        return self.value.shape


def _topo(root):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    return order


def backward(root: Tensor):
    """Accumulate gradients of a scalar root into every reachable tensor."""
    if root.value.size != 1:
        raise ValueError("backward expects a scalar loss")
    order = _topo(root)
    for node in order:
        node.grad = None
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node.grad is None or node.grad_fn is None:
            continue
        for parent, g in zip(node.parents, node.grad_fn(node.grad)):
            if g is None:
                continue
            if parent.grad is None:
                parent.grad = g.copy()
            else:
                parent.grad += g


# -- operations --------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.value @ b.value, (a, b))
    out.grad_fn = lambda g: (g @ b.value.T, a.value.T @ g)
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.value + b.value, (a, b))

    def grad_fn(g):
        ga = g if a.value.shape == g.shape else _unbroadcast(g, a.value.shape)
        gb = g if b.value.shape == g.shape else _unbroadcast(g, b.value.shape)
        return ga, gb

    out.grad_fn = grad_fn
    return out


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def scale(a: Tensor, factor: float) -> Tensor:
    out = Tensor(a.value * factor, (a,))
    out.grad_fn = lambda g: (g * factor,)
    return out


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    split = a.value.shape[1]
    out = Tensor(np.concatenate([a.value, b.value], axis=1), (a, b))
    out.grad_fn = lambda g: (g[:, :split], g[:, split:])
    return out


def hadamard_const(a: Tensor, const: np.ndarray) -> Tensor:
    out = Tensor(a.value * const, (a,))
    out.grad_fn = lambda g: (g * const,)
    return out


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0
    out = Tensor(np.where(mask, a.value, 0.0), (a,))
    out.grad_fn = lambda g: (g * mask,)
    return out


def elu(a: Tensor) -> Tensor:
    neg = np.expm1(np.minimum(a.value, 0.0))
    val = np.where(a.value > 0, a.value, neg)
    out = Tensor(val, (a,))
    out.grad_fn = lambda g: (g * np.where(a.value > 0, 1.0, neg + 1.0),)
    return out


NONLINEARITIES = {"relu": relu, "elu": elu, "identity": lambda t: t}


def _scatter_add_rows(rows, idx, n_out):
    """Sum rows into n_out bins; bincount per column beats np.add.at."""
    out = np.empty((n_out, rows.shape[1]), dtype=np.float64)
    for c in range(rows.shape[1]):
        out[:, c] = np.bincount(idx, weights=rows[:, c], minlength=n_out)
    return out


def gather_rows(a: Tensor, idx: np.ndarray) -> Tensor:
    out = Tensor(a.value[idx], (a,))
    out.grad_fn = lambda g: (_scatter_add_rows(g, idx, a.value.shape[0]),)
    return out


def segment_sum(a: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    out = Tensor(_scatter_add_rows(a.value, seg, num_segments), (a,))
    out.grad_fn = lambda g: (g[seg],)
    return out


def mean_rows_by_segment(a: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    counts = np.bincount(seg, minlength=num_segments).astype(np.float64)
    counts = np.maximum(counts, 1.0)[:, None]
    summed = segment_sum(a, seg, num_segments)
    out = Tensor(summed.value / counts, (summed,))
    out.grad_fn = lambda g: (g / counts,)
    return out


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    z = logits.value
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    probs = ez / ez.sum(axis=1, keepdims=True)
    n = z.shape[0]
    loss = -np.mean(np.log(probs[np.arange(n), labels] + 1e-300))
    out = Tensor(loss, (logits,))

    def grad_fn(g):
        gl = probs.copy()
        gl[np.arange(n), labels] -= 1.0
        return (g * gl / n,)

    out.grad_fn = grad_fn
    return out


def mae(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred.value - target
    out = Tensor(np.mean(np.abs(diff)), (pred,))
    out.grad_fn = lambda g: (g * np.sign(diff) / diff.size,)
    return out


# -- optimiser ---------------------------------------------------------------


class Adam:
    """First-order adaptive-moment optimiser over a name->array dict."""

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.params = params
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads):
        self.t += 1
        b1t = 1.0 - self.b1**self.t
        b2t = 1.0 - self.b2**self.t
        for key in sorted(self.params):
            g = grads.get(key)
            if g is None:
                continue
            self.m[key] = self.b1 * self.m[key] + (1 - self.b1) * g
            self.v[key] = self.b2 * self.v[key] + (1 - self.b2) * g * g
            mhat = self.m[key] / b1t
            vhat = self.v[key] / b2t
            self.params[key] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)
