"""Minimal reverse-mode automatic differentiation over 2-D float64 arrays.

Just enough machinery to train a small message-passing network: dense matmul,
sparse-dense products, ReLU, column concatenation, bias broadcast, masked
multiply (dropout), and a fused softmax cross-entropy.  Every op records a
closure that scatters the output gradient back into its parents; ``backward``
replays them in reverse topological order.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "TrainingDivergedError",
    "matmul",
    "spmm",
    "add_bias",
    "relu",
    "concat_cols",
    "mul_array",
    "cross_entropy",
    "Adam",
]


class TrainingDivergedError(RuntimeError):
    """Loss or parameters became non-finite during optimization."""


class Tensor:
    """A value with an optional gradient accumulator.

    ``requires_grad=True`` marks trainable parameters; derived tensors track
    gradients whenever any ancestor does.
    """

    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, values, requires_grad: bool = False):
        self.values = np.asarray(values, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward = None

    @property
    def shape(self):
        return self.values.shape

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Accumulate gradients of this (scalar) tensor into all ancestors."""
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.values)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.values.shape}, requires_grad={self.requires_grad})"


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.values)
    t.grad += g


def _make(values, parents, backward) -> Tensor:
    out = Tensor(values)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    def backward(g):
        if a.requires_grad:
            _accumulate(a, g @ b.values.T)
        if b.requires_grad:
            _accumulate(b, a.values.T @ g)

    return _make(a.values @ b.values, (a, b), backward)


def spmm(s, x: Tensor) -> Tensor:
    """Fixed sparse matrix times dense tensor; only ``x`` receives gradient."""

    def backward(g):
        if x.requires_grad:
            _accumulate(x, s.T @ g)

    return _make(s @ x.values, (x,), backward)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    def backward(g):
        if x.requires_grad:
            _accumulate(x, g)
        if b.requires_grad:
            _accumulate(b, g.sum(axis=0, keepdims=True))

    return _make(x.values + b.values, (x, b), backward)


def relu(x: Tensor) -> Tensor:
    mask = x.values > 0.0

    def backward(g):
        if x.requires_grad:
            _accumulate(x, g * mask)

    return _make(np.where(mask, x.values, 0.0), (x,), backward)


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    na = a.values.shape[1]

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g[:, :na])
        if b.requires_grad:
            _accumulate(b, g[:, na:])

    return _make(np.concatenate([a.values, b.values], axis=1), (a, b), backward)


def mul_array(x: Tensor, m: np.ndarray) -> Tensor:
    """Elementwise multiply by a constant array (dropout masks and the like)."""

    def backward(g):
        if x.requires_grad:
            _accumulate(x, g * m)

    return _make(x.values * m, (x,), backward)


def cross_entropy(logits: Tensor, labels: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of ``labels`` over the rows in ``mask``."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("cross_entropy over an empty mask")
    z = logits.values[mask]
    y = np.asarray(labels, dtype=np.int64)[mask]
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    log_probs = (z - zmax) - np.log(ez.sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(mask.size), y].mean()

    def backward(g):
        if logits.requires_grad:
            probs = ez / ez.sum(axis=1, keepdims=True)
            probs[np.arange(mask.size), y] -= 1.0
            full = np.zeros_like(logits.values)
            full[mask] = probs * (float(g) / mask.size)
            _accumulate(logits, full)

    return _make(np.float64(loss), (logits,), backward)


class Adam:
    """Adam with bias correction over a fixed parameter list."""

    def __init__(self, params, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.values) for p in self.params]
        self.v = [np.zeros_like(p.values) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float | None = None) -> None:
        lr = self.lr if lr is None else float(lr)
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1 ** t
        c2 = 1.0 - self.beta2 ** t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.values)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.values -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            if not np.isfinite(p.values).all():
                raise TrainingDivergedError(
                    "parameter update produced non-finite values "
                    "(learning rate too high?)"
                )
