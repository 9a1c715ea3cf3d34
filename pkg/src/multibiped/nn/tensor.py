"""Minimal reverse-mode autodiff over float64 numpy arrays.

Nodes record their parents and a backward closure when gradients are
required; `backward()` walks the tape once in reverse topological order and
accumulates gradients additively into leaf `.grad` slots. Subgraphs that no
gradient-requiring tensor feeds are never recorded, so inference-style use
builds no tape.
"""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

Array = np.ndarray


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum a broadcast gradient back down to the original shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward_fn", "_backward_done")

    def __init__(
        self,
        value,
        requires_grad: bool = False,
        _parents: tuple["Tensor", ...] = (),
        _backward_fn: Callable[[Array], None] | None = None,
    ) -> None:
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward_fn = _backward_fn
        self._backward_done = False

    # ---- construction helpers -------------------------------------------------

    @staticmethod
    def param(value) -> "Tensor":
        return Tensor(value, requires_grad=True)

    @staticmethod
    def _lift(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.value.shape}, grad={self.requires_grad})"

    # ---- graph plumbing --------------------------------------------------------

    def _make(self, value: Array, parents: tuple["Tensor", ...], backward: Callable) -> "Tensor":
        needs = any(p.requires_grad for p in parents)
        if not needs:
            return Tensor(value)
        return Tensor(value, requires_grad=True, _parents=parents, _backward_fn=backward)

    def _accumulate(self, grad: Array) -> None:
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad += grad

    def backward(self) -> None:
        """Reverse pass from a scalar; each node is visited exactly once."""
        if self.value.size != 1:
            raise ValueError(f"backward() needs a scalar loss, got shape {self.value.shape}")
        if self._backward_done:
            raise RuntimeError("backward() already ran on this tape; rebuild the forward pass")
        self._backward_done = True

        # iterative topological order over the requires_grad subgraph
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))

        grads: dict[int, Array] = {id(self): np.ones_like(self.value)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward_fn is None:
                node._accumulate(g)
                continue
            for parent, pg in node._backward_fn(g):
                if not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg

    # ---- arithmetic -------------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        other = self._lift(other)
        out_val = self.value + other.value

        def backward(g):
            return (
                (self, _unbroadcast(g, self.value.shape)),
                (other, _unbroadcast(g, other.value.shape)),
            )

        return self._make(out_val, (self, other), backward)

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        other = self._lift(other)
        out_val = self.value - other.value

        def backward(g):
            return (
                (self, _unbroadcast(g, self.value.shape)),
                (other, _unbroadcast(-g, other.value.shape)),
            )

        return self._make(out_val, (self, other), backward)

    def __rsub__(self, other) -> "Tensor":
        return self._lift(other) - self

    def __neg__(self) -> "Tensor":
        def backward(g):
            return ((self, -g),)

        return self._make(-self.value, (self,), backward)

    def __mul__(self, other) -> "Tensor":
        other = self._lift(other)
        out_val = self.value * other.value

        def backward(g):
            return (
                (self, _unbroadcast(g * other.value, self.value.shape)),
                (other, _unbroadcast(g * self.value, other.value.shape)),
            )

        return self._make(out_val, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = self._lift(other)
        out_val = self.value / other.value

        def backward(g):
            return (
                (self, _unbroadcast(g / other.value, self.value.shape)),
                (other, _unbroadcast(-g * self.value / (other.value**2), other.value.shape)),
            )

        return self._make(out_val, (self, other), backward)

    def __rtruediv__(self, other) -> "Tensor":
        return self._lift(other) / self

    def __matmul__(self, other) -> "Tensor":
        other = self._lift(other)
        out_val = self.value @ other.value

        def backward(g):
            return (
                (self, g @ other.value.T),
                (other, self.value.T @ g),
            )

        return self._make(out_val, (self, other), backward)

    def __getitem__(self, idx) -> "Tensor":
        out_val = self.value[idx]

        def backward(g):
            full = np.zeros_like(self.value)
            full[idx] = g
            return ((self, full),)

        return self._make(out_val, (self,), backward)

    # ---- elementwise functions ---------------------------------------------------

    def exp(self) -> "Tensor":
        out_val = np.exp(self.value)

        def backward(g):
            return ((self, g * out_val),)

        return self._make(out_val, (self,), backward)

    def log(self) -> "Tensor":
        def backward(g):
            return ((self, g / self.value),)

        return self._make(np.log(self.value), (self,), backward)

    def tanh(self) -> "Tensor":
        out_val = np.tanh(self.value)

        def backward(g):
            return ((self, g * (1.0 - out_val**2)),)

        return self._make(out_val, (self,), backward)

    def sigmoid(self) -> "Tensor":
        out_val = 1.0 / (1.0 + np.exp(-self.value))

        def backward(g):
            return ((self, g * out_val * (1.0 - out_val)),)

        return self._make(out_val, (self,), backward)

    def square(self) -> "Tensor":
        def backward(g):
            return ((self, g * 2.0 * self.value),)

        return self._make(self.value**2, (self,), backward)

    def minimum(self, other) -> "Tensor":
        other = self._lift(other)
        take_self = self.value <= other.value
        out_val = np.where(take_self, self.value, other.value)

        def backward(g):
            return (
                (self, _unbroadcast(g * take_self, self.value.shape)),
                (other, _unbroadcast(g * ~take_self, other.value.shape)),
            )

        return self._make(out_val, (self, other), backward)

    def clip(self, lo: float, hi: float) -> "Tensor":
        inside = (self.value >= lo) & (self.value <= hi)
        out_val = np.clip(self.value, lo, hi)

        def backward(g):
            return ((self, g * inside),)

        return self._make(out_val, (self,), backward)

    # ---- reductions ----------------------------------------------------------------

    def sum(self, axis: int | tuple[int, ...] | None = None) -> "Tensor":
        out_val = self.value.sum(axis=axis)

        def backward(g):
            if axis is None:
                return ((self, np.broadcast_to(g, self.value.shape).copy()),)
            expanded = np.expand_dims(g, axis)
            return ((self, np.broadcast_to(expanded, self.value.shape).copy()),)

        return self._make(out_val, (self,), backward)

    def mean(self, axis: int | None = None) -> "Tensor":
        count = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis) * (1.0 / count)


def stack(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    """Stack tensors of equal shape along a new axis."""
    tensors = list(tensors)
    out_val = np.stack([t.value for t in tensors], axis=axis)

    def backward(g):
        slices = np.moveaxis(g, axis, 0)
        return tuple((t, slices[i]) for i, t in enumerate(tensors))

    needs = any(t.requires_grad for t in tensors)
    if not needs:
        return Tensor(out_val)
    return Tensor(out_val, requires_grad=True, _parents=tuple(tensors), _backward_fn=backward)
