"""Minimal dense-tensor engine with reverse-mode automatic differentiation.

Tensors wrap contiguous numpy arrays (float32 by default) and record the
operations applied to them as a DAG of parent links plus backward closures.
Calling :meth:`Tensor.backward` on a scalar walks the graph once in reverse
topological order and accumulates gradients into every reachable tensor with
``requires_grad=True``. A graph can be consumed by backward exactly once.

Broadcasting is deliberately restricted to the two cases the rest of the
package needs: a scalar against anything, and a shape that is a trailing
suffix of the other operand's shape. Reductions accumulate in float64 before
casting back, so forward values are reproducible bit-for-bit run to run.
"""

from __future__ import annotations

from typing import Callable, Iterable, Optional, Sequence

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class DomainError(ValueError):
    """Operand values fall outside the mathematical domain of the op."""


class GraphError(RuntimeError):
    """Misuse of the autodiff graph (non-scalar backward, double backward)."""


# Domain validation (log of non-positives, division by zero, zero-norm rows)
# can be switched off for hot loops that guarantee their inputs.
_checked = True


def set_checked(flag: bool) -> None:
    global _checked
    _checked = bool(flag)


def checked() -> bool:
    return _checked


def _as_array(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data)
    if dtype is None:
        dtype = np.float32 if arr.dtype.kind != "f" else arr.dtype
    return np.ascontiguousarray(arr, dtype=dtype)


class Tensor:
    """A node in the autodiff graph.

    ``data`` is a contiguous numpy array. Leaf tensors (no parents) may be
    reused across graphs; interior op nodes belong to the single graph that
    produced them and are marked consumed by backward.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward_fn", "_consumed")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = _as_array(data, dtype)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn: Optional[Callable[[np.ndarray], None]] = None
        self._consumed = False

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flag})"

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(())[()])

    def detach(self) -> "Tensor":
        """A graph-free view of the same values (no gradient flows through)."""
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    # -- graph plumbing -----------------------------------------------------

    def _attach(self, parents: Iterable["Tensor"], backward_fn) -> "Tensor":
        parents = tuple(p for p in parents if p.requires_grad)
        if parents:
            self.requires_grad = True
            self._parents = parents
            self._backward_fn = backward_fn
        return self

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g.astype(self.data.dtype, copy=False)

    def backward(self) -> None:
        """Populate ``grad`` for every requires_grad ancestor of this scalar."""
        if self.data.size != 1:
            raise GraphError(f"backward() requires a scalar loss, got shape {self.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        for node in topo:
            if node._parents and node._consumed:
                raise GraphError("backward() already ran on this graph")
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward_fn is not None:
                node._backward_fn(node.grad)
                node._consumed = True
                if node is not self:
                    node.grad = None  # interior grads are transient

    # -- operators ------------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other, self.dtype), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def exp(self) -> "Tensor":
        return exp(self)

    def log(self) -> "Tensor":
        return log(self)

    def relu(self) -> "Tensor":
        return relu(self)

    def sum(self, axis: Optional[int] = None) -> "Tensor":
        return reduce_sum(self, axis)

    def mean(self, axis: Optional[int] = None) -> "Tensor":
        return reduce_mean(self, axis)

    def max(self, axis: Optional[int] = None) -> "Tensor":
        return reduce_max(self, axis)

    def reshape(self, shape: Sequence[int]) -> "Tensor":
        return reshape(self, shape)

    @property
    def T(self) -> "Tensor":
        return transpose(self)


def _wrap(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype if dtype is not None else np.float32))


def _broadcast_ok(sa: tuple[int, ...], sb: tuple[int, ...]) -> bool:
    """Equal shapes, a size-1 operand, or one shape a trailing suffix of the other."""
    if sa == sb:
        return True
    if int(np.prod(sa)) == 1 or int(np.prod(sb)) == 1:
        return True
    small, big = (sa, sb) if len(sa) < len(sb) else (sb, sa)
    return len(small) < len(big) and big[len(big) - len(small):] == small


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum g back down to `shape` (inverse of the limited broadcast)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    for ax, dim in enumerate(shape):
        if dim == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g.reshape(shape)


def _binary(a, b, fwd, bwd_a, bwd_b) -> Tensor:
    a = _wrap(a)
    b = _wrap(b, a.dtype)
    if not _broadcast_ok(a.shape, b.shape):
        raise ShapeError(f"shapes {a.shape} and {b.shape} do not broadcast "
                         "(only scalar and trailing-suffix broadcasting supported)")
    out = Tensor(fwd(a.data, b.data))

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(bwd_a(g, a.data, b.data), a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(bwd_b(g, a.data, b.data), b.shape))

    return out._attach((a, b), backward)


def add(a, b) -> Tensor:
    return _binary(a, b, lambda x, y: x + y,
                   lambda g, x, y: g,
                   lambda g, x, y: g)


def sub(a, b) -> Tensor:
    return _binary(a, b, lambda x, y: x - y,
                   lambda g, x, y: g,
                   lambda g, x, y: -g)


def mul(a, b) -> Tensor:
    return _binary(a, b, lambda x, y: x * y,
                   lambda g, x, y: g * y,
                   lambda g, x, y: g * x)


def div(a, b) -> Tensor:
    b_t = _wrap(b)
    if _checked and np.any(b_t.data == 0):
        raise DomainError("division by zero")
    return _binary(a, b_t, lambda x, y: x / y,
                   lambda g, x, y: g / y,
                   lambda g, x, y: -g * x / (y * y))


def _unary(a, fwd, bwd) -> Tensor:
    a = _wrap(a)
    out = Tensor(fwd(a.data))

    def backward(g: np.ndarray) -> None:
        a._accumulate(bwd(g, a.data, out.data))

    return out._attach((a,), backward)


def neg(a) -> Tensor:
    return _unary(a, lambda x: -x, lambda g, x, y: -g)


def exp(a) -> Tensor:
    return _unary(a, np.exp, lambda g, x, y: g * y)


def log(a) -> Tensor:
    a = _wrap(a)
    if _checked and np.any(a.data <= 0):
        raise DomainError("log of non-positive operand")
    return _unary(a, np.log, lambda g, x, y: g / x)


def relu(a) -> Tensor:
    return _unary(a, lambda x: np.maximum(x, 0),
                  lambda g, x, y: g * (x > 0))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")
    out = Tensor(a.data @ b.data)

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return out._attach((a, b), backward)


def transpose(a: Tensor) -> Tensor:
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ShapeError("transpose expects a 2-D tensor")
    out = Tensor(np.ascontiguousarray(a.data.T))

    def backward(g: np.ndarray) -> None:
        a._accumulate(g.T)

    return out._attach((a,), backward)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    a = _wrap(a)
    shape = tuple(int(s) for s in shape)
    out = Tensor(a.data.reshape(shape))

    def backward(g: np.ndarray) -> None:
        a._accumulate(g.reshape(a.shape))

    return out._attach((a,), backward)


def _check_axis(a: Tensor, axis: Optional[int]) -> Optional[int]:
    if axis is None:
        return None
    if not -a.data.ndim <= axis < a.data.ndim:
        raise ShapeError(f"axis {axis} out of range for shape {a.shape}")
    return axis % a.data.ndim


def reduce_sum(a: Tensor, axis: Optional[int] = None) -> Tensor:
    a = _wrap(a)
    axis = _check_axis(a, axis)
    out = Tensor(a.data.sum(axis=axis, dtype=np.float64).astype(a.dtype))

    def backward(g: np.ndarray) -> None:
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.shape))
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(g, axis), a.shape))

    return out._attach((a,), backward)


def reduce_mean(a: Tensor, axis: Optional[int] = None) -> Tensor:
    a = _wrap(a)
    axis = _check_axis(a, axis)
    out = Tensor(a.data.mean(axis=axis, dtype=np.float64).astype(a.dtype))
    count = a.data.size if axis is None else a.shape[axis]

    def backward(g: np.ndarray) -> None:
        scaled = g / count
        if axis is None:
            a._accumulate(np.broadcast_to(scaled, a.shape))
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(scaled, axis), a.shape))

    return out._attach((a,), backward)


def reduce_max(a: Tensor, axis: Optional[int] = None) -> Tensor:
    """Max reduction; backward routes to the first occurrence on ties."""
    a = _wrap(a)
    axis = _check_axis(a, axis)
    out = Tensor(a.data.max(axis=axis))

    def backward(g: np.ndarray) -> None:
        mask = np.zeros_like(a.data)
        if axis is None:
            idx = int(np.argmax(a.data))
            mask.reshape(-1)[idx] = 1.0
            a._accumulate(mask * g)
        else:
            idx = np.argmax(a.data, axis=axis)
            grid = np.indices(idx.shape)
            index = list(grid)
            index.insert(axis, idx)
            mask[tuple(index)] = 1.0
            a._accumulate(mask * np.expand_dims(g, axis))

    return out._attach((a,), backward)


def l2_normalize(a: Tensor, eps: float = 1e-12) -> Tensor:
    """Scale each row of an (n, d) tensor to unit Euclidean norm."""
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ShapeError("l2_normalize expects an (n, d) tensor")
    norms = np.sqrt((a.data.astype(np.float64) ** 2).sum(axis=1)).astype(a.dtype)
    if _checked and np.any(norms <= eps):
        raise DomainError("l2_normalize: zero-norm row")
    y = a.data / norms[:, None]
    out = Tensor(y)

    def backward(g: np.ndarray) -> None:
        dot = (g * y).sum(axis=1, keepdims=True)
        a._accumulate((g - y * dot) / norms[:, None])

    return out._attach((a,), backward)


def conv2d(x: Tensor, w: Tensor, b: Optional[Tensor] = None,
           stride: int = 1, padding: int = 0) -> Tensor:
    """2-D cross-correlation of (n, ci, h, w) with (co, ci, kh, kw) filters."""
    x, w = _wrap(x), _wrap(w)
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeError("conv2d expects 4-D input and weight")
    n, ci, h, wd = x.shape
    co, ci_w, kh, kw = w.shape
    if ci != ci_w:
        raise ShapeError(f"conv2d channel mismatch: input {ci}, weight {ci_w}")
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (wd + 2 * padding - kw) // stride + 1
    if oh <= 0 or ow <= 0:
        raise ShapeError("conv2d output would be empty")
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    win = win[:, :, ::stride, ::stride]  # (n, ci, oh, ow, kh, kw)
    cols = np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(n * oh * ow, ci * kh * kw)
    wmat = w.data.reshape(co, -1)
    out2d = cols @ wmat.T
    if b is not None:
        b = _wrap(b)
        if b.shape != (co,):
            raise ShapeError(f"conv2d bias shape {b.shape} != ({co},)")
        out2d = out2d + b.data
    out = Tensor(np.ascontiguousarray(out2d.reshape(n, oh, ow, co).transpose(0, 3, 1, 2)))

    def backward(g: np.ndarray) -> None:
        g2d = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(n * oh * ow, co)
        if w.requires_grad:
            w._accumulate((g2d.T @ cols).reshape(w.shape))
        if b is not None and b.requires_grad:
            b._accumulate(g2d.sum(axis=0, dtype=np.float64).astype(b.dtype))
        if x.requires_grad:
            dcols = (g2d @ wmat).reshape(n, oh, ow, ci, kh, kw).transpose(0, 3, 1, 2, 4, 5)
            dxp = np.zeros_like(xp)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, :, i:i + oh * stride:stride, j:j + ow * stride:stride] += dcols[:, :, :, :, i, j]
            if padding:
                dxp = dxp[:, :, padding:padding + h, padding:padding + wd]
            x._accumulate(dxp)

    parents = (x, w) if b is None else (x, w, b)
    return out._attach(parents, backward)


def avg_pool2d(x: Tensor, window: int = 2) -> Tensor:
    """Non-overlapping average pooling; odd trailing rows/cols are dropped.

    Spatial dims smaller than the window pass through unchanged, so encoders
    built from pool blocks accept arbitrarily small inputs.
    """
    x = _wrap(x)
    if x.data.ndim != 4:
        raise ShapeError("avg_pool2d expects a 4-D tensor")
    n, c, h, w = x.shape
    if h < window or w < window:
        return reshape(x, x.shape)  # identity with a graph edge
    oh, ow = h // window, w // window
    crop = x.data[:, :, :oh * window, :ow * window]
    out = Tensor(crop.reshape(n, c, oh, window, ow, window).mean(axis=(3, 5), dtype=np.float64).astype(x.dtype))

    def backward(g: np.ndarray) -> None:
        spread = np.repeat(np.repeat(g, window, axis=2), window, axis=3) / (window * window)
        if spread.shape[2:] != (h, w):
            full = np.zeros_like(x.data)
            full[:, :, :oh * window, :ow * window] = spread
            spread = full
        x._accumulate(spread)

    return out._attach((x,), backward)


def stack_rows(tensors: Sequence[Tensor]) -> Tensor:
    """Stack 1-D tensors of equal length into a 2-D tensor (axis 0)."""
    ts = [_wrap(t) for t in tensors]
    out = Tensor(np.stack([t.data for t in ts], axis=0))

    def backward(g: np.ndarray) -> None:
        for i, t in enumerate(ts):
            if t.requires_grad:
                t._accumulate(g[i])

    return out._attach(ts, backward)


def finite_difference_check(f: Callable[[Tensor], Tensor], x, h: float = 1e-3) -> float:
    """Max relative disagreement between analytic and central-difference grads.

    ``f`` must be a deterministic scalar function of one tensor. Evaluation
    runs in float64 so the differences are not dominated by float32 forward
    rounding. Per-coordinate error is
    ``|analytic - central| / (|analytic| + |central| + 1e-8)``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x0 = np.asarray(x, dtype=np.float64)
    xt = Tensor(x0.copy(), requires_grad=True, dtype=np.float64)
    f(xt).backward()
    analytic = xt.grad.reshape(-1).astype(np.float64)

    flat = x0.reshape(-1)
    central = np.empty_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(Tensor(x0, dtype=np.float64)).item()
        flat[i] = orig - h
        down = f(Tensor(x0, dtype=np.float64)).item()
        flat[i] = orig
        central[i] = (up - down) / (2 * h)

    err = np.abs(analytic - central) / (np.abs(analytic) + np.abs(central) + 1e-8)
    return float(err.max()) if err.size else 0.0
