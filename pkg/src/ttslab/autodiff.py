"""Reverse-mode automatic differentiation over dense float64 tensors.

A `Tape` records every operation whose inputs require gradients; `backward`
replays the records in reverse, accumulating gradients additively across
fan-out. Tensors never share data buffers: every op allocates fresh output
storage, so mutating one tensor can never be observed through another.

Convolutions run on the backend selected by :mod:`ttslab.kernels`
(compiled extension or numpy fallback); everything else is plain numpy.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from ttslab import flops, kernels
from ttslab.errors import ContractError, ShapeError, VocabularyError


class Tensor:
    """Dense float64 array with optional gradient participation.

    `grad` is populated by `backward` and always matches `data` in shape.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64)  # own the buffer
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool) -> "Tensor":
        """Wrap a freshly-allocated array without copying (internal)."""
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = requires_grad
        out.grad = None
        return out

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() on non-scalar tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return (f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}, "
                f"grad={'set' if self.grad is not None else 'none'})")


class TapeNode:
    """One recorded operation: inputs, output, and its backward rule."""

    __slots__ = ("op", "inputs", "output", "rule")

    def __init__(self, op: str, inputs: tuple, output: Tensor, rule: Callable):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.rule = rule


class Tape:
    """Ordered record of operations; inputs always precede their consumers."""

    def __init__(self):
        self.nodes: list[TapeNode] = []
        self.visited = 0

    def __enter__(self) -> "Tape":
        _STACK.append(self)
        return self

    def __exit__(self, *exc):
        _STACK.remove(self)
        return False

    def __len__(self) -> int:
        return len(self.nodes)


_STACK: list[Tape] = []


def active_tape() -> Optional[Tape]:
    return _STACK[-1] if _STACK else None


def _record(op: str, inputs: tuple, out_data: np.ndarray, rule: Callable) -> Tensor:
    tape = active_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor._wrap(out_data, requires_grad=track)
    if track:
        tape.nodes.append(TapeNode(op, inputs, out, rule))
    return out


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(input) into .grad of every reachable tensor.

    Visits each tape node exactly once, in reverse recording order (a valid
    reverse-topological order by construction).
    """
    if loss.data.size != 1:
        raise ContractError(f"backward requires a scalar loss, got shape {loss.shape}")
    if not any(node.output is loss for node in tape.nodes):
        raise ContractError("loss is not an output recorded on this tape")
    loss.grad = np.ones_like(loss.data)
    tape.visited = 0
    for node in reversed(tape.nodes):
        tape.visited += 1
        g = node.output.grad
        if g is None:
            continue
        for tensor, dg in zip(node.inputs, node.rule(g)):
            if dg is None or not tensor.requires_grad:
                continue
            # rule outputs may alias the upstream grad (e.g. add returns g
            # twice), so accumulate by rebinding, never by in-place +=
            if tensor.grad is None:
                tensor.grad = dg
            else:
                tensor.grad = tensor.grad + dg


def zero_grads(params) -> None:
    """Clear .grad on an iterable (or dict) of tensors."""
    tensors = params.values() if isinstance(params, dict) else params
    for p in tensors:
        p.grad = None


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} x {b.shape}")
    m, k = a.shape
    n = b.shape[1]
    flops.add("matmul", m * n * k)
    ad, bd = a.data, b.data

    def rule(g):
        return g @ bd.T, ad.T @ g

    return _record("matmul", (a, b), ad @ bd, rule)


def conv1d(x: Tensor, w: Tensor, stride: int = 1,
           padding: str = "same-zero") -> Tensor:
    """Cross-correlation of x[Cin,L] with w[Cout,Cin,K], zero 'same' padding.

    Output length is ceil(L/stride); output t is centred on input t*stride.
    """
    if padding != "same-zero":
        raise ContractError(f"conv1d: unsupported padding {padding!r}")
    if x.ndim != 2 or w.ndim != 3:
        raise ShapeError(f"conv1d: need x[Cin,L], w[Cout,Cin,K]; got {x.shape}, {w.shape}")
    if w.shape[1] != x.shape[0]:
        raise ShapeError(f"conv1d: channel mismatch, x has {x.shape[0]} channels "
                         f"but w expects {w.shape[1]} (shapes {x.shape}, {w.shape})")
    ksize = w.shape[2]
    if ksize % 2 != 1:
        raise ContractError(f"conv1d: kernel size must be odd, got {ksize}")
    stride = int(stride)
    if stride < 1:
        raise ContractError(f"conv1d: stride must be positive, got {stride}")
    cin, length = x.shape
    cout = w.shape[0]
    lout = -(-length // stride)
    flops.add("conv1d", lout * cout * cin * ksize)
    xd, wd = x.data, w.data

    def rule(g):
        dx = kernels.conv1d_backward_input(g, wd, stride, length)
        dw = kernels.conv1d_backward_weight(g, xd, ksize, stride)
        return dx, dw

    return _record("conv1d", (x, w), kernels.conv1d_forward(xd, wd, stride), rule)


def nn_upsample2(x: Tensor) -> Tensor:
    """Duplicate each time step of x[C,L] -> [C,2L]."""
    if x.ndim != 2:
        raise ShapeError(f"nn_upsample2: need [C,L], got {x.shape}")

    def rule(g):
        return (g[:, 0::2] + g[:, 1::2],)

    return _record("nn_upsample2", (x,), np.repeat(x.data, 2, axis=1), rule)


def layer_norm(x: Tensor, gain: Optional[Tensor] = None,
               bias: Optional[Tensor] = None, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance (population).

    With `gain` and `bias` the normalized value is rescaled and recentred.
    """
    if eps < 0:
        raise ContractError(f"layer_norm: eps must be >= 0, got {eps}")
    if (gain is None) != (bias is None):
        raise ContractError("layer_norm: gain and bias must be given together")
    d = x.shape[-1]
    affine = gain is not None
    if affine and (gain.shape != (d,) or bias.shape != (d,)):
        raise ShapeError(f"layer_norm: affine shapes {gain.shape}/{bias.shape} "
                         f"do not match last axis {d}")
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = (x.data - mu) * inv
    flops.add("layer_norm", (7 if affine else 5) * x.size)
    if affine:
        out_data = gain.data * y + bias.data

        def rule(g):
            dy = g * gain.data
            lead = tuple(range(g.ndim - 1))
            dgain = (g * y).sum(axis=lead)
            dbias = g.sum(axis=lead)
            dx = inv * (dy - dy.mean(axis=-1, keepdims=True)
                        - y * (dy * y).mean(axis=-1, keepdims=True))
            return dx, dgain, dbias

        return _record("layer_norm", (x, gain, bias), out_data, rule)

    def rule(g):
        dx = inv * (g - g.mean(axis=-1, keepdims=True)
                    - y * (g * y).mean(axis=-1, keepdims=True))
        return (dx,)

    return _record("layer_norm", (x,), y.copy(), rule)


def relu(x: Tensor) -> Tensor:
    flops.add("relu", x.size)
    mask = x.data > 0

    def rule(g):
        return (g * mask,)

    return _record("relu", (x,), np.maximum(x.data, 0.0), rule)


def embedding_lookup(table: Tensor, ids) -> Tensor:
    """Copy rows of table[V,d] at positions ids -> [len(ids), d]."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1:
        raise ContractError(f"embedding_lookup: ids must be 1-D, got {ids.shape}")
    vocab = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        bad = ids[(ids < 0) | (ids >= vocab)][0]
        raise VocabularyError(f"token id {bad} outside vocabulary of size {vocab}")

    def rule(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, ids, g)
        return (dt,)

    return _record("embedding_lookup", (table,), table.data[ids], rule)


def l1_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean absolute element difference, as a scalar tensor."""
    if pred.shape != target.shape:
        raise ShapeError(f"l1_loss: shape mismatch {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise ContractError("l1_loss: empty inputs")
    flops.add("l1_loss", 2 * pred.size)
    diff = pred.data - target.data
    n = diff.size

    def rule(g):
        s = np.sign(diff) * (float(g) / n)
        return s, -s

    return _record("l1_loss", (pred, target), np.array(np.abs(diff).mean()), rule)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add: shape mismatch {a.shape} vs {b.shape}")
    flops.add("add", a.size)

    def rule(g):
        return g, g

    return _record("add", (a, b), a.data + b.data, rule)


def add_n(tensors: Sequence[Tensor]) -> Tensor:
    """Sum of same-shaped tensors (single node, fan-in n)."""
    if not tensors:
        raise ContractError("add_n: empty input list")
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise ShapeError(f"add_n: shape mismatch {shape} vs {t.shape}")
    flops.add("add", (len(tensors) - 1) * tensors[0].size)
    n = len(tensors)

    def rule(g):
        return tuple(g for _ in range(n))

    out = tensors[0].data.copy()
    for t in tensors[1:]:
        out += t.data
    return _record("add_n", tuple(tensors), out, rule)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """Broadcast-add a bias vector over the last axis."""
    if b.shape != (x.shape[-1],):
        raise ShapeError(f"add_bias: bias {b.shape} does not match last axis of {x.shape}")
    flops.add("add", x.size)

    def rule(g):
        return g, g.reshape(-1, g.shape[-1]).sum(axis=0)

    return _record("add_bias", (x, b), x.data + b.data, rule)


def affine(x: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    """Elementwise rescale and recentre over the last axis: gain*x + bias."""
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"affine: gain {gain.shape} / bias {bias.shape} "
                         f"do not match last axis {d}")
    flops.add("affine", 2 * x.size)
    xd = x.data

    def rule(g):
        flat = g.reshape(-1, d)
        return g * gain.data, (flat * xd.reshape(-1, d)).sum(axis=0), flat.sum(axis=0)

    return _record("affine", (x, gain, bias), gain.data * xd + bias.data, rule)


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    flops.add("scale", x.size)

    def rule(g):
        return (g * c,)

    return _record("scale", (x,), x.data * c, rule)


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise ShapeError(f"transpose: need 2-D, got {x.shape}")

    def rule(g):
        return (np.ascontiguousarray(g.T),)

    return _record("transpose", (x,), np.ascontiguousarray(x.data.T), rule)


def pad_rows(x: Tensor, total_rows: int) -> Tensor:
    """Right-pad x[L,d] with zero rows up to total_rows."""
    if x.ndim != 2:
        raise ShapeError(f"pad_rows: need 2-D, got {x.shape}")
    length = x.shape[0]
    if total_rows < length:
        raise ContractError(f"pad_rows: total {total_rows} < current {length}")
    out = np.zeros((total_rows, x.shape[1]), dtype=np.float64)
    out[:length] = x.data

    def rule(g):
        return (g[:length].copy(),)

    return _record("pad_rows", (x,), out, rule)


def crop_rows(x: Tensor, rows: int) -> Tensor:
    """Keep the first `rows` rows of x[L,d]."""
    if x.ndim != 2:
        raise ShapeError(f"crop_rows: need 2-D, got {x.shape}")
    length = x.shape[0]
    if not 0 <= rows <= length:
        raise ContractError(f"crop_rows: rows {rows} outside [0, {length}]")

    def rule(g):
        dx = np.zeros((length, x.shape[1]), dtype=np.float64)
        dx[:rows] = g
        return (dx,)

    return _record("crop_rows", (x,), x.data[:rows].copy(), rule)


def repeat_rows(x: Tensor, counts) -> Tensor:
    """Repeat row t of x[L,d] counts[t] times, preserving order."""
    if x.ndim != 2:
        raise ShapeError(f"repeat_rows: need 2-D, got {x.shape}")
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (x.shape[0],):
        raise ContractError(f"repeat_rows: {counts.shape[0] if counts.ndim else 0} "
                            f"counts for {x.shape[0]} rows")
    if counts.size and counts.min() < 0:
        raise ContractError("repeat_rows: negative repeat count")
    idx = np.repeat(np.arange(x.shape[0]), counts)

    def rule(g):
        dx = np.zeros_like(x.data)
        np.add.at(dx, idx, g)
        return (dx,)

    return _record("repeat_rows", (x,), np.repeat(x.data, counts, axis=0), rule)
