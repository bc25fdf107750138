"""Hot-kernel dispatch: compiled Cython extension with numpy fallback.

The backend is chosen once, at import time. ``TTSLAB_KERNELS`` controls the
choice: ``auto`` (default) prefers the compiled extension, ``compiled``
requires it, ``fallback`` forces the numpy path. ``ttslab bench-kernels``
compares the two on identical inputs.
"""

import os

import numpy as np

from ttslab.kernels import fallback as _fallback

_compiled = None
_requested = os.environ.get("TTSLAB_KERNELS", "auto").lower()
if _requested not in ("auto", "compiled", "fallback"):
    raise ValueError(f"TTSLAB_KERNELS must be auto|compiled|fallback, got {_requested!r}")
if _requested in ("auto", "compiled"):
    try:
        from ttslab.kernels import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None
if _requested == "compiled" and _compiled is None:
    raise ImportError("TTSLAB_KERNELS=compiled but the compiled extension could not be imported")

_impl = _compiled if (_compiled is not None and _requested != "fallback") else _fallback
BACKEND: str = _impl.NAME


def available_backends() -> dict:
    """Importable backends by name (used by the kernel comparison bench)."""
    out = {"fallback": _fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def _f64(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def conv1d_forward(x: np.ndarray, w: np.ndarray, stride: int,
                   impl=None) -> np.ndarray:
    return np.asarray((impl or _impl).conv1d_forward(_f64(x), _f64(w), int(stride)))


def conv1d_backward_input(grad: np.ndarray, w: np.ndarray, stride: int,
                          length: int, impl=None) -> np.ndarray:
    return np.asarray((impl or _impl).conv1d_backward_input(
        _f64(grad), _f64(w), int(stride), int(length)))


def conv1d_backward_weight(grad: np.ndarray, x: np.ndarray, ksize: int,
                           stride: int, impl=None) -> np.ndarray:
    return np.asarray((impl or _impl).conv1d_backward_weight(
        _f64(grad), _f64(x), int(ksize), int(stride)))


def levenshtein(a, b, impl=None) -> int:
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    return int((impl or _impl).levenshtein(a, b))
