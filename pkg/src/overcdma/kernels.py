"""Constrained candidate-enumeration kernel with optional compiled backend.

The hot loop of the decoder scores every admissible value assignment of the
free users against a batch of transformed observations.  A Cython build of
this loop is used when available; the numpy fallback below is semantically
identical (same candidate order, same tie-break, same quantizer branches),
so results do not depend on which backend ran.

Set OVERCDMA_PURE=1 to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _speedup
except ImportError:
    _speedup = None

# Per-entry constraint codes shared with the compiled kernel.
FREE = 0          # entry may be -1, 0, or +1
FORCE_ACTIVE = 1  # entry is known to be +-1 (never 0)
FORCE_ZERO = 2    # entry is known to be 0

_ALLOWED_VALUES = {FREE: (0.0, 1.0, -1.0), FORCE_ACTIVE: (1.0, -1.0),
                   FORCE_ZERO: (0.0,)}

_backend = "numpy"
if _speedup is not None and os.environ.get("OVERCDMA_PURE", "0") not in (
        "1", "true", "yes"):
    _backend = "compiled"


def available_backends():
    return ("numpy", "compiled") if _speedup is not None else ("numpy",)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available "
                         f"(have {available_backends()})")
    _backend = name


def candidate_matrix(codes) -> np.ndarray:
    """All admissible value rows for the given constraint codes.

    Canonical enumeration order: each position cycles through its allowed
    values as 0, +1, -1 (actives skip 0) and the last position varies
    fastest.  Minimum-residual ties always resolve to the first row.
    """
    codes = np.asarray(codes, dtype=np.int8)
    if codes.size == 0:
        return np.zeros((1, 0), dtype=np.float64)
    lists = [_ALLOWED_VALUES[int(c)] for c in codes]
    grids = np.meshgrid(*lists, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _quantize(z, codes):
    """Per-entry decision for the invertible-block estimate."""
    out = np.zeros_like(z)
    for j, code in enumerate(codes):
        col = z[..., j]
        if code == FORCE_ACTIVE:
            out[..., j] = np.where(col >= 0.0, 1.0, -1.0)
        elif code == FREE:
            out[..., j] = np.where(col > 0.5, 1.0,
                                   np.where(col < -0.5, -1.0, 0.0))
        # FORCE_ZERO stays 0
    return out


def decode_batch_numpy(U, WX2, x1_codes, chunk: int = 512):
    """Score every candidate against every observation row (numpy path).

    U is the (N, l) batch of transformed observations, WX2 the (M, l)
    candidate images.  Returns the quantized block estimate (N, l), the
    index of the winning candidate row (N,), and its residual (N,).
    """
    U = np.ascontiguousarray(U, dtype=np.float64)
    WX2 = np.ascontiguousarray(WX2, dtype=np.float64)
    x1_codes = np.asarray(x1_codes, dtype=np.int8)
    n, l = U.shape
    x1 = np.empty((n, l), dtype=np.float64)
    best = np.empty(n, dtype=np.int64)
    res = np.empty(n, dtype=np.float64)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        z = U[start:stop, None, :] - WX2[None, :, :]
        q = _quantize(z, x1_codes)
        r = ((z - q) ** 2).sum(axis=-1)
        idx = r.argmin(axis=1)  # first minimum wins
        rows = np.arange(stop - start)
        best[start:stop] = idx
        res[start:stop] = r[rows, idx]
        x1[start:stop] = q[rows, idx]
    return x1, best, res


def decode_batch_compiled(U, WX2, x1_codes):
    if _speedup is None:
        raise RuntimeError("compiled kernel is not available")
    U = np.ascontiguousarray(U, dtype=np.float64)
    WX2 = np.ascontiguousarray(WX2, dtype=np.float64)
    x1_codes = np.ascontiguousarray(x1_codes, dtype=np.int8)
    n, l = U.shape
    x1 = np.empty((n, l), dtype=np.float64)
    best = np.empty(n, dtype=np.int64)
    res = np.empty(n, dtype=np.float64)
    _speedup.decode_batch(U, WX2, x1_codes, x1, best, res)
    return x1, best, res


def decode_batch(U, WX2, x1_codes):
    if _backend == "compiled":
        return decode_batch_compiled(U, WX2, x1_codes)
    return decode_batch_numpy(U, WX2, x1_codes)
