"""Reduced-complexity decoding for ternary-injective signature codes.

Decoding a received vector runs in three steps:

1. Decouple.  For C = P (x) D, multiplying by P^-1 (x) I splits one
   (rl)-chip observation into r independent l-chip subsystem observations.
2. Enumerate.  Within a subsystem, split D = [A B] with A invertible.
   For every admissible assignment of the B-block users, transform by
   A^-1 and read the A-block users off entrywise with a sign or
   soft-limiter decision; keep the assignment with the smallest residual.
   When A is Hadamard, A/sqrt(l) is orthogonal, so the transformed
   residual is the true likelihood metric up to a 1/l factor.
3. Smooth.  A user decoding symbol t also decodes the 2w surrounding
   vectors, majority-votes every other user's activity over the window,
   and re-decodes symbol t under the voted on/off constraints whenever
   the vote disagrees with the plain decode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .codebook import CodeStructure, int_det, is_hadamard
from .kernels import FORCE_ACTIVE, FORCE_ZERO, FREE


class CandidateBudgetError(ValueError):
    """Exhaustive enumeration would exceed the configured budget."""


@dataclass
class DecodeResult:
    """Estimated ternary user vector and the residual that ranked it."""

    x_hat: np.ndarray       # ternary entries, original column order
    residual: float         # squared norm of the scoring objective
    candidates: int         # number of enumerated assignments
    ml: bool                # True when the metric is the exact ML metric


@dataclass(frozen=True)
class WindowConfig:
    """Half-width of the activity-smoothing window (covers 2w+1 decodes)."""

    w: int

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("window half-width must be >= 0")


def softlim(x):
    """Ternary soft limiter: -1 below -1/2, +1 above +1/2, else 0.

    Both boundaries map to 0.  Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=np.float64)
    out = np.where(arr > 0.5, 1, np.where(arr < -0.5, -1, 0))
    if np.isscalar(x) or arr.ndim == 0:
        return int(out)
    return out.astype(np.int8)


def majority_state(decisions) -> bool:
    """True (on) iff strictly more than half of an odd-length window is on."""
    d = np.asarray(decisions, dtype=bool)
    if d.ndim != 1 or d.size == 0 or d.size % 2 == 0:
        raise ValueError("window must be a nonempty odd-length sequence")
    return int(d.sum()) > d.size // 2


def _inverse_of(A) -> tuple[np.ndarray, bool]:
    """Exact A^-1 for Hadamard blocks (A.T / l), LAPACK inverse otherwise."""
    a = np.asarray(A, dtype=np.float64)
    if a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    if is_hadamard(A):
        return a.T / a.shape[0], True
    if int_det(np.asarray(A, dtype=np.int64)) == 0:
        raise ValueError("A is singular")
    return np.linalg.inv(a), False


def tensor_decouple(Y, P) -> np.ndarray:
    """Split an (rl)-chip observation into r decoupled l-chip rows.

    Row s equals D @ X_s plus transformed noise; a Hadamard P keeps the
    noise white with per-chip variance sigma^2 / r.
    """
    y = np.asarray(Y, dtype=np.float64)
    p = np.asarray(P)
    r = p.shape[0]
    if y.ndim != 1 or y.size % r != 0:
        raise ValueError("observation length must be a multiple of r")
    pinv, _ = _inverse_of(p)
    return pinv @ y.reshape(r, y.size // r)


class _SubsystemDecoder:
    """Precomputed data for decoding one subsystem under fixed constraints."""

    def __init__(self, A, B, constraints, perm=None):
        a = np.asarray(A, dtype=np.float64)
        b = np.asarray(B, dtype=np.float64)
        l = a.shape[0]
        k = l + b.shape[1]
        constraints = np.asarray(constraints, dtype=np.int8)
        if constraints.shape != (k,):
            raise ValueError(
                f"constraint list must have length {k}, got {constraints.shape}"
            )
        self.perm = (np.arange(k, dtype=np.int64) if perm is None
                     else np.asarray(perm, dtype=np.int64))
        permuted = constraints[self.perm]
        self.x1_codes = np.ascontiguousarray(permuted[:l])
        self.x2_codes = np.ascontiguousarray(permuted[l:])
        self.a_inv, self.ml = _inverse_of(A)
        self.x2_cand = kernels.candidate_matrix(self.x2_codes)
        w = self.a_inv @ b
        self.wx2 = np.ascontiguousarray(self.x2_cand @ w.T)
        self.l = l
        self.k = k

    def transform(self, y_rows) -> np.ndarray:
        # One gemv per row keeps single-shot and batched decodes bit-identical.
        return np.stack([self.a_inv @ row for row in y_rows])

    def decode_rows(self, u_rows):
        """Decode pre-transformed rows; returns (x_hat (N,k) int8, residuals)."""
        x1, best, res = kernels.decode_batch(u_rows, self.wx2, self.x1_codes)
        x_part = np.concatenate([x1, self.x2_cand[best]], axis=1)
        x_hat = np.empty_like(x_part)
        x_hat[:, self.perm] = x_part
        return x_hat.astype(np.int8), res

    @property
    def candidates(self) -> int:
        return self.x2_cand.shape[0]


def decode_subsystem(A, B, y_sub, constraints, perm=None) -> DecodeResult:
    """Minimum-residual constrained decode of one l-chip subsystem.

    `constraints` is one code per user (original column order): FREE,
    FORCE_ACTIVE (+-1), or FORCE_ZERO.  `perm` is the column permutation
    that placed A first; results are reported in original column order.
    """
    dec = _SubsystemDecoder(A, B, constraints, perm)
    y = np.asarray(y_sub, dtype=np.float64).reshape(1, -1)
    if y.shape[1] != dec.l:
        raise ValueError("observation length must equal the chip count l")
    x_hat, res = dec.decode_rows(dec.transform(y))
    return DecodeResult(x_hat=x_hat[0], residual=float(res[0]),
                        candidates=dec.candidates, ml=dec.ml)


def decode_joint_exhaustive(D, y_sub, constraints,
                            budget: int = 3**10) -> DecodeResult:
    """Brute-force minimum-distance oracle over all admissible vectors.

    Scores || y - D x ||^2 directly for every constrained ternary x, with
    the same canonical candidate order as the fast decoder (values cycle
    0, +1, -1; last entry fastest; first minimum wins).
    """
    d = np.asarray(D, dtype=np.float64)
    constraints = np.asarray(constraints, dtype=np.int8)
    if constraints.shape != (d.shape[1],):
        raise ValueError("constraint list length must equal the user count")
    sizes = {FREE: 3, FORCE_ACTIVE: 2, FORCE_ZERO: 1}
    total = 1
    for c in constraints:
        total *= sizes[int(c)]
    if total > budget:
        raise CandidateBudgetError(
            f"{total} candidates exceed the budget of {budget}"
        )
    cand = kernels.candidate_matrix(constraints)
    y = np.asarray(y_sub, dtype=np.float64)
    resid = ((y[None, :] - cand @ d.T) ** 2).sum(axis=1)
    best = int(resid.argmin())
    return DecodeResult(x_hat=cand[best].astype(np.int8),
                        residual=float(resid[best]),
                        candidates=total, ml=True)


def _subsystem_constraints(code: CodeStructure, forced_user=None) -> np.ndarray:
    c = np.full(code.k, FREE, dtype=np.int8)
    if forced_user is not None:
        c[forced_user] = FORCE_ACTIVE
    return c


def decode_memoryless(code: CodeStructure, Y, user: int):
    """Single-shot decode of one received vector from user `user`'s side.

    The user's subsystem is decoded with its own entry constrained to
    +-1; every other entry (and every other subsystem) is unconstrained.
    Returns the full estimated ternary vector and the user's symbol.
    """
    if not 0 <= user < code.n:
        raise ValueError("user index out of range")
    blocks = tensor_decouple(Y, code.P)
    own_sub, own_idx = divmod(user, code.k)
    parts = []
    for s in range(code.r):
        forced = own_idx if s == own_sub else None
        result = decode_subsystem(code.A, code.B, blocks[s],
                                  _subsystem_constraints(code, forced),
                                  perm=code.column_permutation)
        parts.append(result.x_hat)
    x_full = np.concatenate(parts)
    return x_full, int(x_full[user])


class StreamDecoder:
    """Shared per-stream decode cache for the memoryless and windowed paths.

    Subsystem decodes depend only on (subsystem, constraint pattern), so
    one free decode per subsystem and one forced decode per active user
    serve every overlapping window and every decoding user in the stream.
    """

    def __init__(self, code: CodeStructure, ys):
        ys = np.asarray(ys, dtype=np.float64)
        if ys.ndim != 2 or ys.shape[1] != code.m:
            raise ValueError("stream must be (T, m)")
        self.code = code
        self.T = ys.shape[0]
        # (T, r, l) decoupled blocks, same arithmetic as tensor_decouple
        self.blocks = np.stack([tensor_decouple(y, code.P) for y in ys])
        self._decodes = {}  # (subsystem, forced_idx or None) -> (T, k) int8

    def _subsystem_stream(self, s: int, forced):
        key = (s, forced)
        cached = self._decodes.get(key)
        if cached is None:
            dec = _SubsystemDecoder(
                self.code.A, self.code.B,
                _subsystem_constraints(self.code, forced),
                perm=self.code.column_permutation,
            )
            x_hat, _ = dec.decode_rows(dec.transform(self.blocks[:, s, :]))
            cached = x_hat
            self._decodes[key] = cached
        return cached

    def full_decodes(self, user: int) -> np.ndarray:
        """(T, n) memoryless estimates of all users, from `user`'s side."""
        own_sub, own_idx = divmod(user, self.code.k)
        columns = []
        for s in range(self.code.r):
            forced = own_idx if s == own_sub else None
            columns.append(self._subsystem_stream(s, forced))
        return np.concatenate(columns, axis=1)

    def symbols_memoryless(self, user: int) -> np.ndarray:
        """(T,) memoryless symbol decisions for one user."""
        own_sub, own_idx = divmod(user, self.code.k)
        return self._subsystem_stream(own_sub, own_idx)[:, own_idx]

    def symbols_windowed(self, user: int, window: WindowConfig,
                         strategy: str = "redecode") -> np.ndarray:
        """(T - 2w,) windowed symbol decisions for t in [w, T - w).

        Activity of every other user is majority-voted over the 2w+1
        surrounding decodes; on disagreement with the plain decode the
        strategy either re-decodes under the voted constraints
        ("redecode") or keeps the plain symbol ("emit-memoryless").
        """
        if strategy not in ("redecode", "emit-memoryless"):
            raise ValueError(f"unknown strategy {strategy!r}")
        w = window.w
        if self.T <= 2 * w:
            raise ValueError("stream too short for the window")
        own_sub, own_idx = divmod(user, self.code.k)
        base = self.symbols_memoryless(user)[w:self.T - w].copy()
        if w == 0 or strategy == "emit-memoryless":
            # single-sample windows always agree with themselves
            return base
        activity = self.full_decodes(user) != 0  # (T, n)
        csum = np.vstack([np.zeros((1, self.code.n), dtype=np.int64),
                          np.cumsum(activity, axis=0)])
        counts = csum[2 * w + 1:] - csum[:self.T - 2 * w]  # rows t-w..t+w
        voted_on = counts > w
        current = activity[w:self.T - w]
        differs = voted_on != current
        differs[:, user] = False  # own activity is constrained, not voted
        inconsistent = np.flatnonzero(differs.any(axis=1))
        if inconsistent.size == 0:
            return base
        # Re-decode only the user's own subsystem: the emitted entry does
        # not depend on the other decoupled subsystems.  Group repeated
        # constraint patterns so each distinct pattern decodes as a batch.
        lo = own_sub * self.code.k
        voted_own = voted_on[inconsistent, lo:lo + self.code.k]
        patterns, inverse = np.unique(voted_own, axis=0, return_inverse=True)
        for p, pattern in enumerate(patterns):
            rows = inconsistent[inverse == p]
            constraints = np.where(pattern, FORCE_ACTIVE, FORCE_ZERO)
            constraints = constraints.astype(np.int8)
            constraints[own_idx] = FORCE_ACTIVE
            dec = _SubsystemDecoder(self.code.A, self.code.B, constraints,
                                    perm=self.code.column_permutation)
            x_hat, _ = dec.decode_rows(
                dec.transform(self.blocks[rows + w, own_sub, :]))
            base[rows] = x_hat[:, own_idx]
        return base


def decode_windowed(code: CodeStructure, Y_stream, window: WindowConfig,
                    user: int, strategy: str = "redecode"):
    """Window-smoothed decode of a stream; returns [(t, symbol), ...].

    Emits one symbol per t in [w, T - w); edges are skipped because their
    windows would be truncated.
    """
    if not 0 <= user < code.n:
        raise ValueError("user index out of range")
    sd = StreamDecoder(code, Y_stream)
    symbols = sd.symbols_windowed(user, window, strategy=strategy)
    return [(t + window.w, int(sym)) for t, sym in enumerate(symbols)]
