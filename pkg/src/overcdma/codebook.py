"""Binary signature matrices that stay one-to-one on ternary user vectors.

A signature matrix is an l x k array of +-1 chips.  When the map
x -> D @ x is injective on {-1, 0, +1}^k, a superposition of user symbols
can be inverted exactly in a noiseless channel, including the detection of
silent (zero) users.  This module certifies that property by exhaustive
enumeration, searches for such matrices, and lifts small certified blocks
to large systems with a Kronecker product.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DIFFERENCE_KERNEL = "difference-kernel"
PAIRWISE_EXHAUSTIVE = "pairwise-exhaustive"

# Default enumeration bound for the difference-kernel oracle (5^k vectors).
DEFAULT_MAX_K = 12


class DimensionTooLargeError(ValueError):
    """Enumeration budget exceeded for an exhaustive injectivity check."""


class NoInvertibleBlockError(ValueError):
    """No column subset of the matrix forms an invertible square block."""


def as_signature_matrix(entries) -> np.ndarray:
    """Validate and return a 2-D +-1 integer matrix."""
    m = np.asarray(entries, dtype=np.int64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError("signature matrix must be 2-D and nonempty")
    if not np.isin(m, (-1, 1)).all():
        raise ValueError("signature matrix entries must be +1 or -1")
    return m


def matrix_fingerprint(matrix) -> str:
    """Content hash of dimensions plus the row-major entry sequence."""
    m = np.asarray(matrix, dtype=np.int64)
    h = hashlib.sha256()
    h.update(f"{m.shape[0]} {m.shape[1]}\n".encode())
    h.update(m.astype(np.int8).tobytes())
    return h.hexdigest()


def int_det(matrix) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("determinant requires a square matrix")
    n = m.shape[0]
    a = [[int(v) for v in row] for row in m]
    sign = 1
    prev = 1
    for i in range(n - 1):
        if a[i][i] == 0:
            for j in range(i + 1, n):
                if a[j][i] != 0:
                    a[i], a[j] = a[j], a[i]
                    sign = -sign
                    break
            else:
                return 0
        for j in range(i + 1, n):
            for c in range(i + 1, n):
                a[j][c] = (a[j][c] * a[i][i] - a[j][i] * a[i][c]) // prev
            a[j][i] = 0
        prev = a[i][i]
    return sign * a[n - 1][n - 1]


def is_hadamard(matrix) -> bool:
    """True iff the matrix is square +-1 with mutually orthogonal rows."""
    m = np.asarray(matrix, dtype=np.int64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if not np.isin(m, (-1, 1)).all():
        return False
    n = m.shape[0]
    return bool((m @ m.T == n * np.eye(n, dtype=np.int64)).all())


def sylvester_hadamard(order: int) -> np.ndarray:
    """Hadamard matrix of the given power-of-two order (Sylvester doubling)."""
    if order < 1 or order & (order - 1) != 0:
        raise ValueError(f"order must be a power of two, got {order}")
    h = np.array([[1]], dtype=np.int64)
    h2 = np.array([[1, 1], [1, -1]], dtype=np.int64)
    while h.shape[0] < order:
        h = np.kron(h, h2)
    return h


def _difference_chunks(k: int, chunk: int = 1 << 18):
    """Yield float64 chunks of vectors in {-2..2}^k, one of each +-d pair.

    The zero vector sits exactly at the midpoint of the base-5 enumeration
    and is excluded by iterating over the lower half only.
    """
    total = 5**k
    half = (total - 1) // 2
    powers = 5 ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, half, chunk):
        idx = np.arange(start, min(start + chunk, half), dtype=np.int64)
        digits = (idx[:, None] // powers) % 5 - 2
        yield digits.astype(np.float64)


def verify_injectivity(matrix, max_k: int = DEFAULT_MAX_K) -> bool:
    """Exhaustive difference-kernel check of ternary injectivity.

    x -> D @ x is injective on ternary vectors iff no nonzero difference
    vector d in {-2,-1,0,1,2}^k satisfies D @ d = 0, so the check walks all
    (5^k - 1)/2 sign classes of nonzero d.
    """
    d = as_signature_matrix(matrix)
    k = d.shape[1]
    if k > max_k:
        raise DimensionTooLargeError(
            f"k={k} exceeds the 5^k enumeration bound (max_k={max_k})"
        )
    df = d.astype(np.float64)
    for block in _difference_chunks(k):
        products = block @ df.T
        if (np.abs(products).max(axis=1) == 0).any():
            return False
    return True


def verify_injectivity_pairwise(matrix, max_k: int = 8) -> bool:
    """Slow independent oracle: all 3^k ternary inputs map to distinct images."""
    d = as_signature_matrix(matrix)
    k = d.shape[1]
    if k > max_k:
        raise DimensionTooLargeError(
            f"k={k} exceeds the 3^k pairwise enumeration bound (max_k={max_k})"
        )
    grids = np.meshgrid(*([np.array([-1, 0, 1])] * k), indexing="ij")
    inputs = np.stack([g.ravel() for g in grids], axis=1)
    images = inputs @ d.T
    return np.unique(images, axis=0).shape[0] == images.shape[0]


@dataclass(frozen=True)
class InjectivityCertificate:
    """Record that an exhaustive injectivity check completed on a matrix."""

    matrix_hash: str
    method: str
    checked_dimension: int


def certify(matrix, method: str = DIFFERENCE_KERNEL, max_k: int = DEFAULT_MAX_K):
    """Run the named exhaustive oracle and issue a certificate on success."""
    d = as_signature_matrix(matrix)
    if method == DIFFERENCE_KERNEL:
        ok = verify_injectivity(d, max_k=max_k)
    elif method == PAIRWISE_EXHAUSTIVE:
        ok = verify_injectivity_pairwise(d, max_k=min(max_k, 8))
    else:
        raise ValueError(f"unknown certification method: {method!r}")
    if not ok:
        raise ValueError("matrix is not injective on ternary vectors")
    return InjectivityCertificate(
        matrix_hash=matrix_fingerprint(d),
        method=method,
        checked_dimension=d.shape[1],
    )


def _random_sign_matrix(rng, rows: int, cols: int) -> np.ndarray:
    return rng.integers(0, 2, size=(rows, cols), dtype=np.int64) * 2 - 1


def _random_invertible(rng, n: int) -> np.ndarray:
    while True:
        cand = _random_sign_matrix(rng, n, n)
        if int_det(cand) != 0:
            return cand


def search_cowda(l: int, k: int, rng, max_attempts: int = 2000,
                 max_k: int = DEFAULT_MAX_K):
    """Randomized search for an l x k +-1 matrix injective on ternary inputs.

    Candidates carry an invertible leading l x l block followed by random
    +-1 columns.  When l is a power of two, attempts alternate between a
    Hadamard leading block and a random invertible one: some shapes (e.g.
    l=4, k=5) admit no ternary-injective matrix with a Hadamard head, since
    a Hadamard inverse maps every +-1 column into the difference lattice.
    Returns None when max_attempts candidates all fail certification.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if k < l:
        raise ValueError("k must be >= l")
    hadamard_head = sylvester_hadamard(l) if l & (l - 1) == 0 else None
    for attempt in range(max_attempts):
        if hadamard_head is not None and attempt % 2 == 0:
            head = hadamard_head
        else:
            head = _random_invertible(rng, l)
        if k > l:
            cand = np.hstack([head, _random_sign_matrix(rng, l, k - l)])
        else:
            cand = head
        if verify_injectivity(cand, max_k=max_k):
            return cand
    return None


def _invertible_column_subset(matrix):
    """Greedy left-to-right choice of l columns with exact rank tracking."""
    m = np.asarray(matrix)
    rows, cols = m.shape
    pivots = []  # (pivot_row, reduced column as Fractions)
    chosen = []
    for c in range(cols):
        vec = [Fraction(int(v)) for v in m[:, c]]
        for prow, pvec in pivots:
            factor = vec[prow] / pvec[prow]
            if factor:
                vec = [v - factor * p for v, p in zip(vec, pvec)]
        try:
            prow = next(i for i, v in enumerate(vec) if v)
        except StopIteration:
            continue  # linearly dependent on the chosen columns
        pivots.append((prow, vec))
        chosen.append(c)
        if len(chosen) == rows:
            return chosen
    return None


@dataclass(frozen=True)
class Partition:
    """Split of a signature matrix into [A B] with invertible A."""

    A: np.ndarray
    B: np.ndarray
    column_permutation: np.ndarray  # position -> original column index
    a_is_hadamard: bool


def partition(matrix) -> Partition:
    """Permute columns so the leading l x l block is exactly invertible."""
    d = as_signature_matrix(matrix)
    l = d.shape[0]
    chosen = _invertible_column_subset(d)
    if chosen is None:
        raise NoInvertibleBlockError(
            "no l-column subset of the matrix is invertible"
        )
    rest = [c for c in range(d.shape[1]) if c not in set(chosen)]
    perm = np.array(chosen + rest, dtype=np.int64)
    a = d[:, chosen]
    b = d[:, rest] if rest else np.zeros((l, 0), dtype=np.int64)
    if int_det(a) == 0:  # greedy rank tracking guarantees this never fires
        raise NoInvertibleBlockError("selected block is singular")
    return Partition(A=a, B=b, column_permutation=perm,
                     a_is_hadamard=is_hadamard(a))


def kronecker_lift(P, D) -> np.ndarray:
    """Lift a certified block D by an invertible factor P: C = P (x) D.

    With P invertible, a collision of the lifted code would force a
    column-block-wise collision of D, so the lift inherits ternary
    injectivity from its factors.
    """
    p = as_signature_matrix(P)
    d = as_signature_matrix(D)
    if p.shape[0] != p.shape[1]:
        raise ValueError("P must be square")
    if int_det(p) == 0:
        raise ValueError("P is not invertible")
    return np.kron(p, d)


@dataclass(frozen=True)
class CodeStructure:
    """Certified signature code with its Kronecker factors and [A B] split.

    The full code is C = P (x) D with m = r*l chips and n = r*k users.
    Decoders consume the factors; C itself is only materialized to encode.
    """

    P: np.ndarray
    D: np.ndarray
    A: np.ndarray
    B: np.ndarray
    column_permutation: np.ndarray
    r: int
    l: int
    k: int
    certificate: InjectivityCertificate
    a_is_hadamard: bool

    @property
    def m(self) -> int:
        return self.r * self.l

    @property
    def n(self) -> int:
        return self.r * self.k

    @property
    def C(self) -> np.ndarray:
        cached = self.__dict__.get("_full_code")
        if cached is None:
            cached = np.kron(self.P, self.D)
            self.__dict__["_full_code"] = cached
        return cached


def build_code(P, D, certificate: InjectivityCertificate | None = None,
               max_k: int = DEFAULT_MAX_K) -> CodeStructure:
    """Assemble a CodeStructure, certifying D unless a certificate is given."""
    p = as_signature_matrix(P)
    d = as_signature_matrix(D)
    if p.shape[0] != p.shape[1]:
        raise ValueError("P must be square")
    if int_det(p) == 0:
        raise ValueError("P is not invertible")
    if certificate is None:
        certificate = certify(d, max_k=max_k)
    elif certificate.matrix_hash != matrix_fingerprint(d):
        raise ValueError("certificate does not match the matrix content")
    part = partition(d)
    return CodeStructure(
        P=p,
        D=d,
        A=part.A,
        B=part.B,
        column_permutation=part.column_permutation,
        r=p.shape[0],
        l=d.shape[0],
        k=d.shape[1],
        certificate=certificate,
        a_is_hadamard=part.a_is_hadamard,
    )


def save_codebook(path, matrix, method: str | None = None, seed=None) -> None:
    """Write a signature matrix as text: dims, +-1 rows, optional trailer."""
    m = as_signature_matrix(matrix)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join("+1" if v > 0 else "-1" for v in row))
    if method is not None:
        lines.append(f"# certified: {method} seed={seed}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_codebook(path):
    """Read a codebook file; returns (matrix, meta) with meta None if no trailer."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty codebook file")
    try:
        rows, cols = (int(v) for v in raw[0].split())
    except ValueError as exc:
        raise ValueError(f"{path}: bad dimension line {raw[0]!r}") from exc
    if len(raw) < 1 + rows:
        raise ValueError(f"{path}: expected {rows} matrix rows")
    entries = [[int(v) for v in raw[1 + i].split()] for i in range(rows)]
    matrix = as_signature_matrix(entries)
    if matrix.shape != (rows, cols):
        raise ValueError(f"{path}: matrix shape does not match header")
    meta = None
    for line in raw[1 + rows:]:
        if line.startswith("# certified:"):
            fields = line[len("# certified:"):].split()
            meta = {"method": fields[0]}
            for field in fields[1:]:
                if field.startswith("seed="):
                    seedtxt = field[len("seed="):]
                    meta["seed"] = None if seedtxt == "None" else int(seedtxt)
    return matrix, meta
