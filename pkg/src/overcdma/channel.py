"""Synchronous AWGN multiple-access channel: Y = C X + N."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseParams:
    """Per-chip noise standard deviation (covariance sigma^2 I)."""

    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class SimulationPoint:
    """One operating point: per-user Eb/N0 in dB and the chip count m."""

    ebn0_db: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")


def encode(C, X) -> np.ndarray:
    """Superimpose user symbols: integer-valued C @ X.

    X may be a single ternary vector or a (n, T) matrix of symbol columns.
    """
    c = np.asarray(C, dtype=np.int64)
    x = np.asarray(X, dtype=np.int64)
    if x.shape[0] != c.shape[1]:
        raise ValueError(
            f"dimension mismatch: code has {c.shape[1]} users, "
            f"input has {x.shape[0]}"
        )
    if not np.isin(x, (-1, 0, 1)).all():
        raise ValueError("user symbols must be ternary (-1, 0, +1)")
    return c @ x


def add_awgn(Y, noise: NoiseParams, rng: np.random.Generator) -> np.ndarray:
    """Add iid zero-mean Gaussian noise with the configured deviation."""
    y = np.asarray(Y, dtype=np.float64)
    return y + rng.normal(0.0, noise.sigma, size=y.shape)


def ebn0_to_sigma(point: SimulationPoint) -> NoiseParams:
    """Map an Eb/N0 point to the per-chip noise deviation.

    A user's bit occupies m unit-amplitude chips, so Eb = m, and the
    two-sided convention N0 = 2 sigma^2 gives sigma = sqrt(m / (2 * 10^(dB/10))).
    """
    ratio = 10.0 ** (point.ebn0_db / 10.0)
    return NoiseParams(sigma=float(np.sqrt(point.m / (2.0 * ratio))))
