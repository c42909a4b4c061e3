"""On/off user traffic with exponentially distributed sojourn times.

Each user alternates between an active and a silent state; the holding
time in either state is exponential with mean lambda_r bit intervals, so
observed at symbol boundaries the state toggles independently per symbol
with probability 1 - exp(-1/lambda_r).  Active users emit +-1 equiprobably
and independently of the state process; silent users emit 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrafficParams:
    """Mean on/off sojourn time in bit intervals (dimensionless)."""

    lambda_r: float

    def __post_init__(self):
        if not self.lambda_r > 0:
            raise ValueError("lambda_r must be positive")


def toggle_probability(lambda_r: float) -> float:
    """Per-symbol state flip probability, 1 - exp(-1/lambda_r)."""
    if not lambda_r > 0:
        raise ValueError("lambda_r must be positive")
    return -math.expm1(-1.0 / lambda_r)


def generate_traffic(n_users: int, T: int, params: TrafficParams,
                     rng: np.random.Generator) -> np.ndarray:
    """Ternary symbol matrix (n_users x T): 0 silent, +-1 active bits.

    Initial states are equiprobable; toggles and data signs are drawn
    independently, so identical seeds reproduce identical streams.
    """
    if n_users < 1 or T < 1:
        raise ValueError("n_users and T must be >= 1")
    p = toggle_probability(params.lambda_r)
    initial = rng.integers(0, 2, size=n_users, dtype=np.int64)
    toggles = (rng.random(size=(n_users, T - 1)) < p).astype(np.int64)
    signs = rng.integers(0, 2, size=(n_users, T), dtype=np.int64) * 2 - 1
    states = np.empty((n_users, T), dtype=np.int64)
    states[:, 0] = initial
    if T > 1:
        states[:, 1:] = (initial[:, None] + np.cumsum(toggles, axis=1)) & 1
    return (states * signs).astype(np.int8)


def activity_run_lengths(symbols) -> np.ndarray:
    """Lengths of maximal constant-activity runs, row by row."""
    active = np.asarray(symbols) != 0
    lengths = []
    for row in active:
        changes = np.flatnonzero(np.diff(row.astype(np.int8)))
        edges = np.concatenate([[-1], changes, [row.size - 1]])
        lengths.append(np.diff(edges))
    return np.concatenate(lengths)
