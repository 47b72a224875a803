"""
Posterior means, MMSE matrices and the sum-rate gradient.

The gradient is the conjugate (Wirtinger) derivative, normalised so that
``f(V + eps*D) ~= f(V) + 2*eps*Re tr(D^H G)`` with f in bits. For user i::

    G_i = P log2(e) [ sum_j      H_ij^H (H_j V)            E_j       S_i
                      - sum_{j!=i} H_ij^H (H_notj V_notj)  E_notj    S_i^(j) ]

where ``S_i`` picks user i's columns of the stacked vector and ``S_i^(j)``
the same columns once user j has been removed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .infotheory import LOG2E, DEFAULT_SAMPLES, receiver_stats, ReceiverStats
from .model import Scenario, JointSymbolTable, enumerate_joint


def posterior_mean(y: np.ndarray, channel: np.ndarray, table: JointSymbolTable, power: float) -> np.ndarray:
    """``E[x | y]`` for ``y = sqrt(P) G x + n`` with a uniform prior over ``table``."""
    X = table.vectors
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    pts = np.sqrt(power) * (channel @ X.T)  # (n_r, T)
    r = y[:, :, None] - pts[None, :, :]
    logits = -np.sum(r.real ** 2 + r.imag ** 2, axis=1)
    w = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    out = w @ X
    return out[0] if out.shape[0] == 1 else out


@dataclass
class MmseEstimate:
    matrix: np.ndarray
    samples: int
    seed: int


def mmse_full(scenario: Scenario, j: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
              workers: int = 1) -> MmseEstimate:
    """Error covariance of ``E[X | Y_j]`` over all users' symbols."""
    st = receiver_stats(scenario, j, samples, seed, mmse=True, workers=workers)
    return MmseEstimate(st.mmse_full, samples, seed)


def mmse_interference(scenario: Scenario, j: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      workers: int = 1) -> MmseEstimate:
    """Error covariance of the interferers' symbols given ``Y_j`` minus Tx-j's contribution."""
    st = receiver_stats(scenario, j, samples, seed, mmse=True, workers=workers)
    return MmseEstimate(st.mmse_interference, samples, seed)


def gradient_from_stats(scenario: Scenario, stats: list[ReceiverStats]) -> list:
    """Assemble the per-user gradients from per-receiver MMSE matrices."""
    K = scenario.K
    P = scenario.power
    off = scenario.offsets()
    d = scenario.streams
    V = scenario.precoders
    grads = [np.zeros_like(v) for v in V]
    for j in range(K):
        Hj_V = np.hstack([scenario.channel(k, j) @ V[k] for k in range(K)])
        Ej = stats[j].mmse_full
        others = [k for k in range(K) if k != j]
        if others:
            Hnj_V = np.hstack([scenario.channel(k, j) @ V[k] for k in others])
            Enj = stats[j].mmse_interference
        for i in range(K):
            Hij_h = scenario.channel(i, j).conj().T
            grads[i] += Hij_h @ Hj_V @ Ej[:, off[i]:off[i + 1]]
            if i != j:
                start = off[i] - (d[j] if i > j else 0)
                grads[i] -= Hij_h @ Hnj_V @ Enj[:, start:start + d[i]]
    return [P * LOG2E * g for g in grads]


def sum_rate_gradient(scenario: Scenario, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      workers: int = 1) -> list:
    """Gradient of the Monte Carlo sum-rate with respect to every precoder."""
    table = enumerate_joint(scenario)
    stats = [receiver_stats(scenario, j, samples, seed, mmse=True, workers=workers, table=table)
             for j in range(scenario.K)]
    return gradient_from_stats(scenario, stats)


def sum_rate_and_gradient(scenario: Scenario, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                          workers: int = 1):
    """Sum-rate, gradient and per-receiver statistics from one pass over the noise."""
    table = enumerate_joint(scenario)
    stats = [receiver_stats(scenario, j, samples, seed, mmse=True, workers=workers, table=table)
             for j in range(scenario.K)]
    return sum(s.user for s in stats), gradient_from_stats(scenario, stats), stats
