"""
Achievable rates under treat-interference-as-noise decoding.

Rx-i's rate for Tx-i is ``I[X_i;Y_i] = I[X;Y_i] - I[X;Y_i|X_i]``. Both terms
are estimated by Monte Carlo over the noise with every joint symbol vector
enumerated as an outer term; the two terms share noise draws so their
difference has low variance. Closed-form high-SNR approximations and the
Gaussian-input baseline live here too.

Noise draws are indexed by ``(seed, receiver, k1)`` through
:class:`numpy.random.SeedSequence`, so results do not depend on power, on
evaluation order or on the number of worker threads.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .model import (Scenario, JointSymbolTable, enumerate_joint, effective_channel,
                    noise_samples)

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2
#: per-component magnitude above which the high-SNR approximation is trusted
APPROX_THRESHOLD = 3.0 / math.sqrt(2.0)
DEFAULT_SAMPLES = 2000


class ApproximationRegimeWarning(UserWarning):
    """The power is too low for the high-SNR approximation to be reliable."""


def noise_block(seed: int, rx: int, k1: int, samples: int, dim: int) -> np.ndarray:
    """Noise draws shared by every estimator that conditions on ``(rx, k1)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(rx), int(k1)))
    return noise_samples(np.random.default_rng(ss), samples, dim)


@dataclass
class ReceiverStats:
    """Monte Carlo quantities at one receiver (rates in bits)."""

    joint: float
    conditional: float
    joint_se: float
    conditional_se: float
    user_se: float
    samples: int
    seed: int
    mmse_full: Optional[np.ndarray] = None
    mmse_interference: Optional[np.ndarray] = None

    @property
    def user(self) -> float:
        return self.joint - self.conditional


def _log_weights(points: np.ndarray, k: int, noise: np.ndarray, P: float) -> np.ndarray:
    """``-(||n + sqrt(P) a||^2 - ||n||^2)`` for every candidate, shape ``(S, T)``.

    ``points`` holds the noise-free received points (without sqrt(P)) as
    columns; ``a`` ranges over ``points[:, k] - points``.
    """
    diff = points[:, k:k + 1] - points
    dist2 = np.sum(diff.real ** 2 + diff.imag ** 2, axis=0)
    # Re(n^H a) as one real product
    nr = np.concatenate([noise.real, noise.imag], axis=1)
    ar = np.concatenate([diff.real, diff.imag], axis=0)
    out = nr @ ar
    out *= -2.0 * math.sqrt(P)
    out -= P * dist2[None, :]
    return out


def _lse_and_mmse(points, vectors, k, noise, P, want_mmse):
    logits = _log_weights(points, k, noise, P)
    top = logits.max(axis=1)
    logits -= top[:, None]
    np.exp(logits, out=logits)
    total = logits.sum(axis=1)
    lse = top + np.log(total)
    if not want_mmse:
        return lse, None
    logits /= total[:, None]
    err = vectors[k][None, :] - logits @ vectors
    return lse, err.T @ err.conj()


def receiver_stats(scenario: Scenario, rx: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                   mmse: bool = False, workers: int = 1,
                   table: JointSymbolTable | None = None) -> ReceiverStats:
    """Joint and conditional MI at ``rx`` (and optionally the MMSE matrices).

    For every joint index ``k1`` and noise draw ``n``, the joint term uses
    ``y = sqrt(P) H_rx V x^k1 + n`` and the conditional term uses the same
    ``n`` with the interference-only observation of the interferers' part
    of ``x^k1``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if table is None:
        table = enumerate_joint(scenario)
    sub = table.excluding(rx)
    X = table.vectors
    Xs = sub.vectors
    red = table.reduced_index(rx)
    full, interf = effective_channel(scenario, rx)
    pts = full @ X.T
    pts_i = interf @ Xs.T
    P = scenario.power
    n_r = scenario.rx_antennas[rx]

    def one(k1):
        noise = noise_block(seed, rx, k1, samples, n_r)
        lj, Ej = _lse_and_mmse(pts, X, k1, noise, P, mmse)
        lc, Ec = _lse_and_mmse(pts_i, Xs, int(red[k1]), noise, P, mmse)
        return lj, lc, Ej, Ec

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(one, range(table.total)))
    else:
        parts = [one(k1) for k1 in range(table.total)]

    T = table.total
    lj = np.stack([p[0] for p in parts])  # (T, S) in nats
    lc = np.stack([p[1] for p in parts])
    joint = math.log2(T) - lj.mean() * LOG2E
    cond = math.log2(sub.total) - lc.mean() * LOG2E

    def se(terms):
        if samples < 2:
            return float("nan")
        return float(np.sqrt(np.sum(terms.var(axis=1, ddof=1) / samples)) / T * LOG2E)

    stats = ReceiverStats(joint=float(joint), conditional=float(cond),
                          joint_se=se(lj), conditional_se=se(lc), user_se=se(lj - lc),
                          samples=samples, seed=seed)
    if mmse:
        Ej = np.zeros((X.shape[1],) * 2, dtype=complex)
        Ec = np.zeros((Xs.shape[1],) * 2, dtype=complex)
        for p in parts:
            Ej += p[2]
            Ec += p[3]
        n = T * samples
        stats.mmse_full = 0.5 * (Ej + Ej.conj().T) / n
        stats.mmse_interference = 0.5 * (Ec + Ec.conj().T) / n
    return stats


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------
def mi_joint_mc(scenario: Scenario, i: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                workers: int = 1) -> float:
    """Monte Carlo estimate of ``I[X_1..X_K; Y_i]`` in bits."""
    return receiver_stats(scenario, i, samples, seed, workers=workers).joint


def mi_conditional_mc(scenario: Scenario, i: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      workers: int = 1) -> float:
    """Monte Carlo estimate of ``I[X_1..X_K; Y_i | X_i]`` in bits."""
    return receiver_stats(scenario, i, samples, seed, workers=workers).conditional


def mi_user(scenario: Scenario, i: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
            workers: int = 1) -> float:
    """``I[X_i; Y_i]`` in bits, from the joint and conditional terms on common noise."""
    return receiver_stats(scenario, i, samples, seed, workers=workers).user


def sum_rate_mc(scenario: Scenario, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                workers: int = 1) -> float:
    table = enumerate_joint(scenario)
    return sum(receiver_stats(scenario, i, samples, seed, workers=workers, table=table).user
               for i in range(scenario.K))


# ---------------------------------------------------------------------------
# High-SNR approximation
# ---------------------------------------------------------------------------
def _approx_term(G: np.ndarray, table: JointSymbolTable, P: float, zero_tol: float) -> tuple[float, bool]:
    """``log2 T - mean_k1 log2 sum_k2 exp(-P ||G (x^k1 - x^k2)||^2)`` and a regime flag."""
    T = table.total
    if G.shape[1] == 0:
        return 0.0, False
    pts = G @ table.vectors.T
    sq = math.sqrt(P)
    acc = 0.0
    low = False
    step = max(1, 4_000_000 // max(T, 1))
    for start in range(0, T, step):
        stop = min(start + step, T)
        diff = pts[:, start:stop, None] - pts[:, None, :]  # (n_r, b, T)
        dist2 = np.sum(diff.real ** 2 + diff.imag ** 2, axis=0)
        acc += float(np.sum(logsumexp(-P * dist2, axis=1)))
        parts = np.abs(np.concatenate([diff.real.ravel(), diff.imag.ravel()]))
        parts = parts[parts > zero_tol]
        if parts.size and sq * parts.min() < APPROX_THRESHOLD:
            low = True
    return math.log2(T) - acc / T * LOG2E, low


def _zero_tol(scenario: Scenario, rx: int, tol: float = 1e-9) -> float:
    full, _ = effective_channel(scenario, rx)
    return tol * max(1.0, float(np.abs(full).max()))


def mi_joint_approx(scenario: Scenario, i: int, warn: bool = True) -> float:
    """High-SNR approximation of ``I[X_1..X_K; Y_i]`` (noise averaged out)."""
    table = enumerate_joint(scenario)
    full, _ = effective_channel(scenario, i)
    val, low = _approx_term(full, table, scenario.power, _zero_tol(scenario, i))
    if warn and low:
        warnings.warn(f"receiver {i}: some difference components are below {APPROX_THRESHOLD:.3f} "
                      f"at {scenario.power_db:g} dB; approximation may be loose",
                      ApproximationRegimeWarning, stacklevel=2)
    return val


def mi_conditional_approx(scenario: Scenario, i: int, warn: bool = True) -> float:
    """High-SNR approximation of ``I[X_1..X_K; Y_i | X_i]``."""
    table = enumerate_joint(scenario).excluding(i)
    _, interf = effective_channel(scenario, i)
    val, low = _approx_term(interf, table, scenario.power, _zero_tol(scenario, i))
    if warn and low:
        warnings.warn(f"receiver {i}: interference differences below the high-SNR regime",
                      ApproximationRegimeWarning, stacklevel=2)
    return val


def mi_user_approx(scenario: Scenario, i: int, warn: bool = True) -> float:
    """High-SNR approximation of ``I[X_i; Y_i]``."""
    with warnings.catch_warnings():
        if not warn:
            warnings.simplefilter("ignore", ApproximationRegimeWarning)
        return mi_joint_approx(scenario, i, warn) - mi_conditional_approx(scenario, i, warn)


# ---------------------------------------------------------------------------
# Gaussian-input baselines
# ---------------------------------------------------------------------------
def gaussian_rate_tin(scenario: Scenario, i: int) -> float:
    """Log-det rate of user i with Gaussian inputs and interference treated as noise."""
    P = scenario.power
    n_r = scenario.rx_antennas[i]
    R_int = np.eye(n_r, dtype=complex)
    for k in range(scenario.K):
        if k != i:
            F = scenario.channel(k, i) @ scenario.precoders[k]
            R_int += P * F @ F.conj().T
    F = scenario.channel(i, i) @ scenario.precoders[i]
    R_tot = R_int + P * F @ F.conj().T
    _, ld_tot = np.linalg.slogdet(R_tot)
    _, ld_int = np.linalg.slogdet(R_int)
    return max(0.0, float(ld_tot - ld_int) * LOG2E)


def gaussian_saturation_siso(scenario: Scenario, i: int) -> float:
    """High-power limit ``log2(1 + |h_ii v_i|^2 / sum_k |h_ki v_k|^2)`` for SISO scenarios.

    Returns ``inf`` when every cross gain into Rx-i is zero.
    """
    if any(n != 1 for n in scenario.tx_antennas + scenario.rx_antennas + scenario.streams):
        raise ValueError("gaussian_saturation_siso needs single-antenna, single-stream users")
    gain = [abs(complex(scenario.channel(k, i)[0, 0] * scenario.precoders[k][0, 0])) ** 2
            for k in range(scenario.K)]
    interference = sum(g for k, g in enumerate(gain) if k != i)
    if interference == 0.0:
        return math.inf
    return math.log2(1.0 + gain[i] / interference)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
@dataclass
class RateReport:
    per_user: list
    method: str
    power_db: float
    joint: Optional[list] = None
    conditional: Optional[list] = None
    standard_error: Optional[list] = None
    samples: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def sum_rate(self) -> float:
        return float(sum(self.per_user))


def rate_report(scenario: Scenario, method: str = "mc", samples: int = DEFAULT_SAMPLES,
                seed: int = 0, workers: int = 1) -> RateReport:
    if method == "mc":
        table = enumerate_joint(scenario)
        stats = [receiver_stats(scenario, i, samples, seed, workers=workers, table=table)
                 for i in range(scenario.K)]
        return RateReport(per_user=[s.user for s in stats], method="mc", power_db=scenario.power_db,
                          joint=[s.joint for s in stats], conditional=[s.conditional for s in stats],
                          standard_error=[s.user_se for s in stats], samples=samples, seed=seed)
    if method == "approx":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ApproximationRegimeWarning)
            j = [mi_joint_approx(scenario, i) for i in range(scenario.K)]
            c = [mi_conditional_approx(scenario, i) for i in range(scenario.K)]
        return RateReport(per_user=[a - b for a, b in zip(j, c)], method="approx",
                          power_db=scenario.power_db, joint=j, conditional=c)
    if method == "gaussian":
        return RateReport(per_user=[gaussian_rate_tin(scenario, i) for i in range(scenario.K)],
                          method="gaussian", power_db=scenario.power_db)
    raise ValueError(f"unknown rate method {method!r}")
