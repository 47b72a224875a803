"""
Saturation behaviour of treat-interference-as-noise rates.

A user's precoders are CCSC optimal when no pair of distinct own symbol
vectors can be mapped onto the same noise-free received point by any
choice of interferer symbols, i.e.::

    H_ii V_i (x_i - x_i') + sum_{k != i} H_ki V_k (x_k - x_k') != 0   for x_i != x_i'.

"Zero" is decided relative to the largest own-signal difference norm at
the receiver, so scaling every channel into a receiver does not change a
verdict.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .model import Scenario, JointSymbolTable, enumerate_joint, effective_channel

DEFAULT_TOL = 1e-9


class CcscSearchError(RuntimeError):
    """No CCSC-optimal precoder set was found within the attempt budget."""


@dataclass
class Violation:
    """Interferer/own symbol choice that collapses two own symbols at the receiver."""

    indices: tuple  # (p_01, p_02, p_11, p_12, ...) per-user symbol indices
    differences: list  # per user, complex symbol difference vector
    norm: float

    def to_dict(self) -> dict:
        return {"indices": [int(p) for p in self.indices],
                "differences": [[[float(z.real), float(z.imag)] for z in d] for d in self.differences],
                "norm": self.norm}


@dataclass
class CcscReport:
    user: int
    optimal: bool
    violations: list = field(default_factory=list)
    min_nonzero_norm: float = math.inf
    scale: float = 0.0
    tolerance_used: float = DEFAULT_TOL

    def to_dict(self) -> dict:
        return {"user": self.user, "optimal": self.optimal,
                "violations": [v.to_dict() for v in self.violations],
                "min_nonzero_norm": self.min_nonzero_norm, "scale": self.scale,
                "tolerance_used": self.tolerance_used}


def _own_scale(scenario: Scenario, i: int, table: JointSymbolTable) -> tuple[np.ndarray, np.ndarray, float]:
    own = table.user_vectors(i)
    F = scenario.channel(i, i) @ scenario.precoders[i]
    pts = F @ own.T  # (n_r, M^d_i)
    diffs = pts[:, :, None] - pts[:, None, :]
    scale = float(np.sqrt(np.sum(np.abs(diffs) ** 2, axis=0)).max())
    return own, pts, scale


def ccsc_check(scenario: Scenario, i: int, tol: float = DEFAULT_TOL, max_violations: int = 10_000) -> CcscReport:
    """Test the CCSC condition for user ``i`` and collect violating tuples.

    Every ordered own pair ``p_i1 != p_i2`` is combined with every ordered
    pair of interferer joint vectors; a violation is recorded when the
    combined received difference has norm ``<= tol * scale``.
    """
    table = enumerate_joint(scenario)
    own, own_pts, scale = _own_scale(scenario, i, table)
    sub = table.excluding(i)
    _, interf = effective_channel(scenario, i)
    ipts = interf @ sub.vectors.T  # (n_r, T')
    thresh = tol * scale
    n_own = own.shape[0]
    pairs = [(a, b) for a in range(n_own) for b in range(n_own) if a != b]
    report = CcscReport(user=i, optimal=True, scale=scale, tolerance_used=tol)
    if scale == 0.0:
        report.optimal = False
    sub_digits = sub.user_digits()
    others = [k for k in range(scenario.K) if k != i]
    min_nz = math.inf
    for a, b in pairs:
        u = own_pts[:, a] - own_pts[:, b]
        # interferer difference for (i1, i2) is ipts[:, i1] - ipts[:, i2]
        comb = u[:, None, None] + ipts[:, :, None] - ipts[:, None, :]
        norms = np.sqrt(np.sum(np.abs(comb) ** 2, axis=0))
        bad = norms <= thresh
        good = norms[~bad]
        if good.size:
            min_nz = min(min_nz, float(good.min()))
        if not bad.any():
            continue
        report.optimal = False
        for i1, i2 in zip(*np.nonzero(bad)):
            if len(report.violations) >= max_violations:
                break
            idx = [0] * (2 * scenario.K)
            diffs = [None] * scenario.K
            idx[2 * i], idx[2 * i + 1] = a, b
            diffs[i] = own[a] - own[b]
            for pos, k in enumerate(others):
                p1, p2 = int(sub_digits[i1, pos]), int(sub_digits[i2, pos])
                idx[2 * k], idx[2 * k + 1] = p1, p2
                uv = table.user_vectors(k)
                diffs[k] = uv[p1] - uv[p2]
            report.violations.append(Violation(tuple(idx), diffs, float(norms[i1, i2])))
    report.min_nonzero_norm = min_nz
    return report


def ccsc_check_all(scenario: Scenario, tol: float = DEFAULT_TOL) -> list:
    return [ccsc_check(scenario, i, tol) for i in range(scenario.K)]


def combined_difference(scenario: Scenario, i: int, differences) -> np.ndarray:
    """Received noise-free difference at Rx-i for per-user symbol differences."""
    out = np.zeros(scenario.rx_antennas[i], dtype=complex)
    for k, dk in enumerate(differences):
        out += scenario.channel(k, i) @ scenario.precoders[k] @ np.atleast_1d(dk)
    return out


# ---------------------------------------------------------------------------
# Exact high-power limit
# ---------------------------------------------------------------------------
@dataclass
class SaturationReport:
    user: int
    limit_bits: float
    setA_counts: dict
    setB_counts: dict
    scale: float
    tolerance_used: float

    def to_dict(self) -> dict:
        return {"user": self.user, "limit_bits": self.limit_bits,
                "setA_counts": {str(k): v for k, v in sorted(self.setA_counts.items())},
                "setB_counts": {str(k): v for k, v in sorted(self.setB_counts.items())},
                "scale": self.scale, "tolerance_used": self.tolerance_used}


def _collision_counts(pts: np.ndarray, thresh: float) -> np.ndarray:
    """For every column, how many other columns lie within ``thresh``."""
    T = pts.shape[1]
    counts = np.empty(T, dtype=np.int64)
    step = max(1, 4_000_000 // max(T, 1))
    for start in range(0, T, step):
        stop = min(start + step, T)
        diff = pts[:, start:stop, None] - pts[:, None, :]
        near = np.sqrt(np.sum(np.abs(diff) ** 2, axis=0)) <= thresh
        counts[start:stop] = near.sum(axis=1) - 1
    return counts


def saturation_limit(scenario: Scenario, i: int, tol: float = DEFAULT_TOL) -> SaturationReport:
    """Limit of the high-SNR rate approximation of user ``i`` as P grows.

    ``d_i log2 M - mean_k1 log2(1 + |A^k1|) + mean_i1 log2(1 + |B^i1|)`` where
    ``|A^k1|`` (``|B^i1|``) counts the other joint (interferer) vectors that
    land on the same received point as ``k1`` (``i1``).
    """
    table = enumerate_joint(scenario)
    _, _, scale = _own_scale(scenario, i, table)
    thresh = tol * scale
    full, interf = effective_channel(scenario, i)
    a_counts = _collision_counts(full @ table.vectors.T, thresh)
    sub = table.excluding(i)
    b_counts = _collision_counts(interf @ sub.vectors.T, thresh)
    limit = (scenario.streams[i] * math.log2(scenario.M)
             - float(np.mean(np.log2(1.0 + a_counts)))
             + float(np.mean(np.log2(1.0 + b_counts))))
    return SaturationReport(user=i, limit_bits=limit,
                            setA_counts=dict(Counter(a_counts.tolist())),
                            setB_counts=dict(Counter(b_counts.tolist())),
                            scale=scale, tolerance_used=tol)


# ---------------------------------------------------------------------------
# Random CCSC-optimal precoders
# ---------------------------------------------------------------------------
def random_ccsc_precoders(scenario: Scenario, seed: int = 0, max_attempts: int = 10,
                          tol: float = DEFAULT_TOL, return_attempts: bool = False):
    """Draw Gaussian precoders scaled to unit trace until every user passes.

    The scenario's own precoders are ignored. Raises :class:`CcscSearchError`
    after ``max_attempts`` failed draws.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        precs = []
        for n_t, d in zip(scenario.tx_antennas, scenario.streams):
            V = rng.standard_normal((n_t, d)) + 1j * rng.standard_normal((n_t, d))
            precs.append(V / np.linalg.norm(V))
        trial = scenario.with_precoders(precs)
        if all(r.optimal for r in ccsc_check_all(trial, tol)):
            return (precs, attempt) if return_attempts else precs
    raise CcscSearchError(f"no CCSC-optimal precoders after {max_attempts} attempts")
