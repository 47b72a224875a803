"""
Reference precoders: closed-form interference alignment for the 3-user
2x2 single-stream channel, plus identity and random sets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Scenario, ScenarioError

#: channel blocks with a larger condition number are treated as singular
MAX_CONDITION = 1e12


class SingularChannelError(ScenarioError):
    """A channel block needed for alignment cannot be inverted."""


def _inv(H, name):
    if np.linalg.cond(H) >= MAX_CONDITION:
        raise SingularChannelError(f"channel block {name} is singular")
    return np.linalg.inv(H)


def _normalize(V):
    return V / np.linalg.norm(V)


def _check_3user(channels):
    if len(channels) != 3 or any(len(r) != 3 for r in channels):
        raise ScenarioError("interference alignment is implemented for 3 users only")
    for row in channels:
        for H in row:
            if np.shape(H) != (2, 2):
                raise ScenarioError("interference alignment needs 2x2 channel blocks")


def ia_candidates(channels):
    """Both alignment solutions, ordered by decreasing eigenvalue magnitude.

    ``channels[j][i]`` is the block from Tx-i to Rx-j. User 0's precoder is an
    eigenvector of ``H_01^-1 H_21 H_20^-1 H_10 H_12^-1 H_02`` (``H_ij`` from Tx-i
    to Rx-j); users 1 and 2 follow from the alignment equations at Rx-2 and
    Rx-1.
    """
    _check_3user(channels)
    H = lambda i, j: np.asarray(channels[j][i], dtype=complex)
    inv01, inv20, inv12, inv21 = (_inv(H(0, 1), "H_01"), _inv(H(2, 0), "H_20"),
                                  _inv(H(1, 2), "H_12"), _inv(H(2, 1), "H_21"))
    composite = inv01 @ H(2, 1) @ inv20 @ H(1, 0) @ inv12 @ H(0, 2)
    vals, vecs = np.linalg.eig(composite)
    out = []
    for idx in np.argsort(-np.abs(vals), kind="stable"):
        v0 = vecs[:, idx:idx + 1]
        v1 = inv12 @ H(0, 2) @ v0
        v2 = inv21 @ H(0, 1) @ v0
        out.append([_normalize(v0), _normalize(v1), _normalize(v2)])
    return out


def ia_precoders_3user(channels, select: str = "eigenvalue", scenario: Scenario | None = None,
                       samples: int = 500, seed: int = 0):
    """Interference-alignment precoders with unit trace.

    ``select="eigenvalue"`` keeps the eigenvector with the larger eigenvalue
    magnitude. ``select="rate"`` evaluates both candidates on ``scenario``
    and keeps the one with the larger Monte Carlo sum-rate (ties go to the
    eigenvalue order).
    """
    cands = ia_candidates(channels)
    if select == "eigenvalue":
        return cands[0]
    if select != "rate":
        raise ValueError(f"unknown eigenvector selection {select!r}")
    if scenario is None:
        raise ValueError("select='rate' needs a scenario to evaluate")
    from .infotheory import sum_rate_mc

    rates = [sum_rate_mc(scenario.with_precoders(c), samples, seed) for c in cands]
    return cands[1] if rates[1] > rates[0] else cands[0]


@dataclass
class AlignmentReport:
    interference_dim: list = field(default_factory=list)
    independent: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return (all(d == 1 for d in self.interference_dim) and all(self.independent)
                and all(r <= self.tol for r in self.residual))


def _sin_angle(u, v):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    u, v = u / nu, v / nv
    return float(np.linalg.norm(v - u * np.vdot(u, v)))


def verify_alignment(channels, precoders, tol: float = 1e-8) -> AlignmentReport:
    """Check that interference collapses to one dimension at every receiver.

    The residual is the sine of the principal angle between the two
    interference directions; the independence flag requires a nonzero
    signal direction outside the interference span.
    """
    _check_3user(channels)
    rep = AlignmentReport(tol=tol)
    V = [np.asarray(v, dtype=complex).reshape(2, 1) for v in precoders]
    for j in range(3):
        sig = (np.asarray(channels[j][j]) @ V[j]).ravel()
        u, w = [(np.asarray(channels[j][k]) @ V[k]).ravel() for k in range(3) if k != j]
        res = _sin_angle(u, w)
        scale = max(np.linalg.norm(u), np.linalg.norm(w), 1e-300)
        span = np.column_stack([u, w])
        dim = int(np.linalg.matrix_rank(span, tol=tol * scale)) if res > tol else int(scale > 1e-300)
        ref = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
        indep = bool(np.linalg.norm(sig) > 0 and _sin_angle(ref, sig) > 1e-6)
        rep.interference_dim.append(dim)
        rep.independent.append(indep)
        rep.residual.append(res)
    return rep


def identity_precoders(scenario: Scenario):
    return [np.eye(n, d) / np.sqrt(d) for n, d in zip(scenario.tx_antennas, scenario.streams)]


def random_precoders(scenario: Scenario, seed: int = 0):
    rng = np.random.default_rng(seed)
    out = []
    for n, d in zip(scenario.tx_antennas, scenario.streams):
        V = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        out.append(V / np.linalg.norm(V))
    return out
