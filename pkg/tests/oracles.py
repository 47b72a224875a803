"""
Independent reference computations built directly from numpy.

Expectations over circular complex Gaussian noise CN(0, 1) are evaluated
with a tensor Gauss-Hermite rule: each real dimension has variance 1/2, so
``E f(n) = (1/pi) sum_ab w_a w_b f(t_a + i t_b)``.
"""
import itertools

import numpy as np


def gh_complex(nodes: int = 40):
    t, w = np.polynomial.hermite.hermgauss(nodes)
    n = (t[:, None] + 1j * t[None, :]).ravel()
    weights = (w[:, None] * w[None, :]).ravel() / np.pi
    return n, weights


def mi_points(points, P, nodes: int = 40) -> float:
    """``I[X; sqrt(P) s_X + N]`` in bits for equiprobable scalar points ``s``."""
    s = np.asarray(points, dtype=complex)
    n, w = gh_complex(nodes)
    T = len(s)
    total = 0.0
    for k in range(T):
        a = np.sqrt(P) * (s[k] - s)  # (T,)
        expo = -np.abs(a[None, :] + n[:, None]) ** 2 + np.abs(n[:, None]) ** 2
        m = expo.max(axis=1, keepdims=True)
        lse = (m[:, 0] + np.log(np.exp(expo - m).sum(axis=1)))
        total += np.dot(w, lse)
    return float(np.log2(T) - total / T / np.log(2))


def siso_points(gains, alphabet):
    """Noise-free received points for every joint symbol (user 0 fastest)."""
    combos = list(itertools.product(alphabet, repeat=len(gains)))
    combos = [tuple(reversed(c)) for c in combos]  # user 0 varies fastest
    return np.array([sum(g * x for g, x in zip(gains, c)) for c in combos]), np.array(combos)


def siso_rates(H, v, alphabet, P, nodes: int = 40):
    """Per-receiver (joint, conditional, user) MI for a SISO interference channel.

    ``H[j][i]`` is the gain from Tx-i to Rx-j and ``v`` the scalar precoders.
    """
    K = len(v)
    out = []
    for j in range(K):
        gains = [H[j][i] * v[i] for i in range(K)]
        pts, _ = siso_points(gains, alphabet)
        ipts, _ = siso_points([g for i, g in enumerate(gains) if i != j], alphabet)
        joint = mi_points(pts, P, nodes)
        cond = mi_points(ipts, P, nodes)
        out.append((joint, cond, joint - cond))
    return out


def siso_sum_rate(H, v, alphabet, P, nodes: int = 40) -> float:
    return sum(r[2] for r in siso_rates(H, v, alphabet, P, nodes))


def mmse_matrix(gains, alphabet, P, nodes: int = 40):
    """Error covariance of ``E[x | sqrt(P) g.x + n]`` for equiprobable symbol vectors."""
    pts, X = siso_points(gains, alphabet)
    n, w = gh_complex(nodes)
    T, D = X.shape
    E = np.zeros((D, D), dtype=complex)
    for k in range(T):
        y = np.sqrt(P) * pts[k] + n  # (Q,)
        logits = -np.abs(y[:, None] - np.sqrt(P) * pts[None, :]) ** 2
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        err = X[k][None, :] - p @ X  # (Q, D)
        E += np.einsum("q,qa,qb->ab", w, err, err.conj())
    return E / T


def bpsk_mmse(P, nodes: int = 80) -> float:
    """Scalar BPSK MMSE in CN(0,1) noise: ``1 - E tanh(2P + 2 sqrt(P) z)``, z ~ N(0, 1/2)."""
    t, w = np.polynomial.hermite.hermgauss(nodes)
    return float(1.0 - np.dot(w, np.tanh(2 * P + 2 * np.sqrt(P) * t)) / np.sqrt(np.pi))
