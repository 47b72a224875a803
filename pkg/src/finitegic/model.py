"""
Problem instances for the K-user MIMO Gaussian interference channel.

Conventions used throughout the package:

* users, transmitters and receivers are indexed from 0;
* ``channel(i, j)`` is the ``n_r[j] x n_t[i]`` matrix from Tx-i to Rx-j;
* the received signal at Rx-j is ``sum_i sqrt(P) H_ij V_i x_i + N_j`` with
  unit-variance circularly symmetric complex Gaussian noise;
* joint symbol indices use a mixed radix in which user 0 varies fastest and,
  inside a user, the first stream varies fastest.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

#: maximum number of constellation digits (sum of streams) that can be enumerated
MAX_DIGITS = 12
#: joint tables above this size are generated on demand instead of stored
MATERIALIZE_LIMIT = 1_000_000

POWER_TOL = 1e-9


class ScenarioError(ValueError):
    """Malformed or inconsistent problem instance."""


class CapacityError(RuntimeError):
    """The requested enumeration exceeds the configured cap."""


def db_to_linear(power_db: float) -> float:
    return 10.0 ** (power_db / 10.0)


# ---------------------------------------------------------------------------
# Constellations
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Constellation:
    """M distinct unit-average-power points, used with a uniform prior."""

    points: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel().copy()
        if pts.size < 2:
            raise ScenarioError("a constellation needs at least 2 points")
        if self.kind not in ("psk", "qam", "custom"):
            raise ScenarioError(f"unknown constellation kind {self.kind!r}")
        gaps = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
        if gaps.min() <= 1e-12:
            raise ScenarioError("constellation points must be pairwise distinct")
        power = np.mean(np.abs(pts) ** 2)
        if abs(power - 1.0) > 1e-12:
            raise ScenarioError(f"constellation average power is {power!r}, expected 1")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.points, other.points)

    __hash__ = None


def make_constellation(kind: str, order: int) -> Constellation:
    """Build a standard unit-power constellation.

    ``psk`` points are ``exp(2j*pi*m/M)``, rotated by pi/4 for M=4 so that
    QPSK is ``(+-1 +-1j)/sqrt(2)`` listed counter-clockwise from the first
    quadrant. ``qam`` requires M to be an even power of two (4, 16, 64, ...).
    """
    if order < 2:
        raise ScenarioError("constellation order must be >= 2")
    if kind == "psk":
        if order == 4:
            return Constellation(np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0), "psk")
        pts = np.exp(2j * np.pi * np.arange(order) / order)
        # exact values for the axis-aligned cases keep differences clean
        pts = np.where(np.abs(pts.real) < 1e-15, 1j * pts.imag, pts)
        pts = np.where(np.abs(pts.imag) < 1e-15, pts.real + 0j, pts)
        return Constellation(pts, "psk")
    if kind == "qam":
        side = int(round(np.sqrt(order)))
        if side * side != order or order & (order - 1) or side < 2:
            raise ScenarioError(f"QAM order must be an even power of two, got {order}")
        levels = np.arange(-(side - 1), side, 2, dtype=float)
        grid = (levels[None, :] + 1j * levels[:, None]).ravel()
        return Constellation(grid / np.sqrt(np.mean(np.abs(grid) ** 2)), "qam")
    raise ScenarioError(f"unsupported constellation kind {kind!r}")


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------
def _frozen(a, shape=None, what="matrix"):
    arr = np.array(a, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise ScenarioError(f"{what} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{what} has non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """A full problem instance.

    Parameters
    ----------
    constellation : Constellation
        Common input alphabet of every stream.
    channels : sequence of sequences of matrices
        ``channels[j][i]`` is the matrix from Tx-i to Rx-j (shape
        ``n_r[j] x n_t[i]``).
    streams : sequence of int
        Number of symbols ``d_i`` each transmitter sends per channel use.
    power_db : float
        Transmit power P in dB; formulas use ``10**(power_db/10)``.
    precoders : sequence of matrices, optional
        ``V_i`` of shape ``n_t[i] x d_i`` with ``trace(V_i V_i^H) <= 1``.
        Defaults to the first ``d_i`` columns of the identity scaled to unit
        trace.
    """

    constellation: Constellation
    channels: tuple
    streams: tuple
    power_db: float = 0.0
    precoders: tuple | None = None
    tx_antennas: tuple = field(default=None)
    rx_antennas: tuple = field(default=None)

    def __post_init__(self):
        rows = list(self.channels)
        K = len(rows)
        if K < 1:
            raise ScenarioError("need at least one user")
        if any(len(r) != K for r in rows):
            raise ScenarioError("channels must be a K x K block array")
        d = tuple(int(x) for x in self.streams)
        if len(d) != K or min(d) < 1:
            raise ScenarioError("streams must list a positive count per user")
        first = [[np.asarray(H) for H in r] for r in rows]
        n_r = tuple(int(np.atleast_2d(first[j][0]).shape[0]) for j in range(K))
        n_t = tuple(int(np.atleast_2d(first[0][i]).shape[1]) for i in range(K))
        if self.tx_antennas is not None and tuple(self.tx_antennas) != n_t:
            raise ScenarioError(f"tx_antennas {tuple(self.tx_antennas)} disagree with channels {n_t}")
        if self.rx_antennas is not None and tuple(self.rx_antennas) != n_r:
            raise ScenarioError(f"rx_antennas {tuple(self.rx_antennas)} disagree with channels {n_r}")
        chans = tuple(
            tuple(_frozen(np.atleast_2d(first[j][i]), (n_r[j], n_t[i]), f"channel Tx{i}->Rx{j}")
                  for i in range(K))
            for j in range(K)
        )
        for i in range(K):
            if d[i] > n_t[i]:
                raise ScenarioError(f"user {i}: {d[i]} streams exceed {n_t[i]} transmit antennas")
            if not np.any(chans[i][i]):
                raise ScenarioError(f"direct channel of user {i} is zero")
        if self.precoders is None:
            precs = tuple(np.eye(n_t[i], d[i]) / np.sqrt(d[i]) for i in range(K))
        else:
            precs = tuple(self.precoders)
            if len(precs) != K:
                raise ScenarioError("need one precoder per user")
        shaped = []
        for i, V in enumerate(precs):
            V = np.asarray(V, dtype=complex)
            if V.ndim < 2 and V.size == n_t[i] * d[i]:
                V = V.reshape(n_t[i], d[i])
            shaped.append(_frozen(V, (n_t[i], d[i]), f"precoder {i}"))
        precs = tuple(shaped)
        for i, V in enumerate(precs):
            tr = float(np.real(np.vdot(V, V)))
            if tr > 1.0 + POWER_TOL:
                raise ScenarioError(f"precoder {i} violates the power constraint: trace = {tr:.6g}")
        object.__setattr__(self, "channels", chans)
        object.__setattr__(self, "streams", d)
        object.__setattr__(self, "precoders", precs)
        object.__setattr__(self, "tx_antennas", n_t)
        object.__setattr__(self, "rx_antennas", n_r)
        object.__setattr__(self, "power_db", float(self.power_db))

    @property
    def K(self) -> int:
        return len(self.streams)

    @property
    def M(self) -> int:
        return self.constellation.order

    @property
    def power(self) -> float:
        return db_to_linear(self.power_db)

    @property
    def total_streams(self) -> int:
        return sum(self.streams)

    def channel(self, tx: int, rx: int) -> np.ndarray:
        return self.channels[rx][tx]

    def offsets(self) -> np.ndarray:
        """Column offset of each user's block in the stacked symbol vector."""
        return np.concatenate([[0], np.cumsum(self.streams)])

    def with_precoders(self, precoders) -> "Scenario":
        return replace(self, precoders=tuple(precoders))

    def with_power(self, power_db: float) -> "Scenario":
        return replace(self, power_db=power_db)

    def with_channels(self, channels) -> "Scenario":
        return replace(self, channels=channels, tx_antennas=None, rx_antennas=None)


def scenario_from_blocks(H: np.ndarray, n_t: Sequence[int], n_r: Sequence[int], **kwargs) -> Scenario:
    """Build a scenario from a stacked matrix whose block (j, i) is Tx-i -> Rx-j."""
    H = np.asarray(H, dtype=complex)
    if H.ndim == 1:
        H = H[:, None]
    r_off = np.concatenate([[0], np.cumsum(n_r)])
    t_off = np.concatenate([[0], np.cumsum(n_t)])
    if H.shape != (r_off[-1], t_off[-1]):
        raise ScenarioError(f"stacked channel has shape {H.shape}, expected {(r_off[-1], t_off[-1])}")
    K = len(n_t)
    chans = [[H[r_off[j]:r_off[j + 1], t_off[i]:t_off[i + 1]] for i in range(K)] for j in range(K)]
    return Scenario(channels=chans, **kwargs)


# ---------------------------------------------------------------------------
# Joint symbol enumeration
# ---------------------------------------------------------------------------
class JointSymbolTable:
    """All ``M**sum(d)`` stacked symbol vectors of a set of users.

    Index ``k`` is a mixed-radix number: digit ``s`` (the s-th stream in
    stacking order) is ``(k // M**s) % M``, so user 0's first stream varies
    fastest. Vectors are materialized when the table has at most
    ``MATERIALIZE_LIMIT`` rows and generated in chunks otherwise.
    """

    def __init__(self, constellation: Constellation, streams: Sequence[int], max_digits: int = MAX_DIGITS):
        self.constellation = constellation
        self.streams = tuple(int(d) for d in streams)
        self.M = constellation.order
        n = sum(self.streams)
        if n > max_digits:
            raise CapacityError(f"{n} constellation digits exceed the enumeration cap of {max_digits}")
        self.length = n
        self.total = self.M ** n
        self.user_radix = tuple(self.M ** d for d in self.streams)
        self._vectors = None
        if self.total <= MATERIALIZE_LIMIT:
            self._vectors = self._build(np.arange(self.total))
            self._vectors.flags.writeable = False

    def __len__(self):
        return self.total

    def _build(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        pows = self.M ** np.arange(self.length, dtype=np.int64)
        sym = (ks[:, None] // pows[None, :]) % self.M
        return self.constellation.points[sym]

    @property
    def materialized(self) -> bool:
        return self._vectors is not None

    @property
    def vectors(self) -> np.ndarray:
        """``(total, sum(d))`` array of joint vectors (materialized tables only)."""
        if self._vectors is None:
            raise CapacityError(f"table with {self.total} entries is not materialized; use chunks()")
        return self._vectors

    def chunks(self, size: int = 65536):
        """Yield ``(start, vectors)`` blocks covering the whole table."""
        if self._vectors is not None:
            yield 0, self._vectors
            return
        for start in range(0, self.total, size):
            yield start, self._build(np.arange(start, min(start + size, self.total)))

    def _check(self, k):
        if not 0 <= k < self.total:
            raise IndexError(f"joint index {k} out of range [0, {self.total})")

    def vector(self, k: int) -> np.ndarray:
        self._check(k)
        if self._vectors is not None:
            return self._vectors[k]
        return self._build([k])[0]

    def digits(self, k: int) -> tuple:
        """Per-user symbol indices ``(p_0, ..., p_{K-1})`` of joint index k."""
        self._check(k)
        out = []
        for r in self.user_radix:
            out.append(int(k % r))
            k //= r
        return tuple(out)

    def index(self, digits: Sequence[int]) -> int:
        if len(digits) != len(self.user_radix):
            raise IndexError("need one digit per user")
        k, scale = 0, 1
        for p, r in zip(digits, self.user_radix):
            if not 0 <= p < r:
                raise IndexError(f"user digit {p} out of range [0, {r})")
            k += int(p) * scale
            scale *= r
        return k

    def user_digits(self) -> np.ndarray:
        """``(total, K)`` integer array of per-user indices (materialized only)."""
        ks = np.arange(self.total, dtype=np.int64)[:, None]
        radix = np.array(self.user_radix, dtype=np.int64)
        div = np.concatenate([[1], np.cumprod(radix)[:-1]])
        return (ks // div[None, :]) % radix[None, :]

    def user_vectors(self, user: int) -> np.ndarray:
        """``(M**d_user, d_user)`` array of one user's symbol vectors."""
        sub = JointSymbolTable(self.constellation, [self.streams[user]])
        return sub.vectors

    def excluding(self, user: int) -> "JointSymbolTable":
        """Table of the sub-vectors with ``user`` removed."""
        rest = [d for j, d in enumerate(self.streams) if j != user]
        return JointSymbolTable(self.constellation, rest)

    def reduced_index(self, user: int) -> np.ndarray:
        """For every joint index, the index of its sub-vector without ``user``."""
        dig = self.user_digits()
        keep = [j for j in range(len(self.streams)) if j != user]
        radix = np.array([self.user_radix[j] for j in keep], dtype=np.int64)
        scale = np.concatenate([[1], np.cumprod(radix)[:-1]]) if keep else np.zeros(0, dtype=np.int64)
        return (dig[:, keep] * scale[None, :]).sum(axis=1)

    def subvector(self, k: int, exclude: int) -> np.ndarray:
        v = self.vector(k)
        off = np.concatenate([[0], np.cumsum(self.streams)])
        return np.concatenate([v[:off[exclude]], v[off[exclude + 1]:]])


def enumerate_joint(scenario: Scenario, max_digits: int = MAX_DIGITS) -> JointSymbolTable:
    return JointSymbolTable(scenario.constellation, scenario.streams, max_digits)


# ---------------------------------------------------------------------------
# Effective channels and difference vectors
# ---------------------------------------------------------------------------
def effective_channel(scenario: Scenario, rx: int):
    """Return ``(H_rx V, H_notrx V_notrx)`` for receiver ``rx``.

    Column blocks follow transmitter order; the interference-only matrix
    skips transmitter ``rx``.
    """
    blocks = [scenario.channel(i, rx) @ scenario.precoders[i] for i in range(scenario.K)]
    full = np.hstack(blocks)
    others = [b for i, b in enumerate(blocks) if i != rx]
    if others:
        interference = np.hstack(others)
    else:
        interference = np.zeros((scenario.rx_antennas[rx], 0), dtype=complex)
    return full, interference


def difference_vectors(scenario: Scenario, rx: int, k1: int, k2: int,
                       table: JointSymbolTable | None = None, interference_only: bool = False):
    """``A = H_rx V (x^k1 - x^k2)``, or ``B`` over the interferers' table."""
    full, interf = effective_channel(scenario, rx)
    if table is None:
        table = enumerate_joint(scenario)
        if interference_only:
            table = table.excluding(rx)
    G = interf if interference_only else full
    return G @ (table.vector(k1) - table.vector(k2))


def interference_table(scenario: Scenario, rx: int) -> JointSymbolTable:
    return enumerate_joint(scenario).excluding(rx)


def noise_samples(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian draws, shape ``(n, dim)``."""
    z = rng.standard_normal((n, dim, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
