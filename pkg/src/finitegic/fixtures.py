"""
Reference channel instances with QPSK inputs.

``example_1``
    3-user SISO channel with rotation precoders ``(1, e^{i pi/3}, 1)``.
``example_1a``
    3-user 2x2 channel whose precoders leave user 0 with a zero
    received difference (own difference ``sqrt2 + sqrt2 i`` cancelled by
    user 1's difference ``sqrt2``). The published numbers are rounded and
    carry a sign slip in ``H_00[0, 0]``; :func:`example_1a` restores the
    sign and re-solves user 1's precoder so the cancellation is exact.
``example_2``
    3-user 2x2 channel used for the sum-rate optimization runs.

In the stacked matrices block row ``j`` / block column ``i`` is the channel
from Tx-i to Rx-j.
"""
from __future__ import annotations

import numpy as np

from .model import Scenario, make_constellation, scenario_from_blocks

EXAMPLE_1_H = np.array([
    [-0.9 + 0.4j, -1.7 - 1.40j, 1.5 + 5.0j],
    [2.6 - 0.9j, -0.9 - 2.8j, 0.04 + 0.88j],
    [-2.9 - 5.2j, -10.2 + 0.7j, -0.5 + 2.4j],
])
EXAMPLE_1_V = (1.0, np.exp(1j * np.pi / 3), 1.0)

EXAMPLE_1A_H_PRINTED = np.array([
    [0.5756 - 0.0565j, 0.7524 - 0.1375j, 0.1697 - 0.1069j, 0.0124 - 0.2002j, 0, 0],
    [0.1610 + 0.3766j, -0.0010 + 0.2005j, 0.8758 - 0.0689j, -0.1285 + 0.0605j, 0, 0],
    [-1.1533 - 0.1280j, -0.6361 + 1.4658j, -1.3069 + 0.1090j, 0.0427 + 0.2488j, -0.0028 + 0.2215j, -1.0597 - 0.2708j],
    [-1.7763 - 0.3748j, 0.5341 + 0.0966j, -0.9491 + 0.8074j, -1.0773 - 1.7202j, 0.9616 - 1.2130j, -0.6077 + 0.6970j],
    [-1.7082 - 0.4948j, -0.6101 - 0.4739j, -0.2226 - 4.2486j, -0.8216 + 0.4808j, 0.9572 + 1.8870j, -1.4428 - 1.4353j],
    [-1.3014 - 0.5614j, 1.2515 + 0.3414j, 0.4242 + 0.0202j, 0.0138 - 0.8740j, 0.3393 - 1.3451j, 0.9498 - 1.0932j],
])
EXAMPLE_1A_V_PRINTED = (
    np.array([[0.66 + 0.74j], [0.13 + 0.99j]]),
    np.array([[0.9883 + 0.1524j], [0.4538 + 0.8911j]]),
    np.array([[0.7044 + 0.7098j], [0.1603 + 0.9871j]]),
)
#: symbol differences (user 0, user 1, user 2) that collapse at Rx-0
EXAMPLE_1A_WITNESS = (np.sqrt(2) + np.sqrt(2) * 1j, np.sqrt(2) + 0j, 0j)

EXAMPLE_2_H = np.array([
    [1.1408 - 0.8637j, 0.1954 - 1.5172j, -0.7038 + 0.3064j, 0.3323 - 0.4278j, 1.3425 - 0.5842j, 0.0766 - 0.7555j],
    [0.9331 + 0.3749j, 1.1588 + 0.1093j, 1.1412 + 0.0561j, 0.2708 + 0.5320j, -1.1639 + 0.3706j, 0.4311 + 1.4726j],
    [-0.5206 + 2.7224j, 0.0330 + 1.0577j, -0.1581 - 0.7055j, -1.4823 + 0.7144j, 0.4286 + 0.5008j, -1.0052 + 0.0051j],
    [-0.5897 + 0.8322j, -0.9552 + 1.1568j, -0.9685 - 0.7241j, 1.1944 - 0.0556j, -1.3293 - 0.2445j, 0.3540 - 0.7644j],
    [1.3814 - 0.4690j, -0.2731 - 0.6355j, -0.8927 + 0.0044j, -0.1312 + 0.3106j, -1.9229 - 0.2353j, -0.7885 - 0.3229j],
    [-0.3043 - 0.2351j, 1.1578 + 0.3676j, 0.9095 - 0.4187j, 0.4161 + 1.2482j, 1.2900 - 0.0196j, 0.4838 + 1.4578j],
])


def qpsk():
    return make_constellation("psk", 4)


def example_1(power_db: float = 20.0) -> Scenario:
    return scenario_from_blocks(EXAMPLE_1_H, (1, 1, 1), (1, 1, 1), constellation=qpsk(),
                                streams=(1, 1, 1), power_db=power_db, precoders=EXAMPLE_1_V)


def example_1a(power_db: float = 20.0) -> Scenario:
    """Example 1a with exact cancellation at Rx-0.

    All precoders are then scaled by one common factor so the largest has
    unit trace; a common factor keeps the cancellation intact.
    """
    H = EXAMPLE_1A_H_PRINTED.copy()
    H[0, 0] = -H[0, 0].real + 1j * H[0, 0].imag
    H00, H10 = H[0:2, 0:2], H[0:2, 2:4]
    V0, _, V2 = EXAMPLE_1A_V_PRINTED
    d0, d1, _ = EXAMPLE_1A_WITNESS
    V1 = -np.linalg.solve(H10, H00 @ V0 * d0) / d1
    Vs = [V0, V1, V2]
    scale = 1.0 / max(np.linalg.norm(V) for V in Vs)
    return scenario_from_blocks(H, (2, 2, 2), (2, 2, 2), constellation=qpsk(), streams=(1, 1, 1),
                                power_db=power_db, precoders=[V * scale for V in Vs])


def example_2(power_db: float = 0.0, precoders=None) -> Scenario:
    return scenario_from_blocks(EXAMPLE_2_H, (2, 2, 2), (2, 2, 2), constellation=qpsk(),
                                streams=(1, 1, 1), power_db=power_db, precoders=precoders)


def random_channels(rng: np.random.Generator, K: int = 3, n_t=2, n_r=2):
    """i.i.d. CN(0, 1) channel blocks, ``out[j][i]`` from Tx-i to Rx-j."""
    n_t = [n_t] * K if np.isscalar(n_t) else list(n_t)
    n_r = [n_r] * K if np.isscalar(n_r) else list(n_r)
    return [[(rng.standard_normal((n_r[j], n_t[i])) + 1j * rng.standard_normal((n_r[j], n_t[i])))
             / np.sqrt(2.0) for i in range(K)] for j in range(K)]
