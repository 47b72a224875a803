"""
Scenario JSON files.

Complex numbers are ``[re, im]`` pairs and matrices are row-major lists of
rows. ``channels[j][i]`` is the matrix from Tx-(i+1) to Rx-(j+1)::

    {
      "users": 3,
      "constellation": {"kind": "psk", "order": 4},
      "tx_antennas": [2, 2, 2], "rx_antennas": [2, 2, 2], "streams": [1, 1, 1],
      "power_db": 10.0,
      "channels": [[H_11, H_21, H_31], [H_12, H_22, H_32], [H_13, H_23, H_33]],
      "precoders": [V_1, V_2, V_3]
    }
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import Constellation, Scenario, ScenarioError, make_constellation


class ScenarioFileError(ScenarioError):
    """A scenario file could not be parsed; the message names the offending key."""


def _complex(z, where):
    if isinstance(z, (int, float)) and not isinstance(z, bool):
        return complex(z)
    if isinstance(z, (list, tuple)) and len(z) == 2 and all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in z):
        return complex(z[0], z[1])
    raise ScenarioFileError(f"{where}: expected [re, im], got {z!r}")


def _matrix(m, where):
    if not isinstance(m, list) or not m or not all(isinstance(r, list) for r in m):
        raise ScenarioFileError(f"{where}: expected a non-empty list of rows")
    width = len(m[0])
    if any(len(r) != width for r in m):
        raise ScenarioFileError(f"{where}: ragged rows")
    return np.array([[_complex(z, f"{where}[{a}][{b}]") for b, z in enumerate(r)]
                     for a, r in enumerate(m)], dtype=complex)


def _int_list(data, key, K):
    v = data.get(key)
    if not isinstance(v, list) or len(v) != K or not all(isinstance(x, int) and x > 0 for x in v):
        raise ScenarioFileError(f"{key}: expected {K} positive integers, got {v!r}")
    return v


def _require(data, key, prefix=""):
    if key not in data:
        raise ScenarioFileError(f"{prefix}{key}: missing required key")
    return data[key]


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioFileError("top level: expected a JSON object")
    K = _require(data, "users")
    if not isinstance(K, int) or K < 1:
        raise ScenarioFileError(f"users: expected a positive integer, got {K!r}")
    c = _require(data, "constellation")
    if not isinstance(c, dict):
        raise ScenarioFileError("constellation: expected an object")
    try:
        if c.get("points") is not None:
            pts = [_complex(z, f"constellation.points[{n}]") for n, z in enumerate(c["points"])]
            const = Constellation(np.array(pts), c.get("kind", "custom"))
            if "order" in c and c["order"] != const.order:
                raise ScenarioFileError(f"constellation.order: {c['order']} but {const.order} points given")
        else:
            const = make_constellation(_require(c, "kind", "constellation."), _require(c, "order", "constellation."))
    except ScenarioFileError:
        raise
    except (ScenarioError, TypeError) as e:
        raise ScenarioFileError(f"constellation: {e}") from None
    n_t = _int_list(data, "tx_antennas", K)
    n_r = _int_list(data, "rx_antennas", K)
    d = _int_list(data, "streams", K)
    power_db = _require(data, "power_db")
    if not isinstance(power_db, (int, float)) or isinstance(power_db, bool):
        raise ScenarioFileError(f"power_db: expected a number, got {power_db!r}")
    ch = _require(data, "channels")
    if not isinstance(ch, list) or len(ch) != K or any(not isinstance(r, list) or len(r) != K for r in ch):
        raise ScenarioFileError(f"channels: expected a {K}x{K} array of matrices")
    chans = [[_matrix(ch[j][i], f"channels[{j}][{i}]") for i in range(K)] for j in range(K)]
    for j in range(K):
        for i in range(K):
            if chans[j][i].shape != (n_r[j], n_t[i]):
                raise ScenarioFileError(f"channels[{j}][{i}]: shape {chans[j][i].shape}, "
                                        f"expected {(n_r[j], n_t[i])}")
    precs = None
    if data.get("precoders") is not None:
        p = data["precoders"]
        if not isinstance(p, list) or len(p) != K:
            raise ScenarioFileError(f"precoders: expected {K} matrices")
        precs = [_matrix(p[i], f"precoders[{i}]") for i in range(K)]
    try:
        return Scenario(constellation=const, channels=chans, streams=d, power_db=float(power_db),
                        precoders=precs, tx_antennas=n_t, rx_antennas=n_r)
    except ScenarioFileError:
        raise
    except ScenarioError as e:
        raise ScenarioFileError(str(e)) from None


def _encode(M) -> list:
    M = np.atleast_2d(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def scenario_to_dict(scenario: Scenario, include_precoders: bool = True) -> dict:
    c = scenario.constellation
    out = {
        "users": scenario.K,
        "constellation": {"kind": c.kind, "order": c.order,
                          "points": [[float(z.real), float(z.imag)] for z in c.points]},
        "tx_antennas": list(scenario.tx_antennas),
        "rx_antennas": list(scenario.rx_antennas),
        "streams": list(scenario.streams),
        "power_db": scenario.power_db,
        "channels": [[_encode(H) for H in row] for row in scenario.channels],
    }
    if include_precoders:
        out["precoders"] = [_encode(V) for V in scenario.precoders]
    return out


def loads_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFileError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return scenario_from_dict(data)


def load_scenario(path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def dumps_scenario(scenario: Scenario, include_precoders: bool = True) -> str:
    return json.dumps(scenario_to_dict(scenario, include_precoders), indent=1)


def save_scenario(scenario: Scenario, path, include_precoders: bool = True) -> None:
    Path(path).write_text(dumps_scenario(scenario, include_precoders) + "\n")
