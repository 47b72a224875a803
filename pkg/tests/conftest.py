import numpy as np
import pytest

from finitegic.fixtures import example_1, example_1a, example_2, random_channels
from finitegic.model import Scenario, make_constellation


@pytest.fixture
def ex1():
    return example_1()


@pytest.fixture
def ex1a():
    return example_1a()


@pytest.fixture
def ex2():
    return example_2()


def siso_scenario(H, v=None, kind="psk", order=2, power_db=0.0):
    K = len(H)
    chans = [[np.array([[H[j][i]]], dtype=complex) for i in range(K)] for j in range(K)]
    precs = None if v is None else [np.array([[x]], dtype=complex) for x in v]
    return Scenario(constellation=make_constellation(kind, order), channels=chans, streams=[1] * K,
                    power_db=power_db, precoders=precs)


def random_mimo(seed, K=3, n=2, d=1, power_db=0.0):
    rng = np.random.default_rng(seed)
    return Scenario(constellation=make_constellation("psk", 4), channels=random_channels(rng, K, n, n),
                    streams=[d] * K, power_db=power_db)


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
