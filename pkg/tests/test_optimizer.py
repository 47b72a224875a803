import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_mimo, siso_scenario
from finitegic.infotheory import sum_rate_mc
from finitegic.optimizer import OptimizeParams, optimize_sum_rate, project_power

H2 = [[1.0, 0.6 + 0.3j], [0.8 - 0.2j, 0.9j]]


@pytest.mark.parametrize("kw", [dict(alpha=0.005), dict(alpha=0.4), dict(beta=0.05), dict(beta=0.9),
                                dict(epsilon=0), dict(max_iterations=0), dict(samples=0)])
def test_param_validation(kw):
    with pytest.raises(ValueError):
        OptimizeParams(**kw)


@settings(max_examples=50, deadline=None)
@given(re=st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       im=st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_projection_feasible_and_idempotent(re, im):
    V = (np.array(re) + 1j * np.array(im)).reshape(2, 2)
    W = project_power(V)
    assert np.vdot(W, W).real <= 1 + 1e-12
    np.testing.assert_allclose(project_power(W), W)
    if np.vdot(V, V).real <= 1:
        np.testing.assert_array_equal(W, V)
    else:
        # direction kept: projection onto the Frobenius ball
        np.testing.assert_allclose(W * np.linalg.norm(V), V, atol=1e-12)


@pytest.fixture(scope="module")
def small_run():
    s = siso_scenario(H2, v=[0.3, 0.3j], order=4, power_db=3)
    p = OptimizeParams(samples=200, seed=5, max_iterations=6)
    return s, p, optimize_sum_rate(s, p)


def test_trace_invariants(small_run):
    s, p, tr = small_run
    assert tr.termination in ("max_iterations", "epsilon_stop", "line_search_floor")
    assert 1 <= tr.outer_iterations <= p.max_iterations
    assert len(tr.iterations) <= p.max_iterations
    assert tr.initial_f == pytest.approx(sum_rate_mc(s, p.samples, p.seed))
    assert tr.final_f == pytest.approx(sum_rate_mc(s.with_precoders(tr.final_precoders), p.samples, p.seed))
    assert tr.improvement > 0
    fs = [r.f_value_bits for r in tr.iterations] + [tr.final_f]
    assert all(b >= a for a, b in zip(fs, fs[1:]))
    for r in tr.iterations:
        # accepted step satisfies the sufficient-increase test with the shrunk step
        assert r.f_next_bits >= r.f_value_bits + p.alpha * p.beta * r.step_t * r.grad_norm2 - 1e-12
        assert r.step_t == pytest.approx(p.beta ** r.line_search_backtracks)
    for v in tr.final_precoders:
        assert np.vdot(v, v).real <= 1 + 1e-9


def test_trace_serialization(small_run):
    _, _, tr = small_run
    d = json.loads(tr.to_json())
    assert d["termination"] == tr.termination and len(d["iterations"]) == len(tr.iterations)
    rows = tr.to_csv().splitlines()
    assert rows[0] == "n,f,t" and len(rows) == len(tr.iterations) + 1


def test_deterministic(small_run):
    s, p, tr = small_run
    again = optimize_sum_rate(s, p)
    assert again.to_json() == tr.to_json()


def test_single_iteration():
    s = random_mimo(3, power_db=0)
    tr = optimize_sum_rate(s, OptimizeParams(samples=50, max_iterations=1))
    assert tr.outer_iterations == 1 and len(tr.iterations) == 1
    assert tr.termination == "max_iterations"


def test_epsilon_stop_with_large_epsilon():
    s = siso_scenario(H2, v=[0.3, 0.3j], order=4, power_db=3)
    tr = optimize_sum_rate(s, OptimizeParams(samples=100, epsilon=100.0))
    assert tr.termination == "epsilon_stop" and tr.outer_iterations == 2
    assert len(tr.iterations) == 1
