"""
Gradient ascent on the treat-interference-as-noise sum-rate.

Each outer iteration computes the sum-rate and the MMSE-based gradient at
the current precoders, stops if the last improvement fell below
``epsilon``, and otherwise backtracks from ``t = 1``: trial
``V + t*grad`` is projected onto ``trace(V_i V_i^H) <= 1``, ``t`` is
multiplied by ``beta`` and the trial is accepted once
``f(trial) >= f(V) + alpha * t * ||grad||_F^2``.

The objective uses the same noise draws (the run's seed) for every
evaluation, so it is a deterministic smooth function of the precoders and
accepted values never decrease.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from .infotheory import sum_rate_mc
from .mmse import sum_rate_and_gradient
from .model import Scenario

log = logging.getLogger(__name__)

T_FLOOR = 1e-12


@dataclass
class OptimizeParams:
    alpha: float = 0.05
    beta: float = 0.4
    epsilon: float = 0.01
    max_iterations: int = 15
    samples: int = 2000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.01 <= self.alpha <= 0.3:
            raise ValueError(f"alpha must lie in [0.01, 0.3], got {self.alpha}")
        if not 0.1 <= self.beta <= 0.8:
            raise ValueError(f"beta must lie in [0.1, 0.8], got {self.beta}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass
class IterationRecord:
    n: int
    f_value_bits: float  # objective at the start of the iteration
    f_next_bits: float  # objective after the accepted step
    step_t: float
    line_search_backtracks: int
    grad_norm2: float
    precoders: list  # snapshot at the start of the iteration

    def to_dict(self) -> dict:
        d = asdict(self)
        d["precoders"] = [encode_matrix(V) for V in self.precoders]
        return d


@dataclass
class OptimizeTrace:
    iterations: list = field(default_factory=list)
    termination: str = "max_iterations"
    initial_f: float = float("nan")
    final_f: float = float("nan")
    final_precoders: list = field(default_factory=list)
    outer_iterations: int = 0

    @property
    def improvement(self) -> float:
        return self.final_f - self.initial_f

    def to_dict(self) -> dict:
        return {"termination": self.termination, "initial_f": self.initial_f, "final_f": self.final_f,
                "improvement": self.improvement, "outer_iterations": self.outer_iterations,
                "final_precoders": [encode_matrix(V) for V in self.final_precoders],
                "iterations": [r.to_dict() for r in self.iterations]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "f", "t"])
        for r in self.iterations:
            w.writerow([r.n, f"{r.f_value_bits:.6g}", f"{r.step_t:.6g}"])
        return buf.getvalue()


def encode_matrix(V) -> list:
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in V]


def project_power(V: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``trace(V V^H) <= 1``."""
    V = np.asarray(V, dtype=complex)
    tr = float(np.real(np.vdot(V, V)))
    if tr <= 1.0:
        return V.copy()
    return V / np.sqrt(tr)


def optimize_sum_rate(scenario: Scenario, params: OptimizeParams | None = None) -> OptimizeTrace:
    params = params or OptimizeParams()
    V = [np.array(v) for v in scenario.precoders]
    trace = OptimizeTrace()
    f_prev = None
    f_cur = None
    for n in range(1, params.max_iterations + 1):
        trace.outer_iterations = n
        current = scenario.with_precoders(V)
        f_cur, grad, _ = sum_rate_and_gradient(current, params.samples, params.seed, params.workers)
        if n == 1:
            trace.initial_f = f_cur
        if f_prev is not None and f_cur - f_prev < params.epsilon:
            trace.termination = "epsilon_stop"
            break
        g2 = float(sum(np.real(np.vdot(g, g)) for g in grad))
        t = 1.0
        backtracks = 0
        accepted = None
        while True:
            trial = [project_power(v + t * g) for v, g in zip(V, grad)]
            f_new = sum_rate_mc(scenario.with_precoders(trial), params.samples, params.seed, params.workers)
            used = t
            t *= params.beta
            if f_new >= f_cur + params.alpha * t * g2:
                accepted = trial
                break
            backtracks += 1
            if t < T_FLOOR:
                break
        log.info("iteration %d: f=%.6f step=%.3g backtracks=%d", n, f_cur, used, backtracks)
        if accepted is None:
            trace.termination = "line_search_floor"
            break
        trace.iterations.append(IterationRecord(n, f_cur, f_new, used, backtracks, g2,
                                                [v.copy() for v in V]))
        f_prev = f_cur
        V = accepted
        f_cur = f_new
    trace.final_f = f_cur
    trace.final_precoders = V
    return trace
