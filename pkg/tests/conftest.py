"""Shared fixtures: the heavy counterexample sweeps are computed once.

Build times are recorded in ``SWEEP_SECONDS`` so the acceptance tests can
charge them against their runtime budgets.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from holder_hj import value_solver

N_LIST = [4, 8, 16, 32]
GAMMA = 0.75
BIG_G = 1.5

SWEEP_SECONDS: dict[str, float] = {}


@pytest.fixture(scope="session")
def counterexample_sweep_coarse():
    """801x801 solves on [-2, 2] for n in {4, 8, 16, 32} (Lipschitz grid)."""
    start = time.perf_counter()
    out = {}
    for n in N_LIST:
        spec = value_solver.CounterexampleSpec(n=n, gamma=GAMMA, G=BIG_G)
        problem = value_solver.counterexample_problem(spec, (-2.0, 2.0))
        out[n] = value_solver.solve_value_function(problem, 801, 801)
    SWEEP_SECONDS["coarse"] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def counterexample_sweep_refined():
    """1601x801 solves on [-0.5, 1.5] with extracted arcs (value grid)."""
    start = time.perf_counter()
    out = {}
    for n in N_LIST:
        spec = value_solver.CounterexampleSpec(n=n, gamma=GAMMA, G=BIG_G)
        problem = value_solver.counterexample_problem(spec, (-0.5, 1.5))
        u = value_solver.solve_value_function(problem, 1601, 801)
        i0 = int(np.argmin(np.abs(u.x_grid)))
        arc = value_solver.extract_optimal_arc(u, problem, (float(u.x_grid[i0]), 0.0))
        out[n] = (u, problem, arc)
    SWEEP_SECONDS["refined"] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def quadratic_problem():
    return value_solver.VariationalProblem(
        a=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        g=lambda x: (np.asarray(x, dtype=float) - 1.0) ** 2,
        a_floor=1.0,
        a_ceil=1.0,
    )
