"""Backward dynamic-programming solver for quadratic-cost variational problems.

Solves value functions of the form

    u(x, t) = inf { integral_t^1 a(xi(s), s) |xi'(s)|^2 ds + g(xi(1)) :
                    xi(t) = x }

by backward induction on a uniform (x, t) grid.  Each step minimizes the
one-step cost against the piecewise-linear interpolant of the next time
slice; the minimization is solved exactly cell by cell (the objective is
quadratic within a cell), which keeps the scheme first-order accurate even
when the time step exceeds the space step.  Candidate cells are truncated
to the a priori speed budget implied by the value range, which never
excludes a minimizer.

Also houses the singular-arc coefficient family a_n, g_n used by the
non-equi-Lipschitz experiments, optimal-arc extraction by argmin descent,
and an exhaustive coarse-grid oracle for independent spot checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from holder_hj.envelope import NumericsWarning

Coefficient = Callable[[np.ndarray, float], np.ndarray]
Terminal = Callable[[np.ndarray], np.ndarray]

_GAMMA_LO = 2.0 - math.sqrt(2.0)


@dataclass
class VariationalProblem:
    """Running coefficient a(x, t), terminal cost g(x), and the domain.

    ``a`` and ``g`` must be vectorized over x (and broadcast over t for
    ``a``).  The running cost is a(x, t) |xi'|^2; the exponent 2 is fixed.
    ``a_floor``/``a_ceil`` are the coefficient range used for search-window
    sizing and input validation (the family here lives in [1/2, 2]).
    """

    a: Coefficient
    g: Terminal
    t0: float = 0.0
    t1: float = 1.0
    state_window: Tuple[float, float] = (-2.0, 2.0)
    a_floor: float = 0.5
    a_ceil: float = 2.0

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise ValueError("horizon must satisfy t1 > t0")
        if self.state_window[1] <= self.state_window[0]:
            raise ValueError("state_window must be a nonempty interval")


@dataclass
class GridFunction2D:
    """A value function sampled on a uniform (x, t) grid, t-major."""

    x_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.t_grid.size, self.x_grid.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.t_grid.size}, {self.x_grid.size})"
            )

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    def time_index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.t_grid - t)))
        if abs(self.t_grid[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a grid time")
        return k

    def interp(self, x, k: int):
        """Piecewise-linear interpolation of the time-k slice."""
        return np.interp(x, self.x_grid, self.values[k])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("t,x,u\n")
            for k, t in enumerate(self.t_grid):
                row = self.values[k]
                ts = _fmt(t)
                fh.write(
                    "".join(
                        f"{ts},{_fmt(x)},{_fmt(v)}\n"
                        for x, v in zip(self.x_grid, row)
                    )
                )

    @classmethod
    def from_csv(cls, path) -> "GridFunction2D":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        t_grid = np.unique(data[:, 0])
        x_grid = np.unique(data[:, 1])
        values = data[:, 2].reshape(t_grid.size, x_grid.size)
        return cls(x_grid=x_grid, t_grid=t_grid, values=values)


@dataclass
class DiscreteArc:
    """A piecewise-linear arc (t_k, x_k); the discrete W^(1,p) object."""

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        if self.times.shape != self.positions.shape or self.times.ndim != 1:
            raise ValueError("times and positions must be 1-d of equal length")
        if self.times.size < 2:
            raise ValueError("an arc needs at least two nodes")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def speeds(self) -> np.ndarray:
        """Forward difference quotients, one per segment."""
        return np.diff(self.positions) / np.diff(self.times)

    def energy(self, p: float = 2.0) -> float:
        """Discrete W^(1,p) energy sum(dt |speed|^p)."""
        return float(np.sum(np.diff(self.times) * np.abs(self.speeds) ** p))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("t,x\n")
            for t, x in zip(self.times, self.positions):
                fh.write(f"{_fmt(t)},{_fmt(x)}\n")

    @classmethod
    def from_csv(cls, path) -> "DiscreteArc":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        return cls(times=data[:, 0], positions=data[:, 1])


@dataclass
class CounterexampleSpec:
    """Parameters of the singular-arc family: xi0(t) = t^gamma, offset G."""

    n: int
    gamma: float
    G: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not (_GAMMA_LO < self.gamma < 1.0):
            raise ValueError(
                f"gamma={self.gamma} outside the admissible interval "
                f"({_GAMMA_LO:.6f}, 1)"
            )
        floor = self.gamma**2 / (2.0 * self.gamma - 1.0)
        if self.G <= floor:
            raise ValueError(f"G={self.G} must exceed gamma^2/(2 gamma - 1) = {floor:.6f}")


def _fmt(v: float) -> str:
    v = float(v)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return f"{v:.12g}"


def _window_cells(u_next: np.ndarray, dt: float, dx: float, a_floor: float, n: int) -> int:
    """Cells per side such that excluded candidates are provably suboptimal.

    A candidate at distance d has one-step cost >= a_floor d^2/dt; if that
    exceeds the range of u_next it cannot beat staying in place.  Factor 2
    guards roundoff.
    """
    rng = float(u_next.max() - u_next.min())
    radius = 2.0 * math.sqrt(max(rng, 0.0) * dt / a_floor)
    return min(n - 1, max(2, int(math.ceil(radius / dx)) + 1))


def _one_step_min(
    u_next: np.ndarray,
    x_grid: np.ndarray,
    x0: np.ndarray,
    a_vals: np.ndarray,
    dt: float,
    k_cells: int,
):
    """Exact minimization of a(x0) (y-x0)^2/dt + interp(u_next)(y).

    The interpolant is linear within each grid cell, so the objective is a
    parabola per cell; its constrained minimum is the clipped vertex.  Ties
    across cells are broken by smallest |y - x0|, then smallest y.

    Returns (values, minimizers, grid_edge_hits, window_edge_hits).
    """
    n = x_grid.size
    dx = x_grid[1] - x_grid[0]
    m = x0.size
    slopes = (u_next[1:] - u_next[:-1]) / dx
    base = np.clip(np.floor((x0 - x_grid[0]) / dx).astype(int), 0, n - 2)

    offs = np.arange(-k_cells, k_cells + 1)
    cells = base[None, :] + offs[:, None]
    valid = (cells >= 0) & (cells <= n - 2)
    cc = np.clip(cells, 0, n - 2)

    s = slopes[cc]
    lo = x_grid[0] + cc * dx
    ystar = np.clip(x0[None, :] - s * dt / (2.0 * a_vals[None, :]), lo, lo + dx)
    vals = a_vals[None, :] * (ystar - x0[None, :]) ** 2 / dt + u_next[cc] + s * (ystar - lo)
    vals = np.where(valid, vals, np.inf)

    vmin = vals.min(axis=0)
    tie = vals == vmin[None, :]
    dist = np.where(tie, np.abs(ystar - x0[None, :]), np.inf)
    dmin = dist.min(axis=0)
    tie &= dist == dmin[None, :]
    ymin = np.where(tie, ystar, np.inf).min(axis=0)

    grid_edge = int(np.sum((ymin <= x_grid[0]) | (ymin >= x_grid[-1])))
    # chosen minimizer on the outer face of the truncated window
    outer = tie & (np.abs(offs)[:, None] == k_cells) & ((ystar == lo) | (ystar == lo + dx))
    window_edge = int(np.sum(np.any(outer & valid, axis=0) & (ymin > x_grid[0]) & (ymin < x_grid[-1])))
    return vmin, ymin, grid_edge, window_edge


def solve_value_function(
    problem: VariationalProblem,
    x_nodes: int,
    t_nodes: int,
) -> GridFunction2D:
    """Backward induction for the value function on an x_nodes x t_nodes grid.

    u(., t1) = g; for k descending,
    u(x, t_k) = min_y { dt a(x, t_k) ((y-x)/dt)^2 + u(y, t_(k+1)) } with
    u(., t_(k+1)) read through its piecewise-linear interpolant.  Output is
    bounded by max g.  Warns when minimizers touch the state window.
    """
    if x_nodes < 3 or t_nodes < 3:
        raise ValueError("need at least 3 nodes per axis")
    x = np.linspace(problem.state_window[0], problem.state_window[1], x_nodes)
    t = np.linspace(problem.t0, problem.t1, t_nodes)
    dt = t[1] - t[0]
    dx = x[1] - x[0]

    values = np.empty((t_nodes, x_nodes))
    values[-1] = np.asarray(problem.g(x), dtype=float)
    _check_coefficient_range(problem, x, t)

    edge_hits = 0
    for k in range(t_nodes - 2, -1, -1):
        u_next = values[k + 1]
        a_vals = np.broadcast_to(
            np.asarray(problem.a(x, t[k]), dtype=float), x.shape
        ).astype(float)
        kc = _window_cells(u_next, dt, dx, problem.a_floor, x_nodes)
        vmin, _, ge, we = _one_step_min(u_next, x, x, a_vals, dt, kc)
        if we:
            warnings.warn(
                f"step {k}: {we} minimizers on the truncated window boundary",
                NumericsWarning,
                stacklevel=2,
            )
        edge_hits += ge
        values[k] = vmin

    if edge_hits:
        warnings.warn(
            f"{edge_hits} minimizers hit the state window boundary; "
            "the window may be too small",
            NumericsWarning,
            stacklevel=2,
        )
    return GridFunction2D(x_grid=x, t_grid=t, values=values)


def _check_coefficient_range(problem: VariationalProblem, x: np.ndarray, t: np.ndarray) -> None:
    probe_x = x[:: max(1, x.size // 16)]
    for tk in t[:: max(1, t.size // 8)]:
        av = np.asarray(problem.a(probe_x, float(tk)), dtype=float)
        if np.any(av < problem.a_floor - 1e-12) or np.any(av > problem.a_ceil + 1e-12):
            raise ValueError(
                f"coefficient leaves [{problem.a_floor}, {problem.a_ceil}] at t={tk}"
            )


def one_step_value(
    u: GridFunction2D,
    problem: VariationalProblem,
    x0: float,
    k: int,
    full_window: bool = False,
) -> Tuple[float, float]:
    """Value and minimizer of the one-step principle from (x0, t_k).

    This is the recursion applied from an arbitrary departure point (on or
    off the grid); with ``full_window`` the truncation is disabled, which is
    what independent re-verification passes use.
    """
    if not 0 <= k < u.t_grid.size - 1:
        raise ValueError("k must index a non-terminal time slice")
    x0a = np.atleast_1d(np.asarray(x0, dtype=float))
    a0 = np.broadcast_to(
        np.asarray(problem.a(x0a, float(u.t_grid[k])), dtype=float), x0a.shape
    ).astype(float)
    u_next = u.values[k + 1]
    kc = (
        u.x_grid.size - 1
        if full_window
        else _window_cells(u_next, u.dt, u.dx, problem.a_floor, u.x_grid.size)
    )
    vmin, ymin, _, _ = _one_step_min(u_next, u.x_grid, x0a, a0, u.dt, kc)
    return float(vmin[0]), float(ymin[0])


def verify_dp_consistency(
    u: GridFunction2D,
    problem: VariationalProblem,
    x_stride: int = 7,
    t_stride: int = 13,
) -> float:
    """Max |u(x,t_k) - min_y {...}| over a sample of interior nodes.

    The re-minimization runs without the search window, so this also
    certifies that the window truncation never dropped a minimizer.
    """
    worst = 0.0
    nt, nx = u.values.shape
    for k in range(0, nt - 1, t_stride):
        a_vals = np.broadcast_to(
            np.asarray(problem.a(u.x_grid, float(u.t_grid[k])), dtype=float),
            u.x_grid.shape,
        ).astype(float)
        sl = slice(0, nx, x_stride)
        vmin, _, _, _ = _one_step_min(
            u.values[k + 1], u.x_grid, u.x_grid[sl], a_vals[sl], u.dt, nx - 1
        )
        worst = max(worst, float(np.abs(vmin - u.values[k][sl]).max()))
    return worst


def extract_optimal_arc(
    u: GridFunction2D,
    problem: VariationalProblem,
    start: Tuple[float, float],
) -> DiscreteArc:
    """Follow the dynamic-programming argmin from ``start`` to the horizon.

    Along the returned arc the one-step optimality principle holds exactly:
    the value from xi(t_k) equals the step cost plus the interpolated value
    at xi(t_(k+1)), because xi(t_(k+1)) is that step's minimizer.
    """
    x0, t_start = start
    k0 = u.time_index(t_start)
    if k0 == u.t_grid.size - 1:
        raise ValueError("cannot extract an arc from the terminal slice")
    pos = [float(x0)]
    edge = 0
    for k in range(k0, u.t_grid.size - 1):
        _, y = one_step_value(u, problem, pos[-1], k)
        if y <= u.x_grid[0] or y >= u.x_grid[-1]:
            edge += 1
        pos.append(y)
    if edge:
        warnings.warn(
            f"extracted arc hit the state window boundary {edge} times",
            NumericsWarning,
            stacklevel=2,
        )
    return DiscreteArc(times=u.t_grid[k0:].copy(), positions=np.array(pos))


def evaluate_functional(problem: VariationalProblem, arc: DiscreteArc) -> float:
    """Discrete J[arc] = sum(dt_k a(x_k, t_k) speed_k^2) + g(x(t1)).

    The coefficient is evaluated at the departure node of each segment.
    The arc must span the full horizon [t0, t1].
    """
    tol = 1e-9 * max(1.0, abs(problem.t1 - problem.t0))
    if abs(arc.times[0] - problem.t0) > tol or abs(arc.times[-1] - problem.t1) > tol:
        raise ValueError(
            f"arc [{arc.times[0]}, {arc.times[-1]}] does not span the "
            f"horizon [{problem.t0}, {problem.t1}]"
        )
    dts = np.diff(arc.times)
    speeds = np.diff(arc.positions) / dts
    a_vals = np.asarray(problem.a(arc.positions[:-1], arc.times[:-1]), dtype=float)
    running = float(np.sum(dts * a_vals * speeds**2))
    terminal = float(np.asarray(problem.g(np.atleast_1d(arc.positions[-1])), dtype=float)[0])
    return running + terminal


def counterexample_coefficients(spec: CounterexampleSpec):
    """The Lipschitz coefficient family (a_n, g_n).

    a_n(x, t) = min(2, n |x - t^gamma| + 1 - 2^-n), valley floor at the
    graph of t^gamma; g_n(x) = min(G, n |x - 1|).  Both nondecreasing in n.
    """
    n, gamma, G = spec.n, spec.gamma, spec.G
    floor = 1.0 - 0.5**n

    def a_n(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.minimum(2.0, n * np.abs(x - t**gamma) + floor)

    def g_n(x):
        x = np.asarray(x, dtype=float)
        return np.minimum(G, n * np.abs(x - 1.0))

    return a_n, g_n


def limit_coefficients(spec: CounterexampleSpec, graph_tol: float = 1e-12):
    """The n -> infinity coefficients: a = 1 on the graph of t^gamma, else 2.

    The cheap set has measure zero, so these are only meant for
    ``evaluate_functional`` along explicit arcs, never for the grid solver.
    """
    gamma, G = spec.gamma, spec.G

    def a_limit(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(x - t**gamma) <= graph_tol, 1.0, 2.0)

    def g_limit(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x - 1.0) <= graph_tol, 0.0, G)

    return a_limit, g_limit


def counterexample_problem(
    spec: CounterexampleSpec,
    state_window: Tuple[float, float] = (-2.0, 2.0),
) -> VariationalProblem:
    """Variational problem for (a_n, g_n) on [0, 1] x state_window."""
    a_n, g_n = counterexample_coefficients(spec)
    return VariationalProblem(a=a_n, g=g_n, t0=0.0, t1=1.0, state_window=state_window)


def xi0_arc(
    gamma: float,
    nodes: int = 10_000,
    grading: float = 2.0,
) -> DiscreteArc:
    """The arc xi0(t) = t^gamma on [0, 1], sampled on a graded time grid.

    Grading concentrates nodes near t = 0 where xi0' blows up; grading 2
    keeps the discrete energy within ~1e-5 of gamma^2/(2 gamma - 1) at
    10^4 nodes (a uniform grid misses by ~1e-3).
    """
    s = np.linspace(0.0, 1.0, nodes) ** grading
    return DiscreteArc(times=s, positions=s**gamma)


def brute_force_oracle(
    problem: VariationalProblem,
    nodes: int = 6,
    positions_per_node: int = 21,
    start: float = 0.0,
    positions_window: Tuple[float, float] | None = None,
) -> Tuple[float, DiscreteArc]:
    """Exhaustive minimization over coarse piecewise-linear arcs.

    Enumerates every arc through ``positions_per_node`` grid positions at
    ``nodes`` uniform times (the first node pinned at ``start``) and returns
    the exact discrete minimum.  Independent of the dynamic-programming
    path; instance sizes are capped to keep the enumeration tractable.
    ``positions_window`` defaults to the problem's state window; pass a
    tighter interval to sharpen the position quantization.
    """
    if nodes > 6:
        raise ValueError("nodes capped at 6 (combinatorial blowup)")
    if positions_per_node > 21:
        raise ValueError("positions_per_node capped at 21")
    if nodes < 2:
        raise ValueError("need at least 2 time nodes")
    times = np.linspace(problem.t0, problem.t1, nodes)
    dt = times[1] - times[0]
    window = positions_window if positions_window is not None else problem.state_window
    pos = np.linspace(window[0], window[1], positions_per_node)

    m = nodes - 1
    shapes = [
        (1,) * k + (positions_per_node,) + (1,) * (m - 1 - k) for k in range(m)
    ]
    axes = [pos.reshape(shape) for shape in shapes]

    total = np.zeros((1,) * m)
    prev = np.array(start).reshape((1,) * m)
    for k in range(m):
        cur = axes[k]
        a_vals = np.asarray(problem.a(prev, float(times[k])), dtype=float)
        total = total + dt * a_vals * ((cur - prev) / dt) ** 2
        prev = cur
    total = total + np.asarray(problem.g(axes[-1]), dtype=float)

    flat = int(np.argmin(total))  # first minimum = lexicographic tie-break
    idx = np.unravel_index(flat, total.shape)
    positions = np.concatenate([[start], pos[list(idx)]])
    return float(total.flat[flat]), DiscreteArc(times=times, positions=positions)
