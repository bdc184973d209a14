"""Power-law envelope Hamiltonians and their convex conjugates.

A Hamiltonian pinched between (1/delta)|z|^q - eta_minus and
delta|z|^q + eta_plus has conjugate envelopes

    H_plus^*(w)  = C_plus  |w|^p - eta_plus,
    H_minus^*(w) = C_minus |w|^p + eta_minus,

with p = q/(q-1), C_plus = delta^(-p/q) / (p q^(p/q)) and
C_minus = delta^(p/q) / (p q^(p/q)).  This module derives those constants,
provides a brute-force grid oracle for convex conjugates, a single
backward Hopf-Lax step over a uniform grid, and the one-sided upper bound
for sub-solutions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np


class NumericsWarning(UserWarning):
    """Soft flag raised by grid searches (boundary hits, poor resolution)."""


@dataclass(frozen=True)
class GrowthEnvelope:
    """Growth-condition parameters and the derived conjugate constants.

    Invariants: q > 1, 1/p + 1/q = 1, delta >= 1, eta_plus/eta_minus >= 0,
    c_minus >= c_plus, c_one = delta^(2p/q) > 1 for delta > 1.
    """

    q: float
    p: float
    delta: float
    eta_plus: float
    eta_minus: float
    bound_M: float
    c_plus: float
    c_minus: float
    c_zero: float
    c_one: float

    @property
    def eta(self) -> float:
        return self.eta_plus + self.eta_minus

    def hamiltonian_plus(self, z):
        """Upper envelope delta*|z|^q + eta_plus; z scalar or (..., d) array."""
        return self.delta * _norm(z) ** self.q + self.eta_plus

    def hamiltonian_minus(self, z):
        """Lower envelope (1/delta)*|z|^q - eta_minus."""
        return _norm(z) ** self.q / self.delta - self.eta_minus

    def conjugate_plus(self, w):
        """H_plus^*(w) = c_plus*|w|^p - eta_plus."""
        return self.c_plus * _norm(w) ** self.p - self.eta_plus

    def conjugate_minus(self, w):
        """H_minus^*(w) = c_minus*|w|^p + eta_minus."""
        return self.c_minus * _norm(w) ** self.p + self.eta_minus


def _norm(z) -> np.ndarray:
    """Euclidean norm over the last axis; scalars pass through as |z|."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        return np.abs(z)
    return np.sqrt(np.sum(z * z, axis=-1))


def derive_conjugates(
    q: float,
    delta: float,
    eta_plus: float = 0.0,
    eta_minus: float = 0.0,
    bound_M: float = 0.0,
) -> GrowthEnvelope:
    """Derive conjugate constants for the power-law envelope pair.

    p is always computed as q/(q-1), never stored independently.
    c_zero = (eta_plus + eta_minus)/c_plus and c_one = delta^(2p/q) are the
    constants entering the weak reverse-Holder inequality for extracted arcs.
    """
    if q <= 1.0:
        raise ValueError(f"conjugate exponent undefined for q={q} (need q > 1)")
    if delta < 1.0:
        raise ValueError(f"delta={delta} must be >= 1")
    if eta_plus < 0.0 or eta_minus < 0.0:
        raise ValueError("eta_plus and eta_minus must be nonnegative")
    if bound_M < 0.0:
        raise ValueError("bound_M must be nonnegative")
    p = q / (q - 1.0)
    denom = p * q ** (p / q)
    c_plus = delta ** (-p / q) / denom
    c_minus = delta ** (p / q) / denom
    return GrowthEnvelope(
        q=q,
        p=p,
        delta=delta,
        eta_plus=eta_plus,
        eta_minus=eta_minus,
        bound_M=bound_M,
        c_plus=c_plus,
        c_minus=c_minus,
        c_zero=(eta_plus + eta_minus) / c_plus,
        c_one=delta ** (2.0 * p / q),
    )


def legendre_oracle(
    hamiltonian: Callable[[np.ndarray], np.ndarray],
    w,
    search_radius: float,
    samples: int = 2001,
) -> float:
    """Grid maximization of z.w - H(z), an independent conjugate oracle.

    ``hamiltonian`` must accept an (m, d) array of points and return (m,)
    values.  The search grid is the d-fold product of ``samples`` points on
    [-search_radius, search_radius]; growing ``samples`` through nested
    refinements (n -> 2n-1) never decreases the result.

    Raises ValueError when the maximizer lands on the search boundary,
    which means the radius was too small to contain the true argmax.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    d = w.shape[0]
    if samples < 10:
        raise ValueError("need at least 10 samples per axis")
    if search_radius <= 0.0:
        raise ValueError("search_radius must be positive")
    axis = np.linspace(-search_radius, search_radius, samples)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    z = np.stack([g.ravel() for g in grids], axis=-1)
    values = z @ w - np.asarray(hamiltonian(z), dtype=float)
    best = int(np.argmax(values))
    z_best = z[best]
    if np.any(np.isclose(np.abs(z_best), search_radius)):
        raise ValueError(
            f"conjugate maximizer {z_best} on the search boundary; "
            f"increase search_radius={search_radius}"
        )
    return float(values[best])


def hopf_lax_step(
    u_prev: np.ndarray,
    x: np.ndarray,
    tau: float,
    conjugate_coeff: float,
    conjugate_exponent: float,
    eta_shift: float = 0.0,
    refine: bool = False,
) -> np.ndarray:
    """One backward Hopf-Lax step over a uniform x-grid.

    Returns v(x) = min_y { tau * (conjugate_coeff * |(y-x)/tau|^p + eta_shift)
    + u_prev(y) } with y restricted to grid points.  ``eta_shift`` is the
    constant term of the conjugate: -eta_plus for the upper envelope,
    +eta_minus for the lower one.

    The search is truncated to the a priori speed budget: any y with
    one-step cost exceeding the range of u_prev is provably suboptimal, so
    the window radius is 2 * (range/coeff)^(1/p) * tau^(1/q).  Ties are
    broken by smallest |y - x|, then smallest y.  With ``refine`` a 3-point
    parabolic refinement around the discrete argmin replaces the node value.
    """
    if tau <= 0.0:
        raise ValueError(f"tau={tau} must be positive")
    u_prev = np.asarray(u_prev, dtype=float)
    x = np.asarray(x, dtype=float)
    if u_prev.shape != x.shape or u_prev.ndim != 1:
        raise ValueError("u_prev and x must be 1-d arrays of equal length")
    n = x.size
    dx = x[1] - x[0]
    p = conjugate_exponent

    rng = float(u_prev.max() - u_prev.min())
    if conjugate_coeff <= 0.0:
        k_max = n - 1
    else:
        radius = 2.0 * (max(rng, 0.0) / conjugate_coeff) ** (1.0 / p) * tau ** (1.0 - 1.0 / p)
        k_max = min(n - 1, max(1, int(np.ceil(radius / dx)) + 1))

    idx = np.arange(n)
    best = np.full(n, np.inf)
    best_k = np.zeros(n, dtype=int)
    # offsets ordered by |k| then sign so the first strict minimum realizes
    # the (|y-x|, y) tie-break
    offsets = [0]
    for k in range(1, k_max + 1):
        offsets.extend([-k, k])
    for k in offsets:
        j = idx + k
        valid = (j >= 0) & (j < n)
        jc = np.clip(j, 0, n - 1)
        cost = tau * (conjugate_coeff * (abs(k) * dx / tau) ** p + eta_shift)
        cand = cost + u_prev[jc]
        cand = np.where(valid, cand, np.inf)
        upd = cand < best
        best = np.where(upd, cand, best)
        best_k = np.where(upd, k, best_k)

    hit = np.abs(best_k) == k_max
    if k_max < n - 1 and np.any(hit):
        warnings.warn(
            f"hopf_lax_step: {int(hit.sum())} minimizers on the truncated "
            "search window boundary",
            NumericsWarning,
            stacklevel=2,
        )
    edge = (idx + best_k <= 0) | (idx + best_k >= n - 1)
    interior_hit = edge & (idx > 0) & (idx < n - 1)

    if refine:
        j = idx + best_k
        ok = (j >= 1) & (j <= n - 2)
        jm, jp = np.clip(j - 1, 0, n - 1), np.clip(j + 1, 0, n - 1)

        def objective(jj):
            d = np.abs(x[jj] - x) / tau
            return tau * (conjugate_coeff * d**p + eta_shift) + u_prev[jj]

        f0, fm, fp = objective(np.clip(j, 0, n - 1)), objective(jm), objective(jp)
        denom = fm - 2.0 * f0 + fp
        vertex = f0 - np.where(denom > 0, (fp - fm) ** 2 / (8.0 * denom), 0.0)
        best = np.where(ok & (denom > 0), np.minimum(best, vertex), best)

    if np.any(interior_hit):
        warnings.warn(
            f"hopf_lax_step: {int(interior_hit.sum())} minimizers on the "
            "grid boundary",
            NumericsWarning,
            stacklevel=2,
        )
    return best


def one_sided_upper_bound(
    u_at_y_t: float,
    x,
    y,
    s: float,
    t: float,
    env: GrowthEnvelope,
) -> float:
    """Sub-solution upper bound u(y,t) + c_minus (s-t)^(1-p) |y-x|^p + eta_minus (s-t).

    Any discrete sub-solution produced by this toolkit satisfies
    u(x, s) <= one_sided_upper_bound(...) up to discretization slack.
    """
    if s <= t:
        raise ValueError(f"need s > t, got s={s}, t={t}")
    disp = float(_norm(np.asarray(y, dtype=float) - np.asarray(x, dtype=float)))
    dt = s - t
    return float(u_at_y_t + env.c_minus * dt ** (1.0 - env.p) * disp**env.p + env.eta_minus * dt)
