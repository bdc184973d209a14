"""Holder and Lipschitz seminorm estimators for grid functions.

Seminorms are measured over a declared scale window rather than all
separations: grid functions are Lipschitz at the grid scale, so the
asymptotic Holder behavior only shows in a mesoscopic range.  The module
also evaluates the space/time exponent pair ((theta-p)/(theta-1),
(theta-p)/theta) and checks the energy inequalities satisfied by extracted
optimal arcs: the one-step optimality chain, the weak reverse-Holder bound
with constants C0 = (eta_plus + eta_minus)/C_plus and C1 = delta^(2p/q),
and the (t)^(1 - 1/theta) decay of the arc's speed integral.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from holder_hj.envelope import GrowthEnvelope, NumericsWarning
from holder_hj.value_solver import DiscreteArc, GridFunction2D

Region = Tuple[Tuple[float, float], Tuple[float, float]]


@dataclass(frozen=True)
class HolderFit:
    """Log-log regression of max increments against separation scale."""

    exponent: float
    constant: float
    fit_residual: float  # R^2 of the regression
    scale_window: Tuple[float, float]


@dataclass(frozen=True)
class ArcEnergyReport:
    """Margins of the three arc energy inequalities.

    toto1_min_slack: smallest multiplier lambda such that
        u(start) >= u(xi(t), t) + (C_plus/lambda) * energy - eta_plus * (t - t_start)
    holds along the whole arc.
    revholder_worst_margin: min over windows of
        slack*C1*(mean |speed|)^p + C0 - mean(|speed|^p), nonnegative means
        the weak reverse-Holder inequality holds.
    decay_exponent: fitted slope of log integral(|speed|) vs log window size,
    to be compared with 1 - 1/theta.
    """

    toto1_min_slack: float
    revholder_worst_margin: float
    decay_exponent: float
    decay_r2: float
    slack: float


def _region_indices(u: GridFunction2D, region: Region):
    (x0, x1), (t0, t1) = region
    ix = np.where((u.x_grid >= x0 - 1e-12) & (u.x_grid <= x1 + 1e-12))[0]
    it = np.where((u.t_grid >= t0 - 1e-12) & (u.t_grid <= t1 + 1e-12))[0]
    if ix.size == 0 or it.size == 0:
        raise ValueError(f"region {region} contains no grid nodes")
    return ix, it


def _oriented(u: GridFunction2D, direction: str, region: Region):
    """Sub-matrix with the seminorm direction on the last axis, and its step."""
    ix, it = _region_indices(u, region)
    sub = u.values[np.ix_(it, ix)]
    if direction == "space":
        return sub, u.dx
    if direction == "time":
        return sub.T, u.dt
    raise ValueError(f"direction must be 'space' or 'time', got {direction!r}")


def max_increment_profile(
    u: GridFunction2D,
    direction: str,
    region: Region,
    scales: np.ndarray,
) -> np.ndarray:
    """max |u(z + r) - u(z)| over same-line pairs in the region, per scale.

    Scales snap to integer multiples of the grid step; both pair endpoints
    lie in the region.
    """
    sub, step = _oriented(u, direction, region)
    out = np.empty(len(scales))
    for i, r in enumerate(scales):
        k = int(round(r / step))
        if k < 1 or k >= sub.shape[1]:
            raise ValueError(f"scale {r} unusable: {k} grid steps vs width {sub.shape[1]}")
        out[i] = np.abs(sub[:, k:] - sub[:, :-k]).max()
    return out


def holder_seminorm(
    u: GridFunction2D,
    alpha: float,
    direction: str,
    region: Region,
    scale_window: Tuple[float, float],
) -> float:
    """sup |u(z+r) - u(z)| / r^alpha over separations r in the scale window."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha={alpha} must lie in (0, 1]")
    sub, step = _oriented(u, direction, region)
    k_min = max(1, int(np.ceil(scale_window[0] / step - 1e-9)))
    k_max = int(np.floor(scale_window[1] / step + 1e-9))
    k_max = min(k_max, sub.shape[1] - 1)
    if k_max < k_min:
        raise ValueError(
            f"no grid separations in window {scale_window} (step {step:.3g})"
        )
    best = 0.0
    for k in range(k_min, k_max + 1):
        diff = np.abs(sub[:, k:] - sub[:, :-k]).max()
        best = max(best, float(diff) / (k * step) ** alpha)
    return best


def fit_holder_exponent(
    u: GridFunction2D,
    direction: str,
    region: Region,
    scale_window: Tuple[float, float],
    num_scales: int = 8,
) -> HolderFit:
    """Least-squares slope of log(max increment) against log(scale).

    Scales are logarithmically spaced in the window (>= 5 of them after
    snapping to the grid).  The exponent is the slope clipped to (0, 1];
    a fit residual R^2 below 0.9 flags non-power-law behavior.
    """
    sub, step = _oriented(u, direction, region)
    raw = np.geomspace(scale_window[0], scale_window[1], max(num_scales, 5))
    ks = np.unique(np.clip(np.round(raw / step).astype(int), 1, sub.shape[1] - 1))
    if ks.size < 5:
        raise ValueError(
            f"only {ks.size} distinct scales in window {scale_window}; need >= 5"
        )
    scales = ks * step
    deltas = max_increment_profile(u, direction, region, scales)
    if np.any(deltas <= 0.0):
        raise ValueError("zero increments in the scale window; no power law to fit")
    lx, ly = np.log(scales), np.log(deltas)
    design = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - design @ np.array([slope, intercept])
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    if r2 < 0.9:
        warnings.warn(
            f"holder fit residual R^2={r2:.3f} < 0.9: non-power-law behavior",
            NumericsWarning,
            stacklevel=2,
        )
    exponent = float(np.clip(slope, 1e-9, 1.0))
    return HolderFit(
        exponent=exponent,
        constant=float(np.exp(intercept)),
        fit_residual=r2,
        scale_window=(float(scales[0]), float(scales[-1])),
    )


def lipschitz_constant(u: GridFunction2D, direction: str, region: Region) -> float:
    """Max adjacent-node difference quotient in the given direction."""
    sub, step = _oriented(u, direction, region)
    if sub.shape[1] < 2:
        raise ValueError("region too thin for adjacent-node quotients")
    return float(np.abs(np.diff(sub, axis=1)).max() / step)


def theorem_exponents(theta: float, p: float) -> Tuple[float, float]:
    """The space/time Holder exponent pair ((theta-p)/(theta-1), (theta-p)/theta).

    Requires theta > p > 1; then 0 < time exponent < space exponent < 1.
    """
    if p <= 1.0:
        raise ValueError(f"p={p} must exceed 1")
    if theta <= p:
        raise ValueError(f"theta={theta} must exceed p={p}")
    return (theta - p) / (theta - 1.0), (theta - p) / theta


def arc_energy_check(
    arc: DiscreteArc,
    u: GridFunction2D,
    env: GrowthEnvelope,
    slack: float = 1.25,
    decay_window: Tuple[float, float] | None = None,
    decay_scales: int = 12,
) -> ArcEnergyReport:
    """Check the three energy inequalities along an extracted arc.

    Windows are anchored at the arc's start node (the point the arc was
    extracted from, where the value recursion begins).  ``u`` must be the
    value function the arc was extracted from.
    """
    if slack < 1.0:
        raise ValueError("slack must be >= 1")
    t = arc.times
    k0 = u.time_index(t[0])
    if t.size != u.t_grid.size - k0 or not np.allclose(t, u.t_grid[k0:]):
        raise ValueError("arc times do not match the grid of u")
    p = env.p

    dts = np.diff(t)
    spd = np.abs(arc.speeds)
    elapsed = t[1:] - t[0]
    energy = np.cumsum(dts * spd**p)  # integral of |xi'|^p from start
    length = np.cumsum(dts * spd)  # integral of |xi'| from start

    # (i) minimal slack in the optimality chain
    u_along = np.array([u.interp(arc.positions[j], k0 + j) for j in range(t.size)])
    drop = u_along[0] - u_along[1:] + env.eta_plus * elapsed
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(energy > 0.0, env.c_plus * energy / drop, 0.0)
    ratio = np.where((energy > 0.0) & (drop <= 0.0), np.inf, ratio)
    toto1_min_slack = float(np.max(ratio)) if ratio.size else 0.0

    # (ii) weak reverse-Holder margin over trailing windows
    mean_p = energy / elapsed
    mean_1 = length / elapsed
    margins = slack * env.c_one * mean_1**p + env.c_zero - mean_p
    revholder_worst_margin = float(margins.min())

    # (iii) decay of the speed integral over growing windows from the start
    span = float(t[-1] - t[0])
    if decay_window is None:
        decay_window = (max(4.0 * float(dts.min()), 0.01 * span), span)
    hs = np.geomspace(decay_window[0], decay_window[1], decay_scales)
    ks = np.unique(np.clip(np.searchsorted(elapsed, hs), 1, elapsed.size - 1))
    xs, ys = np.log(elapsed[ks]), np.log(np.maximum(length[ks], 1e-300))
    design = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ np.array([slope, intercept])
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0

    return ArcEnergyReport(
        toto1_min_slack=toto1_min_slack,
        revholder_worst_margin=revholder_worst_margin,
        decay_exponent=float(slope),
        decay_r2=r2,
        slack=slack,
    )


def report_rows_to_csv(rows, path) -> None:
    """Serialize check rows as `check,region,scale_min,scale_max,value,margin`."""
    with open(path, "w", newline="\n") as fh:
        fh.write("check,region,scale_min,scale_max,value,margin\n")
        for check, region, smin, smax, value, margin in rows:
            fh.write(
                f"{check},{region},{_fmt(smin)},{_fmt(smax)},{_fmt(value)},{_fmt(margin)}\n"
            )


def _fmt(v: float) -> str:
    v = float(v)
    if v == 0.0:
        v = 0.0
    return f"{v:.12g}"
