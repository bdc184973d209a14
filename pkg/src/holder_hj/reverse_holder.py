"""Weak reverse-Holder inequality engine.

A nonnegative phi on (a, b) satisfies the hypothesis when the windowed
p-mean is controlled by the windowed mean:

    (1/(t-a)) int_a^t phi^p  <=  A ((1/(t-a)) int_a^t phi)^p      (A > 1).

For every theta > p with

    theta / ((theta - p) A)  >  (theta / (theta - 1))^p

Hardy's inequality upgrades the decay of int_a^t phi from (t-a)^(1-1/p)
to (t-a)^(1-1/theta).  This module locates the supremum theta* of
admissible exponents by bisection, assembles the conclusion constant from
the proof chain, verifies hypothesis and conclusion on sampled data,
checks Hardy's inequality directly, and performs the additive-offset
shift reduction psi = phi + B^(1/p)/(A^(1/p)-1).

The stochastic variant caps theta below 2; that cap is what the
Brownian-bridge term (t-a)^(-p/2) requires.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from holder_hj.envelope import NumericsWarning

STOCHASTIC_CAP = 2.0 - 1e-6


@dataclass
class SampledFunction1D:
    """Nonnegative values at the left endpoints of n uniform cells on [a, b].

    Integrals are left-endpoint Riemann sums: values[k] stands for the cell
    [a + k h, a + (k+1) h) with h = (b - a)/n.
    """

    interval: Tuple[float, float]
    values: np.ndarray
    p: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        a, b = self.interval
        if b <= a:
            raise ValueError("interval must satisfy b > a")
        if self.p <= 1.0:
            raise ValueError(f"p={self.p} must exceed 1")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("values must be a 1-d array with >= 2 samples")
        if np.any(self.values < 0.0) or not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite and nonnegative")

    @property
    def h(self) -> float:
        a, b = self.interval
        return (b - a) / self.values.size

    def norm_p(self) -> float:
        """Discrete L^p norm (int phi^p)^(1/p)."""
        return float((self.h * np.sum(self.values**self.p)) ** (1.0 / self.p))

    @classmethod
    def from_callable(
        cls,
        f: Callable[[np.ndarray], np.ndarray],
        interval: Tuple[float, float],
        n: int,
        p: float,
        sample: str = "left",
    ) -> "SampledFunction1D":
        """Sample f at cell left endpoints, midpoints, or cell averages."""
        a, b = interval
        h = (b - a) / n
        if sample == "left":
            s = a + h * np.arange(n)
        elif sample == "mid":
            s = a + h * (np.arange(n) + 0.5)
        elif sample == "cell_mean":
            # open midpoint rule; never evaluates f at cell edges, so
            # integrable endpoint singularities stay finite
            edges = a + h * np.arange(n)
            fine = (np.arange(64) + 0.5) / 64.0
            pts = edges[:, None] + h * fine[None, :]
            vals = np.asarray(f(pts.ravel()), dtype=float).reshape(n, -1).mean(axis=1)
            return cls(interval=interval, values=vals, p=p)
        else:
            raise ValueError(f"unknown sample rule {sample!r}")
        return cls(interval=interval, values=np.asarray(f(s), dtype=float), p=p)

    def to_csv(self, path) -> None:
        a = self.interval[0]
        with open(path, "w", newline="\n") as fh:
            fh.write("s,phi\n")
            for k, v in enumerate(self.values):
                fh.write(f"{a + k * self.h:.12g},{v:.12g}\n")

    @classmethod
    def from_csv(cls, path, p: float) -> "SampledFunction1D":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        s, vals = data[:, 0], data[:, 1]
        h = s[1] - s[0]
        return cls(interval=(float(s[0]), float(s[-1] + h)), values=vals, p=p)


@dataclass(frozen=True)
class ThetaResult:
    """Admissible exponent with its strict-inequality margin and constant.

    ``theta`` is p + backoff * (theta_star - p); ``margin`` is
    theta/((theta-p)A) - (theta/(theta-1))^p > 0 at the returned theta;
    ``constant_C`` is the conclusion constant assembled from the proof
    chain, (C_w)^(1/p) (theta'/q)^(1/q) with theta' conjugate to theta and
    C_w the weighted-to-plain norm comparison constant.
    """

    theta: float
    p: float
    A: float
    margin: float
    constant_C: float
    theta_star: float

    def to_json(self, path=None) -> str:
        payload = {
            "theta": self.theta,
            "p": self.p,
            "A": self.A,
            "margin": self.margin,
            "constant_C": self.constant_C,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text


def threshold_gap(theta, p: float, A: float):
    """theta/((theta-p)A) - (theta/(theta-1))^p; positive means admissible."""
    theta = np.asarray(theta, dtype=float)
    return theta / ((theta - p) * A) - (theta / (theta - 1.0)) ** p


def _locate_theta_star(p: float, A: float) -> float:
    """Bisection for theta* = sup{theta > p : threshold_gap > 0}.

    The gap tends to +inf as theta -> p+ and to 1/A - 1 < 0 as
    theta -> inf, so a sign change always exists.  A sampling pass checks
    for a single sign change; a non-monotone pattern falls back to the
    smallest bracket and warns.
    """
    lo = p * (1.0 + 1e-12) + 1e-12
    hi = p + 1.0
    while threshold_gap(hi, p, A) > 0.0:
        hi = p + 2.0 * (hi - p)
        if hi - p > 1e9:
            raise RuntimeError("threshold search did not bracket a sign change")

    probes = p + (hi - p) * np.linspace(1e-9, 1.0, 257)[:-1]
    signs = np.sign(threshold_gap(probes, p, A))
    changes = np.where(np.diff(signs) < 0)[0]
    if changes.size > 1:
        warnings.warn(
            f"threshold gap changes sign {changes.size} times on (p, {hi:.3g}); "
            "falling back to the smallest admissible bracket",
            NumericsWarning,
            stacklevel=2,
        )
        lo, hi = probes[changes[0]], probes[changes[0] + 1]
    else:
        lo = probes[changes[0]] if changes.size else lo

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if threshold_gap(mid, p, A) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _assemble(p: float, A: float, theta_star: float, theta: float) -> ThetaResult:
    margin = float(threshold_gap(theta, p, A))
    d = theta / ((theta - p) * A)
    c_weighted = d / margin  # weighted p-norm <= c_weighted * plain p-norm
    q = p / (p - 1.0)
    theta_conj = theta / (theta - 1.0)
    constant_c = c_weighted ** (1.0 / p) * (theta_conj / q) ** (1.0 / q)
    return ThetaResult(
        theta=theta,
        p=p,
        A=A,
        margin=margin,
        constant_C=constant_c,
        theta_star=theta_star,
    )


def theta_threshold(p: float, A: float, backoff: float = 0.95) -> ThetaResult:
    """Locate theta* and return theta = p + backoff (theta* - p).

    The backoff keeps the strict inequality margin positive (reported) so
    the conclusion constant stays finite; backoff -> 1 recovers theta*.
    """
    if p <= 1.0:
        raise ValueError(f"p={p} must exceed 1")
    if A <= 1.0:
        raise ValueError(f"A={A} must exceed 1")
    if not 0.0 < backoff < 1.0:
        raise ValueError("backoff must lie in (0, 1)")
    theta_star = _locate_theta_star(p, A)
    return _assemble(p, A, theta_star, p + backoff * (theta_star - p))


def stochastic_theta(p: float, A: float, backoff: float = 0.95) -> ThetaResult:
    """Same threshold search with the bracket capped below 2.

    The stochastic hypothesis carries a (t-a)^(-p/2) offset whose
    integrability forces theta < 2; requires p in (1, 2).
    """
    if not 1.0 < p < 2.0:
        raise ValueError(f"p={p} must lie in (1, 2)")
    if A <= 1.0:
        raise ValueError(f"A={A} must exceed 1")
    if not 0.0 < backoff < 1.0:
        raise ValueError("backoff must lie in (0, 1)")
    theta_star = min(_locate_theta_star(p, A), STOCHASTIC_CAP)
    return _assemble(p, A, theta_star, p + backoff * (theta_star - p))


def _window_means(phi: SampledFunction1D, anchor: str):
    """Windowed means of phi and phi^p; windows grow from the anchor."""
    h, p = phi.h, phi.p
    if anchor == "left":
        vals = phi.values
    elif anchor == "right":
        vals = phi.values[::-1]
    else:
        raise ValueError(f"anchor must be 'left' or 'right', got {anchor!r}")
    widths = h * np.arange(1, vals.size + 1)
    mean_1 = h * np.cumsum(vals) / widths
    mean_p = h * np.cumsum(vals**p) / widths
    return mean_1, mean_p


def min_hypothesis_constant(phi: SampledFunction1D, anchor: str = "left") -> float:
    """Smallest A with mean(phi^p) <= A mean(phi)^p at every grid window.

    Result is >= 1 by Jensen.  Windows whose mean vanishes are skipped:
    there the p-mean vanishes too and the inequality is vacuous.
    """
    if phi.values.size < 10:
        raise ValueError("need at least 10 samples")
    if not np.any(phi.values > 0.0):
        raise ValueError("phi is identically zero")
    mean_1, mean_p = _window_means(phi, anchor)
    denom = mean_1**phi.p
    live = denom > 0.0  # skips zero-mean windows and underflowed powers
    if not np.any(live):
        raise ValueError("phi is numerically zero at every window")
    return float(np.max(mean_p[live] / denom[live]))


def verify_conclusion(
    phi: SampledFunction1D,
    theta: float,
    C: float,
    anchor: str = "left",
) -> float:
    """Worst margin of the decay conclusion over grid windows.

    Left anchor: min over t of
        C (t-a)^(1-1/theta) (b-a)^(1/theta-1/p) ||phi||_p - int_a^t phi;
    right anchor mirrors the windows to [t, b].  Nonnegative means the
    conclusion holds.
    """
    if theta <= phi.p:
        raise ValueError(f"theta={theta} must exceed p={phi.p}")
    a, b = phi.interval
    h = phi.h
    vals = phi.values if anchor == "left" else phi.values[::-1]
    if anchor not in ("left", "right"):
        raise ValueError(f"anchor must be 'left' or 'right', got {anchor!r}")
    widths = h * np.arange(1, vals.size + 1)
    integrals = h * np.cumsum(vals)
    bound = (
        C
        * widths ** (1.0 - 1.0 / theta)
        * (b - a) ** (1.0 / theta - 1.0 / phi.p)
        * phi.norm_p()
    )
    return float(np.min(bound - integrals))


def _weight_integrals(edges: np.ndarray, c: float) -> np.ndarray:
    """Exact integrals of s^(c-1) over consecutive cells (c > 0)."""
    powers = edges**c / c
    return np.diff(powers)


def hardy_check(phi: SampledFunction1D, theta: float) -> float:
    """Margin of Hardy's inequality with weight s^(p/theta - 1).

    Returns (theta/(theta-1))^p int_0^1 s^(p/theta-1) phi^p
            - int_0^1 s^(p/theta-1) f^p,  f(s) = (1/s) int_0^s phi,
    on the interval rescaled to (0, 1).  The singular weight is integrated
    exactly against the piecewise-constant integrands, so the margin is
    nonnegative up to quadrature error on f.
    """
    p = phi.p
    if theta <= p:
        raise ValueError(f"theta={theta} must exceed p={p}")
    n = phi.values.size
    h = 1.0 / n
    if np.count_nonzero(np.arange(n) * h < 0.01) < 50:
        warnings.warn(
            "weight s^(p/theta-1) under-resolved near 0 "
            "(fewer than 50 samples in [0, 0.01])",
            NumericsWarning,
            stacklevel=2,
        )
    c = p / theta
    edges = h * np.arange(n + 1)
    w = _weight_integrals(edges, c)

    vals = phi.values
    lhs = (theta / (theta - 1.0)) ** p * float(np.sum(w * vals**p))

    # running average at cell left endpoints; f(0+) = phi(0) for cell data
    cum = h * np.concatenate([[0.0], np.cumsum(vals)])
    f = np.empty(n)
    f[0] = vals[0]
    f[1:] = cum[1:-1] / edges[1:-1]
    rhs = float(np.sum(w * f**p))
    return lhs - rhs


def shift_reduction(
    phi: SampledFunction1D,
    A: float,
    B: float,
) -> Tuple[SampledFunction1D, float]:
    """Additive shift absorbing the offset B into the multiplicative form.

    Returns (psi, k) with psi = phi + k and k = B^(1/p)/(A^(1/p) - 1).
    When phi satisfies the offset hypothesis with (A, B), psi satisfies the
    offset-free one with the same A; the final bound reassembles through
    ||psi||_p <= ||phi||_p + k (b-a)^(1/p).
    """
    if A <= 1.0:
        raise ValueError(f"A={A} must exceed 1")
    if B < 0.0:
        raise ValueError(f"B={B} must be nonnegative")
    k = B ** (1.0 / phi.p) / (A ** (1.0 / phi.p) - 1.0)
    psi = SampledFunction1D(interval=phi.interval, values=phi.values + k, p=phi.p)
    return psi, k
