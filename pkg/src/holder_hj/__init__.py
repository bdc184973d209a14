"""Numerical toolkit for Holder regularity of Hamilton-Jacobi value functions.

Subpackages cover the power-law envelope Hamiltonians and their convex
conjugates, a backward dynamic-programming value solver with optimal-arc
extraction, Holder/Lipschitz seminorm estimators, a weak reverse-Holder
inequality engine, Monte Carlo checks for Brownian-bridge energy estimates,
and closed-form example galleries.
"""

from holder_hj.envelope import GrowthEnvelope, derive_conjugates

__all__ = ["GrowthEnvelope", "derive_conjugates"]

__version__ = "0.1.0"
