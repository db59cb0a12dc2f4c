"""
polyfix: fixed points and periodic orbits of nonexpansive maps

Real-analytic maps that are nonexpansive for a polyhedral norm (ℓ1, ℓ∞ or a
norm given by its dual extremes) are certified, iterated to their fixed
points and periodic orbits, and audited against the period bounds and the
locked-set description of their fixed-point sets.
"""

__version__ = "0.1.0"
