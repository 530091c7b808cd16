"""Constructive boundary-value prescription on the unit disc.

Given piecewise-continuous boundary data on the unit circle, this package
builds a single global polynomial (holomorphic or harmonic) that approaches
the data at designated boundary points along explicitly constructed sets of
relative area density one, and certifies every density budget and error
bound numerically at finite stage.
"""

from carleman.geometry import Ball, Domain, ball_domain_area, dist_to_boundary, lens_area

__all__ = [
    "Ball",
    "Domain",
    "ball_domain_area",
    "dist_to_boundary",
    "lens_area",
]

__version__ = "0.1.0"
