"""Exact planar measure computations for discs intersected with the domain.

All areas that feed density certificates are computed in closed form
(circular-lens geometry); Monte Carlo is used only as an independent
cross-check in the test-suite and the verifier.  Every function accepts
scalars or numpy arrays for the point arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Ball",
    "Domain",
    "Shell",
    "JumpWedge",
    "ArcNeighborhood",
    "CompositeSet",
    "lens_area",
    "ball_domain_area",
    "dist_to_boundary",
    "member",
    "uniform_in_ball",
    "sample_ball_domain",
]


@dataclass(frozen=True)
class Domain:
    """The open planar domain: the unit disc, or an annulus inside it.

    The outer boundary is always the unit circle centred at the origin.
    """

    kind: str = "unit-disc"
    inner_radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("unit-disc", "annulus"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "annulus" and not 0.0 < self.inner_radius < 1.0:
            raise ValueError("annulus inner radius must lie in (0, 1)")
        if self.kind == "unit-disc" and self.inner_radius != 0.0:
            raise ValueError("unit-disc has no inner radius")

    def contains(self, z):
        """Open membership z in U (vectorized)."""
        r = np.abs(np.asarray(z))
        inside = r < 1.0
        if self.kind == "annulus":
            inside &= r > self.inner_radius
        return inside if isinstance(z, np.ndarray) else bool(inside)

    def boundary_points(self, n: int) -> np.ndarray:
        """n equispaced points on the outer boundary circle."""
        th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return np.exp(1j * th)


UNIT_DISC = Domain()


@dataclass(frozen=True)
class Ball:
    """Open disc B(center, radius)."""

    center: complex
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")

    def contains_open(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def contains_closed(self, z):
        return np.abs(np.asarray(z) - self.center) <= self.radius

    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class Shell:
    """Open annular shell of half-thickness tau around the circle |z-c| = r."""

    center: complex
    circle_radius: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0.0 or self.tau >= self.circle_radius:
            raise ValueError("shell half-thickness must lie in (0, circle radius)")

    def contains_open(self, z):
        d = np.abs(np.asarray(z) - self.center)
        return (d > self.circle_radius - self.tau) & (d < self.circle_radius + self.tau)

    def area(self) -> float:
        # pi*((r+tau)^2 - (r-tau)^2) = 4*pi*r*tau
        return 4.0 * math.pi * self.circle_radius * self.tau


def _ang_diff(a, b):
    """Absolute angular distance, wrapped to [0, pi]."""
    d = np.mod(np.asarray(a) - b, 2.0 * math.pi)
    return np.minimum(d, 2.0 * math.pi - d)


@dataclass(frozen=True)
class JumpWedge:
    """Excluded sector around a boundary jump at angle alpha.

    Half-width at radius rho is h(1-rho) with the gauge h(d) = d^2, capped
    at ``max_halfwidth`` so wedges of distinct jumps never overlap.
    """

    alpha: float
    max_halfwidth: float = 1.0

    def halfwidth(self, rho):
        return np.minimum((1.0 - np.asarray(rho)) ** 2, self.max_halfwidth)

    def contains_open(self, z):
        z = np.asarray(z)
        rho = np.abs(z)
        th = np.angle(z)
        return (rho < 1.0) & (_ang_diff(th, self.alpha) < self.halfwidth(rho))


@dataclass(frozen=True)
class ArcNeighborhood:
    """Open delta-neighbourhood (chord metric) of a set of closed boundary arcs.

    Arcs are (start, end) angle pairs with end > start, end - start <= 2*pi.
    """

    arcs: tuple
    delta: float

    def dist(self, z):
        z = np.asarray(z, dtype=complex)
        best = np.full(z.shape if z.shape else (1,), np.inf)
        zs = z.reshape(-1)
        d = np.full(zs.shape, np.inf)
        for (a, b) in self.arcs:
            th = np.angle(zs)
            # nearest angle on [a, b] to theta, accounting for wrap
            mid = 0.5 * (a + b)
            off = np.mod(th - mid + math.pi, 2.0 * math.pi) - math.pi
            half = 0.5 * (b - a)
            t = mid + np.clip(off, -half, half)
            d = np.minimum(d, np.abs(zs - np.exp(1j * t)))
        best = d.reshape(z.shape) if z.shape else d[0]
        return best

    def contains_open(self, z):
        return self.dist(z) < self.delta


@dataclass
class CompositeSet:
    """Base set minus finitely many open sets, intersected with closed balls.

    Points exactly on a removed set's boundary resolve as NOT removed
    (removal is by open membership), so the predicate keeps closed-set
    semantics throughout.
    """

    base: object  # Ball or Domain
    minus_open: list = field(default_factory=list)
    intersect_closed: list = field(default_factory=list)

    def contains(self, z):
        z = np.asarray(z)
        if isinstance(self.base, Domain):
            ok = self.base.contains(z)
        else:
            ok = self.base.contains_closed(z)
        for s in self.minus_open:
            ok = ok & ~s.contains_open(z)
        for b in self.intersect_closed:
            ok = ok & b.contains_closed(z)
        return ok


def lens_area(b1: Ball, b2: Ball) -> float:
    """Exact area of the intersection of two open discs.

    Closed-form circular-lens formula; 0 when disjoint, area of the smaller
    ball when nested.
    """
    r1, r2 = b1.radius, b2.radius
    d = abs(b1.center - b2.center)
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    # distance from center 1 to the radical line
    d1 = (r1**2 - r2**2 + d**2) / (2.0 * d)
    d2 = d - d1
    a1 = r1**2 * math.acos(max(-1.0, min(1.0, d1 / r1)))
    a1 -= d1 * math.sqrt(max(0.0, r1**2 - d1**2))
    a2 = r2**2 * math.acos(max(-1.0, min(1.0, d2 / r2)))
    a2 -= d2 * math.sqrt(max(0.0, r2**2 - d2**2))
    return a1 + a2


def ball_domain_area(b: Ball, d: Domain = UNIT_DISC) -> float:
    """Exact area of B intersected with the domain."""
    outer = Ball(0.0, 1.0)
    area = lens_area(b, outer)
    if d.kind == "annulus":
        area -= lens_area(b, Ball(0.0, d.inner_radius))
    return max(0.0, area)


def dist_to_boundary(z: complex, d: Domain = UNIT_DISC) -> float:
    """Distance from a point of U to the boundary of the domain."""
    r = abs(z)
    if not d.contains(z):
        raise ValueError(f"point {z} lies outside the domain")
    if d.kind == "unit-disc":
        return 1.0 - r
    return min(1.0 - r, r - d.inner_radius)


def member(z, s) -> bool:
    """Membership in a composite set (closed-set convention on cut boundaries)."""
    if isinstance(s, Domain):
        return bool(np.all(s.contains(np.asarray(z))))
    return bool(np.all(s.contains(np.asarray(z))))


def uniform_in_ball(rng: np.random.Generator, b: Ball, n: int) -> np.ndarray:
    """n points uniform in the open disc b (polar inversion sampling)."""
    u = rng.random(n)
    th = rng.random(n) * 2.0 * math.pi
    return b.center + b.radius * np.sqrt(u) * np.exp(1j * th)


def sample_ball_domain(rng: np.random.Generator, b: Ball, d: Domain, n: int) -> np.ndarray:
    """Up to n points uniform in B(p, r) intersected with U (rejection)."""
    pts = uniform_in_ball(rng, b, n)
    return pts[d.contains(pts)]
