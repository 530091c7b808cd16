"""Boundary data on the unit circle and its constructive continuous extension.

Models piecewise-continuous boundary data with a finite jump set, a closed
continuity set S, a boundary measure, the layered decomposition of the
circle into closed arc sets on which the data stays continuous, budgeted
neighbourhoods of those sets, and the explicit extension of the data into
the disc (radial transport plus linear angular blending across narrow
wedges at the jumps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from carleman.arcs import TWO_PI, ArcSet, ang_dist, ang_norm
from carleman.geometry import (
    ArcNeighborhood,
    Ball,
    Domain,
    JumpWedge,
    ball_domain_area,
)

__all__ = [
    "BoundaryFunction",
    "BoundaryMeasure",
    "LusinDecomposition",
    "ContinuousExtension",
    "lusin_decompose",
    "budgeted_wedges",
    "extend_continuous",
]


@dataclass
class BoundaryFunction:
    """Piecewise model of the boundary datum.

    pieces: list of (start, end, value) where value is a constant or a
    callable of the angle; the half-open arcs [start, end) partition
    [0, 2*pi).  jumps: the finite set of discontinuity angles.  s_arcs:
    the closed continuity set S, disjoint from the jump set.
    """

    pieces: list
    jumps: list = field(default_factory=list)
    s_arcs: ArcSet = field(default_factory=ArcSet)

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("boundary function needs at least one piece")
        for j in self.jumps:
            if self.s_arcs.contains(j):
                raise ValueError(f"continuity set S contains jump angle {j}")

    def __call__(self, theta):
        th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        scalar = np.ndim(theta) == 0
        th = np.atleast_1d(th)
        out = np.zeros(th.shape, dtype=complex)
        seen = np.zeros(th.shape, dtype=bool)
        for (a, b, v) in self.pieces:
            a, span = ang_norm(a), ang_norm(b) - ang_norm(a)
            if span <= 0:
                span += TWO_PI
            rel = np.mod(th - a, TWO_PI)
            mask = (rel < span) & ~seen
            if np.any(mask):
                out[mask] = v(th[mask]) if callable(v) else v
                seen |= mask
        vals = out
        return complex(vals[0]) if scalar else vals

    def is_real(self) -> bool:
        probe = self(np.linspace(0, TWO_PI, 257, endpoint=False))
        return bool(np.max(np.abs(probe.imag)) < 1e-14)

    @classmethod
    def step(cls, values=(0.0, 1.0), cuts=(0.0, math.pi), s_arcs: ArcSet | None = None):
        """Step function: values[i] on [cuts[i], cuts[i+1])."""
        cuts = [ang_norm(c) for c in cuts]
        pieces = []
        for i, c in enumerate(cuts):
            nxt = cuts[(i + 1) % len(cuts)]
            pieces.append((c, nxt if nxt > c else nxt + TWO_PI, values[i]))
        return cls(pieces=pieces, jumps=list(cuts), s_arcs=s_arcs or ArcSet())

    @classmethod
    def from_json(cls, doc: dict) -> "BoundaryFunction":
        """Schema: {"pieces": [{"arcStartRad", "arcEndRad", "type", "payload"}],
        "jumps": [...], "sArcs": [[a, b], ...]}."""
        pieces = []
        for p in doc["pieces"]:
            a, b = float(p["arcStartRad"]), float(p["arcEndRad"])
            kind = p.get("type", "const")
            payload = p["payload"]
            if kind == "const":
                val = complex(payload) if isinstance(payload, str) else payload
            elif kind == "samples":
                ts = np.asarray(payload["angles"], dtype=float)
                vs = np.asarray(payload["values"], dtype=float)
                val = _interp_piece(ts, vs)
            elif kind == "expr":
                val = _expr_piece(str(payload))
            else:
                raise ValueError(f"unknown piece type {kind!r}")
            pieces.append((a, b, val))
        s_arcs = ArcSet([tuple(x) for x in doc.get("sArcs", [])])
        return cls(pieces=pieces, jumps=[float(j) for j in doc.get("jumps", [])], s_arcs=s_arcs)


def _interp_piece(ts, vs):
    def f(theta):
        return np.interp(np.asarray(theta, dtype=float), ts, vs)

    return f


_EXPR_NAMES = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "pi": math.pi, "abs": np.abs}


def _expr_piece(expr: str):
    def f(theta):
        return eval(expr, {"__builtins__": {}}, dict(_EXPR_NAMES, t=np.asarray(theta)))

    return f


@dataclass
class BoundaryMeasure:
    """Boundary measure: arc length, a weighted density, or atoms."""

    kind: str = "arc-length"
    density: object = None  # callable of angle, for kind == "weighted"
    atoms: list = field(default_factory=list)  # [(angle, mass)] for "atomic"

    def measure(self, arcset: ArcSet) -> float:
        if self.kind == "arc-length":
            return arcset.length()
        if self.kind == "weighted":
            total = 0.0
            for (a, b) in arcset.arcs:
                ts = np.linspace(a, b, 513)
                total += float(np.trapezoid(self.density(np.mod(ts, TWO_PI)), ts))
            return total
        if self.kind == "atomic":
            return float(sum(m for (t, m) in self.atoms if arcset.contains(t, tol=1e-12)))
        raise ValueError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def from_json(cls, doc) -> "BoundaryMeasure":
        if doc is None or doc == "arc-length":
            return cls()
        if isinstance(doc, dict) and doc.get("kind") == "atomic":
            return cls(kind="atomic", atoms=[tuple(x) for x in doc["atoms"]])
        if isinstance(doc, dict) and doc.get("kind") == "weighted":
            ts = np.asarray(doc["angles"], dtype=float)
            vs = np.asarray(doc["values"], dtype=float)
            return cls(kind="weighted", density=_interp_piece(ts, vs))
        raise ValueError(f"bad measure spec {doc!r}")


@dataclass
class LusinDecomposition:
    """S plus finitely many closed arc sets Q_k avoiding the jump set.

    The Q_k are layered: Q_1 sits at margin 2^-1 from every jump, Q_k fills
    the gap ring between margins 2^-k and 2^-(k-1), with a tiny positive
    separation between consecutive layers so the sets are pairwise disjoint.
    The final layer's margin is reduced by the accumulated separations so
    the uncovered mass stays within (number of jump-adjacent ends) * 2^-n.
    """

    s_arcs: ArcSet
    q_sets: list  # list[ArcSet]
    uncovered: ArcSet
    uncovered_mass: float
    atom_in_uncovered: bool = False

    def covered(self) -> ArcSet:
        out = self.s_arcs
        for q in self.q_sets:
            out = out.union(q)
        return out


def lusin_decompose(
    psi: BoundaryFunction, nu: BoundaryMeasure, max_sets: int
) -> LusinDecomposition:
    """Layered closed-arc decomposition of the circle away from the jumps."""
    if max_sets < 0:
        raise ValueError("max_sets must be >= 0")
    for j in psi.jumps:
        if psi.s_arcs.contains(j):
            raise ValueError("S intersects the jump set")

    jumps = sorted(ang_norm(j) for j in psi.jumps)
    if not jumps:
        full = ArcSet.full_circle()
        s = psi.s_arcs if not psi.s_arcs.is_empty() else full
        uncovered = full.subtract_open(s)
        return LusinDecomposition(s, [], uncovered, nu.measure(uncovered))

    # continuity arcs between consecutive jumps
    cont_arcs = []
    for i in range(len(jumps)):
        a = jumps[i]
        b = jumps[(i + 1) % len(jumps)]
        if b <= a:
            b += TWO_PI
        cont_arcs.append((a, b))
    if len(jumps) == 1:
        cont_arcs = [(jumps[0], jumps[0] + TWO_PI)]

    n = max_sets
    q_sets = []
    if n >= 1:
        sep = 2.0 ** -(n + 4) if n > 1 else 0.0
        # layer margins from each jump-adjacent arc end: layer k spans
        # [b_k, b_{k-1} - sep]; uncovered mass per end is exactly 2^-n.
        b_marg = [2.0 ** -k for k in range(1, n)] + [2.0 ** -n - (n - 1) * sep]
        if b_marg[-1] <= 0:
            raise ValueError("too many layers for the separation budget")
        covered_to = {i: None for i in range(len(cont_arcs))}  # margin per arc
        for k in range(1, n + 1):
            mk = b_marg[k - 1]
            pieces = []
            for i, (a, b) in enumerate(cont_arcs):
                half = (b - a) / 2.0
                if mk >= half:
                    continue
                prev = covered_to[i]
                if prev is None:
                    pieces.append((a + mk, b - mk))
                else:
                    outer = prev - sep
                    if outer > mk:
                        pieces.append((a + mk, a + outer))
                        pieces.append((b - outer, b - mk))
                covered_to[i] = mk
            layer = ArcSet(pieces)
            layer = _subtract_closed(layer, psi.s_arcs)
            q_sets.append(layer)
    s = psi.s_arcs
    covered = s
    for q in q_sets:
        covered = covered.union(q)
    uncovered = ArcSet.full_circle().subtract_open(_open_hull(covered))
    mass = nu.measure(uncovered)
    atom_hit = False
    if nu.kind == "atomic":
        atom_hit = any(not covered.contains(t, tol=1e-12) for (t, m) in nu.atoms if m > 0)
    return LusinDecomposition(s, q_sets, uncovered, mass, atom_hit)


def _open_hull(a: ArcSet) -> ArcSet:
    """The same arcs, to be removed as open intervals (endpoints stay)."""
    return a


def _subtract_closed(a: ArcSet, b: ArcSet) -> ArcSet:
    """a minus b where b is removed as a closed set (tiny open dilation)."""
    eps = 1e-12
    grown = ArcSet([(x - eps, y + eps) for (x, y) in b.arcs])
    return a.subtract_open(grown)


def _dilate_open(a: ArcSet, eps: float) -> ArcSet:
    return ArcSet([(x - eps, y + eps) for (x, y) in a.arcs])


@dataclass
class BudgetedWedge:
    """Certified delta-neighbourhood of Q_l, small near the protected sets."""

    index: int
    region: ArcNeighborhood
    budget: float
    r0: float
    rho: float
    delta: float


def budgeted_wedges(
    decomp: LusinDecomposition,
    budgets,
    d: Domain,
    probes_per_set: int = 64,
) -> list:
    """Shrunken neighbourhoods of each Q_l with certified density budgets.

    For wedge l the protected set is S together with the earlier Q_k; the
    neighbourhood radius is capped at just under half the chord distance
    r0 between the protected set and Q_l (so balls B(p, r) around protected
    boundary points miss the wedge entirely for r < r0), and its total area
    is pushed below budget * rho with rho the minimal mass of B(p, r0)
    intersected with the domain over sampled protected points.
    """
    out = []
    protected = decomp.s_arcs
    for idx, q in enumerate(decomp.q_sets, start=1):
        if q.is_empty():
            protected = protected.union(q)
            continue
        budget = budgets[idx - 1] if not callable(budgets) else budgets(idx)
        if protected.is_empty():
            protected = protected.union(q)
            continue
        gap = protected.min_chord_gap(q)
        if gap <= 0.0:
            raise ValueError(f"protected set touches Q_{idx}; r0 = 0")
        r0 = gap / 2.0
        thetas = protected.sample(probes_per_set)
        rho = min(
            ball_domain_area(Ball(complex(np.exp(1j * t)), r0), d) for t in thetas
        )
        # area of the delta-neighbourhood of an arc set of total length L is
        # at most 2*delta*L + (number of arcs)*pi*delta^2; halve the target
        # as the certificate safety factor.
        target = 0.5 * budget * rho
        L = q.length()
        m = len(q.arcs)
        # solve m*pi*delta^2 + 2*L*delta = target for delta > 0
        if L > 0:
            delta_area = (-2.0 * L + math.sqrt(4.0 * L * L + 4.0 * m * math.pi * target)) / (
                2.0 * m * math.pi
            )
        else:
            delta_area = math.sqrt(target / (m * math.pi))
        delta = min(0.99 * r0, delta_area)
        region = ArcNeighborhood(tuple(q.arcs), delta)
        out.append(BudgetedWedge(idx, region, budget, r0, rho, delta))
        protected = protected.union(q)
    return out


@dataclass
class ContinuousExtension:
    """Continuous extension of the boundary datum into the disc.

    Off all wedges, u(rho*e^{i*theta}) equals the boundary value at theta
    (radial transport); inside the wedge at a jump alpha, u blends linearly
    in the angle between the boundary values just outside the wedge.  The
    gauge h(d) = d^2 forces the wedges' own-vertex density ratio to O(r).
    """

    psi: BoundaryFunction
    wedges: list  # list[JumpWedge]
    max_halfwidth: float

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zz = np.atleast_1d(z)
        rho = np.abs(zz)
        th = np.mod(np.angle(zz), TWO_PI)
        vals = np.asarray(self.psi(th), dtype=complex)
        h = np.minimum((1.0 - rho) ** 2, self.max_halfwidth)
        for w in self.wedges:
            off = np.mod(th - w.alpha + math.pi, TWO_PI) - math.pi
            mask = (np.abs(off) < h) & (rho < 1.0)
            if np.any(mask):
                lo = np.asarray(self.psi(w.alpha - h[mask]), dtype=complex)
                hi = np.asarray(self.psi(w.alpha + h[mask]), dtype=complex)
                t = (off[mask] + h[mask]) / (2.0 * h[mask])
                vals[mask] = (1.0 - t) * lo + t * hi
        return complex(vals[0]) if scalar else vals

    def in_wedge(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=bool)
        for w in self.wedges:
            out |= w.contains_open(z)
        return out


def extend_continuous(
    psi: BoundaryFunction,
    decomp: LusinDecomposition | None = None,
    halfwidth_cap: float | None = None,
) -> ContinuousExtension:
    """Build the explicit continuous extension of piecewise-continuous data.

    halfwidth_cap optionally tightens the wedge half-width cap below the
    non-overlap default of 0.45x the minimal jump gap; narrower wedges leave
    wider single-sector corridors for the interior ball cover.
    """
    jumps = sorted(ang_norm(j) for j in psi.jumps)
    if len(jumps) > 256:
        raise ValueError("jump set must be finite and small")
    if len(jumps) >= 2:
        gaps = [
            ang_dist(jumps[i], jumps[(i + 1) % len(jumps)]) for i in range(len(jumps))
        ]
        max_hw = 0.45 * float(min(g for g in gaps if g > 0))
    else:
        max_hw = 1.0
    if halfwidth_cap is not None:
        if halfwidth_cap <= 0:
            raise ValueError("halfwidth cap must be positive")
        max_hw = min(max_hw, halfwidth_cap)
    wedges = [JumpWedge(alpha=j, max_halfwidth=max_hw) for j in jumps]
    return ContinuousExtension(psi=psi, wedges=wedges, max_halfwidth=max_hw)
