"""Interval arithmetic for finite unions of closed arcs on the circle.

Angles are radians in [0, 2*pi).  An ArcSet stores disjoint closed arcs as
(start, end) pairs with start in [0, 2*pi) and 0 <= end - start <= 2*pi;
arcs may wrap through 2*pi (then end > 2*pi).
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi

__all__ = ["ArcSet", "ang_norm", "ang_dist", "chord"]


def ang_norm(t: float) -> float:
    return float(np.mod(t, TWO_PI))


def ang_dist(a, b):
    """Angular distance wrapped to [0, pi]."""
    d = np.mod(np.asarray(a) - b, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def chord(a: float, b: float) -> float:
    """Euclidean chord distance between two boundary angles."""
    return float(abs(np.exp(1j * a) - np.exp(1j * b)))


class ArcSet:
    """Finite union of disjoint closed arcs on the circle."""

    def __init__(self, arcs=()):
        cleaned = []
        for (a, b) in arcs:
            if b < a:
                raise ValueError(f"arc end {b} before start {a}")
            if b - a >= TWO_PI:
                cleaned = [(0.0, TWO_PI)]
                break
            cleaned.append((ang_norm(a), ang_norm(a) + (b - a)))
        self.arcs = self._merge(cleaned)

    @staticmethod
    def _merge(arcs):
        """Merge overlapping/touching arcs, unwrapping through 2*pi."""
        if not arcs:
            return []
        if arcs == [(0.0, TWO_PI)]:
            return arcs
        # split wrapped arcs into [a, 2pi) + [0, b) pieces for merging
        pieces = []
        for (a, b) in arcs:
            if b > TWO_PI:
                pieces.append((a, TWO_PI))
                pieces.append((0.0, b - TWO_PI))
            else:
                pieces.append((a, b))
        pieces.sort()
        merged = [list(pieces[0])]
        for (a, b) in pieces[1:]:
            if a <= merged[-1][1] + 1e-15:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        # re-wrap if first piece starts at 0 and last ends at 2*pi
        if len(merged) > 1 and merged[0][0] <= 1e-15 and merged[-1][1] >= TWO_PI - 1e-15:
            first = merged.pop(0)
            merged[-1][1] = TWO_PI + first[1]
        if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI:
            return [(0.0, TWO_PI)]
        return [tuple(m) for m in merged]

    @classmethod
    def full_circle(cls) -> "ArcSet":
        return cls([(0.0, TWO_PI)])

    def is_empty(self) -> bool:
        return not self.arcs

    def is_full(self) -> bool:
        return self.arcs == [(0.0, TWO_PI)]

    def length(self) -> float:
        return float(sum(b - a for (a, b) in self.arcs))

    def contains(self, theta, tol: float = 0.0):
        """Closed membership of an angle (scalar or array)."""
        th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        out = np.zeros(th.shape, dtype=bool)
        for (a, b) in self.arcs:
            out |= (th >= a - tol) & (th <= b + tol)
            if b > TWO_PI:
                out |= th <= (b - TWO_PI) + tol
        return out if np.ndim(theta) else bool(out)

    def union(self, other: "ArcSet") -> "ArcSet":
        return ArcSet(self.arcs + other.arcs)

    def subtract_open(self, other: "ArcSet") -> "ArcSet":
        """Remove the interiors of other's arcs (result stays closed)."""
        if other.is_empty() or self.is_empty():
            return ArcSet(self.arcs)
        if other.is_full():
            return ArcSet()
        result = []
        for (a, b) in self.arcs:
            segs = [(a, b)]
            for (c0, d0) in other.arcs:
                nxt = []
                for (s, e) in segs:
                    nxt.extend(_cut(s, e, c0, d0))
                segs = nxt
            result.extend(segs)
        return ArcSet([seg for seg in result if seg[1] - seg[0] > 1e-14])

    def shrink(self, margin: float) -> "ArcSet":
        """Shrink every arc inward by margin at each end; drop emptied arcs."""
        if self.is_full():
            return ArcSet(self.arcs)
        out = []
        for (a, b) in self.arcs:
            if b - a > 2.0 * margin:
                out.append((a + margin, b - margin))
        return ArcSet(out)

    def sample(self, per_arc: int) -> np.ndarray:
        """Equispaced sample angles covering every arc (including endpoints)."""
        ts = []
        for (a, b) in self.arcs:
            if self.is_full():
                ts.append(np.linspace(0.0, TWO_PI, per_arc, endpoint=False))
            else:
                ts.append(np.linspace(a, b, max(per_arc, 2)))
        return np.mod(np.concatenate(ts), TWO_PI) if ts else np.empty(0)

    def min_angular_gap(self, other: "ArcSet") -> float:
        """Minimum angular distance between the two arc sets (0 if touching)."""
        best = math.pi
        for (a, b) in self.arcs:
            for (c0, d0) in other.arcs:
                best = min(best, _interval_gap(a, b, c0, d0))
        return best

    def min_chord_gap(self, other: "ArcSet") -> float:
        """Minimum Euclidean chord distance between the two arc sets."""
        g = self.min_angular_gap(other)
        return 2.0 * math.sin(min(g, math.pi) / 2.0)

    def boundary_points(self) -> np.ndarray:
        """Complex boundary points of the arcs' endpoints."""
        ends = [a for (a, _) in self.arcs] + [b for (_, b) in self.arcs]
        return np.exp(1j * np.asarray(ends))

    def __repr__(self):
        return f"ArcSet({self.arcs})"


def _cut(s, e, c, d):
    """Remove the open interval (c, d) (circle-wrapped) from the arc [s, e]."""
    segs = [(s, e)]
    # compare on an unwrapped line: replicate the cut at +-2*pi
    for shift in (-TWO_PI, 0.0, TWO_PI):
        cc, dd = c + shift, d + shift
        nxt = []
        for (a, b) in segs:
            if dd <= a or cc >= b:
                nxt.append((a, b))
                continue
            if cc > a:
                nxt.append((a, cc))
            if dd < b:
                nxt.append((dd, b))
        segs = nxt
    return segs


def _interval_gap(a, b, c, d):
    """Angular gap between closed arcs [a,b] and [c,d] on the circle."""
    # sample-free: gap is min over end-point pair distances unless overlapping
    for shift in (-TWO_PI, 0.0, TWO_PI):
        if max(a, c + shift) <= min(b, d + shift):
            return 0.0
    cands = []
    for x in (a, b):
        for y in (c, d):
            cands.append(float(ang_dist(x, y)))
    return min(cands)
