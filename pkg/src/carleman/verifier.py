"""Numerical certification of density and boundary-approach conclusions.

Density profiles measure the area ratio of the good set in shrinking discs
around boundary probe points: exact lens-geometry denominators, seeded
Monte Carlo numerators, and the certificate bound assembled from the shell
budgets plus a wedge term.  Approach profiles measure the sup distance of
the final polynomial from the boundary datum over good-set samples in
dyadic annulus bands shrinking toward each probe.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from carleman.arcs import TWO_PI, ang_dist
from carleman.chaplet import ChapletSet
from carleman.geometry import Ball, Domain, UNIT_DISC, ball_domain_area, uniform_in_ball

__all__ = [
    "GoodSet",
    "DensityRow",
    "DensityProfile",
    "ApproachBand",
    "ApproachProfile",
    "density_profile",
    "approach_profile",
    "write_density_csv",
    "write_approach_csv",
]


@dataclass
class GoodSet:
    """Decidable membership in the certified good region.

    Base predicate: inside the domain, outside every shell, outside every
    jump wedge.  With require_component the point must additionally lie in
    some chaplet component (where the polynomial error is certified); the
    base predicate alone is the one whose boundary density is budgeted.
    """

    ch: ChapletSet
    ext: object  # ContinuousExtension
    require_component: bool = False

    def contains(self, z, d: Domain = UNIT_DISC):
        z = np.asarray(z, dtype=complex)
        ok = d.contains(z) if isinstance(z, np.ndarray) else np.asarray(d.contains(z))
        ok = ok & ~self.ch.in_any_shell(z)
        ok = ok & ~self.ext.in_wedge(z)
        if self.require_component:
            ok = ok & self.ch.in_any_component(z)
        return ok


@dataclass
class DensityRow:
    radius: float
    good_ratio: float
    bad_ratio: float
    stderr: float
    bound: float
    n_samples: int
    starved: bool

    def in_bound(self) -> bool:
        return self.starved or self.bad_ratio <= self.bound + 3.0 * self.stderr


@dataclass
class DensityProfile:
    theta: float
    rows: list = field(default_factory=list)
    seed_derivation: str = ""

    def all_in_bound(self) -> bool:
        return all(r.in_bound() for r in self.rows)

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "seed_derivation": self.seed_derivation,
            "rows": [
                {
                    "radius": r.radius,
                    "good_ratio": r.good_ratio,
                    "bad_ratio": r.bad_ratio,
                    "stderr": r.stderr,
                    "bound": r.bound,
                    "n_samples": r.n_samples,
                    "starved": r.starved,
                }
                for r in self.rows
            ],
        }


def _wedge_term(ext, theta: float, r: float) -> float:
    """Area-ratio bound of the wedges inside B(e^{i theta}, r).

    A wedge point within r of the boundary sits at depth at most r, hence
    within angular half-width r^2 of its jump angle; if even the closest
    wedge point stays chord-distance r away the contribution is exactly 0.
    Otherwise the wedge slice area is below 2 r^3 / 3 against the half-disc
    denominator pi r^2 / 2.
    """
    total = 0.0
    for w in ext.wedges:
        gap = ang_dist(theta, w.alpha) - min(r * r, w.max_halfwidth)
        if 2.0 * math.sin(max(gap, 0.0) / 2.0) > r:
            continue
        total += (2.0 * r**3 / 3.0) / (math.pi * r**2 / 2.0)
    return total


def _shell_term(ch: ChapletSet, r: float) -> float:
    return sum(s.budget for s in ch.shells if r >= s.r0)


def density_profile(
    good: GoodSet,
    theta: float,
    radii,
    n_samples: int = 100_000,
    seed: int = 0,
    point_index: int = 0,
    d: Domain = UNIT_DISC,
    min_samples: int = 100,
) -> DensityProfile:
    """Monte Carlo density rows at one boundary probe.

    Streams are seeded per (point, radius) through a SeedSequence over
    (seed, point_index, radius_index), so profiles are reproducible and
    independent of evaluation order.
    """
    p = complex(np.exp(1j * theta))
    prof = DensityProfile(
        theta=float(np.mod(theta, TWO_PI)),
        seed_derivation=f"SeedSequence([{seed}, {point_index}, radius_index])",
    )
    for r_idx, r in enumerate(radii):
        rng = np.random.default_rng(
            np.random.SeedSequence([int(seed), int(point_index), int(r_idx)])
        )
        pts = uniform_in_ball(rng, Ball(p, float(r)), n_samples)
        pts = pts[d.contains(pts)]
        n = len(pts)
        if n < min_samples:
            prof.rows.append(DensityRow(float(r), 0.0, 0.0, 0.0, 0.0, n, True))
            continue
        good_mask = good.contains(pts, d)
        q = float(np.mean(~good_mask))
        stderr = math.sqrt(max(q * (1.0 - q), 1.0 / n) / n)
        bound = _shell_term(good.ch, float(r)) + _wedge_term(good.ext, theta, float(r))
        prof.rows.append(
            DensityRow(
                radius=float(r),
                good_ratio=1.0 - q,
                bad_ratio=q,
                stderr=stderr,
                bound=bound,
                n_samples=n,
                starved=False,
            )
        )
    return prof


@dataclass
class ApproachBand:
    band_index: int
    band_inner_r: float
    sup_error: float
    budget: float
    n_samples: int
    empty: bool

    def in_budget(self) -> bool:
        return self.empty or self.sup_error <= self.budget


@dataclass
class ApproachProfile:
    theta: float
    psi_value: complex
    certified: bool  # probe lies in the continuity set S
    bands: list = field(default_factory=list)

    def nonempty(self):
        return [b for b in self.bands if not b.empty]

    def passes(self) -> bool:
        """Last nonempty band at most the first, and within its own budget."""
        if not self.certified:
            return True
        ne = self.nonempty()
        if not ne:
            return False
        return ne[-1].sup_error <= ne[0].sup_error + 1e-12 and ne[-1].in_budget()

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "psi_re": complex(self.psi_value).real,
            "psi_im": complex(self.psi_value).imag,
            "certified": self.certified,
            "bands": [
                {
                    "band_index": b.band_index,
                    "band_inner_r": b.band_inner_r,
                    "sup_error": b.sup_error,
                    "budget": b.budget,
                    "n_samples": b.n_samples,
                    "empty": b.empty,
                }
                for b in self.bands
            ],
        }


def approach_profile(
    f,
    psi,
    theta: float,
    good: GoodSet,
    cert,
    bands: int = 3,
    d: Domain = UNIT_DISC,
) -> ApproachProfile:
    """Per-band sup of |f - psi(theta)| over certified good-set samples.

    Band k is the annulus 1 - 2^-k <= |z| < 1 - 2^-(k+1) cut with the disc
    B(e^{i theta}, 2^(-k+1)).  Samples come from the component verify
    clouds (the certified set); each band's budget is twice the telescoped
    bound of the deepest contributing component plus the worst admissible
    anchor oscillation 1/l over contributing balls.
    """
    if bands < 3:
        raise ValueError("need at least 3 bands")
    p = complex(np.exp(1j * theta))
    target = complex(psi(theta))
    ch = good.ch
    certified = bool(psi.s_arcs.contains(float(np.mod(theta, TWO_PI)), tol=1e-12))
    prof = ApproachProfile(
        theta=float(np.mod(theta, TWO_PI)), psi_value=target, certified=certified
    )
    comp_bound = {cb.comp_id: cb.bound for cb in cert.components}
    for k in range(bands):
        r_in = 1.0 - 2.0**-k
        r_out = 1.0 - 2.0 ** -(k + 1)
        reach = 2.0 ** (-k + 1)
        pts_parts, bounds, l_vals = [], [], []
        for c in ch.components:
            sel = c.verify[
                (np.abs(c.verify) >= r_in)
                & (np.abs(c.verify) < r_out)
                & (np.abs(c.verify - p) <= reach)
            ]
            if len(sel) == 0:
                continue
            sel = sel[np.asarray(good.contains(sel, d), dtype=bool)]
            if len(sel) == 0:
                continue
            pts_parts.append(sel)
            bounds.append(comp_bound[c.comp_id])
            l_vals.append(c.ball_index)
        if not pts_parts:
            prof.bands.append(ApproachBand(k, r_in, 0.0, 0.0, 0, True))
            continue
        pts = np.concatenate(pts_parts)
        sup = float(np.max(np.abs(np.asarray(f(pts), dtype=complex) - target)))
        budget = 2.0 * (max(bounds) + 1.0 / min(l_vals))
        prof.bands.append(
            ApproachBand(k, r_in, sup, budget, len(pts), False)
        )
    return prof


def write_density_csv(profiles: list, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point_theta", "radius", "good_ratio", "bad_ratio", "stderr", "bound"])
        for prof in profiles:
            for r in prof.rows:
                w.writerow(
                    [
                        repr(prof.theta),
                        repr(r.radius),
                        repr(r.good_ratio),
                        repr(r.bad_ratio),
                        repr(r.stderr),
                        repr(r.bound),
                    ]
                )


def write_approach_csv(profiles: list, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point_theta", "band_index", "band_inner_r", "sup_error", "budget"])
        for prof in profiles:
            for b in prof.bands:
                w.writerow(
                    [
                        repr(prof.theta),
                        b.band_index,
                        repr(b.band_inner_r),
                        repr(b.sup_error),
                        repr(b.budget),
                    ]
                )
