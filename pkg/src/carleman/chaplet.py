"""Ball cover, budgeted shells, chaplet components, and the compatible exhaustion.

The construction removes a thin open shell around every cover-ball boundary
circle from the domain; the remainder decomposes into a locally finite
family of disjoint compact components, one batch per cover ball.  Each
shell carries a dyadic density budget certified against boundary probes,
and the complement of the component family stays connected (checked by a
grid flood fill, with sub-grid shells fattened to grid resolution so the
shell network is visible to the grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from carleman.geometry import (
    Ball,
    Domain,
    Shell,
    ball_domain_area,
    dist_to_boundary,
)

__all__ = [
    "BallCover",
    "ShellSpec",
    "Component",
    "ChapletSet",
    "Exhaustion",
    "ConnectivityCertificate",
    "cover_balls",
    "build_shells",
    "assemble_chaplet",
    "check_complement_connected",
    "check_kq",
    "compatible_exhaustion",
]

MACHINE_EPS = np.finfo(float).eps


def wedge_mask(ext):
    """Point mask of the open jump wedges of a continuous extension."""

    def mask(z):
        return ext.in_wedge(z)

    return mask


def corridor_clearance_mask(ext, clearance: float, lookback: float = 0.22):
    """Mask of points within Euclidean `clearance` of any jump wedge.

    Conservative per point: the wedge half-width is taken at the point's
    radius minus `lookback` (balls placed for the point extend that far
    inward, where wedges are wider), and the clearance is converted to an
    angular slack at the point's radius.  Used as the coverage-target
    exclusion so every target point admits a ball that stays clear of the
    wedges themselves.
    """
    from carleman.arcs import ang_dist

    def mask(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        rho = np.abs(z)
        th = np.angle(z)
        # all wedges meet at the origin; exclude a small core outright
        out = rho < 2.0 * clearance
        deep = np.maximum(rho - lookback, 0.0)
        for w in ext.wedges:
            hw = np.minimum((1.0 - deep) ** 2, w.max_halfwidth)
            slack = 2.0 * np.arcsin(
                np.minimum(1.0, clearance / (2.0 * np.maximum(rho, 1e-9)))
            )
            out = out | (ang_dist(th, w.alpha) < hw + slack)
        return out

    return mask


# ---------------------------------------------------------------------------
# ball cover


@dataclass
class BallCover:
    """Closed cover balls with their boundary circles and sampled oscillations.

    Invariants enforced at construction: each ball's diameter is below its
    distance to the domain boundary, no ball contains another, and the
    sampled oscillation of the extension on ball l is below 1/l.
    """

    balls: list  # list[Ball], emission order
    oscillations: list  # sampled oscillation of u per ball
    stage_of_ball: list  # stage index (1-based) each ball was emitted for
    coverage_points: np.ndarray  # grid points certified covered
    uncovered_points: np.ndarray  # grid points of the target left uncovered

    def circles(self):
        return [(b.center, b.radius) for b in self.balls]

    def covers(self, z):
        """Open-ball membership of points in the cover's union of interiors."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for b in self.balls:
            out |= np.abs(z - b.center) < b.radius
        return out


def _oscillation(u, ball: Ball, rings: int = 5, spokes: int = 16) -> float:
    """Sampled oscillation of u over a closed ball (polar sample grid)."""
    rs = np.linspace(0.0, 1.0, rings + 1)[1:]
    th = np.linspace(0.0, 2.0 * math.pi, spokes, endpoint=False)
    pts = (ball.center + np.outer(rs, np.exp(1j * th)) * ball.radius).reshape(-1)
    pts = np.concatenate([pts, [ball.center]])
    vals = np.asarray(u(pts), dtype=complex)
    return float(
        (vals.real.max() - vals.real.min()) + (vals.imag.max() - vals.imag.min())
    )


@dataclass(frozen=True)
class StageBand:
    """Radial annulus a cover stage works in.

    Balls of the stage stay radially within [extent_inner, extent_outer];
    the stage's coverage target is the annulus [cover_inner, cover_outer]
    (minus any avoided region).  Deliberate radial gaps between consecutive
    extents leave room for exhaustion circles that miss every ball.

    windows: optional angular (lo, hi) pairs in radians.  When given, the
    coverage target is restricted to those sectors and balls are confined
    angularly inside the window that holds them, so the set stays well clear
    of the jump corridors and the welded fits only ever bridge wide gaps.
    """

    extent_inner: float
    extent_outer: float
    cover_inner: float
    cover_outer: float
    windows: tuple = ()

    def __post_init__(self):
        if not (
            self.extent_inner
            <= self.cover_inner
            <= self.cover_outer
            <= self.extent_outer
        ):
            raise ValueError("cover band must sit inside the extent band")
        for lo, hi in self.windows:
            if not hi > lo:
                raise ValueError("angular window must have hi > lo")

    def window_margin(self, theta) -> float:
        """Angular slack from theta to the edges of its window (wrap-aware).

        Negative when theta lies in no window.
        """
        if not self.windows:
            return math.pi
        best = -math.inf
        t = float(np.mod(theta, 2.0 * math.pi))
        for lo, hi in self.windows:
            for shift in (-2.0 * math.pi, 0.0, 2.0 * math.pi):
                ts = t + shift
                if lo <= ts <= hi:
                    best = max(best, min(ts - lo, hi - ts))
        return best

    def in_windows(self, theta, margin: float = 0.0):
        """Vectorized membership of angles in the windows shrunk by margin."""
        th = np.mod(np.asarray(theta, dtype=float), 2.0 * math.pi)
        if not self.windows:
            return np.ones(th.shape, dtype=bool)
        ok = np.zeros(th.shape, dtype=bool)
        for lo, hi in self.windows:
            for shift in (-2.0 * math.pi, 0.0, 2.0 * math.pi):
                ok |= (th + shift >= lo + margin) & (th + shift <= hi - margin)
        return ok


def cover_balls(
    d: Domain,
    u,
    stage_radius,
    c: float,
    avoid=None,
    target_avoid=None,
    grid_step: float = 0.02,
    max_balls: int = 64,
) -> BallCover:
    """Greedy ball cover of the truncated domain.

    stage_radius is either a single truncation radius rho_max (one stage
    covering {|z| <= rho_max}) or a list of StageBand.  Ball radius is
    c * dist-to-boundary, capped so the diameter stays below the ball's
    distance to the domain boundary, confined to the stage's extent band,
    and shrunk until the sampled oscillation of u is below 1/l for emission
    index l.

    avoid: optional point mask the balls must stay disjoint from (jump
    corridors, so each ball sees a single continuity sector of u).
    target_avoid: optional wider mask whose grid points are exempt from the
    coverage requirement; defaults to avoid.  Coverage is certified with a
    safety margin of one grid step, so any point of the target within one
    step of a certified grid point lies in some ball interior.
    """
    if not 0.0 < c < 0.5:
        raise ValueError("cover fraction c must lie in (0, 1/2)")
    if np.isscalar(stage_radius):
        rho = float(stage_radius)
        if rho >= 1.0:
            raise ValueError("truncation radius must stay below 1")
        bands = [StageBand(0.0, 1.0, 0.0, rho)]
    else:
        bands = list(stage_radius)
    if target_avoid is None:
        target_avoid = avoid
    margin = grid_step

    balls: list[Ball] = []
    oscs: list[float] = []
    stage_ids: list[int] = []
    covered_pts = []
    uncovered_pts = []

    for stage_idx, band in enumerate(bands, start=1):
        if band.cover_outer >= 1.0:
            raise ValueError("stage cover radius must stay below 1")
        pts = _annulus_grid(band.cover_inner, band.cover_outer, grid_step, d)
        if band.windows and len(pts):
            # confinement caps ball radius near window edges; pull the
            # coverage target in by two grid steps so edge points stay
            # reachable by a ball centred deeper in the window
            edge = 2.0 * grid_step / max(band.cover_inner, grid_step)
            pts = pts[band.in_windows(np.angle(pts), margin=edge)]
        if target_avoid is not None and len(pts):
            pts = pts[~np.asarray(target_avoid(pts), dtype=bool)]
        # deterministic order: angular sweep, inner radii first within a ray
        order = np.lexsort((np.round(np.abs(pts), 9), np.round(np.angle(pts), 9)))
        pts = pts[order]
        covered = np.zeros(len(pts), dtype=bool)
        for b in balls:
            covered |= np.abs(pts - b.center) < b.radius - margin
        while not covered.all():
            idx = int(np.argmin(covered))
            l = len(balls) + 1
            if l > max_balls:
                uncovered_pts.append(pts[~covered])
                break
            center, r = _place_ball(
                complex(pts[idx]), band, d, c, avoid, balls, grid_step
            )
            if r <= grid_step / 2.0:
                # no useful ball fits here; record the point as uncovered
                covered[idx] = True
                uncovered_pts.append(pts[idx : idx + 1])
                continue
            # shrink until the oscillation target 1/l is met
            shrinks = 0
            while True:
                osc = _oscillation(u, Ball(center, r))
                if osc < 1.0 / l:
                    break
                r *= 0.7
                shrinks += 1
                if shrinks > 60:
                    raise RuntimeError(
                        f"oscillation target 1/{l} unreachable at {center}"
                    )
            if abs(center - pts[idx]) >= r - margin or _containment_conflict(
                center, r, balls
            ):
                covered[idx] = True
                uncovered_pts.append(pts[idx : idx + 1])
                continue
            balls.append(Ball(center, r))
            oscs.append(osc)
            stage_ids.append(stage_idx)
            covered |= np.abs(pts - center) < r - margin
        covered_pts.append(pts[covered])

    balls, oscs, stage_ids = _prune_cover(balls, oscs, stage_ids, covered_pts, margin)

    for b in balls:
        dist = dist_to_boundary(b.center, d)
        if 2.0 * b.radius >= dist - b.radius:
            raise AssertionError("ball diameter exceeds distance to boundary")
    cov = np.concatenate(covered_pts) if covered_pts else np.empty(0, complex)
    unc = np.concatenate(uncovered_pts) if uncovered_pts else np.empty(0, complex)
    return BallCover(
        balls=balls,
        oscillations=oscs,
        stage_of_ball=stage_ids,
        coverage_points=cov,
        uncovered_points=unc,
    )


def _place_ball(point, band: StageBand, d, c, avoid, balls, grid_step):
    """Center and radius for a ball meant to engulf an uncovered grid point.

    Candidate centers sit on the extent band's midline at the point's angle
    and at small angular offsets to either side (so points hugging an
    avoided region get swallowed by a ball pushed away from it), plus the
    point itself; the largest admissible ball containing the point wins.
    """
    mid = 0.5 * (band.extent_inner + band.extent_outer)
    # forward offsets first: the sweep runs by increasing angle, so pushing
    # the center ahead of the point roughly doubles each ball's fresh reach
    candidates = []
    if abs(point) > 1e-12:
        ray = point / abs(point)
        for phi in (0.40, 0.32, 0.24, 0.16, 0.08, 0.0, -0.08, -0.16, -0.24, -0.32):
            candidates.append(mid * ray * np.exp(1j * phi))
    else:
        candidates.append(complex(0.0) if band.extent_inner == 0.0 else complex(mid))
    candidates.append(point)
    scored = []
    for center in candidates:
        dist = dist_to_boundary(center, d)
        r = min(c * dist, dist / 3.0 * 0.98)
        rad = abs(center)
        if band.extent_outer < 1.0:
            r = min(r, band.extent_outer - rad)
        if band.extent_inner > 0.0:
            r = min(r, rad - band.extent_inner)
        if band.windows:
            m = band.window_margin(np.angle(center))
            if m <= 0.0:
                continue
            r = min(r, rad * math.sin(min(m, 0.5 * math.pi)))
        if avoid is not None and r > 0:
            r = min(r, _dist_to_mask(center, avoid, r))
        # cap so this ball cannot swallow an earlier one
        for b in balls:
            gap = abs(center - b.center)
            if r >= gap + b.radius:
                r = 0.98 * (gap + b.radius)
        if r > 0 and abs(center - point) < r - grid_step:
            scored.append((center, r))
    if not scored:
        return point, 0.0
    r_max = max(r for _, r in scored)
    # earliest (most forward) candidate within 2% of the best radius wins
    for center, r in scored:
        if r >= 0.98 * r_max:
            return center, r
    return scored[0]


def _containment_conflict(center, r, balls) -> bool:
    for b in balls:
        gap = abs(center - b.center)
        if gap + r <= b.radius or gap + b.radius <= r:
            return True
    return False


def _prune_cover(balls, oscs, stage_ids, covered_pts, margin):
    """Reverse-delete pass: drop any ball whose certified points all have a
    second coverer.  Greedy emission over-covers near band seams; pruning is
    safe because the margin-coverage certificate is rechecked, and dropping
    a ball only lowers later emission indices, relaxing their 1/l targets."""
    if not balls:
        return balls, oscs, stage_ids
    pts = np.concatenate([p for p in covered_pts if len(p)]) if covered_pts else None
    if pts is None or len(pts) == 0:
        return balls, oscs, stage_ids
    cover_mat = np.stack(
        [np.abs(pts - b.center) < b.radius - margin for b in balls]
    )
    counts = cover_mat.sum(axis=0)
    keep = [True] * len(balls)
    for i in range(len(balls) - 1, -1, -1):
        mine = cover_mat[i]
        if np.all(counts[mine] >= 2):
            keep[i] = False
            counts = counts - mine
    return (
        [b for b, k in zip(balls, keep) if k],
        [o for o, k in zip(oscs, keep) if k],
        [s for s, k in zip(stage_ids, keep) if k],
    )


def _annulus_grid(r_in, r_out, step, d: Domain) -> np.ndarray:
    n = int(math.ceil(2.0 * r_out / step)) + 1
    xs = np.linspace(-r_out, r_out, n)
    X, Y = np.meshgrid(xs, xs)
    Z = (X + 1j * Y).reshape(-1)
    R = np.abs(Z)
    mask = (R >= r_in) & (R <= r_out) & d.contains(Z)
    return Z[mask]


def _dist_to_mask(center: complex, avoid, r_max: float) -> float:
    """Bisect the largest radius whose ball misses the avoid mask (sampled)."""
    th = np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 48, endpoint=False))
    lo, hi = 0.0, r_max
    for _ in range(24):
        mid = 0.5 * (lo + hi)
        ring = center + mid * th
        if np.any(avoid(ring)):
            hi = mid
        else:
            lo = mid
    return lo


# ---------------------------------------------------------------------------
# shells


@dataclass
class ShellSpec:
    """Shell around circle s_j with its certified density budget 2^-j."""

    index: int  # 1-based budget index j
    shell: Shell
    budget: float  # 2^-j
    r0: float  # vacuity radius: B(p, r) misses the shell for r < r0
    rho: float  # min boundary-ball mass used in the area budget
    certificate: list = field(default_factory=list)  # (theta, r, bound) rows


def build_shells(
    cover: BallCover,
    d: Domain,
    probes: np.ndarray | None = None,
    n_probes: int = 256,
    eps_geom: float = 5e-3,
    cert_radii=None,
) -> list:
    """Budgeted shells around every cover-ball boundary circle.

    Half-thickness tau_j = min(eps_geom, half the area-budget thickness,
    a quarter of the minimal gap to non-intersecting circles); the area
    budget makes area(R_j) < 2^-j * rho_j with rho_j the minimal mass of
    B(p, d_j / 2) over boundary probes, d_j the circle's distance to the
    domain boundary.
    """
    if probes is None:
        probes = d.boundary_points(n_probes)
    shells: list[ShellSpec] = []
    circles = [(b.center, b.radius) for b in cover.balls]
    for j, (center, r_l) in enumerate(circles, start=1):
        d_j = dist_to_boundary(center, d) - r_l
        if d_j <= 0:
            raise ValueError(f"circle {j} touches the domain boundary")
        r0 = d_j / 2.0
        rho = min(ball_domain_area(Ball(p, r0), d) for p in probes)
        budget = 2.0 ** -j
        # area(R_j) = 4*pi*r_l*tau  <  budget * rho, with safety factor 1/2
        tau_budget = 0.5 * budget * rho / (4.0 * math.pi * r_l)
        tau = min(eps_geom, tau_budget, r_l / 4.0)
        # disjointness cap: shells of non-intersecting circles stay disjoint
        for (c2, r2) in circles:
            if (c2, r2) == (center, r_l):
                continue
            gap = _circle_gap(center, r_l, c2, r2)
            if gap > 0:
                tau = min(tau, gap / 4.0)
        if tau <= MACHINE_EPS:
            raise ValueError(
                f"shell {j}: required half-thickness {tau_budget:.3e} is below "
                "machine epsilon; reduce the number of cover balls"
            )
        shell = Shell(center=center, circle_radius=r_l, tau=tau)
        cert = []
        radii = cert_radii if cert_radii is not None else [2.0 ** -k for k in range(1, 8)]
        for p in probes[:: max(1, len(probes) // 16)]:
            for r in radii:
                if r < r0:
                    bound = 0.0
                else:
                    bound = shell.area() / ball_domain_area(Ball(p, r), d)
                if bound >= budget:
                    raise AssertionError(
                        f"shell {j} violates its budget at probe {p}, r={r}"
                    )
                cert.append((float(np.angle(p)), float(r), float(bound)))
        shells.append(
            ShellSpec(index=j, shell=shell, budget=budget, r0=r0, rho=rho, certificate=cert)
        )
    return shells


def _circle_gap(c1, r1, c2, r2) -> float:
    """Minimal distance between two circles (0 if they intersect)."""
    D = abs(c1 - c2)
    if D >= r1 + r2:
        return D - (r1 + r2)
    big, small = (r1, r2) if r1 >= r2 else (r2, r1)
    if D + small <= big:
        return big - (D + small)
    return 0.0


# ---------------------------------------------------------------------------
# chaplet assembly


@dataclass
class Component:
    """One compact chaplet component: a signed cell of a cover ball.

    Membership: closed ball of owner minus open shells minus open interiors
    of earlier balls, intersected with the cell where each cutting circle's
    inside/outside sign matches this component's signature.
    """

    comp_id: int
    ball_index: int  # 1-based owner ball
    signature: tuple  # ((circle_index, side), ...) for cutting circles
    samples: np.ndarray
    verify: np.ndarray
    anchor: complex
    anchor_depth: float
    stage: int = 0  # assigned by the exhaustion
    dilation: float = 0.0  # radius of the disjoint neighbourhood V_j

    def min_modulus(self) -> float:
        return float(np.min(np.abs(self.verify)))

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.verify)))


@dataclass
class ChapletSet:
    """Disjoint compact components tiling the covered region minus shells."""

    cover: BallCover
    shells: list  # list[ShellSpec]
    components: list  # list[Component]
    dropped_empty: int = 0

    def membership(self, z, comp: Component):
        z = np.asarray(z, dtype=complex)
        balls = self.cover.balls
        owner = balls[comp.ball_index - 1]
        ok = np.abs(z - owner.center) <= owner.radius
        for k in range(comp.ball_index - 1):
            ok &= np.abs(z - balls[k].center) >= balls[k].radius
        for spec in self.shells:
            ok &= ~spec.shell.contains_open(z)
        for (ci, side) in comp.signature:
            b = balls[ci - 1]
            dist = np.abs(z - b.center)
            if side > 0:
                ok &= dist >= b.radius
            else:
                ok &= dist <= b.radius
        return ok

    def in_any_component(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for comp in self.components:
            out |= self.membership(z, comp)
        return out

    def in_any_shell(self, z, fatten: float = 0.0):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for spec in self.shells:
            s = spec.shell
            tau = max(s.tau, fatten)
            dd = np.abs(z - s.center)
            out |= (dd > s.circle_radius - tau) & (dd < s.circle_radius + tau)
        return out

    def to_json(self) -> dict:
        return {
            "balls": [
                {"re": b.center.real, "im": b.center.imag, "r": b.radius}
                for b in self.cover.balls
            ],
            "oscillations": list(map(float, self.cover.oscillations)),
            "stage_of_ball": list(self.cover.stage_of_ball),
            "shells": [
                {
                    "index": s.index,
                    "re": s.shell.center.real,
                    "im": s.shell.center.imag,
                    "circle_radius": s.shell.circle_radius,
                    "tau": s.shell.tau,
                    "budget": s.budget,
                    "r0": s.r0,
                    "rho": s.rho,
                }
                for s in self.shells
            ],
            "components": [
                {
                    "id": c.comp_id,
                    "ball": c.ball_index,
                    "signature": [list(sig) for sig in c.signature],
                    "anchor_re": c.anchor.real,
                    "anchor_im": c.anchor.imag,
                    "anchor_depth": c.anchor_depth,
                    "stage": c.stage,
                    "dilation": c.dilation,
                    "n_samples": int(len(c.samples)),
                }
                for c in self.components
            ],
            "dropped_empty": self.dropped_empty,
        }


def assemble_chaplet(
    cover: BallCover,
    shells: list,
    d: Domain,
    grid_step: float = 0.01,
) -> ChapletSet:
    """Materialize chaplet components with sample clouds and anchors.

    Component cells within each ball are separated by the signatures of the
    cutting circles (which side of every other circle crossing the ball a
    point lies on), matching the grid connected-component structure for
    round shells.  Empty cells are dropped with renumbering recorded.
    """
    balls = cover.balls
    comps: list[Component] = []
    dropped = 0
    next_id = 1
    for j, ball in enumerate(balls, start=1):
        pts = _ball_grid(ball, grid_step)
        fine = _ball_grid(ball, grid_step / 2.0)
        keep = np.ones(len(pts), dtype=bool)
        keep_f = np.ones(len(fine), dtype=bool)
        for k in range(j - 1):
            keep &= np.abs(pts - balls[k].center) >= balls[k].radius
            keep_f &= np.abs(fine - balls[k].center) >= balls[k].radius
        for spec in shells:
            keep &= ~spec.shell.contains_open(pts)
            keep_f &= ~spec.shell.contains_open(fine)
        pts, fine = pts[keep], fine[keep_f]
        if len(pts) == 0:
            dropped += 1
            continue
        cutters = [
            k + 1
            for k, other in enumerate(balls)
            if k + 1 != j and _circle_cuts_ball(other, ball)
        ]
        sig_pts = _signatures(pts, cutters, balls)
        sig_fine = _signatures(fine, cutters, balls)
        for sig in sorted(set(map(tuple, sig_pts))):
            mask = np.all(sig_pts == np.asarray(sig), axis=1) if cutters else np.ones(
                len(pts), dtype=bool
            )
            mask_f = (
                np.all(sig_fine == np.asarray(sig), axis=1)
                if cutters
                else np.ones(len(fine), dtype=bool)
            )
            cell = pts[mask]
            cell_f = fine[mask_f]
            if len(cell) == 0:
                dropped += 1
                continue
            depth = 1.0 - np.abs(cell)
            if d.kind == "annulus":
                depth = np.minimum(depth, np.abs(cell) - d.inner_radius)
            a_idx = int(np.argmax(np.round(depth, 12)))
            signature = tuple(
                (ci, int(s)) for ci, s in zip(cutters, sig)
            )
            comps.append(
                Component(
                    comp_id=next_id,
                    ball_index=j,
                    signature=signature,
                    samples=cell,
                    verify=cell_f if len(cell_f) else cell,
                    anchor=complex(cell[a_idx]),
                    anchor_depth=float(depth[a_idx]),
                )
            )
            next_id += 1
    ch = ChapletSet(cover=cover, shells=shells, components=comps, dropped_empty=dropped)
    _assign_dilations(ch)
    return ch


def _ball_grid(ball: Ball, step: float) -> np.ndarray:
    r = ball.radius
    n = max(3, int(math.ceil(2.0 * r / step)) + 1)
    xs = np.linspace(-r, r, n)
    X, Y = np.meshgrid(xs, xs)
    Z = ball.center + (X + 1j * Y).reshape(-1)
    return Z[np.abs(Z - ball.center) <= r]


def _circle_cuts_ball(other: Ball, ball: Ball) -> bool:
    D = abs(other.center - ball.center)
    return abs(D - other.radius) < ball.radius


def _signatures(pts, cutters, balls):
    if not cutters:
        return np.zeros((len(pts), 0), dtype=int)
    cols = []
    for ci in cutters:
        b = balls[ci - 1]
        cols.append(np.where(np.abs(pts - b.center) >= b.radius, 1, -1))
    return np.stack(cols, axis=1)


def _assign_dilations(ch: ChapletSet):
    """Disjoint neighbourhoods: dilate each component by a quarter of its
    minimal sample gap to the other components."""
    try:
        from scipy.spatial import cKDTree
    except ImportError:  # pragma: no cover
        cKDTree = None
    comps = ch.components
    pts_all = [np.column_stack([c.samples.real, c.samples.imag]) for c in comps]
    for i, c in enumerate(comps):
        best = math.inf
        if cKDTree is not None and len(comps) > 1:
            tree = cKDTree(pts_all[i])
            for k, other in enumerate(comps):
                if k == i:
                    continue
                dmin, _ = tree.query(pts_all[k], k=1)
                best = min(best, float(np.min(dmin)))
        c.dilation = min(best / 4.0, 0.05) if math.isfinite(best) else 0.05


# ---------------------------------------------------------------------------
# connectivity certificate


@dataclass
class ConnectivityCertificate:
    connected: bool
    n_complement_regions: int
    shells_reached: bool
    grid_step: float
    fattened: bool


def check_complement_connected(
    ch: ChapletSet, d: Domain, resolution: float = 1.0 / 512.0
) -> ConnectivityCertificate:
    """Flood-fill certificate that the complement of the component family is
    connected in the one-point compactification of the domain.

    Shells thinner than the grid step are fattened to one grid step for the
    membership test so the shell network is visible to the grid; this
    preserves the complement's topology up to sub-grid gaps and is recorded
    on the certificate.
    """
    n = int(math.ceil(2.0 / resolution)) + 1
    xs = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(xs, xs)
    Z = X + 1j * Y
    in_u = d.contains(Z.reshape(-1)).reshape(Z.shape)
    thinnest = min((s.shell.tau for s in ch.shells), default=math.inf)
    fatten = resolution if thinnest < resolution else 0.0
    flat = Z.reshape(-1)
    in_comp = np.zeros(flat.shape, dtype=bool)
    shell_fat = ch.in_any_shell(flat, fatten=fatten)
    for comp in ch.components:
        in_comp |= ch.membership(flat, comp)
    in_comp &= ~shell_fat  # fattened shells carve channels through components
    complement = (in_u & ~in_comp.reshape(Z.shape)).astype(np.int8)
    labels, n_regions = ndimage.label(complement, structure=np.ones((3, 3), dtype=int))
    if n_regions == 0:
        return ConnectivityCertificate(True, 0, True, resolution, fatten > 0)
    # seed label: the region touching the boundary ring
    ring = np.abs(Z) > 1.0 - 2.0 * resolution
    ring_labels = np.unique(labels[ring & (labels > 0)])
    if len(ring_labels) == 0:
        return ConnectivityCertificate(False, int(n_regions), False, resolution, fatten > 0)
    seed = int(ring_labels[0])
    connected = n_regions == 1
    # every shell must be reached by the seed region
    shells_reached = True
    shell_mask = shell_fat.reshape(Z.shape) & in_u
    for spec in ch.shells:
        s = spec.shell
        tau = max(s.tau, fatten)
        dd = np.abs(Z - s.center)
        m = (dd > s.circle_radius - tau) & (dd < s.circle_radius + tau) & in_u
        if not np.any(m):
            shells_reached = False
            continue
        if not np.any(labels[m] == seed):
            shells_reached = False
    return ConnectivityCertificate(
        connected=bool(connected and shells_reached),
        n_complement_regions=int(n_regions),
        shells_reached=bool(shells_reached),
        grid_step=resolution,
        fattened=fatten > 0,
    )


# ---------------------------------------------------------------------------
# open K-Q condition and the compatible exhaustion


def check_kq(ch: ChapletSet, K: list, margin: float = 0.02):
    """Witness compact disc Q with K in its interior and (chaplet cap Q) in
    its interior; built by swallowing the components that meet K."""
    r_k = max(abs(b.center) + b.radius for b in K)
    radius = r_k + margin
    meets = [
        c
        for c in ch.components
        if any(np.min(np.abs(c.samples - b.center)) <= b.radius for b in K)
    ]
    for c in meets:
        radius = max(radius, c.max_modulus() + margin)
    radius = _nudge_clear(radius, ch, margin)
    if radius >= 1.0:
        raise ValueError("components accumulate on K; no compact witness disc")
    witness = Ball(0.0, radius)
    for c in ch.components:
        mods = np.abs(c.samples)
        if np.any(np.abs(mods - radius) < 1e-12):
            raise AssertionError("witness boundary touches a component")
    return witness


def _nudge_clear(radius: float, ch: ChapletSet, margin: float) -> float:
    """Push the radius outward past any component straddling the circle."""
    changed = True
    while changed and radius < 1.0:
        changed = False
        for c in ch.components:
            lo, hi = c.min_modulus(), c.max_modulus()
            if lo - 1e-12 <= radius <= hi + 1e-12:
                radius = hi + margin
                changed = True
    return radius


@dataclass
class Exhaustion:
    """Closed discs L_n of strictly increasing radii, open compatible with
    the chaplet: every component is inside some L_n's interior and no
    component meets any boundary circle."""

    radii: list

    def stage_of(self, comp: Component) -> int:
        for n, r in enumerate(self.radii, start=1):
            if comp.max_modulus() < r:
                return n
        raise ValueError("component not engulfed by the final stage")


def compatible_exhaustion(
    ch: ChapletSet, stages: int, candidate_radii=None, margin: float = 0.01
) -> Exhaustion:
    """Choose exhaustion radii missing every component (nudging outward past
    straddled components), and assign each component its engulfing stage."""
    if candidate_radii is None:
        hi = max((c.max_modulus() for c in ch.components), default=0.5)
        candidate_radii = list(np.linspace(hi / stages, hi + margin, stages))
    if len(candidate_radii) != stages:
        raise ValueError("need one candidate radius per stage")
    radii = []
    prev = 0.0
    for rho in candidate_radii:
        rho = max(rho, prev + margin)
        rho = _nudge_clear(rho, ch, margin)
        if rho >= 1.0:
            raise ValueError("exhaustion nudging exits the disc")
        radii.append(rho)
        prev = rho
    # final stage must engulf everything
    top = max((c.max_modulus() for c in ch.components), default=0.0)
    if radii[-1] <= top:
        rho = _nudge_clear(top + margin, ch, margin)
        if rho >= 1.0:
            raise ValueError("exhaustion nudging exits the disc")
        radii[-1] = rho
    ex = Exhaustion(radii=radii)
    for c in ch.components:
        c.stage = ex.stage_of(c)
    return ex
