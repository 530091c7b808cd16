"""The staged global-approximation recursion with its telescoping certificate.

Starting from u_0 = 0, each stage n fits one global polynomial correction
that is small on the previous compact disc L_{n-1} and moves u toward the
anchor step function g on the chaplet components newly engulfed by L_n.
Achieved sup errors are measured on independent verification clouds and
accumulated into per-component telescoped bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from carleman import oracle
from carleman.chaplet import ChapletSet, Exhaustion
from carleman.geometry import Domain, UNIT_DISC, dist_to_boundary
from carleman.oracle import FitRequest, StagedPolynomial, zero_polynomial

__all__ = [
    "ToleranceSchedule",
    "AnchorData",
    "StageRecord",
    "ComponentBound",
    "RunCertificate",
    "FitParams",
    "anchor_step_function",
    "run",
    "telescope_bound",
    "disc_cloud",
    "annulus_cloud",
]


@dataclass
class ToleranceSchedule:
    """Per-stage tolerances from the gauge eps(z) = eps0 * dist(z, bd U)^alpha.

    eps[n-1] is the minimum of the gauge over the n-th exhaustion disc,
    attained on its rim; the stage budget is eps_n / 2^n.  The closed-form
    tail majorant eps_n * 2^-(n-1) dominates the finite tail sum for any
    non-increasing schedule.
    """

    eps0: float
    alpha: float
    radii: list
    eps: list = field(default_factory=list)

    def __post_init__(self):
        if self.eps0 <= 0:
            raise ValueError("gauge amplitude must be positive")
        if not self.eps:
            self.eps = [
                self.eps0 * (1.0 - r) ** self.alpha for r in self.radii
            ]
        if any(e <= 0 for e in self.eps):
            raise ValueError("stage tolerances must be positive")
        for a, b in zip(self.eps, self.eps[1:]):
            if b > a + 1e-15:
                raise ValueError("stage tolerances must be non-increasing")
        for n in range(1, len(self.eps) + 1):
            assert self.tail(n) < self.guaranteed_tail(n) + 1e-15

    @classmethod
    def from_values(cls, eps_values) -> "ToleranceSchedule":
        return cls(eps0=1.0, alpha=0.0, radii=[], eps=list(eps_values))

    @property
    def stages(self) -> int:
        return len(self.eps)

    def gauge(self, z) -> float:
        return self.eps0 * dist_to_boundary(complex(z)) ** self.alpha

    def budget(self, n: int) -> float:
        return self.eps[n - 1] / 2.0**n

    def tail(self, n: int) -> float:
        """Finite tail sum of the budgets from stage n on."""
        return sum(self.budget(k) for k in range(n, self.stages + 1))

    def guaranteed_tail(self, n: int) -> float:
        """Closed-form majorant eps_n * 2^-(n-1) of the full infinite tail."""
        return self.eps[n - 1] * 2.0 ** -(n - 1)


@dataclass
class AnchorData:
    """Anchor step-function constants with the oscillation audit.

    values[comp_id] = u(anchor of the component); audit rows record the
    measured sup of |u - value| over component samples against the owning
    ball's oscillation target 1/l.
    """

    values: dict
    audit: list  # (comp_id, ball_index, sup_dev, bound, ok)

    def all_ok(self) -> bool:
        return all(row[4] for row in self.audit)


def anchor_step_function(ch: ChapletSet, u) -> AnchorData:
    """Locally constant targets g_j = u(anchor_j), audited against 1/l."""
    values = {}
    audit = []
    for c in ch.components:
        g = complex(u(c.anchor))
        values[c.comp_id] = g
        dev = float(np.max(np.abs(np.asarray(u(c.samples), dtype=complex) - g)))
        bound = 1.0 / c.ball_index
        audit.append((c.comp_id, c.ball_index, dev, bound, dev < bound))
    return AnchorData(values=values, audit=audit)


@dataclass
class StageRecord:
    stage: int
    degree: int
    err_prev: float  # sup |u_n - u_{n-1}| on the previous disc's verify cloud
    err_new: float  # sup |u_n - g| on newly engulfed components
    budget: float
    passed: bool
    ladder: list = field(default_factory=list)
    n_new_components: int = 0

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "degree": self.degree,
            "err_prev": self.err_prev,
            "err_new": self.err_new,
            "budget": self.budget,
            "passed": self.passed,
            "ladder": [[int(d), float(e)] for d, e in self.ladder],
            "n_new_components": self.n_new_components,
        }


@dataclass
class ComponentBound:
    comp_id: int
    stage: int
    anchor: complex
    g: complex
    omega: float
    bound: float  # telescoped sup bound for |u_N - g| on the component
    eps_at_anchor: float
    within_gauge: bool

    def to_json(self) -> dict:
        return {
            "id": self.comp_id,
            "stage": self.stage,
            "anchor_re": self.anchor.real,
            "anchor_im": self.anchor.imag,
            "g_re": self.g.real,
            "g_im": self.g.imag,
            "omega": self.omega,
            "bound": self.bound,
            "eps_at_anchor": self.eps_at_anchor,
            "within_gauge": self.within_gauge,
        }


@dataclass
class RunCertificate:
    kind: str
    schedule: ToleranceSchedule
    stages: list  # list[StageRecord]
    final: StagedPolynomial
    components: list  # list[ComponentBound]
    all_passed: bool

    def component(self, comp_id: int) -> ComponentBound:
        for cb in self.components:
            if cb.comp_id == comp_id:
                return cb
        raise KeyError(comp_id)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "schedule": {
                "eps0": self.schedule.eps0,
                "alpha": self.schedule.alpha,
                "radii": [float(r) for r in self.schedule.radii],
                "eps": [float(e) for e in self.schedule.eps],
                "budgets": [
                    self.schedule.budget(n) for n in range(1, self.schedule.stages + 1)
                ],
            },
            "stages": [s.to_json() for s in self.stages],
            "components": [c.to_json() for c in self.components],
            "all_passed": self.all_passed,
        }


@dataclass
class FitParams:
    """Cloud resolutions and fitter knobs for the stage corrections."""

    max_degree: int = 256
    refine: int = 12
    inner_step: float = 0.03
    rim_width: float = 0.06
    rim_step: float = 0.012
    rim_ring: int = 400
    verify_inner_step: float = 0.02
    damping_gap: float = 0.02
    damping_outer: float = 0.85
    damping_step: float = 0.04
    damping_weight: float = 0.003


def disc_cloud(radius: float, step: float) -> np.ndarray:
    """Square-lattice points of the closed disc of the given radius."""
    n = int(2.0 * radius / step) + 1
    xs = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(xs, xs)
    Z = (X + 1j * Y).reshape(-1)
    return Z[np.abs(Z) <= radius]


def annulus_cloud(r_in: float, r_out: float, step: float) -> np.ndarray:
    n = int(2.0 * r_out / step) + 1
    xs = np.linspace(-r_out, r_out, n)
    X, Y = np.meshgrid(xs, xs)
    Z = (X + 1j * Y).reshape(-1)
    R = np.abs(Z)
    return Z[(R >= r_in) & (R <= r_out)]


def _ring(radius: float, n: int) -> np.ndarray:
    th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return radius * np.exp(1j * th)


def run(
    ch: ChapletSet,
    ex: Exhaustion,
    anchors: AnchorData,
    sched: ToleranceSchedule,
    kind: str,
    params: FitParams | None = None,
    d: Domain = UNIT_DISC,
) -> RunCertificate:
    """Execute the staged recursion and assemble the certificate.

    Stage n fits a correction with three target groups: g_j - u_{n-1} on the
    newly engulfed components, 0 on a cloud of the previous disc L_{n-1}
    (densified near its rim, where admissible corrections grow fastest), and
    a weakly weighted -u_{n-1} on an outer annulus.  The damping group only
    discourages blow-up beyond the certified region; it carries no
    certificate and is excluded from verification.
    """
    if params is None:
        params = FitParams()
    if sched.stages != len(ex.radii):
        raise ValueError("schedule and exhaustion disagree on the stage count")
    n_stages = sched.stages
    u = StagedPolynomial(kind=kind, parts=[])
    records: list[StageRecord] = []

    def u_eval(z):
        vals = u(np.asarray(z, dtype=complex))
        return np.asarray(vals, dtype=complex)

    for n in range(1, n_stages + 1):
        budget = sched.budget(n)
        new = [c for c in ch.components if c.stage == n]
        if not new and n == 1:
            records.append(
                StageRecord(n, 0, 0.0, 0.0, budget, True, [], 0)
            )
            u = u.extended(zero_polynomial(kind))
            continue
        fit_pts, fit_vals, weights = [], [], []
        if new:
            cp = np.concatenate([c.samples for c in new])
            cv = np.concatenate(
                [np.full(len(c.samples), anchors.values[c.comp_id]) for c in new]
            ) - u_eval(cp)
            fit_pts.append(cp)
            fit_vals.append(cv)
            weights.append(np.ones(len(cp)))
        if n > 1:
            rim = ex.radii[n - 2]
            L = np.concatenate(
                [
                    disc_cloud(rim, params.inner_step),
                    annulus_cloud(
                        max(rim - params.rim_width, 0.0), rim, params.rim_step
                    ),
                    _ring(rim, params.rim_ring),
                ]
            )
            fit_pts.append(L)
            fit_vals.append(np.zeros(len(L)))
            weights.append(np.ones(len(L)))
        if n < n_stages:
            D = annulus_cloud(
                ex.radii[n - 1] + params.damping_gap,
                params.damping_outer,
                params.damping_step,
            )
            fit_pts.append(D)
            fit_vals.append(-u_eval(D))
            weights.append(np.full(len(D), params.damping_weight))

        ver_pts, ver_vals = [], []
        n_comp_verify = 0
        if new:
            vcp = np.concatenate([c.verify for c in new])
            vcv = np.concatenate(
                [np.full(len(c.verify), anchors.values[c.comp_id]) for c in new]
            ) - u_eval(vcp)
            ver_pts.append(vcp)
            ver_vals.append(vcv)
            n_comp_verify = len(vcp)
        if n > 1:
            Lv = disc_cloud(ex.radii[n - 2], params.verify_inner_step)
            ver_pts.append(Lv)
            ver_vals.append(np.zeros(len(Lv)))

        FV = np.concatenate(fit_vals)
        VV = np.concatenate(ver_vals)
        if kind == oracle.LAPLACE:
            FV, VV = FV.real, VV.real
        req = FitRequest(
            fit_points=np.concatenate(fit_pts),
            fit_values=FV,
            verify_points=np.concatenate(ver_pts),
            verify_values=VV,
            tolerance=budget,
            max_degree=params.max_degree,
            weights=np.concatenate(weights),
            refine=params.refine,
        )
        res = oracle.fit(req, kind)
        correction = res.polynomial
        resid = np.abs(
            oracle.evaluate(correction, np.concatenate(ver_pts)) - VV
        )
        err_new = float(np.max(resid[:n_comp_verify])) if n_comp_verify else 0.0
        err_prev = (
            float(np.max(resid[n_comp_verify:]))
            if len(resid) > n_comp_verify
            else 0.0
        )
        passed = err_new < budget and err_prev < budget
        records.append(
            StageRecord(
                stage=n,
                degree=correction.degree,
                err_prev=err_prev,
                err_new=err_new,
                budget=budget,
                passed=passed,
                ladder=res.degree_ladder,
                n_new_components=len(new),
            )
        )
        u = u.extended(correction)

    omega = {}
    for c in ch.components:
        omega[c.comp_id] = ch.cover.oscillations[c.ball_index - 1]
    bounds = []
    for c in ch.components:
        b = _telescope(records, c.stage)
        eps_here = sched.gauge(c.anchor)
        bounds.append(
            ComponentBound(
                comp_id=c.comp_id,
                stage=c.stage,
                anchor=c.anchor,
                g=anchors.values[c.comp_id],
                omega=float(omega[c.comp_id]),
                bound=b,
                eps_at_anchor=eps_here,
                within_gauge=b <= eps_here,
            )
        )
    return RunCertificate(
        kind=kind,
        schedule=sched,
        stages=records,
        final=u,
        components=bounds,
        all_passed=all(r.passed for r in records),
    )


def _telescope(records: list, start_stage: int) -> float:
    """Welding error at the engulfing stage plus later on-disc drifts."""
    total = 0.0
    for rec in records:
        if rec.stage < start_stage:
            continue
        total += rec.err_new if rec.stage == start_stage else rec.err_prev
    return total


def telescope_bound(cert: RunCertificate, comp_id: int) -> float:
    """Guaranteed sup bound for |u_N - g_j| on the component's cell."""
    cb = cert.component(comp_id)
    bound = _telescope(cert.stages, cb.stage)
    if all(r.passed for r in cert.stages):
        budget_sum = sum(r.budget for r in cert.stages if r.stage >= cb.stage)
        assert bound <= budget_sum + 1e-15
    return bound
