"""Global polynomial fitting on compact point clouds.

Least-squares fits in a basis orthogonalized against the fit cloud via the
Arnoldi recurrence on evaluation vectors (the stable replacement for raw
Vandermonde monomials near the unit circle), with degree escalation until a
requested sup-norm tolerance is met on an independent verification cloud.

Two operator kinds are supported: "cauchy-riemann" (holomorphic basis,
powers of z) and "laplace" (harmonic basis, real and imaginary parts of
powers of z).  Both bases contain the constants, so constant targets are
reproduced to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CAUCHY_RIEMANN",
    "LAPLACE",
    "GlobalPolynomial",
    "FitRequest",
    "FitResult",
    "IllConditionedError",
    "fit",
    "evaluate",
]

CAUCHY_RIEMANN = "cauchy-riemann"
LAPLACE = "laplace"


class IllConditionedError(RuntimeError):
    """Arnoldi breakdown: the evaluation vectors became linearly dependent."""


def _arnoldi(z: np.ndarray, degree: int):
    """Orthonormal evaluation basis Q and recurrence record H on the cloud z.

    Q[:, k] is a degree-k polynomial evaluated on z; columns have RMS norm 1
    over the cloud.  H re-generates the basis at arbitrary points.
    """
    n = len(z)
    q = np.ones(n, dtype=complex)
    Q = np.empty((n, degree + 1), dtype=complex)
    Q[:, 0] = q
    H = np.zeros((degree + 1, degree), dtype=complex)
    sn = math.sqrt(n)
    for k in range(degree):
        v = z * Q[:, k]
        for i in range(k + 1):
            H[i, k] = np.vdot(Q[:, i], v) / n
            v = v - H[i, k] * Q[:, i]
        # one re-orthogonalization pass for stability
        for i in range(k + 1):
            c = np.vdot(Q[:, i], v) / n
            H[i, k] += c
            v = v - c * Q[:, i]
        h = np.linalg.norm(v) / sn
        if h < 1e-14:
            raise IllConditionedError(f"Arnoldi breakdown at degree {k + 1}")
        H[k + 1, k] = h
        Q[:, k + 1] = v / h
    return Q, H


def _arnoldi_eval(z: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Re-run the recorded recurrence to evaluate the basis at new points."""
    degree = H.shape[1]
    z = np.asarray(z, dtype=complex).reshape(-1)
    Q = np.empty((len(z), degree + 1), dtype=complex)
    Q[:, 0] = 1.0
    for k in range(degree):
        v = z * Q[:, k]
        for i in range(k + 1):
            v = v - H[i, k] * Q[:, i]
        Q[:, k + 1] = v / H[k + 1, k]
    return Q


def _design(Q: np.ndarray, kind: str) -> np.ndarray:
    if kind == CAUCHY_RIEMANN:
        return Q
    # harmonic: 1, Re q_1..q_d, Im q_1..q_d -- real design matrix
    return np.hstack([Q.real, Q[:, 1:].imag])


@dataclass
class GlobalPolynomial:
    """Fitted global polynomial: operator kind, recurrence record, coefficients."""

    kind: str
    degree: int
    H: np.ndarray
    coeffs: np.ndarray

    def __call__(self, z):
        return evaluate(self, z)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "degree": self.degree,
            "H_re": self.H.real.tolist(),
            "H_im": self.H.imag.tolist(),
            "coeffs_re": np.asarray(self.coeffs).real.tolist(),
            "coeffs_im": np.asarray(self.coeffs).imag.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GlobalPolynomial":
        H = np.asarray(doc["H_re"]) + 1j * np.asarray(doc["H_im"])
        coeffs = np.asarray(doc["coeffs_re"]) + 1j * np.asarray(doc["coeffs_im"])
        if doc["kind"] == LAPLACE:
            coeffs = coeffs.real
        return cls(kind=doc["kind"], degree=int(doc["degree"]), H=H, coeffs=coeffs)


def zero_polynomial(kind: str) -> GlobalPolynomial:
    return GlobalPolynomial(
        kind=kind,
        degree=0,
        H=np.zeros((1, 0), dtype=complex),
        coeffs=np.zeros(1, dtype=complex if kind == CAUCHY_RIEMANN else float),
    )


def evaluate(p: GlobalPolynomial, z):
    """Numerically stable evaluation through the recorded orthogonalization."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    Q = _arnoldi_eval(np.atleast_1d(z).reshape(-1), p.H)
    A = _design(Q, p.kind)
    vals = A @ p.coeffs
    if p.kind == LAPLACE:
        vals = vals.real
    vals = vals.reshape(np.atleast_1d(z).shape)
    return vals[0] if scalar else vals


@dataclass
class FitRequest:
    """Points with target values, a finer verification cloud, and tolerances."""

    fit_points: np.ndarray
    fit_values: np.ndarray
    verify_points: np.ndarray
    verify_values: np.ndarray
    tolerance: float
    max_degree: int = 128
    weights: np.ndarray | None = None
    refine: int = 0

    def __post_init__(self):
        if len(self.fit_points) == 0 or len(self.verify_points) == 0:
            raise ValueError("fit and verify clouds must be nonempty")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class FitResult:
    polynomial: GlobalPolynomial
    achieved_error: float
    success: bool
    degree_ladder: list = field(default_factory=list)  # [(degree, best-so-far error)]
    ill_conditioned: bool = False

    @property
    def degree(self) -> int:
        return self.polynomial.degree


def _solve(A: np.ndarray, y: np.ndarray, w: np.ndarray | None) -> np.ndarray:
    if w is None:
        coeffs, *_ = np.linalg.lstsq(A, y, rcond=None)
    else:
        sw = np.sqrt(np.asarray(w, dtype=float))
        coeffs, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    return coeffs


def _fit_degree(req: FitRequest, kind: str, degree: int) -> list[GlobalPolynomial]:
    """Candidate fits at one degree: the base least squares plus refinements.

    Refinement iterations reweight the fit cloud toward its largest
    residuals (multiplicative, so zero-weight points stay at zero), which
    pushes the least-squares solution toward the minimax one.  All
    candidates are returned; the caller keeps whichever verifies best.
    """
    z = np.asarray(req.fit_points, dtype=complex)
    y = np.asarray(req.fit_values, dtype=complex)
    Q, H = _arnoldi(z, degree)
    A = _design(Q, kind)
    if kind == LAPLACE:
        if np.max(np.abs(y.imag)) > 1e-12:
            raise ValueError("laplace targets must be real")
        y = y.real.astype(float)
    base_w = None if req.weights is None else np.asarray(req.weights, dtype=float)
    coeffs = _solve(A, y, base_w)
    out = [GlobalPolynomial(kind=kind, degree=degree, H=H, coeffs=coeffs)]
    lw = np.ones(len(z)) if base_w is None else base_w.copy()
    for _ in range(req.refine):
        resid = np.abs(A @ coeffs - y)
        lw = lw * (resid + 1e-12)
        m = lw.max()
        if not np.isfinite(m) or m <= 0.0:
            break
        lw = lw / m
        coeffs = _solve(A, y, lw)
        out.append(GlobalPolynomial(kind=kind, degree=degree, H=H, coeffs=coeffs))
    return out


def fit(req: FitRequest, kind: str) -> FitResult:
    """Degree-escalated least-squares fit certified on the verify cloud.

    Degrees 4, 8, 16, ... up to max_degree; stops at the first degree whose
    sup error over the verify cloud is within tolerance.  The ladder records
    the best error seen so far at each rung (non-increasing by construction);
    the returned polynomial is the best one encountered.
    """
    degrees = []
    d = 4
    while d < req.max_degree:
        degrees.append(d)
        d *= 2
    degrees.append(req.max_degree)
    # allow constant/in-span targets to resolve at tiny degree too
    if degrees[0] > 1:
        degrees.insert(0, 1)

    vy = np.asarray(req.verify_values, dtype=complex)
    best: GlobalPolynomial | None = None
    best_err = math.inf
    ladder = []
    ill = False
    for deg in degrees:
        deg = min(deg, max(1, len(req.fit_points) - 1))
        try:
            cands = _fit_degree(req, kind, deg)
        except IllConditionedError:
            ill = True
            break
        for poly in cands:
            resid = evaluate(poly, req.verify_points) - vy
            err = float(np.max(np.abs(resid)))
            if err < best_err:
                best_err = err
                best = poly
            if best_err <= req.tolerance:
                break
        ladder.append((deg, best_err))
        if best_err <= req.tolerance:
            break
    if best is None:
        raise IllConditionedError("orthogonalization broke down at the first rung")
    return FitResult(
        polynomial=best,
        achieved_error=best_err,
        success=best_err <= req.tolerance,
        degree_ladder=ladder,
        ill_conditioned=ill,
    )


@dataclass
class StagedPolynomial:
    """Sum of per-stage correction polynomials (the welded global section)."""

    kind: str
    parts: list = field(default_factory=list)  # list[GlobalPolynomial]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.parts:
            out = np.zeros(np.atleast_1d(z).shape, dtype=complex)
            if self.kind == LAPLACE:
                out = out.real
            return out.reshape(z.shape)[()] if z.ndim == 0 else out.reshape(z.shape)
        total = evaluate(self.parts[0], z)
        for p in self.parts[1:]:
            total = total + evaluate(p, z)
        return total

    def extended(self, p: GlobalPolynomial) -> "StagedPolynomial":
        return StagedPolynomial(kind=self.kind, parts=self.parts + [p])

    def to_json(self) -> dict:
        return {"kind": self.kind, "parts": [p.to_json() for p in self.parts]}

    @classmethod
    def from_json(cls, doc: dict) -> "StagedPolynomial":
        return cls(
            kind=doc["kind"],
            parts=[GlobalPolynomial.from_json(p) for p in doc["parts"]],
        )


def mean_value_gap(p: GlobalPolynomial, center: complex, radius: float, n: int = 256) -> float:
    """|p(center) - average of p over the circle| (harmonicity check)."""
    th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    ring = center + radius * np.exp(1j * th)
    return float(np.abs(np.mean(evaluate(p, ring)) - evaluate(p, center)))
