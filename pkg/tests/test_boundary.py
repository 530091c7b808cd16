"""Boundary datum model, Lusin layering, budgeted wedges, and the extension."""

import math

import numpy as np
import pytest

from carleman.arcs import TWO_PI, ArcSet
from carleman.boundary import (
    BoundaryFunction,
    BoundaryMeasure,
    budgeted_wedges,
    extend_continuous,
    lusin_decompose,
)
from carleman.geometry import Ball, UNIT_DISC, uniform_in_ball


def step_psi():
    s = ArcSet([(0.5, math.pi - 0.5), (math.pi + 0.5, TWO_PI - 0.5)])
    return BoundaryFunction.step(values=(0.0, 1.0), cuts=(0.0, math.pi), s_arcs=s)


def test_step_values():
    psi = step_psi()
    assert psi(0.5) == 0.0
    assert psi(math.pi + 0.5) == 1.0
    vals = psi(np.array([0.1, 1.0, 3.5, 6.0]))
    assert np.allclose(vals, [0.0, 0.0, 1.0, 1.0])
    assert psi.is_real()


def test_s_must_avoid_jumps():
    with pytest.raises(ValueError):
        BoundaryFunction.step(
            values=(0.0, 1.0), cuts=(0.0, math.pi), s_arcs=ArcSet([(math.pi - 0.1, math.pi + 0.1)])
        )


def test_from_json_roundtrip_pieces():
    doc = {
        "pieces": [
            {"arcStartRad": 0.0, "arcEndRad": math.pi, "type": "const", "payload": 2.0},
            {"arcStartRad": math.pi, "arcEndRad": TWO_PI, "type": "expr", "payload": "sin(t)"},
        ],
        "jumps": [0.0, math.pi],
        "sArcs": [[1.0, 2.0]],
    }
    psi = BoundaryFunction.from_json(doc)
    assert psi(1.0) == 2.0
    assert psi(4.0) == pytest.approx(math.sin(4.0))
    assert psi.s_arcs.contains(1.5)


def test_measures():
    nu = BoundaryMeasure()
    assert nu.measure(ArcSet([(0.0, 1.0)])) == pytest.approx(1.0)
    atom = BoundaryMeasure(kind="atomic", atoms=[(1.0, 0.5), (4.0, 0.25)])
    assert atom.measure(ArcSet([(0.5, 2.0)])) == pytest.approx(0.5)
    wt = BoundaryMeasure(kind="weighted", density=lambda t: np.ones_like(t) * 2.0)
    assert wt.measure(ArcSet([(0.0, 1.0)])) == pytest.approx(2.0, rel=1e-6)


def test_lusin_layers_disjoint_and_budgeted():
    psi = step_psi()
    n = 3
    decomp = lusin_decompose(psi, BoundaryMeasure(), n)
    sets = [decomp.s_arcs] + decomp.q_sets
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if sets[i].is_empty() or sets[j].is_empty():
                continue
            assert sets[i].min_angular_gap(sets[j]) > 0.0
    # uncovered mass stays within (jump-adjacent arc ends) * 2^-n
    assert decomp.uncovered_mass <= 4.0 * 2.0**-n + 1e-9
    # every jump stays uncovered
    for j in psi.jumps:
        assert not decomp.covered().contains(j)


def test_lusin_no_jumps():
    psi = BoundaryFunction(pieces=[(0.0, TWO_PI, 1.0)], jumps=[], s_arcs=ArcSet.full_circle())
    decomp = lusin_decompose(psi, BoundaryMeasure(), 2)
    assert decomp.uncovered_mass == pytest.approx(0.0, abs=1e-9)


def test_budgeted_wedges_certificates():
    psi = step_psi()
    decomp = lusin_decompose(psi, BoundaryMeasure(), 2)
    budgets = [2.0**-k for k in range(1, len(decomp.q_sets) + 1)]
    wedges = budgeted_wedges(decomp, budgets, UNIT_DISC)
    rng = np.random.default_rng(3)
    protected = decomp.s_arcs
    for w in wedges:
        assert 0.0 < w.delta < w.r0
        # vacuity: balls around protected boundary points miss the wedge below r0
        for t in protected.sample(8):
            p = complex(np.exp(1j * t))
            pts = uniform_in_ball(rng, Ball(p, 0.9 * w.r0), 20_000)
            pts = pts[np.abs(pts) < 1.0]
            assert not np.any(w.region.contains_open(pts))
            # density budget at r = r0
            pts = uniform_in_ball(rng, Ball(p, w.r0), 50_000)
            pts = pts[np.abs(pts) < 1.0]
            frac = float(np.mean(w.region.contains_open(pts)))
            assert frac <= w.budget
        protected = protected.union(decomp.q_sets[w.index - 1])


def test_extension_exact_off_wedges():
    psi = step_psi()
    ext = extend_continuous(psi, halfwidth_cap=0.5)
    th = np.linspace(0, TWO_PI, 400, endpoint=False)
    for rho in (0.2, 0.5, 0.9, 0.99):
        z = rho * np.exp(1j * th)
        off = ~ext.in_wedge(z)
        # radial transport: the extension equals the boundary value exactly
        assert np.array_equal(ext(z)[off], np.asarray(psi(th), dtype=complex)[off])


def test_extension_radial_sequences_approach_psi():
    psi = step_psi()
    ext = extend_continuous(psi, halfwidth_cap=0.5)
    for t in psi.s_arcs.sample(10):
        seq = (1.0 - 2.0 ** -np.arange(2, 22)) * np.exp(1j * t)
        vals = ext(seq)
        assert np.max(np.abs(vals - psi(t))) == 0.0


def test_extension_blends_inside_wedge():
    psi = step_psi()
    ext = extend_continuous(psi, halfwidth_cap=0.5)
    rho = 0.4
    h = min((1 - rho) ** 2, ext.max_halfwidth)
    # at the jump angle itself the blend sits midway between the side values
    mid = ext(rho * np.exp(1j * 0.0))
    lo, hi = psi(-h), psi(h)
    assert mid == pytest.approx((lo + hi) / 2.0)
    # continuity across the wedge edge
    inner = ext(rho * np.exp(1j * (h - 1e-9)))
    outer = ext(rho * np.exp(1j * (h + 1e-9)))
    assert abs(inner - outer) < 1e-6


def test_halfwidth_cap():
    psi = step_psi()
    assert extend_continuous(psi).max_halfwidth == pytest.approx(0.45 * math.pi)
    assert extend_continuous(psi, halfwidth_cap=0.3).max_halfwidth == 0.3
    with pytest.raises(ValueError):
        extend_continuous(psi, halfwidth_cap=-1.0)


def test_wedge_halfwidth_gauge():
    psi = step_psi()
    ext = extend_continuous(psi, halfwidth_cap=0.5)
    w = ext.wedges[0]
    # gauge h(d) = d^2 in the boundary distance, capped
    assert w.halfwidth(0.9) == pytest.approx(0.01)
    assert w.halfwidth(0.0) == pytest.approx(0.5)
