"""Exact lens geometry against closed-form values and Monte Carlo oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleman.geometry import (
    Ball,
    CompositeSet,
    Domain,
    UNIT_DISC,
    ball_domain_area,
    dist_to_boundary,
    lens_area,
    member,
    uniform_in_ball,
)


def test_lens_area_nested():
    assert lens_area(Ball(0.0, 1.0), Ball(0.0, 0.5)) == pytest.approx(math.pi / 4)


def test_lens_area_disjoint():
    assert lens_area(Ball(0.0, 1.0), Ball(2.5, 1.0)) == 0.0


def test_lens_area_known_value():
    # two unit discs at distance 1: 2*pi/3 - sqrt(3)/2
    expect = 2.0 * math.pi / 3.0 - math.sqrt(3.0) / 2.0
    assert lens_area(Ball(0.0, 1.0), Ball(1.0, 1.0)) == pytest.approx(expect, rel=1e-12)


@given(
    x=st.floats(-2, 2), y=st.floats(-2, 2),
    r1=st.floats(0.01, 2), r2=st.floats(0.01, 2),
)
@settings(max_examples=200, deadline=None)
def test_lens_area_symmetric_and_bounded(x, y, r1, r2):
    a = Ball(0.0, r1)
    b = Ball(complex(x, y), r2)
    ab = lens_area(a, b)
    assert ab == pytest.approx(lens_area(b, a), rel=1e-9, abs=1e-12)
    assert 0.0 <= ab <= math.pi * min(r1, r2) ** 2 + 1e-12


def test_lens_area_monotone_in_radius():
    b = Ball(0.8, 0.6)
    areas = [lens_area(Ball(0.0, r), b) for r in np.linspace(0.1, 2.0, 40)]
    assert all(y >= x - 1e-12 for x, y in zip(areas, areas[1:]))


def test_ball_domain_area_trivial_cases():
    assert ball_domain_area(Ball(0.0, 0.5)) == pytest.approx(math.pi / 4)
    assert ball_domain_area(Ball(3.0, 0.5)) == 0.0


def test_ball_domain_area_positive_at_boundary():
    for th in np.linspace(0, 2 * math.pi, 16, endpoint=False):
        p = complex(np.exp(1j * th))
        for r in (0.5, 0.1, 0.01):
            assert ball_domain_area(Ball(p, r)) > 0.0


def test_ball_domain_area_annulus():
    d = Domain(kind="annulus", inner_radius=0.3)
    # ball straddling the inner boundary loses the inner lens
    b = Ball(0.3, 0.1)
    assert ball_domain_area(b, d) == pytest.approx(
        lens_area(b, Ball(0.0, 1.0)) - lens_area(b, Ball(0.0, 0.3))
    )


def test_dist_to_boundary():
    assert dist_to_boundary(0.0) == 1.0
    assert dist_to_boundary(0.75) == pytest.approx(0.25)
    assert dist_to_boundary(0.5, Domain(kind="annulus", inner_radius=0.2)) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        dist_to_boundary(1.5)


def test_member_closed_set_convention():
    s = CompositeSet(base=UNIT_DISC, minus_open=[Ball(0.5, 0.25)])
    assert member(0.5, s) is False
    # a point exactly on the removed ball's boundary is NOT removed
    assert member(0.75, s) is True
    assert member(0.9, s) is True


def test_member_matches_brute_force_on_grid():
    s = CompositeSet(
        base=UNIT_DISC,
        minus_open=[Ball(0.3, 0.2), Ball(-0.4 + 0.1j, 0.15)],
        intersect_closed=[Ball(0.0, 0.8)],
    )
    xs = np.linspace(-1, 1, 100)
    X, Y = np.meshgrid(xs, xs)
    z = (X + 1j * Y).reshape(-1)
    got = s.contains(z)
    # independent re-evaluation of the set definition
    expect = (
        (np.abs(z) < 1.0)
        & ~(np.abs(z - 0.3) < 0.2)
        & ~(np.abs(z - (-0.4 + 0.1j)) < 0.15)
        & (np.abs(z) <= 0.8)
    )
    assert np.array_equal(got, expect)


def test_lens_area_monte_carlo_cross_check():
    rng = np.random.default_rng(7)
    a = Ball(0.2 + 0.1j, 0.9)
    b = Ball(0.8 - 0.3j, 0.7)
    exact = lens_area(a, b)
    n = 500_000
    pts = uniform_in_ball(rng, a, n)
    p_hat = float(np.mean(np.abs(pts - b.center) < b.radius))
    est = p_hat * a.area()
    stderr = a.area() * math.sqrt(p_hat * (1 - p_hat) / n)
    assert abs(est - exact) <= 3.0 * stderr


def test_uniform_in_ball_statistics():
    rng = np.random.default_rng(11)
    b = Ball(1.0 + 2.0j, 0.5)
    pts = uniform_in_ball(rng, b, 200_000)
    assert np.max(np.abs(pts - b.center)) <= b.radius
    assert abs(np.mean(pts) - b.center) < 0.01
    # mean squared radius of a uniform disc is r^2 / 2
    assert np.mean(np.abs(pts - b.center) ** 2) == pytest.approx(b.radius**2 / 2, rel=0.02)


def test_boundary_half_ratio():
    # at a boundary point the ball-in-domain fraction tends to 1/2
    for r in (0.1, 0.01):
        ratio = ball_domain_area(Ball(1.0 + 0j, r)) / (math.pi * r**2)
        assert ratio == pytest.approx(0.5, abs=0.2 if r == 0.1 else 0.02)


def test_domain_validation():
    with pytest.raises(ValueError):
        Domain(kind="annulus", inner_radius=1.5)
    with pytest.raises(ValueError):
        Domain(kind="unit-disc", inner_radius=0.2)
    with pytest.raises(ValueError):
        Ball(0.0, -1.0)
