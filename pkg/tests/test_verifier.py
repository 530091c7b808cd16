"""Density and approach profile mechanics on hand-built good sets."""

import math

import numpy as np
import pytest

from carleman.arcs import TWO_PI, ArcSet
from carleman.boundary import BoundaryFunction, extend_continuous
from carleman.chaplet import ChapletSet, ShellSpec
from carleman.geometry import Shell
from carleman.verifier import (
    ApproachBand,
    ApproachProfile,
    DensityRow,
    GoodSet,
    _shell_term,
    _wedge_term,
    density_profile,
    write_approach_csv,
    write_density_csv,
)


def _free_ext():
    psi = BoundaryFunction(
        pieces=[(0.0, TWO_PI, 1.0)], jumps=[], s_arcs=ArcSet.full_circle()
    )
    return extend_continuous(psi)


def _one_shell_chaplet(empty_chaplet):
    spec = ShellSpec(
        index=1,
        shell=Shell(center=0.0, circle_radius=0.5, tau=0.005),
        budget=0.5,
        r0=0.25,
        rho=0.1,
    )
    return ChapletSet(
        cover=empty_chaplet.cover, shells=[spec], components=[]
    )


def test_density_all_good_when_nothing_removed(empty_chaplet):
    good = GoodSet(ch=empty_chaplet, ext=_free_ext())
    prof = density_profile(good, 0.7, [2.0**-k for k in range(2, 8)], n_samples=20_000, seed=1)
    assert prof.all_in_bound()
    for row in prof.rows:
        assert row.good_ratio == 1.0
        assert row.bad_ratio == 0.0


def test_density_shell_vacuity_below_r0(empty_chaplet):
    ch = _one_shell_chaplet(empty_chaplet)
    good = GoodSet(ch=ch, ext=_free_ext())
    radii = [2.0**-k for k in range(2, 8)]
    prof = density_profile(good, 1.0, radii, n_samples=50_000, seed=2)
    assert prof.all_in_bound()
    for row in prof.rows:
        if row.radius < 0.25:
            # certified vacuity: the shell is unreachable from the boundary
            assert row.bad_ratio == 0.0
            assert row.bound == 0.0
        else:
            assert row.bound == pytest.approx(0.5)


def test_shell_term(empty_chaplet):
    ch = _one_shell_chaplet(empty_chaplet)
    assert _shell_term(ch, 0.1) == 0.0
    assert _shell_term(ch, 0.3) == pytest.approx(0.5)


def test_wedge_term():
    psi = BoundaryFunction.step(
        values=(0.0, 1.0), cuts=(0.0, math.pi),
        s_arcs=ArcSet([(0.5, math.pi - 0.5), (math.pi + 0.5, TWO_PI - 0.5)]),
    )
    ext = extend_continuous(psi, halfwidth_cap=0.5)
    # far from both jumps the term vanishes exactly
    assert _wedge_term(ext, math.pi / 2.0, 0.05) == 0.0
    # at a jump the single-wedge slice bound is 4r/(3 pi)
    assert _wedge_term(ext, 0.0, 0.05) == pytest.approx(4.0 * 0.05 / (3.0 * math.pi))


def test_density_starvation(empty_chaplet):
    good = GoodSet(ch=empty_chaplet, ext=_free_ext())
    prof = density_profile(
        good, 0.0, [0.25], n_samples=50, seed=3, min_samples=1000
    )
    assert prof.rows[0].starved
    assert prof.rows[0].in_bound()


def test_density_deterministic(empty_chaplet):
    good = GoodSet(ch=empty_chaplet, ext=_free_ext())
    a = density_profile(good, 0.7, [0.25, 0.125], n_samples=5000, seed=9, point_index=4)
    b = density_profile(good, 0.7, [0.25, 0.125], n_samples=5000, seed=9, point_index=4)
    assert [r.good_ratio for r in a.rows] == [r.good_ratio for r in b.rows]
    assert [r.n_samples for r in a.rows] == [r.n_samples for r in b.rows]
    assert "SeedSequence" in a.seed_derivation


def test_density_row_bound_logic():
    row = DensityRow(0.1, 0.9, 0.1, 0.01, 0.08, 1000, False)
    assert row.in_bound()  # 0.1 <= 0.08 + 0.03
    row = DensityRow(0.1, 0.8, 0.2, 0.01, 0.08, 1000, False)
    assert not row.in_bound()


def test_approach_passes_logic():
    prof = ApproachProfile(theta=0.0, psi_value=1.0, certified=True)
    prof.bands = [
        ApproachBand(0, 0.0, 0.02, 0.1, 100, False),
        ApproachBand(1, 0.5, 0.0, 0.0, 0, True),
        ApproachBand(2, 0.75, 0.01, 0.1, 80, False),
    ]
    assert prof.passes()
    prof.bands[2] = ApproachBand(2, 0.75, 0.05, 0.1, 80, False)
    assert not prof.passes()  # last nonempty above first
    prof.certified = False
    assert prof.passes()  # uncertified probes are vacuous
    empty = ApproachProfile(theta=0.0, psi_value=1.0, certified=True)
    assert not empty.passes()


def test_csv_writers(tmp_path, empty_chaplet):
    good = GoodSet(ch=empty_chaplet, ext=_free_ext())
    prof = density_profile(good, 0.7, [0.25], n_samples=2000, seed=1)
    path = tmp_path / "density.csv"
    write_density_csv([prof], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "point_theta,radius,good_ratio,bad_ratio,stderr,bound"
    assert len(lines) == 2
    # repr round-trips the floats exactly
    assert float(lines[1].split(",")[1]) == 0.25

    aprof = ApproachProfile(theta=0.7, psi_value=1.0 + 0j, certified=True)
    aprof.bands = [ApproachBand(0, 0.0, 0.125, 0.5, 10, False)]
    apath = tmp_path / "approach.csv"
    write_approach_csv([aprof], apath)
    alines = apath.read_text().splitlines()
    assert alines[0] == "point_theta,band_index,band_inner_r,sup_error,budget"
    assert alines[1].split(",")[3] == repr(0.125)


def test_goodset_component_requirement(pipeline):
    _, ext, _, _, ch, _ = pipeline
    base = GoodSet(ch=ch, ext=ext, require_component=False)
    strict = GoodSet(ch=ch, ext=ext, require_component=True)
    c = ch.components[0]
    pts = c.samples[:20]
    assert bool(np.all(strict.contains(pts)))
    # a point in no component is good for the base predicate only
    z = np.array([0.05 + 0.9j]) / 1.0
    z = z / np.abs(z) * 0.99
    assert bool(base.contains(z)[0])
    assert not bool(strict.contains(z)[0])
