"""Shared fixtures: one full pipeline run per operator, reused session-wide.

The default-config builds are the expensive part of the suite; everything
that needs a finished run (acceptance criteria, CLI round-trips, verifier
profiles) reads from these session directories instead of rebuilding.
"""

import json
import time

import numpy as np
import pytest

from carleman import cli
from carleman.chaplet import BallCover, ChapletSet
from carleman.config import load_config


@pytest.fixture(scope="session")
def default_cfg():
    return load_config({})


@pytest.fixture(scope="session")
def pipeline(default_cfg):
    """(psi, ext, cover, shells, ch, ex) for the default config."""
    return cli.build_geometry(default_cfg)


def _run(cfg, out):
    t0 = time.perf_counter()
    build_code = cli.run_build(cfg, out)
    build_seconds = time.perf_counter() - t0
    verify_code = cli.run_verify(out, threads=4)
    return {
        "dir": out,
        "build_code": build_code,
        "verify_code": verify_code,
        "build_seconds": build_seconds,
        "run": json.loads((out / "run.json").read_text(encoding="utf-8")),
        "verify": json.loads((out / "verify.json").read_text(encoding="utf-8")),
    }


@pytest.fixture(scope="session")
def cr_run(tmp_path_factory, default_cfg):
    """Full default build + verify, operator cauchy-riemann."""
    return _run(default_cfg, tmp_path_factory.mktemp("cr_run"))


@pytest.fixture(scope="session")
def laplace_run(tmp_path_factory):
    """Same pipeline with the harmonic operator."""
    cfg = load_config({"operator": "laplace"})
    return _run(cfg, tmp_path_factory.mktemp("laplace_run"))


@pytest.fixture()
def empty_chaplet():
    """A chaplet with no balls, shells, or components (good set = all of U)."""
    empty = np.empty(0, dtype=complex)
    cover = BallCover(
        balls=[],
        oscillations=[],
        stage_of_ball=[],
        coverage_points=empty,
        uncovered_points=empty,
    )
    return ChapletSet(cover=cover, shells=[], components=[])


class AnnulusChaplet:
    """Adversarial fixture: one 'component' filling a full annulus.

    Its complement splits into an inner disc and an outer ring, so the
    connectivity certificate must reject it.
    """

    shells = []

    def __init__(self, r_in=0.4, r_out=0.5):
        self.r_in = r_in
        self.r_out = r_out
        self.components = [object()]

    def in_any_shell(self, z, fatten=0.0):
        return np.zeros(np.asarray(z).shape, dtype=bool)

    def membership(self, z, comp):
        r = np.abs(np.asarray(z))
        return (r >= self.r_in) & (r <= self.r_out)


@pytest.fixture()
def annulus_chaplet():
    return AnnulusChaplet()
