"""Run configuration: JSON ingestion, defaulting, validation, resolution.

A run config is an ordinary JSON object deep-merged over the package
defaults.  The resolved copy (defaults applied, symbolic window specs
expanded) is written into every run directory so runs self-describe.
"""

from __future__ import annotations

import copy
import json
import math

__all__ = ["DEFAULTS", "ConfigError", "load_config", "resolve_windows", "sector_centers"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


_PROBE_ANGLES = [0.7, 1.3, 1.9, 2.5, 0.7 + math.pi, 1.3 + math.pi, 1.9 + math.pi, 2.5 + math.pi]

DEFAULTS = {
    "seed": 20260825,
    "operator": "cauchy-riemann",
    "stages": 3,
    "boundary": {
        "values": [0.0, 1.0],
        "cuts": [0.0, math.pi],
        "s_arcs": [[0.5, math.pi - 0.5], [math.pi + 0.5, 2.0 * math.pi - 0.5]],
    },
    "extension": {"halfwidth_cap": 0.5},
    "gauge": {"eps0": 0.5, "alpha": 0.5},
    "probes": _PROBE_ANGLES,
    "cover": {
        "c": 0.45,
        "grid_step": 0.004,
        "max_balls": 60,
        "bands": [
            {
                "extent": [0.76, 0.80],
                "cover": [0.776, 0.784],
                "windows": "probes",
                "window_halfwidth": 0.035,
            },
            {
                "extent": [0.50, 0.56],
                "cover": [0.525, 0.535],
                "windows": "sectors",
                "window_halfwidth": 0.06,
            },
            {
                "extent": [0.20, 0.30],
                "cover": [0.245, 0.255],
                "windows": "sectors",
                "window_halfwidth": 0.10,
            },
        ],
    },
    "chaplet": {"component_grid": 0.004, "eps_geom": 0.005},
    "exhaustion": [0.31, 0.57, 0.85],
    "fit": {
        "max_degree": 256,
        "refine": 12,
        "inner_step": 0.03,
        "rim_width": 0.06,
        "rim_step": 0.012,
        "rim_ring": 400,
        "verify_inner_step": 0.02,
        "damping_gap": 0.02,
        "damping_outer": 0.85,
        "damping_step": 0.04,
        "damping_weight": 0.003,
    },
    "verify": {
        "radius_exponents": [2, 3, 4, 5, 6, 7],
        "mc_samples": 100000,
        "bands": 3,
        "eps_density": 0.05,
        "flood_step": 1.0 / 512.0,
    },
    "threads": 1,
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def sector_centers(cuts) -> list:
    """Midpoints of the continuity sectors between consecutive jump angles."""
    cs = sorted(float(c) % (2.0 * math.pi) for c in cuts)
    if not cs:
        return [0.0]
    out = []
    for i, a in enumerate(cs):
        b = cs[(i + 1) % len(cs)]
        if b <= a:
            b += 2.0 * math.pi
        out.append(((a + b) / 2.0) % (2.0 * math.pi))
    return out


def resolve_windows(band: dict, probes, cuts) -> list:
    """Expand a band's window spec into explicit (lo, hi) angle pairs."""
    spec = band.get("windows")
    hw = float(band.get("window_halfwidth", 0.05))
    if spec is None:
        return []
    if spec == "probes":
        centers = list(probes)
    elif spec == "sectors":
        centers = sector_centers(cuts)
    elif isinstance(spec, list):
        return [[float(lo), float(hi)] for lo, hi in spec]
    else:
        raise ConfigError(f"cover.bands[].windows: unknown spec {spec!r}")
    return [[float(c) - hw, float(c) + hw] for c in centers]


def _require(cond: bool, field: str, msg: str):
    if not cond:
        raise ConfigError(f"{field}: {msg}")


def load_config(doc: dict | None) -> dict:
    """Merge over defaults, validate, and expand symbolic window specs."""
    cfg = _deep_merge(DEFAULTS, doc or {})
    _require(cfg["operator"] in ("cauchy-riemann", "laplace"), "operator", "must be cauchy-riemann or laplace")
    _require(int(cfg["stages"]) >= 1, "stages", "must be >= 1")
    _require(cfg["gauge"]["eps0"] > 0, "gauge.eps0", "must be positive")
    _require(cfg["gauge"]["alpha"] >= 0, "gauge.alpha", "must be nonnegative")
    _require(0.0 < cfg["cover"]["c"] < 0.5, "cover.c", "must lie in (0, 1/2)")
    for name in ("grid_step",):
        _require(cfg["cover"][name] > 0, f"cover.{name}", "must be positive")
    for name in ("component_grid", "eps_geom"):
        _require(cfg["chaplet"][name] > 0, f"chaplet.{name}", "must be positive")
    for name in (
        "inner_step",
        "rim_step",
        "verify_inner_step",
        "damping_step",
    ):
        _require(cfg["fit"][name] > 0, f"fit.{name}", "must be positive")
    _require(cfg["verify"]["flood_step"] > 0, "verify.flood_step", "must be positive")
    _require(cfg["verify"]["mc_samples"] > 0, "verify.mc_samples", "must be positive")
    _require(int(cfg["verify"]["bands"]) >= 3, "verify.bands", "must be >= 3")
    probes = [float(p) % (2.0 * math.pi) for p in cfg["probes"]]
    _require(len(probes) > 0, "probes", "must be nonempty")
    cfg["probes"] = probes
    _require(
        len(cfg["exhaustion"]) == int(cfg["stages"]),
        "exhaustion",
        "needs one candidate radius per stage",
    )
    cuts = cfg["boundary"].get("cuts", [])
    for band in cfg["cover"]["bands"]:
        lo, hi = band["extent"]
        clo, chi = band["cover"]
        _require(lo <= clo <= chi <= hi, "cover.bands[].cover", "must sit inside extent")
        band["windows"] = resolve_windows(band, probes, cuts)
        band.pop("window_halfwidth", None)
    return cfg


def load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"config file: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"
            ) from e
    if not isinstance(doc, dict):
        raise ConfigError("config file: top level must be a JSON object")
    return load_config(doc)
