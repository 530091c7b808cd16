"""Command-line pipeline: build, verify, report.

build runs boundary extension -> ball cover -> shells -> chaplet ->
exhaustion -> staged fits and writes the run artifacts.  verify re-derives
the geometry from the resolved config, loads the fitted polynomial, and
measures density and approach profiles against the certificate.  report
prints the human summary and renders figures next to the CSV tables.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from carleman import carleman as recursion
from carleman import chaplet as chap
from carleman import config as cfgmod
from carleman import oracle, verifier
from carleman.arcs import ArcSet
from carleman.boundary import BoundaryFunction, extend_continuous
from carleman.config import ConfigError
from carleman.geometry import UNIT_DISC

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_VIOLATED = 3


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _dump_json(doc: dict, path: Path) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, default=_json_default)
    path.write_text(text + "\n", encoding="utf-8")


def _boundary_from_config(cfg: dict) -> BoundaryFunction:
    b = cfg["boundary"]
    if "pieces" in b:
        return BoundaryFunction.from_json(b)
    s_arcs = ArcSet([tuple(a) for a in b.get("s_arcs", [])])
    return BoundaryFunction.step(values=b["values"], cuts=b["cuts"], s_arcs=s_arcs)


def build_geometry(cfg: dict):
    """Deterministic geometric pipeline shared by build and verify."""
    psi = _boundary_from_config(cfg)
    ext = extend_continuous(psi, halfwidth_cap=cfg["extension"]["halfwidth_cap"])
    avoid = chap.wedge_mask(ext)
    bands = [
        chap.StageBand(
            extent_inner=b["extent"][0],
            extent_outer=b["extent"][1],
            cover_inner=b["cover"][0],
            cover_outer=b["cover"][1],
            windows=tuple(tuple(w) for w in b["windows"]),
        )
        for b in cfg["cover"]["bands"]
    ]
    cover = chap.cover_balls(
        UNIT_DISC,
        ext,
        bands,
        c=cfg["cover"]["c"],
        avoid=avoid,
        grid_step=cfg["cover"]["grid_step"],
        max_balls=cfg["cover"]["max_balls"],
    )
    shells = chap.build_shells(cover, UNIT_DISC, eps_geom=cfg["chaplet"]["eps_geom"])
    ch = chap.assemble_chaplet(
        cover, shells, UNIT_DISC, grid_step=cfg["chaplet"]["component_grid"]
    )
    ex = chap.compatible_exhaustion(
        ch, int(cfg["stages"]), candidate_radii=list(cfg["exhaustion"])
    )
    return psi, ext, cover, shells, ch, ex


def run_build(cfg: dict, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    psi, ext, cover, shells, ch, ex = build_geometry(cfg)
    if len(cover.uncovered_points):
        raise RuntimeError(
            f"cover failed: {len(cover.uncovered_points)} target points uncoverable"
        )
    conn = chap.check_complement_connected(
        ch, UNIT_DISC, resolution=cfg["verify"]["flood_step"]
    )
    if not conn.connected:
        raise RuntimeError("chaplet complement is not connected at the flood-fill step")
    anchors = recursion.anchor_step_function(ch, ext)
    sched = recursion.ToleranceSchedule(
        eps0=cfg["gauge"]["eps0"], alpha=cfg["gauge"]["alpha"], radii=list(ex.radii)
    )
    params = recursion.FitParams(**cfg["fit"])
    cert = recursion.run(ch, ex, anchors, sched, cfg["operator"], params=params)

    _dump_json(cfg, out_dir / "resolved_config.json")
    _dump_json(ch.to_json(), out_dir / "chaplet.json")
    _dump_json(cert.final.to_json(), out_dir / "polynomial.json")
    run_doc = cert.to_json()
    run_doc["exhaustion"] = [float(r) for r in ex.radii]
    run_doc["probes"] = list(cfg["probes"])
    run_doc["anchor_audit_ok"] = anchors.all_ok()
    run_doc["connectivity"] = {
        "connected": conn.connected,
        "n_complement_regions": conn.n_complement_regions,
        "shells_reached": conn.shells_reached,
        "grid_step": conn.grid_step,
        "fattened": conn.fattened,
    }
    _dump_json(run_doc, out_dir / "run.json")
    if not run_doc["all_passed"]:
        infeasible = [s["stage"] for s in run_doc["stages"] if not s["passed"]]
        print(f"budget-infeasible stages: {infeasible}")
        return EXIT_INFEASIBLE
    print(f"build complete: {len(cert.stages)} stages passed")
    return EXIT_OK


class _CertView:
    """Certificate facade over run.json for the verifier."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.components = [
            type(
                "CB",
                (),
                {"comp_id": c["id"], "stage": c["stage"], "bound": c["bound"]},
            )()
            for c in doc["components"]
        ]


def run_verify(run_dir: Path, extra_probes=None, threads: int = 1) -> int:
    for name in ("resolved_config.json", "chaplet.json", "polynomial.json", "run.json"):
        if not (run_dir / name).exists():
            print(f"missing artifact: {name}", file=sys.stderr)
            return EXIT_ERROR
    cfg = json.loads((run_dir / "resolved_config.json").read_text(encoding="utf-8"))
    run_doc = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
    poly = oracle.StagedPolynomial.from_json(
        json.loads((run_dir / "polynomial.json").read_text(encoding="utf-8"))
    )
    psi, ext, cover, shells, ch, ex = build_geometry(cfg)
    cert = _CertView(run_doc)
    good_density = verifier.GoodSet(ch=ch, ext=ext, require_component=False)
    good_approach = verifier.GoodSet(ch=ch, ext=ext, require_component=True)

    probes = list(cfg["probes"]) + [float(p) for p in (extra_probes or [])]
    radii = [2.0**-k for k in cfg["verify"]["radius_exponents"]]
    n_mc = int(cfg["verify"]["mc_samples"])
    seed = int(cfg["seed"])

    def one_density(item):
        idx, theta = item
        return verifier.density_profile(
            good_density, theta, radii, n_samples=n_mc, seed=seed, point_index=idx
        )

    items = list(enumerate(probes))
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            density = list(pool.map(one_density, items))
    else:
        density = [one_density(it) for it in items]
    approach = [
        verifier.approach_profile(
            poly, psi, theta, good_approach, cert, bands=int(cfg["verify"]["bands"])
        )
        for theta in probes
    ]

    # direct re-scan of the per-component telescoped bounds
    bound_of = {c["id"]: c["bound"] for c in run_doc["components"]}
    g_of = {
        c["id"]: complex(c["g_re"], c["g_im"]) for c in run_doc["components"]
    }
    comp_scan_ok = True
    for c in ch.components:
        vals = np.asarray(poly(c.verify), dtype=complex)
        sup = float(np.max(np.abs(vals - g_of[c.comp_id])))
        if sup > bound_of[c.comp_id] + 1e-9:
            comp_scan_ok = False

    eps_density = float(cfg["verify"]["eps_density"])
    density_ok = all(p.all_in_bound() for p in density)
    tail_rows = [
        p.rows[-1] for p in density[: len(cfg["probes"])] if p.rows and not p.rows[-1].starved
    ]
    floor_ok = all(r.good_ratio >= 1.0 - eps_density for r in tail_rows)
    approach_ok = all(p.passes() for p in approach)

    verifier.write_density_csv(density, run_dir / "density.csv")
    verifier.write_approach_csv(approach, run_dir / "approach.csv")
    all_ok = density_ok and floor_ok and approach_ok and comp_scan_ok
    _dump_json(
        {
            "density_in_bound": density_ok,
            "good_ratio_floor_ok": floor_ok,
            "approach_ok": approach_ok,
            "component_scan_ok": comp_scan_ok,
            "all_ok": all_ok,
            "density": [p.to_json() for p in density],
            "approach": [p.to_json() for p in approach],
        },
        run_dir / "verify.json",
    )
    if not all_ok:
        failed = [
            name
            for name, ok in [
                ("density", density_ok),
                ("good-ratio floor", floor_ok),
                ("approach", approach_ok),
                ("component re-scan", comp_scan_ok),
            ]
            if not ok
        ]
        print(f"certificate violated: {', '.join(failed)}")
        return EXIT_VIOLATED
    print(f"verified: {len(probes)} probes within certified bounds")
    return EXIT_OK


def run_report(run_dir: Path) -> int:
    for name in ("run.json", "verify.json", "density.csv", "approach.csv"):
        if not (run_dir / name).exists():
            print(f"missing artifact: {name}", file=sys.stderr)
            return EXIT_ERROR
    run_doc = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
    ver_doc = json.loads((run_dir / "verify.json").read_text(encoding="utf-8"))

    print("stage  degree  err_prev      err_new       budget        pass")
    for s in run_doc["stages"]:
        print(
            f"{s['stage']:>5}  {s['degree']:>6}  {s['err_prev']:<12.6g}"
            f"  {s['err_new']:<12.6g}  {s['budget']:<12.6g}  {s['passed']}"
        )
    print()
    print("probe_theta  final_good_ratio  final_band_error")
    for dprof, aprof in zip(ver_doc["density"], ver_doc["approach"]):
        rows = [r for r in dprof["rows"] if not r["starved"]]
        ratio = rows[-1]["good_ratio"] if rows else float("nan")
        bands = [b for b in aprof["bands"] if not b["empty"]]
        berr = bands[-1]["sup_error"] if bands else float("nan")
        print(f"{dprof['theta']:<11.6g}  {ratio:<16.6g}  {berr:<.6g}")
    print()
    _render_figures(run_dir, run_doc, ver_doc)
    if run_doc["all_passed"] and ver_doc["all_ok"]:
        print("CERTIFIED (finite-stage)")
    else:
        infeasible = [s["stage"] for s in run_doc["stages"] if not s["passed"]]
        if infeasible:
            print(f"NOT CERTIFIED: infeasible stages {infeasible}")
        else:
            print("NOT CERTIFIED: verification bounds violated")
    return EXIT_OK


def _render_figures(run_dir: Path, run_doc: dict, ver_doc: dict) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for prof in ver_doc["density"]:
        rows = [r for r in prof["rows"] if not r["starved"]]
        if not rows:
            continue
        rr = [r["radius"] for r in rows]
        ax.plot(rr, [r["bad_ratio"] for r in rows], "o-", alpha=0.6,
                label=f"θ={prof['theta']:.2f}")
        ax.plot(rr, [r["bound"] for r in rows], "k--", alpha=0.3)
    ax.set_xscale("log")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.set_xlabel("radius")
    ax.set_ylabel("bad-set ratio (dashed: certified bound)")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(run_dir / "density.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 5))
    for prof in ver_doc["approach"]:
        bands = [b for b in prof["bands"] if not b["empty"]]
        if not bands:
            continue
        ax.plot(
            [b["band_index"] for b in bands],
            [b["sup_error"] for b in bands],
            "o-",
            alpha=0.7,
            label=f"θ={prof['theta']:.2f}",
        )
    ax.set_yscale("log")
    ax.set_xlabel("dyadic band index")
    ax.set_ylabel("sup |u_N - ψ(θ)| over good set")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(run_dir / "approach.png", dpi=120)
    plt.close(fig)

    chd = json.loads((run_dir / "chaplet.json").read_text(encoding="utf-8"))
    fig, ax = plt.subplots(figsize=(6, 6))
    th = np.linspace(0, 2 * math.pi, 512)
    ax.plot(np.cos(th), np.sin(th), "k-", lw=1)
    colors = {1: "tab:blue", 2: "tab:orange", 3: "tab:green"}
    for ball, stage in zip(chd["balls"], chd["stage_of_ball"]):
        circ = plt.Circle(
            (ball["re"], ball["im"]), ball["r"],
            fill=False, color=colors.get(stage, "tab:red"), lw=0.8,
        )
        ax.add_patch(circ)
    for r in run_doc.get("exhaustion", []):
        ax.plot(r * np.cos(th), r * np.sin(th), ":", color="gray", lw=0.7)
    for p in run_doc.get("probes", []):
        ax.plot(math.cos(p), math.sin(p), "r*", ms=8)
    ax.set_aspect("equal")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    fig.tight_layout()
    fig.savefig(run_dir / "chaplet.png", dpi=120)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="carleman",
        description="Constructive boundary-value prescription with certified budgets",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("CARLEMAN_THREADS", "1")),
        help="worker cap for parallelizable scans",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_build = sub.add_parser("build", help="run the pipeline and write artifacts")
    p_build.add_argument("--config", required=True)
    p_build.add_argument("--out", required=True)
    p_verify = sub.add_parser("verify", help="measure profiles against the certificate")
    p_verify.add_argument("--run", required=True)
    p_verify.add_argument("--probes", type=float, nargs="*", default=None)
    p_report = sub.add_parser("report", help="print summary and render figures")
    p_report.add_argument("--run", required=True)
    args = parser.parse_args(argv)

    try:
        if args.command == "build":
            cfg = cfgmod.load_config_file(args.config)
            return run_build(cfg, Path(args.out))
        if args.command == "verify":
            return run_verify(Path(args.run), extra_probes=args.probes, threads=args.threads)
        if args.command == "report":
            return run_report(Path(args.run))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, RuntimeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
