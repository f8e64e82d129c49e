"""Command line entry point and the feeder x method comparison harness.

Artifacts are laid out as ``out/<feeder>/<method>/run<k>/`` with
``cloud.csv``, ``hull.json`` and ``meta.json`` per cell, plus a top
level ``report.json``. Every random draw flows from the master seed via
named substreams, so any cell can be reproduced in isolation and reruns
are byte-identical (wall-clock timings live only in the report, never in
cell artifacts).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import powerflow
from .feeder import FeederSpec, build_feeder, table_row
from .geometry import DegenerateRegionError, ForPolygon, area, jaccard
from .revol import RevolConfig, sweep
from .sampling import (
    DirichletConfig,
    LabelledCloud,
    feasible_hull,
    sample_dirichlet_two_stage,
    sample_uniform,
)
from .seeds import seed_sequence
from .svgplot import render_svg
from .tuning import SearchSpace, build_benchmark, random_search

METHODS = ("uniform", "dirichlet", "revol")


def _derived_seed(master: int, *labels) -> int:
    return int(seed_sequence(master, *labels).generate_state(1)[0])


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _load_spec(path: str) -> FeederSpec:
    return FeederSpec.from_json(Path(path).read_text())


def _feeder_name(path: str) -> str:
    return Path(path).stem


# ---------------------------------------------------------------- feeder

def _cmd_feeder(args) -> int:
    if args.action == "init":
        spec = FeederSpec(
            n_der=args.n_der,
            p_inst_total_kw=args.p_inst_total,
            cos_phi_min=args.cos_phi,
            v_band=(args.v_min, args.v_max),
            line_type=args.line_type,
            trafo_type=args.trafo_type,
            mean_trafo_node_distance_m=args.mean_distance,
        )
        spec.validate()
        Path(args.out).write_text(spec.to_json() + "\n")
        print(f"wrote {args.out}")
        return 0

    spec = _load_spec(args.feeder)
    model = build_feeder(spec)
    row = table_row(model)
    print(
        f"{'# DERs':>7} {'P_inst (kW)':>12} {'|S|_max (kVA)':>14} "
        f"{'feeder (m)':>11} {'line (m)':>9}  line type        band       trafo type"
    )
    print(
        f"{row['n_der']:>7} {row['p_inst_der_kw']:>12} {row['s_max_der_kva']:>14} "
        f"{row['feeder_length_m']:>11} {row['line_length_m']:>9}  "
        f"{row['line_type']:<16} {row['v_band'][0]}-{row['v_band'][1]}    {row['trafo_type']}"
    )
    print(f"mean transformer-node distance: {model.mean_trafo_node_distance_m():.1f} m")
    return 0


# -------------------------------------------------------------------- pf

def _cmd_pf(args) -> int:
    model = build_feeder(_load_spec(args.feeder))
    setpoints = json.loads(Path(args.setpoints).read_text())
    p = np.asarray(setpoints["p_kw"], dtype=float)
    q = np.asarray(setpoints["q_kvar"], dtype=float)
    res = powerflow.solve(model, p, q)
    out = {
        "p_pcc_kw": res.p_pcc_kw,
        "q_pcc_kvar": res.q_pcc_kvar,
        "v_pu": res.v_pu.tolist(),
        "line_loading": res.line_loading.tolist(),
        "trafo_loading": res.trafo_loading,
        "converged": res.converged,
        "iterations": res.iterations,
    }
    if res.converged:
        rep = powerflow.evaluate_constraints(res, model.spec)
        out["constraints"] = {
            "max_v_violation": rep.max_v_violation,
            "max_i_violation": rep.max_i_violation,
            "trafo_violation": rep.trafo_violation,
            "label": rep.label,
        }
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------- sample

def _sample_cloud(model, method: str, n: int, seed: int, alpha: float) -> LabelledCloud:
    if method == "uniform":
        return sample_uniform(model, n, seed)
    return sample_dirichlet_two_stage(
        model, DirichletConfig(sample_size=n, alpha=alpha, seed=seed)
    )


def _cmd_sample(args) -> int:
    model = build_feeder(_load_spec(args.feeder))
    cloud = _sample_cloud(model, args.method, args.n, args.seed, args.alpha)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(cloud.to_csv())
    hull_path = Path(args.hull) if args.hull else out.parent / "hull.json"
    try:
        hull = feasible_hull(cloud)
        hull_path.write_text(hull.to_json() + "\n")
        print(f"{len(cloud)} samples, {cloud.feasible_count} feasible, hull -> {hull_path}")
    except DegenerateRegionError as exc:
        print(f"{len(cloud)} samples, no region: {exc}", file=sys.stderr)
        return 1
    if args.svg:
        Path(args.svg).write_text(render_svg(cloud, (hull,), (args.method,)))
    return 0


# ----------------------------------------------------------------- revol

def _load_revol_config(path: str | None) -> RevolConfig:
    if path is None:
        return RevolConfig()
    return RevolConfig.from_dict(json.loads(Path(path).read_text()))


def _cmd_revol(args) -> int:
    model = build_feeder(_load_spec(args.feeder))
    base_cfg = _load_revol_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"runs": [], "pf_calls_total": 0}
    status = 0
    for run in range(args.runs):
        run_dir = out / f"run{run}"
        run_dir.mkdir(exist_ok=True)
        cfg = replace(base_cfg, seed=_derived_seed(args.seed, "revol", run))
        try:
            result = sweep(model, cfg, literal_directions=args.literal_directions)
        except DegenerateRegionError as exc:
            summary["runs"].append({"run": run, "ok": False, "error": str(exc)})
            status = 1
            continue
        (run_dir / "hull.json").write_text(result.polygon.to_json() + "\n")
        points = result.boundary_points()
        cloud = LabelledCloud(
            p_kw=points[:, 0],
            q_kvar=points[:, 1],
            labels=np.zeros(len(points), dtype=np.int8),
        )
        (run_dir / "cloud.csv").write_text(cloud.to_csv())
        for i, rep in enumerate(result.reports):
            rows = ["epoch,best_fitness,v_violation,i_violation"]
            rows += [f"{e},{f!r},{v!r},{c!r}" for e, f, v, c in rep.trace]
            (run_dir / f"dir{i}_convergence.csv").write_text("\n".join(rows) + "\n")
        summary["runs"].append(
            {
                "run": run,
                "ok": True,
                "pf_calls": result.pf_calls,
                "hull_area": area(result.polygon),
                "boundary_points": points.tolist(),
            }
        )
        summary["pf_calls_total"] += result.pf_calls
    _json_dump(summary, out / "summary.json")
    print(f"{args.runs} runs -> {out}, pf calls {summary['pf_calls_total']}")
    return status


# ------------------------------------------------------------------ tune

def _cmd_tune(args) -> int:
    model = build_feeder(_load_spec(args.feeder))
    if args.space:
        d = json.loads(Path(args.space).read_text())
        space = SearchSpace(**{k: tuple(v) for k, v in d.items()})
    else:
        space = SearchSpace()
    benchmark = build_benchmark(
        model, n=args.benchmark_n, seed=_derived_seed(args.seed, "tune-benchmark")
    )
    records = random_search(space, args.trials, args.runs, model, benchmark, seed=args.seed)
    names = (
        "population_size elite_size max_epochs max_no_success_epochs t start_ttl "
        "gradient_weight success_weight target_success max_scatter_relative"
    ).split()
    rows = ["trial," + ",".join(names) + ",mean_jaccard,std_jaccard,pf_calls"]
    for rec in records:
        vals = ",".join(repr(getattr(rec.config, n)) for n in names)
        rows.append(f"{rec.index},{vals},{rec.mean_score!r},{rec.std_score!r},{rec.pf_calls}")
    Path(args.out).write_text("\n".join(rows) + "\n")
    best = records[0]
    print(
        f"best trial {best.index}: mean jaccard {best.mean_score:.4f} "
        f"(std {best.std_score:.4f}) -> {args.out}"
    )
    return 0


# --------------------------------------------------------------- jaccard

def _cmd_jaccard(args) -> int:
    a = ForPolygon.from_json(Path(args.a).read_text())
    b = ForPolygon.from_json(Path(args.b).read_text())
    print(f"{jaccard(a, b)!r}")
    return 0


# --------------------------------------------------------------- compare

@dataclass(frozen=True)
class ExperimentConfig:
    """One comparison campaign over feeders x methods."""

    feeders: tuple[tuple[str, FeederSpec], ...]  # (name, spec)
    methods: tuple[str, ...]
    sample_size: int = 10000
    alpha: float = 1.2
    revol_runs: int = 10
    revol: RevolConfig = RevolConfig()
    literal_directions: bool = False
    seed: int = 0
    out: str = "out"

    def validate(self) -> None:
        if not self.feeders or not self.methods:
            raise ValueError("need at least one feeder and one method")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")


def _cells(cfg: ExperimentConfig):
    for name, spec in cfg.feeders:
        for method in cfg.methods:
            runs = cfg.revol_runs if method == "revol" else 1
            for run in range(runs):
                yield name, spec, method, run


def _run_cell(cell) -> dict:
    cfg: ExperimentConfig
    name, spec, method, run, cfg = cell
    out_dir = Path(cfg.out) / name / method / f"run{run}"
    out_dir.mkdir(parents=True, exist_ok=True)
    model = build_feeder(spec)
    seed = _derived_seed(cfg.seed, name, method, run)
    start = time.perf_counter()
    calls_before = powerflow.pf_call_count()
    meta = {"feeder": name, "method": method, "run": run, "master_seed": cfg.seed}
    info = {"feeder": name, "method": method, "run": run, "ok": True, "error": None}
    try:
        if method == "revol":
            result = sweep(
                model, replace(cfg.revol, seed=seed), literal_directions=cfg.literal_directions
            )
            points = result.boundary_points()
            cloud = LabelledCloud(
                p_kw=points[:, 0],
                q_kvar=points[:, 1],
                labels=np.zeros(len(points), dtype=np.int8),
            )
            hull = result.polygon
            meta["config"] = replace(cfg.revol, seed=seed).to_dict()
        else:
            cloud = _sample_cloud(model, method, cfg.sample_size, seed, cfg.alpha)
            hull = feasible_hull(cloud)
            meta["n"] = cfg.sample_size
            if method == "dirichlet":
                meta["alpha"] = cfg.alpha
        (out_dir / "cloud.csv").write_text(cloud.to_csv())
        (out_dir / "hull.json").write_text(hull.to_json() + "\n")
        meta["pf_calls"] = powerflow.pf_call_count() - calls_before
        meta["hull_area"] = area(hull)
        meta["label_counts"] = cloud.label_counts()
        meta["feasible_count"] = cloud.feasible_count
        _json_dump(meta, out_dir / "meta.json")
        info.update(
            {
                "pf_calls": meta["pf_calls"],
                "hull_area": meta["hull_area"],
                "paths": {
                    "cloud": str(out_dir / "cloud.csv"),
                    "hull": str(out_dir / "hull.json"),
                    "meta": str(out_dir / "meta.json"),
                },
            }
        )
    except Exception as exc:  # cell failures must not kill the campaign
        info["ok"] = False
        info["error"] = f"{type(exc).__name__}: {exc}"
        info["pf_calls"] = powerflow.pf_call_count() - calls_before
    info["wall_time_s"] = time.perf_counter() - start
    return info


def run_comparison(cfg: ExperimentConfig, jobs: int = 1) -> dict:
    """Execute all cells, assemble and write report.json; returns the report."""
    cfg.validate()
    cells = [(name, spec, method, run, cfg) for name, spec, method, run in _cells(cfg)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]

    jaccard_matrices: dict = {}
    for name, _ in cfg.feeders:
        hulls = {}
        for method in cfg.methods:
            path = Path(cfg.out) / name / method / "run0" / "hull.json"
            if path.exists():
                hulls[method] = ForPolygon.from_json(path.read_text())
        matrix = {
            ma: {mb: jaccard(pa, pb) for mb, pb in hulls.items()}
            for ma, pa in hulls.items()
        }
        jaccard_matrices[name] = matrix

    report = {
        "cells": results,
        "jaccard_run0": jaccard_matrices,
        "pf_calls_total": sum(r.get("pf_calls", 0) for r in results),
        "pf_calls_by_method": {
            m: sum(r.get("pf_calls", 0) for r in results if r["method"] == m)
            for m in cfg.methods
        },
        "all_ok": all(r["ok"] for r in results),
        "wall_time_s": sum(r["wall_time_s"] for r in results),
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _json_dump(report, out / "report.json")
    return report


def _cmd_compare(args) -> int:
    feeders = []
    for path in args.feeders or []:
        feeders.append((_feeder_name(path), _load_spec(path)))
    for n in args.n_der or []:
        feeders.append((f"der{n}", FeederSpec(n_der=n)))
    cfg = ExperimentConfig(
        feeders=tuple(feeders),
        methods=tuple(args.methods),
        sample_size=args.n,
        alpha=args.alpha,
        revol_runs=args.revol_runs,
        revol=_load_revol_config(args.revol_config),
        literal_directions=args.literal_directions,
        seed=args.seed,
        out=args.out,
    )
    report = run_comparison(cfg, jobs=args.jobs)
    for cell in report["cells"]:
        state = "ok" if cell["ok"] else f"FAILED ({cell['error']})"
        print(
            f"{cell['feeder']:>8} {cell['method']:>9} run{cell['run']}: {state}, "
            f"pf calls {cell.get('pf_calls', 0)}"
        )
    print(f"report -> {Path(cfg.out) / 'report.json'}")
    return 0 if report["all_ok"] else 1


# ------------------------------------------------------------------ plot

def _cmd_plot(args) -> int:
    cloud = LabelledCloud.from_csv(Path(args.cloud).read_text())
    hulls = tuple(ForPolygon.from_json(Path(p).read_text()) for p in args.hull or [])
    labels = tuple(args.hull_label or [Path(p).stem for p in args.hull or []])
    Path(args.out).write_text(render_svg(cloud, hulls, labels, title=args.title))
    print(f"wrote {args.out}")
    return 0


# ------------------------------------------------------------ arg parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flexfor",
        description="Feasible operation region toolkit for synthetic LV feeders",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feeder", help="create or inspect feeder specs")
    feeder_sub = p.add_subparsers(dest="action", required=True)
    p_init = feeder_sub.add_parser("init", help="write a feeder spec JSON")
    p_init.add_argument("--n-der", type=int, required=True)
    p_init.add_argument("--p-inst-total", type=float, default=200.0)
    p_init.add_argument("--cos-phi", type=float, default=0.9)
    p_init.add_argument("--v-min", type=float, default=0.9)
    p_init.add_argument("--v-max", type=float, default=1.1)
    p_init.add_argument("--line-type", default="NAYY 4x150 SE")
    p_init.add_argument("--trafo-type", default="0.4 MVA 20/0.4 kV")
    p_init.add_argument("--mean-distance", type=float, default=400.0)
    p_init.add_argument("--out", required=True)
    p_show = feeder_sub.add_parser("show", help="print the configuration summary")
    p_show.add_argument("--feeder", required=True)

    p = sub.add_parser("pf", help="debug power flow for explicit setpoints")
    pf_sub = p.add_subparsers(dest="action", required=True)
    p_solve = pf_sub.add_parser("solve")
    p_solve.add_argument("--feeder", required=True)
    p_solve.add_argument("--setpoints", required=True)
    p_solve.add_argument("--out")

    p = sub.add_parser("sample", help="random-sampling region identification")
    p.add_argument("--feeder", required=True)
    p.add_argument("--method", choices=("uniform", "dirichlet"), required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--alpha", type=float, default=1.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--hull")
    p.add_argument("--svg")

    p = sub.add_parser("revol", help="evolutionary boundary sweep")
    p.add_argument("--feeder", required=True)
    p.add_argument("--config")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--literal-directions", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("tune", help="randomized hyperparameter search")
    p.add_argument("--feeder", required=True)
    p.add_argument("--trials", type=int, default=210)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--benchmark-n", type=int, default=100000)
    p.add_argument("--space")
    p.add_argument("--out", required=True)

    p = sub.add_parser("jaccard", help="similarity of two region polygons")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("compare", help="feeder x method comparison campaign")
    p.add_argument("--feeders", nargs="*", metavar="SPEC_JSON")
    p.add_argument("--n-der", nargs="*", type=int, help="build standard feeders inline")
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--alpha", type=float, default=1.2)
    p.add_argument("--revol-runs", type=int, default=10)
    p.add_argument("--revol-config")
    p.add_argument("--literal-directions", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", help="render a cloud/hull SVG")
    p.add_argument("--cloud", required=True)
    p.add_argument("--hull", nargs="*")
    p.add_argument("--hull-label", nargs="*")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True)

    return parser


_COMMANDS = {
    "feeder": _cmd_feeder,
    "pf": _cmd_pf,
    "sample": _cmd_sample,
    "revol": _cmd_revol,
    "tune": _cmd_tune,
    "jaccard": _cmd_jaccard,
    "compare": _cmd_compare,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
