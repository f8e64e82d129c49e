import json

import pytest

from flexfor.cli import main

TINY_REVOL = {
    "population_size": 10,
    "elite_size": 3,
    "max_epochs": 120,
    "max_no_success_epochs": 10**6,
    "t": 50,
    "start_ttl": 80,
    "gradient_weight": 2.87,
    "success_weight": 2.18,
    "target_success": 0.29,
    "max_scatter_relative": 1.74,
    "min_scatter": 1e-6,
    "seed": 0,
}


@pytest.fixture
def spec_path(tmp_path):
    path = tmp_path / "der1.json"
    assert main(["feeder", "init", "--n-der", "1", "--out", str(path)]) == 0
    return path


def test_feeder_show_prints_table_row(spec_path, capsys):
    assert main(["feeder", "show", "--feeder", str(spec_path)]) == 0
    out = capsys.readouterr().out
    assert "200.0" in out and "222.2" in out and "400" in out
    assert "NAYY 4x150 SE" in out


def test_pf_solve_emits_json(spec_path, tmp_path, capsys):
    sp = tmp_path / "setpoints.json"
    sp.write_text(json.dumps({"p_kw": [200.0], "q_kvar": [0.0]}))
    assert main(["pf", "solve", "--feeder", str(spec_path), "--setpoints", str(sp)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["converged"] is True
    assert out["p_pcc_kw"] == pytest.approx(180.25, abs=0.05)
    assert out["constraints"]["label"] == "feasible"
    assert len(out["v_pu"]) == 3


def test_sample_writes_cloud_hull_svg(spec_path, tmp_path):
    out = tmp_path / "cloud.csv"
    svg = tmp_path / "fig.svg"
    rc = main(
        [
            "sample", "--feeder", str(spec_path), "--method", "dirichlet",
            "--n", "400", "--seed", "5", "--out", str(out), "--svg", str(svg),
        ]
    )
    assert rc == 0
    assert out.exists() and (tmp_path / "hull.json").exists() and svg.exists()
    assert out.read_text().startswith("p_kw,q_kvar,label")
    assert svg.read_text().startswith("<svg")


def test_sample_rerun_byte_identical(spec_path, tmp_path):
    args = lambda d: [
        "sample", "--feeder", str(spec_path), "--method", "uniform",
        "--n", "300", "--seed", "9", "--out", str(d / "cloud.csv"),
        "--hull", str(d / "hull.json"),
    ]
    d1, d2 = tmp_path / "a", tmp_path / "b"
    d1.mkdir(), d2.mkdir()
    assert main(args(d1)) == 0
    assert main(args(d2)) == 0
    assert (d1 / "cloud.csv").read_bytes() == (d2 / "cloud.csv").read_bytes()
    assert (d1 / "hull.json").read_bytes() == (d2 / "hull.json").read_bytes()


def test_jaccard_command(spec_path, tmp_path, capsys):
    d = tmp_path / "s"
    d.mkdir()
    main(
        [
            "sample", "--feeder", str(spec_path), "--method", "uniform",
            "--n", "300", "--seed", "9", "--out", str(d / "cloud.csv"),
            "--hull", str(d / "hull.json"),
        ]
    )
    capsys.readouterr()
    assert main(["jaccard", str(d / "hull.json"), str(d / "hull.json")]) == 0
    assert float(capsys.readouterr().out.strip()) == 1.0


def test_revol_command_artifacts(spec_path, tmp_path):
    cfg_path = tmp_path / "revol.json"
    cfg_path.write_text(json.dumps(TINY_REVOL))
    out_dir = tmp_path / "sweep"
    rc = main(
        [
            "revol", "--feeder", str(spec_path), "--config", str(cfg_path),
            "--runs", "2", "--seed", "3", "--out", str(out_dir),
        ]
    )
    assert rc == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["pf_calls_total"] == 2 * 8 * (10 + 120)
    for run in (0, 1):
        run_dir = out_dir / f"run{run}"
        assert (run_dir / "hull.json").exists()
        assert (run_dir / "cloud.csv").exists()
        conv = (run_dir / "dir0_convergence.csv").read_text().splitlines()
        assert conv[0] == "epoch,best_fitness,v_violation,i_violation"
        assert len(conv) == 121


def test_compare_campaign(spec_path, tmp_path):
    cfg_path = tmp_path / "revol.json"
    cfg_path.write_text(json.dumps(TINY_REVOL))
    out_dir = tmp_path / "cmp"
    rc = main(
        [
            "compare", "--feeders", str(spec_path), "--methods", "uniform",
            "dirichlet", "revol", "--n", "400", "--revol-runs", "1",
            "--revol-config", str(cfg_path), "--seed", "1", "--out", str(out_dir),
        ]
    )
    assert rc == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["all_ok"]
    assert report["pf_calls_by_method"]["uniform"] == 400
    assert report["pf_calls_by_method"]["dirichlet"] == 400
    assert report["pf_calls_by_method"]["revol"] == 8 * (10 + 120)
    j = report["jaccard_run0"]["der1"]
    assert j["uniform"]["uniform"] == 1.0
    assert 0.0 <= j["uniform"]["dirichlet"] <= 1.0
    # every artifact referenced by the report exists and parses
    from pathlib import Path

    from flexfor.geometry import ForPolygon
    from flexfor.sampling import LabelledCloud

    for cell in report["cells"]:
        meta = json.loads(Path(cell["paths"]["meta"]).read_text())
        assert meta["pf_calls"] == cell["pf_calls"]
        LabelledCloud.from_csv(Path(cell["paths"]["cloud"]).read_text())
        ForPolygon.from_json(Path(cell["paths"]["hull"]).read_text())


def test_compare_cells_rerun_byte_identical(spec_path, tmp_path):
    cfg_path = tmp_path / "revol.json"
    cfg_path.write_text(json.dumps(TINY_REVOL))
    outs = []
    for tag in ("x", "y"):
        out_dir = tmp_path / tag
        rc = main(
            [
                "compare", "--feeders", str(spec_path), "--methods", "dirichlet",
                "revol", "--n", "300", "--revol-runs", "1",
                "--revol-config", str(cfg_path), "--seed", "7", "--out", str(out_dir),
            ]
        )
        assert rc == 0
        outs.append(out_dir)
    for rel in (
        "der1/dirichlet/run0/cloud.csv",
        "der1/dirichlet/run0/hull.json",
        "der1/dirichlet/run0/meta.json",
        "der1/revol/run0/cloud.csv",
        "der1/revol/run0/hull.json",
        "der1/revol/run0/meta.json",
    ):
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()


def test_plot_command_deterministic(spec_path, tmp_path, capsys):
    d = tmp_path / "s"
    d.mkdir()
    main(
        [
            "sample", "--feeder", str(spec_path), "--method", "uniform", "--n", "200",
            "--seed", "2", "--out", str(d / "cloud.csv"), "--hull", str(d / "hull.json"),
        ]
    )
    svg1, svg2 = tmp_path / "a.svg", tmp_path / "b.svg"
    for svg in (svg1, svg2):
        rc = main(
            [
                "plot", "--cloud", str(d / "cloud.csv"), "--hull", str(d / "hull.json"),
                "--title", "region", "--out", str(svg),
            ]
        )
        assert rc == 0
    assert svg1.read_bytes() == svg2.read_bytes()


def test_tune_command_smoke(spec_path, tmp_path):
    space = {
        "population_size": [8, 10],
        "elite_size": [2, 3],
        "max_epochs": [40, 60],
        "max_no_success_epochs": [1000000, 1000000],
        "t": [40, 80],
        "start_ttl": [50, 100],
    }
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps(space))
    out = tmp_path / "trials.csv"
    rc = main(
        [
            "tune", "--feeder", str(spec_path), "--trials", "2", "--runs", "1",
            "--seed", "4", "--benchmark-n", "1500", "--space", str(space_path),
            "--out", str(out),
        ]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("trial,population_size")
    assert lines[0].endswith("mean_jaccard,std_jaccard,pf_calls")
    assert len(lines) == 3
