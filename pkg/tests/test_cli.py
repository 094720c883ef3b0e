import json

import numpy as np
import pytest

import graphfill as gf
from graphfill.cli import main


@pytest.fixture
def fixture_files(tmp_path):
    positions = tmp_path / "positions.csv"
    readings = tmp_path / "readings.csv"
    rng = np.random.default_rng(0)
    n, m = 8, 12
    coords = rng.uniform(0, 5, size=(n, 2))
    positions.write_text(
        "node_id,x,y\n"
        + "".join(f"s{i},{coords[i,0]:.4f},{coords[i,1]:.4f}\n" for i in range(n))
    )
    values = rng.normal(10.0, 2.0, size=(n, m))
    readings.write_text(
        "node_id,time_index,value\n"
        + "".join(f"s{i},{t},{values[i,t]:.6f}\n" for i in range(n) for t in range(m))
    )
    return positions, readings


def reconstruct_args(positions, readings, out, **overrides):
    flags = {
        "--positions": str(positions),
        "--readings": str(readings),
        "--k": "2",
        "--epsilon": "0.5",
        "--beta": "1.0",
        "--gamma": "0.5",
        "--density": "0.5",
        "--seed": "0",
        "--out": str(out),
    }
    flags.update(overrides)
    argv = ["reconstruct"]
    for key, value in flags.items():
        argv += [key, value]
    return argv


def test_reconstruct_happy_path(tmp_path, fixture_files, capsys):
    positions, readings = fixture_files
    out = tmp_path / "recon"
    assert main(reconstruct_args(positions, readings, out)) == 0
    lines = (tmp_path / "recon.csv").read_text().splitlines()
    assert lines[0] == "node_id,time_index,value"
    assert len(lines) == 1 + 8 * 12
    doc = json.loads((tmp_path / "recon.json").read_text())
    assert doc["rmse"] is not None and doc["rmse"] >= 0
    assert doc["n_evaluated"] == 8 * 12 // 2
    assert doc["iterations"] >= 1


def test_reconstruct_missing_gamma_exits_2(tmp_path, fixture_files, capsys):
    positions, readings = fixture_files
    argv = reconstruct_args(positions, readings, tmp_path / "x")
    idx = argv.index("--gamma")
    del argv[idx : idx + 2]
    assert main(argv) == 2
    assert "--gamma" in capsys.readouterr().err


def test_reconstruct_bad_density_exits_2(tmp_path, fixture_files, capsys):
    positions, readings = fixture_files
    argv = reconstruct_args(positions, readings, tmp_path / "x", **{"--density": "1.1"})
    assert main(argv) == 2
    assert "density" in capsys.readouterr().err


def test_reconstruct_malformed_csv_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n1,2\n")
    argv = reconstruct_args(bad, bad, tmp_path / "x")
    assert main(argv) == 2


def test_unknown_flag_rejected(tmp_path, fixture_files, capsys):
    positions, readings = fixture_files
    argv = reconstruct_args(positions, readings, tmp_path / "x") + ["--bogus", "1"]
    assert main(argv) == 2


def test_reconstruct_non_convergence_exits_3(tmp_path, fixture_files, capsys):
    positions, readings = fixture_files
    argv = reconstruct_args(
        positions, readings, tmp_path / "x", **{"--max-iterations": "1"}
    )
    assert main(argv) == 3
    assert "converge" in capsys.readouterr().err


def test_reconstruct_folds_natively_missing_entries(tmp_path, fixture_files):
    positions, readings = fixture_files
    # knock readings out of the source file: they must not be scored
    lines = readings.read_text().splitlines()
    sparse = tmp_path / "sparse.csv"
    sparse.write_text("\n".join(lines[:1] + lines[7:]) + "\n")
    out = tmp_path / "sparse_out"
    assert main(reconstruct_args(positions, sparse, out)) == 0
    doc = json.loads((tmp_path / "sparse_out.json").read_text())

    # only artificially hidden cells with ground truth are scored
    native = np.ones((8, 12), dtype=int)
    native[0, :6] = 0  # the six removed readings all belong to node s0
    drawn = gf.random_mask(8, 12, 0.5, seed=0)
    expected = int(((drawn.matrix == 0) & (native == 1)).sum())
    assert doc["n_evaluated"] == expected < 8 * 12 // 2
    assert doc["rmse"] is not None


def experiment_config(tmp_path, **overrides):
    doc = {
        "densities": [0.3, 0.7],
        "repetitions": 3,
        "master_seed": 0,
        "method": "sobolev",
        "sobolev": {"epsilon": 0.5, "beta": 1.0, "gamma": 0.5},
        "k_graph": 3,
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_experiment_on_synthetic(tmp_path, capsys):
    config = experiment_config(tmp_path, densities=[0.1, 0.3, 0.5, 0.7])
    out = tmp_path / "exp"
    code = main(
        ["experiment", "--synthetic", "--config", str(config), "--out", str(out)]
    )
    assert code == 0
    lines = (tmp_path / "exp.csv").read_text().splitlines()
    assert len(lines) == 5  # header + one row per density
    table = capsys.readouterr().out
    assert "rmse_mean" in table and table.count("sobolev") == 4
    doc = json.loads((tmp_path / "exp.json").read_text())
    assert len(doc["results"]) == 4
    assert doc["config"]["k_graph"] == 3


def test_experiment_byte_deterministic(tmp_path):
    config = experiment_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["experiment", "--synthetic", "--config", str(config), "--out", str(a)]) == 0
    assert main(["experiment", "--synthetic", "--config", str(config), "--out", str(b)]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_experiment_tikhonov_rows_labelled(tmp_path):
    config = experiment_config(tmp_path, method="tikhonov", densities=[0.5])
    out = tmp_path / "tik"
    assert main(["experiment", "--synthetic", "--config", str(config), "--out", str(out)]) == 0
    rows = (tmp_path / "tik.csv").read_text().splitlines()[1:]
    assert all(row.split(",")[1] == "tikhonov" for row in rows)


def test_experiment_from_csv_files(tmp_path, fixture_files):
    positions, readings = fixture_files
    config = experiment_config(tmp_path, densities=[0.5], repetitions=2)
    out = tmp_path / "csvexp"
    code = main(
        ["experiment", "--positions", str(positions), "--readings", str(readings),
         "--config", str(config), "--out", str(out)]
    )
    assert code == 0
    assert (tmp_path / "csvexp.csv").exists()


def test_experiment_bad_config_exits_2(tmp_path, capsys):
    config = experiment_config(tmp_path, mystery_field=1)
    assert main(["experiment", "--synthetic", "--config", str(config), "--out", str(tmp_path / "x")]) == 2
    assert "mystery_field" in capsys.readouterr().err


def test_experiment_failed_reps_exit_3_with_partial_results(tmp_path, capsys):
    config = experiment_config(
        tmp_path,
        densities=[0.3],
        repetitions=2,
        sobolev={"epsilon": 0.5, "beta": 1.0, "gamma": 0.5, "max_iterations": 1},
    )
    out = tmp_path / "failing"
    code = main(["experiment", "--synthetic", "--config", str(config), "--out", str(out)])
    assert code == 3
    doc = json.loads((tmp_path / "failing.json").read_text())
    assert len(doc["results"][0]["failed_reps"]) == 2
    assert "failed" in capsys.readouterr().err


def test_experiment_requires_dataset_flags(tmp_path, capsys):
    config = experiment_config(tmp_path)
    assert main(["experiment", "--config", str(config), "--out", str(tmp_path / "x")]) == 2


def gridsearch_config(tmp_path, **overrides):
    doc = {
        "density": 0.5,
        "eps_grid": [0.5],
        "beta_grid": [1.0],
        "gamma_grid": [0.3],
        "repetitions": 2,
        "master_seed": 0,
        "k_graph": 3,
    }
    doc.update(overrides)
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(doc))
    return path


def test_gridsearch_single_point_echoes_config(tmp_path, capsys):
    config = gridsearch_config(tmp_path)
    out = tmp_path / "gridout"
    assert main(["gridsearch", "--synthetic", "--config", str(config), "--out", str(out)]) == 0
    report = json.loads(out.with_suffix(".json").read_text())
    assert report["best_config"]["epsilon"] == 0.5
    assert report["best_config"]["gamma"] == 0.3
    assert len(report["entries"]) == 1
    assert "best:" in capsys.readouterr().out


def test_gridsearch_eight_point_grid(tmp_path):
    config = gridsearch_config(
        tmp_path, eps_grid=[0.1, 1.0], beta_grid=[1.0, 2.0], gamma_grid=[0.1, 1.0]
    )
    out = tmp_path / "grid8"
    assert main(["gridsearch", "--synthetic", "--config", str(config), "--out", str(out)]) == 0
    rows = (tmp_path / "grid8.csv").read_text().splitlines()
    assert len(rows) == 9  # header + 8 configs
    report = json.loads((tmp_path / "grid8.json").read_text())
    assert len(report["entries"]) == 8
    best = report["best_rmse_mean"]
    assert all(e["rmse_mean"] >= best for e in report["entries"])


def test_gridsearch_empty_grid_exits_2(tmp_path, capsys):
    config = gridsearch_config(tmp_path, eps_grid=[])
    assert main(["gridsearch", "--synthetic", "--config", str(config), "--out", str(tmp_path / "x")]) == 2


def test_graph_info(tmp_path, fixture_files, capsys):
    positions, _ = fixture_files
    edge_out = tmp_path / "edges.csv"
    assert main(["graph-info", "--positions", str(positions), "--k", "2", "--out", str(edge_out)]) == 0
    out = capsys.readouterr().out
    assert "nodes:" in out and "sigma:" in out and "lambda_2:" in out
    assert edge_out.read_text().splitlines()[0] == "src_id,dst_id,weight"


def test_graph_info_k_too_large_exits_2(tmp_path, fixture_files, capsys):
    positions, _ = fixture_files
    assert main(["graph-info", "--positions", str(positions), "--k", "8"]) == 2
