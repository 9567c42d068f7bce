import json

from tspbnb.cli import main


def test_generate_writes_tsplib_files(tmp_path, capsys):
    rc = main(["generate", "--n", "6", "--count", "2", "--seed", "3",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    files = sorted(tmp_path.glob("*.tsp"))
    assert len(files) == 2
    assert "EDGE_WEIGHT_TYPE: EUC_2D" in files[0].read_text()


def test_solve_file_then_report(tmp_path, capsys):
    main(["generate", "--n", "7", "--seed", "5", "--out-dir", str(tmp_path)])
    capsys.readouterr()
    inst_path = next(tmp_path.glob("*.tsp"))
    rc = main(["solve", str(inst_path), "--mode", "classic",
               "--out", str(tmp_path / "report.json")])
    assert rc == 0
    record = json.loads((tmp_path / "report.json").read_text())
    assert record["solved"] is True
    assert record["mode"] == "classic"
    assert record["optimality_score"] is None


def test_solve_generated_gcbb_oracle(capsys):
    rc = main(["solve", "--n", "7", "--seed", "2", "--mode", "gcbb",
               "--prob-source", "oracle"])
    assert rc == 0
    record = json.loads(capsys.readouterr().out)
    assert record["solved"] is True
    assert record["optimality_score"] == 1.0
    assert record["bb_nodes_before_optimum"] == 0


def test_solve_with_prob_file(tmp_path, capsys):
    from tspbnb import generate, oracle_matrix, save_matrix
    inst = generate(6, seed=9)
    prob = tmp_path / "p.prob"
    save_matrix(oracle_matrix(inst), prob)
    rc = main(["solve", "--n", "6", "--seed", "9", "--mode", "gcbb",
               "--prob-file", str(prob)])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["optimality_score"] == 1.0


def test_experiment_and_profile_outputs(tmp_path, capsys):
    out = tmp_path / "results"
    rc = main(["experiment", "--n", "6", "--n", "7", "--count", "3", "--seed", "0",
               "--time-limit-s", "60", "--prob-source", "noisy:0.2",
               "--out-dir", str(out)])
    assert rc == 0
    assert (out / "reports.ndjson").exists()
    assert (out / "aggregate.csv").exists()
    assert (out / "meta.json").exists()
    for n in (6, 7):
        for suffix in ("cumulative_profile", "performance_profile"):
            path = out / f"{n}_{suffix}.csv"
            assert path.exists()
            assert path.read_text().splitlines()[0] == "Time,Hybrid,Classic"
    capsys.readouterr()
    rc = main(["profile", "--reports", str(out / "reports.ndjson"),
               "--time-limit-s", "60", "--out-dir", str(tmp_path / "profiles")])
    assert rc == 0
    assert (tmp_path / "profiles" / "6_cumulative_profile.csv").exists()


def test_error_paths(tmp_path, capsys):
    rc = main(["solve", "--n", "2", "--seed", "0"])
    assert rc == 1
    assert "error" in capsys.readouterr().err
    rc = main(["experiment", "--n", "6", "--count", "2", "--prob-source",
               str(tmp_path), "--out-dir", str(tmp_path / "o")])
    assert rc == 1
    assert "missing probability file" in capsys.readouterr().err
