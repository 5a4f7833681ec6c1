import json
import os
from pathlib import Path

import pytest

from graphshift.cli import DEFAULT_OUTPUT_ENV, main

from conftest import write_dataset

FAST_TRAIN = ["--learning-rate", "0.5", "--max-epochs", "60", "--patience", "20"]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory, fixture_dataset):
    g, x, y = fixture_dataset
    directory = tmp_path_factory.mktemp("dataset")
    edges, features, labels = write_dataset(directory, g, x, y)
    return ["--edges", str(edges), "--features", str(features), "--labels", str(labels)]


def tree_bytes(root):
    root = Path(root)
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_metrics_writes_expected_tree(tmp_path, dataset):
    out = tmp_path / "out"
    code = main(["metrics", *dataset, "-o", str(out), "--shift", "popularity"])
    assert code == 0
    run_config = json.loads((out / "run_config.json").read_text())
    csv_path = out / "metrics" / "popularity.csv"
    assert csv_path.exists()
    assert (out / "metrics" / "popularity.csv.provenance.json").exists()
    first = csv_path.read_text().splitlines()[0]
    assert first == f"# config_hash={run_config['config_hash']}"
    assert run_config["config"]["shifts"] == ["popularity"]


def test_staged_equals_fused_byte_for_byte(tmp_path, dataset):
    common = [*dataset, "--shift", "popularity", "--seeds", "0", *FAST_TRAIN,
              "--max-pairs", "2000"]
    staged = tmp_path / "staged"
    for command in ("metrics", "split", "analyze", "train-eval", "report"):
        assert main([command, *common, "-o", str(staged)]) == 0

    fused = tmp_path / "fused"
    # train-eval materializes metrics and splits itself; analyze reuses them
    for command in ("train-eval", "analyze", "report"):
        assert main([command, *common, "-o", str(fused)]) == 0

    left, right = tree_bytes(staged), tree_bytes(fused)
    assert left.keys() == right.keys()
    for name in left:
        assert left[name] == right[name], f"{name} differs between staged and fused"


def test_rerun_overwrites_nothing(tmp_path, dataset):
    out = tmp_path / "out"
    args = ["train-eval", *dataset, "-o", str(out), "--shift", "density",
            "--seeds", "0", *FAST_TRAIN]
    assert main(args) == 0
    before = tree_bytes(out)
    assert main(args) == 0
    assert tree_bytes(out) == before


def test_workers_do_not_change_artifacts(tmp_path, dataset):
    base = [*dataset, "--shift", "popularity", "--shift", "density",
            "--seeds", "0,1", *FAST_TRAIN]
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    assert main(["train-eval", *base, "-o", str(serial), "--workers", "1"]) == 0
    assert main(["train-eval", *base, "-o", str(parallel), "--workers", "3"]) == 0
    assert tree_bytes(serial) == tree_bytes(parallel)


def test_toml_config_with_flag_override(tmp_path, dataset):
    edges = dataset[1]
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "\n".join(
            [
                "[dataset]",
                f'edges = "{edges}"',
                "[run]",
                'shifts = ["density"]',
                "[pagerank]",
                "alpha = 0.3",
                "[split]",
                "id_fraction = 0.7",
            ]
        )
    )
    out = tmp_path / "out"
    assert main(["metrics", "-c", str(cfg), "-o", str(out), "--alpha", "0.2"]) == 0
    config = json.loads((out / "run_config.json").read_text())["config"]
    assert config["pagerank"]["alpha"] == 0.2  # flag beats TOML
    assert config["shifts"] == ["density"]  # TOML beats default
    assert config["split"]["test_out_fraction"] == pytest.approx(0.24)
    assert (out / "metrics" / "density.csv").exists()
    assert not (out / "metrics" / "popularity.csv").exists()


def test_output_dir_from_environment(tmp_path, dataset, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(DEFAULT_OUTPUT_ENV, str(target))
    assert main(["metrics", *dataset, "--shift", "density"]) == 0
    assert (target / "metrics" / "density.csv").exists()


def test_lcc_restricts_dataset(tmp_path):
    edges = tmp_path / "edges.txt"
    # 4-cycle plus a separate edge; the cycle is the surviving component
    edges.write_text("0 1\n1 2\n2 3\n0 3\n4 5\n")
    out = tmp_path / "out"
    assert main(["metrics", "--edges", str(edges), "-o", str(out),
                 "--shift", "popularity", "--lcc"]) == 0
    mapping = (out / "lcc_mapping.csv").read_text().splitlines()
    assert mapping[1:] == ["0,0", "1,1", "2,2", "3,3", "4,-1", "5,-1"]
    rows = [l for l in (out / "metrics" / "popularity.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert len(rows) == 4


def test_config_errors_exit_1(tmp_path, dataset, capsys):
    assert main(["metrics", "-o", str(tmp_path / "a")]) == 1  # no edges anywhere
    assert "edge list" in capsys.readouterr().err
    assert main(["metrics", *dataset, "--shift", "degree"]) == 1  # unknown shift
    assert main(["metrics", "--edges", str(tmp_path / "missing.txt")]) == 1
    assert main(["metrics", *dataset, "--seeds", "1,1"]) == 1
    bad_toml = tmp_path / "bad.toml"
    bad_toml.write_text("[dataset\n")
    assert main(["metrics", "-c", str(bad_toml)]) == 1
    assert main(["report", *dataset, "-o", str(tmp_path / "empty")]) == 1


def test_malformed_edge_file_exit_1(tmp_path, capsys):
    edges = tmp_path / "edges.txt"
    edges.write_text("0 1\nnot numbers\n")
    assert main(["metrics", "--edges", str(edges), "-o", str(tmp_path / "o")]) == 1
    assert "edges.txt:2" in capsys.readouterr().err


def test_runtime_failure_exit_2(tmp_path, dataset, capsys):
    out = tmp_path / "out"
    code = main(["metrics", *dataset, "-o", str(out), "--shift", "popularity",
                 "--max-iterations", "1", "--tolerance", "1e-30"])
    assert code == 2
    assert "runtime error" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "graphshift" in capsys.readouterr().out


def test_missing_features_for_train_eval(tmp_path, dataset):
    args = ["train-eval", "--edges", dataset[1], "--labels", dataset[5],
            "-o", str(tmp_path / "o"), "--shift", "density", "--seeds", "0"]
    assert main(args) == 1
