import numpy as np

from hgssl.bench import parse_results_csv
from hgssl.cli import main

TINY_CONFIG = """\
schema_version = 1

[dataset]
name = synthetic
n = 120
classes = 3
dim = 5
spread = 0.1
seed = 2

[experiment]
methods = hypergraph-ssl, graph-ssl
noise_levels = 0, 0.3
seeds = 0

[train]
epochs = 30
hidden = 8
"""


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("ok ") >= 5


def test_run_single_cell(capsys):
    code = main(["run", "--dataset", "synthetic", "--method", "hgnn",
                 "--noise", "0", "--seed", "1", "--epochs", "40",
                 "--hidden", "8"])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_results_csv(out)
    assert len(rows) == 1
    assert rows[0].method == "hgnn"
    assert rows[0].noise_level == 0.0
    assert rows[0].seed == 1
    assert rows[0].accuracy >= 0.9


def test_bench_writes_tables(tmp_path, capsys):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CONFIG)
    out_dir = tmp_path / "results"
    code = main(["bench", "--config", str(cfg), "--out", str(out_dir)])
    assert code == 0
    csv_path = out_dir / "synthetic.csv"
    txt_path = out_dir / "synthetic.txt"
    assert csv_path.exists() and txt_path.exists()
    rows = parse_results_csv(csv_path.read_text())
    assert len(rows) == 4  # 2 methods x 2 levels x 1 seed
    stdout = capsys.readouterr().out
    assert "method" in stdout and "hypergraph-ssl" in stdout


def test_bench_reuses_operator_cache(tmp_path, capsys):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CONFIG)
    ops = tmp_path / "ops"
    first = tmp_path / "r1"
    second = tmp_path / "r2"
    assert main(["bench", "--config", str(cfg), "--out", str(first),
                 "--ops", str(ops)]) == 0
    assert list(ops.glob("*.hgop"))
    assert main(["bench", "--config", str(cfg), "--out", str(second),
                 "--ops", str(ops)]) == 0
    capsys.readouterr()
    a = parse_results_csv((first / "synthetic.csv").read_text())
    b = parse_results_csv((second / "synthetic.csv").read_text())
    assert [(r.method, r.noise_level, r.seed, r.accuracy) for r in a] \
        == [(r.method, r.noise_level, r.seed, r.accuracy) for r in b]


def test_build_ops_precomputes_cache(tmp_path, capsys):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CONFIG)
    ops = tmp_path / "ops"
    code = main(["build-ops", "--config", str(cfg), "--out", str(ops)])
    out = capsys.readouterr().out
    assert code == 0
    printed = [line for line in out.strip().splitlines() if line]
    assert printed
    files = sorted(str(p) for p in ops.glob("*.hgop"))
    assert sorted(printed) == files
    names = "".join(files)
    assert "hg_sym" in names and "graph" in names


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("schema_version = 1\n[dataset]\nname = usps\nwat = 1\n")
    assert main(["bench", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "broken.cfg:4" in err


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["bench", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_unknown_flag_usage_error(capsys):
    assert main(["run", "--frobnicate"]) != 0


def test_unknown_method_usage_error(capsys):
    code = main(["run", "--dataset", "synthetic", "--method", "oracle",
                 "--noise", "0", "--seed", "0"])
    assert code != 0
