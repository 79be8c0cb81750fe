import csv
import json

import numpy as np
import pytest

from refdelay import cli, skorokhod
from refdelay.cli import ConfigError, RunConfig, config_from_text, main, parse_config_text


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_round_trip():
    cfg = RunConfig(preset="nonlinear", H=0.8125, alpha=0.33, level=7, out="x/y", seeds=11)
    text = cfg.serialize()
    again = config_from_text(text)
    assert again == cfg
    assert again.serialize() == text


def test_config_parse_comments_and_errors():
    assert parse_config_text("# note\n\nH = 0.7  # inline\nlevel=5\n") == {"H": 0.7, "level": 5}
    with pytest.raises(ConfigError):
        parse_config_text("nonsense=1")
    with pytest.raises(ConfigError):
        parse_config_text("level=abc")
    with pytest.raises(ConfigError):
        parse_config_text("just words")


@pytest.mark.parametrize(
    "changes, needle",
    [
        ({"alpha": 0.6}, "1/2"),
        ({"H": 0.4}, "H"),
        ({"alpha": 0.2}, "1 - H"),
        ({"T": 0.0}, "T"),
        ({"r": -1.0}, "r"),
        ({"theta": 0.35, "alpha": 0.4}, "theta"),
    ],
)
def test_validation_names_bound(changes, needle):
    with pytest.raises(ConfigError, match=needle):
        RunConfig(**changes).validate()


def test_simulate_writes_files(tmp_path, capsys):
    code, _, _ = run(["simulate", "--preset", "linear", "--hurst", "0.75", "--level", "10", "--seed", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    with open(tmp_path / "path.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1025
    assert all(float(r["x"]) >= 0 for r in rows)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["config"]["seed"] == 1 and meta["driver"]["H"] == 0.75


@pytest.mark.parametrize("flag, value", [("--alpha", "0.6"), ("--hurst", "0.4"), ("--level", "x")])
def test_simulate_rejects_bad_config(tmp_path, capsys, flag, value):
    code, _, err = run(["simulate", flag, value, "--out", str(tmp_path)], capsys)
    assert code == 2
    assert "configuration error" in err


def test_flags_override_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("level=6\nseed=3\n")
    out = tmp_path / "o"
    assert run(["fbm", "--config", str(conf), "--seed", "4", "--out", str(out)], capsys)[0] == 0
    meta = json.loads((out / "driver.json").read_text())
    assert meta["seed"] == 4 and meta["n"] == 6


def test_converge_row_count(tmp_path, capsys):
    code, _, _ = run(["converge", "--seeds", "1", "--n-min", "4", "--n-max", "6", "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "diffs.csv").read_text().splitlines()
    assert lines[0] == "n,seed,D_n"
    assert [l.split(",")[0] for l in lines[1:]] == ["4", "5"]
    assert "median_rate" in json.loads((tmp_path / "summary.json").read_text())


def test_converge_deterministic_driver_is_repeatable(tmp_path, capsys):
    args = ["converge", "--driver", "identity", "--n-min", "4", "--n-max", "9"]
    assert run(args + ["--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "b")], capsys)[0] == 0
    assert (tmp_path / "a" / "diffs.csv").read_bytes() == (tmp_path / "b" / "diffs.csv").read_bytes()
    sa, sb = (json.loads((tmp_path / d / "summary.json").read_text()) for d in "ab")
    assert sa["config"].pop("out") != sb["config"].pop("out")
    assert sa == sb


def test_check_passes_on_defaults(capsys):
    code, out, _ = run(["check"], capsys)
    assert code == 0
    for name in ("reflection", "positivity", "oscillation", "integral_bound", "fbm_covariance"):
        assert f"PASS {name}" in out


def test_check_with_empty_config(tmp_path, capsys):
    conf = tmp_path / "empty.conf"
    conf.write_text("")
    assert run(["check", "--config", str(conf)], capsys)[0] == 0


def test_check_catches_sign_error(monkeypatch, capsys):
    monkeypatch.setattr(skorokhod, "negative_part", lambda x: np.maximum(np.asarray(x, dtype=float), 0.0))
    code, out, _ = run(["check"], capsys)
    assert code == 1
    assert "FAIL positivity" in out
    assert "positivity" in out.splitlines()[-1]


def test_numeric_failure_exit_code(monkeypatch, tmp_path, capsys):
    from refdelay.errors import GenerationError

    def boom(*a, **k):
        raise GenerationError("negative eigenvalue")

    monkeypatch.setattr(cli, "make_driver", boom)
    assert run(["fbm", "--out", str(tmp_path)], capsys)[0] == 3


def test_missing_config_file(capsys):
    assert run(["simulate", "--config", "/nonexistent/x.conf"], capsys)[0] == 2
