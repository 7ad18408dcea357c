import json
import subprocess
import sys

import pytest

from gensamp import __version__
from gensamp.cli import _pairs, main
from gensamp.errors import UsageError
from gensamp.experiments import (PRESETS, ExperimentSpec, parse_grid, read_table, run,
                                 scale_grid)

SKIP = {"gensamp", "preset", "table", "rng", "noise"}


def table_rows(out, preset, table):
    return read_table(out / f"{preset}-{table}.csv")


def body(path):
    return "".join(line for line in path.read_text().splitlines(True) if not line.startswith("#"))


def test_describe_ssr_mentions_theta_grid(capsys):
    assert main(["describe", "urs-ssr"]) == 0
    text = capsys.readouterr().out
    assert "1.25" in text and "10" in text and "50" in text


def test_describe_recon_table_mentions_n_grid(capsys):
    assert main(["describe", "recon-const-table"]) == 0
    assert "8,16,32,64" in capsys.readouterr().out


def test_describe_unknown(capsys):
    assert main(["describe", "nonexistent"]) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["status"] == "error" and record["type"] == "UsageError"


def test_every_preset_describes():
    for name in PRESETS:
        ExperimentSpec(name).resolved()


def test_unknown_preset_writes_error_record(tmp_path):
    assert main(["bogus", "--out", str(tmp_path)]) == 2
    assert json.loads((tmp_path / "error.json").read_text())["type"] == "UsageError"


def test_unknown_parameter(tmp_path):
    assert main(["ex1-angle", "--colour", "red", "--out", str(tmp_path)]) == 2


def test_missing_out():
    assert main(["ex1-angle"]) == 2


def test_bad_scale(tmp_path):
    assert main(["ex1-angle", "--scale", "2", "--out", str(tmp_path)]) == 2


def test_noise_exact_data_is_recovered(tmp_path):
    assert main(["ex1-noise", "--n", "20", "--eta", "0", "--precision", "extended",
                 "--out", str(tmp_path)]) == 0
    _, rows = table_rows(tmp_path, "ex1-noise", "noise")
    assert float(rows[0]["error"]) <= 1e-8


def test_noise_oversampled_is_stable(tmp_path):
    assert main(["urs-noise", "--n", "20", "--ratios", "2", "--eta", "1e-2",
                 "--out", str(tmp_path)]) == 0
    _, rows = table_rows(tmp_path, "urs-noise", "noise")
    assert rows[0]["m"] == "40"
    assert float(rows[0]["error"]) <= 1.0


def test_noise_square_section_blows_up(tmp_path):
    assert main(["ex1-noise", "--n", "50", "--eta", "1e-9", "--out", str(tmp_path)]) == 0
    _, rows = table_rows(tmp_path, "ex1-noise", "noise")
    assert float(rows[0]["error"]) >= 1.0


def test_reruns_are_byte_identical(tmp_path):
    args = ["urs-const", "--n", "2..12..5", "--frames", "a,c"]
    assert main(args + ["--out", str(tmp_path / "1")]) == 0
    assert main(args + ["--out", str(tmp_path / "2")]) == 0
    first = sorted((tmp_path / "1").iterdir())
    assert first
    for path in first:
        assert path.read_bytes() == (tmp_path / "2" / path.name).read_bytes()


def test_header_is_enough_to_rerun(tmp_path):
    assert main(["urs-ssr", "--n", "3,7", "--theta", "10", "--out", str(tmp_path / "1")]) == 0
    csv = next((tmp_path / "1").glob("*.csv"))
    header, _ = read_table(csv)
    assert header["preset"] == "urs-ssr"
    overrides = {k: v for k, v in header.items() if k not in SKIP}
    run(ExperimentSpec(header["preset"], overrides), tmp_path / "2")
    assert body(csv) == body(tmp_path / "2" / csv.name)


def test_header_records_version_and_seed(tmp_path):
    run(ExperimentSpec("urs-const", {"n": "4", "frames": "c"}), tmp_path)
    text = next(tmp_path.glob("*.csv")).read_text()
    assert f"# gensamp {__version__}" in text
    assert "# seed = 20120401" in text
    manifest = json.loads((tmp_path / "urs-const-manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["params"]["seed"] == 20120401


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 4,6\nframes = b\n")
    assert main(["urs-const", "--config", str(cfg), "--n", "5", "--out", str(tmp_path / "o")]) == 0
    header, rows = read_table(tmp_path / "o" / "urs-const-constants.csv")
    assert header["frames"] == "b"
    assert {r["n"] for r in rows} == {"5"}


def test_custom_run(tmp_path):
    argv = ["custom", "--space", "spline", "--degree", "2", "--n", "4", "--frame", "a",
            "--signal", "nonperiodic_smooth", "--m", "20", "--out", str(tmp_path)]
    assert main(argv) == 0
    record = json.loads((tmp_path / "custom-result.json").read_text())
    assert record["method"] == "generalized"
    assert record["m"] == 20 and len(record["coefficients"]) == 10
    assert 0 < record["error"] < 1
    assert record["diagnostics"]["D"] >= 1 / 2**0.5


def test_custom_bad_space(tmp_path):
    assert main(["custom", "--space", "wavelet", "--out", str(tmp_path)]) == 2
    assert (tmp_path / "error.json").exists()


def test_scale_shrinks_grids():
    params = ExperimentSpec("urs-ssr", {"scale": "0.25"}).resolved()
    assert max(params["n"]) == 16
    assert scale_grid((8, 16, 32, 64), 0.1) == (8, 16, 32)


@pytest.mark.parametrize("text, expected", [("1..4", (1, 2, 3, 4)), ("2..10..4", (2, 6, 10)),
                                            ("1e-9,0.5", (1e-9, 0.5))])
def test_parse_grid(text, expected):
    assert parse_grid(text) == expected


def test_pairs():
    assert _pairs(["--a", "1", "--b-c=2"]) == {"a": "1", "b_c": "2"}
    with pytest.raises(UsageError):
        _pairs(["--a"])
    with pytest.raises(UsageError):
        _pairs(["loose"])


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gensamp", "describe", "ex1-angle"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "ex1-angle" in proc.stdout
