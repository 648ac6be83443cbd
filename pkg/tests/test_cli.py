"""Command-line front end: exit codes, file formats, config precedence."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from spincat.cli import (
    ENV_OUTPUT_DIR,
    SURFACE_HEADER,
    SWEEP_HEADER,
    TABLE_HEADER,
    main,
    read_config_file,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text: str):
    lines = text.strip().splitlines()
    header = tuple(lines[0].split(","))
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestWeakValueCommand:
    def test_default_table(self, capsys):
        code, out, _ = run_cli(capsys, "weak-value")
        assert code == 0
        header, rows = parse_csv(out)
        assert header == TABLE_HEADER
        assert len(rows) == 16
        by_key = {(r[0], r[1]): r for r in rows}
        assert float(by_key[("Pi_d1", "exchange")][2]) == 1.0
        assert float(by_key[("Pi_u1_S1", "exchange")][2]) == pytest.approx(0.5)
        assert all(r[5] == "closed-form" for r in rows)

    def test_degenerate_alpha_exits_one(self, capsys):
        code, _, err = run_cli(capsys, "weak-value", "--alpha", "0")
        assert code == 1
        assert "degenerate" in err
        code, _, _ = run_cli(capsys, "weak-value", "--alpha", str(math.pi / 2))
        assert code == 1

    def test_out_of_range_alpha_exits_two(self, capsys):
        code, _, err = run_cli(capsys, "weak-value", "--alpha", "2.0")
        assert code == 2
        assert "alpha" in err

    def test_json_output(self, capsys):
        code, out, _ = run_cli(capsys, "weak-value", "--output-format", "json",
                               "--alpha", "0.6")
        assert code == 0
        payload = json.loads(out)
        assert payload["alpha"] == 0.6
        assert len(payload["rows"]) == 16
        row = next(r for r in payload["rows"]
                   if r["observable"] == "Pi_u1_S1" and r["post_state"] == "exchange")
        assert row["re"] == pytest.approx(0.5 * math.tan(0.6))
        assert row["im"] == pytest.approx(0.0, abs=1e-12)

    def test_output_into_directory(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "weak-value", "--output", str(tmp_path))
        assert code == 0
        assert (tmp_path / "weak_values.csv").exists()
        assert "wrote" in out


class TestSweepCommand:
    def test_csv_schema_and_fit_summary(self, capsys):
        code, out, err = run_cli(capsys, "sweep", "--observable", "Pi_d1")
        assert code == 0
        header, rows = parse_csv(out)
        assert header == SWEEP_HEADER
        assert len(rows) == 11
        t = np.array([float(r[0]) for r in rows])
        np.testing.assert_allclose(t, np.linspace(0, 0.2, 11), atol=1e-12)
        for r in rows:
            assert float(r[1]) == pytest.approx(math.exp(-2 * float(r[0])), abs=1e-8)
            assert r[3] == ""  # deterministic sweeps carry no stderr
        assert "estimate=0.822623516" in err

    def test_nine_significant_digits(self, capsys):
        _, out, _ = run_cli(capsys, "sweep", "--observable", "Pi_u2_S2")
        _, rows = parse_csv(out)
        for r in rows:
            assert r[2] == f"{float(r[2]):.9g}"

    def test_missing_observable_exits_two(self, capsys):
        code, _, err = run_cli(capsys, "sweep")
        assert code == 2
        assert "observable" in err

    @pytest.mark.parametrize("grid", ["0:0.2", "a:b:c", "0:0.2:2", "0.2:0.1:5"])
    def test_bad_grid_exits_two(self, capsys, grid):
        code, _, _ = run_cli(capsys, "sweep", "--observable", "Pi_d1", "--grid", grid)
        assert code == 2

    def test_unknown_observable_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["sweep", "--observable", "Pi_q7"])
        assert excinfo.value.code == 2

    def test_near_orthogonal_selection_exits_one(self, capsys):
        # inside the degenerate-angle gate but with vanishing overlap
        alpha = math.pi / 2 - 1e-5
        code, _, err = run_cli(capsys, "sweep", "--observable", "Pi_d1",
                               "--alpha", str(alpha))
        assert code == 1
        assert "orthogonal" in err

    def test_json_payload(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--observable", "Pi_u1_S1",
                               "--output-format", "json", "--post", "identity")
        assert code == 0
        payload = json.loads(out)
        assert payload["observable"] == "Pi_u1_S1"
        assert payload["post"] == "identity"
        assert len(payload["samples"]) == 11
        assert payload["weak_value_estimate"] == pytest.approx(0.0, abs=1e-10)


class TestSurfaceCommand:
    def test_csv_grid_size(self, capsys):
        code, out, _ = run_cli(capsys, "surface", "--observable", "Pi_d1",
                               "--alpha-points", "5", "--grid", "0:1:6")
        assert code == 0
        header, rows = parse_csv(out)
        assert header == SURFACE_HEADER
        assert len(rows) == 5 * 6
        assert all(r[2] != "" for r in rows)

    def test_endpoint_rows_blank(self, capsys):
        code, out, _ = run_cli(capsys, "surface", "--observable", "Pi_d1",
                               "--alpha-points", "3", "--grid", "0:1:4",
                               "--include-alpha-endpoints")
        assert code == 0
        _, rows = parse_csv(out)
        ends = [r for r in rows if float(r[0]) == pytest.approx(math.pi / 2)]
        assert ends and all(r[2] == "" for r in ends)
        zeros = [r for r in rows if float(r[0]) == 0.0]
        assert zeros and all(r[2] != "" for r in zeros)

    def test_json_uses_null_for_undefined(self, capsys):
        code, out, _ = run_cli(capsys, "surface", "--observable", "Pi_d1",
                               "--alpha-points", "3", "--grid", "0:1:4",
                               "--include-alpha-endpoints", "--output-format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["n"][-1] == [None] * 4
        assert all(x is not None for x in payload["n"][0])


class TestDelayedCommand:
    def test_stdout_sections(self, capsys):
        code, out, err = run_cli(capsys, "delayed", "--observable", "Pi_d1",
                                 "--trials", "2000", "--grid", "0:0.2:4")
        assert code == 0
        assert "# branch=exchange" in out
        assert "# branch=identity" in out
        assert "branch=exchange" in err and "branch=identity" in err
        body = out.split("# branch=identity")[1].strip().splitlines()
        assert tuple(body[0].split(",")) == SWEEP_HEADER
        assert all(line.split(",")[3] != "" for line in body[1:])  # stderr column

    def test_file_output_splits_branches(self, capsys, tmp_path):
        target = tmp_path / "run.csv"
        code, _, _ = run_cli(capsys, "delayed", "--observable", "Pi_u1_S1",
                             "--trials", "2000", "--grid", "0:0.2:4",
                             "--output", str(target))
        assert code == 0
        assert (tmp_path / "run_exchange.csv").exists()
        assert (tmp_path / "run_identity.csv").exists()


class TestConfigFile:
    def test_file_values_and_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# sweep settings\n"
            "observable = Pi_d1\n"
            "post = identity\n"
            "grid = 0:0.2:5\n"
        )
        code, out, err = run_cli(capsys, "sweep", "--config", str(cfg))
        assert code == 0
        assert "post=identity" in err
        assert len(parse_csv(out)[1]) == 5
        # flags win over the file
        code, _, err = run_cli(capsys, "sweep", "--config", str(cfg),
                               "--post", "exchange")
        assert code == 0
        assert "post=exchange" in err

    def test_parser_accepts_comments_and_blanks(self, tmp_path):
        cfg = tmp_path / "a.cfg"
        cfg.write_text("\n# full line comment\nalpha = 0.7  # trailing\n\nseed=9\n")
        values = read_config_file(str(cfg))
        assert values == {"alpha": 0.7, "seed": 9}

    def test_unknown_key_exits_two(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("observable = Pi_d1\nwidth = 3\n")
        code, _, err = run_cli(capsys, "sweep", "--config", str(cfg))
        assert code == 2
        assert "width" in err

    def test_missing_file_exits_two(self, capsys):
        code, _, _ = run_cli(capsys, "sweep", "--observable", "Pi_d1",
                             "--config", "/no/such/file.cfg")
        assert code == 2

    def test_malformed_line_exits_two(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just some words\n")
        code, _, err = run_cli(capsys, "sweep", "--config", str(cfg))
        assert code == 2
        assert "key=value" in err

    def test_unwritable_output_exits_two(self, capsys):
        code, _, _ = run_cli(capsys, "weak-value",
                             "--output", "/no/such/dir/table.csv")
        assert code == 2


REPRO_ARGS = ("--trials", "400", "--grid", "0:0.2:5", "--seed", "3")


class TestReproduceCommand:
    def test_bundle_contents(self, capsys, tmp_path):
        outdir = tmp_path / "bundle"
        code, out, _ = run_cli(capsys, "reproduce", "--output", str(outdir),
                               *REPRO_ARGS)
        assert code in (0, 1)  # 400 trials may legitimately miss MC tolerances
        assert "scored:" in out
        names = {p.name for p in outdir.iterdir()}
        assert "summary.txt" in names
        assert "weak_values.csv" in names
        assert {"surfaces.png", "sweeps.png", "delayed.png"} <= names
        assert "report_analytic-weak-values.json" in names
        assert "report_delayed-pooled-equal.json" in names
        for label in ("Pi_u1", "Pi_d2_S2"):
            assert f"surface_{label}.csv" in names
            assert f"sweep_{label}.csv" in names
            assert f"delayed_{label}_exchange.csv" in names
            assert f"delayed_{label}_identity.csv" in names
            assert f"pooled_equal_{label}.csv" in names
            assert f"pooled_by_success_probability_{label}.csv" in names
        report = json.loads((outdir / "report_analytic-weak-values.json").read_text())
        assert len(report["rows"]) == 16
        assert all(r["passed"] for r in report["rows"] if r["scored"])

    def test_byte_determinism(self, capsys, tmp_path):
        dirs = (tmp_path / "a", tmp_path / "b")
        for d in dirs:
            code, _, _ = run_cli(capsys, "reproduce", "--output", str(d), *REPRO_ARGS)
            assert code in (0, 1)
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        for name in names:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name

    def test_env_var_sets_output_dir(self, capsys, tmp_path, monkeypatch):
        envdir = tmp_path / "from-env"
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(envdir))
        code, _, _ = run_cli(capsys, "reproduce", "--trials", "200",
                             "--grid", "0:0.2:3")
        assert code in (0, 1)
        assert (envdir / "summary.txt").exists()

    def test_flag_overrides_env_var(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "ignored"))
        outdir = tmp_path / "flagged"
        code, _, _ = run_cli(capsys, "reproduce", "--output", str(outdir),
                             "--trials", "200", "--grid", "0:0.2:3")
        assert code in (0, 1)
        assert (outdir / "summary.txt").exists()
        assert not (tmp_path / "ignored").exists()


def test_console_script_and_module_entry(tmp_path):
    proc = subprocess.run(["spincat", "weak-value"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith(",".join(TABLE_HEADER))
    proc = subprocess.run(
        [sys.executable, "-m", "spincat", "weak-value", "--alpha", "2.0"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
