"""Command-line interface: subcommands, config layering, exit codes."""

import hashlib
import json

import pytest

from luxskim.cli import main

FAST_SYNTH = ["--pins", "4", "--reps", "3", "--unsafe-cardinality"]
FAST_EVAL = FAST_SYNTH + ["--folds", "3"]


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def stderr_record(err):
    lines = [ln for ln in err.strip().splitlines() if ln.startswith("{")]
    assert lines, f"no JSON on stderr: {err!r}"
    return json.loads(lines[-1])


class TestSynth:
    def test_writes_deterministic_bytes(self, tmp_path, capsys):
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        argv = ["synth", *FAST_SYNTH, "--seed", "11"]
        code1, out1, _ = run(argv + ["-o", str(p1)], capsys)
        code2, out2, _ = run(argv + ["-o", str(p2)], capsys)
        assert code1 == code2 == 0
        h1 = hashlib.sha256(p1.read_bytes()).hexdigest()
        h2 = hashlib.sha256(p2.read_bytes()).hexdigest()
        assert h1 == h2
        record = json.loads(out1)
        assert record["pins"] == 12
        assert record["seed"] == 11
        assert record["written"] == str(p1)

    def test_stdout_output(self, capsys):
        code, out, _ = run(["synth", *FAST_SYNTH, "-o", "-"], capsys)
        assert code == 0
        first = json.loads(out.splitlines()[0])
        assert first["type"] == "session"

    def test_cardinality_gate(self, tmp_path, capsys):
        code, _, err = run(
            ["synth", "--pins", "17", "-o", str(tmp_path / "x.jsonl")], capsys)
        assert code == 2
        record = stderr_record(err)
        assert record["error"] == "ConfigError"
        assert "pin_count" in record["message"]

    def test_cardinality_override(self, tmp_path, capsys):
        code, _, _ = run(
            ["synth", "--pins", "17", "--reps", "3", "--unsafe-cardinality",
             "-o", str(tmp_path / "x.jsonl")], capsys)
        assert code == 0

    def test_study_size_needs_no_override(self, tmp_path, capsys):
        code, _, _ = run(
            ["synth", "--pins", "15", "--reps", "3", "-o", str(tmp_path / "x.jsonl")],
            capsys)
        assert code == 0


@pytest.fixture()
def session_file(tmp_path, capsys):
    path = tmp_path / "session.jsonl"
    assert main(["synth", *FAST_SYNTH, "--seed", "4", "-o", str(path)]) == 0
    capsys.readouterr()
    return path


@pytest.fixture()
def lux_only_file(tmp_path, capsys):
    path = tmp_path / "luxonly.jsonl"
    assert main(["synth", *FAST_SYNTH, "--device", "nexus-one",
                 "--seed", "4", "-o", str(path)]) == 0
    capsys.readouterr()
    return path


class TestFeaturize:
    def test_csv_on_stdout(self, session_file, capsys):
        code, out, _ = run(["featurize", "--session", str(session_file)], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("label,scheme,normalization,x0")
        assert len(lines) == 1 + 12  # header + one row per PIN entry

    def test_csv_to_file(self, session_file, tmp_path, capsys):
        out_path = tmp_path / "features.csv"
        code, out, _ = run(
            ["featurize", "--session", str(session_file), "-o", str(out_path)],
            capsys)
        assert code == 0
        assert json.loads(out) == {"rows": 12, "written": str(out_path)}
        assert out_path.read_text().count("\n") == 13

    def test_lux_only_device_cannot_serve_lrgbw(self, lux_only_file, capsys):
        code, _, err = run(
            ["featurize", "--session", str(lux_only_file), "--scheme", "lrgbw"],
            capsys)
        assert code == 2
        assert stderr_record(err)["error"] == "FeatureUnavailableError"

    def test_lux_only_device_still_serves_l(self, lux_only_file, capsys):
        code, out, _ = run(
            ["featurize", "--session", str(lux_only_file), "--scheme", "l"],
            capsys)
        assert code == 0
        assert out.startswith("label,")

    def test_missing_session_flag(self, capsys):
        code, _, err = run(["featurize"], capsys)
        assert code == 2
        assert "session" in stderr_record(err)["message"]

    def test_malformed_file_is_a_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("this is not a session\n")
        code, _, err = run(["featurize", "--session", str(bad)], capsys)
        assert code == 1
        assert stderr_record(err)["error"] == "SessionParseError"


class TestEval:
    def test_single_cell_smoke(self, capsys, tmp_path):
        outdir = tmp_path / "results"
        code, out, _ = run(
            ["eval", *FAST_EVAL, "--seed", "2", "--outdir", str(outdir)], capsys)
        assert code == 0
        record = json.loads(out.strip().splitlines()[-1])
        assert record["classifier"] == "lda"
        assert record["scheme"] == "lrgbw"
        assert 0.0 <= record["mean_top1"] <= 1.0
        assert "accuracy_at_1" in record
        assert (outdir / "report.csv").exists()
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["config"]["seed"] == 2
        assert summary["config"]["mode"] == "single"

    def test_eval_on_session_file(self, session_file, capsys):
        code, out, _ = run(
            ["eval", "--session", str(session_file), "--folds", "3",
             "--classifier", "knn"], capsys)
        assert code == 0
        assert json.loads(out.strip().splitlines()[-1])["classifier"] == "knn"

    def test_session_plus_synth_flags_rejected(self, session_file, capsys):
        code, _, err = run(
            ["eval", "--session", str(session_file), "--pins", "4"], capsys)
        assert code == 2
        assert "--pins" in stderr_record(err)["message"]

    def test_compare_grid(self, capsys):
        code, out, _ = run(["eval", *FAST_EVAL, "--compare"], capsys)
        assert code == 0
        records = [json.loads(l) for l in out.strip().splitlines()]
        pairs = {(r["classifier"], r["scheme"]) for r in records}
        assert len(pairs) == 9  # 3 classifiers x 3 schemes

    def test_compare_on_lux_only_device_reports_failed_cells(self, capsys):
        # galaxy-s4-mini records lux only but is fast enough for cubic fits,
        # so exactly the channel-hungry scheme fails
        code, out, err = run(
            ["eval", *FAST_EVAL, "--compare", "--device", "galaxy-s4-mini"], capsys)
        assert code == 1
        records = [json.loads(l) for l in out.strip().splitlines()]
        failed = [r for r in records if "error" in r]
        good = [r for r in records if "error" not in r]
        assert {r["scheme"] for r in failed} == {"lrgbw"}
        assert len(failed) == 3
        assert {r["scheme"] for r in good} == {"l", "poly3"}
        assert stderr_record(err)["error"] == "CellError"

    def test_compare_with_sweep_rejected(self, capsys):
        code, _, err = run(
            ["eval", *FAST_EVAL, "--compare", "--sweep-rates", "750,5"], capsys)
        assert code == 2
        assert "cannot be combined" in stderr_record(err)["message"]

    def test_sweep(self, capsys):
        code, out, _ = run(
            ["eval", *FAST_EVAL, "--sweep-rates", "750,50"], capsys)
        assert code == 0
        records = [json.loads(l) for l in out.strip().splitlines()]
        assert [r["rate_hz"] for r in records] == [750, 50]

    def test_sweep_above_native_rate(self, capsys):
        code, _, err = run(
            ["eval", *FAST_EVAL, "--sweep-rates", "1500"], capsys)
        assert code == 2
        assert "sweep rates" in stderr_record(err)["message"]

    def test_guess_curve_lines(self, capsys):
        code, out, _ = run(["eval", *FAST_EVAL, "--guess-curve"], capsys)
        assert code == 0
        assert "# guess curve:" in out
        assert "n_guesses,accuracy,baseline" in out


class TestConfigLayering:
    def test_config_file_applies(self, tmp_path, capsys):
        cfg = tmp_path / "luxskim.toml"
        cfg.write_text(
            'seed = 5\n[synth]\npins = 4\nreps = 3\nunsafe_cardinality = true\n')
        out_path = tmp_path / "s.jsonl"
        code, out, _ = run(
            ["synth", "--config", str(cfg), "-o", str(out_path)], capsys)
        assert code == 0
        record = json.loads(out)
        assert record["seed"] == 5
        assert record["pins"] == 12

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "luxskim.toml"
        cfg.write_text('[synth]\npins = 4\nreps = 3\nunsafe_cardinality = true\nseed = 5\n')
        code, out, _ = run(
            ["synth", "--config", str(cfg), "--seed", "9",
             "-o", str(tmp_path / "s.jsonl")], capsys)
        assert code == 0
        assert json.loads(out)["seed"] == 9

    def test_env_seed_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LUXSKIM_SEED", "33")
        code, out, _ = run(
            ["synth", *FAST_SYNTH, "-o", str(tmp_path / "s.jsonl")], capsys)
        assert code == 0
        assert json.loads(out)["seed"] == 33

    def test_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LUXSKIM_SEED", "33")
        code, out, _ = run(
            ["synth", *FAST_SYNTH, "--seed", "1", "-o", str(tmp_path / "s.jsonl")],
            capsys)
        assert code == 0
        assert json.loads(out)["seed"] == 1

    def test_config_beats_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LUXSKIM_SEED", "33")
        cfg = tmp_path / "luxskim.toml"
        cfg.write_text('seed = 5\n[synth]\npins = 4\nreps = 3\nunsafe_cardinality = true\n')
        code, out, _ = run(
            ["synth", "--config", str(cfg), "-o", str(tmp_path / "s.jsonl")],
            capsys)
        assert code == 0
        assert json.loads(out)["seed"] == 5

    def test_bad_env_seed(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LUXSKIM_SEED", "pony")
        code, _, err = run(
            ["synth", *FAST_SYNTH, "-o", str(tmp_path / "s.jsonl")], capsys)
        assert code == 2
        assert "LUXSKIM_SEED" in stderr_record(err)["message"]

    def test_missing_config_file(self, capsys):
        code, _, err = run(["synth", "--config", "/no/such/file.toml"], capsys)
        assert code == 2
        assert stderr_record(err)["error"] == "ConfigError"

    def test_invalid_toml(self, tmp_path, capsys):
        cfg = tmp_path / "broken.toml"
        cfg.write_text("this = [unclosed\n")
        code, _, err = run(["synth", "--config", str(cfg)], capsys)
        assert code == 2
        assert stderr_record(err)["error"] == "ConfigError"

    def test_eval_section_applies(self, tmp_path, capsys):
        cfg = tmp_path / "luxskim.toml"
        cfg.write_text(
            "[eval]\npins = 4\nreps = 3\nunsafe_cardinality = true\n"
            'folds = 3\nclassifier = "knn"\n')
        code, out, _ = run(["eval", "--config", str(cfg)], capsys)
        assert code == 0
        assert json.loads(out.strip().splitlines()[-1])["classifier"] == "knn"
