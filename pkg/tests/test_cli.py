import json
import math

import pytest

from qmetro import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTableCommand:
    def test_closed_form_rows(self, capsys):
        code, out, _ = run(capsys, "table", "--nbar", "4", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        rows = {r["state_id"]: r for r in doc["rows"]}
        assert rows["noon"]["q"] == 1.0
        assert rows["noon"]["j"] == -1.0
        assert rows["noon"]["qfi"] == 16.0
        assert rows["amplified_bell"]["note"] == "formula-only"

    def test_oracle_columns(self, capsys):
        code, out, _ = run(capsys, "table", "--nbar", "2", "--oracle", "--format", "json")
        assert code == 0
        rows = {r["state_id"]: r for r in json.loads(out)["rows"]}
        assert rows["twin_fock"]["max_rel_dev"] < 1e-8
        assert rows["caves"]["max_rel_dev"] < 1e-8
        assert "oracle_q" not in rows["amplified_bell"]

    def test_rejects_empty_probe(self, capsys):
        code, _, err = run(capsys, "table", "--nbar", "0")
        assert code == 2
        assert "positive" in err

    def test_csv_layout(self, capsys):
        code, out, _ = run(capsys, "table", "--nbar", "2")
        lines = out.splitlines()
        assert lines[0].startswith("#")
        assert lines[1] == ",".join(cli.TABLE_COLUMNS)
        assert len(lines) == 2 + 8

    def test_oracle_cutoff_failure_is_per_row(self, capsys):
        # a cutoff too small for the squeezed families must not kill the table
        code, out, _ = run(
            capsys, "table", "--nbar", "2", "--oracle", "--cutoff", "8", "--format", "json")
        assert code == 0
        rows = {r["state_id"]: r for r in json.loads(out)["rows"]}
        assert "oracle unavailable" in rows["twin_squeezed_vacuum"]["note"]
        assert rows["twin_fock"]["max_rel_dev"] < 1e-8


class TestProtocolCommand:
    def test_reference_signal(self, capsys):
        code, out, _ = run(
            capsys, "protocol", "--nbar", "1", "--phi", "1.5707963", "--eta", "1",
            "--format", "json",
        )
        assert code == 0
        row = json.loads(out)["rows"][0]
        assert row["signal"] == pytest.approx(8.0, rel=1e-9)

    def test_headline_ratio(self, capsys):
        code, out, _ = run(
            capsys, "protocol", "--nbar", "15000", "--phi", "0.001", "--eta", "0.99",
            "--format", "json",
        )
        assert code == 0
        row = json.loads(out)["rows"][0]
        assert row["snl_ratio"] == pytest.approx(5.0, rel=0.10)

    def test_singular_operating_point(self, capsys):
        code, _, err = run(capsys, "protocol", "--nbar", "1", "--phi", "0", "--eta", "0.9")
        assert code == 2
        assert "singular" in err

    def test_both_engines_report_deviation(self, capsys):
        code, out, _ = run(
            capsys, "protocol", "--nbar", "1", "--phi", "0.3", "--eta", "0.9",
            "--engine", "both", "--cutoff", "60", "--format", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert float(doc["meta"]["signal_rel_dev"]) < 1e-6
        engines = [r["engine"] for r in doc["rows"]]
        assert engines == ["gaussian", "fock"]

    def test_nbar_r_exclusive(self, capsys):
        code, _, err = run(capsys, "protocol", "--phi", "0.1")
        assert code == 2


class TestSweepCommand:
    def test_deterministic_output(self, capsys, tmp_path):
        args = ("sweep", "--nbar", "1,10,100", "--phi", "0.001,0.002", "--eta", "0.9,0.99")
        first = run(capsys, *args)
        second = run(capsys, *args)
        assert first == second
        assert first[0] == 0

    def test_row_order_and_schema(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--nbar", "1,10", "--phi", "0.001", "--eta", "0.9,0.99")
        lines = out.splitlines()
        assert lines[1] == "n_bar,phi,eta,signal,variance,delta_phi,snl,snl_ratio"
        data = [line.split(",") for line in lines[2:]]
        keys = [(float(r[0]), float(r[1]), float(r[2])) for r in data]
        assert keys == sorted(keys)
        assert len(keys) == 4

    def test_single_point_matches_protocol(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--nbar", "1.5", "--phi", "0.3", "--eta", "0.9",
            "--format", "json",
        )
        sweep_row = json.loads(out)["rows"][0]
        code, out, _ = run(
            capsys, "protocol", "--nbar", "1.5", "--phi", "0.3", "--eta", "0.9",
            "--format", "json",
        )
        proto_row = json.loads(out)["rows"][0]
        assert sweep_row["signal"] == proto_row["signal"]
        assert sweep_row["variance"] == proto_row["variance"]
        assert sweep_row["delta_phi"] == proto_row["delta_phi"]

    def test_logspace_grid(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--nbar-logspace", "10", "100000", "5",
            "--phi", "0.001", "--eta", "0.99", "--format", "json",
        )
        assert code == 0
        rows = json.loads(out)["rows"]
        n_bars = [r["n_bar"] for r in rows]
        assert n_bars[0] == pytest.approx(10.0)
        assert n_bars[-1] == pytest.approx(1e5)
        # sub-shot-noise beyond the crossover, classical below it
        assert rows[0]["snl_ratio"] < 1.0
        assert rows[-1]["snl_ratio"] > 1.0

    def test_unit_transmission_ratio_form(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--nbar", "1,4,10", "--phi", "0.0001", "--eta", "1",
            "--format", "json",
        )
        for row in json.loads(out)["rows"]:
            expected = math.sqrt(2.0 * (row["n_bar"] + 1.0))
            assert row["snl_ratio"] == pytest.approx(expected, rel=1e-6)

    def test_grid_validation(self, capsys):
        code, _, err = run(capsys, "sweep", "--nbar", "5,2", "--phi", "0.1", "--eta", "0.9")
        assert code == 2
        code, _, err = run(capsys, "sweep", "--nbar", "2", "--phi", "2.0", "--eta", "0.9")
        assert code == 2

    def test_unwritable_output(self, capsys):
        code, _, err = run(
            capsys, "sweep", "--nbar", "2", "--phi", "0.1", "--eta", "0.9",
            "--out", "/nonexistent-dir/x.csv",
        )
        assert code == 2

    def test_file_output_bit_identical(self, capsys, tmp_path):
        path_a, path_b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (path_a, path_b):
            code = cli.main([
                "sweep", "--nbar", "1,10", "--phi", "0.001", "--eta", "0.99",
                "--out", str(path),
            ])
            assert code == 0
        assert path_a.read_bytes() == path_b.read_bytes()


class TestValidateCommand:
    def test_quick_suite_passes(self, capsys):
        code, out, _ = run(capsys, "validate", "--level", "quick")
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        names = {c["name"] for c in report["checks"]}
        assert "noisy-phase-error-transcription" in names
        assert "engine-equivalence" in names

    def test_report_file(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code, out, _ = run(capsys, "validate", "--level", "quick", "--out", str(path))
        assert code == 0
        report = json.loads(path.read_text())
        assert report["level"] == "quick"
        assert "PASS" in out


class TestCutoffEnvironment:
    def test_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.CUTOFF_ENV_VAR, "60")
        code, out, _ = run(
            capsys, "protocol", "--nbar", "1", "--phi", "0.3", "--engine", "fock",
            "--format", "json",
        )
        assert code == 0
        assert json.loads(out)["rows"][0]["cutoff"] == 60

    def test_env_validation(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.CUTOFF_ENV_VAR, "many")
        code, _, err = run(capsys, "protocol", "--nbar", "1", "--phi", "0.3",
                           "--engine", "fock")
        assert code == 2
