"""Command-line interface tests: statuses, exit codes, determinism."""
import io
import json
import os

import pytest

from qorigami import anyons, interferometry
from qorigami.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(argv, capsys):
    code, out, err = run_cli(argv + ["--format", "json"], capsys)
    return code, (json.loads(out) if out else None), err


class TestModels:
    def test_list(self, capsys):
        code, report, _ = run_json(["models", "list"], capsys)
        assert code == 0
        names = [r["name"] for r in report["records"]]
        assert "toric_code" in names and "fibonacci" in names

    def test_verify_ising_passes(self, capsys):
        code, report, _ = run_json(["models", "verify", "ising"], capsys)
        assert code == 0
        assert all(r["status"] == "pass" for r in report["records"])

    def test_show_toric_trace(self, capsys):
        code, report, _ = run_json(["models", "show", "toric_code"], capsys)
        assert code == 0
        trace = next(r for r in report["records"]
                     if r["name"].endswith("trace_s"))
        assert trace["actual"]["re"] == pytest.approx(2.0)

    def test_verify_laughlin_needs_k(self, capsys):
        code, _, err = run_json(["models", "verify", "laughlin"], capsys)
        assert code == 2
        assert "k" in err

    def test_verify_bad_file_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_json(["models", "verify", str(path)], capsys)
        assert code == 2

    def test_verify_non_unitary_s_fails(self, tmp_path, capsys):
        model = anyons.builtin_model("toric_code")
        doc = json.loads(model.to_json())
        doc["s_real"][0][0] = 0.9
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(doc))
        code, report, _ = run_json(["models", "verify", str(path)], capsys)
        assert code == 1
        statuses = {r["name"].split(":")[1]: r["status"]
                    for r in report["records"]}
        assert statuses["s_unitary"] == "fail"


class TestMcg:
    def test_eval_rb_s(self, capsys):
        code, report, _ = run_json(["mcg", "eval", "Rb S"], capsys)
        assert code == 0
        matrix = next(r for r in report["records"] if r["name"] == "matrix")
        assert matrix["actual"] == [[0, 1], [1, 0]]

    def test_eval_empty_word_is_identity(self, capsys):
        code, report, _ = run_json(["mcg", "eval", ""], capsys)
        assert code == 0
        matrix = next(r for r in report["records"] if r["name"] == "matrix")
        assert matrix["actual"] == [[1, 0], [0, 1]]

    def test_eval_parse_error(self, capsys):
        code, _, err = run_json(["mcg", "eval", "Q"], capsys)
        assert code == 2

    def test_relations_all_pass(self, capsys):
        code, report, _ = run_json(["mcg", "relations"], capsys)
        assert code == 0
        assert report["records"]
        assert all(r["status"] == "pass" for r in report["records"])


class TestOrigami:
    def test_list_marks_stub(self, capsys):
        code, report, _ = run_json(["list"], capsys)
        assert code == 0
        stub = next(r for r in report["records"]
                    if r["name"] == "fig3b_16layer_S")
        assert stub["actual"] == "stub"

    def test_verify_single_entry(self, capsys):
        code, report, _ = run_json(["verify", "appB_8layer_S"], capsys)
        assert code == 0
        rec = report["records"][0]
        assert rec["status"] == "pass"
        assert rec["actual"] == [[0, 1], [-1, 0]]

    def test_verify_unknown_entry(self, capsys):
        code, _, err = run_json(["verify", "nonexistent"], capsys)
        assert code == 2

    def test_verify_stub_is_skipped_not_failed(self, capsys):
        code, report, _ = run_json(["verify", "fig3b_16layer_S"], capsys)
        assert code == 0
        assert report["records"][0]["status"] == "skipped"
        assert report["records"][0]["actual"]

    def test_verify_all_deterministic(self, capsys):
        args = ["verify", "all", "--seed", "7"]
        code1, out1, _ = run_cli(args + ["--format", "json"], capsys)
        code2, out2, _ = run_cli(args + ["--format", "json"], capsys)
        assert code1 == code2 == 0
        assert out1.encode("utf-8") == out2.encode("utf-8")
        assert out1.endswith("\n")

    def test_format_changes_rendering_not_statuses(self, capsys):
        code_j, report, _ = run_json(["verify", "fig2_fold2_RaS"], capsys)
        code_t, out_t, _ = run_cli(
            ["verify", "fig2_fold2_RaS", "--format", "text"], capsys)
        assert code_j == code_t == 0
        assert "pass" in out_t


class TestStabilizer:
    def test_rotate_quarter_matches_oracle(self, capsys):
        code, report, _ = run_json(
            ["stabilizer", "verify", "--lattice", "2",
             "--move", "rotate_quarter"], capsys)
        assert code == 0
        assert report["records"][0]["status"] == "pass"

    def test_lattice_one_is_usage_error(self, capsys):
        code, _, err = run_json(
            ["stabilizer", "verify", "--lattice", "1",
             "--move", "reflect_diagonal"], capsys)
        assert code == 2
        assert "lattice" in err

    def test_unknown_move(self, capsys):
        code, _, err = run_json(
            ["stabilizer", "verify", "--lattice", "2",
             "--move", "sideways"], capsys)
        assert code == 2

    def test_genon_protocol_alias(self, capsys):
        code, report, _ = run_json(
            ["stabilizer", "genon", "--L", "6",
             "--protocol", "fig3a_i_ii"], capsys)
        assert code == 0
        assert report["records"][0]["status"] == "pass"

    def test_config_cap_override(self, tmp_path, capsys, monkeypatch):
        cfg = tmp_path / "caps.json"
        cfg.write_text(json.dumps({"stabilizer_max_lattice": 2}))
        monkeypatch.setenv("ORIGAMI_SIM_CONFIG", str(cfg))
        code, _, err = run_json(
            ["stabilizer", "verify", "--lattice", "3",
             "--move", "reflect_diagonal"], capsys)
        assert code == 2

    def test_bad_config_is_usage_error(self, tmp_path, capsys, monkeypatch):
        cfg = tmp_path / "caps.json"
        cfg.write_text(json.dumps({"unknown_cap": 5}))
        monkeypatch.setenv("ORIGAMI_SIM_CONFIG", str(cfg))
        code, _, err = run_json(
            ["stabilizer", "verify", "--lattice", "2",
             "--move", "reflect_diagonal"], capsys)
        assert code == 2


class TestMeasure:
    def test_identity_suite(self, capsys):
        code, report, _ = run_json(
            ["measure", "identity-suite", "--seed", "3"], capsys)
        assert code == 0
        names = {r["name"] for r in report["records"]}
        assert {"parity_swap_identity", "twist_identity_N2",
                "twist_identity_N3", "cswap_blocks",
                "four_beamsplitter"} <= names

    def test_estimate_readout(self, tmp_path, capsys):
        path = tmp_path / "budget.json"
        path.write_text(json.dumps({"N": 50, "readout": 0.99}))
        code, report, _ = run_json(
            ["measure", "estimate", str(path)], capsys)
        assert code == 0
        readout = next(r for r in report["records"]
                       if r["name"] == "readout_fidelity")
        assert readout["actual"] == pytest.approx(0.605, abs=5e-4)

    def test_estimate_unknown_field(self, tmp_path, capsys):
        path = tmp_path / "budget.json"
        path.write_text(json.dumps({"N": 2, "bogus": 1}))
        code, _, err = run_json(["measure", "estimate", str(path)], capsys)
        assert code == 2

    def test_extract_round_trip(self, tmp_path, capsys):
        model = anyons.builtin_model("double_semion")
        meas = interferometry.synthetic_measurements(model)
        records = [interferometry.MeasurementRecord(k, v).to_dict()
                   for k, v in meas.items()]
        path = tmp_path / "ds.json"
        path.write_text(json.dumps({"model": "double_semion",
                                    "records": records}))
        code, report, _ = run_json(
            ["measure", "extract", str(path)], capsys)
        assert code == 0
        assert all(r["status"] == "pass" for r in report["records"])

    def test_extract_missing_rows(self, tmp_path, capsys):
        model = anyons.builtin_model("double_semion")
        meas = interferometry.synthetic_measurements(model)
        meas.pop("imag:0,1")
        records = [interferometry.MeasurementRecord(k, v).to_dict()
                   for k, v in meas.items()]
        path = tmp_path / "short.json"
        path.write_text(json.dumps({"model": "double_semion",
                                    "records": records}))
        code, _, err = run_json(["measure", "extract", str(path)], capsys)
        assert code == 2
        assert "missing" in err

    def test_missing_input_file(self, capsys):
        code, _, err = run_json(
            ["measure", "extract", "/nonexistent/input.json"], capsys)
        assert code == 2


class TestReportShape:
    def test_json_report_has_stable_key_order(self, capsys):
        code, out, _ = run_cli(["mcg", "relations", "--format", "json"],
                               capsys)
        doc = json.loads(out)
        assert list(doc) == sorted(doc)
        for rec in doc["records"]:
            assert list(rec) == sorted(rec)

    def test_exit_one_iff_any_fail(self, tmp_path, capsys):
        model = anyons.builtin_model("toric_code")
        doc = json.loads(model.to_json())
        doc["s_real"][0][0] = 0.9
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(doc))
        code, report, _ = run_json(["models", "verify", str(path)], capsys)
        assert code == 1
        assert report["overall"] == "fail"
