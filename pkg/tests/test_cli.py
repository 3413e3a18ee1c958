import csv
import io
import json
import os

import pytest

from holoball.cli import build_parser, main


def test_parser_subcommands_and_common_flags():
    parser = build_parser()
    args = parser.parse_args(["kernel-check", "--N", "2", "--q", "-0.5",
                              "--seed", "3", "--format", "json"])
    assert args.N == 2
    assert args.seed == 3
    assert args.format == "json"
    args = parser.parse_args(["run", "cfg.json", "--samples", "500"])
    assert args.samples == 500


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_kernel_check_passes(capsys):
    assert main(["kernel-check", "--N", "1", "--q", "0"]) == 0
    out = capsys.readouterr().out
    assert "series_vs_closed_rel_err" in out
    assert "pass" in out


def test_run_missing_config_exits_2(capsys):
    assert main(["run", "/nonexistent/cfg.json"]) == 2
    assert "config" in capsys.readouterr().err.lower()


def test_run_invalid_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenarios": [{"id": "x", "regime": "bogus"}]}))
    assert main(["run", str(cfg)]) == 2
    assert "regime" in capsys.readouterr().err


def test_run_empty_config_writes_output(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenarios": []}))
    out_dir = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out_dir)]) == 0
    path = out_dir / "reports.csv"
    assert path.exists()
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["scenario", "quantity", "value", "stderr", "n", "seed",
                      "verdict"]


def test_run_tiny_scenario_csv(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenarios": [
        {"id": "ne", "regime": "nonexistence", "params": {"case": "st_low"},
         "budgets": {"n": 1500}},
    ]}))
    assert main(["run", str(cfg), "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert "ne,divergence_slope" in out


def test_weight_class_bad_params_json_exits_2(capsys):
    code = main(["weight-class", "--class", "Bp", "--params", "{not json"])
    assert code == 2


def test_weight_class_non_member(capsys):
    code = main(["weight-class", "--class", "Bp", "--params", '{"a": 0}',
                 "--weight", "(1-|z|^2)^-2", "--samples", "2000"])
    assert code == 0
    assert "non_member" in capsys.readouterr().out


def test_bad_weight_expression_exits_2(capsys):
    code = main(["op-norm", "--weight", "zebra", "--samples", "500"])
    assert code == 2


def test_json_format_output(capsys):
    assert main(["kernel-check", "--q", "-3", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload[0]["scenario"] == "kernel-check"
