"""Command-line interface: parsing, records, determinism, exit codes."""

import json

import pytest

from momentbounds.cli import main, parse_testfn
from momentbounds.testfunc import NaiveTestFunction


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_records(out: str):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


# ---- test-function spec parsing ----


def test_parse_testfn_naive():
    tf = parse_testfn("naive:v=1/3")
    assert isinstance(tf, NaiveTestFunction)
    assert tf.v == pytest.approx(1.0 / 3.0)


def test_parse_testfn_generator():
    tf = parse_testfn("gen:sinx2:half=1/8")
    assert tf.support_bound == pytest.approx(0.25)


def test_parse_testfn_rejects_zero_v():
    with pytest.raises(ValueError):
        parse_testfn("naive:v=0")


# ---- bound command ----


def test_bound_moment_command(capsys):
    code, out, err = run_cli(
        [
            "bound",
            "--family",
            "so-even",
            "--rank",
            "20",
            "--method",
            "moment4",
            "--testfn",
            "naive:v=1/3",
            "--regime",
            "with_R",
        ],
        capsys,
    )
    assert code == 0, err
    records = parse_records(out)
    assert len(records) == 1
    assert records[0]["upper_bound"] == pytest.approx(4.49988e-6, rel=1e-4)


def test_bound_level1_reference_multiple_ranks(capsys):
    code, out, _ = run_cli(
        ["bound", "--family", "so-even", "--ranks", "6,8,10", "--method", "level1"],
        capsys,
    )
    assert code == 0
    values = [r["upper_bound"] for r in parse_records(out)]
    assert values == pytest.approx([0.144090, 0.1080675, 0.086454], rel=1e-4)


def test_bound_parity_error_exit(capsys):
    code, out, err = run_cli(
        [
            "bound",
            "--family",
            "so-odd",
            "--rank",
            "6",
            "--method",
            "moment4",
            "--testfn",
            "naive:v=1/3",
            "--regime",
            "with_R",
        ],
        capsys,
    )
    assert code == 1
    assert out == ""
    error = json.loads(err)
    assert error["error"] == "parity-mismatch"


def test_bound_malformed_testfn(capsys):
    code, _, err = run_cli(
        ["bound", "--family", "so-even", "--rank", "6", "--testfn", "naive:v=oops"],
        capsys,
    )
    assert code == 1
    assert json.loads(err)["error"] == "invalid-input"


# ---- moment command ----


def test_moment_command(capsys):
    code, out, _ = run_cli(
        [
            "moment",
            "--family",
            "so-odd",
            "--testfn",
            "naive:v=1/3",
            "--testfn",
            "naive:v=1/3",
            "--testfn",
            "naive:v=1/3",
            "--testfn",
            "naive:v=1/3",
            "--regime",
            "with_R",
        ],
        capsys,
    )
    assert code == 0
    rec = parse_records(out)[0]
    assert rec["value"] == pytest.approx(1.0 / 3.0 - 1.0 / 5040.0, rel=1e-6)
    assert rec["sign_applied"] == -1


# ---- table command ----


def test_table_t2(capsys):
    code, out, _ = run_cli(["table", "T2"], capsys)
    assert code == 0
    records = parse_records(out)
    assert len(records) == 15  # 5 ranks x 3 columns
    assert all(r["within_tolerance"] for r in records)
    cell = next(r for r in records if r["rank"] == 20 and r["column"] == "moment4_naive")
    assert cell["computed"] == pytest.approx(4.49988e-6, rel=1e-4)
    assert abs(cell["rel_dev"]) <= 1e-4


def test_round_trip_and_determinism(tmp_path, capsys):
    args = [
        "bound",
        "--family",
        "so-even",
        "--ranks",
        "6,8",
        "--method",
        "moment4",
        "--testfn",
        "naive:v=1/3",
        "--regime",
        "with_R",
    ]
    code, out1, _ = run_cli(args, capsys)
    assert code == 0
    code, out2, _ = run_cli(args, capsys)
    assert out1 == out2  # byte-identical
    # every emitted record re-parses and re-serializes identically
    for line in out1.splitlines():
        record = json.loads(line)
        assert json.dumps(record, sort_keys=True) == line


def test_out_file_with_csv_mirror(tmp_path, capsys):
    out_path = tmp_path / "bounds.jsonl"
    code, _, _ = run_cli(
        [
            "bound",
            "--family",
            "so-even",
            "--rank",
            "6",
            "--method",
            "level1",
            "--out",
            str(out_path),
        ],
        capsys,
    )
    assert code == 0
    records = [json.loads(line) for line in out_path.read_text().splitlines()]
    assert records[0]["method"] == "level1"
    mirror = out_path.with_suffix(".jsonl.csv")
    assert mirror.exists()
    header = mirror.read_text().splitlines()[0]
    assert "upper_bound" in header


def test_csv_format_to_stdout(capsys):
    code, out, _ = run_cli(
        ["bound", "--family", "so-even", "--rank", "6", "--method", "level1", "--format", "csv"],
        capsys,
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("family,")
    assert len(lines) == 2


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("family = so-even\nmethod = level1\nranks = 6,8\n")
    code, out, _ = run_cli(["--config", str(cfg), "bound"], capsys)
    assert code == 0
    assert len(parse_records(out)) == 2
    # flags override config values
    code, out, _ = run_cli(["--config", str(cfg), "bound", "--ranks", "10"], capsys)
    records = parse_records(out)
    assert len(records) == 1 and records[0]["rank"] == 10


def test_optimize_command_singleton(capsys):
    code, out, _ = run_cli(
        [
            "optimize",
            "--family",
            "so-even",
            "--rank",
            "100",
            "--basis",
            "sinx2:half=1/8",
            "--basis",
            "fixed:naive:v=1/4",
            "--support",
            "1/4",
            "--regime",
            "mock_gaussian",
            "--restarts",
            "1",
            "--max-evals",
            "5",
        ],
        capsys,
    )
    assert code == 0
    records = parse_records(out)
    result = next(r for r in records if r["kind"] == "result")
    assert result["bound"] == pytest.approx(3.7858e-9, rel=1e-3)


def test_rmt_verify_small_run(capsys):
    code, out, _ = run_cli(
        [
            "rmt-verify",
            "--group",
            "so-even",
            "--N",
            "10",
            "--samples",
            "3000",
            "--testfn",
            "naive:v=1/3",
            "--orders",
            "2,4",
            "--seed",
            "7",
        ],
        capsys,
    )
    records = parse_records(out)
    assert len(records) == 2
    assert all("z_score" in r and "allowance" in r for r in records)
    assert code == 0, records
