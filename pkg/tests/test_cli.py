import json
import logging

import pytest

from dynamic_covering import TqdmLoggingHandler
from dynamic_covering.cli import EXIT_ERROR, EXIT_OK, main
from dynamic_covering.persistence import state_to_bytes


@pytest.fixture
def grown_file(tmp_path, state_file, batch_file):
    out = tmp_path / "grown.dcas"
    assert main(["update", str(state_file), str(batch_file), "--out", str(out)]) == 0
    return out


def test_build(tmp_path, covering_file, capsys):
    out = tmp_path / "state.dcas"
    assert main(["build", str(covering_file), "--out", str(out)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["n: 4", "m: 3"]
    assert out.exists()


def test_build_reports_parse_errors(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("element C1: x1\n", encoding="utf-8")
    assert main(["build", str(path), "--out", str(tmp_path / "x.dcas")]) == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error:")


def test_approx_on_base_state(state_file, capsys):
    assert main(["approx", str(state_file), "--set", "x3,x4"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "SL: {x3}" in lines
    assert "IL: {x3,x4}" in lines
    assert len(lines) == 6


def test_approx_after_update(grown_file, capsys):
    capsys.readouterr()
    assert main(["approx", str(grown_file), "--set", "x3,x4,x5", "--op", "xh"]) == 0
    assert capsys.readouterr().out.strip() == "XH: {x2,x3,x4,x5}"
    assert main(["approx", str(grown_file), "--set", "x3,x4,x5", "--op", "sl"]) == 0
    assert capsys.readouterr().out.strip() == "SL: {}"
    args = ["approx", str(grown_file), "--set", "x3,x4,x5", "--op", "xl", "--vector"]
    assert main(args) == 0
    assert capsys.readouterr().out.strip() == "XL: 001110"


def test_approx_unknown_object(state_file, capsys):
    assert main(["approx", str(state_file), "--set", "x9"]) == EXIT_ERROR
    assert "x9" in capsys.readouterr().err


def test_update_prints_costs(tmp_path, state_file, batch_file, capsys):
    out = tmp_path / "grown.dcas"
    args = ["update", str(state_file), str(batch_file), "--out", str(out), "--strict"]
    assert main(args) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["t: 2", "l: 2"]
    assert [line.split(":")[0] for line in lines[2:]] == [
        "matrix_ops",
        "gamma_ops",
        "pi_ops",
    ]


def test_update_with_name_collision(tmp_path, state_file, capsys):
    batch = tmp_path / "collide.txt"
    batch.write_text("add-objects: x1\nnew C4: x1\n", encoding="utf-8")
    out = tmp_path / "out.dcas"
    assert main(["update", str(state_file), str(batch), "--out", str(out)]) == 1
    assert capsys.readouterr().err.startswith("error:")
    assert not out.exists()


def test_verify_passes(grown_file, capsys):
    capsys.readouterr()
    assert main(["verify", str(grown_file), "--queries", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4 + 5
    assert all(line.startswith("PASS") for line in lines)


def test_verify_names_a_flipped_entry(tmp_path, base_state, capsys):
    payload = bytearray(state_to_bytes(base_state))
    # gamma[0, 2] sits in the first byte of the gamma block
    payload[len(payload) - 2 * 4 * 8] ^= 0b100
    path = tmp_path / "broken.dcas"
    path.write_bytes(bytes(payload))
    assert main(["verify", str(path), "--queries", "0"]) == EXIT_ERROR
    out = capsys.readouterr().out
    assert "FAIL gamma from M: differs at gamma[x1,x3]" in out
    assert "PASS pi from M" in out


def test_show(state_file, capsys):
    assert main(["show", str(state_file), "--matrix", "pi"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == [
        "objects: x1 x2 x3 x4",
        "elements: C1 C2 C3",
        "pi:",
        "1001",
        "1101",
        "0011",
        "0001",
    ]


def test_show_json(state_file, capsys):
    assert main(["show", str(state_file), "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["gamma"][0] == [1, 1, 0, 1]
    assert set(payload) == {"objects", "elements", "M", "gamma", "pi"}


BENCH_ARGS = ["bench", "--n", "50", "--m", "10", "--t", "2", "--l", "2", "--seed", "7"]


def test_bench_csv_is_reproducible(tmp_path, capsys):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (first, second):
        args = BENCH_ARGS + ["--batches", "3", "--no-wall-time", "--csv", str(path)]
        assert main(args) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "algo,n,m,t,l,phase,ops,nanos"
    assert len(lines) == 1 + 12 * 3
    out = capsys.readouterr().out
    assert "ratio_ics_ncs: " in out


def test_bench_json_and_config(tmp_path, capsys):
    config = tmp_path / "bench.yaml"
    config.write_text("n: 30\nm: 6\nt: 1\nl: 1\nseed: 4\n", encoding="utf-8")
    assert main(["bench", "--config", str(config), "--m", "8", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert (payload["params"]["n"], payload["params"]["m"]) == (30, 8)
    assert payload["totals"]["NCS"]["records"] == 1
    assert 0 < payload["ratio_ics_ncs"] < 1.5


def test_bench_rejects_bad_config(tmp_path, capsys):
    config = tmp_path / "bench.yaml"
    config.write_text("n: -3\n", encoding="utf-8")
    assert main(["bench", "--config", str(config)]) == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error:")


def test_bench_stdout_holds_only_result_lines(capsys):
    args = ["bench", "--n", "20", "--m", "4", "--t", "1", "--l", "1"]
    assert main(args) == EXIT_OK
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert [line.split(":")[0] for line in lines] == [
        "NCS",
        "ICS",
        "NCX",
        "ICX",
        "ratio_ics_ncs",
        "ratio_icx_ncx",
    ]
    assert "level: INFO" in captured.err
    package_logger = logging.getLogger("dynamic_covering")
    assert package_logger.propagate
    assert not any(isinstance(h, TqdmLoggingHandler) for h in package_logger.handlers)


def test_gen_then_five_chained_updates_verify(tmp_path, capsys):
    inputs = tmp_path / "inputs"
    args = ["gen", "--out-dir", str(inputs), "--n", "12", "--m", "4"]
    args += ["--t", "2", "--l", "2", "--batches", "5", "--seed", "3"]
    assert main(args) == EXIT_OK
    written = capsys.readouterr().out.splitlines()
    assert [p.rsplit("/", 1)[-1] for p in written] == ["covering.txt"] + [
        f"batch-{k}.txt" for k in range(1, 6)
    ]

    state = tmp_path / "state-0.dcas"
    assert main(["build", str(inputs / "covering.txt"), "--out", str(state)]) == 0
    for k in range(1, 6):
        grown = tmp_path / f"state-{k}.dcas"
        batch = inputs / f"batch-{k}.txt"
        assert main(["update", str(state), str(batch), "--out", str(grown)]) == 0
        state = grown
    capsys.readouterr()

    assert main(["verify", str(state)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4 + 20
    assert all(line.startswith("PASS") for line in lines)
    assert main(["show", str(state), "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["objects"]) == 12 + 5 * 2
    assert len(payload["elements"]) == 4 + 5 * 2
