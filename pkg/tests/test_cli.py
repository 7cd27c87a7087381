import csv
import io
import json
import subprocess
import sys

import pytest

from bellforge.cli import EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_value_mabk5_fast(capsys):
    code, out, _ = run(capsys, "value", "--family", "mabk", "--n", "5", "--method", "fast")
    assert code == 0
    assert json.loads(out)["fast"]["value"] == pytest.approx(4, abs=1e-9)


def test_value_both_reports_agreement(capsys):
    code, out, _ = run(capsys, "value", "--family", "mabk", "--n", "3")
    d = json.loads(out)
    assert code == 0 and d["agreement"]["passed"]
    assert d["oracle"]["value"] == pytest.approx(2, abs=1e-7)


def test_value_from_table(capsys):
    table = "0" * 7 + "1"
    code, out, _ = run(capsys, "value", "--table", table, "--method", "fast")
    assert code == 0 and json.loads(out)["fast"]["value"] > 1


def test_value_uffink(capsys):
    code, out, _ = run(capsys, "value", "--family", "uffink-m", "--n", "3", "--method", "fast")
    assert code == 0 and json.loads(out)["fast"]["value"] == pytest.approx(4, abs=1e-8)


def test_bounds_mabk3(capsys):
    code, out, _ = run(capsys, "bounds", "--family", "mabk", "--n", "3")
    d = json.loads(out)
    assert code == 0
    assert d["local"] == "1"
    assert d["biseparable_value"] == pytest.approx(2 ** 0.5)
    assert d["quantum_value"] == pytest.approx(2)


def test_build_json(capsys):
    code, out, _ = run(capsys, "build", "--family", "mabk", "--n", "2")
    assert code == 0 and json.loads(out)["n"] == 2


def test_selftest_mabk3(capsys):
    code, out, _ = run(capsys, "selftest", "--family", "mabk", "--n", "3")
    assert code == 0 and json.loads(out)["verdict"] == "full-selftest"


def test_classify_n3(capsys):
    code, out, _ = run(capsys, "classify", "--n", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert sum(r["label"] != "trivial" for r in rows) == 4


@pytest.mark.parametrize("argv", [
    ("value", "--family", "mabk"),
    ("value", "--family", "mabk", "--n", "0"),
    ("value", "--table", "010"),
    ("value", "--family", "uffink-m", "--n", "2"),
    ("classify", "--n", "5"),
    ("bounds", "--family", "mabk", "--n", "13"),
    ("value", "--family", "mabk", "--n", "9", "--method", "oracle"),
    ("selftest", "--family", "uffink-m", "--n", "3"),
    ("bounds", "--family", "mabk", "--n", "3", "--format", "csv"),
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert out == "" and "error" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["value", "--family", "nonsense"])
    assert exc.value.code == 2


def test_output_is_byte_identical(capsys):
    argv = ("value", "--family", "svetlichny", "--n", "3", "--sign", "-")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_out_file(tmp_path, capsys):
    path = tmp_path / "bounds.json"
    code, out, _ = run(capsys, "bounds", "--family", "mabk", "--n", "4", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["local"] == "1"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bellforge", "build", "--family", "mabk", "--n", "2"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["n"] == 2
