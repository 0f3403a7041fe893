import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from ebcap.cli import FIGURE_FILES, build_figures, main, read_curves
from ebcap.capacity import p_grid

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]


def test_cat_curve(capsys):
    code, out, _ = run(capsys, "cat", "--n", "4", "--modified", "--grid", "0.25:1:0.0025")
    assert code == 0
    table = rows(out)
    assert table[0] == ["p", "yield"]
    assert len(table) == 302
    assert table[-1] == ["1", "0.25"]


def test_cat_six_curves(capsys):
    code, out, _ = run(capsys, "cat", "--n", "3,4,5", "--both", "--grid", "0.5:1:0.25", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "ebcap.curves/1"
    assert [c["method"] for c in doc["curves"]] == ["cat3", "modcat3", "cat4", "modcat4", "cat5", "modcat5"]


@pytest.mark.parametrize(
    "argv",
    [
        ["cat", "--n", "1"],
        ["cat", "--grid", "0.5:1.5:0.1"],
        ["cat", "--grid", "0.5:1:0"],
        ["shor", "--strategy", "prefix=9"],
        ["shor", "--strategy", "greedy"],
        ["shor", "--code", "cat13"],
        ["epp", "recurrence", "--rounds", "0"],
        ["bounds"],
        ["threshold", "--family", "steane"],
        ["verify", "code", "--trials", "0"],
        ["shor", "--code", "shor9", "--code-file", "x.code"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_shor_prefix_and_regions(capsys):
    code, out, _ = run(capsys, "shor", "--strategy", "prefix=8", "--grid", "1:1:0.1")
    assert code == 0 and rows(out)[1] == ["1", "0.111111111111"]
    code, out, err = run(capsys, "shor", "--grid", "0.6:0.9:0.05")
    assert code == 0
    assert "region: prefix 8" in err and "region: prefix 4" in err


def test_code_file(tmp_path, capsys):
    path = tmp_path / "cat3.code"
    path.write_text("n 3\ng ZZI\ng IZZ\nX XXX\nZ ZZZ\n")
    code, out, _ = run(capsys, "shor", "--code-file", str(path), "--strategy", "prefix=2", "--grid", "0.9:0.9:0.1")
    assert code == 0
    assert float(rows(out)[1][1]) == pytest.approx(0.181246750771500704, abs=1e-11)
    path.write_text("n 3\ng ZZI\ng ZZ\nX XXX\nZ ZZZ\n")
    code, _, err = run(capsys, "shor", "--code-file", str(path))
    assert code == 2 and "line 3" in err


def test_epp_and_bounds_round_trip(tmp_path, capsys):
    grid = "0.7:1:0.1"
    assert run(capsys, "epp", "recurrence", "--rounds", "3", "--grid", grid, "--out", str(tmp_path / "r.csv"))[0] == 0
    assert run(capsys, "epp", "leung-shor", "--grid", grid, "--out", str(tmp_path / "ls.csv"))[0] == 0
    ls = read_curves(str(tmp_path / "ls.csv"))[0]
    assert ls.at(1.0) == 0.5
    code, out, _ = run(capsys, "bounds", str(tmp_path / "r.csv"), str(tmp_path / "ls.csv"), "--format", "json")
    assert code == 0
    env, qb = json.loads(out)["curves"]
    assert env["method"] == "eb-envelope" and qb["method"] == "qb-bound"
    assert qb["points"][-1][1] == pytest.approx(1 / 3)


def test_bounds_grid_mismatch(tmp_path, capsys):
    run(capsys, "epp", "leung-shor", "--grid", "0.7:1:0.1", "--out", str(tmp_path / "a.csv"))
    run(capsys, "epp", "leung-shor", "--grid", "0.7:1:0.05", "--out", str(tmp_path / "b.csv"))
    code, _, err = run(capsys, "bounds", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"))
    assert code == 2 and "grid" in err


def test_threshold_table(capsys):
    code, out, _ = run(capsys, "threshold", "--n", "1,4", "--tol", "1e-4")
    assert code == 0
    table = rows(out)
    assert table[0] == ["n", "p_cat", "F_cat", "p_modcat", "F_modcat"]
    assert float(table[1][2]) == pytest.approx(0.81071, abs=2e-4)
    assert float(table[2][1]) < float(table[2][3])


def test_verify_commands(capsys):
    code, out, _ = run(capsys, "verify", "bxor")
    assert code == 0 and "16/16" in out
    code, out, _ = run(capsys, "verify", "network", "--trials", "20000", "--json")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(capsys, "verify", "code", "--code", "cat5", "--trials", "20000")
    assert code == 0


def test_verify_network_file(tmp_path, capsys):
    path = tmp_path / "r.net"
    path.write_text("pairs 2\nbxor 1 2\nbxor 2 1\nmeasure 2 Z\nkeep 1\n")
    code, out, _ = run(capsys, "verify", "network", "--net-file", str(path), "--trials", "5000")
    assert code == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ebcap", "verify", "bxor"], capture_output=True, text=True)
    assert res.returncode == 0 and "16/16" in res.stdout
    res = subprocess.run([sys.executable, "-m", "ebcap", "nosuch"], capture_output=True, text=True)
    assert res.returncode == 2


@pytest.fixture(scope="module")
def figures():
    return build_figures(p_grid(0.25, 1.0, 0.0025))


def test_figures_match_golden(figures):
    assert set(figures) == set(FIGURE_FILES.values())
    for name, text in figures.items():
        golden = (GOLDEN / name).read_text()
        got, want = rows(text), rows(golden)
        assert got[0] == want[0], name
        assert len(got) == len(want), name
        for g, w in zip(got[1:], want[1:]):
            for a, b in zip(g, w):
                try:
                    assert float(a) == pytest.approx(float(b), abs=1e-9), name
                except ValueError:
                    assert a == b, name


def test_figures_command_writes_files(tmp_path, capsys):
    code, out, _ = run(capsys, "figures", "--outdir", str(tmp_path), "--grid", "0.5:1:0.25")
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(FIGURE_FILES.values())
