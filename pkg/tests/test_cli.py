import json
import subprocess
import sys

import pytest

from exprdiff.cli import main

from .test_parser import ABS, SQUARING


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err


def test_diff_square(capsys):
    assert run(capsys, "diff", "x*x", "--mode", "symbolic", "--policy", "share", "--simplify")[:2] == (0, "x + x")


def test_diff_sin_forward(capsys):
    assert run(capsys, "diff", "sin(x)", "--mode", "forward", "--simplify")[:2] == (0, "cos(x)")


def test_diff_constant(capsys):
    assert run(capsys, "diff", "c", "--wrt", "x")[:2] == (0, "0")


def test_diff_json(capsys):
    code, out, _ = run(capsys, "diff", "sin(x1+x2)*cos(x1+x2)", "--wrt", "x1", "--mode", "symbolic",
                       "--policy", "cse", "--memoize", "--json")
    data = json.loads(out)
    assert code == 0 and data["derivative"].startswith("let t1")
    assert data["ops"]


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "x*y", "--input", "x=2", "--input", "y=3")
    assert (code, float(out)) == (0, 6.0)


def test_unfold_and_forest(capsys):
    code, out, _ = run(capsys, "unfold", "sin(x1+x2)*cos(x1+x2)", "--json")
    assert json.loads(out)["tree_nodes"] == 9
    code, out, _ = run(capsys, "to-forest", "sin(x1+x2)*cos(x1+x2)")
    assert out == "let t1 = x1 + x2; sin(t1) * cos(t1)"


def test_check(capsys):
    code, out, _ = run(capsys, "check", "sin(x)*y", "--input", "x=0.5", "--input", "y=2")
    assert code == 0 and json.loads(out)["ok"]


def test_trace(capsys, tmp_path):
    prog = tmp_path / "sq.prog"
    prog.write_text(SQUARING)
    code, out, _ = run(capsys, "trace", str(prog), "--input", "x=2", "--wrt", "x")
    data = json.loads(out)
    assert code == 0 and data["derivative"] == 1024.0 and data["trace_nodes"] == 4
    code, out, _ = run(capsys, "trace", ABS, "--input", "x=-2", "--wrt", "x")
    assert json.loads(out)["derivative"] == -1.0


def test_export(capsys, tmp_path):
    path = tmp_path / "g.dot"
    assert run(capsys, "export", "sin(x1+x2)*cos(x1+x2)", "--dot", str(path), "--forest")[0] == 0
    assert "cluster_" in path.read_text()


@pytest.mark.parametrize("argv,code", [
    (["diff", "x +"], 1),
    (["unfold", "sin(x)*sin(x)", "--budget", "2"], 2),
    (["eval", "ln(x)", "--input", "x=-1"], 3),
    (["eval", "x"], 3),
    (["export", "x", "--dot", "/nonexistent/dir/g.dot"], 4),
    (["check", "ln(x)", "--input", "x=-1"], 3),
    (["trace", "return x * y", "--input", "x=1"], 3),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_check_equiv_small(capsys):
    code, out, _ = run(capsys, "check-equiv", "--seed", "1", "--cases", "5", "--max-nodes", "40")
    assert code == 0 and json.loads(out)["n_failures"] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "exprdiff", "parse", "x + 0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "x + 0"
