import csv
import json

import pytest

from lowdisc.cli import main
from lowdisc.core import load_point_set


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def test_generate_fibonacci(tmp_path, capsys):
    out = tmp_path / "fib260.txt"
    code, _ = run(capsys, "generate", "fibonacci", "--n", 260, "-o", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 260 and lines[0] == "0 0"
    meta = json.loads((tmp_path / "fib260.txt.json").read_text())
    assert meta["generator"] == "fibonacci" and meta["n"] == 260


def test_generate_sobol_shape_and_table_id(tmp_path, capsys):
    out = tmp_path / "s.txt"
    assert run(capsys, "generate", "sobol", "--n", 50, "--d", 3, "-o", out)[0] == 0
    ps = load_point_set(out)
    assert (ps.n, ps.d) == (50, 3)
    assert json.loads((tmp_path / "s.txt.json").read_text())["direction_numbers"] == "new-joe-kuo-6.1024"


def test_generate_random_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run(capsys, "generate", "random", "--n", 260, "--d", 2, "--seed", 7, "-o", a)
    run(capsys, "generate", "random", "--n", 260, "--d", 2, "--seed", 7, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.txt.json").read_text())
    assert meta["seed"] == 7 and meta["rng"] == "numpy.random.Philox"


def test_generate_fibonacci_lattice_and_custom_table(tmp_path, capsys):
    code, out = run(capsys, "generate", "fibonacci-lattice", "--k", 7)
    assert code == 0 and len(out.out.splitlines()) == 13
    table = tmp_path / "jk.txt"
    table.write_text("d s a m_i\n2 1 0 1\n")
    code, out = run(capsys, "generate", "sobol", "--n", 4, "--d", 2, "--direction-numbers", table)
    assert code == 0 and out.out.splitlines()[1] == "0.5 0.5"
    assert run(capsys, "generate", "fibonacci-lattice")[0] == 2
    assert run(capsys, "generate", "sobol", "--n", 4, "--d", 3, "--direction-numbers", table)[0] == 2


@pytest.fixture
def fib260(tmp_path, capsys):
    path = tmp_path / "fib260.txt"
    main(["generate", "fibonacci", "--n", "260", "-o", str(path)])
    capsys.readouterr()
    return path


def test_evaluate(fib260, capsys):
    code, out = run(capsys, "evaluate", fib260, "--kind", "l2-star", "--kind", "linf-star")
    assert code == 0
    l2, linf = json_lines(out.out)
    assert l2["root"] == pytest.approx(0.003438, abs=1e-6)
    assert l2["squared"] == pytest.approx(l2["root"] ** 2, rel=1e-15)
    assert l2["summation"] == "compensated" and l2["runtime_ms"] >= 0
    assert linf["value"] == pytest.approx(0.01200, abs=5e-6)
    assert linf["boxes_visited"] == 261 * 261 and linf["pruned_fraction"] == 0.0


def test_evaluate_general_enumerator_and_budget(tmp_path, capsys):
    path = tmp_path / "s.txt"
    main(["generate", "sobol", "--n", "40", "--d", "3", "-o", str(path)])
    capsys.readouterr()
    code, out = run(capsys, "evaluate", path, "--kind", "linf-star")
    on = json_lines(out.out)[0]
    code, out = run(capsys, "evaluate", path, "--kind", "linf-star", "--no-prune")
    off = json_lines(out.out)[0]
    assert on["value"] == off["value"]
    assert off["pruned_fraction"] == 0.0 and on["pruned_fraction"] > 0
    code, out = run(capsys, "evaluate", path, "--kind", "linf-star", "--budget", 100)
    assert code == 3 and "budget" in out.err


def test_evaluate_single_point(tmp_path, capsys):
    path = tmp_path / "one.txt"
    path.write_text("0.5\n")
    code, out = run(capsys, "evaluate", path)
    assert json_lines(out.out)[0]["squared"] == pytest.approx(1 / 12, abs=1e-16)


def test_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5 1.5\n")
    assert run(capsys, "evaluate", bad)[0] == 2
    assert run(capsys, "evaluate", tmp_path / "missing.txt")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["evaluate", str(bad), "--kind", "l7"])
    assert info.value.code == 2


def test_optimize_steps_zero_rejected(fib260):
    with pytest.raises(SystemExit) as info:
        main(["optimize", str(fib260), "--steps", "0"])
    assert info.value.code == 2


def test_optimize_null_update(fib260, tmp_path, capsys):
    out = tmp_path / "same.txt"
    code, _ = run(capsys, "optimize", fib260, "--steps", 1, "--alpha", 0, "-o", out)
    assert code == 0
    assert load_point_set(out) == load_point_set(fib260)


def test_optimize_defaults_with_tracking(fib260, tmp_path, capsys):
    out = tmp_path / "opt.txt"
    traj = tmp_path / "traj.csv"
    meta_path = tmp_path / "meta.json"
    code, _ = run(capsys, "optimize", fib260, "--track-linf", "-o", out, "--trajectory", traj, "--metadata", meta_path)
    assert code == 0
    meta = json.loads(meta_path.read_text())
    assert meta["config"]["alpha"] == 1e-4 and meta["config"]["steps"] == 200
    assert meta["final"]["root"] <= 0.00195
    tracking = meta["tracking"]
    assert tracking["final_value"] <= 0.0080
    assert tracking["best_value"] <= tracking["final_value"]
    assert 0 <= tracking["best_iteration"] <= 200
    with open(traj, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 201
    assert list(rows[0]) == ["iteration", "loss_squared", "loss_root", "tracked_metric"]
    assert float(rows[0]["tracked_metric"]) == pytest.approx(0.01200, abs=5e-6)


def test_optimize_restarts_and_kind(tmp_path, capsys):
    start = tmp_path / "r.txt"
    main(["generate", "random", "--n", "30", "--d", "2", "--seed", "1", "-o", str(start)])
    capsys.readouterr()
    out = tmp_path / "o.txt"
    code, _ = run(capsys, "optimize", start, "--kind", "l2-periodic", "--steps", 20, "--restarts", 2, "--seed", 3, "-o", out)
    assert code == 0
    meta = json.loads((tmp_path / "o.txt.json").read_text())
    assert meta["restarts"] == 2 and len(meta["before_restart_roots"]) == 2
    assert meta["final"]["root"] <= meta["initial"]["root"]
    assert run(capsys, "optimize", start, "--kind", "linf-star")[0] == 2


def test_reproduce_periodic(tmp_path, capsys):
    code, out = run(capsys, "reproduce", "table-periodic", "--out", tmp_path)
    assert code == 0
    with open(tmp_path / "periodic_2d.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [round(float(r["fibonacci"]), 5) for r in rows] == [0.03819, 0.02075, 0.01158, 0.00589, 0.00317]
    assert "mpmc [paper]" in rows[0]
    assert "periodic_2d: PASS" in out.out


def test_reproduce_fig3_single_n(tmp_path, capsys):
    code, out = run(capsys, "reproduce", "fig3", "--n", 60, "--out", tmp_path)
    assert code == 0
    with open(tmp_path / "fig3.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 201
    assert "fig3: PASS" in out.out
