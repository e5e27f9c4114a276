import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from jchnet.cli import main
from jchnet.graphs import apollonian, complete_graph, load_edgelist, save_edgelist
from jchnet.spectral import max_eigenvalue_dense


def run(args, capsys=None):
    code = main([str(a) for a in args])
    out = capsys.readouterr() if capsys else None
    return code, out


def data_lines(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


# ---------------------------------------------------------------- net-gen

def test_net_gen_apollonian(tmp_path, capsys):
    out = tmp_path / "apo.txt"
    code, cap = run(["net-gen", "apollonian", "--generation", 5, "--out", out], capsys)
    assert code == 0
    g = load_edgelist(out)
    assert g.n_nodes == 124
    assert "N=124" in cap.out


def test_net_gen_ring(tmp_path):
    out = tmp_path / "ring.txt"
    assert run(["net-gen", "ring", "--n", 100, "--z", 4, "--out", out])[0] == 0
    assert load_edgelist(out).n_edges == 200


def test_net_gen_reproducible(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert run(["net-gen", "scalefree", "--n", 1000, "--gamma", 2.2, "--kmin", 2, "--seed", 7,
                    "--out", path])[0] == 0
    # provenance records the argv, which differs only by the output path
    assert data_lines(a) == data_lines(b)
    assert run(["net-gen", "scalefree", "--n", 1000, "--gamma", 2.2, "--kmin", 2, "--seed", 7,
                "--out", a])[0] == 0
    first = a.read_bytes()
    assert run(["net-gen", "scalefree", "--n", 1000, "--gamma", 2.2, "--kmin", 2, "--seed", 7,
                "--out", a])[0] == 0
    assert a.read_bytes() == first


def test_net_gen_records_provenance(tmp_path):
    out = tmp_path / "er.txt"
    run(["net-gen", "er", "--n", 50, "--mean-degree", 3, "--seed", 11, "--out", out])
    head = out.read_text().splitlines()[:3]
    assert head[0] == "# nodes=50"
    assert "net-gen er --n 50 --mean-degree 3 --seed 11" in head[1]
    assert head[2] == "# seed=11"


@pytest.mark.parametrize("args", [
    ["net-gen", "lattice", "--n", 10],
    ["net-gen", "ring", "--n", 10, "--z", 3],
    ["net-gen", "ring"],
    ["net-gen", "apollonian"],
    ["net-gen", "apollonian", "--generation", 20],
    ["net-gen", "scalefree", "--n", 100, "--gamma", 1.5],
    ["net-gen", "ring", "--n", "ten"],
    ["net-gen", "ring", "--n", 10, "--threads", 0],
])
def test_net_gen_usage_errors(args, capsys):
    try:
        code = main([str(a) for a in args])
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_global_flags_either_side_of_subcommand(capsys):
    main(["--seed", "5", "net-gen", "ring", "--n", "10"])
    assert "# seed=5" in capsys.readouterr().out
    main(["net-gen", "ring", "--n", "10", "--seed", "6"])
    assert "# seed=6" in capsys.readouterr().out
    main(["--format", "json", "spectrum", "--deltas", "0", "--n-max", "1"])
    assert json.loads(capsys.readouterr().out)["seed"] == 0


# ---------------------------------------------------------------- lambda

def test_lambda_ring(capsys):
    code, cap = run(["lambda", "ring", "--n", 50, "--z", 4], capsys)
    doc = json.loads(cap.out)
    assert code == 0 and doc["lambda_max"] == pytest.approx(4.0, abs=1e-9)
    assert doc["bounds_check"] is True and doc["schema"] == 1 and doc["seed"] == 0
    assert set(doc) >= {"lambda_max", "iterations", "residual", "bounds_check", "argv"}


def test_lambda_from_edgelist(tmp_path, capsys):
    path = tmp_path / "k10.txt"
    save_edgelist(complete_graph(10), path)
    code, cap = run(["lambda", "--graph", path], capsys)
    assert code == 0 and json.loads(cap.out)["lambda_max"] == pytest.approx(9.0, abs=1e-9)


def test_lambda_apollonian_matches_dense(capsys):
    code, cap = run(["lambda", "apollonian", "--generation", 2], capsys)
    assert json.loads(cap.out)["lambda_max"] == pytest.approx(max_eigenvalue_dense(apollonian(2)), abs=1e-9)


def test_lambda_bad_file_names_line(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("# nodes=4\n0 1\n1 2 3\n")
    code, cap = run(["lambda", "--graph", path], capsys)
    assert code == 2 and "line 3" in cap.err


def test_lambda_missing_file(tmp_path, capsys):
    code, cap = run(["lambda", "--graph", tmp_path / "none.txt"], capsys)
    assert code == 2


def test_lambda_needs_input(capsys):
    assert run(["lambda"], capsys)[0] == 2


def test_lambda_non_convergence(tmp_path, capsys):
    out = tmp_path / "lam.json"
    code, cap = run(["lambda", "scalefree", "--n", 500, "--max-iter", 2, "--out", out], capsys)
    assert code == 3
    doc = json.loads(out.read_text())
    assert doc["converged"] is False and doc["lambda_max"] > 0


# ---------------------------------------------------------------- scaling

def test_scaling_apollonian(tmp_path, capsys):
    out = tmp_path / "apo.csv"
    code, cap = run(["scaling", "apollonian", "--sizes", "3:8", "--out", out], capsys)
    assert code == 0
    rows = data_lines(out)
    assert rows[0] == "N,lambda_mean,lambda_std" and len(rows) == 7
    fit = json.loads((tmp_path / "apo.json").read_text())["fit"]
    assert 0.18 <= fit["exponent"] <= 0.28
    assert "exponent=" in cap.out


def test_scaling_ring_json(capsys):
    code, cap = run(["scaling", "ring", "--sizes", "100,200,400", "--format", "json"], capsys)
    doc = json.loads(cap.out)
    assert code == 0 and abs(doc["fit"]["exponent"]) < 1e-6 and doc["schema"] == 1


def test_scaling_scale_free_three_decades(capsys):
    code, cap = run(["scaling", "scalefree", "--gamma", 2.2, "--sizes", "100,1000,10000", "--realizations", 3,
                     "--format", "json", "--threads", "auto"], capsys)
    doc = json.loads(cap.out)
    assert code == 0
    assert doc["lambda_mean"] == sorted(doc["lambda_mean"])
    assert 0.1 < doc["fit"]["exponent"] < 0.6


def test_scaling_thread_count_does_not_change_output(tmp_path):
    outs = []
    for threads in ("1", "4"):
        path = tmp_path / f"t{threads}.csv"
        main(["scaling", "er", "--sizes", "100,200,400", "--realizations", "4", "--seed", "3",
              "--threads", threads, "--out", str(path)])
        outs.append(data_lines(path))
    assert outs[0] == outs[1]


def test_scaling_small_world_curve(capsys):
    code, cap = run(["scaling", "smallworld", "--n", 200, "--p-grid", "0,0.1,1", "--realizations", 5], capsys)
    lines = [ln for ln in cap.out.splitlines() if not ln.startswith("#")]
    assert code == 0 and lines[0] == "p,lambda_mean,lambda_std" and lines[1] == "0.0,4.0,0.0"


@pytest.mark.parametrize("args", [
    ["scaling", "ring", "--sizes", "100,200"],
    ["scaling", "ring"],
    ["scaling", "ring", "--sizes", "100,100,100"],
    ["scaling", "ring", "--p-grid", "0,1"],
])
def test_scaling_usage_errors(args, capsys):
    assert run(args, capsys)[0] == 2


# ---------------------------------------------------------------- phase

def test_phase_analytic_boundaries(tmp_path):
    xs = [math.sqrt(n + 1) - math.sqrt(n) for n in range(1, 4)]
    # sweep that brackets each closed-form boundary
    for n, x in zip(range(1, 4), xs):
        out = tmp_path / f"b{n}.csv"
        main(["phase", "--mode", "analytic", "--lambda", "4", "--mu-min", str(-x - 1e-7), "--mu-max",
              str(-x + 1e-7), "--mu-points", "2", "--out", str(out)])
        occ = [int(r["mott_n"]) for r in csv.DictReader(data_lines(out))]
        assert occ == [n, n + 1]


def test_phase_both_small_grid(tmp_path):
    out = tmp_path / "pd.csv"
    code = main(["phase", "--delta", "0", "--lambda", "4", "--mode", "both", "--mu-points", "8",
                 "--kappa-points", "6", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(data_lines(out)))
    assert len(rows) == 48 and {r["phase"] for r in rows} <= {"MI", "SF"}
    side = json.loads((tmp_path / "pd.json").read_text())
    assert side["schema"] == 1 and side["seed"] == 0 and "argv" in side and len(side["boundary"]) == 8


def test_phase_reproducible(tmp_path):
    path = tmp_path / "pd.csv"
    args = ["phase", "--mu-points", "6", "--kappa-points", "5", "--lambda", "4", "--out", str(path)]
    main(args)
    first = path.read_bytes()
    main(args)
    assert path.read_bytes() == first


def test_phase_rejects_grid_past_photon_frequency(capsys):
    code, cap = run(["phase", "--lambda", 4, "--mu-min", -0.5, "--mu-max", 0.5, "--mu-points", 5], capsys)
    assert code == 2 and "row 2" in cap.err and "row 4" in cap.err


def test_phase_needs_lambda(capsys):
    assert run(["phase", "--mode", "analytic"], capsys)[0] == 2


def test_phase_network_mode(tmp_path, capsys):
    g = tmp_path / "ring.txt"
    main(["net-gen", "ring", "--n", "20", "--out", str(g)])
    capsys.readouterr()
    code, cap = run(["phase", "--mode", "network", "--graph", g, "--mu", -2.0, "--kappa", 0.42], capsys)
    assert code == 0
    lines = [ln for ln in cap.out.splitlines() if not ln.startswith("#")]
    assert lines[0] == "site,psi" and len(lines) == 21
    psi = np.array([float(ln.split(",")[1]) for ln in lines[1:]])
    assert np.ptp(psi) < 1e-9 and psi[0] > 1e-3
    assert "lambda=4.0" in cap.out


def test_phase_network_mode_unstable_exit_3(tmp_path, capsys):
    g = tmp_path / "ring.txt"
    main(["net-gen", "ring", "--n", "20", "--out", str(g)])
    capsys.readouterr()
    code, _ = run(["phase", "--mode", "network", "--graph", g, "--mu", -0.3, "--kappa", 0.2], capsys)
    assert code == 3


def test_phase_detuning_sign_changes_vacuum_edge(tmp_path):
    # the vacuum lobe edge sits at sqrt(delta^2/4 + 1) - delta/2, which is not even in delta
    outs = {}
    for d in ("1", "-1"):
        path = tmp_path / f"d{d}.csv"
        main(["phase", "--delta", d, "--lambda", "4", "--mode", "analytic", "--mu-points", "50", "--out", str(path)])
        outs[d] = [r["mott_n"] for r in csv.DictReader(data_lines(path))]
    assert outs["1"] != outs["-1"]


# ---------------------------------------------------------------- spectrum

def test_spectrum_default(capsys):
    code, cap = run(["spectrum", "--n-max", 4], capsys)
    rows = list(csv.DictReader(ln for ln in cap.out.splitlines() if not ln.startswith("#")))
    assert code == 0 and len(rows) == 8 * 201
    at_zero = {(r["n"], r["branch"]): float(r["energy_rescaled"]) for r in rows if float(r["delta"]) == 0.0}
    for n in range(1, 5):
        assert at_zero[(str(n), "+")] == pytest.approx(math.sqrt(n))
        assert at_zero[(str(n), "-")] == pytest.approx(-math.sqrt(n))


def test_spectrum_single_point_json(capsys):
    code, cap = run(["spectrum", "--n-max", 1, "--deltas", 4, "--format", "json"], capsys)
    rows = json.loads(cap.out)["rows"]
    assert code == 0
    assert sorted(r["energy_rescaled"] for r in rows) == pytest.approx([2 - math.sqrt(5), 2 + math.sqrt(5)])


@pytest.mark.parametrize("args", [["spectrum", "--delta-points", 0], ["spectrum", "--n-max", 0],
                                  ["spectrum", "--deltas", ","]])
def test_spectrum_usage_errors(args, capsys):
    assert run(args, capsys)[0] == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "jchnet.cli", "spectrum", "--n-max", "1", "--deltas", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "1,+,0.0,1.0" in res.stdout
    res = subprocess.run([sys.executable, "-m", "jchnet.cli", "nope"], capture_output=True, text=True)
    assert res.returncode == 2
