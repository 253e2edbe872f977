import json

import pytest

from kuramoto_ap.chain import bkk_bound, verify_chain
from kuramoto_ap.cli import main, report_hash
from kuramoto_ap.homotopy import TrackerConfig
from kuramoto_ap.network import generate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--no-timing")
    return code, json.loads(out)


def test_bound_cycle(capsys):
    code, body = run_json(capsys, "bound", "--cycle", "5", "--method", "both")
    assert code == 0
    assert (body["ap_bound"], body["formula"], body["baseline"]) == (30, 30, 70)
    assert body["agree"] is True


def test_bound_path_tree(capsys):
    code, body = run_json(capsys, "bound", "--tree", "path:10")
    assert code == 0 and body["ap_bound"] == 512 and body["baseline"] == 48620


def test_bound_input_errors(capsys):
    code, _, err = run(capsys, "bound", "--cycle", "2")
    assert code == 4 and "N >= 3" in err
    code, _, _ = run(capsys, "bound", "--tree", "loop:3")
    assert code == 4
    code, _, _ = run(capsys, "bound")
    assert code == 4


def test_bound_from_file(capsys, tmp_path):
    net = generate("cycle", 4, seed=1)
    path = tmp_path / "net.json"
    path.write_text(net.dumps())
    code, body = run_json(capsys, "bound", str(path), "--method", "both")
    assert code == 0 and body["ap_bound"] == 12
    assert len(body["manifest"]["input_hash"]) == 64
    path.write_text("{not json")
    assert run(capsys, "bound", str(path))[0] == 4


def test_facets(capsys):
    code, body = run_json(capsys, "facets", "--cycle", "4")
    assert code == 0 and (body["facets"], body["facet_nvol"], body["total"]) == (6, 2, 12)
    code, body = run_json(capsys, "facets", "--cycle", "5")
    assert body["facets"] == 30 and body["all_unimodular"] is True
    assert run(capsys, "facets", "--cycle", "2")[0] == 4


def test_solve_examples(capsys):
    code, body = run_json(capsys, "solve", "--cycle", "3", "--seed", "1")
    assert code == 0 and body["summary"]["count"] == 6
    code, body = run_json(capsys, "solve", "--random-tree", "5", "--seed", "2")
    assert code == 0 and body["summary"]["count"] == 16
    code, body = run_json(capsys, "solve", "--tree", "path:2", "--omega", "0")
    sols = body["solution_set"]["solutions"]
    assert len(sols) == 2
    assert sorted(round(s["theta"][0], 9) for s in sols) == [0.0, round(3.141592653589793, 9)]


def test_solve_tree_solver_and_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9, "dedup_tol": 1e-7}))
    code, body = run_json(capsys, "solve", "--star", "4", "--solver", "tree", "--config", str(cfg))
    assert code == 0 and body["summary"]["count"] == 8
    assert body["manifest"]["seeds"]["tracker"] == 9
    cfg.write_text(json.dumps({"step_min": 2.0}))
    assert run(capsys, "solve", "--star", "4", "--config", str(cfg))[0] == 4


def test_certify(capsys):
    code, body = run_json(capsys, "certify", "--cycle", "3")
    assert code == 0 and body["pass"] is True
    code, body = run_json(capsys, "certify", "--fixture", "corrupted")
    assert code == 2 and body["pass"] is False and body["failures"] >= 1
    assert run(capsys, "certify", "--cycle", "9")[0] == 4


def test_verify_chain(capsys):
    code, body = run_json(capsys, "verify-chain", "--tree", "random:4", "--seed", "3")
    assert code == 0
    assert len({body["chain"][k] for k in ("cstar", "index", "mixed_volume", "ap_bound")}) == 1
    assert body["chain"]["ap_bound"] == 8
    code, body = run_json(capsys, "verify-chain", "--cycle", "4")
    assert [body["chain"][k] for k in ("cstar", "index", "mixed_volume", "ap_bound")] == [12] * 4
    code, body = run_json(capsys, "verify-chain", "--cycle", "3", "--mode", "symmetric-real", "--omega", "0")
    assert code == 0
    assert body["chain"]["torus"] < 6
    assert body["comparisons"][0]["relation"] == "<"


def test_csv_output(capsys):
    code, out, _ = run(capsys, "bound", "--cycle", "6", "--csv")
    lines = out.strip().splitlines()
    assert lines[0].startswith("N,topology,ap_bound") and lines[1].startswith("6,Cycle,60")


@pytest.mark.parametrize("argv", [("solve", "--cycle", "4", "--seed", "3"), ("bound", "--random-tree", "7", "--seed", "1")])
def test_byte_identical_reports(capsys, argv):
    a = run(capsys, *argv, "--no-timing")[1]
    b = run(capsys, *argv, "--no-timing")[1]
    assert a == b
    # with timing on, the hash still ignores the timing entry
    x = json.loads(run(capsys, *argv)[1])
    assert x["report_hash"] == json.loads(a)["report_hash"] == report_hash(x)


def test_bkk_bound_is_graph_only():
    assert bkk_bound(generate("cycle", 4, seed=1)) == bkk_bound(generate("cycle", 4, seed=2)) == 12


def test_chain_report_partial_when_inconclusive():
    net = generate("cycle", 3, seed=1)
    from kuramoto_ap.solver import solve_network

    solset = solve_network(net, TrackerConfig(seed=0))
    solset.inconclusive = True
    rep = verify_chain(net, solset=solset)
    assert rep.status == "partial" and rep.cstar is None
