import io
import json

import pytest

from abelnet.cli import EXIT_BUDGET, EXIT_CHECK, EXIT_ERROR, EXIT_NONHALT, EXIT_OK, main
from abelnet.engine import run
from abelnet.formats import FormatError, parse_network, parse_program, serialize_network
from abelnet.optimize import MonotoneProgram, TopplingSystem

from conftest import SAMPLES

COUNTER = {
    "format": "abelnet-network/1",
    "vertices": [{"id": "v", "family": "counter"}],
    "edges": [],
    "input": [{"vertex": "v", "symbol": 0, "count": 3}],
}


def cli(*argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def test_counter_file_runs():
    net, x, q = parse_network(json.dumps(COUNTER)).bundle()
    out = run(net, x, q)
    assert out.odometer == (3,) and out.final.states == (3,)


def test_dangling_edge_is_rejected():
    doc = dict(COUNTER, edges=[{"id": "e", "src": "v", "dst": "w"}])
    with pytest.raises(FormatError, match="dangling"):
        parse_network(json.dumps(doc))


def test_unknown_family_is_rejected():
    doc = dict(COUNTER, vertices=[{"id": "v", "family": "teleporter"}])
    with pytest.raises(FormatError, match="unknown family"):
        parse_network(json.dumps(doc))


def test_syntax_error_has_position():
    with pytest.raises(FormatError, match="line 2"):
        parse_network('{\n  "vertices": [,]}')


def test_bad_params_and_negative_input():
    doc = dict(COUNTER, vertices=[{"id": "v", "family": "sandpile", "params": {"colour": 3}}])
    with pytest.raises(FormatError, match="bad params"):
        parse_network(json.dumps(doc))
    doc = dict(COUNTER, input=[{"vertex": "v", "count": -1}])
    with pytest.raises(FormatError):
        parse_network(json.dumps(doc))


@pytest.mark.parametrize("path", sorted(p.name for p in SAMPLES.glob("*.json") if not p.name.startswith("program")))
def test_network_round_trip(path):
    doc = parse_network((SAMPLES / path).read_text())
    text = serialize_network(doc)
    again = parse_network(text)
    assert serialize_network(again) == text
    a, b = doc.bundle(), again.bundle()
    assert a[1:] == b[1:] and a[0].letters == b[0].letters
    assert run(*a, budget=1000) == run(*b, budget=1000)


def test_program_parsing():
    assert isinstance(parse_program((SAMPLES / "program_half.json").read_text()), MonotoneProgram)
    sys = parse_program((SAMPLES / "program_toppling.json").read_text())
    assert isinstance(sys, TopplingSystem)
    sys2 = parse_program(json.dumps({"kind": "toppling", "L": [[1]], "r": [1], "b": [2]}))
    assert list(sys2.x) == [2]
    with pytest.raises(FormatError):
        parse_program(json.dumps({"kind": "lp"}))
    with pytest.raises(FormatError):
        parse_program(json.dumps({"kind": "table"}))


# --- command line ------------------------------------------------------------


def test_run_halted():
    code, out = cli("run", SAMPLES / "sandpile_chain.json", "--json")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["status"] == "halted"


def test_run_non_halting():
    code, out = cli("run", SAMPLES / "two_cycle.json", "--json")
    rep = json.loads(out)
    assert code == EXIT_NONHALT and rep["certificate"]["replays"] is True


def test_run_budget():
    code, out = cli("run", SAMPLES / "sandpile_chain.json", "--budget", "3")
    assert code == EXIT_BUDGET and "budget" in out


def test_run_zero_budget():
    code, out = cli("run", SAMPLES / "two_cycle.json", "--budget", "0", "--json")
    assert code == EXIT_BUDGET and json.loads(out)["steps"] == 0


def test_reruns_are_bit_identical(tmp_path):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    assert cli("aggregate", 120, "-o", a)[0] == cli("aggregate", 120, "-o", b)[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert cli("run", SAMPLES / "oil_water.json") == cli("run", SAMPLES / "oil_water.json")


def test_run_missing_file(tmp_path):
    code, out = cli("run", tmp_path / "absent.json")
    assert code == EXIT_ERROR and out.startswith("error:")


def test_run_parallel_matches_sequential():
    _, seq = cli("run", SAMPLES / "rotor_counters.json", "--json")
    _, par = cli("run", SAMPLES / "rotor_counters.json", "--json", "--parallel", "3", "--seed", "5")
    assert json.loads(seq) == json.loads(par)


@pytest.mark.parametrize("policy", ["lifo", "rr", "greedy", "random:11"])
def test_run_schedulers_match(policy):
    _, a = cli("run", SAMPLES / "oil_water.json", "--json")
    _, b = cli("run", SAMPLES / "oil_water.json", "--json", "--scheduler", policy)
    a, b = json.loads(a), json.loads(b)
    assert a["odometer"] == b["odometer"] and a["final_states"] == b["final_states"]


def test_run_trace(tmp_path):
    trace = tmp_path / "t.ndjson"
    code, out = cli("run", SAMPLES / "sandpile_chain.json", "--trace", trace, "--json")
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert code == EXIT_OK and len(rows) == json.loads(out)["steps"]
    assert rows[-1]["digest"] and set(rows[0]) == {"step", "vertex", "symbol", "digest"}


def test_check_pass_and_fail():
    code, out = cli("check", SAMPLES / "rotor_counters.json", "--trials", "200")
    assert code == EXIT_OK and "PASS" in out
    code, out = cli("check", SAMPLES / "mutant.json", "--trials", "200", "--json")
    rep = json.loads(out)
    assert code == EXIT_CHECK and rep["result"] == "FAIL"
    assert not rep["processors"]["m"]["passed"]


def test_check_empty_network(tmp_path):
    p = write(tmp_path, "empty.json", {"vertices": [], "edges": []})
    code, out = cli("check", p)
    assert code == EXIT_OK


def test_solve_outcomes():
    code, out = cli("solve", SAMPLES / "program_half.json", "--json")
    assert code == EXIT_OK and json.loads(out)["minimizer"] == [1]
    code, out = cli("solve", SAMPLES / "program_successor.json", "--json")
    rep = json.loads(out)
    assert code == EXIT_NONHALT and rep["status"] == "infeasible-in-box"
    code, out = cli("solve", SAMPLES / "program_toppling.json", "--json")
    assert code == EXIT_OK and json.loads(out)["topplings"] == [2, 2, 2]


def test_solve_budget(tmp_path):
    p = write(tmp_path, "big.json", {"kind": "table", "table": [[k + 1] for k in range(50)]})
    code, _ = cli("solve", p, "--budget", "5")
    assert code == EXIT_BUDGET


def test_solve_nonmonotone(tmp_path):
    p = write(tmp_path, "bad.json", {"kind": "table", "table": [[1], [0]]})
    code, out = cli("solve", p)
    assert code == EXIT_ERROR and "error" in out


def test_aggregate_cli(tmp_path):
    pgm = tmp_path / "a.pgm"
    code, out = cli("aggregate", 50, "-o", pgm, "--json")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["visited"] == 50
    assert pgm.read_text().startswith("P2\n")


def test_aggregate_too_small(tmp_path):
    code, out = cli("aggregate", 100, "--radius", 2, "-o", tmp_path / "a.pgm")
    assert code == EXIT_ERROR and "radius" in out


def test_bad_scheduler_exits_by_argparse():
    with pytest.raises(SystemExit):
        cli("run", SAMPLES / "two_cycle.json", "--scheduler", "sideways")
