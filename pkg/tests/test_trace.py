import copy
import json
import random
from fractions import Fraction as F

import pytest

from conftest import needs_z3, z3_config
from tabmc.benchmarks import demo_model, gen_fischer, gen_token_ring, random_network_text
from tabmc.cli import run_check
from tabmc.core import Configuration, Edge
from tabmc.encoder import EncoderOptions
from tabmc.parser import parse_network
from tabmc.query import parse_query
from tabmc.solver import Verdict
from tabmc.trace import (
    LassoTrace, TraceError, decode_trace, format_structured, format_table, project_signal, trace_to_dict,
    validate_trace,
)

DEMO = parse_network(demo_model())
IE, EI = Edge.IE, Edge.EI


def cfg(loc, n, x):
    return Configuration((loc,), {"n": n}, {"x": F(x)})


def demo_trace():
    """q0 -t1](- q2 -t4)[- q0 -t2- q1 -t3- q0 -t2- back to q1, looping at position 3."""
    configs = [cfg(0, 0, 0), cfg(2, 0, 1), cfg(0, 1, 2), cfg(1, 1, 0), cfg(0, 1, 0), cfg(1, 1, 0)]
    fired = [0, 3, 1, 2, 1, 2]
    edges = [IE, EI, IE, IE, IE, IE]
    slots = [[3 + t] for t in fired]    # three null slots precede the declared ones
    return LassoTrace(4, 3, configs, [F(1), F(1), F(4), F(1), F(6)],
                      [[t] for t in fired], [[e] for e in edges], slots)


def clauses(tr, net=DEMO):
    return {v.clause for v in validate_trace(tr, net)}


def test_hand_built_trace_is_valid():
    assert validate_trace(demo_trace(), DEMO) == []
    assert demo_trace().times == [0, 1, 2, 6, 7, 13]


def test_changed_variable_is_a_frame_violation():
    tr = demo_trace()
    tr.configs[3] = cfg(1, 0, 0)
    found = validate_trace(tr, DEMO)
    assert any(v.clause == "frame" and v.position == 2 for v in found)


def test_zero_delay_rejected():
    tr = demo_trace()
    tr.delays[3] = F(0)
    assert "time-positive" in clauses(tr)


def test_wrong_initial_configuration():
    tr = demo_trace()
    tr.configs[0] = cfg(0, 1, 0)
    assert "init" in clauses(tr)


def test_guard_violation_detected():
    tr = demo_trace()
    tr.delays[2] = F(3)     # x reaches only 5, and t2 needs x > 5
    assert clauses(tr) & {"guard", "time-clocks"}


def test_right_closed_exit_at_bound_breaks_invariant():
    tr = demo_trace()
    tr.edges[1] = [IE]      # q2 would still hold at x = 2
    assert clauses(tr) & {"time-invariant", "invariant-ie"}


def test_loop_wrap_mismatch():
    tr = demo_trace()
    tr.configs[5] = cfg(1, 0, 0)
    assert "loop-wrap" in clauses(tr) or "frame" in clauses(tr)
    tr = demo_trace()
    tr.edges[5] = [EI]
    assert "loop-wrap" in clauses(tr)


def test_signal_projection_of_demo_trace():
    sig = project_signal(demo_trace(), DEMO)
    got = [(str(iv), iv.locations[0], dict(iv.vars)["n"]) for iv in sig.intervals]
    assert got == [("[0, 1]", "q0", 0), ("(1, 2)", "q2", 0), ("[2, 6]", "q0", 1),
                   ("(6, 7]", "q1", 1), ("(7, 13)", "q0", 1)]
    assert sig.horizon == 13
    # right-closed firing keeps the old location at the instant; left-closed shows the new one
    assert sig.value_at(1).locations == ("q0",)
    assert sig.value_at(F(3, 2)).locations == ("q2",)
    assert sig.value_at(2).locations == ("q0",)
    for t, n in [(0, 0), (1, 0), (F(19, 10), 0), (2, 1), (10, 1)]:
        assert dict(sig.value_at(t).vars)["n"] == n


def test_constant_trace_is_one_unbounded_interval():
    net = parse_network("clock x; automaton A { init q; location q labels {p}; }")
    tr = LassoTrace(2, 1, [Configuration((0,), {}, {"x": F(l)}) for l in range(4)],
                    [F(1)] * 3, [[None]] * 4, [[IE]] * 4, [[0]] * 4)
    sig = project_signal(tr, net)
    assert len(sig.intervals) == 1
    iv = sig.intervals[0]
    assert (iv.start, iv.end, iv.left_closed, iv.props) == (0, None, True, frozenset({"p"}))
    assert sig.value_at(10 ** 6) is iv


def test_mixed_edges_make_point_interval():
    net = parse_network("""channel c;
    automaton A { init a0; location a0; location a1; trans a0 -> a1 sync c!; trans a1 -> a1; }
    automaton B { init b0; location b0; location b1; trans b0 -> b1 sync c?; trans b1 -> b1; }""")
    st = lambda a, b: Configuration((a, b), {}, {})  # noqa: E731
    tr = LassoTrace(2, 1, [st(0, 0), st(1, 1), st(1, 1), st(1, 1)], [F(1)] * 3,
                    [[0, 0], [1, 1], [1, 1], [1, 1]], [[IE, EI], [IE, IE], [IE, IE], [IE, IE]])
    sig = project_signal(tr, net)
    point = sig.value_at(1)
    assert (point.start, point.end) == (1, 1) and point.locations == ("a0", "b1")


def test_table_and_json_formats():
    tr = demo_trace()
    table = format_table(tr, DEMO)
    lines = table.splitlines()
    assert lines[0].split("|")[4].strip() == "3*"
    assert any(line.startswith("A.edge=") and "](" in line and ")[" in line for line in lines)
    data = json.loads(format_structured(tr, DEMO))
    assert data == trace_to_dict(tr, DEMO)
    assert data["locations"]["A"] == ["q0", "q2", "q0", "q1", "q0", "q1"]
    assert data["transitions"]["A"] == ["t1", "t4", "t2", "t3", "t2"]
    assert data["edges"]["A"][:2] == ["ie", "ei"] and data["vars"]["n"] == [0, 0, 1, 1, 1, 1]


def run(net, text, k, liveness="none"):
    return run_check(net, parse_query(text), k, EncoderOptions("right-closed", liveness), z3_config())


@needs_z3
@pytest.mark.parametrize("text,query,k", [
    (gen_fischer(2, broken=True), "invariant !(P1.cs && P2.cs)", 10),
    (gen_token_ring(3), "reachable A2.hold", 8),
    (demo_model(), "reachable n = 1", 5),
], ids=["broken-fischer2", "token-ring3", "demo"])
def test_solver_runs_decode_and_replay(text, query, k):
    net = parse_network(text)
    rep = run(net, query, k)
    assert rep.verdict is Verdict.SAT
    assert rep.violations == [] and rep.model_mismatch == []
    assert project_signal(rep.trace, net).intervals


@needs_z3
@pytest.mark.parametrize("seed", range(6))
def test_random_sat_runs_replay(seed):
    rng = random.Random(500 + seed)
    net = parse_network(random_network_text(rng))
    rep = run(net, "invariant false", 3)
    assert rep.verdict is Verdict.SAT and rep.trace_ok


@needs_z3
def test_unused_transition_code_is_rejected():
    rep = run(DEMO, "invariant false", 3)
    model = dict(rep.model)
    for j in range(3):
        model[f"tb_1_{j}"] |= 1     # code 7 at position 0; the demo has 7 slots (codes 0..6)
    with pytest.raises(TraceError, match="unused"):
        decode_trace(model, DEMO, 3)


def test_decode_needs_every_name():
    with pytest.raises(TraceError):
        decode_trace({}, DEMO, 3)


def test_validation_does_not_mutate():
    tr = demo_trace()
    before = copy.deepcopy(tr)
    validate_trace(tr, DEMO)
    assert tr == before


@needs_z3
def test_loop_closes_over_clock_that_is_never_reset():
    # x grows forever, so the wrap can only match it as "above its ceiling"
    net = parse_network("clock x, y; automaton A { init q; location q inv (y <= 1); "
                        "trans t: q -> q reset {y}; trans u: q -> q when x > 3 reset {y}; }")
    rep = run_check(net, parse_query("invariant false"), 6, EncoderOptions(), z3_config())
    assert rep.verdict is Verdict.SAT and rep.trace_ok
    tr = rep.trace
    assert tr.configs[tr.k + 1].clocks["x"] > 3 and tr.configs[tr.loop].clocks["x"] > 3
