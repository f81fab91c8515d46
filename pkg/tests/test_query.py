import random
from fractions import Fraction as F

import pytest

from conftest import needs_z3, z3_config
from tabmc.benchmarks import demo_model, gen_fischer, random_network_text, random_query_text
from tabmc.cli import run_check
from tabmc.core import Configuration, VarCmp, VarNot
from tabmc.encoder import EncoderOptions
from tabmc.parser import parse_network
from tabmc.query import (
    And, At, Const, Label, Not, Or, Query, QueryError, VarAtom, eval_state_formula, parse_query,
    witness_positions,
)
from tabmc.solver import Verdict

DEMO = parse_network(demo_model())
FISCHER2 = parse_network(gen_fischer(2))


def test_parse_invariant():
    q = parse_query("invariant !(P1.cs && P2.cs)")
    assert q == Query("invariant", Not(And((At("P1", "cs"), At("P2", "cs")))))


def test_parse_reachable_with_variable():
    q = parse_query("reachable (n = 1) && A.q2")
    assert q == Query("reachable", And((VarAtom(VarCmp("n", "=", 1)), At("A", "q2"))))


def test_parse_words_and_precedence():
    q = parse_query("reachable not crit1 or crit2 and id >= 1")
    assert q.formula == Or((Not(Label("crit1")),
                            And((Label("crit2"), VarAtom(VarNot(VarCmp("id", "<", 1)))))))


@pytest.mark.parametrize("text", ["invariant", "safe P1.cs", "invariant (P1.cs", "invariant P1.cs &&",
                                  "invariant P1.cs $"])
def test_malformed_queries(text):
    with pytest.raises(QueryError):
        parse_query(text)


@pytest.mark.parametrize("text,expected", [
    ("n > 0", [False, True, True]), ("n <= 1", [True, True, False]), ("n >= 1", [False, True, True]),
    ("n < 1", [True, False, False]), ("n = 2", [False, False, True]),
])
def test_comparison_rewrites(text, expected):
    f = parse_query("reachable " + text).formula
    got = [eval_state_formula(Configuration((0,), {"n": n}, {"x": F(0)}), parse_network(
        "var n : [0, 2]; clock x; automaton A { init q0; location q0; }"), f) for n in range(3)]
    assert got == expected


def test_eval_examples():
    c = Configuration((0,), {"n": 1}, {"x": F(0)})
    assert eval_state_formula(c, DEMO, At("A", "q0"))
    assert not eval_state_formula(c, DEMO, VarAtom(VarCmp("n", "=", 0)))
    assert eval_state_formula(c, DEMO, Const(True))


def test_unknown_entities():
    c = Configuration((0,), {"n": 1}, {"x": F(0)})
    for f in (At("B", "q0"), At("A", "nowhere"), Label("zzz"), VarAtom(VarCmp("m", "=", 0))):
        with pytest.raises(QueryError):
            eval_state_formula(c, DEMO, f)


def test_labels_are_disjunctions_over_automata():
    net = FISCHER2
    cfg = Configuration((3, 0), {"id": 1}, {"x1": F(0), "x2": F(0)})
    assert eval_state_formula(cfg, net, Label("crit1"))
    assert not eval_state_formula(cfg, net, Label("crit2"))


def run(net, text, k=10, liveness="strong"):
    return run_check(net, parse_query(text), k, EncoderOptions("right-closed", liveness), z3_config())


@needs_z3
def test_fischer_mutual_exclusion_holds():
    assert run(FISCHER2, "invariant !(P1.cs && P2.cs)").verdict is Verdict.UNSAT


@needs_z3
def test_initial_location_reachable():
    rep = run(DEMO, "reachable A.q0", k=4, liveness="none")
    assert rep.verdict is Verdict.SAT and 0 in rep.witness


@needs_z3
def test_invariant_false_violated_immediately():
    rep = run(DEMO, "invariant false", k=2, liveness="none")
    assert rep.verdict is Verdict.SAT and rep.witness[0] == 0


@needs_z3
def test_unknown_location_in_query_rejected():
    with pytest.raises(QueryError):
        run(DEMO, "reachable A.q9", k=2)


@needs_z3
def test_broken_fischer_counterexample_violates():
    net = parse_network(gen_fischer(2, broken=True))
    rep = run(net, "invariant !(P1.cs && P2.cs)")
    assert rep.verdict is Verdict.SAT and rep.trace_ok
    for l in rep.witness:
        assert eval_state_formula(rep.trace.configs[l], net, parse_query("reachable P1.cs && P2.cs").formula)


@needs_z3
@pytest.mark.parametrize("seed", range(8))
def test_duality_on_random_models(seed):
    rng = random.Random(1000 + seed)
    net = parse_network(random_network_text(rng))
    q = parse_query(random_query_text(rng, net))
    dual = Query("invariant", Not(q.formula))
    a = run(net, str(q), k=3, liveness="none")
    b = run(net, str(dual), k=3, liveness="none")
    assert a.verdict == b.verdict
    if a.verdict is Verdict.SAT:
        assert witness_positions(a.trace.configs, net, q) == witness_positions(a.trace.configs, net, dual)
        assert witness_positions(b.trace.configs, net, q) == witness_positions(b.trace.configs, net, dual)
        assert a.witness and b.witness
