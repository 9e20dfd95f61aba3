import random

import pytest
from hypothesis import given, settings, strategies as st

from lawmine.errors import DepthExceeded, TypeMismatch, UnknownPredicate
from lawmine.evaluation import clause_covers, evaluate_literal, rule_covers
from lawmine.kb import FactStore
from lawmine.logic import (Constant, DataType, Literal, Rule, ScaleKind,
                           Variable)
from lawmine.syntax import parse_clause, parse_rule

from oracles import ToyKB, brute_covers, random_clause, random_example

PRICE = DataType("price", ScaleKind.RATIO)


def ground(pred, *values, negated=False, dtype=PRICE):
    return Literal(pred, tuple(Constant(v, dtype) for v in values), negated)


def test_up_down_table(updown):
    kb = updown.kb
    assert evaluate_literal(ground("Up", 34, 38), {}, kb)
    assert not evaluate_literal(ground("Down", 34, 38), {}, kb)
    assert evaluate_literal(ground("Down", 34, 38, negated=True), {}, kb)


def test_builtin_strict_order():
    kb = FactStore()
    kb.add_comparison("Greater", PRICE)
    assert not evaluate_literal(ground("Greater", 5, 5), {}, kb)
    assert evaluate_literal(ground("Greater", 6, 5), {}, kb)


def test_literal_errors(updown):
    kb = updown.kb
    with pytest.raises(UnknownPredicate):
        evaluate_literal(ground("Sideways", 1, 2), {}, kb)
    with pytest.raises(TypeMismatch):
        evaluate_literal(ground("Up", 34, 38, dtype=DataType("date", ScaleKind.ORDINAL)), {}, kb)


def test_depth_limit_is_an_error():
    kb = FactStore(depth_limit=3)
    kb.declare("Loop", (PRICE,))
    kb.add_rule(parse_rule("Loop(x) <- Loop(x)", kb.signatures))
    with pytest.raises(DepthExceeded):
        evaluate_literal(ground("Loop", 1), {}, kb)


def test_updown_clause_covers_table7(updown):
    kb = updown.kb
    clause = parse_clause("UpDown(x, y, z) <- Up(x, y) & Down(y, z)", kb.signatures)
    assert clause_covers(clause, (34, 38, 35), kb)
    got = {ex: clause_covers(clause, ex, kb) for ex in updown.pos + updown.neg}
    assert got == {**{p: True for p in updown.pos}, **{n: False for n in updown.neg}}


def test_empty_body_covers_everything(updown):
    clause = parse_clause("UpDown(x, y, z) <- true", updown.kb.signatures)
    assert all(clause_covers(clause, ex, updown.kb) for ex in updown.pos + updown.neg)


def test_colleague_rule_covers_diana(cardholder):
    kb = cardholder.kb
    clause = parse_clause(
        "Corporate_Cardholder(c) <- Colleague_Of(p, c) & Corporate_Cardholder(p)",
        kb.signatures)
    assert clause_covers(clause, ("Diana Right",), kb)
    assert not clause_covers(clause, ("Carol Peterson",), kb)


def _toy_store():
    kb = FactStore()
    kb.declare("A", (PRICE,))
    kb.declare("B", (PRICE,))
    kb.declare("T", (PRICE,))
    kb.add_facts("A", [(1,), (2,)])
    kb.add_facts("B", [(3,)])
    kb.freeze()
    return kb


def test_rule_disjunction():
    kb = _toy_store()
    c1 = parse_clause("T(x) <- A(x)", kb.signatures)
    c2 = parse_clause("T(x) <- B(x)", kb.signatures)
    rule = Rule((c1, c2))
    # brute force over the four constants 1..4
    expected = {1: True, 2: True, 3: True, 4: False}
    for v, want in expected.items():
        assert rule_covers(rule, (v,), kb) == want
        assert rule_covers(Rule((c1,)), (v,), kb) == clause_covers(c1, (v,), kb)
    assert not clause_covers(c1, (3,), kb) and clause_covers(c2, (3,), kb)
    never = parse_clause("T(x) <- A(x) & B(x)", kb.signatures)
    assert not any(rule_covers(Rule((never,)), (v,), kb) for v in expected)


def test_negation_with_unbound_variable_is_existential():
    kb = _toy_store()
    kb2 = FactStore()
    kb2.declare("R", (PRICE, PRICE))
    kb2.declare("T", (PRICE,))
    kb2.add_facts("R", [(1, 2)])
    kb2.freeze()
    clause = parse_clause("T(x) <- !R(x, y)", kb2.signatures)
    assert not clause_covers(clause, (1,), kb2)
    assert clause_covers(clause, (2,), kb2)
    assert kb.frozen


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_coverage_matches_brute_force(seed):
    rng = random.Random(seed)
    toy = ToyKB(rng, max_constants=12)
    clause = random_clause(rng, toy)
    for _ in range(5):
        ex = random_example(rng, clause, toy)
        assert clause_covers(clause, ex, toy.kb) == brute_covers(clause, ex, toy)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_negation_complements(seed):
    rng = random.Random(seed)
    toy = ToyKB(rng, max_constants=10)
    pred = rng.choice(sorted(toy.sigs))
    values = tuple(rng.choice(toy.domain[t.name]) for t in toy.sigs[pred])
    lit = Literal(pred, tuple(Constant(v, t) for v, t in zip(values, toy.sigs[pred])))
    assert evaluate_literal(lit.negate(), {}, toy.kb) == (not evaluate_literal(lit, {}, toy.kb))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_adding_a_clause_never_uncovers(seed):
    rng = random.Random(seed)
    toy = ToyKB(rng, max_constants=10)
    c1 = random_clause(rng, toy)
    c2 = random_clause(rng, toy)
    if [v.dtype for v in c1.head.args] != [v.dtype for v in c2.head.args]:
        return
    small, big = Rule((c1,)), Rule((c1, c2))
    for _ in range(5):
        ex = random_example(rng, c1, toy)
        if rule_covers(small, ex, toy.kb):
            assert rule_covers(big, ex, toy.kb)


def test_variables_carry_types():
    v = Variable("t", DataType("day", ScaleKind.ORDINAL))
    assert v.dtype.name == "day"
