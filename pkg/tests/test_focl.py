import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from lawmine.errors import DepthExceeded, NotIntensional, Unlearnable
from lawmine.evaluation import evaluate_literal, rule_covers, satisfiable
from lawmine.foil import LearnConfig, LearnStats, enumerate_variablizations
from lawmine.focl import (Constraints, FoclTask, filter_candidates, focl_learn, operationalize,
                          refine_initial_rule)
from lawmine.kb import FactStore, InterArgConstraint, TypedSignature
from lawmine.logic import Constant, DataType, Literal, Rule, ScaleKind, Variable
from lawmine.syntax import parse_clause, parse_literal, parse_rule

PRICE = DataType("stockprice", ScaleKind.RATIO)
DATE = DataType("date", ScaleKind.ORDINAL)
ITEM = DataType("thing", ScaleKind.NOMINAL)


# -- filtering ---------------------------------------------------------------------

def test_ill_typed_candidate_removed():
    sigs = {"Greater_dates": TypedSignature("Greater_dates", (DATE, DATE), True)}
    p, q = Variable("p", PRICE), Variable("q", PRICE)
    d, e = Variable("d", DATE), Variable("e", DATE)
    bad = Literal("Greater_dates", (p, q))
    good = Literal("Greater_dates", (d, e))
    assert filter_candidates([bad, good], Constraints(sigs)) == [good]


def test_inter_argument_filter():
    x, y = Variable("x"), Variable("y")
    cons = Constraints({}, {"P": [InterArgConstraint("P")]})
    lits = [Literal("P", (x, x)), Literal("P", (x, y)), Literal("P", (y, x))]
    assert filter_candidates(lits, cons) == lits[1:]
    pattern = Constraints({}, {"R": [InterArgConstraint("R", "forbidden_pattern", [(0, 2)])]})
    z = Variable("z")
    assert filter_candidates([Literal("R", (x, y, x)), Literal("R", (x, x, z))], pattern) == \
        [Literal("R", (x, x, z))]


def test_empty_constraints_are_identity():
    vs = enumerate_variablizations("P", (PRICE, DATE), (Variable("x", PRICE),), 1,
                                   typed=False, negations=True)
    assert filter_candidates(vs, Constraints()) == vs


# -- operationalization ------------------------------------------------------------

def _growing_kb(pairs):
    kb = FactStore()
    kb.declare("GreaterPrice", (PRICE, PRICE))
    kb.declare("GrowingStock", (PRICE, PRICE, PRICE))
    kb.add_facts("GreaterPrice", pairs)
    kb.add_rule(parse_rule("GrowingStock(x, y, z) <- GreaterPrice(x, y) & GreaterPrice(y, z)",
                           kb.signatures))
    return kb.freeze()


def test_growing_stock_expansion():
    kb = _growing_kb([(3.0, 2.0), (2.0, 1.0)])
    lit = parse_literal("GrowingStock(a, b, c)", kb.signatures)
    body = operationalize(lit, kb)
    assert " & ".join(map(str, body)) == "GreaterPrice(a, b) & GreaterPrice(b, c)"


def test_extensional_literal_is_not_intensional():
    kb = _growing_kb([(3.0, 2.0)])
    with pytest.raises(NotIntensional):
        operationalize(parse_literal("GreaterPrice(a, b)", kb.signatures), kb)


def test_two_level_nesting():
    kb = FactStore()
    for p, n in (("A", 2), ("B", 2), ("C", 1), ("D", 2), ("E", 2)):
        kb.declare(p, (ITEM,) * n)
    kb.add_rule(parse_rule("A(x, y) <- B(x, y) & C(y)", kb.signatures))
    kb.add_rule(parse_rule("B(x, y) <- D(x, z) & E(z, y)", kb.signatures))
    body = operationalize(parse_literal("A(a, b)", kb.signatures), kb)
    # hand expansion: B(a, b) -> D(a, z') & E(z', b), then C(b)
    assert [l.predicate for l in body] == ["D", "E", "C"]
    fresh = body[0].args[1]
    assert body[0].args[0].name == "a" and body[1].args == (fresh, body[2].args[0])
    assert body[2].args[0].name == "b" and fresh.name not in ("a", "b")


def test_operationalize_depth_limit():
    kb = FactStore()
    kb.declare("P", (ITEM,))
    kb.add_rule(parse_rule("P(x) <- P(x)", kb.signatures))
    with pytest.raises(DepthExceeded):
        operationalize(parse_literal("P(a)", kb.signatures), kb, depth_limit=4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_expansion_preserves_extension(seed):
    rng = random.Random(seed)
    values = [float(v) for v in range(rng.randint(2, 6))]
    pairs = {(rng.choice(values), rng.choice(values)) for _ in range(rng.randint(0, 12))}
    kb = _growing_kb(sorted(pairs))
    lit = parse_literal("GrowingStock(a, b, c)", kb.signatures)
    body = operationalize(lit, kb)
    for triple in itertools.product(values, repeat=3):
        binding = dict(zip("abc", triple))
        ground = Literal("GrowingStock", tuple(Constant(v, PRICE) for v in triple))
        assert evaluate_literal(ground, {}, kb) == satisfiable(body, binding, kb)


# -- refinement ---------------------------------------------------------------------

def _rule_text(rule):
    return [str(c) for c in rule.clauses]


def test_consistent_initial_rule_kept(updown):
    task = FoclTask(updown.target, updown.pos, updown.neg, updown.kb, updown.initial_rule)
    stats = LearnStats()
    rule = refine_initial_rule(task, stats=stats)
    assert _rule_text(rule) == ["UpDown(x, y, z) <- Up(x, y) & Down(y, z)"]
    assert len(stats.trace) == 1


def test_accelerated_growth_task(accelerated):
    k = accelerated
    task = FoclTask(k.target, k.pos, k.neg, k.kb, k.initial_rule)
    rule = refine_initial_rule(task)
    assert all(rule_covers(rule, e, task.kb) for e in k.pos)
    assert not any(rule_covers(rule, e, task.kb) for e in k.neg)


def six_example_task(initial="T(x) <- A(x)"):
    kb = FactStore()
    kb.declare_type(ITEM)
    for p in ("A", "B", "C", "T"):
        kb.declare(p, (ITEM,))
    items = [f"i{n}" for n in range(1, 7)]
    kb.add_facts("A", [(i,) for i in ("i1", "i2", "i3", "i4")])
    kb.add_facts("B", [(i,) for i in ("i1", "i2", "i3", "i5", "i6")])
    kb.add_facts("C", [(i,) for i in ("i1", "i4")])
    kb.add_constants(ITEM, items)
    rule = Rule((parse_clause(initial, kb.signatures),))
    return kb, [(i,) for i in items[:3]], [(i,) for i in items[3:]], rule


def test_over_general_initial_rule_gets_one_literal():
    kb, pos, neg, rule = six_example_task()
    kb.freeze()
    x = Variable("x", ITEM)
    # exhaustive search over single literals: which ones fix the initial clause?
    fixes = []
    for pred, negated in itertools.product("ABC", (False, True)):
        lit = Literal(pred, (x,), negated)
        clause = rule.clauses[0]
        extended = Rule((type(clause)(clause.head, clause.body + (lit,)),))
        if all(rule_covers(extended, e, kb) for e in pos) and \
                not any(rule_covers(extended, e, kb) for e in neg):
            fixes.append(str(lit))
    assert fixes == ["B(x)"]
    got = refine_initial_rule(FoclTask("T", pos, neg, kb, rule), LearnConfig(max_new_vars=0))
    assert _rule_text(got) == ["T(x) <- A(x) & B(x)"]


def test_knowledge_mode_use_more_accurate():
    kb, pos, neg, bad = six_example_task("T(x) <- C(x)")
    stats = LearnStats()
    rule = focl_learn(FoclTask("T", pos, neg, kb, bad, knowledge_mode="use_more_accurate"),
                      LearnConfig(max_new_vars=0), stats=stats)
    assert all("C(x)" != line.split("\t")[0] for line in stats.trace)
    assert all(rule_covers(rule, e, kb) for e in pos)
    kb, pos, neg, good = six_example_task()
    stats = LearnStats()
    focl_learn(FoclTask("T", pos, neg, kb, good, knowledge_mode="use_more_accurate"),
               LearnConfig(max_new_vars=0), stats=stats)
    assert stats.trace[0].split("\t")[0] == "A(x)"


def test_task_validation(updown):
    with pytest.raises(ValueError):
        FoclTask(updown.target, updown.pos, updown.pos[:1], updown.kb)
    with pytest.raises(ValueError):
        FoclTask(updown.target, [(1, 2)], [], updown.kb)
    with pytest.raises(ValueError):
        FoclTask(updown.target, updown.pos, updown.neg, updown.kb, knowledge_mode="vote")


# -- widening and typing -------------------------------------------------------------

def test_no_widening_when_budget_zero_suffices(updown):
    stats = LearnStats()
    rule = focl_learn(FoclTask(updown.target, updown.pos, updown.neg, updown.kb),
                      LearnConfig(max_new_vars=2), stats=stats)
    assert stats.widening_steps == 0 and stats.new_var_budget == 0
    assert all(rule_covers(rule, e, updown.kb) for e in updown.pos)
    assert "widening_steps\t0" in stats.report()


def test_updown_with_initial_rule(updown):
    stats = LearnStats()
    rule = focl_learn(FoclTask(updown.target, updown.pos, updown.neg, updown.kb,
                               updown.initial_rule), stats=stats)
    assert _rule_text(rule) == ["UpDown(x, y, z) <- Up(x, y) & Down(y, z)"]
    assert stats.new_var_budget == 0


def chain_task():
    kb = FactStore()
    kb.declare_type(ITEM)
    kb.declare("R", (ITEM, ITEM))
    kb.declare("S", (ITEM,))
    kb.declare("T", (ITEM,))
    kb.add_facts("R", [("a", "p"), ("b", "q"), ("c", "r"), ("d", "s")])
    kb.add_facts("S", [("p",), ("q",)])
    kb.add_constants(ITEM, ["e", "f"])
    return kb, [("a",), ("b",)], [("c",), ("d",), ("e",), ("f",)]


def test_widening_finds_minimum_budget():
    kb, pos, neg = chain_task()
    stats = LearnStats()
    rule = focl_learn(FoclTask("T", pos, neg, kb), LearnConfig(max_new_vars=3), stats=stats)
    assert stats.widening_steps == 1
    clause = rule.clauses[0]
    assert len(clause.existential_variables()) == 1
    assert all(rule_covers(rule, e, kb) for e in pos)
    assert not any(rule_covers(rule, e, kb) for e in neg)
    with pytest.raises(Unlearnable):
        focl_learn(FoclTask("T", pos, neg, kb), LearnConfig(max_new_vars=0))


def test_typing_saves_evaluations(accelerated):
    k = accelerated
    typed, untyped = LearnStats(), LearnStats()
    r1 = focl_learn(FoclTask(k.target, k.pos, k.neg, k.kb, k.initial_rule, typing=True),
                    stats=typed)
    r2 = focl_learn(FoclTask(k.target, k.pos, k.neg, k.kb, k.initial_rule, typing=False),
                    stats=untyped)
    assert [str(c) for c in r1.clauses] == [str(c) for c in r2.clauses]
    assert typed.gain_evaluations < untyped.gain_evaluations
    assert typed.candidates_generated <= untyped.candidates_generated


@pytest.mark.parametrize("typing", [True, False])
def test_filtering_keeps_generating_literals(typing, updown):
    rule = focl_learn(FoclTask(updown.target, updown.pos, updown.neg, updown.kb,
                               typing=typing))
    assert [rule_covers(rule, e, updown.kb) for e in updown.pos + updown.neg] == \
        [True, True, False, False]


def test_keep_intensional_units():
    kb = _growing_kb([(3.0, 2.0), (2.0, 1.0), (5.0, 4.0)])
    kb2 = kb.copy()
    kb2.declare("Rise", (PRICE, PRICE, PRICE))
    kb2.freeze()
    pos, neg = [(3.0, 2.0, 1.0)], [(5.0, 4.0, 3.0), (1.0, 2.0, 3.0)]
    init = Rule((parse_clause("Rise(x, y, z) <- GrowingStock(x, y, z)", kb2.signatures),))
    kept = focl_learn(FoclTask("Rise", pos, neg, kb2, init, keep_intensional=True))
    flat = focl_learn(FoclTask("Rise", pos, neg, kb2, init))
    assert _rule_text(kept) == ["Rise(x, y, z) <- GrowingStock(x, y, z)"]
    assert _rule_text(flat) == ["Rise(x, y, z) <- GreaterPrice(x, y) & GreaterPrice(y, z)"]
