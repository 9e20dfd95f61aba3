"""FOIL: separate-and-conquer induction of constant-free Horn clauses.

Literals are chosen by information gain over tuples of variable bindings
(Quinlan's semantics: adding a literal with new variables replaces every
tuple by all of its consistent extensions).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import (NoPositives, NoUsefulLiteral, TimeBudgetExceeded, Unlearnable)
from .evaluation import clause_covers, head_binding, solve
from .kb import FactStore, InterArgConstraint
from .logic import HornClause, Literal, Rule, Variable, compatible

HEAD_NAMES = ("x", "y", "z", "w", "u")


@dataclass(frozen=True)
class GainState:
    P0: int
    N0: int
    P1: int
    N1: int
    T_plus_plus: int

    def __post_init__(self):
        if min(self.P0, self.N0, self.P1, self.N1, self.T_plus_plus) < 0:
            raise ValueError(f"negative count in {self}")
        if self.T_plus_plus > self.P0:
            raise ValueError(f"T++ = {self.T_plus_plus} exceeds P0 = {self.P0}")


def information_gain(state: GainState) -> float:
    """``T++ * (log2(P1/(P1+N1)) - log2(P0/(P0+N0)))``; ``-inf`` when P1 is 0."""
    if state.P0 == 0:
        raise NoPositives("information gain is undefined without positive tuples")
    if state.P1 == 0:
        return -math.inf
    P0, N0, P1, N1 = state.P0, state.N0, state.P1, state.N1
    # log2 of P1(P0+N0) / (P0(P1+N1)), with the distance from 1 kept exact
    delta = P1 * N0 - P0 * N1
    return state.T_plus_plus * math.log1p(delta / (P0 * (P1 + N1))) / math.log(2)


def max_possible_gain(T_plus_plus: int, P0: int, N0: int) -> float:
    """Optimistic bound for any specialization: all extensions positive."""
    return T_plus_plus * -(math.log2(P0) - math.log2(P0 + N0))


@dataclass
class LearnConfig:
    max_new_vars: int = 1
    min_clause_pos: int = 1
    max_clause_len: int = 6
    neg_tolerance: float = 0.0
    allow_negated: bool = True
    time_budget: float | None = None
    prune: bool = True
    jobs: int = 1

    def __post_init__(self):
        if not 0 <= self.neg_tolerance < 1:
            raise ValueError("neg_tolerance must lie in [0, 1)")
        if self.max_clause_len < 1:
            raise ValueError("max_clause_len must be at least 1")
        if self.min_clause_pos < 1:
            raise ValueError("min_clause_pos must be positive")
        if self.max_new_vars < 0:
            raise ValueError("max_new_vars must be non-negative")


@dataclass
class LearnStats:
    candidates_generated: int = 0
    gain_evaluations: int = 0
    tuples_touched: int = 0
    widening_steps: int = 0
    pruned: int = 0
    new_var_budget: int = 0
    trace: list = field(default_factory=list)
    uncovered: tuple = ()

    def merge(self, other: "LearnStats"):
        self.candidates_generated += other.candidates_generated
        self.gain_evaluations += other.gain_evaluations
        self.tuples_touched += other.tuples_touched
        self.pruned += other.pruned

    def report(self) -> str:
        return (f"candidates_generated\t{self.candidates_generated}\n"
                f"gain_evaluations\t{self.gain_evaluations}\n"
                f"tuples_touched\t{self.tuples_touched}\n"
                f"widening_steps\t{self.widening_steps}\n")


# -- candidates -------------------------------------------------------------------

@dataclass(frozen=True)
class Variablization:
    """A predicate with each slot given an old variable or a fresh one.

    ``slots`` holds ``("old", i)`` (index into the clause's old variables) or
    ``("new", k)`` entries, new variables numbered by first appearance.
    """

    predicate: str
    slots: tuple
    negated: bool
    literal: Literal

    @property
    def sort_key(self):
        return (self.predicate, tuple((0 if k == "old" else 1, i) for k, i in self.slots),
                self.negated)

    def __str__(self):
        return str(self.literal)


@dataclass(frozen=True)
class Candidate:
    """Something that can be conjoined to a clause: one literal or a unit."""

    label: str
    literals: tuple
    order: tuple
    variablization: Variablization | None = None
    preferred: bool = False


def _new_var_name(k: int, taken: set) -> str:
    n = k
    while f"v{n}" in taken:
        n += 1
    return f"v{n}"


def enumerate_variablizations(predicate: str, arg_types: Sequence, old_vars: Sequence[Variable],
                              budget: int, typed: bool, negations: bool,
                              taken: set | None = None) -> list[Variablization]:
    """Every slot assignment with at least one old variable and <= budget new ones."""
    taken = set(taken or ()) | {v.name for v in old_vars}
    out = []

    def rec(slot, slots, new_types):
        if slot == len(arg_types):
            if not any(k == "old" for k, _ in slots):
                return
            args = []
            names: dict[int, str] = {}
            for (k, i), t in zip(slots, arg_types):
                if k == "old":
                    args.append(old_vars[i])
                else:
                    name = names.setdefault(i, _new_var_name(len(taken) + i, taken))
                    args.append(Variable(name, new_types[i] if typed else t))
            lit = Literal(predicate, tuple(args))
            out.append(Variablization(predicate, tuple(slots), False, lit))
            # negation binds nothing, so negated literals take old variables only
            if negations and not new_types:
                out.append(Variablization(predicate, tuple(slots), True, lit.negate()))
            return
        t = arg_types[slot]
        for i, v in enumerate(old_vars):
            if typed and not compatible(v.dtype, t):
                continue
            rec(slot + 1, slots + [("old", i)], new_types)
        for k in range(len(new_types)):
            if typed and not compatible(new_types[k], t):
                continue
            rec(slot + 1, slots + [("new", k)], new_types)
        if len(new_types) < budget:
            rec(slot + 1, slots + [("new", len(new_types))], new_types + [t])

    rec(0, [], [])
    # fresh-variable names must not depend on enumeration order
    fixed = []
    for var in out:
        fixed.append(_rename_new(var, old_vars, taken))
    fixed.sort(key=lambda v: v.sort_key)
    return fixed


def _rename_new(var: Variablization, old_vars, taken) -> Variablization:
    names: dict[int, str] = {}
    args = []
    counter = 1
    for (k, i), a in zip(var.slots, var.literal.args):
        if k == "old":
            args.append(a)
            continue
        if i not in names:
            while f"v{counter}" in taken:
                counter += 1
            names[i] = f"v{counter}"
            counter += 1
        args.append(Variable(names[i], a.dtype))
    lit = Literal(var.predicate, tuple(args), var.negated)
    return Variablization(var.predicate, var.slots, var.negated, lit)


def violates_inter_arg(lit: Literal, constraints: Iterable[InterArgConstraint]) -> bool:
    return any(c.violated_by(lit.args) for c in constraints)


def generate_candidate_literals(kb: FactStore, old_vars: Sequence[Variable], new_var_budget: int,
                                config: LearnConfig, *, exclude: Iterable[str] = (),
                                typed: bool = True, inter_arg: bool = True,
                                taken: Iterable[str] = (),
                                stats: LearnStats | None = None) -> list[Variablization]:
    """Variablizations of every predicate in ``kb`` in canonical order.

    With ``typed`` set, slots only receive type-compatible variables; with
    ``inter_arg`` set, the store's inter-argument constraints are honoured.
    """
    if not old_vars:
        raise ValueError("at least one old variable is required")
    exclude = set(exclude)
    out = []
    for pred in kb.predicates():
        if pred in exclude:
            continue
        sig = kb.signature(pred)
        raw = enumerate_variablizations(pred, sig.arg_types, old_vars, new_var_budget,
                                        typed=typed, negations=config.allow_negated,
                                        taken=taken)
        if stats is not None:
            stats.candidates_generated += len(raw)
        cons = kb.constraints.get(pred, ()) if inter_arg else ()
        out.extend(v for v in raw if not violates_inter_arg(v.literal, cons))
    out.sort(key=lambda v: v.sort_key)
    return out


# -- tuple bookkeeping --------------------------------------------------------

@dataclass(frozen=True)
class Evaluation:
    candidate: Candidate
    state: GainState
    gain: float
    pos: tuple
    neg: tuple


def _extend(tuples, literals, kb, new_names) -> tuple[list, int]:
    out = []
    with_ext = 0
    for ex, binding in tuples:
        seen = set()
        found = False
        for b in solve(literals, binding, kb):
            key = tuple(b.get(n) for n in new_names)
            if key in seen:
                continue
            seen.add(key)
            found = True
            out.append((ex, {k: b[k] for k in b}))
        with_ext += found
    return out, with_ext


def _new_names(literals, binding_names: set) -> list[str]:
    names = []
    for lit in literals:
        for v in lit.variables():
            if v.name not in binding_names and v.name not in names:
                names.append(v.name)
    return names


def evaluate_candidate(cand: Candidate, pos, neg, kb: FactStore, bound_names: set) -> Evaluation:
    new = _new_names(cand.literals, bound_names)
    # negated literals bind nothing
    new = [n for n in new if any(v.name == n for lit in cand.literals if not lit.negated
                                 for v in lit.variables())]
    pos1, tpp = _extend(pos, cand.literals, kb, new)
    neg1, _ = _extend(neg, cand.literals, kb, new)
    state = GainState(len(pos), len(neg), len(pos1), len(neg1), tpp)
    return Evaluation(cand, state, information_gain(state), tuple(pos1), tuple(neg1))


def _eligible(ev: Evaluation) -> bool:
    return math.isfinite(ev.gain) and ev.gain > 0 and ev.state.N1 < ev.state.N0


def _better(a: Evaluation, b: Evaluation | None) -> bool:
    if b is None:
        return True
    if a.gain != b.gain:
        return a.gain > b.gain
    ka = (not a.candidate.preferred, a.candidate.order)
    kb_ = (not b.candidate.preferred, b.candidate.order)
    return ka < kb_


def _generalizations(var: Variablization) -> list[tuple]:
    """Keys of the variablizations obtained by freeing one old-variable slot."""
    keys = []
    for pos, (k, _) in enumerate(var.slots):
        if k != "old":
            continue
        slots = list(var.slots)
        slots[pos] = ("new", None)
        renum: dict = {}
        canon = []
        for kk, ii in slots:
            if kk == "old":
                canon.append(("old", ii))
            else:
                key = ("fresh", pos) if ii is None else ii
                canon.append(("new", renum.setdefault(key, len(renum))))
        keys.append((var.predicate, tuple(canon)))
    return keys


def choose_literal(candidates: Sequence[Candidate], pos, neg, kb: FactStore, *,
                   bound_names: set | None = None, prune: bool = True, jobs: int = 1,
                   stats: LearnStats | None = None, deadline: float | None = None) -> Evaluation:
    """Pick the candidate of maximum gain (ties: preferred units, then canonical order).

    A candidate qualifies only if its gain is positive and it strictly reduces
    the negative tuples.  With ``prune`` set, a positive variablization is
    skipped when one of its generalizations (an old variable replaced by a
    fresh one) has an optimistic gain bound below the best gain found so far.

    With ``jobs > 1`` every candidate is evaluated up front on a thread pool
    and the search below replays over the cached results, so the choice and
    the counters do not depend on ``jobs``.
    """
    if not candidates:
        raise NoUsefulLiteral("no candidate literals")
    if not pos:
        raise NoPositives("no positive tuples")
    if bound_names is None:
        bound_names = set(pos[0][1])
    stats = stats if stats is not None else LearnStats()
    P0, N0 = len(pos), len(neg)

    def compute(c):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded("time budget exhausted while evaluating literals")
        return evaluate_candidate(c, pos, neg, kb, bound_names)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cached = dict(zip(map(id, candidates), pool.map(compute, candidates)))

        def run(c):
            return cached[id(c)]
    else:
        run = compute

    def generality(c: Candidate):
        v = c.variablization
        olds = sum(k == "old" for k, _ in v.slots) if v else 0
        return (olds, c.order)

    best: Evaluation | None = None
    bounds: dict[tuple, float] = {}
    for c in (sorted(candidates, key=generality) if prune else candidates):
        v = c.variablization
        if prune and best is not None and v is not None and not v.negated:
            if any(bounds.get(g, math.inf) < best.gain for g in _generalizations(v)):
                stats.pruned += 1
                continue
        ev = run(c)
        stats.gain_evaluations += 1
        stats.tuples_touched += P0 + N0
        if prune and v is not None and not v.negated:
            canon = _canonical_slots(v.slots)
            bounds[(v.predicate, canon)] = max_possible_gain(ev.state.T_plus_plus, P0, N0)
        if _eligible(ev) and _better(ev, best):
            best = ev
    if best is None:
        raise NoUsefulLiteral("no literal has positive gain")
    return best


def _canonical_slots(slots) -> tuple:
    renum: dict = {}
    out = []
    for k, i in slots:
        out.append(("old", i) if k == "old" else ("new", renum.setdefault(i, len(renum))))
    return tuple(out)


# -- the learner ------------------------------------------------------------------

def head_variables(kb: FactStore, target: str) -> tuple[Variable, ...]:
    sig = kb.signature(target)
    names = HEAD_NAMES if sig.arity <= len(HEAD_NAMES) else tuple(
        f"x{i + 1}" for i in range(sig.arity))
    return tuple(Variable(n, t) for n, t in zip(names, sig.arg_types))


@dataclass
class Engine:
    """Shared clause-construction machinery for FOIL and FOCL.

    ``candidate_source(old_vars, taken, clause_body)`` returns the ordered
    candidates for the next conquer step.
    """

    target: str
    kb: FactStore
    config: LearnConfig
    candidate_source: Callable
    stats: LearnStats = field(default_factory=LearnStats)

    def __post_init__(self):
        self.head = head_variables(self.kb, self.target)
        self.deadline = (time.monotonic() + self.config.time_budget
                         if self.config.time_budget is not None else None)

    def _acceptable(self, pos_ex: int, neg_ex: int) -> bool:
        if pos_ex < self.config.min_clause_pos:
            return False
        return neg_ex <= self.config.neg_tolerance * (pos_ex + neg_ex)

    def build_clause(self, pos_examples, neg_examples) -> HornClause | None:
        head_lit = Literal(self.target, self.head)
        pos = []
        for i, e in enumerate(pos_examples):
            b = head_binding(head_lit, e)
            if b is not None:
                pos.append((i, b))
        neg = []
        for i, e in enumerate(neg_examples):
            b = head_binding(head_lit, e)
            if b is not None:
                neg.append((i, b))
        body: list[Literal] = []
        old_vars = list(self.head)
        taken = {v.name for v in self.head}
        while True:
            pos_ex = len({i for i, _ in pos})
            neg_ex = len({i for i, _ in neg})
            if self._acceptable(pos_ex, neg_ex):
                return HornClause(head_lit, tuple(body))
            if len(body) >= self.config.max_clause_len or not pos:
                return None
            cands = self.candidate_source(tuple(old_vars), frozenset(taken), tuple(body))
            if not cands:
                return None
            try:
                ev = choose_literal(cands, pos, neg, self.kb, bound_names=set(taken),
                                    prune=self.config.prune, jobs=self.config.jobs,
                                    stats=self.stats, deadline=self.deadline)
            except NoUsefulLiteral:
                return None
            s = ev.state
            self.stats.trace.append("\t".join([
                ev.candidate.label, str(s.P0), str(s.N0), str(s.P1), str(s.N1),
                str(s.T_plus_plus), f"{ev.gain:.6f}"]))
            body.extend(ev.candidate.literals)
            for lit in ev.candidate.literals:
                for v in lit.variables():
                    if v.name not in taken:
                        taken.add(v.name)
                        if not lit.negated:
                            old_vars.append(v)
            pos, neg = list(ev.pos), list(ev.neg)

    def learn(self, pos, neg) -> Rule:
        pos = [tuple(p) for p in pos]
        neg = [tuple(n) for n in neg]
        if not pos:
            raise NoPositives("foil_learn needs at least one positive example")
        remaining = list(pos)
        clauses: list[HornClause] = []
        while remaining:
            clause = self.build_clause(remaining, neg)
            if clause is None:
                break
            covered = [e for e in remaining if clause_covers(clause, e, self.kb)]
            if not covered:
                break
            clauses.append(clause)
            covered_set = set(covered)
            remaining = [e for e in remaining if e not in covered_set]
        self.stats.uncovered = tuple(remaining)
        if not clauses:
            raise Unlearnable(f"no clause with positive gain covers any positive example "
                              f"of {self.target}", uncovered=remaining)
        return Rule(tuple(clauses))


def literal_candidates(kb: FactStore, target: str, config: LearnConfig, stats: LearnStats,
                       budget: int | None = None, typed: bool = True):
    budget = config.max_new_vars if budget is None else budget

    def source(old_vars, taken, body):
        vars_ = generate_candidate_literals(kb, old_vars, budget, config, exclude={target},
                                            typed=typed, taken=taken, stats=stats)
        present = {str(l) for l in body}
        return [Candidate(str(v.literal), (v.literal,), (i,), v)
                for i, v in enumerate(vars_) if str(v.literal) not in present]
    return source


def foil_learn(target: str, pos: Sequence, neg: Sequence, kb: FactStore,
               config: LearnConfig | None = None, *, stats: LearnStats | None = None) -> Rule:
    """Learn a rule for ``target`` covering ``pos`` and excluding ``neg``.

    Clauses are added until every positive is covered or no literal has
    positive gain; positives left uncovered are recorded on ``stats``.
    """
    config = config or LearnConfig()
    stats = stats if stats is not None else LearnStats()
    kb.signature(target)
    kb.freeze()
    stats.new_var_budget = config.max_new_vars
    engine = Engine(target, kb, config, literal_candidates(kb, target, config, stats), stats)
    return engine.learn(pos, neg)
