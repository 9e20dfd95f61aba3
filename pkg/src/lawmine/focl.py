"""FOCL on top of the FOIL engine.

Adds candidate filtering by typing and inter-argument constraints,
operationalization of intensional literals, refinement of an initial rule and
iterative widening of the new-variable budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DepthExceeded, NotIntensional, Unlearnable
from .evaluation import rule_covers
from .foil import (Candidate, Engine, LearnConfig, LearnStats, Variablization,
                   enumerate_variablizations, head_variables,
                   violates_inter_arg)
from .kb import FactStore, value_fits
from .logic import Constant, HornClause, Literal, Rule, Variable, compatible

MAX_EXPANSION = 32
KNOWLEDGE_MODES = ("use_all", "use_more_accurate")


@dataclass(frozen=True)
class Constraints:
    """Typing (``signatures``) and inter-argument patterns; either may be empty."""

    signatures: Mapping = field(default_factory=dict)
    inter_arg: Mapping = field(default_factory=dict)

    @classmethod
    def of(cls, kb: FactStore, typing: bool = True) -> "Constraints":
        return cls(dict(kb.signatures) if typing else {}, dict(kb.constraints))


def _fits(lit: Literal, signatures: Mapping) -> bool:
    sig = signatures.get(lit.predicate)
    if sig is None:
        return True
    return all(compatible(a.dtype, t) for a, t in zip(lit.args, sig.arg_types))


def filter_candidates(candidates: Sequence, constraints: Constraints) -> list:
    """Drop ill-typed and inter-argument-violating candidates, keeping order."""
    out = []
    for c in candidates:
        lit = c.literal if isinstance(c, Variablization) else c
        if not _fits(lit, constraints.signatures):
            continue
        if violates_inter_arg(lit, constraints.inter_arg.get(lit.predicate, ())):
            continue
        out.append(c)
    return out


# -- operationalization -----------------------------------------------------------

class _Fresh:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            name = f"v{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _instantiate(clause: HornClause, args, fresh: _Fresh) -> tuple[Literal, ...] | None:
    """Body of ``clause`` with head variables replaced by ``args``."""
    sub: dict = {}
    for h, a in zip(clause.head.args, args):
        if isinstance(h, Constant):
            if isinstance(a, Constant) and a.value != h.value:
                return None
            if isinstance(a, Variable):
                # a constant head slot can only be matched by an equal constant
                return None
            continue
        if h.name in sub and sub[h.name] != a:
            return None
        sub[h.name] = a
    out = []
    for lit in clause.body:
        new_args = []
        for t in lit.args:
            if isinstance(t, Variable):
                if t.name not in sub:
                    sub[t.name] = Variable(fresh(), t.dtype)
                new_args.append(sub[t.name])
            else:
                new_args.append(t)
        out.append(Literal(lit.predicate, tuple(new_args), lit.negated))
    return tuple(out)


def expansions(literal: Literal, kb: FactStore, depth_limit: int | None = None,
               taken: Iterable[str] = ()) -> list[tuple[Literal, ...]]:
    """Every extensional conjunction the intensional ``literal`` unfolds into.

    One alternative per choice of defining clause at each level.
    """
    if literal.negated or literal.predicate not in kb.intensional \
            or literal.predicate in kb.extensional:
        raise NotIntensional(f"{literal} is not a positive intensional literal")
    limit = kb.depth_limit if depth_limit is None else depth_limit
    taken = set(taken) | {v.name for v in literal.variables()}

    def unfold(lit, depth, fresh):
        if lit.negated or lit.predicate not in kb.intensional \
                or lit.predicate in kb.extensional:
            return [(lit,)]
        if depth >= limit:
            raise DepthExceeded(f"operationalizing {literal} exceeded depth {limit}")
        alts = []
        for clause in kb.intensional[lit.predicate].clauses:
            body = _instantiate(clause, lit.args, fresh)
            if body is None:
                continue
            parts = [unfold(b, depth + 1, fresh) for b in body]
            for combo in itertools.product(*parts):
                alts.append(tuple(x for part in combo for x in part))
        return alts

    return unfold(literal, 0, _Fresh(taken))


def operationalize(literal: Literal, kb: FactStore, depth_limit: int | None = None,
                   taken: Iterable[str] = ()) -> tuple[Literal, ...]:
    """Replace an intensional literal by its extensional definition.

    Head arguments are substituted; body-local variables get fresh names.
    Only single-alternative definitions have a unique answer; use
    :func:`expansions` for predicates with several clauses.
    """
    alts = expansions(literal, kb, depth_limit, taken)
    if len(alts) != 1:
        raise ValueError(f"{literal} has {len(alts)} alternative expansions")
    return alts[0]


# -- tasks ------------------------------------------------------------------------

@dataclass
class FoclTask:
    target: str
    pos: Sequence
    neg: Sequence
    kb: FactStore
    initial_rule: Rule | None = None
    typing: bool = True
    knowledge_mode: str = "use_all"
    keep_intensional: bool = False

    def __post_init__(self):
        self.pos = [tuple(p) for p in self.pos]
        self.neg = [tuple(n) for n in self.neg]
        overlap = set(self.pos) & set(self.neg)
        if overlap:
            raise ValueError(f"examples both positive and negative: {sorted(overlap, key=str)}")
        if self.knowledge_mode not in KNOWLEDGE_MODES:
            raise ValueError(f"knowledge_mode must be one of {KNOWLEDGE_MODES}")
        sig = self.kb.signature(self.target)
        for ex in self.pos + self.neg:
            if len(ex) != sig.arity:
                raise ValueError(f"example {ex} does not match arity {sig.arity} of {self.target}")
            for v, t in zip(ex, sig.arg_types):
                if not value_fits(v, t):
                    raise ValueError(f"example {ex}: {v!r} is not a {t.name}")
        if self.initial_rule is not None and self.initial_rule.arity != sig.arity:
            raise ValueError("initial rule arity differs from the target")


def _rename_clause(clause: HornClause, head_vars: Sequence[Variable]) -> tuple[Literal, ...] | None:
    fresh = _Fresh(v.name for v in head_vars)
    target_head = Literal(clause.head.predicate, tuple(head_vars))
    return _instantiate(HornClause(clause.head, clause.body), target_head.args, fresh)


def _accuracy(covers, pos, neg) -> float:
    right = sum(1 for e in pos if covers(e)) + sum(1 for e in neg if not covers(e))
    return right / (len(pos) + len(neg))


class _Source:
    """Candidate supplier for one widening step."""

    def __init__(self, task: FoclTask, kb: FactStore, budget: int, config: LearnConfig,
                 stats: LearnStats, use_literals_first: bool, use_units: bool):
        self.task = task
        self.kb = kb
        self.budget = budget
        self.config = config
        self.stats = stats
        self.constraints = Constraints.of(task.kb, typing=task.typing)
        self.use_literals_first = use_literals_first
        self.use_units = use_units
        self.head = head_variables(kb, task.target)

    def _units(self, taken) -> list[Candidate]:
        rule = self.task.initial_rule
        out = []
        for i, clause in enumerate(rule.clauses):
            body = _rename_clause(clause, self.head)
            if body is None or not body:
                continue
            body = self._expand(body, taken)
            if body is None:
                continue
            label = " & ".join(str(b) for b in body)
            out.append(Candidate(label, body, (-1, i), None, preferred=True))
        return out

    def _expand(self, body, taken):
        if self.task.keep_intensional:
            return body
        out: list = []
        names = set(taken) | {v.name for b in body for v in b.variables()}
        for lit in body:
            if not lit.negated and lit.predicate in self.kb.intensional \
                    and lit.predicate not in self.kb.extensional:
                alts = expansions(lit, self.kb, taken=names)
                if not alts:
                    return None
                chosen = alts[0]
                names |= {v.name for b in chosen for v in b.variables()}
                out.extend(chosen)
            else:
                out.append(lit)
        if len(out) > MAX_EXPANSION:
            return None
        return tuple(out)

    def __call__(self, old_vars, taken, body) -> list[Candidate]:
        out: list[Candidate] = []
        if not body and self.use_units and self.task.initial_rule is not None:
            units = self._units(taken)
            self.stats.candidates_generated += len(units)
            out.extend(units)
        if body or self.use_literals_first or self.task.initial_rule is None:
            out.extend(self._literals(old_vars, taken, body))
        return out

    def _literals(self, old_vars, taken, body) -> list[Candidate]:
        present = {str(b) for b in body}
        raw: list[Variablization] = []
        for pred in self.kb.predicates():
            if pred == self.task.target:
                continue
            sig = self.kb.signature(pred)
            raw.extend(enumerate_variablizations(
                pred, sig.arg_types, old_vars, self.budget, typed=False,
                negations=self.config.allow_negated, taken=taken))
        self.stats.candidates_generated += len(raw)
        kept = filter_candidates(raw, self.constraints)
        kept.sort(key=lambda v: v.sort_key)
        out = []
        for i, v in enumerate(kept):
            lit = v.literal
            if str(lit) in present:
                continue
            intensional = (lit.predicate in self.kb.intensional
                           and lit.predicate not in self.kb.extensional)
            if intensional and not lit.negated and not self.task.keep_intensional:
                try:
                    alts = expansions(lit, self.kb, taken=taken)
                except DepthExceeded:
                    continue
                for j, alt in enumerate(alts):
                    if len(body) + len(alt) > MAX_EXPANSION:
                        continue
                    label = str(lit) if len(alts) == 1 else f"{lit}#{j + 1}"
                    out.append(Candidate(label, alt, (i, j), v, preferred=True))
            else:
                out.append(Candidate(str(lit), (lit,), (i, 0), v, preferred=intensional))
        return out


def refine_initial_rule(task: FoclTask, config: LearnConfig | None = None,
                        stats: LearnStats | None = None) -> Rule:
    """Start each clause from the best initial-rule unit, then specialise FOIL-style."""
    if task.initial_rule is None:
        raise ValueError("refine_initial_rule needs an initial rule")
    config = config or LearnConfig()
    return _run(task, config, config.max_new_vars, stats or LearnStats())[0]


def _knowledge_choice(task: FoclTask, kb: FactStore, config: LearnConfig) -> tuple[bool, bool]:
    """Which sources feed the first literal: (extensional literals, initial-rule units)."""
    if task.initial_rule is None or task.knowledge_mode == "use_all":
        return True, True
    rule_acc = _accuracy(lambda e: rule_covers(task.initial_rule, e, kb), task.pos, task.neg)
    head = head_variables(kb, task.target)
    best = 0.0
    for pred in kb.predicates():
        if pred == task.target:
            continue
        sig = kb.signature(pred)
        for v in enumerate_variablizations(pred, sig.arg_types, head, 0, typed=task.typing,
                                           negations=config.allow_negated):
            clause = HornClause(Literal(task.target, head), (v.literal,))
            best = max(best, _accuracy(lambda e: rule_covers(Rule((clause,)), e, kb),
                                       task.pos, task.neg))
    return (best > rule_acc, best <= rule_acc)


def _run(task: FoclTask, config: LearnConfig, budget: int, stats: LearnStats):
    kb = task.kb if task.typing else task.kb.erase_types()
    kb.freeze()
    literals_first, units = _knowledge_choice(task, kb, config)
    source = _Source(task, kb, budget, config, stats, literals_first, units)
    engine = Engine(task.target, kb, config, source, stats)
    rule = engine.learn(task.pos, task.neg)
    return rule, stats.uncovered


def focl_learn(task: FoclTask, config: LearnConfig | None = None, *,
               stats: LearnStats | None = None) -> Rule:
    """Learn with budgets 0, 1, ... up to ``config.max_new_vars`` new variables.

    Widening stops at the first budget whose rule covers every positive; if
    none does, the last partial rule is returned (uncovered positives are on
    ``stats.uncovered``).
    """
    config = config or LearnConfig()
    stats = stats if stats is not None else LearnStats()
    best = None
    for budget in range(config.max_new_vars + 1):
        stats.widening_steps = budget
        stats.new_var_budget = budget
        try:
            rule, uncovered = _run(task, config, budget, stats)
        except Unlearnable:
            continue
        best = (rule, uncovered)
        if not uncovered:
            return rule
    if best is None:
        raise Unlearnable(f"no rule for {task.target} with up to {config.max_new_vars} "
                          f"new variables", uncovered=task.pos)
    stats.uncovered = best[1]
    return best[0]
