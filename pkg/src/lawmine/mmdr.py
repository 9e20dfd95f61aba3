"""MMDR: enumerate simple rules, keep the statistically significant ones, forecast.

Hypotheses are clauses ``Head(t) <- L1(t) & ... & Lk(t)`` over the unary day
predicates of an :class:`EncodedDataset`.  Each is scored by its 2x2
contingency table against the next-day head, filtered by a one-sided Fisher
test and pruned by Occam dominance.  Fired rules give sign and interval
forecasts for the next day.
"""

from __future__ import annotations

import datetime as _dt
import itertools
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .encoding import (DAY, EncodedDataset, EncodingSpec, HeadForm, MarketSeries,
                       encode)
from .errors import BodyNeverSatisfied, EmptyIntersection, UnknownPredicate
from .evaluation import head_binding, satisfiable
from .kb import FactStore
from .logic import HornClause, Literal, Rule, Variable
from .significance import binomial_tail, bonferroni, fisher_p_value
from .syntax import parse_clause

T = Variable("t", DAY)


# -- grammar ---------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisGrammar:
    """Which clauses to try.

    ``body_predicates`` maps each unary day predicate to its allowed
    polarities (``True`` = positive, ``False`` = negated).
    """

    body_predicates: tuple
    head_forms: tuple
    max_body_literals: int = 3
    max_existential_vars: int = 0

    def __post_init__(self):
        items = self.body_predicates
        if isinstance(items, Mapping):
            items = items.items()
        object.__setattr__(self, "body_predicates",
                           tuple(sorted((p, tuple(sorted(set(pol), reverse=True)))
                                        for p, pol in items)))
        object.__setattr__(self, "head_forms", tuple(sorted(self.head_forms)))
        if self.max_body_literals < 1:
            raise ValueError("max_body_literals must be at least 1")
        if self.max_existential_vars != 0:
            raise ValueError("only day-local hypotheses (no existential variables) are supported")

    def validate(self, kb: FactStore):
        for p, _ in self.body_predicates:
            kb.signature(p)
        for h in self.head_forms:
            kb.signature(h)

    @classmethod
    def default(cls, dataset: EncodedDataset, max_body_literals: int = 3) -> "HypothesisGrammar":
        return cls({p: (True, False) for p in dataset.defined_from},
                   tuple(dataset.head_forms), max_body_literals)


def complexity(clause: HornClause) -> int:
    """Body literal count plus distinct variable count."""
    return len(clause.body) + len(clause.variables())


def enumerate_hypotheses(grammar: HypothesisGrammar) -> Iterable[Rule]:
    """Rules in non-decreasing complexity, canonical text order within a level."""
    preds = grammar.body_predicates
    for k in range(1, grammar.max_body_literals + 1):
        level = []
        for head in grammar.head_forms:
            for combo in itertools.combinations(preds, k):
                for signs in itertools.product(*(pol for _, pol in combo)):
                    body = tuple(Literal(p, (T,), negated=not s)
                                 for (p, _), s in zip(combo, signs))
                    level.append(Rule((HornClause(Literal(head, (T,)), body),)))
        level.sort(key=str)
        yield from level


# -- scoring ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScoredRule:
    rule: Rule
    contingency: tuple
    cond_probability: float
    p_value: float
    complexity: int
    train_window: tuple

    @property
    def clause(self) -> HornClause:
        return self.rule.clauses[0]

    @property
    def head(self) -> str:
        return self.clause.head.predicate

    @property
    def body(self) -> frozenset:
        return frozenset((lit.predicate, lit.negated) for lit in self.clause.body)

    @property
    def text(self) -> str:
        return str(self.clause)


def _evaluable(rule: Rule, dataset: EncodedDataset) -> list[int]:
    preds = [l.predicate for c in rule.clauses for l in c.body]
    return [i for i in dataset.evaluable(preds) if dataset.targets[i] is not None]


def _score(rule, table, dataset, idx) -> ScoredRule:
    a, b, c, d = table
    if a + b == 0:
        raise BodyNeverSatisfied(f"body of {rule} never holds on the evaluable examples")
    days = dataset.days
    window = (days[idx[0]], days[idx[-1]]) if idx else (None, None)
    return ScoredRule(rule, table, a / (a + b), fisher_p_value(table),
                      complexity(rule.clauses[0]), window)


def score_rule(rule: Rule, dataset: EncodedDataset) -> ScoredRule:
    """Contingency of body against head over the rule's evaluable examples.

    Reference implementation through clause evaluation; :class:`VectorScorer`
    computes the same numbers with boolean vectors.
    """
    if len(dataset) == 0:
        raise BodyNeverSatisfied("empty dataset")
    clause = rule.clauses[0]
    kb = dataset.fact_store
    idx = _evaluable(rule, dataset)
    a = b = c = d = 0
    for i in idx:
        binding = head_binding(clause.head, dataset.examples[i])
        body = satisfiable(clause.body, binding, kb)
        head = satisfiable((clause.head,), binding, kb)
        if body:
            a, b = (a + 1, b) if head else (a, b + 1)
        else:
            c, d = (c + 1, d) if head else (c, d + 1)
    return _score(rule, (a, b, c, d), dataset, idx)


class VectorScorer:
    """Boolean-vector scoring of unary day clauses over one dataset."""

    def __init__(self, dataset: EncodedDataset):
        self.dataset = dataset
        kb = dataset.fact_store
        self.n = len(dataset)
        self.truth: dict[str, np.ndarray] = {}
        self.start: dict[str, int] = {}
        days = dataset.days
        for pred in list(dataset.defined_from) + list(dataset.head_forms):
            rows = {r[0] for r in kb.rows(pred)}
            self.truth[pred] = np.fromiter((d in rows for d in days), bool, self.n)
            self.start[pred] = dataset.defined_from.get(pred, 0)
        self.has_target = np.fromiter((t is not None for t in dataset.targets), bool, self.n)

    def _mask(self, preds) -> np.ndarray:
        start = max((self.start[p] for p in preds), default=0)
        m = self.has_target.copy()
        m[:start] = False
        return m

    def body_vector(self, clause: HornClause) -> np.ndarray:
        v = np.ones(self.n, bool)
        for lit in clause.body:
            t = self.truth[lit.predicate]
            v &= ~t if lit.negated else t
        return v

    def table(self, rule: Rule) -> tuple[tuple, np.ndarray]:
        clause = rule.clauses[0]
        for lit in clause.body + (clause.head,):
            if lit.predicate not in self.truth:
                raise UnknownPredicate(f"{lit.predicate} is not a day predicate of the dataset")
        mask = self._mask([l.predicate for l in clause.body])
        body = self.body_vector(clause) & mask
        head = self.truth[clause.head.predicate] & mask
        a = int(np.count_nonzero(body & head))
        b = int(np.count_nonzero(body & ~head))
        c = int(np.count_nonzero(~body & head & mask))
        d = int(np.count_nonzero(~body & ~head & mask))
        return (a, b, c, d), mask

    def score(self, rule: Rule) -> ScoredRule:
        table, mask = self.table(rule)
        return _score(rule, table, self.dataset, np.flatnonzero(mask).tolist())


# -- selection -------------------------------------------------------------------

def select_lawlike(scored: Iterable[ScoredRule], alpha: float, *,
                   bonferroni_correction: bool = False) -> list[ScoredRule]:
    """Significant rules not dominated by a simpler, at-least-as-significant generalization.

    A sequential fold over rules ordered by (complexity, text).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    scored = list(scored)
    level = bonferroni(alpha, len(scored)) if bonferroni_correction else alpha
    kept: list[ScoredRule] = []
    for r in sorted((s for s in scored if s.p_value <= level),
                    key=lambda s: (s.complexity, s.text)):
        dominated = any(k.head == r.head and k.complexity < r.complexity
                        and k.p_value <= r.p_value and k.body < r.body for k in kept)
        if not dominated:
            kept.append(r)
    return kept


def is_stable(rule: ScoredRule, scorer: VectorScorer, grammar: HypothesisGrammar,
              alpha: float) -> bool:
    """Whether the rule's success rate is homogeneous across one-literal refinements.

    For each grammar predicate absent from the body, the covered examples are
    split by that predicate and the two success rates are compared with
    one-sided Fisher tests in both directions (Bonferroni over all tests).
    A rule whose coverage mixes a strong and a weak sub-population is not
    maximally specific and is rejected.
    """
    clause = rule.clause
    used = {l.predicate for l in clause.body}
    others = [p for p, _ in grammar.body_predicates if p not in used]
    if not others:
        return True
    level = alpha / (2 * len(others))
    body = scorer.body_vector(clause)
    head = scorer.truth[clause.head.predicate]
    for p in others:
        mask = scorer._mask(list(used) + [p]) & body
        split = scorer.truth[p]
        a1 = int(np.count_nonzero(mask & split & head))
        b1 = int(np.count_nonzero(mask & split & ~head))
        a2 = int(np.count_nonzero(mask & ~split & head))
        b2 = int(np.count_nonzero(mask & ~split & ~head))
        if a1 + b1 == 0 or a2 + b2 == 0:
            continue
        table = (a1, b1, a2, b2)
        if min(fisher_p_value(table, "greater"), fisher_p_value(table, "less")) <= level:
            return False
    return True


def beats_coin(rule: ScoredRule, alpha: float) -> bool:
    """For sign heads: is the predicted direction right more often than not?

    Exact one-sided binomial test of ``a`` successes in ``a + b`` fired days
    against a fair coin.  Threshold heads always pass.
    """
    if head_form_of(rule.head).kind not in ("up", "down"):
        return True
    a, b = rule.contingency[:2]
    return binomial_tail(a, a + b) <= alpha


# -- forecasting -----------------------------------------------------------------

_HEAD = re.compile(r"^Next([A-Z][A-Za-z0-9]*?)(Up|Down|Above_|Below_)([0-9m.e+]*)$")


def head_form_of(predicate: str) -> HeadForm:
    m = _HEAD.match(predicate)
    if m is None:
        raise ValueError(f"{predicate} is not a forecast head")
    kind = {"Up": "up", "Down": "down", "Above_": "above", "Below_": "below"}[m.group(2)]
    if kind in ("up", "down"):
        if m.group(3):
            raise ValueError(f"{predicate} is not a forecast head")
        return HeadForm(kind)
    return HeadForm(kind, float(m.group(3).replace("m", "-")))


@dataclass(frozen=True)
class IntervalForecast:
    lower: float
    upper: float
    supporting_rules: tuple
    target_date: _dt.date | None = None

    def __post_init__(self):
        if not self.lower < self.upper:
            raise EmptyIntersection(f"empty interval ({self.lower}, {self.upper})")


def _as_rule(r) -> Rule:
    return r.rule if isinstance(r, ScoredRule) else r


def fired(rules: Sequence, facts: FactStore, day) -> list:
    """The rules (in input order) with a clause whose body holds at ``day``."""
    out = []
    for r in rules:
        for clause in _as_rule(r).clauses:
            if satisfiable(clause.body, head_binding(clause.head, (day,)), facts):
                out.append(r)
                break
    return out


def interval_forecast(rules: Sequence, facts: FactStore, day, current: float,
                      target_date=None) -> IntervalForecast:
    """Intersect the bounds implied by every rule firing at ``day``.

    Sign heads bound the next value by ``current``; threshold heads by their
    cutpoint.  Bounds are strict, so the interval is open.
    """
    lower, upper = -math.inf, math.inf
    lower_by = upper_by = None
    support = []
    for r in fired(rules, facts, day):
        form = head_form_of(_as_rule(r).predicate)
        support.append(r)
        if form.kind in ("up", "above"):
            v = current if form.kind == "up" else form.threshold
            if v > lower:
                lower, lower_by = v, r
        else:
            v = current if form.kind == "down" else form.threshold
            if v < upper:
                upper, upper_by = v, r
    if not lower < upper:
        pair = (lower_by, upper_by)
        raise EmptyIntersection(
            f"rules {_label(lower_by)} (> {lower}) and {_label(upper_by)} (< {upper}) conflict",
            rules=pair)
    return IntervalForecast(lower, upper, tuple(support), target_date)


def _label(r) -> str:
    return str(_as_rule(r).clauses[0]) if r is not None else "?"


def sign_forecast(rules: Sequence, facts: FactStore, day) -> str:
    """``up`` or ``down`` when only one direction fires, else ``abstain``.

    Threshold-head rules do not vote.
    """
    kinds = {head_form_of(_as_rule(r).predicate).kind for r in fired(rules, facts, day)}
    kinds &= {"up", "down"}
    if kinds == {"up"}:
        return "up"
    if kinds == {"down"}:
        return "down"
    return "abstain"


# -- the model -------------------------------------------------------------------

@dataclass
class MMDRConfig:
    alpha: float = 0.05
    max_body: int = 3
    bonferroni: bool = False
    stability: bool = True
    stability_alpha: float = 0.05
    beat_coin: bool = True
    jobs: int = 1


@dataclass
class MMDR:
    """Fit on a training series; forecast signs for later days."""

    config: MMDRConfig = field(default_factory=MMDRConfig)
    spec: EncodingSpec = field(default_factory=lambda: EncodingSpec(thresholds={}))
    grammar: HypothesisGrammar | None = None
    scored: list = field(default_factory=list, init=False)
    selected: list = field(default_factory=list, init=False)
    n_hypotheses: int = field(default=0, init=False)

    def fit(self, series: MarketSeries) -> "MMDR":
        self.spec_ = self.spec.resolve(series)
        data = encode(series, self.spec_)
        grammar = self.grammar or HypothesisGrammar.default(data, self.config.max_body)
        grammar.validate(data.fact_store)
        self.grammar_ = grammar
        scorer = VectorScorer(data)
        hyps = list(enumerate_hypotheses(grammar))
        self.n_hypotheses = len(hyps)

        def run(rule):
            try:
                return scorer.score(rule)
            except BodyNeverSatisfied:
                return None

        if self.config.jobs > 1:
            with ThreadPoolExecutor(self.config.jobs) as pool:
                results = list(pool.map(run, hyps))
        else:
            results = [run(h) for h in hyps]
        self.scored = [s for s in results if s is not None]
        level = (bonferroni(self.config.alpha, len(hyps)) if self.config.bonferroni
                 else self.config.alpha)
        candidates = [s for s in self.scored if s.p_value <= level]
        if self.config.stability:
            candidates = [s for s in candidates
                          if is_stable(s, scorer, grammar, self.config.stability_alpha)]
        if self.config.beat_coin:
            candidates = [s for s in candidates if beats_coin(s, level)]
        self.selected = select_lawlike(candidates, self.config.alpha,
                                       bonferroni_correction=False)
        if self.config.bonferroni:
            self.selected = [s for s in self.selected if s.p_value <= level]
        return self

    def significant_fraction(self) -> float:
        if not self.n_hypotheses:
            return 0.0
        return sum(s.p_value <= self.config.alpha for s in self.scored) / self.n_hypotheses

    def history_store(self, series: MarketSeries) -> EncodedDataset:
        """Encoding of ``series`` without any next-day facts."""
        return encode(series, self.spec_, with_heads=False)

    def predict_signs(self, series: MarketSeries, indices: Iterable[int]) -> list[str]:
        """Sign forecasts for the day after each index, using rows up to that index only."""
        indices = list(indices)
        if not indices:
            return []
        data = self.history_store(series.head(max(indices) + 1))
        return [sign_forecast(self.selected, data.fact_store, data.days[i]) for i in indices]

    def report(self) -> str:
        return rule_report(self.selected)

    def rule_ids(self) -> dict:
        return {r.text: f"R{i}" for i, r in enumerate(report_order(self.selected), 1)}


def report_order(rules: Iterable[ScoredRule]) -> list[ScoredRule]:
    return sorted(rules, key=lambda s: (s.p_value, s.complexity, s.text))


def rule_report(rules: Iterable[ScoredRule]) -> str:
    lines = []
    for i, s in enumerate(report_order(rules), 1):
        a, b, c, d = s.contingency
        lines.append(f"R{i}\t{s.text}\t{a}\t{b}\t{c}\t{d}\t{s.cond_probability:.4f}\t"
                     f"{s.p_value:.6g}\t{s.complexity}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_hypotheses(text: str, kb: FactStore | None = None) -> list[Rule]:
    sigs = kb.signatures if kb is not None else None
    rules = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            rules.append(Rule((parse_clause(line, sigs),)))
    return rules
