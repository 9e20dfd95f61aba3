"""Coverage of examples by literals, clauses and rules against a fact store.

Bindings are plain dicts from variable name to constant value.  Extensional
predicates are read under the closed-world assumption, negated literals use
negation as failure, and intensional predicates are expanded clause by clause
up to the store's depth limit.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Mapping, Sequence

from .errors import DataError, DepthExceeded, TypeMismatch
from .kb import FactStore
from .logic import (Constant, FunctionalExpression, HornClause, Literal, Rule,
                    Variable, compatible)

Binding = dict


def _check_types(lit: Literal, kb: FactStore):
    sig = kb.signature(lit.predicate)
    if sig.arity != lit.arity:
        raise TypeMismatch(f"{lit} has arity {lit.arity}, {lit.predicate} expects {sig.arity}")
    for arg, t in zip(lit.args, sig.arg_types):
        if isinstance(arg, FunctionalExpression):
            raise DataError(f"functional expression {arg} cannot be evaluated in a clause body")
        if not compatible(arg.dtype, t):
            raise TypeMismatch(f"{arg} of type {arg.dtype.name} in slot of type {t.name} ({lit})")


def _resolve(args, binding: Mapping) -> list:
    values = []
    for a in args:
        if isinstance(a, Constant):
            values.append(a.value)
        else:
            values.append(binding.get(a.name))
    return values


def _unify_row(args, row, binding: Mapping) -> Binding | None:
    new = None
    for a, v in zip(args, row):
        if isinstance(a, Variable):
            current = binding.get(a.name) if new is None else new.get(a.name)
            if current is None:
                if new is None:
                    new = dict(binding)
                new[a.name] = v
            elif current != v:
                return None
        elif a.value != v:
            return None
    return dict(binding) if new is None else new


def _solve_positive(lit: Literal, binding: Mapping, kb: FactStore, depth: int) -> Iterator[Binding]:
    pred = lit.predicate
    kind = kb.kind(pred)
    pattern = _resolve(lit.args, binding)

    if kind == "computed":
        test = kb.computed[pred]
        free = []
        for a, v in zip(lit.args, pattern):
            if v is None and a.name not in (f.name for f in free):
                free.append(a)
        if not free:
            if test(*pattern):
                yield dict(binding)
            return
        domains = [kb.constants(v.dtype) for v in free]
        for combo in itertools.product(*domains):
            extended = dict(binding)
            extended.update((v.name, c) for v, c in zip(free, combo))
            if test(*_resolve(lit.args, extended)):
                yield extended
        return

    if kind in ("extensional", "mixed"):
        for row in kb.match(pred, pattern):
            b = _unify_row(lit.args, row, binding)
            if b is not None:
                yield b

    if kind in ("intensional", "mixed"):
        if depth >= kb.depth_limit:
            raise DepthExceeded(f"expanding {lit} exceeded depth limit {kb.depth_limit}")
        for clause in kb.intensional[pred].clauses:
            yield from _solve_via_clause(lit, pattern, binding, clause, kb, depth + 1)


def _solve_via_clause(lit, pattern, binding, clause: HornClause, kb, depth) -> Iterator[Binding]:
    # the clause runs in its own variable namespace; head slots link the two
    inner: dict = {}
    links: list[tuple[str, str]] = []
    for head_arg, outer_arg, value in zip(clause.head.args, lit.args, pattern):
        if isinstance(head_arg, Constant):
            if value is not None and value != head_arg.value:
                return
            if value is None:
                links.append((outer_arg.name, ("const", head_arg.value)))
            continue
        if value is not None:
            known = inner.get(head_arg.name)
            if known is not None and known != value:
                return
            inner[head_arg.name] = value
        else:
            links.append((outer_arg.name, head_arg.name))
    for solution in solve(clause.body, inner, kb, depth):
        out = dict(binding)
        ok = True
        pending = []
        for outer_name, src in links:
            if isinstance(src, tuple):
                val = src[1]
            else:
                val = solution.get(src)
            if val is None:
                pending.append((outer_name, src))
                continue
            if out.get(outer_name, val) != val:
                ok = False
                break
            out[outer_name] = val
        if not ok:
            continue
        if pending:
            # head variable absent from the body: range over its typed constants
            names = sorted({p[0] for p in pending})
            var_types = {a.name: a.dtype for a in lit.args if isinstance(a, Variable)}
            domains = [kb.constants(var_types[n]) for n in names]
            for combo in itertools.product(*domains):
                extended = dict(out)
                extended.update(zip(names, combo))
                yield extended
        else:
            yield out


def solve_literal(lit: Literal, binding: Mapping, kb: FactStore, depth: int = 0) -> Iterator[Binding]:
    """Extensions of ``binding`` under which ``lit`` holds."""
    _check_types(lit, kb)
    if lit.negated:
        for _ in _solve_positive(lit, binding, kb, depth):
            return
        yield dict(binding)
        return
    yield from _solve_positive(lit, binding, kb, depth)


def solve(body: Sequence[Literal], binding: Mapping, kb: FactStore, depth: int = 0) -> Iterator[Binding]:
    """All extensions of ``binding`` satisfying every literal of ``body``."""
    if not body:
        yield dict(binding)
        return
    first, rest = body[0], body[1:]
    for b in solve_literal(first, binding, kb, depth):
        yield from solve(rest, b, kb, depth)


def satisfiable(body: Sequence[Literal], binding: Mapping, kb: FactStore) -> bool:
    for _ in solve(body, binding, kb):
        return True
    return False


def evaluate_literal(literal: Literal, binding: Mapping, kb: FactStore) -> bool:
    """Truth of ``literal`` under ``binding``.

    A negated literal is true iff the positive literal has no solution; any
    of its variables left unbound are read existentially inside the negation.
    """
    return satisfiable((literal,), binding, kb)


def head_binding(head: Literal, example: Sequence) -> Binding | None:
    example = tuple(example)
    if len(example) != head.arity:
        raise DataError(f"example of arity {len(example)} for head {head}")
    return _unify_row(head.args, example, {})


def clause_covers(clause: HornClause, example: Sequence, kb: FactStore) -> bool:
    binding = head_binding(clause.head, example)
    if binding is None:
        return False
    return satisfiable(clause.body, binding, kb)


def rule_covers(rule: Rule, example: Sequence, kb: FactStore) -> bool:
    return any(clause_covers(c, example, kb) for c in rule.clauses)
