"""Background knowledge: typed signatures, extensional tuples, intensional
clauses, computed predicates and inter-argument constraints."""

from __future__ import annotations

import copy
import datetime as _dt
import operator
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import DataError, SignatureMismatch, TypeMismatch, UnknownPredicate
from .logic import (ANY, Constant, DataType, FunctionalExpression, HornClause,
                    Literal, Rule, ScaleKind, Variable, compatible, const_key)

DEFAULT_DEPTH_LIMIT = 8


@dataclass(frozen=True)
class TypedSignature:
    predicate: str
    arg_types: tuple
    localized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "arg_types", tuple(self.arg_types))
        if not self.arg_types:
            raise DataError(f"signature of {self.predicate} has no arguments")

    @property
    def arity(self) -> int:
        return len(self.arg_types)

    def erased(self) -> "TypedSignature":
        return TypedSignature(self.predicate, (ANY,) * self.arity, False)

    def __str__(self):
        types = ", ".join(t.name for t in self.arg_types)
        return f"{self.predicate}: ({types})" + (" localized" if self.localized else "")


@dataclass(frozen=True)
class InterArgConstraint:
    """Restriction across the argument slots of one predicate.

    ``kind`` is ``"all_args_distinct"`` or ``"forbidden_pattern"``; a pattern
    is a tuple of slot groups, each group naming slots that may not all hold
    the same variable.
    """

    predicate: str
    kind: str = "all_args_distinct"
    patterns: tuple = ()

    def __post_init__(self):
        if self.kind not in ("all_args_distinct", "forbidden_pattern"):
            raise DataError(f"unknown inter-argument constraint kind {self.kind!r}")
        object.__setattr__(self, "patterns", tuple(tuple(g) for g in self.patterns))
        if self.kind == "forbidden_pattern" and not self.patterns:
            raise DataError("forbidden_pattern needs at least one pattern")
        for group in self.patterns:
            if len(group) < 2 or any(i < 0 for i in group):
                raise DataError(f"bad slot group {group!r}")

    def validate(self, arity: int):
        for group in self.patterns:
            if max(group) >= arity:
                raise DataError(
                    f"constraint on {self.predicate} references slot {max(group)} "
                    f"but arity is {arity}")

    def violated_by(self, args: Sequence) -> bool:
        names = [a.name if isinstance(a, Variable) else ("const", a.value) for a in args]
        if self.kind == "all_args_distinct":
            return len(set(names)) < len(names)
        return any(len({names[i] for i in group}) == 1 for group in self.patterns)


def value_fits(value, dtype: DataType) -> bool:
    """Whether a raw constant can belong to ``dtype``."""
    if dtype.is_any:
        return True
    if dtype.elements is not None:
        return value in dtype.elements
    if dtype.scale_kind in (ScaleKind.INTERVAL, ScaleKind.RATIO, ScaleKind.ABSOLUTE):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if dtype.scale_kind is ScaleKind.ORDINAL:
        return isinstance(value, (int, float, _dt.date, str))
    return True


_COMPARATORS = {">": operator.gt, "<": operator.lt, "=": operator.eq,
                ">=": operator.ge, "<=": operator.le}


class FactStore:
    """Background knowledge B under the closed-world assumption.

    A predicate may be extensional (a set of tuples), intensional (a rule),
    mixed (both; tuples are consulted first) or computed (a Python test over
    ground arguments, used for built-in comparisons and arithmetic
    definitions).  Call :meth:`freeze` once construction is finished; a
    frozen store is read-only and safe to share between threads.
    """

    def __init__(self, depth_limit: int = DEFAULT_DEPTH_LIMIT):
        self.depth_limit = depth_limit
        self.types: dict[str, DataType] = {ANY.name: ANY}
        self.signatures: dict[str, TypedSignature] = {}
        self.extensional: dict[str, set] = {}
        self.intensional: dict[str, Rule] = {}
        self.computed: dict[str, Callable[..., bool]] = {}
        self.constraints: dict[str, list[InterArgConstraint]] = {}
        self.initial_rules: list[tuple[Rule, str]] = []
        self._extra_constants: dict[str, set] = {}
        self._frozen = False
        self._sorted: dict[str, tuple] = {}
        self._index: dict[tuple, dict] = {}
        self._constants: dict[str, tuple] | None = None

    # -- declaration ---------------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise DataError("fact store is frozen")

    def declare_type(self, dtype: DataType) -> DataType:
        self._check_mutable()
        known = self.types.get(dtype.name)
        if known is not None and known != dtype:
            raise DataError(f"type {dtype.name!r} declared twice with different definitions")
        self.types[dtype.name] = dtype
        return dtype

    def declare(self, predicate: str, arg_types: Sequence[DataType | str],
                localized: bool = False) -> TypedSignature:
        self._check_mutable()
        types = tuple(self._resolve_type(t) for t in arg_types)
        sig = TypedSignature(predicate, types, localized)
        known = self.signatures.get(predicate)
        if known is not None and known != sig:
            raise SignatureMismatch(f"{predicate} already declared as {known}")
        self.signatures[predicate] = sig
        return sig

    def _resolve_type(self, t: DataType | str) -> DataType:
        if isinstance(t, DataType):
            if t.name not in self.types:
                self.types[t.name] = t
            return t
        try:
            return self.types[t]
        except KeyError:
            raise DataError(f"unknown type {t!r}") from None

    def signature(self, predicate: str) -> TypedSignature:
        try:
            return self.signatures[predicate]
        except KeyError:
            raise UnknownPredicate(f"unknown predicate {predicate!r}") from None

    def add_fact(self, predicate: str, values: Sequence):
        self._check_mutable()
        sig = self.signature(predicate)
        values = tuple(values)
        if len(values) != sig.arity:
            raise SignatureMismatch(
                f"{predicate} expects {sig.arity} arguments, got {len(values)}")
        for v, t in zip(values, sig.arg_types):
            if not value_fits(v, t):
                raise TypeMismatch(f"{v!r} does not fit type {t.name} in {predicate}")
        self.extensional.setdefault(predicate, set()).add(values)

    def add_facts(self, predicate: str, rows: Iterable[Sequence]):
        """Add tuples; the predicate becomes extensional even when ``rows`` is empty."""
        self._check_mutable()
        self.ensure_extensional(predicate)
        for row in rows:
            self.add_fact(predicate, row)

    def ensure_extensional(self, predicate: str):
        """Make ``predicate`` extensional even if it has no true tuples."""
        self.signature(predicate)
        self.extensional.setdefault(predicate, set())

    def add_constants(self, dtype: DataType | str, values: Iterable):
        """Register constants that occur outside stored tuples (e.g. examples)."""
        self._check_mutable()
        t = self._resolve_type(dtype)
        for v in values:
            if not value_fits(v, t):
                raise TypeMismatch(f"{v!r} does not fit type {t.name}")
            self._extra_constants.setdefault(t.name, set()).add(v)

    def add_rule(self, rule: Rule):
        """Add an intensional definition (clauses are appended if one exists)."""
        self._check_mutable()
        self.check_rule(rule)
        known = self.intensional.get(rule.predicate)
        self.intensional[rule.predicate] = (
            Rule(known.clauses + rule.clauses) if known else rule)

    def add_computed(self, predicate: str, arg_types: Sequence[DataType | str],
                     test: Callable[..., bool], localized: bool = True):
        self._check_mutable()
        self.declare(predicate, arg_types, localized)
        self.computed[predicate] = test

    def add_comparison(self, predicate: str, dtype: DataType | str, op: str = ">"):
        """Localized built-in order relation such as ``Greater_dates(date, date)``."""
        cmp = _COMPARATORS[op]
        self.add_computed(predicate, (dtype, dtype), lambda a, b: bool(cmp(a, b)))

    def add_constraint(self, constraint: InterArgConstraint):
        self._check_mutable()
        constraint.validate(self.signature(constraint.predicate).arity)
        self.constraints.setdefault(constraint.predicate, []).append(constraint)

    def check_rule(self, rule: Rule):
        """Validate every literal of ``rule`` against the declared signatures."""
        for clause in rule.clauses:
            for lit in (clause.head,) + clause.body:
                sig = self.signatures.get(lit.predicate)
                if sig is None:
                    raise SignatureMismatch(f"predicate {lit.predicate!r} has no signature")
                if sig.arity != lit.arity:
                    raise SignatureMismatch(
                        f"{lit.predicate} has arity {sig.arity}, used with {lit.arity}")
                for arg, t in zip(lit.args, sig.arg_types):
                    if not isinstance(arg, FunctionalExpression) and not compatible(arg.dtype, t):
                        raise SignatureMismatch(
                            f"argument {arg} of type {arg.dtype.name} in {lit} "
                            f"expects {t.name}")

    # -- freezing and lookup ---------------------------------------------------

    def freeze(self) -> "FactStore":
        if self._frozen:
            return self
        for pred in self.extensional:
            self._sorted[pred] = tuple(sorted(
                self.extensional[pred], key=lambda row: tuple(const_key(v) for v in row)))
        self._constants = self._collect_constants()
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _collect_constants(self) -> dict[str, tuple]:
        by_type: dict[str, set] = {name: set(vals) for name, vals in self._extra_constants.items()}
        for pred, rows in self.extensional.items():
            sig = self.signatures[pred]
            for row in rows:
                for v, t in zip(row, sig.arg_types):
                    by_type.setdefault(t.name, set()).add(v)
        for t in self.types.values():
            if t.elements is not None:
                by_type.setdefault(t.name, set()).update(t.elements)
        everything = set()
        for vals in by_type.values():
            everything.update(vals)
        by_type[ANY.name] = everything
        return {name: tuple(sorted(vals, key=const_key)) for name, vals in by_type.items()}

    def constants(self, dtype: DataType) -> tuple:
        """Canonically sorted constants of ``dtype`` appearing in the store."""
        if self._constants is None:
            return tuple(sorted(self._collect_constants().get(dtype.name, ()), key=const_key))
        return self._constants.get(dtype.name, ())

    @property
    def constants_by_type(self) -> dict[str, tuple]:
        if self._constants is None:
            return self._collect_constants()
        return dict(self._constants)

    def kind(self, predicate: str) -> str:
        ext = predicate in self.extensional
        intl = predicate in self.intensional
        if predicate in self.computed:
            return "computed"
        if ext and intl:
            return "mixed"
        if ext:
            return "extensional"
        if intl:
            return "intensional"
        raise UnknownPredicate(f"unknown predicate {predicate!r}")

    def predicates(self) -> list[str]:
        names = set(self.extensional) | set(self.intensional) | set(self.computed)
        return sorted(names)

    def rows(self, predicate: str) -> tuple:
        if predicate in self._sorted:
            return self._sorted[predicate]
        rows = self.extensional.get(predicate, ())
        return tuple(sorted(rows, key=lambda row: tuple(const_key(v) for v in row)))

    def match(self, predicate: str, pattern: Sequence) -> Sequence[tuple]:
        """Stored tuples agreeing with ``pattern`` (``None`` = any value)."""
        bound = tuple(i for i, v in enumerate(pattern) if v is not None)
        if not bound:
            return self.rows(predicate)
        key = tuple(pattern[i] for i in bound)
        if not self._frozen:
            return [r for r in self.rows(predicate) if all(r[i] == pattern[i] for i in bound)]
        index = self._index.get((predicate, bound))
        if index is None:
            index = {}
            for row in self.rows(predicate):
                index.setdefault(tuple(row[i] for i in bound), []).append(row)
            self._index[(predicate, bound)] = index
        return index.get(key, ())

    def holds(self, predicate: str, values: Sequence) -> bool:
        return tuple(values) in self.extensional.get(predicate, ())

    # -- derived stores ------------------------------------------------------

    def copy(self) -> "FactStore":
        new = FactStore(self.depth_limit)
        new.types = dict(self.types)
        new.signatures = dict(self.signatures)
        new.extensional = {k: set(v) for k, v in self.extensional.items()}
        new.intensional = dict(self.intensional)
        new.computed = dict(self.computed)
        new.constraints = {k: list(v) for k, v in self.constraints.items()}
        new.initial_rules = list(self.initial_rules)
        new._extra_constants = copy.deepcopy(self._extra_constants)
        return new

    def erase_types(self) -> "FactStore":
        """A copy in which every predicate is over the universal type.

        Used to measure what typing saves: the erased store admits every
        variablization of every predicate.
        """
        new = self.copy()
        new.signatures = {p: s.erased() for p, s in self.signatures.items()}
        new.intensional = {p: erase_rule(r) for p, r in self.intensional.items()}
        new.initial_rules = [(erase_rule(r), form) for r, form in self.initial_rules]
        extra = {}
        for name, vals in new._extra_constants.items():
            extra.setdefault(name, set()).update(vals)
        new._extra_constants = extra
        return new

    def dump(self) -> str:
        """Tab-separated ``predicate<TAB>arg...`` lines in canonical order."""
        lines = []
        for pred in sorted(self.extensional):
            for row in self.rows(pred):
                lines.append("\t".join([pred] + [_dump_value(v) for v in row]))
        return "\n".join(lines) + ("\n" if lines else "")


def _dump_value(v) -> str:
    if isinstance(v, _dt.date):
        return v.isoformat()
    return str(v) if not isinstance(v, float) else repr(v)


def erase_literal(lit: Literal) -> Literal:
    return Literal(lit.predicate, tuple(_erase_term(a) for a in lit.args), lit.negated)


def _erase_term(term):
    if isinstance(term, Variable):
        return Variable(term.name, ANY)
    if isinstance(term, Constant):
        return Constant(term.value, ANY)
    return FunctionalExpression(term.function, tuple(_erase_term(a) for a in term.args),
                                ANY, term.arity)


def erase_rule(rule: Rule) -> Rule:
    return Rule(tuple(HornClause(erase_literal(c.head), tuple(erase_literal(b) for b in c.body))
                      for c in rule.clauses))
