"""First-order vocabulary: data types, terms, literals, Horn clauses and rules."""

from __future__ import annotations

import datetime as _dt
import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DataError, NotCyclic, UnknownElement


class ScaleKind(str, enum.Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"
    INTERVAL = "interval"
    RATIO = "ratio"
    CYCLIC = "cyclic"
    ABSOLUTE = "absolute"


_ORDER_RELATIONS = frozenset({"<", "=", ">"})
_AT_LEAST_ORDINAL = {ScaleKind.ORDINAL, ScaleKind.INTERVAL, ScaleKind.RATIO,
                     ScaleKind.ABSOLUTE, ScaleKind.CYCLIC}


@dataclass(frozen=True)
class DataType:
    """A data type: its elements, the relations and the operations it admits.

    ``elements`` is a finite enumeration for nominal and cyclic types and
    ``None`` for numeric domains.  Ordinal and stronger scales default to the
    order relations ``<, =, >`` when no relations are given.
    """

    name: str
    scale_kind: ScaleKind = ScaleKind.NOMINAL
    elements: tuple | None = None
    period: int | None = None
    permitted_relations: frozenset = frozenset()
    permitted_operations: frozenset = frozenset()

    def __post_init__(self):
        kind = ScaleKind(self.scale_kind)
        object.__setattr__(self, "scale_kind", kind)
        if self.elements is not None:
            object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "permitted_relations", frozenset(self.permitted_relations))
        object.__setattr__(self, "permitted_operations", frozenset(self.permitted_operations))
        if kind is ScaleKind.CYCLIC:
            if self.period is None and self.elements is not None:
                object.__setattr__(self, "period", len(self.elements))
            if self.period is None or self.period < 2:
                raise DataError(f"cyclic type {self.name!r} needs period >= 2")
            if self.elements is None or len(self.elements) != self.period:
                raise DataError(
                    f"cyclic type {self.name!r} needs exactly {self.period} elements")
        elif self.period is not None:
            raise DataError(f"period given for non-cyclic type {self.name!r}")
        if kind in _AT_LEAST_ORDINAL and not self.permitted_relations:
            object.__setattr__(self, "permitted_relations", _ORDER_RELATIONS)
        if kind in _AT_LEAST_ORDINAL and not _ORDER_RELATIONS <= self.permitted_relations:
            raise DataError(f"type {self.name!r} must permit <, =, >")
        if kind in (ScaleKind.INTERVAL, ScaleKind.RATIO, ScaleKind.ABSOLUTE) \
                and not self.permitted_operations:
            ops = {"-"} if kind is ScaleKind.INTERVAL else {"+", "-", "*", "/"}
            object.__setattr__(self, "permitted_operations", frozenset(ops))

    @property
    def is_any(self) -> bool:
        return self.name == ANY_NAME

    def index(self, element) -> int:
        if self.elements is None or element not in self.elements:
            raise UnknownElement(f"{element!r} is not an element of {self.name}")
        return self.elements.index(element)

    def __str__(self):
        return self.name


ANY_NAME = "item"
#: The universal type used when typing is switched off.
ANY = DataType(ANY_NAME, ScaleKind.NOMINAL)

WEEKDAY = DataType("weekday", ScaleKind.CYCLIC, ("Mon", "Tue", "Wed", "Thu", "Fri"))


def compatible(a: DataType, b: DataType) -> bool:
    return a.is_any or b.is_any or a.name == b.name


def cyclic_distance(a, b, dtype: DataType) -> int:
    """Directed distance from ``a`` forward to ``b`` on a cyclic scale.

    ``cyclic_distance("Fri", "Mon", WEEKDAY)`` is 1 (next week's Monday) while
    the reverse direction is 4.
    """
    if dtype.scale_kind is not ScaleKind.CYCLIC:
        raise NotCyclic(f"{dtype.name} is {dtype.scale_kind.value}, not cyclic")
    return (dtype.index(b) - dtype.index(a)) % dtype.period


def cyclic_successor(a, dtype: DataType, steps: int = 1):
    if dtype.scale_kind is not ScaleKind.CYCLIC:
        raise NotCyclic(f"{dtype.name} is {dtype.scale_kind.value}, not cyclic")
    return dtype.elements[(dtype.index(a) + steps) % dtype.period]


def const_key(value):
    """Sort key giving a canonical total order over mixed constants."""
    if isinstance(value, bool):
        return (0, float(value), "")
    if isinstance(value, (int, float)):
        return (0, float(value), "")
    if isinstance(value, _dt.date):
        return (1, value.toordinal(), "")
    return (2, 0.0, str(value))


# -- terms ---------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: object
    dtype: DataType = ANY

    def __str__(self):
        return format_constant(self.value)


@dataclass(frozen=True)
class Variable:
    name: str
    dtype: DataType = ANY

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FunctionalExpression:
    """A function symbol applied to argument terms, e.g. ``StockPrice(x)``."""

    function: str
    args: tuple
    dtype: DataType = ANY
    arity: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if self.arity is None:
            object.__setattr__(self, "arity", len(self.args))
        elif self.arity != len(self.args):
            raise DataError(
                f"{self.function}/{self.arity} applied to {len(self.args)} arguments")

    def __str__(self):
        return f"{self.function}({', '.join(str(a) for a in self.args)})"


Term = Constant | Variable | FunctionalExpression


def format_constant(value) -> str:
    if isinstance(value, bool):
        return repr(value)
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, _dt.date):
        return value.isoformat()
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


# -- literals, clauses, rules ------------------------------------------------

@dataclass(frozen=True)
class Literal:
    predicate: str
    args: tuple
    negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise DataError(f"literal {self.predicate} needs at least one argument")

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[Variable]:
        for a in self.args:
            if isinstance(a, Variable):
                yield a

    def positive(self) -> "Literal":
        return Literal(self.predicate, self.args, False) if self.negated else self

    def negate(self) -> "Literal":
        return Literal(self.predicate, self.args, not self.negated)

    def __str__(self):
        text = f"{self.predicate}({', '.join(str(a) for a in self.args)})"
        return "!" + text if self.negated else text


@dataclass(frozen=True)
class HornClause:
    head: Literal
    body: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if self.head.negated:
            raise DataError("clause head must be a positive literal")
        for arg in self.head.args:
            if isinstance(arg, FunctionalExpression):
                raise DataError("clause head arguments must be variables or constants")

    def head_variables(self) -> tuple[Variable, ...]:
        return _unique(self.head.variables())

    def variables(self) -> tuple[Variable, ...]:
        found = list(self.head.variables())
        for lit in self.body:
            found.extend(lit.variables())
        return _unique(found)

    def existential_variables(self) -> tuple[Variable, ...]:
        head = {v.name for v in self.head.variables()}
        return tuple(v for v in self.variables() if v.name not in head)

    def __str__(self):
        body = " & ".join(str(lit) for lit in self.body) if self.body else "true"
        return f"{self.head} <- {body}"


@dataclass(frozen=True)
class Rule:
    """A non-empty collection of clauses sharing one head predicate."""

    clauses: tuple

    def __post_init__(self):
        clauses = tuple(self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if not clauses:
            raise DataError("a rule needs at least one clause")
        first = clauses[0].head
        for c in clauses[1:]:
            if c.head.predicate != first.predicate or c.head.arity != first.arity:
                raise DataError(
                    f"rule mixes heads {first.predicate}/{first.arity} and "
                    f"{c.head.predicate}/{c.head.arity}")

    @property
    def predicate(self) -> str:
        return self.clauses[0].head.predicate

    @property
    def arity(self) -> int:
        return self.clauses[0].head.arity

    def with_clause(self, clause: HornClause) -> "Rule":
        return Rule(self.clauses + (clause,))

    def __str__(self):
        return "\n".join(str(c) for c in self.clauses)


def _unique(variables: Iterable[Variable]) -> tuple[Variable, ...]:
    seen: dict[str, Variable] = {}
    for v in variables:
        seen.setdefault(v.name, v)
    return tuple(seen.values())


def body_key(body: Sequence[Literal]) -> frozenset:
    """Order-insensitive identity of a clause body."""
    return frozenset(str(lit) for lit in body)
