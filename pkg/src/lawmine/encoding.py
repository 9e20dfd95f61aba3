"""Attribute-value time series and their relational encoding.

A :class:`MarketSeries` holds dated attribute rows.  Encoding turns each
trading day into a constant of type ``day`` and derives unary extensional
predicates over days (lagged comparisons, thresholds, weekdays) plus head
predicates describing the next day's value of the target attribute.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (EmptySeries, LagTooLarge, MissingAttribute, NonMonotoneDates,
                     ParseError, SchemaMismatch)
from .kb import FactStore
from .logic import (WEEKDAY, Constant, DataType, FunctionalExpression, Rule,
                    ScaleKind)

DAY = DataType("day", ScaleKind.ORDINAL)
EVENT = DataType("event", ScaleKind.NOMINAL, (
    "reported profit", "new product", "competitor's activity",
    "government activity", "other"))

_WEEKDAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri")
_WEEKDAY_PREDICATES = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday")


def weekday_of(date: _dt.date):
    """Trading weekday element, or ``None`` for a weekend date."""
    wd = date.weekday()
    return _WEEKDAY_NAMES[wd] if wd < 5 else None


def normalise_event(text) -> str:
    if text is None:
        return "other"
    key = str(text).strip().lower().replace("’", "'")
    for element in EVENT.elements:
        if key == element:
            return element
    return "other"


@dataclass(frozen=True)
class Row:
    date: _dt.date
    attributes: Mapping
    weekday: str | None = None

    def __getitem__(self, name):
        try:
            return self.attributes[name]
        except KeyError:
            raise MissingAttribute(f"row {self.date} has no attribute {name!r}") from None


@dataclass(frozen=True)
class MarketSeries:
    rows: tuple = ()
    schema: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        names = None
        for prev, row in zip(self.rows, self.rows[1:]):
            if row.date <= prev.date:
                raise NonMonotoneDates(f"date {row.date} does not follow {prev.date}")
        for row in self.rows:
            keys = set(row.attributes)
            if names is None:
                names = keys
            elif keys != names:
                raise SchemaMismatch(f"row {row.date} has attributes {sorted(keys)}, "
                                     f"expected {sorted(names)}")

    def __len__(self):
        return len(self.rows)

    @property
    def attributes(self) -> tuple:
        return tuple(self.rows[0].attributes) if self.rows else tuple(self.schema)

    @property
    def dates(self) -> tuple:
        return tuple(r.date for r in self.rows)

    def values(self, attribute: str) -> tuple:
        return tuple(r[attribute] for r in self.rows)

    def slice(self, start: int, stop: int) -> "MarketSeries":
        return MarketSeries(self.rows[start:stop], self.schema)

    def head(self, n: int) -> "MarketSeries":
        return self.slice(0, n)


def ingest_series(rows: Iterable[Mapping], schema: Mapping[str, DataType]) -> MarketSeries:
    """Validate raw records into a :class:`MarketSeries`.

    Each record needs a ``date`` (``datetime.date`` or ISO ``YYYY-MM-DD``
    text) and exactly the attributes named in ``schema``.  Numeric types are
    parsed as floats, the ``event`` type is mapped onto its enumeration.
    """
    parsed = []
    for n, raw in enumerate(rows, 1):
        raw = dict(raw)
        if "date" not in raw:
            raise ParseError(f"record {n} has no date")
        date = _parse_date(raw.pop("date"), n)
        if set(raw) != set(schema):
            raise SchemaMismatch(
                f"record {n} has columns {sorted(raw)}, schema declares {sorted(schema)}")
        attrs = {}
        for name, dtype in schema.items():
            attrs[name] = _parse_value(raw[name], dtype, n, name)
        parsed.append(Row(date, attrs, weekday_of(date)))
    return MarketSeries(tuple(parsed), dict(schema))


def _parse_date(value, n) -> _dt.date:
    if isinstance(value, _dt.datetime):
        return value.date()
    if isinstance(value, _dt.date):
        return value
    try:
        return _dt.date.fromisoformat(str(value).strip())
    except ValueError:
        raise ParseError(f"record {n}: malformed date {value!r}") from None


def _parse_value(value, dtype: DataType, n, name):
    if dtype.name == EVENT.name:
        return normalise_event(value)
    if dtype.scale_kind in (ScaleKind.INTERVAL, ScaleKind.RATIO, ScaleKind.ABSOLUTE):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        try:
            return float(str(value).replace(",", "").strip())
        except ValueError:
            raise ParseError(f"record {n}: {name}={value!r} is not numeric") from None
    if dtype.elements is not None and value not in dtype.elements:
        raise ParseError(f"record {n}: {value!r} is not an element of {dtype.name}")
    return value


def default_schema(columns: Sequence[str]) -> dict[str, DataType]:
    schema = {}
    for col in columns:
        if col == "date":
            continue
        schema[col] = EVENT if col == "event" else DataType(col, ScaleKind.RATIO)
    return schema


def read_csv(path, schema: Mapping[str, DataType] | None = None) -> MarketSeries:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return MarketSeries((), dict(schema or {}))
        if "date" not in reader.fieldnames:
            raise SchemaMismatch(f"{path}: required column 'date' missing")
        schema = schema or default_schema(reader.fieldnames)
        return ingest_series(list(reader), schema)


def write_csv(series: MarketSeries, path):
    names = list(series.attributes)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + names)
        for row in series.rows:
            w.writerow([row.date.isoformat()] + [_csv_value(row[n]) for n in names])


def _csv_value(v):
    return repr(v) if isinstance(v, float) else v


# -- derived predicates --------------------------------------------------------

def attr_name(attribute: str) -> str:
    return "".join(part[:1].upper() + part[1:] for part in attribute.split("_"))


def number_token(value: float) -> str:
    if float(value).is_integer():
        text = str(int(value))
    else:
        text = repr(float(value))
    return text.replace("-", "m")


def _day_predicate(kb: FactStore, name: str):
    if name not in kb.signatures:
        kb.declare(name, (DAY,))
    kb.ensure_extensional(name)


def _register_days(kb: FactStore, series: MarketSeries):
    if DAY.name not in kb.types:
        kb.declare_type(DAY)
    kb.add_constants(DAY, series.dates)


def derive_comparison_predicates(series: MarketSeries, attribute: str,
                                 lags: Iterable[int], kb: FactStore) -> dict[str, int]:
    """Add ``<Attr>Up_<lag>(t)``, true where ``value(t - lag) < value(t)``.

    Also declares the localized order ``Greater_<attr>`` over the observed
    values.  Returns each new predicate with the first series index at which
    it is defined.
    """
    values = series.values(attribute)
    lags = sorted(set(lags))
    for lag in lags:
        if lag < 1:
            raise LagTooLarge(f"lag must be positive, got {lag}")
        if lag >= len(series):
            raise LagTooLarge(f"lag {lag} needs more than {len(series)} rows")
    _register_days(kb, series)
    dtype = series.schema.get(attribute) or DataType(attribute, ScaleKind.RATIO)
    defined = {}
    for lag in lags:
        name = f"{attr_name(attribute)}Up_{lag}"
        _day_predicate(kb, name)
        for i in range(lag, len(values)):
            if values[i - lag] < values[i]:
                kb.add_fact(name, (series.rows[i].date,))
        defined[name] = lag
    greater = f"Greater_{attribute}"
    if greater not in kb.signatures:
        kb.add_comparison(greater, dtype, ">")
    kb.add_constants(dtype, values)
    return defined


def nearest_rank(values: Sequence[float], q) -> float:
    """Lower nearest-rank quantile: the ceil(q*n)-th smallest value."""
    q = Fraction(str(q))
    if not 0 < q < 1:
        raise ValueError(f"quantile must lie in (0, 1), got {q}")
    ordered = sorted(values)
    rank = max(1, math.ceil(q * len(ordered)))
    return ordered[rank - 1]


def resolve_thresholds(values: Sequence[float], thresholds: Iterable) -> list[float]:
    """Turn a mix of numeric cutpoints and ``"q0.25"``-style quantiles into numbers."""
    cuts = []
    for t in thresholds:
        if isinstance(t, str) and t.startswith("q"):
            if not values:
                raise EmptySeries("quantile thresholds need a non-empty series")
            cuts.append(float(nearest_rank(values, t[1:])))
        else:
            c = float(t)
            if not math.isfinite(c):
                raise ValueError(f"threshold {t!r} is not finite")
            cuts.append(c)
    return sorted(set(cuts))


def derive_threshold_predicates(series: MarketSeries, attribute: str, thresholds: Iterable,
                                kb: FactStore) -> dict[str, int]:
    """Add ``<Attr>Above_<c>(t)``, true iff ``value(t) > c`` (strict)."""
    if len(series) == 0:
        raise EmptySeries("cannot derive thresholds from an empty series")
    values = series.values(attribute)
    cuts = resolve_thresholds(values, thresholds)
    _register_days(kb, series)
    defined = {}
    for c in cuts:
        name = f"{attr_name(attribute)}Above_{number_token(c)}"
        _day_predicate(kb, name)
        for row, v in zip(series.rows, values):
            if v > c:
                kb.add_fact(name, (row.date,))
        defined[name] = 0
    return defined


def derive_weekday_predicates(series: MarketSeries, kb: FactStore) -> dict[str, int]:
    _register_days(kb, series)
    defined = {}
    for element, name in zip(_WEEKDAY_NAMES, _WEEKDAY_PREDICATES):
        _day_predicate(kb, name)
        for row in series.rows:
            if row.weekday == element:
                kb.add_fact(name, (row.date,))
        defined[name] = 0
    return defined


# -- term representation ---------------------------------------------------------

STOCK_FIELDS = ("price", "volume", "date", "weekday", "event")
PROJECTIONS = {"Stock" + f.capitalize(): i for i, f in enumerate(STOCK_FIELDS)}


def term_representation(row: Row) -> FunctionalExpression:
    """``Stock(price, volume, date, weekday, event)`` for one row."""
    args = []
    for f in STOCK_FIELDS:
        if f == "date":
            args.append(Constant(row.date, DAY))
        elif f == "weekday":
            if row.weekday is None:
                raise MissingAttribute(f"{row.date} is not a trading weekday")
            args.append(Constant(row.weekday, WEEKDAY))
        elif f == "event":
            args.append(Constant(row["event"], EVENT))
        else:
            args.append(Constant(row[f], DataType(f, ScaleKind.RATIO)))
    return FunctionalExpression("Stock", tuple(args), DataType("stock"))


def project(term: FunctionalExpression, projection: str):
    """Apply a projection function such as ``StockPrice`` to a stock term."""
    if term.function != "Stock":
        raise MissingAttribute(f"{term.function} is not a stock term")
    try:
        return term.args[PROJECTIONS[projection]].value
    except KeyError:
        raise MissingAttribute(f"unknown projection {projection!r}") from None


def same_event(w: FunctionalExpression, x: FunctionalExpression) -> bool:
    return project(x, "StockEvent") == project(w, "StockEvent")


# -- initial rules ---------------------------------------------------------------

def register_initial_rule(kb: FactStore, rule: Rule, form: str = "intensional") -> FactStore:
    """Store ``rule`` as a refinement seed / hypothesis-catalogue entry."""
    if form not in ("extensional_hint", "intensional"):
        raise ValueError(f"unknown initial rule form {form!r}")
    kb.check_rule(rule)
    kb.initial_rules.append((rule, form))
    return kb


# -- encoded datasets --------------------------------------------------------------

@dataclass(frozen=True)
class HeadForm:
    """Meaning of a head predicate over the next day's target value."""

    kind: str  # "up", "down", "above" or "below"
    threshold: float | None = None


@dataclass
class EncodingSpec:
    target: str = "price"
    comparisons: dict = field(default_factory=lambda: {"price": (1, 2, 3), "volume": (1, 2)})
    thresholds: dict = field(default_factory=dict)
    weekdays: bool = False
    sign_heads: bool = True
    head_thresholds: tuple = ()

    def resolve(self, series: MarketSeries) -> "EncodingSpec":
        """Freeze quantile thresholds into numeric cutpoints computed on ``series``."""
        thresholds = {attr: tuple(resolve_thresholds(series.values(attr), cuts))
                      for attr, cuts in self.thresholds.items()}
        heads = tuple(resolve_thresholds(series.values(self.target), self.head_thresholds))
        return replace(self, thresholds=thresholds, head_thresholds=heads)


@dataclass
class EncodedDataset:
    """Training examples (one per day) with target values and the fact store."""

    examples: tuple
    targets: tuple
    target_kind: str
    fact_store: FactStore
    target_attribute: str
    current: tuple
    defined_from: dict
    head_forms: dict
    spec: EncodingSpec | None = None

    def __len__(self):
        return len(self.examples)

    @property
    def days(self) -> tuple:
        return tuple(e[0] for e in self.examples)

    def index_of(self, day) -> int:
        return self.days.index(day)

    def evaluable(self, predicates: Iterable[str]) -> list[int]:
        """Example indices where every named predicate is defined."""
        start = max((self.defined_from.get(p, 0) for p in predicates), default=0)
        return list(range(start, len(self.examples)))


def head_names(target: str) -> dict[str, str]:
    base = f"Next{attr_name(target)}"
    return {"up": base + "Up", "down": base + "Down",
            "above": base + "Above_", "below": base + "Below_"}


def encode(series: MarketSeries, spec: EncodingSpec, with_heads: bool = True) -> EncodedDataset:
    """Relational encoding of ``series``.

    Head facts for day ``t`` use the value at ``t + 1``; the last day has no
    head facts and its target is ``None``.  Pass ``with_heads=False`` to build
    a store that carries no information about the future at all.
    """
    kb = FactStore()
    kb.declare_type(DAY)
    kb.add_constants(DAY, series.dates)
    defined: dict[str, int] = {}
    for attr, lags in spec.comparisons.items():
        lags = [lag for lag in lags if lag < len(series)] if len(series) else []
        if lags:
            defined.update(derive_comparison_predicates(series, attr, lags, kb))
        else:
            for lag in spec.comparisons[attr]:
                name = f"{attr_name(attr)}Up_{lag}"
                kb.declare(name, (DAY,))
                kb.ensure_extensional(name)
                defined[name] = lag
    for attr, cuts in spec.thresholds.items():
        if len(series):
            defined.update(derive_threshold_predicates(series, attr, cuts, kb))
    if spec.weekdays:
        defined.update(derive_weekday_predicates(series, kb))

    target = series.values(spec.target) if len(series) else ()
    names = head_names(spec.target)
    forms: dict[str, HeadForm] = {}
    if spec.sign_heads:
        forms[names["up"]] = HeadForm("up")
        forms[names["down"]] = HeadForm("down")
    cuts = resolve_thresholds(target, spec.head_thresholds) if target else []
    for c in cuts:
        forms[names["above"] + number_token(c)] = HeadForm("above", c)
        forms[names["below"] + number_token(c)] = HeadForm("below", c)
    for name in forms:
        kb.declare(name, (DAY,))
        kb.ensure_extensional(name)

    nexts = tuple(target[i + 1] if i + 1 < len(target) else None for i in range(len(target)))
    if with_heads:
        for row, now, nxt in zip(series.rows, target, nexts):
            if nxt is None:
                continue
            for name, form in forms.items():
                if head_holds(form, now, nxt):
                    kb.add_fact(name, (row.date,))
    kb.freeze()
    return EncodedDataset(
        examples=tuple((d,) for d in series.dates),
        targets=nexts if with_heads else (None,) * len(series),
        target_kind="sign" if spec.sign_heads else "numeric_interval",
        fact_store=kb,
        target_attribute=spec.target,
        current=tuple(target),
        defined_from=defined,
        head_forms=forms,
        spec=spec,
    )


def head_holds(form: HeadForm, now: float, nxt: float) -> bool:
    if form.kind == "up":
        return nxt > now
    if form.kind == "down":
        return nxt < now
    if form.kind == "above":
        return nxt > form.threshold
    if form.kind == "below":
        return nxt < form.threshold
    raise ValueError(f"unknown head form {form.kind!r}")
