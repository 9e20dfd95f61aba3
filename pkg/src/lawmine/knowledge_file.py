"""Sectioned text format for background knowledge and learning tasks.

Example::

    [types]
    price = ratio
    weekday = cyclic Mon Tue Wed Thu Fri

    [signatures]
    Up(price, price)
    UpDown(price, price, price)

    [computed]
    Q(x, y, w) := y - x < w - y

    [constraints]
    Greater_price all_args_distinct

    [rules]
    Growing(x, y, z) <- Up(x, y) & Up(y, z)

    [facts]
    Up(34, 38)

    [target]
    UpDown

    [examples]
    + (34, 38, 35)
    - (38, 35, 35.5)

    [initial]
    UpDown(x, y, z) <- Up(x, y) & Down(y, z)

Arithmetic in ``[computed]`` runs on decimals built from the shortest
representation of each value, so ``35.1 - 34.0 < 36.2 - 35.1`` is false.
"""

from __future__ import annotations

import ast
import operator
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

from .errors import ConfigError, ParseError
from .kb import FactStore, InterArgConstraint
from .logic import Constant, DataType, Rule, ScaleKind
from .syntax import parse_clause, parse_literal

SECTIONS = ("types", "signatures", "computed", "constraints", "rules", "facts",
            "target", "examples", "initial")

_SIG = re.compile(r"^([A-Za-z_$][A-Za-z0-9_$.\-]*)\s*\(([^)]*)\)$")


@dataclass
class KnowledgeFile:
    kb: FactStore
    target: str | None = None
    pos: list = field(default_factory=list)
    neg: list = field(default_factory=list)
    initial_rule: Rule | None = None


def _sections(text: str, origin: str) -> dict[str, list[tuple[int, str]]]:
    out: dict[str, list] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = re.sub(r"(^|\s)#.*$", "", raw).strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            current = m.group(1).lower()
            if current not in SECTIONS:
                raise ParseError(f"{origin}:{n}: unknown section [{current}]")
            out.setdefault(current, [])
            continue
        if current is None:
            raise ParseError(f"{origin}:{n}: content before the first section")
        out[current].append((n, line))
    return out


def _parse_type(name: str, spec: str) -> DataType:
    parts = spec.split()
    if not parts:
        raise ParseError(f"type {name} needs a scale kind")
    kind, elements = parts[0], parts[1:]
    if kind == "date":
        return DataType(name, ScaleKind.ORDINAL)
    try:
        scale = ScaleKind(kind)
    except ValueError:
        raise ParseError(f"unknown scale kind {kind!r} for type {name}") from None
    return DataType(name, scale, tuple(elements) if elements else None)


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv}
_CMPOPS = {ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt,
           ast.GtE: operator.ge, ast.Eq: operator.eq, ast.NotEq: operator.ne}


def _decimal(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return v
    return Decimal(repr(v))


def compile_test(params: list[str], expression: str):
    """Turn ``y - x < w - y`` into a predicate over ``params``."""
    try:
        tree = ast.parse(expression, mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"bad expression {expression!r}: {exc.msg}") from None

    def ev(node, env):
        if isinstance(node, ast.BoolOp):
            vals = (ev(v, env) for v in node.values)
            return all(vals) if isinstance(node.op, ast.And) else any(vals)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return not ev(node.operand, env)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand, env)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.Compare):
            left = ev(node.left, env)
            for op, comp in zip(node.ops, node.comparators):
                right = ev(comp, env)
                if not _CMPOPS[type(op)](left, right):
                    return False
                left = right
            return True
        if isinstance(node, ast.Name) and node.id in env:
            return env[node.id]
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return _decimal(node.value)
        raise ParseError(f"unsupported construct in {expression!r}")

    for node in ast.walk(tree):
        if isinstance(node, ast.Compare) and any(type(o) not in _CMPOPS for o in node.ops):
            raise ParseError(f"unsupported comparison in {expression!r}")
        if isinstance(node, ast.Name) and node.id not in params:
            raise ParseError(f"unknown name {node.id!r} in {expression!r}")

    def test(*args):
        try:
            return bool(ev(tree, {p: _decimal(a) for p, a in zip(params, args)}))
        except TypeError:
            return False

    return test


def loads(text: str, origin: str = "<knowledge>") -> KnowledgeFile:
    sec = _sections(text, origin)
    kb = FactStore()

    def fail(n, msg):
        raise ParseError(f"{origin}:{n}: {msg}")

    for n, line in sec.get("types", []):
        if "=" not in line:
            fail(n, "expected 'name = kind [elements]'")
        name, spec = (s.strip() for s in line.split("=", 1))
        kb.declare_type(_parse_type(name, spec))

    pending_computed = {}
    for n, line in sec.get("signatures", []):
        m = _SIG.match(line)
        if not m:
            fail(n, f"bad signature {line!r}")
        types = [t.strip() for t in m.group(2).split(",") if t.strip()]
        if not types:
            fail(n, "signature needs at least one argument type")
        for t in types:
            if t not in kb.types:
                fail(n, f"undeclared type {t!r}")
        pending_computed[m.group(1)] = types
        kb.declare(m.group(1), types)

    for n, line in sec.get("computed", []):
        if ":=" not in line:
            fail(n, "expected 'P(x, y) := expression'")
        head, expr = (s.strip() for s in line.split(":=", 1))
        m = _SIG.match(head)
        if not m:
            fail(n, f"bad computed head {head!r}")
        pred = m.group(1)
        params = [p.strip() for p in m.group(2).split(",")]
        if pred not in pending_computed:
            fail(n, f"computed predicate {pred} has no signature")
        if len(params) != len(pending_computed[pred]):
            fail(n, f"{pred} has arity {len(pending_computed[pred])}")
        del kb.signatures[pred]
        kb.add_computed(pred, pending_computed[pred], compile_test(params, expr))

    for n, line in sec.get("constraints", []):
        parts = line.split()
        if len(parts) < 2:
            fail(n, "expected 'Predicate kind [slots ...]'")
        kind = parts[1]
        if kind == "all_args_distinct_forbidden":
            kind = "all_args_distinct"
        patterns = [tuple(int(i) for i in g.split(",")) for g in parts[2:]]
        kb.add_constraint(InterArgConstraint(parts[0], kind, tuple(patterns)))

    sigs = kb.signatures
    for n, line in sec.get("rules", []):
        clause = parse_clause(line, sigs)
        kb.add_rule(Rule((clause,)))

    for n, line in sec.get("facts", []):
        lit = parse_literal(line)
        if lit.negated or not all(isinstance(a, Constant) for a in lit.args):
            fail(n, f"facts must be ground positive atoms: {line!r}")
        kb.add_fact(lit.predicate, [a.value for a in lit.args])
    for pred in sigs:
        if pred not in kb.computed and pred not in kb.intensional:
            kb.ensure_extensional(pred)

    out = KnowledgeFile(kb)
    targets = sec.get("target", [])
    if len(targets) > 1:
        fail(targets[1][0], "only one target allowed")
    if targets:
        out.target = targets[0][1]
        kb.signature(out.target)
        kb.extensional.pop(out.target, None)

    for n, line in sec.get("examples", []):
        if out.target is None:
            fail(n, "examples need a [target]")
        sign, rest = line[0], line[1:].strip()
        if sign not in "+-":
            fail(n, "examples start with + or -")
        lit = parse_literal(f"E{rest}")
        values = tuple(a.value for a in lit.args)
        (out.pos if sign == "+" else out.neg).append(values)
        sig = kb.signature(out.target)
        for v, t in zip(values, sig.arg_types):
            kb.add_constants(t, [v])

    initial = [parse_clause(line, sigs) for _, line in sec.get("initial", [])]
    if initial:
        out.initial_rule = Rule(tuple(initial))
        kb.check_rule(out.initial_rule)
    return out


def load(path) -> KnowledgeFile:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"knowledge file not found: {path}")
    return loads(path.read_text(), str(path))
