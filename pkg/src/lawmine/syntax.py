"""Textual clause format.

One clause per line::

    UpDown(x, y, z) <- Up(x, y) & Down(y, z)
    Target(t) <- PriceUp_1(t) & !VolumeUp_1(t)
    Always(x) <- true

Identifiers starting with a lowercase letter or underscore are variables;
numbers, ISO dates, double-quoted strings and capitalised bare words are
constants.  ``format_clause(parse_clause(s)) == s`` for text in canonical
form (the form produced by ``str``).
"""

from __future__ import annotations

import datetime as _dt
import re
from typing import Iterable, Mapping

from .errors import ParseError, SignatureMismatch
from .logic import ANY, Constant, DataType, HornClause, Literal, Rule, Variable

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow><-)
  | (?P<date>\d{4}-\d{2}-\d{2})
  | (?P<number>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<name>[A-Za-z_$][A-Za-z0-9_$.\-]*)
  | (?P<punct>[()&,!])
""", re.VERBOSE)


def _tokens(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group()))
    return out


class _Parser:
    def __init__(self, text: str, signatures: Mapping | None):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0
        self.signatures = signatures or {}
        self.var_types: dict[str, DataType] = {}

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            raise ParseError(f"expected {want} at token {self.i} in {self.text!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def literal(self) -> Literal:
        negated = False
        if self.peek() == ("punct", "!"):
            self.take()
            negated = True
        _, name = self.take("name")
        self.take("punct", "(")
        raw = [self.arg()]
        while self.peek() == ("punct", ","):
            self.take()
            raw.append(self.arg())
        self.take("punct", ")")
        sig = self.signatures.get(name)
        if sig is not None and sig.arity != len(raw):
            raise SignatureMismatch(f"{name} has arity {sig.arity}, used with {len(raw)}")
        args = []
        for slot, (kind, value) in enumerate(raw):
            t = sig.arg_types[slot] if sig is not None else ANY
            if kind == "var":
                known = self.var_types.get(value)
                if known is None or known.is_any:
                    self.var_types[value] = t if not t.is_any or known is None else known
                elif not t.is_any and known.name != t.name:
                    raise SignatureMismatch(
                        f"variable {value} used as {known.name} and {t.name} in {self.text!r}")
                args.append(value)
            else:
                args.append(Constant(value, t))
        return Literal(name, tuple(args), negated)

    def arg(self):
        kind, text = self.take()
        if kind == "number":
            num = float(text)
            return ("const", int(num) if re.fullmatch(r"[-+]?\d+", text) else num)
        if kind == "date":
            return ("const", _dt.date.fromisoformat(text))
        if kind == "string":
            return ("const", re.sub(r"\\(.)", r"\1", text[1:-1]))
        if kind == "name":
            if text[0].islower() or text[0] == "_":
                return ("var", text)
            return ("const", text)
        raise ParseError(f"bad argument {text!r} in {self.text!r}")

    def finish(self, lit: Literal) -> Literal:
        args = tuple(Variable(a, self.var_types[a]) if isinstance(a, str) else a
                     for a in lit.args)
        return Literal(lit.predicate, args, lit.negated)

    def clause(self) -> HornClause:
        head = self.literal()
        body = []
        if self.peek()[0] is not None:
            self.take("arrow")
            if self.peek() == ("name", "true"):
                self.take()
            else:
                body.append(self.literal())
                while self.peek() == ("punct", "&"):
                    self.take()
                    body.append(self.literal())
        if self.peek()[0] is not None:
            raise ParseError(f"trailing input in {self.text!r}")
        return HornClause(self.finish(head), tuple(self.finish(b) for b in body))


def parse_literal(text: str, signatures: Mapping | None = None) -> Literal:
    p = _Parser(text, signatures)
    lit = p.literal()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in {text!r}")
    return p.finish(lit)


def parse_clause(text: str, signatures: Mapping | None = None) -> HornClause:
    """Parse one clause; variable types come from ``signatures`` when given."""
    return _Parser(text, signatures).clause()


def parse_rule(lines: str | Iterable[str], signatures: Mapping | None = None) -> Rule:
    if isinstance(lines, str):
        lines = lines.splitlines()
    clauses = [parse_clause(line, signatures) for line in _content_lines(lines)]
    if not clauses:
        raise ParseError("no clauses given")
    return Rule(tuple(clauses))


def parse_rules(lines: str | Iterable[str], signatures: Mapping | None = None) -> list[Rule]:
    """Parse clauses and group consecutive clauses with the same head into rules."""
    if isinstance(lines, str):
        lines = lines.splitlines()
    grouped: dict[tuple, list[HornClause]] = {}
    for line in _content_lines(lines):
        c = parse_clause(line, signatures)
        grouped.setdefault((c.head.predicate, c.head.arity), []).append(c)
    return [Rule(tuple(cs)) for cs in grouped.values()]


def _content_lines(lines: Iterable[str]):
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def format_clause(clause: HornClause) -> str:
    return str(clause)


def format_rule(rule: Rule) -> str:
    return "\n".join(str(c) for c in rule.clauses)
