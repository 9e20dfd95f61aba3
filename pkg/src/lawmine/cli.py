"""``lawmine`` command line: encode, mine, forecast, backtest, inspect.

Settings come from built-in defaults, then an optional INI file
(``--config``), then command-line flags; later sources win.
"""

from __future__ import annotations

import argparse
import configparser
import re
import sys
from pathlib import Path

from . import __version__
from .backtest import BacktestConfig, backtest_report, walk_forward
from .encoding import EncodingSpec, attr_name, encode, read_csv
from .errors import ConfigError, DataError, LawmineError, LearnError
from .foil import LearnConfig, LearnStats, foil_learn
from .focl import FoclTask, focl_learn
from .knowledge_file import load as load_knowledge
from .mmdr import (MMDR, MMDRConfig, head_form_of, interval_forecast,
                   parse_hypotheses, sign_forecast)
from .syntax import format_rule

COMMANDS = ("encode", "mine", "forecast", "backtest", "inspect")
LEARNERS = ("foil", "focl", "mmdr")

DEFAULTS = {
    "run": {"learner": "mmdr", "alpha": "0.05", "max_body": "3", "seed": "7", "jobs": "1",
            "out": "lawmine-out"},
    "encode": {"target": "price", "comparisons": "price:1,2,3 volume:1,2", "thresholds": "",
               "head_thresholds": "", "weekdays": "no"},
    "learn": {"max_new_vars": "1", "min_clause_pos": "1", "max_clause_len": "6",
              "neg_tolerance": "0", "typing": "yes", "prune": "yes"},
    "mmdr": {"bonferroni": "no", "stability": "yes", "beat_coin": "yes"},
    "backtest": {"train_window": "400", "test_window": "50", "step": "50",
                 "strategy": "long_cash", "risk_free_rate": "0.03", "transaction_cost": "0"},
}

_FLAG_KEYS = {"input": "run", "knowledge": "run", "rules": "run", "out": "run",
              "learner": "run", "alpha": "run", "max_body": "run", "seed": "run", "jobs": "run"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lawmine", description="Relational rule mining for "
                                "daily market series.")
    p.add_argument("--version", action="version", version=f"lawmine {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI file with [run], [encode], [learn], [mmdr], "
                   "[backtest] sections")
    p.add_argument("--input", help="CSV series with a date column")
    p.add_argument("--knowledge", help="knowledge file (types, facts, examples, ...)")
    p.add_argument("--rules", help="hypothesis clauses to use as-is for forecasting")
    p.add_argument("--out", help="output directory")
    p.add_argument("--learner", choices=LEARNERS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--max-body", dest="max_body", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    return p


class Settings:
    def __init__(self, args: argparse.Namespace):
        cp = configparser.ConfigParser()
        cp.read_dict(DEFAULTS)
        if args.config:
            path = Path(args.config)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            try:
                cp.read(path)
            except configparser.Error as exc:
                raise ConfigError(f"bad config file {path}: {exc}") from None
        for key, section in _FLAG_KEYS.items():
            value = getattr(args, key, None)
            if value is not None:
                cp.set(section, key, str(value))
        self.cp = cp

    def get(self, section, key, default=None):
        return self.cp.get(section, key, fallback=default)

    def num(self, section, key, kind=float):
        raw = self.get(section, key)
        try:
            return kind(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid "
                              f"{kind.__name__}") from None

    def flag(self, section, key) -> bool:
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be yes or no") from None

    def path(self, key, required=True) -> Path | None:
        raw = self.get("run", key)
        if not raw:
            if required:
                raise ConfigError(f"--{key} is required for this command")
            return None
        path = Path(raw)
        if not path.exists():
            raise ConfigError(f"{key} path does not exist: {path}")
        return path


def _pairs(text: str) -> dict:
    """``price:1,2 volume:1`` -> ``{"price": ["1", "2"], "volume": ["1"]}``."""
    out = {}
    for item in text.split():
        if ":" not in item:
            raise ConfigError(f"expected attribute:values, got {item!r}")
        attr, vals = item.split(":", 1)
        out[attr] = [v for v in vals.split(",") if v]
    return out


def _threshold(v: str):
    return v if v.startswith("q") else float(v)


def encoding_spec(s: Settings) -> EncodingSpec:
    try:
        comparisons = {a: tuple(int(v) for v in vs)
                       for a, vs in _pairs(s.get("encode", "comparisons")).items()}
        thresholds = {a: tuple(_threshold(v) for v in vs)
                      for a, vs in _pairs(s.get("encode", "thresholds")).items()}
        heads = tuple(_threshold(v) for v in s.get("encode", "head_thresholds").split(",") if v)
    except ValueError as exc:
        raise ConfigError(f"bad [encode] setting: {exc}") from None
    return EncodingSpec(target=s.get("encode", "target"), comparisons=comparisons,
                        thresholds=thresholds, weekdays=s.flag("encode", "weekdays"),
                        head_thresholds=heads)


_UP = re.compile(r"^([A-Z][A-Za-z0-9]*)Up_(\d+)$")
_ABOVE = re.compile(r"^([A-Z][A-Za-z0-9]*)Above_([0-9m.e+]+)$")
_WEEKDAYS = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday"}


def spec_for_rules(rules, attributes, target="price") -> EncodingSpec:
    """The encoding that materializes every predicate the given rules mention."""
    by_name = {attr_name(a): a for a in attributes}
    comparisons: dict = {}
    thresholds: dict = {}
    heads, weekdays, signs = [], False, False
    for rule in rules:
        for clause in rule.clauses:
            form = head_form_of(clause.head.predicate)
            if form.threshold is not None:
                heads.append(form.threshold)
            else:
                signs = True
            for lit in clause.body:
                name = lit.predicate
                if name in _WEEKDAYS:
                    weekdays = True
                elif (m := _UP.match(name)) and m.group(1) in by_name:
                    comparisons.setdefault(by_name[m.group(1)], set()).add(int(m.group(2)))
                elif (m := _ABOVE.match(name)) and m.group(1) in by_name:
                    thresholds.setdefault(by_name[m.group(1)], set()).add(
                        float(m.group(2).replace("m", "-")))
                else:
                    raise ConfigError(f"cannot derive predicate {name} from the input columns")
    return EncodingSpec(target=target,
                        comparisons={a: tuple(sorted(v)) for a, v in comparisons.items()},
                        thresholds={a: tuple(sorted(v)) for a, v in thresholds.items()},
                        weekdays=weekdays, sign_heads=signs, head_thresholds=tuple(heads))


def mmdr_model(s: Settings, spec: EncodingSpec | None = None) -> MMDR:
    cfg = MMDRConfig(alpha=s.num("run", "alpha"), max_body=s.num("run", "max_body", int),
                     bonferroni=s.flag("mmdr", "bonferroni"),
                     stability=s.flag("mmdr", "stability"),
                     beat_coin=s.flag("mmdr", "beat_coin"), jobs=s.num("run", "jobs", int))
    return MMDR(cfg, spec or encoding_spec(s))


def learn_config(s: Settings) -> LearnConfig:
    try:
        return LearnConfig(max_new_vars=s.num("learn", "max_new_vars", int),
                           min_clause_pos=s.num("learn", "min_clause_pos", int),
                           max_clause_len=s.num("learn", "max_clause_len", int),
                           neg_tolerance=s.num("learn", "neg_tolerance"),
                           prune=s.flag("learn", "prune"), jobs=s.num("run", "jobs", int))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _num(x: float) -> str:
    return format(x, ".10g")


# -- commands --------------------------------------------------------------------

def cmd_encode(s: Settings, out: Path) -> str:
    series = read_csv(s.path("input"))
    data = encode(series, encoding_spec(s).resolve(series))
    (out / "facts.tsv").write_text(data.fact_store.dump())
    return f"encoded {len(series)} days into {len(data.fact_store.predicates())} predicates"


def cmd_mine(s: Settings, out: Path) -> str:
    learner = s.get("run", "learner")
    if learner == "mmdr":
        series = read_csv(s.path("input"))
        model = mmdr_model(s).fit(series)
        (out / "rules.tsv").write_text(model.report())
        return (f"{len(model.selected)} law-like rules from {model.n_hypotheses} hypotheses "
                f"({len(series)} days)")
    k = load_knowledge(s.path("knowledge"))
    if k.target is None or not k.pos:
        raise ConfigError("knowledge file needs a [target] and positive [examples]")
    cfg = learn_config(s)
    stats = LearnStats()
    if learner == "foil":
        rule = foil_learn(k.target, k.pos, k.neg, k.kb, cfg, stats=stats)
    else:
        task = FoclTask(k.target, k.pos, k.neg, k.kb, k.initial_rule,
                        typing=s.flag("learn", "typing"))
        rule = focl_learn(task, cfg, stats=stats)
    (out / "rules.txt").write_text(format_rule(rule) + "\n")
    (out / "trace.tsv").write_text("".join(line + "\n" for line in stats.trace))
    (out / "counters.txt").write_text(stats.report())
    uncovered = f", {len(stats.uncovered)} positives uncovered" if stats.uncovered else ""
    return f"{learner}: {len(rule.clauses)} clause(s) for {k.target}{uncovered}\n{rule}"


def cmd_forecast(s: Settings, out: Path) -> str:
    series = read_csv(s.path("input"))
    rules_path = s.path("rules", required=False)
    if rules_path is not None:
        rules = parse_hypotheses(rules_path.read_text())
        spec = spec_for_rules(rules, series.attributes, s.get("encode", "target"))
        data = encode(series, spec, with_heads=False)
        ids = {str(r.clauses[0]): f"H{i}" for i, r in enumerate(rules, 1)}
    else:
        model = mmdr_model(s).fit(series)
        rules = model.selected
        data = model.history_store(series)
        ids = model.rule_ids()
    lines = []
    for i, day in enumerate(data.days):
        target_date = data.days[i + 1] if i + 1 < len(data) else ""
        current = data.current[i]
        sign = sign_forecast(rules, data.fact_store, day)
        fc = interval_forecast(rules, data.fact_store, day, current, target_date or None)
        support = ",".join(ids[str(_clause(r))] for r in fc.supporting_rules) or "-"
        lines.append(f"{day}\t{target_date}\t{sign}\t{_num(fc.lower)}\t{_num(fc.upper)}\t{support}")
    (out / "forecast.tsv").write_text("origin\tdate\tsign\tlower\tupper\tsupporting_rule_ids\n"
                                      + "".join(line + "\n" for line in lines))
    return "\n".join(lines)


def _clause(r):
    return r.clause if hasattr(r, "clause") else r.clauses[0]


def cmd_backtest(s: Settings, out: Path) -> str:
    if s.get("run", "learner") != "mmdr":
        raise ConfigError("backtest supports --learner mmdr only")
    series = read_csv(s.path("input"))
    try:
        cfg = BacktestConfig(train_window=s.num("backtest", "train_window", int),
                             test_window=s.num("backtest", "test_window", int),
                             step=s.num("backtest", "step", int),
                             strategy=s.get("backtest", "strategy"),
                             risk_free_rate=s.num("backtest", "risk_free_rate"),
                             transaction_cost=s.num("backtest", "transaction_cost"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    spec = encoding_spec(s)
    folds = walk_forward(series, lambda train: mmdr_model(s, spec).fit(train), cfg,
                         spec.target)
    report = backtest_report(series, folds, cfg, seed=s.num("run", "seed", int),
                             target=spec.target)
    (out / "backtest.csv").write_text(report)
    (out / "fold_rules.tsv").write_text("".join(
        f"# fold {f.index}\n{f.report}" for f in folds))
    return report.strip().splitlines()[-1]


def cmd_inspect(s: Settings, out: Path | None) -> str:
    lines = []
    k_path = s.path("knowledge", required=False)
    if k_path is not None:
        k = load_knowledge(k_path)
        kb = k.kb
        lines.append("types: " + ", ".join(sorted(kb.types)))
        for pred in kb.predicates():
            lines.append(f"  {kb.signature(pred)}  [{kb.kind(pred)}]"
                         f"{'  ' + str(len(kb.rows(pred))) + ' facts' if pred in kb.extensional else ''}")
        for rule in kb.intensional.values():
            lines.append(format_rule(rule))
        for pred, cons in sorted(kb.constraints.items()):
            lines.extend(f"  constraint {pred} {c.kind}" for c in cons)
        if k.target:
            lines.append(f"target {kb.signature(k.target)}: {len(k.pos)} positive, "
                         f"{len(k.neg)} negative examples")
        if k.initial_rule:
            lines.append("initial rule:\n" + format_rule(k.initial_rule))
    i_path = s.path("input", required=False)
    if i_path is not None:
        series = read_csv(i_path)
        lines.append(f"{i_path}: {len(series)} rows, columns {', '.join(series.attributes)}")
        if len(series):
            lines.append(f"  {series.dates[0]} .. {series.dates[-1]}")
    if not lines:
        raise ConfigError("inspect needs --knowledge or --input")
    return "\n".join(lines)


HANDLERS = {"encode": cmd_encode, "mine": cmd_mine, "forecast": cmd_forecast,
            "backtest": cmd_backtest, "inspect": cmd_inspect}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        s = Settings(args)
        if s.get("run", "learner") not in LEARNERS:
            raise ConfigError(f"unknown learner {s.get('run', 'learner')!r}")
        out = None
        if args.command != "inspect":
            out = Path(s.get("run", "out"))
            out.mkdir(parents=True, exist_ok=True)
        print(HANDLERS[args.command](s, out))
        return 0
    except ConfigError as exc:
        print(f"lawmine: configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"lawmine: data error: {exc}", file=sys.stderr)
        return 3
    except LearnError as exc:
        print(f"lawmine: learning failed: {exc}", file=sys.stderr)
        return 4
    except LawmineError as exc:
        print(f"lawmine: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
