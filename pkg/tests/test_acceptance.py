"""Acceptance criteria 1-10.

Each test records a PASS/FAIL line (shown in the terminal summary) and then
asserts it.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import random
import time
from fractions import Fraction
from math import comb

import mpmath

from lawmine import fixtures
from lawmine.backtest import (BacktestConfig, average_accuracy, buy_and_hold_gain,
                              risk_free_gain, sign_accuracy, simulate_trading, walk_forward)
from lawmine.cli import run
from lawmine.encoding import EncodingSpec, encode, read_csv, write_csv
from lawmine.evaluation import clause_covers, rule_covers
from lawmine.focl import FoclTask, focl_learn
from lawmine.foil import GainState, LearnStats, foil_learn, information_gain
from lawmine.knowledge_file import load
from lawmine.mmdr import MMDR, MMDRConfig, interval_forecast, parse_hypotheses
from lawmine.significance import fisher_p_value, fisher_tail
from lawmine.synthetic import noise_series, planted_series
from lawmine.syntax import parse_clause

from oracles import ToyKB, brute_covers, random_clause, random_example


def test_1_updown_fidelity(verdict):
    k = load(fixtures.path("updown.kb"))
    start = time.perf_counter()
    rule = foil_learn(k.target, k.pos, k.neg, k.kb)
    elapsed = time.perf_counter() - start
    # the intended clause, as a coverage oracle
    intended = parse_clause("UpDown(x, y, z) <- Up(x, y) & Down(y, z)", k.kb.signatures)
    learned = [rule_covers(rule, e, k.kb) for e in k.pos + k.neg]
    wanted = [clause_covers(intended, e, k.kb) for e in k.pos + k.neg]
    ok = learned == wanted == [True] * len(k.pos) + [False] * len(k.neg) and elapsed < 1
    assert verdict(1, ok, f"{rule} covers {learned} (want {wanted}) in {elapsed:.3f}s")


def test_2_interval_fidelity(verdict):
    start = time.perf_counter()
    series = read_csv(fixtures.path("four_days.csv"))
    spec = EncodingSpec(comparisons={"price": (1,), "volume": (1,)},
                        thresholds={"price": (60,), "volume": (900000,)})
    data = encode(series, spec, with_heads=False)
    rules = parse_hypotheses(fixtures.path("four_days_rules.txt").read_text())
    day = series.dates[2]
    fc = interval_forecast(rules, data.fact_store, day, data.current[2], series.dates[3])
    elapsed = time.perf_counter() - start
    ok = (fc.lower, fc.upper) == (54.6, 60.0) and elapsed < 1
    assert verdict(2, ok, f"forecast for {series.dates[3]} is ({fc.lower}, {fc.upper}) "
                          f"in {elapsed:.3f}s")


def test_3_gain_oracle(verdict):
    rng = random.Random(3)
    worst, n = 0.0, 2000
    for _ in range(n):
        P0, N0 = rng.randint(1, 10 ** 4), rng.randint(0, 10 ** 4)
        P1, N1 = rng.randint(1, 10 ** 5), rng.randint(0, 10 ** 5)
        T = rng.randint(0, P0)
        with mpmath.workdps(60):
            want = T * (mpmath.log(mpmath.mpf(P1) / (P1 + N1), 2)
                        - mpmath.log(mpmath.mpf(P0) / (P0 + N0), 2))
        got = information_gain(GainState(P0, N0, P1, N1, T))
        if want != 0:
            worst = max(worst, float(abs((got - want) / want)))
        elif got != 0:
            worst = math.inf
    degenerate = information_gain(GainState(5, 5, 0, 3, 0))
    ok = worst <= 1e-12 and degenerate == -math.inf
    assert verdict(3, ok, f"{n} states, max relative error {worst:.2e}, P1=0 -> {degenerate}")


def test_4_coverage_oracle(verdict):
    disagreements, checks = 0, 0
    for seed in range(200):
        rng = random.Random(seed)
        toy = ToyKB(rng, max_constants=50, max_predicates=3)
        clause = random_clause(rng, toy)
        for _ in range(5):
            ex = random_example(rng, clause, toy)
            checks += 1
            disagreements += clause_covers(clause, ex, toy.kb) != brute_covers(clause, ex, toy)
    assert verdict(4, disagreements == 0,
                   f"200 kbs, {checks} coverage checks, {disagreements} disagreements")


def _upper_tails(n, row, col):
    """P(A >= a) for every a, summing pmf terms from the top down."""
    lo, hi = max(0, row + col - n), min(row, col)
    total = comb(n, col)
    tails, acc = {}, 0
    for a in range(hi, lo - 1, -1):
        acc += comb(row, a) * comb(n - row, col - a)
        tails[a] = Fraction(acc, total)
    return tails


def test_5_fisher_oracle(verdict):
    worst, tables = 0.0, 0
    for n in range(1, 61):
        for row in range(n + 1):
            for col in range(n + 1):
                tails = _upper_tails(n, row, col)
                for a, want in tails.items():
                    b, c = row - a, col - a
                    d = n - row - c
                    tables += 1
                    worst = max(worst, abs(fisher_p_value((a, b, c, d)) - float(want)))
    spots = (fisher_tail((5, 0, 0, 5)) == Fraction(1, 252),
             fisher_tail((1, 1, 1, 1)) == Fraction(5, 6))
    ok = worst <= 1e-12 and all(spots)
    assert verdict(5, ok, f"{tables} tables, max abs error {worst:.2e}, spot values {spots}")


PLANTED = frozenset({("PriceUp_1", False), ("VolumeUp_1", False)})


def _planted_trial(seed):
    models = []

    def learner(train):
        m = MMDR(MMDRConfig(alpha=0.05, bonferroni=True)).fit(train)
        models.append(m)
        return m

    start = time.perf_counter()
    folds = walk_forward(planted_series(600, seed=seed), learner, BacktestConfig(400, 50, 50))
    elapsed = time.perf_counter() - start
    found = all(any(s.head == "NextPriceUp" and s.body == PLANTED for s in m.selected)
                for m in models)
    acc = average_accuracy([sign_accuracy(f.predictions, f.actuals).percent for f in folds])
    return found, acc, elapsed, sum(len(f.predictions) for f in folds)


def test_6_planted_recovery(verdict):
    passed, notes = 0, []
    for seed in range(10):
        found, acc, elapsed, days = _planted_trial(seed)
        good = found and acc >= 80 and elapsed < 60
        passed += good
        notes.append(f"s{seed}:{'ok' if good else 'miss'}({acc:.1f}%,{elapsed:.1f}s)")
    assert days == 200
    assert verdict(6, passed >= 9, f"{passed}/10 seeds; " + " ".join(notes))


def test_7_typing_value(verdict):
    k = load(fixtures.path("accelerated_up.kb"))
    runs = {}
    for typing in (True, False):
        stats = LearnStats()
        rule = focl_learn(FoclTask(k.target, k.pos, k.neg, k.kb, k.initial_rule,
                                   typing=typing), stats=stats)
        counters = dict(line.split("\t") for line in stats.report().splitlines())
        runs[typing] = (str(rule), int(counters["gain_evaluations"]))
    ok = runs[True][0] == runs[False][0] and runs[True][1] < runs[False][1]
    assert verdict(7, ok, f"gain_evaluations typed {runs[True][1]} vs untyped "
                          f"{runs[False][1]}; same rule: {runs[True][0] == runs[False][0]}")


def test_8_noise_guardrail(verdict):
    fractions = []
    for seed in range(10):
        model = MMDR(MMDRConfig(alpha=0.05)).fit(noise_series(600, seed=seed))
        fractions.append(model.significant_fraction())
    ok = max(fractions) <= 0.10
    assert verdict(8, ok, "significant fractions " + " ".join(f"{f:.3f}" for f in fractions))


def test_9_backtest_identities(verdict):
    rng = random.Random(9)
    cfg = BacktestConfig(transaction_cost=0.0)
    prices = [100 * math.exp(sum(rng.gauss(0, 0.01) for _ in range(i))) for i in range(253)]
    held = simulate_trading(["up"] * 252, prices, cfg).annual_gain
    bh = buy_and_hold_gain(prices)
    rf = round(risk_free_gain(0.03), 2)
    violations = 0
    for _ in range(100):
        p = [100.0]
        for _ in range(49):
            p.append(p[-1] * (1 + rng.gauss(0, 0.02)))
        signals = ["up" if b > a else "down" for a, b in zip(p, p[1:])]
        violations += simulate_trading(signals, p, cfg).annual_gain < buy_and_hold_gain(p)
    ok = math.isclose(held, bh, rel_tol=1e-12, abs_tol=1e-12) and rf == 3.05 and violations == 0
    assert verdict(9, ok, f"all-up {held:.10f} vs hold {bh:.10f}; risk-free {rf:.2f}; "
                          f"foresight violations {violations}/100")


def test_10_determinism(verdict, tmp_path):
    csv_path = tmp_path / "planted.csv"
    write_csv(planted_series(550, seed=10), csv_path)
    commands = {
        "mine-mmdr": ["mine", "--input", str(csv_path), "--seed", "7"],
        "mine-foil": ["mine", "--learner", "foil", "--knowledge",
                      str(fixtures.path("updown.kb")), "--seed", "7"],
        "backtest": ["backtest", "--input", str(csv_path), "--seed", "7"],
    }
    same = {}
    for name, argv in commands.items():
        outputs = []
        for i, jobs in enumerate(("1", "1", "4")):
            out = tmp_path / f"{name}-{i}"
            assert run(argv + ["--jobs", jobs, "--out", str(out)]) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        same[name] = outputs[0] == outputs[1] == outputs[2] and bool(outputs[0])
    assert verdict(10, all(same.values()), f"byte-identical across runs and --jobs 1/4: {same}")
