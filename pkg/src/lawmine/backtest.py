"""Walk-forward evaluation of sign forecasts and simulated trading."""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from statistics import fmean
from typing import Callable, Sequence

from .encoding import MarketSeries
from .errors import AlignmentError, DataError, InsufficientData, NoDecisions

TRADING_DAYS = 252
SIGNALS = ("up", "down", "abstain")
STRATEGIES = ("long_cash", "long_short")


@dataclass(frozen=True)
class BacktestConfig:
    train_window: int = 400
    test_window: int = 50
    step: int = 50
    strategy: str = "long_cash"
    risk_free_rate: float = 0.03
    transaction_cost: float = 0.0

    def __post_init__(self):
        if min(self.train_window, self.test_window, self.step) < 1:
            raise ValueError("windows and step must be positive")
        if self.step > self.test_window:
            raise ValueError("step must not exceed test_window")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if not 0 <= self.transaction_cost < 1:
            raise ValueError("transaction_cost must lie in [0, 1)")


# -- accuracy --------------------------------------------------------------------

@dataclass(frozen=True)
class Accuracy:
    percent: float
    correct: int
    incorrect: int
    abstain: int


def sign_accuracy(predictions: Sequence[str], actuals: Sequence[str]) -> Accuracy:
    """Percent of correct up/down calls; abstains are left out of the denominator."""
    if len(predictions) != len(actuals):
        raise AlignmentError(f"{len(predictions)} predictions for {len(actuals)} actuals")
    correct = incorrect = abstain = 0
    for p, a in zip(predictions, actuals):
        if p not in SIGNALS or a not in ("up", "down"):
            raise DataError(f"bad signal pair ({p!r}, {a!r})")
        if p == "abstain":
            abstain += 1
        elif p == a:
            correct += 1
        else:
            incorrect += 1
    if correct + incorrect == 0:
        raise NoDecisions("every prediction abstains")
    return Accuracy(100 * correct / (correct + incorrect), correct, incorrect, abstain)


def average_accuracy(percents: Sequence[float]) -> float:
    """Unweighted mean over periods (not pooled over days)."""
    if not percents:
        raise NoDecisions("no periods to average")
    return fmean(percents)


def actual_signs(prices: Sequence[float]) -> list[str]:
    """``up`` when the next price is strictly higher, else ``down``."""
    return ["up" if b > a else "down" for a, b in zip(prices, prices[1:])]


# -- trading ---------------------------------------------------------------------

@dataclass
class TradeLedger:
    records: list = field(default_factory=list)  # (date, signal, position, value)
    initial: float = 1.0

    @property
    def final(self) -> float:
        return self.records[-1][3] if self.records else self.initial

    @property
    def days(self) -> int:
        return max(0, len(self.records) - 1)

    @property
    def annual_gain(self) -> float:
        """Annualized gain in percent of the initial investment."""
        return annualize(self.final / self.initial, self.days)


def annualize(ratio: float, days: int) -> float:
    if days <= 0:
        return 0.0
    return 100 * (ratio ** (TRADING_DAYS / days) - 1)


def risk_free_gain(rate: float) -> float:
    """Percent gain over a year of daily accrual at ``rate / 252``."""
    return 100 * ((1 + rate / TRADING_DAYS) ** TRADING_DAYS - 1)


def buy_and_hold_gain(prices: Sequence[float]) -> float:
    if len(prices) < 2:
        return 0.0
    return annualize(prices[-1] / prices[0], len(prices) - 1)


def _position(signal: str, strategy: str) -> int:
    if signal == "up":
        return 1
    if signal == "down" and strategy == "long_short":
        return -1
    return 0


def simulate_trading(signals: Sequence[str], prices: Sequence[float],
                     config: BacktestConfig = BacktestConfig(), dates: Sequence | None = None,
                     initial: float = 1.0) -> TradeLedger:
    """Trade at each day's close on that day's signal; hold until the next close.

    ``signals[i]`` sets the position over ``prices[i] -> prices[i+1]``.  Cash
    accrues the risk-free rate daily; switching position pays
    ``transaction_cost`` per unit of exposure changed.
    """
    if len(signals) != len(prices) - 1:
        raise AlignmentError(f"{len(signals)} signals need {len(signals) + 1} prices, "
                             f"got {len(prices)}")
    if any(p <= 0 for p in prices):
        raise DataError("prices must be positive")
    if dates is not None and len(dates) != len(prices):
        raise AlignmentError("dates and prices differ in length")
    dates = list(dates) if dates is not None else list(range(len(prices)))
    daily_rf = config.risk_free_rate / TRADING_DAYS
    value, position = initial, 0
    ledger = TradeLedger([(dates[0], None, 0, value)], initial)
    for i, sig in enumerate(signals):
        if sig not in SIGNALS:
            raise DataError(f"unknown signal {sig!r}")
        new = _position(sig, config.strategy)
        if new != position:
            value *= 1 - config.transaction_cost * abs(new - position)
            position = new
        ret = prices[i + 1] / prices[i] - 1
        if position == 1:
            value *= 1 + ret
        elif position == -1:
            value *= 1 - ret
        else:
            value *= 1 + daily_rf
        if value <= 0:
            raise DataError(f"portfolio wiped out on {dates[i + 1]}")
        ledger.records.append((dates[i + 1], sig, position, value))
    return ledger


def random_walk_baseline(prices: Sequence[float], seed: int = 0) -> list[str]:
    """Fair-coin up/down calls, one per price move."""
    rng = random.Random(seed)
    return [rng.choice(("up", "down")) for _ in range(max(0, len(prices) - 1))]


# -- walk-forward ----------------------------------------------------------------

@dataclass
class Fold:
    index: int
    train: tuple        # (start, stop) row indices, stop exclusive
    test: tuple         # outcome rows (start, stop)
    predictions: list
    actuals: list
    report: str = ""


def walk_forward(series: MarketSeries, learner: Callable, config: BacktestConfig,
                 target: str = "price") -> list[Fold]:
    """Fit on each training window, then call the next ``test_window`` moves.

    The move into outcome day ``i`` is forecast at day ``i - 1`` from rows up
    to ``i - 1``; the model never sees a row of its test window when fitted.
    ``learner(train_series)`` must return an object with
    ``predict_signs(series, indices)`` and ``report()``.
    """
    n = len(series)
    if n < config.train_window + config.test_window:
        raise InsufficientData(f"{n} rows, need {config.train_window + config.test_window}")
    prices = series.values(target)
    folds = []
    start = 0
    while start + config.train_window + config.test_window <= n:
        t0 = start + config.train_window
        t1 = t0 + config.test_window
        model = learner(series.slice(start, t0))
        preds = model.predict_signs(series, range(t0 - 1, t1 - 1))
        acts = actual_signs(prices[t0 - 1:t1])
        folds.append(Fold(len(folds), (start, t0), (t0, t1), list(preds), acts, model.report()))
        start += config.step
    return folds


REPORT_HEADER = ("fold", "train_start", "train_end", "test_start", "test_end", "decisions",
                 "abstain_pct", "accuracy_pct", "annual_gain_pct", "buy_hold_pct",
                 "risk_free_pct", "random_walk_accuracy_pct")


def _fmt(x) -> str:
    return "NA" if x is None else f"{x:.4f}"


def backtest_report(series: MarketSeries, folds: Sequence[Fold], config: BacktestConfig,
                    seed: int = 0, target: str = "price") -> str:
    """CSV with one row per fold and a final row of unweighted means."""
    prices = series.values(target)
    dates = series.dates
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    cols = {k: [] for k in ("abstain", "acc", "gain", "bh", "rf", "rw")}
    for f in folds:
        t0, t1 = f.test
        window = prices[t0 - 1:t1]
        try:
            acc = sign_accuracy(f.predictions, f.actuals)
            acc_pct = acc.percent
            decisions = acc.correct + acc.incorrect
        except NoDecisions:
            acc_pct, decisions = None, 0
        abstain = 100 * sum(p == "abstain" for p in f.predictions) / len(f.predictions)
        gain = simulate_trading(f.predictions, window, config).annual_gain
        bh = buy_and_hold_gain(window)
        rf = risk_free_gain(config.risk_free_rate)
        rw = sign_accuracy(random_walk_baseline(window, seed + f.index), f.actuals).percent
        for k, v in zip(cols, (abstain, acc_pct, gain, bh, rf, rw)):
            if v is not None:
                cols[k].append(v)
        s0, s1 = f.train
        w.writerow([f.index, dates[s0], dates[s1 - 1], dates[t0], dates[t1 - 1], decisions,
                    _fmt(abstain), _fmt(acc_pct), _fmt(gain), _fmt(bh), _fmt(rf), _fmt(rw)])
    means = [fmean(v) if v else None for v in cols.values()]
    decisions = sum(1 for f in folds for p in f.predictions if p != "abstain")
    w.writerow(["mean", "", "", "", "", decisions] + [_fmt(m) for m in means])
    return out.getvalue()
