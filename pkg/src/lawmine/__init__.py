"""Relational rule mining for daily market series.

FOIL and FOCL learn Horn clauses from examples and background knowledge;
MMDR mines statistically significant day rules and turns them into sign and
interval forecasts, evaluated walk-forward against simple baselines.
"""

__version__ = "0.1.0"

from .backtest import (BacktestConfig, TradeLedger, average_accuracy, random_walk_baseline,
                       sign_accuracy, simulate_trading, walk_forward)
from .encoding import EncodingSpec, MarketSeries, encode, ingest_series, read_csv
from .evaluation import clause_covers, evaluate_literal, rule_covers
from .foil import GainState, LearnConfig, LearnStats, foil_learn, information_gain
from .focl import FoclTask, filter_candidates, focl_learn, operationalize, refine_initial_rule
from .kb import FactStore, InterArgConstraint, TypedSignature
from .logic import Constant, DataType, HornClause, Literal, Rule, ScaleKind, Variable
from .mmdr import (MMDR, HypothesisGrammar, IntervalForecast, ScoredRule,
                   enumerate_hypotheses, interval_forecast, score_rule, select_lawlike,
                   sign_forecast)
from .significance import fisher_p_value
from .syntax import parse_clause, parse_rule

__all__ = [
    "BacktestConfig", "TradeLedger", "average_accuracy", "random_walk_baseline",
    "sign_accuracy", "simulate_trading", "walk_forward", "EncodingSpec", "MarketSeries",
    "encode", "ingest_series", "read_csv", "clause_covers", "evaluate_literal", "rule_covers",
    "GainState", "LearnConfig", "LearnStats", "foil_learn", "information_gain", "FoclTask",
    "filter_candidates", "focl_learn", "operationalize", "refine_initial_rule", "FactStore",
    "InterArgConstraint", "TypedSignature", "Constant", "DataType", "HornClause", "Literal",
    "Rule", "ScaleKind", "Variable", "MMDR", "HypothesisGrammar", "IntervalForecast",
    "ScoredRule", "enumerate_hypotheses", "interval_forecast", "score_rule", "select_lawlike",
    "sign_forecast", "fisher_p_value", "parse_clause", "parse_rule",
]
