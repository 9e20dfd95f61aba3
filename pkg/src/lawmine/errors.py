"""Exception hierarchy.

Errors fall into three families that the command line maps onto exit codes:
configuration problems, data problems and learning failures.
"""


class LawmineError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(LawmineError):
    pass


class DataError(LawmineError):
    pass


class LearnError(LawmineError):
    pass


# -- logic / evaluation ------------------------------------------------------

class UnknownPredicate(DataError):
    pass


class TypeMismatch(DataError):
    pass


class DepthExceeded(DataError):
    pass


class NotCyclic(DataError):
    pass


class UnknownElement(DataError):
    pass


class ParseError(DataError):
    pass


# -- knowledge base / encoding -------------------------------------------------

class NonMonotoneDates(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class LagTooLarge(DataError):
    pass


class EmptySeries(DataError):
    pass


class MissingAttribute(DataError):
    pass


class SignatureMismatch(DataError):
    pass


# -- learners ------------------------------------------------------------------

class NoPositives(LearnError):
    pass


class NoUsefulLiteral(LearnError):
    pass


class Unlearnable(LearnError):
    def __init__(self, message, uncovered=()):
        super().__init__(message)
        self.uncovered = tuple(uncovered)


class TimeBudgetExceeded(LearnError):
    pass


class NotIntensional(LearnError):
    pass


class BodyNeverSatisfied(LearnError):
    pass


class EmptyIntersection(LearnError):
    def __init__(self, message, rules=()):
        super().__init__(message)
        self.rules = tuple(rules)


# -- evaluation / backtest -----------------------------------------------------

class NoDecisions(DataError):
    pass


class AlignmentError(DataError):
    pass


class InsufficientData(DataError):
    pass
