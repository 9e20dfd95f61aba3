"""One-sided Fisher exact test on 2x2 contingency tables (exact rationals)."""

from __future__ import annotations

from fractions import Fraction
from math import comb


def _check(table):
    a, b, c, d = table
    if min(table) < 0 or any(int(x) != x for x in table):
        raise ValueError(f"counts must be non-negative integers, got {table}")
    if a + b + c + d == 0:
        raise ValueError("empty contingency table")
    return int(a), int(b), int(c), int(d)


def fisher_tail(table, alternative: str = "greater") -> Fraction:
    """Exact tail probability of the hypergeometric law with the table's margins.

    ``table`` is ``(a, b, c, d)`` laid out as::

                head   not head
        body      a        b
        no body   c        d

    ``"greater"`` gives P(A >= a) (positive association), ``"less"`` gives
    P(A <= a).
    """
    a, b, c, d = _check(table)
    row, col, n = a + b, a + c, a + b + c + d
    lo, hi = max(0, row + col - n), min(row, col)
    if alternative == "greater":
        xs = range(a, hi + 1)
    elif alternative == "less":
        xs = range(lo, a + 1)
    else:
        raise ValueError(f"alternative must be 'greater' or 'less', got {alternative!r}")
    num = sum(comb(col, x) * comb(n - col, row - x) for x in xs)
    return Fraction(num, comb(n, row))


def fisher_p_value(table, alternative: str = "greater") -> float:
    return float(fisher_tail(table, alternative))


def binomial_tail(successes: int, trials: int, p: Fraction = Fraction(1, 2)) -> Fraction:
    """Exact P(X >= successes) for X ~ Binomial(trials, p)."""
    if not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    p = Fraction(p)
    q = 1 - p
    return sum((comb(trials, k) * p ** k * q ** (trials - k)
                for k in range(successes, trials + 1)), Fraction(0))


def bonferroni(alpha: float, m: int) -> float:
    return alpha / max(1, m)
