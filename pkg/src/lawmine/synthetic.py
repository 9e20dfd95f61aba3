"""Synthetic daily series with a known generating rule."""

from __future__ import annotations

import datetime as _dt

import numpy as np

from .encoding import MarketSeries, Row, default_schema, weekday_of


def business_days(start: _dt.date, n: int) -> list[_dt.date]:
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += _dt.timedelta(days=1)
    return out


def _series(dates, prices, volumes) -> MarketSeries:
    rows = [Row(d, {"price": float(p), "volume": float(v)}, weekday_of(d))
            for d, p, v in zip(dates, prices, volumes)]
    return MarketSeries(rows, default_schema(["price", "volume"]))


def _step(rng, price, up: bool) -> float:
    size = 0.002 + abs(rng.normal(0, 0.01))
    return price * (1 + size) if up else price * (1 - size)


def planted_series(n: int = 600, seed: int = 0, p_body: float = 0.9, p_base: float = 0.5,
                   start: _dt.date = _dt.date(2000, 1, 3)) -> MarketSeries:
    """Next-day up with probability ``p_body`` when PriceUp_1 and VolumeUp_1 hold, else ``p_base``.

    Volumes are independent log-normal draws.
    """
    rng = np.random.default_rng(seed)
    volumes = np.round(rng.lognormal(13, 0.3, n))
    prices = [100.0]
    for t in range(n - 1):
        body = t >= 1 and prices[t] > prices[t - 1] and volumes[t] > volumes[t - 1]
        prices.append(_step(rng, prices[t], rng.random() < (p_body if body else p_base)))
    return _series(business_days(start, n), prices, volumes)


def noise_series(n: int = 600, seed: int = 0,
                 start: _dt.date = _dt.date(2000, 1, 3)) -> MarketSeries:
    """Independent fair-coin moves: the next move is unrelated to any past fact."""
    rng = np.random.default_rng(seed)
    volumes = np.round(rng.lognormal(13, 0.3, n))
    prices = [100.0]
    for t in range(n - 1):
        prices.append(_step(rng, prices[t], rng.random() < 0.5))
    return _series(business_days(start, n), prices, volumes)
