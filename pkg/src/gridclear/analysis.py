"""Diagnostics on top of the clearing engine: strategic bid deviations,
redispatch asymmetry summaries, and price-series statistics.

Bid deviations change the clearing inputs only; every welfare figure is
evaluated at true costs.  Truthful clearing is cost-minimal over the feasible
set, so a deviation that changes dispatch can never raise true welfare.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from gridclear.commitment import RedispatchRecord, UcGenerator, single_interval_schedule
from gridclear.dispatch import (
    ConstraintRegime,
    DispatchResult,
    GeneratorSpec,
    clear_nodal,
    clear_zonal,
)
from gridclear.grid import Network
from gridclear.pricing import form_smp


@dataclass(frozen=True)
class BidDeviation:
    generator_id: str
    scheme: str
    true_ic: float
    offered_ic: float
    q_truthful: float
    q_deviated: float
    price_truthful: float
    price_deviated: float
    profit_truthful: float
    profit_deviated: float
    profit_delta: float
    welfare_delta: float  # deviated true welfare minus truthful; <= 0
    dispatch_truthful: dict[str, float]
    dispatch_deviated: dict[str, float]


@dataclass(frozen=True)
class PriceSeriesStats:
    median: float
    p10: float
    p90: float
    normalized: tuple[float, ...]  # series divided by its arithmetic mean


def _clear_for_scheme(net, gens, scheme, regime):
    if scheme == "nodal":
        r = regime if regime is not None and regime.mode == "nodal" else ConstraintRegime(mode="nodal")
        return clear_nodal(net, gens, r)
    r = regime if regime is not None and regime.mode == "zonal" else ConstraintRegime(mode="zonal")
    return clear_zonal(net, gens, r)


def _unit_price(net, gens, result: DispatchResult, scheme: str, gen_id: str, currency: str) -> float:
    if scheme == "uniform":
        ucwrap = [UcGenerator(spec=g) for g in gens]
        report = form_smp(single_interval_schedule(result, ucwrap), gens, currency=currency)
        return report.prices[0]["system"]
    return result.gen_local_dual[gen_id]


def _true_welfare(net: Network, gens: Sequence[GeneratorSpec], result: DispatchResult) -> float:
    wtp = {b.id: b.wtp for b in net.buses}
    utility = sum(wtp[b] * served for b, served in result.served_mw.items())
    cost = sum(g.ic * result.gen_mw[g.id] for g in gens)
    return utility - cost


def evaluate_bid_deviation(
    net: Network,
    gens: Sequence[GeneratorSpec],
    gen_id: str,
    offered_ic: float,
    *,
    scheme: str = "uniform",
    regime: ConstraintRegime | None = None,
    currency: str = "",
) -> BidDeviation:
    """Re-clear with ``offered_ic`` replacing the unit's true incremental cost
    (clearing only; settlement uses the cleared price, profit and welfare use
    true costs) and compare against the truthful clearing.

    ``scheme`` selects how the unit is settled: ``uniform`` (screened system
    marginal price over the network-constrained schedule), ``zonal`` (zone
    dual) or ``nodal`` (bus dual).
    """
    by_id = {g.id: g for g in gens}
    if gen_id not in by_id:
        raise KeyError(f"unknown generator {gen_id!r}")
    if scheme not in ("uniform", "zonal", "nodal"):
        raise ValueError(f"unknown scheme {scheme!r}")
    true_ic = by_id[gen_id].ic

    truthful = _clear_for_scheme(net, gens, scheme, regime)
    offered_gens = [replace(g, ic=offered_ic) if g.id == gen_id else g for g in gens]
    deviated = _clear_for_scheme(net, offered_gens, scheme, regime)

    price_t = _unit_price(net, gens, truthful, scheme, gen_id, currency)
    price_d = _unit_price(net, offered_gens, deviated, scheme, gen_id, currency)
    q_t = truthful.gen_mw[gen_id]
    q_d = deviated.gen_mw[gen_id]
    profit_t = (price_t - true_ic) * q_t
    profit_d = (price_d - true_ic) * q_d

    welfare_delta = _true_welfare(net, gens, deviated) - _true_welfare(net, gens, truthful)

    return BidDeviation(
        generator_id=gen_id,
        scheme=scheme,
        true_ic=true_ic,
        offered_ic=offered_ic,
        q_truthful=q_t,
        q_deviated=q_d,
        price_truthful=price_t,
        price_deviated=price_d,
        profit_truthful=profit_t,
        profit_deviated=profit_d,
        profit_delta=profit_d - profit_t,
        welfare_delta=welfare_delta,
        dispatch_truthful=dict(truthful.gen_mw),
        dispatch_deviated=dict(deviated.gen_mw),
    )


def redispatch_summary(
    record: RedispatchRecord, zones: Sequence[str] | None = None
) -> tuple[tuple[str, float, float], ...]:
    """Zone-by-zone constrained-on / constrained-off energy table."""
    order = tuple(zones) if zones is not None else tuple(sorted(record.zone_constrained_on))
    return tuple(
        (z, record.zone_constrained_on.get(z, 0.0), record.zone_constrained_off.get(z, 0.0))
        for z in order
    )


def price_stats(series: Sequence[float]) -> PriceSeriesStats:
    """Median, 10th and 90th percentiles (linear interpolation between closest
    ranks) and the mean-normalized series."""
    if len(series) == 0:
        raise ValueError("empty price series")
    arr = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("price series contains non-finite values")
    mean = float(arr.mean())
    if mean == 0.0:
        raise ValueError("cannot normalize a zero-mean series")
    p10, median, p90 = (float(np.percentile(arr, p)) for p in (10, 50, 90))
    normalized = tuple(float(v) for v in arr / mean)
    return PriceSeriesStats(median=median, p10=p10, p90=p90, normalized=normalized)
