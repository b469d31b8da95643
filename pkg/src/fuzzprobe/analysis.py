"""Hedge-exponent fitting, ordering fractions, and cross-condition RMSE.

The central question: does the entailment curve for a stronger category
(*hot*) behave like a concentration (pointwise power > 1) of the curve for a
weaker one (*warm*)? `fit_hedge_exponent` answers it by exhaustive search
over an exponent grid, minimizing RMSE between the target curve and the
powered base curve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DataError
from .scoring import ScoredPair
from .smoothing import EntailmentCurve
from .stimuli import Unit

__all__ = [
    "HedgeFitResult",
    "AnalysisReport",
    "rmse",
    "default_exponent_grid",
    "fit_hedge_exponent",
    "ordering_fraction",
    "pairwise_ordering_fraction",
    "cross_condition_rmse",
    "pooled_curve",
    "build_report",
]


def rmse(a: Sequence[float], b: Sequence[float]) -> float:
    """Root mean squared difference of two equal-length sequences."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"rmse needs two equal-length vectors, got {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("rmse is undefined for empty vectors")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def default_exponent_grid() -> np.ndarray:
    """100 linearly spaced exponents on [1, 8] inclusive (step 7/99)."""
    return np.linspace(1.0, 8.0, 100)


@dataclass(frozen=True)
class HedgeFitResult:
    """Best exponent relating target ~ base**exponent, plus the full search."""

    base_category: str
    target_category: str
    lambda_star: float
    rmse_at_star: float
    grid: tuple[tuple[float, float], ...]

    def __post_init__(self):
        lams = [lam for lam, _ in self.grid]
        errs = [err for _, err in self.grid]
        if not (min(lams) <= self.lambda_star <= max(lams)):
            raise ValueError("lambda_star must lie inside the search grid")
        if self.rmse_at_star != min(errs):
            raise ValueError("rmse_at_star must be the minimum over the grid")


def _curve_values(curve: EntailmentCurve, values_from: str) -> np.ndarray:
    if values_from == "raw":
        return curve.values
    if values_from == "smoothed":
        smoothed = curve.smoothed_values
        if smoothed is None:
            raise ValueError(f"curve {curve.category!r} has no smoothed values")
        return smoothed
    if values_from == "auto":
        return curve.best_values()
    raise ValueError(f"unknown values_from mode {values_from!r}")


def _check_aligned(base: EntailmentCurve, target: EntailmentCurve):
    if [t for t, _ in base.samples] != [t for t, _ in target.samples]:
        raise ValueError(
            "curves must share an identical temperature grid "
            f"({base.category!r} vs {target.category!r})"
        )


def fit_hedge_exponent(
    base: EntailmentCurve,
    target: EntailmentCurve,
    grid: Sequence[float] | None = None,
    values_from: str = "auto",
) -> HedgeFitResult:
    """Exhaustively search the exponent grid for argmin RMSE(target, base**lam).

    Smoothed values are used when both curves carry them ("auto"); ties in
    the argmin are broken towards the smaller exponent. The full (exponent,
    rmse) grid is kept in the result so the search is auditable.
    """
    _check_aligned(base, target)
    if values_from == "auto" and (base.smoothed is None or target.smoothed is None):
        values_from = "raw"
    base_values = _curve_values(base, values_from)
    target_values = _curve_values(target, values_from)
    grid_arr = default_exponent_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid_arr.size == 0:
        raise ValueError("exponent grid must be non-empty")
    errors = np.array([rmse(target_values, base_values**lam) for lam in grid_arr])
    best = errors.min()
    lambda_star = float(grid_arr[errors == best].min())
    return HedgeFitResult(
        base_category=base.category,
        target_category=target.category,
        lambda_star=lambda_star,
        rmse_at_star=float(best),
        grid=tuple(zip(grid_arr.tolist(), errors.tolist())),
    )


def ordering_fraction(
    base: EntailmentCurve, target: EntailmentCurve, values_from: str = "raw"
) -> float:
    """Fraction of aligned samples where the base value strictly exceeds the
    target's. Defaults to raw values even when smoothed ones exist (the
    statistic is a per-sample count, not a fitted-curve property); pass
    values_from="smoothed" to compare fitted curves instead."""
    _check_aligned(base, target)
    base_values = _curve_values(base, values_from)
    target_values = _curve_values(target, values_from)
    return float(np.mean(base_values > target_values))


def pairwise_ordering_fraction(
    scored: Iterable[ScoredPair],
    unit: Unit,
    base_category: str = "warm",
    target_category: str = "hot",
) -> float:
    """Per-pair ordering statistic across all locations of one unit.

    Pairs are aligned by (temperature, location); the fraction counts strict
    base > target among aligned raw entailment scores.
    """
    base_scores: dict[tuple, float] = {}
    target_scores: dict[tuple, float] = {}
    for item in scored:
        pair = item.pair
        if pair.unit != unit:
            continue
        key = (pair.temperature, pair.location)
        if pair.category == base_category:
            base_scores[key] = item.scores.entailment
        elif pair.category == target_category:
            target_scores[key] = item.scores.entailment
    keys = sorted(base_scores.keys() & target_scores.keys())
    if not keys:
        raise ValueError(
            f"no aligned ({base_category!r}, {target_category!r}) scores for unit {unit.value!r}"
        )
    base_arr = np.array([base_scores[k] for k in keys])
    target_arr = np.array([target_scores[k] for k in keys])
    return float(np.mean(base_arr > target_arr))


def cross_condition_rmse(
    a: Iterable[ScoredPair], b: Iterable[ScoredPair]
) -> float:
    """RMSE between two unit conditions over their shared stimuli.

    Scores are paired by identical (temperature numeral, location, category),
    so comparing against Celsius automatically restricts to the overlapping
    temperature range.
    """

    def index(scored):
        out = {}
        for item in scored:
            pair = item.pair
            out[(pair.temperature, pair.location, pair.category)] = item.scores.entailment
        return out

    index_a = index(a)
    index_b = index(b)
    keys = sorted(index_a.keys() & index_b.keys())
    if not keys:
        raise ValueError("conditions share no (temperature, location, category) stimuli")
    return rmse([index_a[k] for k in keys], [index_b[k] for k in keys])


@dataclass(frozen=True)
class AnalysisReport:
    """Per-unit hedge fits and ordering fractions, plus cross-condition RMSE."""

    hedge_fits: Mapping[str, HedgeFitResult]
    ordering_fractions: Mapping[str, float]
    cross_condition: Mapping[str, float]
    fit_mode: str = "smoothed"
    ordering_mode: str = "raw"

    def __post_init__(self):
        for unit, fraction in self.ordering_fractions.items():
            if not (0.0 <= fraction <= 1.0):
                raise ValueError(f"ordering fraction for {unit!r} outside [0, 1]")


def build_report(
    curves: Sequence[EntailmentCurve],
    scored: Sequence[ScoredPair],
    base_category: str = "warm",
    target_category: str = "hot",
    grid: Sequence[float] | None = None,
    fit_on: str = "smoothed",
) -> AnalysisReport:
    """Run the full quantitative analysis over all unit conditions present.

    Hedge exponents are fitted on pooled per-unit curves (per-location curves
    are pooled by averaging values on their shared grid); ordering fractions
    always use raw per-pair scores; cross-condition RMSE pairs raw scores by
    temperature numeral, location, and category.
    """
    units = []
    for item in scored:
        if item.pair.unit not in units:
            units.append(item.pair.unit)

    fits = {}
    fractions = {}
    fit_values_from = "smoothed" if fit_on == "smoothed" else "raw"
    try:
        for unit in units:
            base = pooled_curve(curves, unit, base_category)
            target = pooled_curve(curves, unit, target_category)
            fits[unit.value] = fit_hedge_exponent(
                base, target, grid=grid, values_from=fit_values_from
            )
            fractions[unit.value] = pairwise_ordering_fraction(
                scored, unit, base_category, target_category
            )

        by_unit = {
            unit: [item for item in scored if item.pair.unit == unit] for unit in units
        }
        cross = {}
        for i, unit_a in enumerate(units):
            for unit_b in units[i + 1 :]:
                label = f"{unit_a.value}_vs_{unit_b.value}"
                cross[label] = cross_condition_rmse(by_unit[unit_a], by_unit[unit_b])
    except ValueError as exc:
        raise DataError(f"analysis inputs are inconsistent: {exc}") from exc

    return AnalysisReport(
        hedge_fits=fits,
        ordering_fractions=fractions,
        cross_condition=cross,
        fit_mode=fit_on,
        ordering_mode="raw",
    )


def pooled_curve(
    curves: Sequence[EntailmentCurve], unit: Unit, category: str
) -> EntailmentCurve:
    """The pooled (location-free) curve for one unit and category.

    Returns the pooled curve directly when present; otherwise averages the
    per-location curves (raw values, and smoothed when all carry them) over
    their shared temperature grid.
    """
    matching = [c for c in curves if c.unit == unit and c.category == category]
    if not matching:
        raise ConfigurationError(
            f"no curve for unit {unit.value!r}, category {category!r}"
        )
    pooled = [c for c in matching if c.location is None]
    if pooled:
        return pooled[0]
    # Per-location curves: average raw (and smoothed, if all carry it) values.
    grids = {tuple(t for t, _ in c.samples) for c in matching}
    if len(grids) != 1:
        raise ValueError(
            f"per-location curves for {category!r} disagree on temperature grids"
        )
    temps = [t for t, _ in matching[0].samples]
    raw = np.mean([c.values for c in matching], axis=0)
    smoothed = None
    if all(c.smoothed is not None for c in matching):
        smoothed = np.mean([c.smoothed_values for c in matching], axis=0)
        smoothed = tuple(zip(temps, smoothed.tolist()))
    return EntailmentCurve(
        unit=unit,
        location=None,
        category=category,
        samples=tuple(zip(temps, raw.tolist())),
        smoothed=smoothed,
    )


def fit_to_record(fit: HedgeFitResult) -> dict:
    return {
        "base_category": fit.base_category,
        "target_category": fit.target_category,
        "lambda_star": fit.lambda_star,
        "rmse_at_star": fit.rmse_at_star,
        "grid": [[lam, err] for lam, err in fit.grid],
    }


def fit_from_record(record: Mapping) -> HedgeFitResult:
    return HedgeFitResult(
        base_category=record["base_category"],
        target_category=record["target_category"],
        lambda_star=float(record["lambda_star"]),
        rmse_at_star=float(record["rmse_at_star"]),
        grid=tuple((float(lam), float(err)) for lam, err in record["grid"]),
    )


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "fit_mode": report.fit_mode,
        "ordering_mode": report.ordering_mode,
        "hedge_fits": {unit: fit_to_record(fit) for unit, fit in report.hedge_fits.items()},
        "ordering_fractions": dict(report.ordering_fractions),
        "cross_condition_rmse": dict(report.cross_condition),
    }


def report_from_dict(data: Mapping) -> AnalysisReport:
    return AnalysisReport(
        hedge_fits={
            unit: fit_from_record(rec) for unit, rec in data["hedge_fits"].items()
        },
        ordering_fractions=dict(data["ordering_fractions"]),
        cross_condition=dict(data["cross_condition_rmse"]),
        fit_mode=data["fit_mode"],
        ordering_mode=data["ordering_mode"],
    )


def write_report(report: AnalysisReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def read_report(path: str | Path) -> AnalysisReport:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return report_from_dict(json.load(fh))
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}: unusable report: {exc}") from exc
