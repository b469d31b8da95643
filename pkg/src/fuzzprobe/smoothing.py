"""Penalized natural cubic smoothing splines for entailment curves.

The smoother minimizes

    sum_i (e_i - f(t_i))^2 + lam * integral f''(t)^2 dt

over natural cubic splines with knots at the sample points (the classical
Reinsch / Green & Silverman formulation). With second-difference matrix Q
(n x (n-2)) and tridiagonal R ((n-2) x (n-2)),

    (R + lam * Q'Q) gamma = Q'y,      f = y - lam * Q gamma,

where gamma holds the interior second derivatives. The system is symmetric
banded (bandwidth 2) and is solved in banded storage. The smoothing weight
is either fixed or chosen by generalized cross-validation,

    GCV(lam) = n * RSS(lam) / (n - tr H_lam)^2,

evaluated over a log-spaced grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import solveh_banded

from .errors import DataError, InsufficientDataError
from .scoring import ScoredPair
from .stimuli import Unit

__all__ = [
    "EntailmentCurve",
    "SmootherConfig",
    "smooth",
    "gcv_score",
    "select_lambda",
    "build_curves",
    "write_curves",
    "read_curves",
]

_MIN_SAMPLES = 10


@dataclass(frozen=True)
class EntailmentCurve:
    """Entailment scores along a temperature grid for one condition.

    `location` is None for curves pooled across locations. `smoothed`, when
    present, holds fitted values on the same temperature grid; the raw
    samples are never modified.
    """

    unit: Unit
    location: str | None
    category: str
    samples: tuple[tuple[int, float], ...]
    smoothed: tuple[tuple[int, float], ...] | None = None

    def __post_init__(self):
        samples = tuple((int(t), float(e)) for t, e in self.samples)
        temps = [t for t, _ in samples]
        if any(b <= a for a, b in zip(temps, temps[1:])):
            raise ValueError("sample temperatures must be strictly ascending")
        for t, e in samples:
            if not (0.0 <= e <= 1.0):
                raise ValueError(f"e-value {e} at temperature {t} outside [0, 1]")
        object.__setattr__(self, "samples", samples)
        if self.smoothed is not None:
            smoothed = tuple((int(t), float(v)) for t, v in self.smoothed)
            if [t for t, _ in smoothed] != temps:
                raise ValueError("smoothed values must share the raw temperature grid")
            object.__setattr__(self, "smoothed", smoothed)

    @property
    def temperatures(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([e for _, e in self.samples], dtype=float)

    @property
    def smoothed_values(self) -> np.ndarray | None:
        if self.smoothed is None:
            return None
        return np.array([v for _, v in self.smoothed], dtype=float)

    def best_values(self) -> np.ndarray:
        """Smoothed values when present, raw otherwise."""
        smoothed = self.smoothed_values
        return smoothed if smoothed is not None else self.values


def _default_lambda_grid() -> tuple[float, ...]:
    return tuple(np.logspace(-4.0, 4.0, 50))


@dataclass(frozen=True)
class SmootherConfig:
    """Smoothing weight grid and selection strategy.

    selection is "gcv" (pick the grid value minimizing generalized
    cross-validation) or "fixed" (use `fixed_lambda` as given).
    """

    lambda_grid: tuple[float, ...] | None = None
    selection: str = "gcv"
    fixed_lambda: float | None = None
    clamp_output: bool = True

    def __post_init__(self):
        grid = self.lambda_grid if self.lambda_grid is not None else _default_lambda_grid()
        grid = tuple(float(v) for v in grid)
        if not grid:
            raise ValueError("lambda grid must be non-empty")
        if any(v <= 0 for v in grid):
            raise ValueError("lambda grid values must be positive")
        object.__setattr__(self, "lambda_grid", grid)
        if self.selection not in ("gcv", "fixed"):
            raise ValueError(f"unknown selection mode {self.selection!r}")
        if self.selection == "fixed":
            if self.fixed_lambda is None or self.fixed_lambda <= 0:
                raise ValueError("fixed selection needs a positive fixed_lambda")


def _spline_system(x: np.ndarray):
    """Banded pieces of the penalized normal equations at knots x.

    Returns (h, R upper-banded, Q'Q upper-banded) where the banded matrices
    use solveh_banded's upper storage: row u+i-j holds element (i, j).
    """
    h = np.diff(x)
    inv = 1.0 / h
    m = len(x) - 2
    # Q columns j = 0..m-1 touch rows j, j+1, j+2.
    q0 = inv[:-1]
    q1 = -(inv[:-1] + inv[1:])
    q2 = inv[1:]
    qtq_d0 = q0 * q0 + q1 * q1 + q2 * q2
    qtq_d1 = q1[:-1] * q0[1:] + q2[:-1] * q1[1:]
    qtq_d2 = q2[:-2] * q0[2:]
    r_d0 = (h[:-1] + h[1:]) / 3.0
    r_d1 = h[1:-1] / 6.0

    r_band = np.zeros((3, m))
    r_band[2, :] = r_d0
    r_band[1, 1:] = r_d1
    qtq_band = np.zeros((3, m))
    qtq_band[2, :] = qtq_d0
    qtq_band[1, 1:] = qtq_d1
    qtq_band[0, 2:] = qtq_d2
    return h, r_band, qtq_band


def _qt_y(y: np.ndarray, h: np.ndarray) -> np.ndarray:
    inv = 1.0 / h
    return y[:-2] * inv[:-1] - y[1:-1] * (inv[:-1] + inv[1:]) + y[2:] * inv[1:]


def _q_gamma(gamma: np.ndarray, h: np.ndarray) -> np.ndarray:
    inv = 1.0 / h
    out = np.zeros(len(h) + 1)
    out[:-2] += gamma * inv[:-1]
    out[1:-1] -= gamma * (inv[:-1] + inv[1:])
    out[2:] += gamma * inv[1:]
    return out


def _band_to_dense(band: np.ndarray) -> np.ndarray:
    m = band.shape[1]
    dense = np.zeros((m, m))
    dense[np.arange(m), np.arange(m)] = band[2]
    if m > 1:
        idx = np.arange(m - 1)
        dense[idx, idx + 1] = band[1, 1:]
        dense[idx + 1, idx] = band[1, 1:]
    if m > 2:
        idx = np.arange(m - 2)
        dense[idx, idx + 2] = band[0, 2:]
        dense[idx + 2, idx] = band[0, 2:]
    return dense


def _fit_values(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    h, r_band, qtq_band = _spline_system(x)
    b_band = r_band + lam * qtq_band
    gamma = solveh_banded(b_band, _qt_y(y, h))
    return y - lam * _q_gamma(gamma, h)


def gcv_score(x: Sequence[float], y: Sequence[float], lam: float) -> float:
    """Generalized cross-validation score of the spline fit at weight lam."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    h, r_band, qtq_band = _spline_system(x)
    b_band = r_band + lam * qtq_band
    gamma = solveh_banded(b_band, _qt_y(y, h))
    residual = lam * _q_gamma(gamma, h)
    rss = float(residual @ residual)
    # tr(H) = n - lam * tr(B^-1 Q'Q); the trace term reuses the banded factor.
    trace = float(np.trace(solveh_banded(b_band, _band_to_dense(qtq_band))))
    denom = lam * trace  # == n - tr(H)
    return n * rss / denom**2


def select_lambda(
    x: Sequence[float], y: Sequence[float], grid: Sequence[float]
) -> tuple[float, list[tuple[float, float]]]:
    """Pick the grid weight minimizing GCV; ties go to the smaller weight."""
    scores = [(float(lam), gcv_score(x, y, float(lam))) for lam in grid]
    best = min(score for _, score in scores)
    chosen = min(lam for lam, score in scores if score == best)
    return chosen, scores


def smooth(curve: EntailmentCurve, config: SmootherConfig | None = None) -> EntailmentCurve:
    """Return the curve with `smoothed` filled in; raw samples untouched."""
    config = config or SmootherConfig()
    if len(curve.samples) < _MIN_SAMPLES:
        raise InsufficientDataError(
            f"smoothing needs at least {_MIN_SAMPLES} samples, got {len(curve.samples)}"
        )
    x = curve.temperatures
    y = curve.values
    if config.selection == "fixed":
        lam = float(config.fixed_lambda)
    else:
        lam, _ = select_lambda(x, y, config.lambda_grid)
    fitted = _fit_values(x, y, lam)
    if config.clamp_output:
        fitted = np.clip(fitted, 0.0, 1.0)
    smoothed = tuple(zip((int(t) for t, _ in curve.samples), fitted.tolist()))
    return replace(curve, smoothed=smoothed)


def build_curves(
    scored: Iterable[ScoredPair], per_location: bool = False
) -> list[EntailmentCurve]:
    """Group scored pairs into entailment curves.

    The default pools locations: the curve value at a temperature is the mean
    entailment over all locations sharing that (unit, category, temperature).
    With per_location=True, one curve per (unit, location, category) is kept.
    Curves come out in first-appearance order of their grouping key.
    """
    groups: dict[tuple, dict[int, list[float]]] = {}
    for item in scored:
        pair = item.pair
        key = (
            (pair.unit, pair.location, pair.category)
            if per_location
            else (pair.unit, None, pair.category)
        )
        groups.setdefault(key, {}).setdefault(pair.temperature, []).append(
            item.scores.entailment
        )
    curves = []
    for (unit, location, category), by_temp in groups.items():
        samples = tuple(
            (t, float(np.mean(by_temp[t]))) for t in sorted(by_temp)
        )
        curves.append(
            EntailmentCurve(unit=unit, location=location, category=category, samples=samples)
        )
    return curves


def curve_to_record(curve: EntailmentCurve) -> dict:
    return {
        "unit": curve.unit.value,
        "location": curve.location,
        "category": curve.category,
        "samples": [[t, e] for t, e in curve.samples],
        "smoothed": None if curve.smoothed is None else [[t, v] for t, v in curve.smoothed],
    }


def curve_from_record(record: Mapping) -> EntailmentCurve:
    return EntailmentCurve(
        unit=Unit(record["unit"]),
        location=record["location"],
        category=record["category"],
        samples=tuple((int(t), float(e)) for t, e in record["samples"]),
        smoothed=(
            None
            if record.get("smoothed") is None
            else tuple((int(t), float(v)) for t, v in record["smoothed"])
        ),
    )


def write_curves(curves: Iterable[EntailmentCurve], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for curve in curves:
            fh.write(json.dumps(curve_to_record(curve), ensure_ascii=False) + "\n")


def read_curves(path: str | Path) -> list[EntailmentCurve]:
    curves = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                curves.append(curve_from_record(json.loads(line)))
            except (KeyError, ValueError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return curves
