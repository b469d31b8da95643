"""SVG plots of entailment curves and fitted hedge exponents, plus CSV dumps.

Every number that lands in a figure is also written to CSV next to it, so
the plots are never the only record. SVGs are rendered with a fixed hash
salt and no embedded date, keeping reruns byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import HedgeFitResult
from .smoothing import EntailmentCurve
from .stimuli import Unit

__all__ = ["plot_unit_curves", "plot_exponent_summary", "render_all"]

_VERY_EXPONENT = 2.0

_RC = {
    "svg.hashsalt": "fuzzprobe",
    "svg.fonttype": "none",
    "figure.figsize": (8.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_unit_curves(
    curves: Sequence[EntailmentCurve], unit: Unit, out_dir: str | Path
) -> list[Path]:
    """One SVG per unit: entailment against temperature, one line per category.

    Smoothed values are drawn when present (with raw values as faint dots),
    raw values otherwise. Returns the files written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    unit_curves = [c for c in curves if c.unit == unit]
    if not unit_curves:
        return []
    svg_path = out_dir / f"curves_{unit.value}.svg"
    csv_path = out_dir / f"curves_{unit.value}.csv"
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots()
        for curve in unit_curves:
            label = curve.category if curve.location is None else (
                f"{curve.category} ({curve.location or 'no location'})"
            )
            temps = curve.temperatures
            if curve.smoothed is not None:
                line, = ax.plot(temps, curve.smoothed_values, label=label)
                ax.plot(temps, curve.values, ".", color=line.get_color(), alpha=0.15, markersize=2)
            else:
                ax.plot(temps, curve.values, label=label)
        ax.set_xlabel("temperature (degrees)")
        ax.set_ylabel("entailment score")
        ax.set_ylim(-0.05, 1.05)
        ax.set_title(f"{unit.value} condition")
        ax.legend(loc="center right", fontsize=8)
        _save(fig, svg_path)

    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit", "location", "category", "temperature", "raw", "smoothed"])
        for curve in unit_curves:
            smoothed = curve.smoothed_values
            for i, (t, e) in enumerate(curve.samples):
                writer.writerow(
                    [
                        curve.unit.value,
                        "" if curve.location is None else curve.location,
                        curve.category,
                        t,
                        repr(e),
                        "" if smoothed is None else repr(float(smoothed[i])),
                    ]
                )
    return [svg_path, csv_path]


def plot_exponent_summary(
    fits: Mapping[str, HedgeFitResult], out_dir: str | Path
) -> list[Path]:
    """Fitted exponent per unit condition, with a dashed line at the
    exponent conventionally assigned to "very" (2)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    svg_path = out_dir / "hedge_exponents.svg"
    csv_path = out_dir / "hedge_exponents.csv"
    units = list(fits.keys())
    stars = [fits[u].lambda_star for u in units]
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(range(len(units)), stars, "o", markersize=9)
        ax.axhline(_VERY_EXPONENT, linestyle="--", color="gray", label='"very" exponent')
        ax.set_xticks(range(len(units)))
        ax.set_xticklabels(units)
        ax.set_xlim(-0.5, len(units) - 0.5)
        ax.set_xlabel("unit condition")
        grid_values = [lam for lam, _ in next(iter(fits.values())).grid]
        ax.set_ylim(min(grid_values) - 0.25, max(stars + [_VERY_EXPONENT]) + 0.5)
        any_fit = next(iter(fits.values()))
        ax.set_ylabel(
            f"best exponent: {any_fit.target_category} ~ {any_fit.base_category}^x"
        )
        ax.legend()
        _save(fig, svg_path)

    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit", "base_category", "target_category", "lambda_star", "rmse_at_star"])
        for unit in units:
            fit = fits[unit]
            writer.writerow(
                [unit, fit.base_category, fit.target_category, repr(fit.lambda_star), repr(fit.rmse_at_star)]
            )
    return [svg_path, csv_path]


def render_all(
    curves: Sequence[EntailmentCurve],
    fits: Mapping[str, HedgeFitResult] | None,
    out_dir: str | Path,
) -> list[Path]:
    """Render every per-unit curve plot plus the exponent summary."""
    out_dir = Path(out_dir)
    written = []
    seen = []
    for curve in curves:
        if curve.unit not in seen:
            seen.append(curve.unit)
    for unit in seen:
        written.extend(plot_unit_curves(curves, unit, out_dir))
    if fits:
        written.extend(plot_exponent_summary(fits, out_dir))
    return written
