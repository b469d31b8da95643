"""Deterministic expansion of temperature premise/hypothesis templates.

Premises state a temperature reading ("It is 40 degrees Fahrenheit outside."),
hypotheses assign a fuzzy category ("It is warm outside."). The default
configuration enumerates every integer degree in three unit conditions, six
location phrases, and five categories: 13,410 pairs in total.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError

__all__ = [
    "Unit",
    "UNIT_LABELS",
    "NO_LOCATION",
    "StimulusConfig",
    "StimulusPair",
    "render_premise",
    "render_hypothesis",
    "generate_dataset",
    "write_pairs",
    "read_pairs",
]


class Unit(str, Enum):
    """Unit-of-measurement condition for a premise."""

    NONE = "none"
    FAHRENHEIT = "fahrenheit"
    CELSIUS = "celsius"


#: Surface forms inserted after "degrees"; the no-unit condition inserts nothing.
UNIT_LABELS: Mapping[Unit, str] = {
    Unit.NONE: "",
    Unit.FAHRENHEIT: "Fahrenheit",
    Unit.CELSIUS: "Celsius",
}

#: The distinguished empty location phrase.
NO_LOCATION = ""

_DEFAULT_RANGES = {
    Unit.NONE: (-50, 122),
    Unit.FAHRENHEIT: (-50, 122),
    Unit.CELSIUS: (-50, 50),
}

_DEFAULT_LOCATIONS = (
    NO_LOCATION,
    "in the bedroom",
    "in the living room",
    "in the basement",
    "outside",
    "inside",
)

_DEFAULT_CATEGORIES = ("freezing", "cold", "cool", "warm", "hot")


@dataclass(frozen=True)
class StimulusConfig:
    """Everything needed to enumerate the analytical dataset.

    `negative_word`, when set (e.g. "minus"), spells out negative readings as
    "minus 10" instead of "-10".
    """

    units: tuple[Unit, ...] = (Unit.NONE, Unit.FAHRENHEIT, Unit.CELSIUS)
    ranges: Mapping[Unit, tuple[int, int]] = field(
        default_factory=lambda: dict(_DEFAULT_RANGES)
    )
    locations: tuple[str, ...] = _DEFAULT_LOCATIONS
    categories: tuple[str, ...] = _DEFAULT_CATEGORIES
    unit_labels: Mapping[Unit, str] = field(default_factory=lambda: dict(UNIT_LABELS))
    negative_word: str | None = None

    def __post_init__(self):
        if not self.units:
            raise ValueError("at least one unit condition is required")
        if not self.locations:
            raise ValueError("at least one location phrase is required")
        if not self.categories:
            raise ValueError("at least one fuzzy category is required")
        for unit in self.units:
            if unit not in self.ranges:
                raise ValueError(f"no temperature range configured for unit {unit.value!r}")
            lo, hi = self.ranges[unit]
            if lo > hi:
                raise ValueError(
                    f"range for unit {unit.value!r} has min {lo} > max {hi}"
                )

    def expected_count(self) -> int:
        """Closed-form pair count: sum over units of width x locations x categories."""
        total = 0
        for unit in self.units:
            lo, hi = self.ranges[unit]
            total += (hi - lo + 1) * len(self.locations) * len(self.categories)
        return total


@dataclass(frozen=True)
class StimulusPair:
    """One premise/hypothesis pair plus the metadata it was rendered from."""

    premise: str
    hypothesis: str
    temperature: int
    unit: Unit
    location: str
    category: str

    def __post_init__(self):
        for name in ("premise", "hypothesis"):
            text = getattr(self, name)
            if not text or not text.endswith(".") or text.count(".") != 1:
                raise ValueError(f"{name} must be a single period-terminated sentence: {text!r}")


def _format_temperature(temperature: int, negative_word: str | None) -> str:
    if negative_word and temperature < 0:
        return f"{negative_word} {-temperature}"
    return str(temperature)


def render_premise(
    temperature: int,
    unit: Unit,
    location: str,
    *,
    unit_labels: Mapping[Unit, str] | None = None,
    negative_word: str | None = None,
) -> str:
    """Render "It is [temperature] degrees {unit} [location]."

    The no-unit and no-location parts are dropped rather than left as doubled
    spaces, so "It is 40 degrees." comes out with no trailing gap.
    """
    label = (unit_labels or UNIT_LABELS)[unit]
    parts = [f"It is {_format_temperature(temperature, negative_word)} degrees"]
    if label:
        parts.append(label)
    if location:
        parts.append(location)
    return " ".join(parts) + "."


def render_hypothesis(category: str, location: str) -> str:
    """Render "It is [category] [location]." with the same no-location rule."""
    if location:
        return f"It is {category} {location}."
    return f"It is {category}."


def generate_dataset(config: StimulusConfig | None = None) -> list[StimulusPair]:
    """Enumerate every pair in deterministic order.

    Order is unit, then temperature ascending by one degree, then location,
    then category; the hypothesis always reuses the premise's location.
    """
    config = config or StimulusConfig()
    pairs = []
    for unit in config.units:
        lo, hi = config.ranges[unit]
        for temperature in range(lo, hi + 1):
            for location in config.locations:
                premise = render_premise(
                    temperature,
                    unit,
                    location,
                    unit_labels=config.unit_labels,
                    negative_word=config.negative_word,
                )
                for category in config.categories:
                    pairs.append(
                        StimulusPair(
                            premise=premise,
                            hypothesis=render_hypothesis(category, location),
                            temperature=temperature,
                            unit=unit,
                            location=location,
                            category=category,
                        )
                    )
    return pairs


def pair_to_record(pair: StimulusPair) -> dict:
    return {
        "premise": pair.premise,
        "hypothesis": pair.hypothesis,
        "temperature": pair.temperature,
        "unit": pair.unit.value,
        "location": pair.location,
        "category": pair.category,
    }


def pair_from_record(record: Mapping) -> StimulusPair:
    return StimulusPair(
        premise=record["premise"],
        hypothesis=record["hypothesis"],
        temperature=int(record["temperature"]),
        unit=Unit(record["unit"]),
        location=record["location"],
        category=record["category"],
    )


def write_pairs(pairs: Iterable[StimulusPair], path: str | Path) -> None:
    """Write pairs as JSON-lines, one object per pair."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_record(pair), ensure_ascii=False) + "\n")


def read_pairs(path: str | Path) -> list[StimulusPair]:
    """Read a JSON-lines pair file written by `write_pairs`."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pairs.append(pair_from_record(record))
            except (KeyError, ValueError) as exc:
                field_hint = f" field {exc}" if isinstance(exc, KeyError) else ""
                raise DataError(f"{path}: line {lineno}:{field_hint} {exc}") from exc
    return pairs
