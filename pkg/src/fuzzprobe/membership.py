"""Membership functions, linguistic-hedge operators, and graded entailment.

Everything here is an immutable value: operators return new functions and
never mutate their inputs, so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "MembershipFunction",
    "GeneralizedBell",
    "Tabulated",
    "HedgedMembership",
    "IntensifiedMembership",
    "Hedge",
    "HEDGES",
    "FuzzySet",
    "evaluate",
    "apply_hedge",
    "fuzzy_entails",
    "intensify",
    "membership_to_dict",
    "membership_from_dict",
]

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _finite_array(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("membership functions are defined for finite inputs only")
    return arr


def _match_shape(out: np.ndarray, x: ArrayLike):
    return float(out) if np.ndim(x) == 0 else out


class MembershipFunction:
    """A map from a scalar universe to membership degrees in [0, 1]."""

    def evaluate(self, x: ArrayLike):
        raise NotImplementedError

    def __call__(self, x: ArrayLike):
        return self.evaluate(x)


@dataclass(frozen=True)
class GeneralizedBell(MembershipFunction):
    """Bell-shaped membership 1 / (1 + |(x - c) / a|^(2b)).

    `a` controls the width, `b` the slope of the shoulders, and `c` the
    center, where membership peaks at exactly 1.
    """

    a: float = 10.0
    b: float = 4.0
    c: float = 0.0

    def __post_init__(self):
        if not (self.a > 0):
            raise ValueError(f"bell width a must be positive, got {self.a}")
        if not (self.b > 0):
            raise ValueError(f"bell slope b must be positive, got {self.b}")

    def evaluate(self, x: ArrayLike):
        arr = _finite_array(x)
        # |.|^(2b) overflows for huge |x|; the limit 1/(1+inf) = 0 is correct.
        with np.errstate(over="ignore"):
            out = 1.0 / (1.0 + np.abs((arr - self.c) / self.a) ** (2.0 * self.b))
        return _match_shape(out, x)


@dataclass(frozen=True)
class Tabulated(MembershipFunction):
    """Membership sampled on an ascending grid, linearly interpolated."""

    grid: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(float(v) for v in self.values)
        if len(grid) != len(values):
            raise ValueError("grid and values must have identical length")
        if len(grid) == 0:
            raise ValueError("tabulated membership needs at least one grid point")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("tabulated grid must be strictly ascending")
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ValueError("tabulated values must lie in [0, 1]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def evaluate(self, x: ArrayLike):
        arr = _finite_array(x)
        lo, hi = self.grid[0], self.grid[-1]
        if np.any(arr < lo) or np.any(arr > hi):
            raise ValueError(
                f"tabulated membership is defined on [{lo}, {hi}] only"
            )
        out = np.interp(arr, self.grid, self.values)
        return _match_shape(out, x)


@dataclass(frozen=True)
class HedgedMembership(MembershipFunction):
    """A base membership raised pointwise to a hedge exponent."""

    base: MembershipFunction
    exponent: float

    def __post_init__(self):
        if not (self.exponent > 0):
            raise ValueError(f"hedge exponent must be positive, got {self.exponent}")

    def evaluate(self, x: ArrayLike):
        out = np.asarray(self.base.evaluate(x)) ** self.exponent
        return _match_shape(out, x)


@dataclass(frozen=True)
class IntensifiedMembership(MembershipFunction):
    """Contrast intensification around a crossover point.

    Degrees at or below the crossover are concentrated, degrees above it are
    pushed towards 1; the transform is continuous at the crossover and maps
    [0, 1] onto itself.
    """

    base: MembershipFunction
    crossover: float = 0.5
    exponent: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.crossover < 1.0):
            raise ValueError(f"crossover must lie in (0, 1), got {self.crossover}")
        if not (self.exponent > 1.0):
            raise ValueError(f"intensifier exponent must exceed 1, got {self.exponent}")

    def evaluate(self, x: ArrayLike):
        v = np.asarray(self.base.evaluate(x), dtype=float)
        c, e = self.crossover, self.exponent
        low = c * (v / c) ** e
        high = 1.0 - (1.0 - c) * ((1.0 - v) / (1.0 - c)) ** e
        out = np.where(v <= c, low, high)
        return _match_shape(out, x)


@dataclass(frozen=True)
class Hedge:
    """A linguistic hedge modelled as a pointwise power on memberships."""

    name: str
    exponent: float

    def __post_init__(self):
        if not (self.exponent > 0):
            raise ValueError(f"hedge exponent must be positive, got {self.exponent}")


#: Built-in hedges: dilation below 1, concentration above 1.
HEDGES: Mapping[str, Hedge] = {
    "slightly": Hedge("slightly", 0.5),
    "very": Hedge("very", 2.0),
    "extremely": Hedge("extremely", 4.0),
}


@dataclass(frozen=True)
class FuzzySet:
    """A membership function paired with the universe grid it is read on."""

    universe: tuple[float, ...]
    membership: MembershipFunction

    def __post_init__(self):
        universe = tuple(float(u) for u in self.universe)
        if len(universe) == 0:
            raise ValueError("universe must be non-empty")
        if any(b <= a for a, b in zip(universe, universe[1:])):
            raise ValueError("universe must be strictly ascending")
        object.__setattr__(self, "universe", universe)

    def degrees(self) -> np.ndarray:
        """Membership evaluated at every universe point."""
        return np.asarray(self.membership.evaluate(np.asarray(self.universe)))


def evaluate(mf: MembershipFunction, x: ArrayLike):
    """Evaluate `mf` at `x` (scalar or array), returning degrees in [0, 1]."""
    return mf.evaluate(x)


def apply_hedge(mf: MembershipFunction, hedge: Hedge | str) -> MembershipFunction:
    """Raise a membership function to a hedge's exponent.

    Tabulated functions stay tabulated (their sampled values are powered in
    place); anything else is wrapped in a composite.
    """
    if isinstance(hedge, str):
        try:
            hedge = HEDGES[hedge]
        except KeyError:
            raise KeyError(f"unknown hedge {hedge!r}; built-ins: {sorted(HEDGES)}")
    if isinstance(mf, Tabulated):
        powered = np.power(np.asarray(mf.values), hedge.exponent)
        return Tabulated(mf.grid, tuple(powered))
    return HedgedMembership(mf, hedge.exponent)


def fuzzy_entails(p: FuzzySet, q: FuzzySet, tolerance: float = 0.0) -> bool:
    """Graded entailment: p entails q iff mu_p <= mu_q + tolerance everywhere.

    A tolerance of 0 is the textbook definition; a small positive tolerance
    makes the check usable on noisy empirical curves.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    if p.universe != q.universe:
        raise ValueError("fuzzy_entails requires both sets on the same universe grid")
    return bool(np.all(p.degrees() <= q.degrees() + tolerance))


def intensify(
    mf: MembershipFunction, crossover: float = 0.5, exponent: float = 2.0
) -> MembershipFunction:
    """Contrast-intensify a membership function around `crossover`."""
    return IntensifiedMembership(mf, crossover, exponent)


def membership_to_dict(mf: MembershipFunction) -> dict:
    """JSON-friendly representation, inverse of `membership_from_dict`."""
    if isinstance(mf, GeneralizedBell):
        return {"kind": "generalized-bell", "a": mf.a, "b": mf.b, "c": mf.c}
    if isinstance(mf, Tabulated):
        return {"kind": "tabulated", "grid": list(mf.grid), "values": list(mf.values)}
    if isinstance(mf, HedgedMembership):
        return {
            "kind": "hedged",
            "base": membership_to_dict(mf.base),
            "exponent": mf.exponent,
        }
    if isinstance(mf, IntensifiedMembership):
        return {
            "kind": "intensified",
            "base": membership_to_dict(mf.base),
            "crossover": mf.crossover,
            "exponent": mf.exponent,
        }
    raise TypeError(f"cannot serialise membership function of type {type(mf).__name__}")


def membership_from_dict(data: Mapping) -> MembershipFunction:
    """Build a membership function from its dict form; raises ValueError on junk."""
    try:
        kind = data["kind"]
    except (KeyError, TypeError):
        raise ValueError("membership spec needs a 'kind' field")
    if kind == "generalized-bell":
        return GeneralizedBell(float(data["a"]), float(data["b"]), float(data["c"]))
    if kind == "tabulated":
        return Tabulated(tuple(data["grid"]), tuple(data["values"]))
    if kind == "hedged":
        return HedgedMembership(membership_from_dict(data["base"]), float(data["exponent"]))
    if kind == "intensified":
        return IntensifiedMembership(
            membership_from_dict(data["base"]),
            float(data["crossover"]),
            float(data["exponent"]),
        )
    raise ValueError(f"unknown membership kind {kind!r}")
