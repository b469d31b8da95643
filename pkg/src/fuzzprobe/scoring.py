"""Label-probability scoring: remote NLI service, synthetic oracle, and cache.

Every score that enters the system is a point on the probability simplex
(entailment, neutral, contradiction). The remote scorer talks to an HTTP
service; the oracle derives the entailment probability from a configured
membership function so the whole pipeline can be exercised offline with a
known ground truth.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import requests

from .errors import ConfigurationError, DataError, ProtocolError, TransportError
from .membership import MembershipFunction
from .stimuli import StimulusPair, Unit

__all__ = [
    "LabelScores",
    "ScoredPair",
    "OracleSpec",
    "RemoteScorerConfig",
    "score_remote",
    "score_oracle",
    "cache_write",
    "cache_read",
]

_SIMPLEX_TOLERANCE = 1e-6

#: Share of the non-entailment mass assigned to the neutral label by the oracle.
_ORACLE_NEUTRAL_SHARE = 0.7

_CACHE_FIELDS = (
    "premise",
    "hypothesis",
    "temperature",
    "unit",
    "location",
    "category",
    "entailment",
    "neutral",
    "contradiction",
    "scorer_id",
)


@dataclass(frozen=True)
class LabelScores:
    """Probabilities for the three NLI labels; must sum to 1."""

    entailment: float
    neutral: float
    contradiction: float

    def __post_init__(self):
        for name in ("entailment", "neutral", "contradiction"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} probability {value} outside [0, 1]")
        total = self.entailment + self.neutral + self.contradiction
        if not math.isclose(total, 1.0, abs_tol=_SIMPLEX_TOLERANCE):
            raise ValueError(f"label probabilities sum to {total}, not 1")


@dataclass(frozen=True)
class ScoredPair:
    """A stimulus pair with its label scores and scorer provenance tag."""

    pair: StimulusPair
    scores: LabelScores
    scorer_id: str

    def __post_init__(self):
        if not self.scorer_id:
            raise ValueError("scorer_id must be non-empty")


@dataclass(frozen=True)
class OracleSpec:
    """Ground-truth generator: one membership function per (unit, category).

    The oracle's entailment probability is the membership degree of the
    premise temperature, plus optional gaussian noise, clamped to [0, 1].
    """

    memberships: Mapping[Unit, Mapping[str, MembershipFunction]]
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    def scorer_id(self) -> str:
        return f"oracle(seed={self.seed},sigma={self.noise_sigma:g})"

    def membership_for(self, unit: Unit, category: str) -> MembershipFunction:
        try:
            return self.memberships[unit][category]
        except KeyError:
            raise ConfigurationError(
                f"oracle spec has no membership for unit {unit.value!r}, "
                f"category {category!r}"
            )


def _split_remainder(entailment: float) -> LabelScores:
    neutral = _ORACLE_NEUTRAL_SHARE * (1.0 - entailment)
    contradiction = 1.0 - entailment - neutral
    return LabelScores(entailment, neutral, contradiction)


def score_oracle(pairs: Sequence[StimulusPair], spec: OracleSpec) -> list[ScoredPair]:
    """Score pairs deterministically from the configured memberships.

    Identical spec (including seed) gives identical output. Noise is drawn
    per pair in input order, so the result does not depend on how the call
    is batched.
    """
    for pair in pairs:
        spec.membership_for(pair.unit, pair.category)  # fail fast on gaps
    rng = np.random.default_rng(spec.seed)
    scorer_id = spec.scorer_id()
    scored = []
    for pair in pairs:
        mu = spec.membership_for(pair.unit, pair.category).evaluate(float(pair.temperature))
        noise = rng.normal(0.0, spec.noise_sigma) if spec.noise_sigma > 0 else 0.0
        entailment = float(np.clip(mu + noise, 0.0, 1.0))
        scored.append(ScoredPair(pair, _split_remainder(entailment), scorer_id))
    return scored


@dataclass(frozen=True)
class RemoteScorerConfig:
    """Connection settings for the HTTP scoring service."""

    endpoint: str
    batch_size: int = 64
    concurrency: int = 4
    max_attempts: int = 3
    backoff: float = 0.5
    timeout: float = 60.0

    def __post_init__(self):
        if not self.endpoint:
            raise ConfigurationError("remote scorer needs an endpoint")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.concurrency < 1:
            raise ValueError(f"concurrency must be >= 1, got {self.concurrency}")


def _parse_score_row(row, batch_index: int) -> LabelScores:
    try:
        return LabelScores(
            entailment=float(row["entailment"]),
            neutral=float(row["neutral"]),
            contradiction=float(row["contradiction"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(
            f"batch {batch_index}: unusable score row {row!r}: {exc}",
            batch_index=batch_index,
        ) from exc


def _post_batch(
    session,
    url: str,
    batch: Sequence[StimulusPair],
    batch_index: int,
    config: RemoteScorerConfig,
    sleep: Callable[[float], None],
) -> list[LabelScores]:
    payload = {
        "pairs": [{"premise": p.premise, "hypothesis": p.hypothesis} for p in batch]
    }
    last_error = None
    for attempt in range(config.max_attempts):
        if attempt > 0:
            sleep(config.backoff * 2 ** (attempt - 1))
        try:
            response = session.post(url, json=payload, timeout=config.timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = RuntimeError(f"HTTP {response.status_code}")
            continue
        if response.status_code != 200:
            raise ProtocolError(
                f"batch {batch_index}: service answered HTTP {response.status_code}",
                batch_index=batch_index,
            )
        try:
            body = response.json()
            rows = body["scores"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(
                f"batch {batch_index}: malformed response body: {exc}",
                batch_index=batch_index,
            ) from exc
        if len(rows) != len(batch):
            raise ProtocolError(
                f"batch {batch_index}: sent {len(batch)} pairs, got {len(rows)} scores",
                batch_index=batch_index,
            )
        return [_parse_score_row(row, batch_index) for row in rows]
    raise TransportError(
        f"batch {batch_index}: gave up after {config.max_attempts} attempts: {last_error}",
        batch_index=batch_index,
    )


def score_remote(
    pairs: Sequence[StimulusPair],
    endpoint: str | RemoteScorerConfig,
    batch_size: int | None = None,
    *,
    session=None,
    scorer_id: str | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[ScoredPair]:
    """Score pairs against a remote service, preserving input order.

    Batches are dispatched with bounded concurrency and each batch is retried
    with exponential backoff on transport failures before giving up with a
    `TransportError` naming the batch. `session` exists for injection in
    tests; any object with a requests-compatible ``post`` works.
    """
    if isinstance(endpoint, RemoteScorerConfig):
        config = endpoint if batch_size is None else replace(endpoint, batch_size=batch_size)
    else:
        config = RemoteScorerConfig(endpoint=endpoint, batch_size=batch_size or 64)
    if not pairs:
        return []
    url = config.endpoint.rstrip("/") + "/score"
    tag = scorer_id or f"remote({config.endpoint})"
    own_session = session is None
    session = session or requests.Session()
    batches = [
        pairs[start : start + config.batch_size]
        for start in range(0, len(pairs), config.batch_size)
    ]
    try:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            results = list(
                pool.map(
                    lambda item: _post_batch(session, url, item[1], item[0], config, sleep),
                    enumerate(batches),
                )
            )
    finally:
        if own_session:
            session.close()
    scored = []
    for batch, batch_scores in zip(batches, results):
        for pair, scores in zip(batch, batch_scores):
            scored.append(ScoredPair(pair, scores, tag))
    return scored


def scored_to_record(scored: ScoredPair) -> dict:
    return {
        "premise": scored.pair.premise,
        "hypothesis": scored.pair.hypothesis,
        "temperature": scored.pair.temperature,
        "unit": scored.pair.unit.value,
        "location": scored.pair.location,
        "category": scored.pair.category,
        "entailment": scored.scores.entailment,
        "neutral": scored.scores.neutral,
        "contradiction": scored.scores.contradiction,
        "scorer_id": scored.scorer_id,
    }


def scored_from_record(record: Mapping) -> ScoredPair:
    pair = StimulusPair(
        premise=record["premise"],
        hypothesis=record["hypothesis"],
        temperature=int(record["temperature"]),
        unit=Unit(record["unit"]),
        location=record["location"],
        category=record["category"],
    )
    scores = LabelScores(
        entailment=float(record["entailment"]),
        neutral=float(record["neutral"]),
        contradiction=float(record["contradiction"]),
    )
    return ScoredPair(pair, scores, record["scorer_id"])


def cache_write(scored: Iterable[ScoredPair], path: str | Path) -> None:
    """Persist scores as JSON-lines at full float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in scored:
            fh.write(json.dumps(scored_to_record(item), ensure_ascii=False) + "\n")


def cache_read(path: str | Path) -> list[ScoredPair]:
    """Read a score cache, reporting the line and field of any bad row."""
    scored = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            missing = [name for name in _CACHE_FIELDS if name not in record]
            if missing:
                raise DataError(
                    f"{path}: line {lineno}: missing field(s) {', '.join(missing)}"
                )
            try:
                scored.append(scored_from_record(record))
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return scored
