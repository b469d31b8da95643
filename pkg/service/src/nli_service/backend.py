"""Scoring backends: the transformers-based model and a deterministic stub.

A backend scores (premise, hypothesis) pairs and returns one
(entailment, neutral, contradiction) probability row per pair, in order.
"""

from __future__ import annotations

import hashlib
import math
from typing import Mapping, Protocol, Sequence

from .config import ServiceConfig

LABEL_NAMES = ("entailment", "neutral", "contradiction")


class ScoringBackend(Protocol):
    model_id: str

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[float, float, float]]:
        ...


def label_indices(id2label: Mapping[int, str]) -> tuple[int, int, int]:
    """Locate the entailment/neutral/contradiction logit positions.

    MNLI checkpoints disagree on label order, so the mapping is always read
    from the checkpoint's own label map; uninformative maps (LABEL_0 style)
    are rejected rather than guessed at.
    """
    by_name = {name.strip().lower(): index for index, name in id2label.items()}
    try:
        return tuple(by_name[name] for name in LABEL_NAMES)  # type: ignore[return-value]
    except KeyError as exc:
        raise LookupError(
            f"checkpoint label map {dict(id2label)!r} does not name {exc}; "
            "cannot map logits to NLI labels safely"
        ) from exc


class TransformersBackend:
    """Sequence-classification model scored with a softmax over three logits.

    The tokenizer owns the input format (separator tokens included); callers
    only ever supply raw premise/hypothesis text.
    """

    def __init__(self, config: ServiceConfig):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.model_id = config.model
        self._batch_size = config.inference_batch_size
        self._tokenizer = AutoTokenizer.from_pretrained(config.model)
        self._model = AutoModelForSequenceClassification.from_pretrained(config.model)
        self._model.eval()
        if config.device == "auto":
            device = "cuda" if torch.cuda.is_available() else "cpu"
        else:
            device = config.device
        self._device = device
        self._model.to(device)
        self._indices = label_indices(self._model.config.id2label)

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[float, float, float]]:
        torch = self._torch
        rows: list[tuple[float, float, float]] = []
        e_idx, n_idx, c_idx = self._indices
        with torch.no_grad():
            for start in range(0, len(pairs), self._batch_size):
                chunk = pairs[start : start + self._batch_size]
                encoded = self._tokenizer(
                    [p for p, _ in chunk],
                    [h for _, h in chunk],
                    padding=True,
                    truncation=True,
                    return_tensors="pt",
                ).to(self._device)
                logits = self._model(**encoded).logits
                probs = torch.softmax(logits, dim=-1).cpu()
                for row in probs:
                    rows.append(
                        (float(row[e_idx]), float(row[n_idx]), float(row[c_idx]))
                    )
        return rows


class DeterministicStubBackend:
    """Text-hash pseudo-scores on the probability simplex.

    Useful for exercising the wire protocol and clients without a model:
    identical input always yields identical output.
    """

    model_id = "deterministic-stub"

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[tuple[float, float, float]]:
        rows = []
        for premise, hypothesis in pairs:
            digest = hashlib.sha256(f"{premise}\x1f{hypothesis}".encode()).digest()
            logits = [digest[i] / 64.0 for i in range(3)]
            total = sum(math.exp(v) for v in logits)
            e, n, c = (math.exp(v) / total for v in logits)
            rows.append((e, n, c))
        return rows


def build_backend(config: ServiceConfig) -> ScoringBackend:
    """The backend named by the config: 'stub' or a checkpoint identifier."""
    if config.model == "stub":
        return DeterministicStubBackend()
    return TransformersBackend(config)
