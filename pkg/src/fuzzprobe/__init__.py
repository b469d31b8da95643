"""Probe NLI models for graded, fuzzy-set-like entailment behaviour.

The pipeline renders temperature premise/hypothesis pairs, scores them with
an NLI service (or a deterministic synthetic oracle), smooths the resulting
entailment curves, and fits hedge exponents relating fuzzy categories such
as *warm* and *hot*.
"""

__version__ = "0.1.0"
