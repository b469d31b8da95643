"""HTTP scoring service wrapping a pretrained NLI sequence-classification model."""

__version__ = "0.1.0"
