"""Sentence-level annotation, classification and analysis of grant
peer-review texts."""

__version__ = "0.1.0"
