"""Preprocessing companions for the association extractor."""

__version__ = "0.1.0"
