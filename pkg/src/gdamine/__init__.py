"""Rule-based extraction of gene/miRNA-disease expression associations."""

__version__ = "0.1.0"
