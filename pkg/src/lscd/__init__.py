"""Usage-graph annotation, clustering and evaluation for lexical semantic
change detection."""

__version__ = "0.1.0"
