"""Translation-direction corpora and translationese classification."""

__version__ = "0.1.0"
