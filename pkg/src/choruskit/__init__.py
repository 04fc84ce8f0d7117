"""Chorus recognition and chorus-aware song search toolkit."""

__version__ = "0.1.0"
