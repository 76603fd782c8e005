"""Command-line front end for uncertain fixed-effects analysis."""

__version__ = "0.1.0"
