"""Contextual bandit engine for emotion-regulation content recommendation."""

__version__ = "0.1.0"
