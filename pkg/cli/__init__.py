"""CLI interface module for the conversation quality pipeline."""

from .main import cli

__all__ = ['cli']

