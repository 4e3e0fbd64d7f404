"""Reporting module for the conversation quality pipeline."""

from .table_writer import TableWriter
from .cli_formatter import CLIFormatter
from .json_exporter import JSONExporter

__all__ = [
    'TableWriter',
    'CLIFormatter',
    'JSONExporter',
]
