"""Console and logging setup shared by the CLI and the pipeline."""

import logging

from rich.console import Console
from rich.logging import RichHandler

console = Console(stderr=True)

_configured = False


def setup_logging(level: int = logging.INFO) -> None:
    """Route all pipeline loggers through a rich handler on the shared console."""
    global _configured
    root = logging.getLogger()
    if not _configured:
        handler = RichHandler(console=console, show_path=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter('%(name)s: %(message)s'))
        root.addHandler(handler)
        _configured = True
    root.setLevel(level)
