"""Delimited table output tagged with the configuration hash and seed."""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from config import get_settings

logger = logging.getLogger(__name__)


class TableWriter:
    """Writes and reads stage tables under ``<output_dir>/<stage>/``."""

    def __init__(self, settings=None, output_dir=None):
        """Initialize table writer."""
        self.settings = settings or get_settings()
        self.output_dir = Path(output_dir or self.settings.OUTPUT_DIR)
        self.written: List[Path] = []

    @property
    def header(self) -> str:
        return f"# config_hash={self.settings.config_hash()} seed={self.settings.SEED}\n"

    def path(self, stage: str, name: str) -> Path:
        if not name.endswith('.csv'):
            name += '.csv'
        return self.output_dir / stage / name

    def write(self, frame: pd.DataFrame, stage: str, name: str, index: bool = True) -> Path:
        """Write a table with a one-line comment header.

        Args:
            frame: Table to write
            stage: Stage directory name
            name: File name (``.csv`` appended when missing)
            index: Write the index columns

        Returns:
            Path of the written file
        """
        path = self.path(stage, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(self.header)
            frame.to_csv(f, index=index, lineterminator='\n')
        self.written.append(path)
        logger.debug("Wrote %s (%d rows)", path, len(frame))
        return path

    @staticmethod
    def read_header(path) -> dict:
        """Key/value pairs of a table's comment header."""
        with open(path, encoding='utf-8') as f:
            first = f.readline().strip()
        if not first.startswith('#'):
            return {}
        pairs = (part.split('=', 1) for part in first.lstrip('#').split() if '=' in part)
        return {k: v for k, v in pairs}

    def read(self, stage: str, name: str, index_col: Optional[Sequence[int]] = None) -> Optional[pd.DataFrame]:
        """Cached table of this configuration, or None when absent or stale."""
        path = self.path(stage, name)
        if not path.exists():
            return None
        if self.read_header(path).get('config_hash') != self.settings.config_hash():
            logger.info("Ignoring stale cached table %s", path)
            return None
        frame = pd.read_csv(path, comment='#')
        if index_col is not None:
            keys = [frame.columns[i] for i in index_col]
            frame[keys] = frame[keys].astype(str)
            frame = frame.set_index(keys)
        return frame
