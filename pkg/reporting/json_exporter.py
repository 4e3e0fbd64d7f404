"""JSON export of run manifests, dataset summaries and study results."""

import json
import logging
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from config import get_settings

logger = logging.getLogger(__name__)


def _default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return None if np.isnan(value) else float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    return str(value)


def _clean(value):
    """Replace NaN floats by None so the output stays valid JSON."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, float) and np.isnan(value):
        return None
    return value


class JSONExporter:
    """Exports pipeline results to JSON files under the output directory."""

    def __init__(self, settings=None, output_dir=None):
        """Initialize JSON exporter."""
        self.settings = settings or get_settings()
        self.export_path = Path(output_dir or self.settings.OUTPUT_DIR)

    def export(self, data: Dict, stage: Optional[str], filename: str) -> Path:
        """Export a dictionary tagged with the configuration hash and seed.

        Args:
            data: JSON-serializable dictionary (numpy values allowed)
            stage: Stage subdirectory, or None for the output root
            filename: File name (``.json`` appended when missing)

        Returns:
            Path to exported JSON file
        """
        if not filename.endswith('.json'):
            filename += '.json'
        directory = self.export_path / stage if stage else self.export_path
        directory.mkdir(parents=True, exist_ok=True)
        filepath = directory / filename

        payload = {'config_hash': self.settings.config_hash(), 'seed': self.settings.SEED}
        payload.update(data)
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(_clean(payload), f, indent=2, sort_keys=True, default=_default)
            f.write('\n')
        logger.debug("Exported %s", filepath)
        return filepath

    def export_manifest(self, manifest: Dict) -> Path:
        """Write the run manifest (stages completed, outputs, settings)."""
        return self.export(manifest, None, 'manifest.json')

    def export_study(self, experiment) -> Path:
        """Write one study's per-condition results."""
        return self.export(experiment.to_dict(), 'predict', f"{experiment.name}_{experiment.dependent}")
