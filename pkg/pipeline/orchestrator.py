"""Main pipeline orchestrator."""

import logging
from contextlib import contextmanager
from typing import Dict, List, Optional, Sequence

import pandas as pd

from analysis.extractor import FeatureExtractor, FeatureTables
from analysis.preprocess import WindowConfig
from config import get_settings
from errors import ConvQError, StageError, ValidationError
from ingest import (
    GROUP,
    INDIVIDUAL,
    cross_validate,
    dataset_summary,
    load_accel,
    load_annotations,
    load_groups,
    load_speaking,
    slice_conversations,
)
from ml.hypothesis import GROUP_PCQ, INDIV_PCQ, hypothesis_grid, sign_agreement
from ml.studies import AGGREGATOR_STUDY, FUSION_STUDY, WINDOW_STUDY, Experiment, run_study, study_conditions, window_label
from reliability import annotation_validity, reliability_report
from reporting.cli_formatter import CLIFormatter
from reporting.json_exporter import JSONExporter
from reporting.table_writer import TableWriter

logger = logging.getLogger(__name__)

STAGES = ('ingest', 'reliability', 'features', 'stats', 'predict')

# annotation level feeding each dependent variable
DEPENDENT_LEVELS = {INDIV_PCQ: INDIVIDUAL, GROUP_PCQ: GROUP}
_UNSET = object()


class PipelineOrchestrator:
    """Orchestrates the complete conversation quality pipeline.

    Each stage writes its tables under ``<output_dir>/<stage>/``. Downstream
    stages reuse cached tables of the same configuration hash and only
    recompute what is missing.
    """

    def __init__(self, settings=None, display: bool = True):
        """Initialize pipeline orchestrator."""
        self.settings = settings or get_settings()
        self.display = display

        # Initialize components
        self.table_writer = TableWriter(self.settings)
        self.json_exporter = JSONExporter(self.settings)
        self.cli_formatter = CLIFormatter()

        self.manifest: Dict[str, object] = {
            'config_hash': self.settings.config_hash(),
            'seed': self.settings.SEED,
            'settings': self.settings.as_dict(),
            'stages': [],
            'failed': {},
            'outputs': [],
        }
        self._data: Optional[Dict[str, object]] = None
        self._reliability: Dict[str, pd.DataFrame] = {}
        self._features: Dict[tuple, FeatureTables] = {}

    @contextmanager
    def _stage(self, name: str):
        logger.info("Stage %s started", name)
        try:
            yield
        except StageError:
            raise
        except Exception as e:
            if isinstance(e, (ConvQError, FileNotFoundError, ValueError)):
                self.manifest['failed'][name] = str(e)
            else:
                logger.exception("Stage %s raised %s", name, type(e).__name__)
                self.manifest['failed'][name] = f"{type(e).__name__}: {e}"
            raise StageError(name, e) from e
        if name not in self.manifest['stages']:
            self.manifest['stages'].append(name)
        logger.info("Stage %s completed", name)

    def _write(self, frame: pd.DataFrame, stage: str, name: str, index: bool = True):
        path = self.table_writer.write(frame, stage, name, index=index)
        self.manifest['outputs'].append(str(path.relative_to(self.table_writer.output_dir)))
        return path

    def _export(self, data: Dict, stage: Optional[str], name: str):
        path = self.json_exporter.export(data, stage, name)
        self.manifest['outputs'].append(str(path.relative_to(self.json_exporter.export_path)))
        return path

    # Stages

    def load_inputs(self) -> Dict[str, object]:
        """Load, slice and cross-check all inputs (memoized)."""
        if self._data is not None:
            return self._data
        s = self.settings
        s.validate()
        s.validate_paths()
        accel = load_accel(s.ACCEL_PATH, s.ACCEL_RATE_HZ, s.CLOCK_RATE_HZ)
        speaking = load_speaking(s.SPEAKING_PATH, s.SPEAKING_RATE_HZ, s.CLOCK_RATE_HZ)
        groups = load_groups(s.GROUPS_PATH)
        annotations = {
            GROUP: load_annotations(s.GROUP_ANNOTATIONS_PATH, GROUP),
            INDIVIDUAL: load_annotations(s.INDIVIDUAL_ANNOTATIONS_PATH, INDIVIDUAL),
        }
        slices = slice_conversations(groups, s.SLICE_LEN_S, s.MIN_DUR_S, s.CLOCK_RATE_HZ)
        if not slices:
            raise ValidationError('no conversation slice is long enough to analyse')
        orphans = cross_validate(groups, accel, speaking, slices, annotations.values())
        self._data = {
            'accel': accel,
            'speaking': speaking,
            'groups': groups,
            'slices': slices,
            'annotations': annotations,
            'orphans': orphans,
        }
        return self._data

    def run_ingest(self) -> Dict[str, object]:
        """Validate inputs, slice groups and write the dataset summary."""
        with self._stage('ingest'):
            data = self.load_inputs()
            summary = dataset_summary(data['groups'], data['slices'], self.settings.CLOCK_RATE_HZ)
            slices = pd.DataFrame([{
                'slice_id': sl.slice_id,
                'group_id': sl.group_id,
                'member_ids': ';'.join(sl.member_ids),
                'cardinality': sl.cardinality,
                'start_t': sl.start_t,
                'end_t': sl.end_t,
                'duration_s': sl.duration_s,
            } for sl in data['slices']])
            self._write(slices, 'ingest', 'slices', index=False)
            self._export({'summary': summary, 'orphans': data['orphans']}, 'ingest', 'summary')
            if self.display:
                self.cli_formatter.display_dataset_summary(summary, data['orphans'])
        return summary

    def run_reliability(self) -> Dict[str, pd.DataFrame]:
        """Agreement, filtering, labels and construct validity per annotation level."""
        s = self.settings
        with self._stage('reliability'):
            annotations = self.load_inputs()['annotations']
            reports = []
            for level in (GROUP, INDIVIDUAL):
                report = reliability_report(annotations[level], s.KAPPA_THRESHOLD, s.BINARIZE_THRESHOLD)
                reports.append(report)
                self._reliability[level] = report.samples
                self._write(report.samples, 'reliability', f"{level}_samples")
                self._write(report.scatter_data(), 'reliability', f"{level}_kappa_scatter")
                self._write(report.scores, 'reliability', f"{level}_scores", index=False)

                try:
                    validity = annotation_validity(annotations[level])
                except ConvQError as e:
                    logger.warning("%s level: construct validity unavailable (%s)", level, e)
                    continue
                self._write(validity.eigen_table(), 'reliability', f"{level}_eigenvalues", index=False)
                self._write(validity.loadings, 'reliability', f"{level}_loadings")
                self._write(validity.scores, 'reliability', f"{level}_pc_scores")
                if self.display:
                    self.cli_formatter.display_validity(level, validity)
            if self.display:
                self.cli_formatter.display_reliability(reports)
        return dict(self._reliability)

    def reliability_samples(self, level: str) -> pd.DataFrame:
        """Per-sample reliability table, from cache when available."""
        if level in self._reliability:
            return self._reliability[level]
        index_col = [0] if level == GROUP else [0, 1]
        cached = self.table_writer.read('reliability', f"{level}_samples", index_col=index_col)
        if cached is None:
            self.run_reliability()
            return self._reliability[level]
        cached['kept'] = cached['kept'].astype(bool)
        self._reliability[level] = cached
        return cached

    def _feature_key(self, window_size: Optional[float], include_raw: bool) -> str:
        label = window_label(window_size)
        return f"window_{label}_raw" if window_size is not None and include_raw else f"window_{label}"

    def feature_tables(
        self,
        window_size=_UNSET,
        include_raw: Optional[bool] = None,
        feature_sets: Optional[Sequence[str]] = None,
    ) -> FeatureTables:
        """Feature matrices for one window size, from cache when available.

        Args:
            window_size: Window length in seconds, None for raw channels
                (default: settings.WINDOW_SIZE_S)
            include_raw: Keep raw channels next to windowed ones
                (default: settings.INCLUDE_RAW_CHANNELS)
            feature_sets: Feature sets (default: settings.FEATURE_SETS)

        Returns:
            FeatureTables
        """
        s = self.settings
        window_size = s.WINDOW_SIZE_S if window_size is _UNSET else window_size
        include_raw = s.INCLUDE_RAW_CHANNELS if include_raw is None else include_raw
        feature_sets = list(feature_sets or s.FEATURE_SETS)
        key = (window_size, include_raw, tuple(feature_sets))
        if key in self._features:
            return self._features[key]

        stage = f"features/{self._feature_key(window_size, include_raw)}"
        if feature_sets != list(s.FEATURE_SETS):
            stage += '_' + '+'.join(feature_sets)
        group = self.table_writer.read(stage, 'group', index_col=[0])
        individual = self.table_writer.read(stage, 'individual', index_col=[0, 1])
        if group is not None and individual is not None:
            logger.info("Using cached features from %s", stage)
            tables = FeatureTables(group, individual)
        else:
            window_cfg = (
                WindowConfig(window_size, s.WINDOW_HOP_S if window_size == s.WINDOW_SIZE_S else None,
                             tuple(s.WINDOW_STATISTICS), s.SPECTRAL_BANDS)
                if window_size is not None else None
            )
            data = self.load_inputs()
            extractor = FeatureExtractor(s, feature_sets, window_cfg=window_cfg, include_raw=include_raw)
            tables = extractor.extract(data['slices'], data['accel'], data['speaking'])
            if tables.group.empty:
                raise ValidationError('feature extraction produced no rows')
            self._write(tables.group, stage, 'group')
            self._write(tables.individual, stage, 'individual')
            if not tables.turns.empty:
                self._write(tables.turns, stage, 'turns', index=False)
        self._features[key] = tables
        return tables

    def run_features(
        self,
        window_size=_UNSET,
        feature_sets: Optional[Sequence[str]] = None,
    ) -> FeatureTables:
        """Extract (or load) the configured feature matrices."""
        with self._stage('features'):
            tables = self.feature_tables(window_size, feature_sets=feature_sets)
            if self.display:
                size = self.settings.WINDOW_SIZE_S if window_size is _UNSET else window_size
                self.cli_formatter.display_features(tables, window_label(size))
        return tables

    def _targets(self, column: str) -> Dict[str, pd.Series]:
        targets = {}
        for dependent, level in DEPENDENT_LEVELS.items():
            samples = self.reliability_samples(level)
            targets[dependent] = samples.loc[samples['kept'], column]
        return targets

    @staticmethod
    def _frames(tables: FeatureTables) -> Dict[str, pd.DataFrame]:
        return {INDIV_PCQ: tables.individual, GROUP_PCQ: tables.group}

    def run_stats(self) -> pd.DataFrame:
        """Hypothesis-test grid on the kept, normalized PCQ scores."""
        s = self.settings
        with self._stage('stats'):
            features = self._frames(self.feature_tables())
            targets = self._targets('normalized_pcq')
            grid = hypothesis_grid(features, targets, s)
            signs = sign_agreement(grid)
            self._write(grid, 'stats', 'hypothesis_grid', index=False)
            self._write(signs, 'stats', 'sign_agreement', index=False)
            if self.display:
                self.cli_formatter.display_hypothesis_grid(grid, s.SIGNIFICANCE)
        return grid

    def _study_tables(self, study: str, dependent: str) -> Dict[Optional[float], pd.DataFrame]:
        s = self.settings
        if study == WINDOW_STUDY:
            return {
                size: self._frames(self.feature_tables(size, include_raw=False))[dependent]
                for size in s.STUDY_WINDOW_SIZES_S
            }
        return {s.WINDOW_SIZE_S: self._frames(self.feature_tables())[dependent]}

    def run_predict(self, studies: Optional[Sequence[str]] = None) -> List[Experiment]:
        """Cross-validated classification studies for both dependent variables.

        A study that cannot run (too few labelled samples, missing features)
        is logged and reported as failed in the manifest; other studies go on.
        """
        s = self.settings
        studies = list(studies or s.STUDIES)
        experiments = []
        with self._stage('predict'):
            labels = self._targets('label')
            for study in studies:
                if study not in (WINDOW_STUDY, FUSION_STUDY, AGGREGATOR_STUDY):
                    raise ValidationError(f"unknown study '{study}'", [study])
                for dependent in (GROUP_PCQ, INDIV_PCQ):
                    name = f"{study}_{dependent}"
                    try:
                        conditions = study_conditions(study, self._study_tables(study, dependent), s)
                        experiment = run_study(study, conditions, labels[dependent], dependent, s)
                    except ConvQError as e:
                        logger.warning("%s study on %s failed: %s", study, dependent, e)
                        self.manifest['failed'][f"predict:{name}"] = str(e)
                        continue
                    experiments.append(experiment)
                    self._write(experiment.ranking(), 'predict', f"{name}_ranking", index=False)
                    self._write(experiment.roc_table(), 'predict', f"{name}_roc", index=False)
                    self._export(experiment.to_dict(), 'predict', name)
                    if self.display:
                        self.cli_formatter.display_study(experiment)
            if not experiments:
                raise ValidationError('no prediction study could be run')
        return experiments

    def run(self, studies: Optional[Sequence[str]] = None) -> Dict[str, object]:
        """Run every stage in order and write the run manifest.

        Returns:
            The manifest: config hash, seed, completed stages, failures and
            output files relative to the output directory
        """
        logger.info("Running pipeline (config %s, seed %d)", self.settings.config_hash(), self.settings.SEED)
        try:
            self.run_ingest()
            self.run_reliability()
            self.run_features()
            self.run_stats()
            self.run_predict(studies)
        finally:
            self.write_manifest()
        return self.manifest

    def write_manifest(self):
        """Write the manifest JSON to the output root."""
        path = self.json_exporter.export_manifest(self.manifest)
        if self.display:
            self.cli_formatter.display_manifest(self.manifest)
        return path
