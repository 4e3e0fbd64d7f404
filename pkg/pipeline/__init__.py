"""Pipeline orchestration module for the conversation quality pipeline."""

from .orchestrator import STAGES, PipelineOrchestrator

__all__ = [
    'STAGES',
    'PipelineOrchestrator',
]
