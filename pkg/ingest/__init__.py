"""Data model, loaders and thin-slicing for conversation recordings."""

from .models import AccelRecording, AnnotationSet, ConversationGroup, ConversationSlice, SpeakingStatus
from .questionnaire import GROUP, INDIVIDUAL, QuestionItem, default_items
from .loaders import (
    cross_validate,
    load_accel,
    load_annotations,
    load_groups,
    load_speaking,
    write_accel,
    write_annotations,
    write_groups,
    write_speaking,
)
from .slicing import dataset_summary, slice_conversations

__all__ = [
    'AccelRecording',
    'AnnotationSet',
    'ConversationGroup',
    'ConversationSlice',
    'SpeakingStatus',
    'GROUP',
    'INDIVIDUAL',
    'QuestionItem',
    'default_items',
    'cross_validate',
    'load_accel',
    'load_annotations',
    'load_groups',
    'load_speaking',
    'write_accel',
    'write_annotations',
    'write_groups',
    'write_speaking',
    'dataset_summary',
    'slice_conversations',
]
