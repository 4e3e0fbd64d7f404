"""Synthetic mingling datasets with planted ground truth."""

from .scenario import LABEL_RULES, ScenarioConfig
from .generators import (
    GroupPlan,
    SynthDataset,
    TurnScript,
    ar1,
    gen_coupled_pair,
    gen_turn_sequence,
    gen_mini_mingle,
    plan_groups,
    rate_items,
    write_dataset,
)

__all__ = [
    'LABEL_RULES',
    'ScenarioConfig',
    'GroupPlan',
    'SynthDataset',
    'TurnScript',
    'ar1',
    'gen_coupled_pair',
    'gen_turn_sequence',
    'gen_mini_mingle',
    'plan_groups',
    'rate_items',
    'write_dataset',
]
