"""PCQ questionnaire items at the group and individual levels."""

from dataclasses import dataclass
from typing import Dict, List, Tuple

GROUP = 'group'
INDIVIDUAL = 'individual'
LEVELS = (GROUP, INDIVIDUAL)

POSITIVE = 'positive'
NEGATIVE = 'negative'

LIKERT_MIN = 1
LIKERT_MAX = 5


@dataclass(frozen=True)
class QuestionItem:
    """One five-point Likert item of a PCQ questionnaire."""

    number: int
    orientation: str
    constituent: str
    text: str

    @property
    def item_id(self) -> str:
        return f"item_{self.number}"

    @property
    def is_negative(self) -> bool:
        return self.orientation == NEGATIVE


_GROUP_ITEMS: Tuple[QuestionItem, ...] = (
    QuestionItem(1, POSITIVE, 'nature_of_interaction', 'The interaction within the group seemed smooth, natural and relaxed.'),
    QuestionItem(2, POSITIVE, 'nature_of_interaction', 'The group members seemed to have enjoyed the interaction.'),
    QuestionItem(3, NEGATIVE, 'nature_of_interaction', 'The interaction within the group seemed forced, awkward, and strained.'),
    QuestionItem(4, POSITIVE, 'interpersonal_relationships', 'The group members seemed to have accepted and respected each other.'),
    QuestionItem(5, POSITIVE, 'equal_opportunity', 'The group members seemed to have received equal opportunity to participate freely.'),
    QuestionItem(6, POSITIVE, 'equal_opportunity', 'The interaction involved equal participation from all group members.'),
    QuestionItem(7, POSITIVE, 'interpersonal_relationships', 'The group members seemed to have gotten along with each other pretty well.'),
    QuestionItem(8, POSITIVE, 'interpersonal_relationships', 'The group members were paying attention to their partners throughout.'),
    QuestionItem(9, POSITIVE, 'interpersonal_relationships', 'The group members attempted to get in sync with their partners.'),
    QuestionItem(10, POSITIVE, 'interpersonal_relationships', "The group members used their partner's behavior as a guide for their own."),
)

_INDIVIDUAL_ITEMS: Tuple[QuestionItem, ...] = (
    QuestionItem(1, POSITIVE, 'nature_of_interaction', 'The individual looked like they had a smooth, natural, and relaxed interaction.'),
    QuestionItem(2, POSITIVE, 'nature_of_interaction', 'The individual looked like they enjoyed the interaction.'),
    QuestionItem(3, NEGATIVE, 'nature_of_interaction', "The individual's interaction seemed to be forced, awkward, and strained."),
    QuestionItem(4, POSITIVE, 'nature_of_interaction', 'The individual looked like they had a pleasant and an interesting interaction.'),
    QuestionItem(5, NEGATIVE, 'nature_of_interaction', 'The individual appeared uncomfortable during the interaction.'),
    QuestionItem(6, POSITIVE, 'equal_opportunity', 'The individual attempted to take the lead in the conversation.'),
    QuestionItem(7, POSITIVE, 'equal_opportunity', 'The individual looked like they experienced a free-for-all interaction.'),
    QuestionItem(8, POSITIVE, 'interpersonal_relationships', 'The individual was paying attention to the interaction throughout.'),
    QuestionItem(9, POSITIVE, 'interpersonal_relationships', 'The individual seemed to have gotten along with the group pretty well.'),
    QuestionItem(10, NEGATIVE, 'nature_of_interaction', 'The individual appeared self-conscious during the interaction.'),
)

_CATALOG: Dict[str, Tuple[QuestionItem, ...]] = {
    GROUP: _GROUP_ITEMS,
    INDIVIDUAL: _INDIVIDUAL_ITEMS,
}


def default_items(level: str) -> Tuple[QuestionItem, ...]:
    """Questionnaire items for a level, in questionnaire order."""
    if level not in _CATALOG:
        raise ValueError(f"Unknown annotation level: {level!r}")
    return _CATALOG[level]


def orientations(items) -> List[bool]:
    """Per-item flags, True where the item is negatively oriented."""
    return [item.is_negative for item in items]
