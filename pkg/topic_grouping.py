#!/usr/bin/env python3
"""
Topic Grouping - Partitions constraint sentences into target groups
(keywords, term frequencies or sentence structure) and computes the
reading-reduction report per target-group selection
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from constraint_filter import ConstraintSentence
from errors import ConfigurationError
from text_normalize import contains_phrase, normalize_phrase

logger = logging.getLogger(__name__)

UNDEFINED = "undefined"


class GroupingMethod:
    """Supported grouping methods"""
    KEYWORD = "keyword"
    TERM_FREQUENCY = "term_frequency"
    STRUCTURE = "structure"

    ALL = (KEYWORD, TERM_FREQUENCY, STRUCTURE)


@dataclass
class GroupSpec:
    """Grouping method and its parameters"""
    method: str = GroupingMethod.TERM_FREQUENCY
    keyword_groups: List[Tuple[str, List[str]]] = field(default_factory=list)
    k: Optional[int] = 5

    def __post_init__(self):
        if self.method not in GroupingMethod.ALL:
            raise ConfigurationError("unknown grouping method", self.method, module="topic_grouping")

        names = [name for name, _ in self.keyword_groups]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ConfigurationError("duplicate group names", ", ".join(duplicates), module="topic_grouping")
        if UNDEFINED in names:
            raise ConfigurationError("group name is reserved", UNDEFINED, module="topic_grouping")

        if self.method == GroupingMethod.KEYWORD:
            if not self.keyword_groups:
                raise ConfigurationError("keyword grouping needs at least one group", module="topic_grouping")
            for name, phrases in self.keyword_groups:
                if not phrases:
                    raise ConfigurationError("keyword group has no phrases", name, module="topic_grouping")
                for phrase in phrases:
                    normalize_phrase(phrase)
        if self.method == GroupingMethod.TERM_FREQUENCY and (self.k is None or self.k < 1):
            raise ConfigurationError("term_frequency grouping needs k >= 1", self.k, module="topic_grouping")

    def normalized_groups(self) -> List[Tuple[str, List[Tuple[str, ...]]]]:
        """Keyword groups with every phrase as a stem sequence"""
        return [(name, [normalize_phrase(phrase) for phrase in phrases]) for name, phrases in self.keyword_groups]


@dataclass
class Partition:
    """Every constraint sentence in exactly one group; 'undefined' always present, last"""
    groups: Dict[str, List[str]]
    total: int

    def sizes(self) -> Dict[str, int]:
        return {name: len(members) for name, members in self.groups.items()}

    def group_of(self, sentence_id: str) -> Optional[str]:
        for name, members in self.groups.items():
            if sentence_id in members:
                return name
        return None

    def assignments(self) -> Dict[str, str]:
        """sentence_id -> group name"""
        return {sentence_id: name for name, members in self.groups.items() for sentence_id in members}

    @classmethod
    def from_assignments(cls, names: Sequence[str], assigned: Sequence[Tuple[str, str]]) -> "Partition":
        """Build a partition with groups in `names` order and 'undefined' last"""
        groups: Dict[str, List[str]] = {name: [] for name in names if name != UNDEFINED}
        groups[UNDEFINED] = []
        for sentence_id, name in assigned:
            groups.setdefault(name, []).append(sentence_id)
        groups[UNDEFINED] = groups.pop(UNDEFINED)
        return cls(groups=groups, total=len(assigned))


@dataclass(frozen=True)
class ReductionRow:
    """Reading reduction for one target-group selection"""
    selection: str
    groups: Tuple[str, ...]
    relevant_count: int
    read_with_undefined: int
    reduction_excl_undefined: int
    reduction_incl_undefined: int


@dataclass
class ReductionReport:
    """Rows per selection plus the constraint total"""
    rows: List[ReductionRow]
    total: int

    def row(self, selection: str) -> ReductionRow:
        for row in self.rows:
            if row.selection == selection:
                return row
        raise KeyError(selection)


def group_by_keywords(constraints: Sequence[ConstraintSentence],
                      keyword_groups: Sequence[Tuple[str, Sequence[Tuple[str, ...]]]]) -> Partition:
    """First matching group in configuration order, else 'undefined'"""
    assigned = []
    for constraint in constraints:
        stems = constraint.tokenized.raw_stems
        target = next(
            (name for name, phrases in keyword_groups if any(contains_phrase(stems, phrase) for phrase in phrases)),
            UNDEFINED,
        )
        assigned.append((constraint.sentence_id, target))
    return Partition.from_assignments([name for name, _ in keyword_groups], assigned)


def rank_seed_terms(constraints: Sequence[ConstraintSentence], k: int) -> List[str]:
    """The k terms with the highest document frequency; ties broken lexicographically"""
    document_frequency = Counter()
    for constraint in constraints:
        document_frequency.update(set(constraint.terms))
    ranked = sorted(document_frequency.items(), key=lambda item: (-item[1], item[0]))
    return [term for term, _ in ranked[:k]]


def group_by_term_frequency(constraints: Sequence[ConstraintSentence], k: int) -> Partition:
    """Assign each sentence to the seed term with maximal TF-IDF weight in it"""
    if k < 1:
        raise ConfigurationError("term_frequency grouping needs k >= 1", k, module="topic_grouping")
    if not constraints:
        return Partition.from_assignments([], [])

    seeds = rank_seed_terms(constraints, k)
    rank = {seed: index for index, seed in enumerate(seeds)}
    total = len(constraints)
    document_frequency = Counter()
    for constraint in constraints:
        document_frequency.update(set(constraint.terms) & rank.keys())
    idf = {seed: math.log(total / document_frequency[seed]) for seed in seeds}

    assigned = []
    for constraint in constraints:
        counts = Counter(term for term in constraint.terms if term in rank)
        if not counts:
            assigned.append((constraint.sentence_id, UNDEFINED))
            continue
        best = min(counts, key=lambda seed: (-counts[seed] * idf[seed], rank[seed]))
        assigned.append((constraint.sentence_id, best))

    logger.debug(f"Term-frequency seeds: {seeds}")
    return Partition.from_assignments(seeds, assigned)


def structure_key(constraint: ConstraintSentence, width: int = 3) -> Optional[str]:
    """Last up-to-`width` content stems before the first signal, joined by '_'"""
    first = constraint.first_signal_position
    tokenized = constraint.tokenized
    before = [stem for stem, position in zip(tokenized.content_stems, tokenized.content_positions)
              if position < first]
    if not before:
        return None
    return "_".join(before[-width:])


def group_by_structure(constraints: Sequence[ConstraintSentence]) -> Partition:
    """Group by the addressee stems fronting the first signal word"""
    assigned = []
    names: List[str] = []
    for constraint in constraints:
        key = structure_key(constraint) or UNDEFINED
        if key != UNDEFINED and key not in names:
            names.append(key)
        assigned.append((constraint.sentence_id, key))
    return Partition.from_assignments(names, assigned)


def _percent_reduction(read: int, total: int) -> int:
    """round(100 * (1 - read / total)) half-up, clamped to [0, 100]"""
    if total <= 0:
        return 0
    value = Fraction(100 * (total - read), total)
    rounded = math.floor(value + Fraction(1, 2))
    return max(0, min(100, rounded))


def reduction_report(partition: Partition, selections: Sequence[Tuple[str, Iterable[str]]],
                     include_undefined_rows: bool = True) -> ReductionReport:
    """Reading reduction per selection, without and with the undefined group

    Counting 'undefined' towards a target group is the maximum assumption: every
    unmatched constraint might concern it. A selection that names 'undefined'
    (allowed with include_undefined_rows) counts that group once.
    """
    sizes = partition.sizes()
    undefined = sizes.get(UNDEFINED, 0)

    if not selections:
        selections = [(name, [name]) for name, size in sizes.items()
                      if name != UNDEFINED or (include_undefined_rows and size)]

    rows = []
    for name, groups in selections:
        selected = tuple(dict.fromkeys(groups))
        for group in selected:
            if group not in sizes:
                raise ConfigurationError(f"selection '{name}' names an unknown group", group,
                                         module="topic_grouping")
            if group == UNDEFINED and not include_undefined_rows:
                raise ConfigurationError(f"selection '{name}' may not name the undefined group", group,
                                         module="topic_grouping")

        relevant = sum(sizes[group] for group in selected)
        read_with_undefined = relevant if UNDEFINED in selected else relevant + undefined
        rows.append(ReductionRow(
            selection=name,
            groups=selected,
            relevant_count=relevant,
            read_with_undefined=read_with_undefined,
            reduction_excl_undefined=_percent_reduction(relevant, partition.total),
            reduction_incl_undefined=_percent_reduction(read_with_undefined, partition.total),
        ))
    return ReductionReport(rows=rows, total=partition.total)


class TopicGrouper:
    """Dispatches to the configured grouping method"""

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self.logger = logging.getLogger(__name__)
        self._keyword_groups = spec.normalized_groups() if spec.method == GroupingMethod.KEYWORD else []

    def group(self, constraints: Sequence[ConstraintSentence]) -> Partition:
        if self.spec.method == GroupingMethod.KEYWORD:
            partition = group_by_keywords(constraints, self._keyword_groups)
        elif self.spec.method == GroupingMethod.TERM_FREQUENCY:
            partition = group_by_term_frequency(constraints, self.spec.k)
        else:
            partition = group_by_structure(constraints)

        sizes = ", ".join(f"{name}={size}" for name, size in partition.sizes().items())
        self.logger.info(f"Grouped {partition.total} constraints by {self.spec.method}: {sizes}")
        return partition
