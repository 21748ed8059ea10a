#!/usr/bin/env python3
"""
Relation Miner - TF-IDF cosine similarity between constraint sentences and
classification of pairs as redundant, subsumed or conflicting
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.metrics.pairwise import cosine_similarity

from constraint_filter import ConstraintSentence
from errors import ConfigurationError, RelationError

logger = logging.getLogger(__name__)

# Prefilter slack so float noise in the matrix never hides a pair
_CANDIDATE_EPSILON = 1e-9


class RelationKind:
    """Relation kinds between constraint sentences"""
    CONFLICTING = "conflicting"
    REDUNDANT = "redundant"
    SUBSUMED = "subsumed"

    ALL = (CONFLICTING, REDUNDANT, SUBSUMED)


class Direction:
    """Which side of a subsumed pair is contained in the other"""
    A_SUBSUMED_BY_B = "a_subsumed_by_b"
    B_SUBSUMED_BY_A = "b_subsumed_by_a"


class Scope:
    """Which sentence pairs are compared"""
    ALL_PAIRS = "all_pairs"
    CROSS_DOCUMENT_ONLY = "cross_document_only"
    AGAINST_BASELINE = "against_baseline"

    ALL = (ALL_PAIRS, CROSS_DOCUMENT_ONLY, AGAINST_BASELINE)


@dataclass(frozen=True)
class SentenceVector:
    """Sparse TF-IDF weights of one constraint sentence"""
    sentence_id: str
    weights: Dict[str, float]
    norm: float


@dataclass(frozen=True)
class Relation:
    """Relation between two constraint sentences, stored with a < b"""
    kind: str
    a: str
    b: str
    similarity: float
    direction: Optional[str] = None


@dataclass(frozen=True)
class Thresholds:
    """Similarity thresholds admitting each relation kind"""
    theta_redundant: float = 0.80
    theta_subsumed: float = 0.55
    theta_conflict: float = 0.70
    containment_min: float = 0.90

    def __post_init__(self):
        if not 0 < self.theta_subsumed <= self.theta_conflict <= 1:
            raise ConfigurationError("thresholds need 0 < theta_subsumed <= theta_conflict <= 1",
                                     f"{self.theta_subsumed}, {self.theta_conflict}", module="relation_miner")
        if not self.theta_subsumed <= self.theta_redundant <= 1:
            raise ConfigurationError("thresholds need theta_subsumed <= theta_redundant <= 1",
                                     f"{self.theta_subsumed}, {self.theta_redundant}", module="relation_miner")
        if not 0 < self.containment_min <= 1:
            raise ConfigurationError("containment_min must lie in (0, 1]", self.containment_min,
                                     module="relation_miner")


def _terms_analyzer(terms):
    return terms


def _fit_tfidf(constraints: Sequence[ConstraintSentence]):
    """Raw-count tf times smoothed idf ln((1+N)/(1+df)) + 1, rows not normalized"""
    vectorizer = TfidfVectorizer(analyzer=_terms_analyzer, lowercase=False, norm=None,
                                 use_idf=True, smooth_idf=True, sublinear_tf=False)
    try:
        matrix = vectorizer.fit_transform([list(constraint.terms) for constraint in constraints])
    except ValueError:
        # empty vocabulary: every sentence is a zero vector
        return None, []
    return matrix.tocsr(), vectorizer.get_feature_names_out()


def _to_vectors(constraints: Sequence[ConstraintSentence], matrix, vocabulary) -> List[SentenceVector]:
    vectors = []
    for row_index, constraint in enumerate(constraints):
        weights: Dict[str, float] = {}
        if matrix is not None:
            row = matrix.getrow(row_index)
            weights = {str(vocabulary[column]): float(value) for column, value in zip(row.indices, row.data)}
        norm = math.sqrt(sum(weight * weight for weight in weights.values()))
        vectors.append(SentenceVector(constraint.sentence_id, weights, norm))
    return vectors


def vectorize(constraints: Sequence[ConstraintSentence]) -> List[SentenceVector]:
    """TF-IDF vector per constraint sentence over its modality-neutral terms"""
    if not constraints:
        return []
    matrix, vocabulary = _fit_tfidf(constraints)
    return _to_vectors(constraints, matrix, vocabulary)


def similarity(u: SentenceVector, v: SentenceVector) -> float:
    """Cosine similarity; 0 when either vector is zero"""
    if u.norm == 0 or v.norm == 0:
        return 0.0
    if len(u.weights) > len(v.weights):
        u, v = v, u
    dot = sum(weight * v.weights.get(term, 0.0) for term, weight in u.weights.items())
    return max(0.0, min(1.0, dot / (u.norm * v.norm)))


def containment(small: Set[str], large: Set[str]) -> float:
    """|small & large| / |small|; 0 for an empty set"""
    if not small:
        return 0.0
    return len(small & large) / len(small)


def classify_pair(a: ConstraintSentence, b: ConstraintSentence, sim: float,
                  thresholds: Thresholds) -> Optional[Relation]:
    """Conflicting, then redundant, then subsumed; None when no threshold admits the pair"""
    if a.sentence_id == b.sentence_id:
        raise RelationError("cannot relate a sentence to itself", a.sentence_id)
    if b.sentence_id < a.sentence_id:
        a, b = b, a

    if sim >= thresholds.theta_conflict and a.polarity != b.polarity:
        return Relation(RelationKind.CONFLICTING, a.sentence_id, b.sentence_id, sim)
    if sim >= thresholds.theta_redundant:
        return Relation(RelationKind.REDUNDANT, a.sentence_id, b.sentence_id, sim)
    if sim >= thresholds.theta_subsumed:
        terms_a, terms_b = set(a.terms), set(b.terms)
        a_is_small = len(terms_a) <= len(terms_b)
        small, large = (terms_a, terms_b) if a_is_small else (terms_b, terms_a)
        if containment(small, large) >= thresholds.containment_min:
            direction = Direction.A_SUBSUMED_BY_B if a_is_small else Direction.B_SUBSUMED_BY_A
            return Relation(RelationKind.SUBSUMED, a.sentence_id, b.sentence_id, sim, direction)
    return None


def _in_scope(a: ConstraintSentence, b: ConstraintSentence, scope: str, baseline_docs: Set[str]) -> bool:
    if scope == Scope.ALL_PAIRS:
        return True
    if scope == Scope.CROSS_DOCUMENT_ONLY:
        return a.doc_id != b.doc_id
    return (a.doc_id in baseline_docs) != (b.doc_id in baseline_docs)


def mine_relations(constraints: Sequence[ConstraintSentence], thresholds: Thresholds,
                   scope: str = Scope.ALL_PAIRS, baseline_docs: Optional[Set[str]] = None) -> List[Relation]:
    """Classify every unordered pair in scope; sorted by (kind, a, b)

    The cosine matrix only nominates candidate pairs; each candidate is scored
    again with `similarity` so results do not depend on matrix rounding.
    """
    if scope not in Scope.ALL:
        raise ConfigurationError("unknown relation scope", scope, module="relation_miner")
    baseline_docs = baseline_docs or set()
    if len(constraints) < 2:
        return []

    matrix, vocabulary = _fit_tfidf(constraints)
    if matrix is None:
        return []
    vectors = _to_vectors(constraints, matrix, vocabulary)

    floor = min(thresholds.theta_subsumed, thresholds.theta_conflict, thresholds.theta_redundant)
    scores = cosine_similarity(matrix)
    rows, columns = np.nonzero(np.triu(scores >= floor - _CANDIDATE_EPSILON, k=1))

    relations = []
    for i, j in zip(rows.tolist(), columns.tolist()):
        a, b = constraints[i], constraints[j]
        if not _in_scope(a, b, scope, baseline_docs):
            continue
        relation = classify_pair(a, b, similarity(vectors[i], vectors[j]), thresholds)
        if relation is not None:
            relations.append(relation)

    relations.sort(key=lambda relation: (relation.kind, relation.a, relation.b))
    logger.debug(f"Scored {len(rows)} candidate pairs, kept {len(relations)} relations")
    return relations


class RelationMiner:
    """Mines relations with fixed thresholds and scope"""

    def __init__(self, thresholds: Thresholds, scope: str = Scope.ALL_PAIRS,
                 baseline_docs: Optional[Set[str]] = None):
        self.logger = logging.getLogger(__name__)
        self.thresholds = thresholds
        self.scope = scope
        self.baseline_docs = set(baseline_docs or ())

    def mine(self, constraints: Sequence[ConstraintSentence]) -> List[Relation]:
        relations = mine_relations(constraints, self.thresholds, self.scope, self.baseline_docs)
        counts = {kind: sum(1 for relation in relations if relation.kind == kind) for kind in RelationKind.ALL}
        self.logger.info(f"Mined {len(relations)} relations ({self.scope}): "
                         + ", ".join(f"{kind}={count}" for kind, count in counts.items()))
        return relations
