"""Tests for TF-IDF similarity and relation classification"""

import math
import random
from collections import Counter

import pytest

from errors import ConfigurationError, RelationError
from relation_miner import (Direction, Relation, RelationKind, RelationMiner, Scope, SentenceVector, Thresholds,
                            classify_pair, containment, mine_relations, similarity, vectorize)
from tests.conftest import GDPR_ARTICLE_SENTENCE, GDPR_RECITAL_SENTENCE, make_constraints
from text_normalize import stem

SHORT_RECORDS = "The controller shall keep records."
LONG_RECORDS = "The controller shall keep records of processing activities carried out."

WORDS = ["controller", "processor", "records", "breach", "consent", "authority"]


def _pair_similarity(texts, stopwords):
    constraints = make_constraints(texts, stopwords)
    u, v = vectorize(constraints)
    return constraints, similarity(u, v)


def test_vectorize_single_sentence(default_stopwords):
    vector = vectorize(make_constraints(["Controller shall comply."], default_stopwords))[0]
    assert vector.weights == {stem("controller"): pytest.approx(1.0), stem("comply"): pytest.approx(1.0)}


def test_vectorize_all_stopword_sentence(default_stopwords):
    vectors = vectorize(make_constraints(["It shall be so.", "Controllers shall comply."], default_stopwords))
    assert vectors[0].weights == {}
    assert vectors[0].norm == 0


def test_vectorize_only_stopwords_everywhere(default_stopwords):
    vectors = vectorize(make_constraints(["It shall be so."], default_stopwords))
    assert vectors[0].norm == 0
    assert vectorize([]) == []


def test_identical_sentences_have_identical_vectors(default_stopwords):
    u, v = vectorize(make_constraints([SHORT_RECORDS, SHORT_RECORDS], default_stopwords))
    assert u.weights == v.weights
    assert similarity(u, v) == pytest.approx(1.0)


def test_similarity_properties():
    u = SentenceVector("a", {"x": 1.0, "y": 2.0}, math.sqrt(5))
    v = SentenceVector("b", {"y": 1.0, "z": 3.0}, math.sqrt(10))
    w = SentenceVector("c", {"q": 1.0}, 1.0)
    zero = SentenceVector("d", {}, 0.0)

    assert similarity(u, u) == pytest.approx(1.0)
    assert similarity(u, v) == similarity(v, u) == pytest.approx(2 / math.sqrt(50))
    assert similarity(u, w) == 0.0
    assert similarity(u, zero) == 0.0
    assert similarity(zero, zero) == 0.0


def test_gdpr_pair_is_redundant(default_stopwords):
    constraints, sim = _pair_similarity([GDPR_RECITAL_SENTENCE, GDPR_ARTICLE_SENTENCE], default_stopwords)
    assert sim == pytest.approx(0.8266, abs=1e-3)

    relation = classify_pair(constraints[0], constraints[1], sim, Thresholds())
    assert relation == Relation(RelationKind.REDUNDANT, "doc:0:0", "doc:1:0", sim)


def test_subsumed_pair_has_direction(default_stopwords):
    constraints, sim = _pair_similarity([SHORT_RECORDS, LONG_RECORDS], default_stopwords)
    assert 0.55 <= sim < 0.70

    relation = classify_pair(constraints[1], constraints[0], sim, Thresholds())
    assert relation.kind == RelationKind.SUBSUMED
    assert (relation.a, relation.b) == ("doc:0:0", "doc:1:0")
    assert relation.direction == Direction.A_SUBSUMED_BY_B


def test_conflicting_pair(default_stopwords):
    texts = [SHORT_RECORDS, "The controller shall not keep records."]
    constraints, sim = _pair_similarity(texts, default_stopwords)
    assert sim == pytest.approx(1.0)
    assert classify_pair(constraints[0], constraints[1], sim, Thresholds()).kind == RelationKind.CONFLICTING


def test_conflict_takes_precedence_over_redundant(default_stopwords):
    constraints = make_constraints([SHORT_RECORDS, "The controller shall not keep records."], default_stopwords)
    relation = classify_pair(constraints[0], constraints[1], 0.95, Thresholds())
    assert relation.kind == RelationKind.CONFLICTING
    relation = classify_pair(constraints[0], constraints[1], 0.75, Thresholds(theta_conflict=0.9))
    assert relation is None or relation.kind != RelationKind.CONFLICTING


def test_below_every_threshold_is_no_relation(default_stopwords):
    constraints = make_constraints([SHORT_RECORDS, LONG_RECORDS], default_stopwords)
    assert classify_pair(constraints[0], constraints[1], 0.5, Thresholds()) is None


def test_classify_rejects_self_pair(default_stopwords):
    constraint = make_constraints([SHORT_RECORDS], default_stopwords)[0]
    with pytest.raises(RelationError) as excinfo:
        classify_pair(constraint, constraint, 1.0, Thresholds())
    assert str(excinfo.value) == "[relation_miner] cannot relate a sentence to itself: doc:0:0"


def test_containment():
    assert containment({"a", "b"}, {"a", "b", "c"}) == 1.0
    assert containment({"a", "d"}, {"a", "b"}) == 0.5
    assert containment(set(), {"a"}) == 0.0


def test_threshold_validation():
    with pytest.raises(ConfigurationError):
        Thresholds(theta_subsumed=0.9, theta_redundant=0.8)
    with pytest.raises(ConfigurationError):
        Thresholds(theta_subsumed=0.8, theta_conflict=0.7)
    with pytest.raises(ConfigurationError):
        Thresholds(containment_min=0)
    with pytest.raises(ConfigurationError):
        Thresholds(theta_subsumed=0)


def test_mine_gdpr_pair(default_stopwords):
    constraints = make_constraints([GDPR_RECITAL_SENTENCE, GDPR_ARTICLE_SENTENCE], default_stopwords)
    relations = mine_relations(constraints, Thresholds())
    assert [(r.kind, r.a, r.b) for r in relations] == [(RelationKind.REDUNDANT, "doc:0:0", "doc:1:0")]


def test_mine_identical_copies(default_stopwords):
    constraints = make_constraints([SHORT_RECORDS] * 4, default_stopwords)
    relations = mine_relations(constraints, Thresholds())
    assert len(relations) == 6
    assert {r.kind for r in relations} == {RelationKind.REDUNDANT}


def test_mine_small_inputs(default_stopwords):
    assert mine_relations([], Thresholds()) == []
    assert mine_relations(make_constraints([SHORT_RECORDS], default_stopwords), Thresholds()) == []
    assert mine_relations(make_constraints(["It shall be so.", "It will be."], default_stopwords), Thresholds()) == []


def test_mine_unknown_scope(default_stopwords):
    with pytest.raises(ConfigurationError):
        mine_relations(make_constraints([SHORT_RECORDS] * 2, default_stopwords), Thresholds(), scope="nearby")


def test_cross_document_scope_on_disjoint_documents(default_stopwords):
    first = make_constraints(["The controller shall keep records."], default_stopwords, doc_id="one")
    second = make_constraints(["Supervisory authorities may impose fines."], default_stopwords, doc_id="two")
    assert mine_relations(first + second, Thresholds(), Scope.CROSS_DOCUMENT_ONLY) == []


def test_scopes_only_remove_pairs(default_stopwords):
    texts = [SHORT_RECORDS, LONG_RECORDS, "The controller shall not keep records."]
    constraints = (make_constraints(texts, default_stopwords, doc_id="base")
                   + make_constraints(texts, default_stopwords, doc_id="new"))
    everything = set(mine_relations(constraints, Thresholds()))
    cross = set(mine_relations(constraints, Thresholds(), Scope.CROSS_DOCUMENT_ONLY))
    baseline = set(mine_relations(constraints, Thresholds(), Scope.AGAINST_BASELINE, {"base"}))

    assert cross <= everything
    assert baseline <= everything
    assert all(r.a.split(":")[0] != r.b.split(":")[0] for r in cross)
    assert baseline == cross
    assert len(everything) == 7
    assert len(cross) == 5


def test_relations_are_sorted_and_canonical(default_stopwords):
    constraints = make_constraints([SHORT_RECORDS, LONG_RECORDS, "The controller shall not keep records.",
                                    SHORT_RECORDS], default_stopwords)
    relations = RelationMiner(Thresholds()).mine(constraints)
    assert relations == sorted(relations, key=lambda r: (r.kind, r.a, r.b))
    assert all(r.a < r.b for r in relations)
    assert all((r.direction is not None) == (r.kind == RelationKind.SUBSUMED) for r in relations)


def test_raising_redundant_threshold_never_adds_relations(default_stopwords):
    constraints = make_constraints([SHORT_RECORDS, LONG_RECORDS, GDPR_RECITAL_SENTENCE, GDPR_ARTICLE_SENTENCE,
                                    "The controller shall not keep records."], default_stopwords)
    vectors = vectorize(constraints)
    for i in range(len(constraints)):
        for j in range(i + 1, len(constraints)):
            sim = similarity(vectors[i], vectors[j])
            low = classify_pair(constraints[i], constraints[j], sim, Thresholds(theta_redundant=0.8))
            high = classify_pair(constraints[i], constraints[j], sim, Thresholds(theta_redundant=0.95))
            if low is None:
                assert high is None


def _oracle_relations(constraints, thresholds):
    """Brute-force TF-IDF cosine and classification"""
    total = len(constraints)
    document_frequency = Counter()
    for constraint in constraints:
        document_frequency.update(set(constraint.terms))
    vocabulary = sorted(document_frequency)
    idf = {term: math.log((1 + total) / (1 + document_frequency[term])) + 1 for term in vocabulary}

    dense = []
    for constraint in constraints:
        counts = Counter(constraint.terms)
        dense.append([counts[term] * idf[term] for term in vocabulary])

    def cosine(u, v):
        nu = math.sqrt(sum(x * x for x in u))
        nv = math.sqrt(sum(x * x for x in v))
        if nu == 0 or nv == 0:
            return 0.0
        return min(1.0, sum(x * y for x, y in zip(u, v)) / (nu * nv))

    results = {}
    borderline = set()
    cuts = (thresholds.theta_redundant, thresholds.theta_subsumed, thresholds.theta_conflict)
    for i in range(total):
        for j in range(i + 1, total):
            a, b = sorted((constraints[i], constraints[j]), key=lambda c: c.sentence_id)
            sim = cosine(dense[i], dense[j])
            key = (a.sentence_id, b.sentence_id)
            if any(abs(sim - cut) < 1e-9 for cut in cuts):
                borderline.add(key)
                continue
            outcome = None
            if sim >= thresholds.theta_conflict and a.polarity != b.polarity:
                outcome = (RelationKind.CONFLICTING, None)
            elif sim >= thresholds.theta_redundant:
                outcome = (RelationKind.REDUNDANT, None)
            elif sim >= thresholds.theta_subsumed:
                ta, tb = set(a.terms), set(b.terms)
                if ta and len(ta) <= len(tb) and len(ta & tb) / len(ta) >= thresholds.containment_min:
                    outcome = (RelationKind.SUBSUMED, Direction.A_SUBSUMED_BY_B)
                elif tb and len(tb) < len(ta) and len(ta & tb) / len(tb) >= thresholds.containment_min:
                    outcome = (RelationKind.SUBSUMED, Direction.B_SUBSUMED_BY_A)
            if outcome:
                results[key] = (outcome[0], outcome[1], sim)
    return results, borderline


def _random_corpus(rng):
    texts = []
    for _ in range(rng.randint(2, 20)):
        words = [rng.choice(WORDS) for _ in range(rng.randint(1, 4))]
        negation = " not" if rng.random() < 0.3 else ""
        texts.append(f"The {words[0]} shall{negation} {' '.join(words[1:])}.")
    return texts


def test_mining_matches_brute_force_oracle(default_stopwords):
    rng = random.Random(20240501)
    thresholds = Thresholds()
    for _ in range(200):
        constraints = make_constraints(_random_corpus(rng), default_stopwords)
        expected, borderline = _oracle_relations(constraints, thresholds)
        mined = {(r.a, r.b): r for r in mine_relations(constraints, thresholds)}

        for key in set(expected) | set(mined):
            if key in borderline:
                continue
            assert key in expected and key in mined, key
            kind, direction, sim = expected[key]
            assert mined[key].kind == kind
            assert mined[key].direction == direction
            assert mined[key].similarity == pytest.approx(sim, abs=1e-9)


def test_mining_is_deterministic(default_stopwords):
    rng = random.Random(7)
    constraints = make_constraints(_random_corpus(rng), default_stopwords)
    assert mine_relations(constraints, Thresholds()) == mine_relations(constraints, Thresholds())
