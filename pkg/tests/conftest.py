"""Shared fixtures for the ConRelMiner test suite"""

import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import pytest

from constraint_filter import ConstraintSentence, SignalLexicon, filter_constraints
from corpus_ingest import Sentence
from text_normalize import TextNormalizer, load_stopwords

REPO_DIR = Path(__file__).resolve().parent.parent

# Two direct-marketing sentences of the GDPR (recital 70 and Art. 21(2))
GDPR_RECITAL_SENTENCE = (
    "Where personal data are processed for the purposes of direct marketing, the data subject "
    "should have the right to object to such processing, including profiling to the extent that "
    "it is related to such direct marketing, whether with regard to initial or further processing, "
    "at any time and free of charge."
)
GDPR_ARTICLE_SENTENCE = (
    "Where personal data are processed for direct marketing purposes, the data subject shall have "
    "the right to object at any time to processing of personal data concerning him or her for such "
    "marketing, which includes profiling to the extent that it is related to such direct marketing."
)


@pytest.fixture(scope="session")
def default_stopwords():
    return load_stopwords(REPO_DIR / "config" / "stopwords.txt")


@pytest.fixture
def lexicon():
    return SignalLexicon()


@pytest.fixture(scope="session")
def gdpr_profile():
    with open(REPO_DIR / "profiles" / "gdpr.json", encoding="utf-8") as f:
        return json.load(f)


def make_sentences(texts: Sequence[str], doc_id: str = "doc", start: int = 0) -> List[Sentence]:
    """One fragment per text, one sentence per fragment"""
    return [
        Sentence(f"{doc_id}:{start + index}:0", doc_id, start + index, 0, text, (0, len(text)))
        for index, text in enumerate(texts)
    ]


def make_constraints(texts: Sequence[str], stopwords: Iterable[str], doc_id: str = "doc",
                     lexicon: Optional[SignalLexicon] = None, start: int = 0) -> List[ConstraintSentence]:
    normalizer = TextNormalizer(stopwords)
    tokenized = normalizer.normalize_all(make_sentences(texts, doc_id, start))
    return filter_constraints(tokenized, lexicon or SignalLexicon())
