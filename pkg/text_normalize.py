#!/usr/bin/env python3
"""
Text Normalize - Tokenization, stopword removal and Porter stemming
Produces the normalized token forms used by filtering, grouping and similarity
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, List, NamedTuple, Sequence, Set, Tuple, Union

from nltk.stem.porter import PorterStemmer

from errors import ConfigurationError

if TYPE_CHECKING:
    from corpus_ingest import Sentence

logger = logging.getLogger(__name__)

# Maximal letter/digit runs; internal hyphens and apostrophes stay inside the token
TOKEN_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


class Token(NamedTuple):
    """Lowercased word token and its 0-based position in the sentence"""
    text: str
    position: int


@dataclass(frozen=True)
class TokenizedSentence:
    """Normalized forms of one segmented sentence"""
    sentence_id: str
    doc_id: str
    text: str
    raw_tokens: Tuple[Token, ...]
    raw_stems: Tuple[str, ...]
    content_stems: Tuple[str, ...]
    content_positions: Tuple[int, ...]
    stem_multiset: Counter = field(compare=False, hash=False, repr=False)


def tokenize(text: str) -> List[Token]:
    """Split text into lowercased tokens with positions; punctuation is dropped"""
    return [Token(match.group(0).lower(), index) for index, match in enumerate(TOKEN_RE.finditer(text))]


def remove_stopwords(tokens: Sequence[Token], stopwords: Set[str]) -> List[Token]:
    """Keep all and only the non-stopword tokens, order preserved"""
    return [token for token in tokens if token.text not in stopwords]


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Porter stem of an alphabetic token; tokens containing digits pass through"""
    if any(char.isdigit() for char in token):
        return token
    return _stemmer.stem(token)


def normalize_phrase(phrase: str) -> Tuple[str, ...]:
    """Stem sequence of a keyword phrase; stopwords are kept inside phrases"""
    stems = tuple(stem(token.text) for token in tokenize(phrase))
    if not stems:
        raise ConfigurationError("phrase is empty after tokenization", repr(phrase), module="text_normalize")
    return stems


def contains_phrase(stems: Sequence[str], phrase: Sequence[str]) -> bool:
    """True when phrase occurs as a contiguous subsequence of stems"""
    width = len(phrase)
    if width == 0 or width > len(stems):
        return False
    target = tuple(phrase)
    first = target[0]
    for start in range(len(stems) - width + 1):
        if stems[start] == first and tuple(stems[start:start + width]) == target:
            return True
    return False


def load_stopwords(path: Union[str, Path]) -> Set[str]:
    """Read a stopword list: one token per line, '#' starts a comment"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError("stopword list not found", str(path), module="text_normalize")

    stopwords = set()
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            entry = line.split('#', 1)[0].strip().lower()
            if entry:
                stopwords.add(entry)

    logger.debug(f"Loaded {len(stopwords)} stopwords from {path}")
    return stopwords


class TextNormalizer:
    """Applies tokenize -> remove_stopwords -> stem to segmented sentences"""

    def __init__(self, stopwords: Iterable[str]):
        self.logger = logging.getLogger(__name__)
        self.stopwords = frozenset(word.lower() for word in stopwords)

    def normalize(self, sentence: "Sentence") -> TokenizedSentence:
        """Build the TokenizedSentence of one segmented sentence"""
        tokens = tuple(tokenize(sentence.text))
        raw_stems = tuple(stem(token.text) for token in tokens)
        content = remove_stopwords(tokens, self.stopwords)
        content_stems = tuple(raw_stems[token.position] for token in content)

        return TokenizedSentence(
            sentence_id=sentence.sentence_id,
            doc_id=sentence.doc_id,
            text=sentence.text,
            raw_tokens=tokens,
            raw_stems=raw_stems,
            content_stems=content_stems,
            content_positions=tuple(token.position for token in content),
            stem_multiset=Counter(content_stems),
        )

    def normalize_all(self, sentences: Sequence["Sentence"]) -> List[TokenizedSentence]:
        """Normalize a batch of sentences in order"""
        tokenized = [self.normalize(sentence) for sentence in sentences]
        empty = sum(1 for item in tokenized if not item.content_stems)
        if empty:
            self.logger.debug(f"{empty} sentences have no content stems after stopword removal")
        return tokenized
