#!/usr/bin/env python3
"""
Constraint Filter - Identifies constraint sentences by deontic signal words
and annotates each with its signal hits and polarity
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

from errors import ConfigurationError
from text_normalize import Token, TokenizedSentence, tokenize

logger = logging.getLogger(__name__)

DEFAULT_SIGNALS = [
    "shall", "should", "must", "may", "will", "have to", "has to", "need to", "needs to",
    "required to", "obliged to", "prohibited", "ought to",
]
DEFAULT_NEGATORS = ["not", "never", "no"]
DEFAULT_WINDOW = 3


class Polarity:
    """Polarity values of a constraint sentence"""
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass
class SignalLexicon:
    """Signal phrases plus negators checked within `window` tokens after a signal"""
    signals: List[str] = field(default_factory=lambda: list(DEFAULT_SIGNALS))
    negators: List[str] = field(default_factory=lambda: list(DEFAULT_NEGATORS))
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if not self.signals:
            raise ConfigurationError("signal lexicon is empty", module="constraint_filter")
        if self.window < 1:
            raise ConfigurationError("negator window must be >= 1", self.window, module="constraint_filter")

        self._phrases: List[Tuple[str, Tuple[str, ...]]] = []
        for signal in self.signals:
            tokens = tuple(token.text for token in tokenize(signal))
            if not tokens or signal != signal.lower():
                raise ConfigurationError("signal phrases must be non-empty lowercase words", repr(signal),
                                         module="constraint_filter")
            self._phrases.append((signal, tokens))
        self._negators = frozenset(word.lower() for word in self.negators)

    @property
    def phrases(self) -> List[Tuple[str, Tuple[str, ...]]]:
        return self._phrases

    def is_negator(self, token: str) -> bool:
        return token in self._negators

    def validate(self, stopwords: Iterable[str]) -> None:
        """Signals are never stopwords"""
        overlap = sorted(set(self.signals) & {word.lower() for word in stopwords})
        if overlap:
            raise ConfigurationError("signal words must not appear in the stopword list", ", ".join(overlap))


@dataclass(frozen=True)
class ConstraintSentence:
    """Sentence with at least one signal hit"""
    sentence_id: str
    doc_id: str
    tokenized: TokenizedSentence
    signal_hits: Tuple[Tuple[str, int], ...]
    polarity: str

    @property
    def text(self) -> str:
        return self.tokenized.text

    @property
    def first_signal_position(self) -> int:
        return min(position for _, position in self.signal_hits)

    @property
    def terms(self) -> Tuple[str, ...]:
        """Content stems without the tokens covered by signal hits"""
        covered = set()
        for signal, position in self.signal_hits:
            covered.update(range(position, position + _signal_width(signal)))
        return tuple(
            stem for stem, position in zip(self.tokenized.content_stems, self.tokenized.content_positions)
            if position not in covered
        )


@lru_cache(maxsize=None)
def _signal_width(signal: str) -> int:
    return len(tokenize(signal))


def find_signal_hits(sentence: TokenizedSentence, lexicon: SignalLexicon) -> List[Tuple[str, int]]:
    """Every contiguous raw-token match of a signal phrase with its start position"""
    words = [token.text for token in sentence.raw_tokens]
    hits = []
    for start in range(len(words)):
        for signal, tokens in lexicon.phrases:
            if tuple(words[start:start + len(tokens)]) == tokens:
                hits.append((signal, start))
    return hits


def polarity_of(tokens: Sequence[Token], hits: Sequence[Tuple[str, int]], lexicon: SignalLexicon) -> str:
    """Negative iff a negator follows some signal within the window"""
    for signal, position in hits:
        last = position + _signal_width(signal) - 1
        for token in tokens[last + 1:last + 1 + lexicon.window]:
            if lexicon.is_negator(token.text):
                return Polarity.NEGATIVE
    return Polarity.POSITIVE


def filter_constraints(sentences: Iterable[TokenizedSentence], lexicon: SignalLexicon) -> List[ConstraintSentence]:
    """Keep exactly the sentences with a signal hit, in input order"""
    constraints = []
    dropped = 0
    for sentence in sentences:
        hits = find_signal_hits(sentence, lexicon)
        if not hits:
            dropped += 1
            continue
        constraints.append(ConstraintSentence(
            sentence_id=sentence.sentence_id,
            doc_id=sentence.doc_id,
            tokenized=sentence,
            signal_hits=tuple(hits),
            polarity=polarity_of(sentence.raw_tokens, hits, lexicon),
        ))

    logger.debug(f"Signal filter kept {len(constraints)} sentences, dropped {dropped}")
    return constraints
