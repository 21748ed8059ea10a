#!/usr/bin/env python3
"""
Corpus Ingest - Loads regulatory documents, fragments them along structural
markers and segments fragments into sentences with stable identifiers
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Pattern, Set, Tuple

import requests

from errors import ConfigurationError, DocumentEncodingError, EmptyDocumentError
from text_normalize import tokenize

logger = logging.getLogger(__name__)

_BLANK_LINES_RE = re.compile(r"\n[ \t]*\n\s*")
_TERMINATOR_RE = re.compile(r"[.?!][\"')\]’”]*(\s+)")
_OPENING_CHARS = "\"'([‘“"


@dataclass(frozen=True)
class Document:
    """One regulatory document as decoded text"""
    doc_id: str
    source_name: str
    raw_text: str


@dataclass(frozen=True)
class Fragment:
    """Structural piece of a document (paragraph, article, recital)"""
    doc_id: str
    fragment_index: int
    heading: Optional[str]
    text: str


@dataclass(frozen=True)
class Sentence:
    """Segmented sentence with provenance"""
    sentence_id: str
    doc_id: str
    fragment_index: int
    sentence_index: int
    text: str
    char_span: Tuple[int, int]


@dataclass
class FragmentationRules:
    """Marker patterns (matched at line starts) and the blank-line paragraph rule"""
    markers: List[str] = field(default_factory=list)
    blank_line_paragraphs: bool = True

    def __post_init__(self):
        self._compiled = []
        for pattern in self.markers:
            try:
                self._compiled.append(re.compile(pattern))
            except re.error as e:
                raise ConfigurationError(f"invalid marker pattern ({e})", pattern, module="corpus_ingest")
        if not self.markers and not self.blank_line_paragraphs:
            raise ConfigurationError("fragmentation needs a marker pattern or the blank-line rule",
                                     module="corpus_ingest")

    @property
    def compiled(self) -> List[Pattern]:
        return self._compiled


def read_source(source: str, timeout: float = 30.0) -> bytes:
    """Read raw bytes from a file path or an http(s) URL"""
    if source.startswith(('http://', 'https://')):
        try:
            response = requests.get(source, timeout=timeout)
            response.raise_for_status()
        except requests.RequestException as e:
            raise ConfigurationError(f"could not fetch input ({e})", source, module="corpus_ingest")
        logger.info(f"Fetched {len(response.content)} bytes from {source}")
        return response.content

    path = Path(source)
    if not path.is_file():
        raise ConfigurationError("input file not found", source, module="corpus_ingest")
    return path.read_bytes()


def load_document(data: bytes, doc_id: str, source_name: str = "<stream>", lossy: bool = False) -> Document:
    """Decode a UTF-8 byte stream into a Document with LF line endings"""
    if not data:
        raise EmptyDocumentError("empty document", source_name)

    try:
        text = data.decode('utf-8', errors='replace' if lossy else 'strict')
    except UnicodeDecodeError as e:
        raise DocumentEncodingError(f"undecodable UTF-8 at byte offset {e.start}", source_name, offset=e.start)

    if lossy and '�' in text:
        logger.warning(f"Replaced undecodable bytes in {source_name}")

    text = text.replace('\r\n', '\n').replace('\r', '\n')
    logger.debug(f"Loaded document {doc_id} from {source_name} ({len(text)} chars)")
    return Document(doc_id=doc_id, source_name=source_name, raw_text=text)


def _paragraph_slices(text: str) -> List[str]:
    """Split on blank-line runs, dropping whitespace-only pieces"""
    return [piece for piece in _BLANK_LINES_RE.split(text) if piece.strip()]


def fragment(doc: Document, rules: FragmentationRules) -> List[Fragment]:
    """Split a document into ordered fragments along the configured markers"""
    text = doc.raw_text
    if not text.strip():
        return []

    # (heading, body) sections; a marker consumes only its matched text
    sections: List[Tuple[Optional[str], str]] = []
    if rules.compiled:
        heading: Optional[str] = None
        body_start = 0
        offset = 0
        for line in text.splitlines(keepends=True):
            match = next((m for m in (p.match(line) for p in rules.compiled) if m and m.group(0)), None)
            if match:
                sections.append((heading, text[body_start:offset]))
                heading = match.group(0).strip()
                body_start = offset + match.end()
            offset += len(line)
        sections.append((heading, text[body_start:]))
        if sections[0][0] is None and not sections[0][1].strip():
            sections.pop(0)
    else:
        sections.append((None, text))

    fragments: List[Fragment] = []
    for heading, body in sections:
        if rules.blank_line_paragraphs:
            pieces = _paragraph_slices(body)
            # a heading line standing alone is a paragraph of its own
            if heading is not None and not _BLANK_LINES_RE.split(body, maxsplit=1)[0].strip():
                pieces.insert(0, "")
        else:
            pieces = [body] if body.strip() or heading is not None else []
        for piece in pieces:
            fragments.append(Fragment(doc.doc_id, len(fragments), heading, piece))

    logger.debug(f"Document {doc.doc_id}: {len(fragments)} fragments")
    return fragments


def _is_abbreviation(text: str, period: int, abbreviations: Set[str]) -> bool:
    start = period
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    candidate = text[start:period + 1].lstrip(_OPENING_CHARS).lower()
    return candidate in abbreviations


def _is_boundary(text: str, match: "re.Match", abbreviations: Set[str]) -> bool:
    terminator = match.start()
    following = match.end()
    if following >= len(text):
        return False

    next_char = text[following]
    starts_sentence = (
        next_char.isupper()
        or next_char.isdigit()
        or (next_char == '(' and following + 1 < len(text) and text[following + 1].isdigit())
    )
    if not starts_sentence:
        return False

    if text[terminator] == '.' and _is_abbreviation(text, terminator, abbreviations):
        return False
    return True


def segment_sentences(fragment: Fragment, abbreviations: Iterable[str], min_tokens: int = 2) -> List[Sentence]:
    """Rule-based sentence split of one fragment

    Boundaries sit after '.', '?' or '!' (plus closing quotes/brackets) when
    whitespace and an uppercase letter or an enumeration digit follow, so a
    period inside a number (4.5) is never a terminator. Periods ending a listed
    abbreviation never split; ';' never splits.
    Sentences with fewer than min_tokens tokens are dropped.
    """
    text = fragment.text
    known = {entry.lower() for entry in abbreviations}

    spans: List[Tuple[int, int]] = []
    start = 0
    for match in _TERMINATOR_RE.finditer(text):
        if _is_boundary(text, match, known):
            spans.append((start, match.start(1)))
            start = match.end()
    spans.append((start, len(text)))

    sentences: List[Sentence] = []
    for begin, end in spans:
        raw = text[begin:end]
        stripped = raw.strip()
        if not stripped:
            continue
        begin += len(raw) - len(raw.lstrip())
        end = begin + len(stripped)
        normalized = ' '.join(stripped.split())
        if len(tokenize(normalized)) < min_tokens:
            logger.debug(f"Dropped short sentence in {fragment.doc_id}:{fragment.fragment_index}: {normalized!r}")
            continue
        index = len(sentences)
        sentences.append(Sentence(
            sentence_id=f"{fragment.doc_id}:{fragment.fragment_index}:{index}",
            doc_id=fragment.doc_id,
            fragment_index=fragment.fragment_index,
            sentence_index=index,
            text=normalized,
            char_span=(begin, end),
        ))
    return sentences


class CorpusIngestor:
    """Runs load -> fragment -> segment for every configured input"""

    def __init__(self, rules: FragmentationRules, abbreviations: Iterable[str],
                 min_tokens: int = 2, lossy: bool = False, http_timeout: float = 30.0):
        self.logger = logging.getLogger(__name__)
        self.rules = rules
        self.abbreviations = set(abbreviations)
        self.min_tokens = min_tokens
        self.lossy = lossy
        self.http_timeout = http_timeout

    def ingest(self, source: str, doc_id: str) -> Tuple[Document, List[Fragment], List[Sentence]]:
        """Ingest one input into its document, fragments and sentences"""
        document = load_document(read_source(source, self.http_timeout), doc_id, source, self.lossy)
        fragments = fragment(document, self.rules)
        sentences = [s for frag in fragments for s in segment_sentences(frag, self.abbreviations, self.min_tokens)]
        self.logger.info(f"Ingested {doc_id}: {len(fragments)} fragments, {len(sentences)} sentences")
        return document, fragments, sentences
