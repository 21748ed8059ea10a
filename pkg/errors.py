#!/usr/bin/env python3
"""
Errors - Exception hierarchy shared by the ConRelMiner pipeline stages
"""

from typing import Any, Optional


class ConRelError(Exception):
    """Base error; carries the pipeline module and the offending item"""

    default_module = "conrel"

    def __init__(self, message: str, item: Any = None, module: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.item = item
        self.module = module or self.default_module

    def __str__(self) -> str:
        if self.item is None:
            return f"[{self.module}] {self.message}"
        return f"[{self.module}] {self.message}: {self.item}"


class ConfigurationError(ConRelError):
    """Invalid run configuration (patterns, lexicon, thresholds, groups, paths)"""

    default_module = "config"


class DocumentEncodingError(ConRelError):
    """Input bytes that do not decode as UTF-8"""

    default_module = "corpus_ingest"

    def __init__(self, message: str, item: Any = None, offset: int = 0, module: Optional[str] = None):
        super().__init__(message, item, module)
        self.offset = offset


class EmptyDocumentError(ConRelError):
    """Input stream without any content"""

    default_module = "corpus_ingest"


class RelationError(ConRelError):
    """Sentence pair the relation miner cannot classify"""

    default_module = "relation_miner"


class GraphIntegrityError(ConRelError):
    """Relation endpoint that is not a node of the graph"""

    default_module = "graph_export"


class CsvFormatError(ConRelError):
    """Malformed row in a previously written artifact"""

    default_module = "cli"

    def __init__(self, message: str, item: Any = None, line_number: int = 0, module: Optional[str] = None):
        super().__init__(message, item, module)
        self.line_number = line_number
