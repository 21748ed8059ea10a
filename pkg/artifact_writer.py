#!/usr/bin/env python3
"""
Artifact Writer - Renders run artifacts (CSV, DOT, JSON), writes them
atomically and reads the CSVs back for the report/export subcommands
"""

import logging
import os
import re
import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from constraint_filter import ConstraintSentence
from corpus_ingest import Sentence
from errors import CsvFormatError
from relation_miner import Relation, RelationKind
from topic_grouping import UNDEFINED, Partition, ReductionReport

SENTENCES_COLUMNS = ["sentence_id", "doc", "fragment", "group", "polarity", "text"]
PARTITION_COLUMNS = ["sentence_id", "group"]
RELATIONS_COLUMNS = ["kind", "a", "b", "similarity", "direction"]
REDUCTION_COLUMNS = ["selection", "relevant", "read_with_undefined", "reduction_excl_pct",
                     "reduction_incl_pct", "total"]

_PARSER_LINE_RE = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class SentenceRecord:
    """One row of the sentences CSV"""
    sentence_id: str
    doc_id: str
    fragment_index: int
    group: str
    polarity: str
    text: str


def _render(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


def sentences_csv(sentences: Sequence[Sentence], constraints: Sequence[ConstraintSentence],
                  partition: Optional[Partition]) -> str:
    """Every segmented sentence; group and polarity are empty for non-constraints"""
    polarity = {constraint.sentence_id: constraint.polarity for constraint in constraints}
    groups = partition.assignments() if partition is not None else {}
    rows = [
        [s.sentence_id, s.doc_id, s.fragment_index, groups.get(s.sentence_id, ""),
         polarity.get(s.sentence_id, ""), s.text]
        for s in sentences
    ]
    return _render(pd.DataFrame(rows, columns=SENTENCES_COLUMNS))


def partition_csv(partition: Partition) -> str:
    """sentence_id,group in partition order; an empty sentence_id declares an empty group"""
    rows = []
    for name, members in partition.groups.items():
        if not members and name != UNDEFINED:
            rows.append(["", name])
        rows.extend([sentence_id, name] for sentence_id in members)
    return _render(pd.DataFrame(rows, columns=PARTITION_COLUMNS))


def relations_csv(relations: Sequence[Relation]) -> str:
    rows = [[r.kind, r.a, r.b, f"{r.similarity:.4f}", r.direction or ""] for r in relations]
    return _render(pd.DataFrame(rows, columns=RELATIONS_COLUMNS))


def reduction_csv(report: ReductionReport) -> str:
    rows = [[row.selection, row.relevant_count, row.read_with_undefined, row.reduction_excl_undefined,
             row.reduction_incl_undefined, report.total] for row in report.rows]
    return _render(pd.DataFrame(rows, columns=REDUCTION_COLUMNS))


def reduction_table(report: ReductionReport) -> str:
    """Console table of a reduction report"""
    frame = pd.DataFrame(
        [[row.selection, "+".join(row.groups), row.relevant_count, row.read_with_undefined,
          f"{row.reduction_excl_undefined}%", f"{row.reduction_incl_undefined}%"] for row in report.rows],
        columns=["selection", "groups", "relevant", "with undefined", "reduction", "reduction incl. undefined"],
    )
    return frame.to_string(index=False) + f"\n(total constraints: {report.total})"


def _read_frame(path: Union[str, Path], columns: List[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise CsvFormatError("CSV file not found", str(path))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise CsvFormatError("CSV file is empty", str(path), line_number=1)
    except pd.errors.ParserError as e:
        match = _PARSER_LINE_RE.search(str(e))
        line_number = int(match.group(1)) if match else 0
        raise CsvFormatError(f"malformed row at line {line_number}", str(path), line_number=line_number)

    if list(frame.columns) != columns:
        raise CsvFormatError(f"expected header {','.join(columns)}", str(path), line_number=1)
    # short rows come back as NaN
    return frame.fillna("")


def _rows(frame: pd.DataFrame) -> Iterable:
    # header is line 1
    for offset, row in enumerate(frame.itertuples(index=False)):
        yield offset + 2, row


def read_partition_csv(path: Union[str, Path]) -> Partition:
    frame = _read_frame(path, PARTITION_COLUMNS)
    names: List[str] = []
    assigned = []
    seen = set()
    for line_number, row in _rows(frame):
        if not row.group:
            raise CsvFormatError(f"missing group at line {line_number}", str(path), line_number=line_number)
        if row.group not in names:
            names.append(row.group)
        if not row.sentence_id:
            continue
        if row.sentence_id in seen:
            raise CsvFormatError(f"duplicate sentence_id at line {line_number}", row.sentence_id,
                                 line_number=line_number)
        seen.add(row.sentence_id)
        assigned.append((row.sentence_id, row.group))
    return Partition.from_assignments(names, assigned)


def read_relations_csv(path: Union[str, Path]) -> List[Relation]:
    frame = _read_frame(path, RELATIONS_COLUMNS)
    relations = []
    for line_number, row in _rows(frame):
        if row.kind not in RelationKind.ALL or not row.a or not row.b:
            raise CsvFormatError(f"invalid relation at line {line_number}", str(path), line_number=line_number)
        try:
            value = float(row.similarity)
        except ValueError:
            raise CsvFormatError(f"invalid similarity at line {line_number}", row.similarity,
                                 line_number=line_number)
        relations.append(Relation(row.kind, row.a, row.b, value, row.direction or None))
    return relations


def read_sentences_csv(path: Union[str, Path]) -> List[SentenceRecord]:
    frame = _read_frame(path, SENTENCES_COLUMNS)
    records = []
    for line_number, row in _rows(frame):
        if not row.sentence_id or not row.fragment.isdigit():
            raise CsvFormatError(f"invalid sentence row at line {line_number}", str(path), line_number=line_number)
        records.append(SentenceRecord(row.sentence_id, row.doc, int(row.fragment), row.group, row.polarity,
                                      row.text))
    return records


class ArtifactWriter:
    """Writes a set of rendered artifacts into the output directory all-or-nothing"""

    def __init__(self, output_dir: Union[str, Path]):
        self.logger = logging.getLogger(__name__)
        self.output_dir = Path(output_dir)

    def write_all(self, artifacts: Dict[str, str]) -> List[Path]:
        """Write every artifact to a temporary directory, then move them into place

        If a move fails, the targets already replaced get their previous content
        back and new targets are removed.
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".conrel-", dir=self.output_dir))
        previous = staging / ".previous"
        replaced: List[Tuple[Path, Optional[Path]]] = []
        try:
            for name, content in artifacts.items():
                with open(staging / name, 'w', encoding='utf-8', newline='') as f:
                    f.write(content)
            previous.mkdir()
            for name in artifacts:
                target = self.output_dir / name
                backup = None
                if target.exists():
                    backup = previous / name
                    os.replace(target, backup)
                replaced.append((target, backup))
                os.replace(staging / name, target)
        except Exception as e:
            self.logger.error(f"Failed to write artifacts to {self.output_dir}: {e}")
            self._roll_back(replaced)
            raise
        finally:
            shutil.rmtree(staging, ignore_errors=True)

        written = [target for target, _ in replaced]
        for path in written:
            self.logger.info(f"Wrote {path}")
        return written

    def _roll_back(self, replaced: List[Tuple[Path, Optional[Path]]]):
        for target, backup in reversed(replaced):
            try:
                if backup is not None and backup.exists():
                    os.replace(backup, target)
                elif backup is None and target.exists():
                    target.unlink()
            except OSError as e:
                self.logger.error(f"Could not restore {target}: {e}")

    @staticmethod
    def sanitize_filename(filename: str) -> str:
        """Filesystem-safe artifact basename"""
        chars_to_replace = {
            '/': '-',
            '\\': '-',
            ':': '-',
            '*': '',
            '?': '',
            '"': '',
            '<': '',
            '>': '',
            '|': '-',
        }
        for char, replacement in chars_to_replace.items():
            filename = filename.replace(char, replacement)
        return '_'.join(filename.split()).strip() or 'constraints'
