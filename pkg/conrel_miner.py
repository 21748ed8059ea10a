#!/usr/bin/env python3
"""
ConRelMiner - Runs the constraint pipeline end to end
ingest -> normalize -> filter -> group -> mine -> export
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from artifact_writer import (ArtifactWriter, partition_csv, reduction_csv, relations_csv,
                             sentences_csv)
from config_manager import RunConfig
from constraint_filter import ConstraintSentence, filter_constraints
from corpus_ingest import CorpusIngestor, Document, Sentence
from graph_export import ConstraintGraph, build_graph, to_dot, to_json
from relation_miner import Relation, RelationKind, RelationMiner
from text_normalize import TextNormalizer
from topic_grouping import Partition, ReductionReport, TopicGrouper, reduction_report


class RunStatus:
    """Stage tracking for pipeline runs"""
    IDLE = "idle"
    INGESTING = "ingesting"
    NORMALIZING = "normalizing"
    FILTERING = "filtering"
    GROUPING = "grouping"
    MINING = "mining"
    EXPORTING = "exporting"
    COMPLETED = "completed"
    ERROR = "error"


@dataclass
class RunResult:
    """Everything a run produced"""
    documents: List[Document] = field(default_factory=list)
    sentences: List[Sentence] = field(default_factory=list)
    constraints: List[ConstraintSentence] = field(default_factory=list)
    partition: Optional[Partition] = None
    relations: List[Relation] = field(default_factory=list)
    graph: Optional[ConstraintGraph] = None
    report: Optional[ReductionReport] = None
    artifacts: List[Path] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def summary(self) -> Dict[str, Any]:
        """Totals per document, group and relation kind"""
        documents = {}
        for document in self.documents:
            documents[document.doc_id] = {
                'sentences': sum(1 for s in self.sentences if s.doc_id == document.doc_id),
                'constraints': sum(1 for c in self.constraints if c.doc_id == document.doc_id),
            }
        return {
            'documents': documents,
            'sentences': len(self.sentences),
            'constraints': len(self.constraints),
            'groups': self.partition.sizes() if self.partition else {},
            'relations': {kind: sum(1 for r in self.relations if r.kind == kind) for kind in RelationKind.ALL},
            'elapsed_seconds': round(self.elapsed_seconds, 3),
        }


class ConRelMiner:
    """Pipeline orchestrator for one RunConfig"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.status = RunStatus.IDLE
        self.error_message = ""
        self.ingestor = CorpusIngestor(
            config.fragmentation,
            config.abbreviations,
            min_tokens=config.min_sentence_tokens,
            lossy=config.lossy,
            http_timeout=config.http_timeout,
        )
        self.normalizer = TextNormalizer(config.stopwords)
        self.grouper = TopicGrouper(config.grouping)
        self.miner = RelationMiner(config.thresholds, config.scope, config.baseline_docs)
        self.writer = ArtifactWriter(config.output_dir)
        self.basename = ArtifactWriter.sanitize_filename(config.basename)

    def _update_status(self, status: str, message: str = ""):
        """Update run status"""
        self.status = status
        self.error_message = message if status == RunStatus.ERROR else ""
        self.logger.info(f"Status: {status}" + (f" - {message}" if message else ""))

    def prepare(self) -> RunResult:
        """Ingest, normalize and filter every input"""
        result = RunResult()
        started = time.perf_counter()

        self._update_status(RunStatus.INGESTING)
        for spec in self.config.inputs:
            document, _, sentences = self.ingestor.ingest(spec.path, spec.doc_id)
            result.documents.append(document)
            result.sentences.extend(sentences)

        self._update_status(RunStatus.NORMALIZING)
        tokenized = self.normalizer.normalize_all(result.sentences)

        self._update_status(RunStatus.FILTERING)
        result.constraints = filter_constraints(tokenized, self.config.lexicon)
        self.logger.info(f"{len(result.constraints)} of {len(result.sentences)} sentences carry constraints")

        result.elapsed_seconds = time.perf_counter() - started
        return result

    def run(self, group: bool = True, mine: bool = True, export: bool = True) -> RunResult:
        """Run the pipeline; the flags select the stages after filtering

        Artifacts of the selected stages are written together or not at all.
        """
        started = time.perf_counter()
        try:
            result = self.prepare()
            artifacts: Dict[str, str] = {}

            if group:
                self._update_status(RunStatus.GROUPING)
                result.partition = self.grouper.group(result.constraints)
                result.report = reduction_report(result.partition, self.config.selections,
                                                 self.config.include_undefined_rows)

            if mine:
                self._update_status(RunStatus.MINING)
                result.relations = self.miner.mine(result.constraints)

            self._update_status(RunStatus.EXPORTING)
            artifacts[f"{self.basename}_sentences.csv"] = sentences_csv(
                result.sentences, result.constraints, result.partition)
            if group:
                artifacts[f"{self.basename}_partition.csv"] = partition_csv(result.partition)
                artifacts[f"{self.basename}_reduction.csv"] = reduction_csv(result.report)
            if mine:
                artifacts[f"{self.basename}_relations.csv"] = relations_csv(result.relations)
            if group and mine and export:
                result.graph = build_graph(result.partition, result.relations, result.constraints)
                artifacts[f"{self.basename}.dot"] = to_dot(result.graph)
                artifacts[f"{self.basename}.json"] = to_json(result.graph)

            result.artifacts = self.writer.write_all(artifacts)
            result.elapsed_seconds = time.perf_counter() - started
            self._update_status(RunStatus.COMPLETED)
            return result

        except Exception as e:
            self._update_status(RunStatus.ERROR, str(e))
            raise


def run_pipeline(config: RunConfig) -> RunResult:
    """Full pipeline with all six artifacts"""
    return ConRelMiner(config).run()
