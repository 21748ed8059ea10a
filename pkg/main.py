#!/usr/bin/env python3
"""
ConRelMiner Main Application
Extracts constraint sentences from regulatory documents, groups them by
target group and mines redundant, subsumed and conflicting relations
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from artifact_writer import (ArtifactWriter, read_partition_csv, read_relations_csv, read_sentences_csv,
                             reduction_csv, reduction_table)
from config_manager import ConfigManager
from conrel_miner import ConRelMiner, RunResult
from errors import ConfigurationError, ConRelError
from graph_export import build_graph, to_dot, to_json
from topic_grouping import reduction_report

logger = logging.getLogger(__name__)


def setup_logging(level: str = 'INFO', log_dir: Optional[str] = None):
    """Setup logging configuration; stdout stays free for summaries and tables"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path / 'conrel.log', encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _parse_input(value: str, baseline: bool = False) -> Dict[str, Any]:
    """PATH or DOC_ID=PATH"""
    doc_id, separator, path = value.partition('=')
    if separator and doc_id and '://' not in doc_id:
        return {'path': path, 'doc_id': doc_id, 'baseline': baseline}
    return {'path': value, 'baseline': baseline}


def _parse_selection(value: str) -> Dict[str, Any]:
    """NAME=GROUP[,GROUP...]"""
    name, separator, groups = value.partition('=')
    if not separator or not name or not groups:
        raise ConfigurationError("selections are written NAME=GROUP[,GROUP...]", value, module="cli")
    return {'name': name, 'groups': [group.strip() for group in groups.split(',') if group.strip()]}


def _pipeline_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """CLI flags override file values"""
    overrides: Dict[str, Any] = {}

    def put(keys: Tuple[str, ...], value: Any):
        if value is None:
            return
        section = overrides
        for key in keys[:-1]:
            section = section.setdefault(key, {})
        section[keys[-1]] = value

    inputs = [_parse_input(value) for value in args.input or []]
    inputs += [_parse_input(value, baseline=True) for value in args.baseline or []]
    if inputs:
        put(('inputs',), inputs)
    put(('output', 'directory'), args.out)
    put(('output', 'basename'), args.basename)
    put(('grouping', 'method'), args.method)
    put(('grouping', 'k'), args.k)
    put(('relations', 'scope'), args.scope)
    put(('relations', 'thresholds', 'theta_redundant'), args.theta_redundant)
    put(('relations', 'thresholds', 'theta_subsumed'), args.theta_subsumed)
    put(('relations', 'thresholds', 'theta_conflict'), args.theta_conflict)
    put(('relations', 'thresholds', 'containment_min'), args.containment_min)
    put(('normalize', 'stopwords_path'), args.stopwords)
    if args.lossy:
        put(('ingest', 'lossy'), True)
    if args.log_level:
        put(('logging', 'level'), args.log_level)
    if args.select:
        put(('report', 'selections'), [_parse_selection(value) for value in args.select])
    return overrides


def print_summary(result: RunResult):
    """Totals per group and relation counts by kind"""
    summary = result.summary()
    print(f"Sentences: {summary['sentences']}  Constraints: {summary['constraints']}  "
          f"Elapsed: {summary['elapsed_seconds']:.2f}s")
    for doc_id, counts in summary['documents'].items():
        print(f"  {doc_id}: {counts['sentences']} sentences, {counts['constraints']} constraints")
    if summary['groups']:
        groups = pd.DataFrame(list(summary['groups'].items()), columns=['group', 'constraints'])
        print(groups.to_string(index=False))
    print("Relations: " + ", ".join(f"{kind}={count}" for kind, count in summary['relations'].items()))
    if result.report is not None:
        print(reduction_table(result.report))
    for path in result.artifacts:
        print(f"Wrote {path}")


def _run_pipeline_command(args: argparse.Namespace, group: bool, mine: bool, export: bool) -> int:
    manager = ConfigManager(args.config, args.profile, _pipeline_overrides(args))
    run_config = manager.build_run_config()
    if not args.log_level:
        logging.getLogger().setLevel(getattr(logging, run_config.log_level, logging.INFO))
    if run_config.log_dir and not os.getenv('LOG_DIR'):
        setup_logging(args.log_level or run_config.log_level, str(run_config.log_dir))
    if not run_config.inputs:
        raise ConfigurationError("no input documents given", module="cli")

    result = ConRelMiner(run_config).run(group=group, mine=mine, export=export)
    print_summary(result)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    return _run_pipeline_command(args, group=True, mine=True, export=True)


def cmd_group(args: argparse.Namespace) -> int:
    return _run_pipeline_command(args, group=True, mine=False, export=False)


def cmd_relations(args: argparse.Namespace) -> int:
    return _run_pipeline_command(args, group=False, mine=True, export=False)


def cmd_report(args: argparse.Namespace) -> int:
    """Recompute reductions from a partition CSV"""
    config = ConfigManager(args.config, args.profile).load_config()
    report_config = config.get('report', {})
    if args.select:
        selections = [_parse_selection(value) for value in args.select]
    else:
        selections = report_config.get('selections') or []

    partition_path = Path(args.partition)
    partition = read_partition_csv(partition_path)
    report = reduction_report(
        partition,
        [(entry['name'], entry['groups']) for entry in selections],
        bool(report_config.get('include_undefined_rows', True)),
    )

    output = Path(args.out) if args.out else partition_path.with_name(
        partition_path.stem.replace('_partition', '') + '_reduction.csv')
    ArtifactWriter(output.parent).write_all({output.name: reduction_csv(report)})
    print(reduction_table(report))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    """Rebuild DOT and JSON from the sentences, partition and relations CSVs"""
    records = [record for record in read_sentences_csv(args.sentences) if record.group]
    partition = read_partition_csv(args.partition)
    relations = read_relations_csv(args.relations)
    graph = build_graph(partition, relations, records)

    basename = ArtifactWriter.sanitize_filename(args.basename)
    written = ArtifactWriter(args.out).write_all({
        f"{basename}.dot": to_dot(graph),
        f"{basename}.json": to_json(graph),
    })
    print(f"Graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges, {len(graph.groups)} groups")
    for path in written:
        print(f"Wrote {path}")
    return 0


def _add_pipeline_options(parser: argparse.ArgumentParser):
    parser.add_argument('--config', help='JSON or YAML configuration file')
    parser.add_argument('--profile', help='bundled profile name (default: $CONREL_PROFILE)')
    parser.add_argument('--input', action='extend', nargs='+', metavar='[DOC_ID=]PATH',
                        help='input documents (files or http(s) URLs)')
    parser.add_argument('--baseline', action='extend', nargs='+', metavar='[DOC_ID=]PATH',
                        help='already implemented documents to compare against')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--basename', help='artifact file basename')
    parser.add_argument('--method', choices=['keyword', 'term_frequency', 'structure'])
    parser.add_argument('--k', type=int, help='seed terms for term_frequency grouping')
    parser.add_argument('--scope', choices=['all_pairs', 'cross_document_only', 'against_baseline'])
    parser.add_argument('--theta-redundant', type=float)
    parser.add_argument('--theta-subsumed', type=float)
    parser.add_argument('--theta-conflict', type=float)
    parser.add_argument('--containment-min', type=float)
    parser.add_argument('--stopwords', help='stopword list file')
    parser.add_argument('--select', action='append', metavar='NAME=GROUP[,GROUP...]',
                        help='reduction report selection; repeatable')
    parser.add_argument('--lossy', action='store_true', help='replace undecodable input bytes')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='conrel',
        description='Extract, group and relate constraints in regulatory documents',
    )
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    subparsers = parser.add_subparsers(dest='command', required=True)

    for name, handler, help_text in (
        ('analyze', cmd_analyze, 'full pipeline: all CSVs, DOT and JSON'),
        ('group', cmd_group, 'ingest, filter and group; sentences, partition and reduction CSVs'),
        ('relations', cmd_relations, 'ingest, filter and mine; sentences and relations CSVs'),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        _add_pipeline_options(sub)
        sub.set_defaults(handler=handler)

    report = subparsers.add_parser('report', help='reduction report from a partition CSV')
    report.add_argument('--partition', required=True, help='partition CSV')
    report.add_argument('--select', action='append', metavar='NAME=GROUP[,GROUP...]')
    report.add_argument('--config', help='configuration file providing selections')
    report.add_argument('--profile', help='bundled profile providing selections')
    report.add_argument('--out', help='reduction CSV path')
    report.set_defaults(handler=cmd_report)

    export = subparsers.add_parser('export', help='DOT and JSON from previously written CSVs')
    export.add_argument('--sentences', required=True)
    export.add_argument('--partition', required=True)
    export.add_argument('--relations', required=True)
    export.add_argument('--out', default='output')
    export.add_argument('--basename', default='constraints')
    export.set_defaults(handler=cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or os.getenv('CONREL_LOG_LEVEL', 'INFO'), os.getenv('LOG_DIR'))

    try:
        return args.handler(args)
    except ConRelError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 130
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
