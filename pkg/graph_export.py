#!/usr/bin/env python3
"""
Graph Export - Assembles the clustered constraint graph and serializes it
as Graphviz DOT and JSON
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from constraint_filter import ConstraintSentence
from errors import GraphIntegrityError
from relation_miner import Direction, Relation, RelationKind
from topic_grouping import UNDEFINED, Partition

logger = logging.getLogger(__name__)

EXCERPT_LENGTH = 120

# Edge styling per relation kind: (color, label, undirected)
EDGE_STYLES = {
    RelationKind.REDUNDANT: ("green", "r", True),
    RelationKind.SUBSUMED: ("orange", "s", False),
    RelationKind.CONFLICTING: ("red", "c", True),
}


@dataclass(frozen=True)
class GraphNode:
    """Constraint sentence placed in its group"""
    sentence_id: str
    text: str
    group: str
    doc_id: str

    @property
    def excerpt(self) -> str:
        if len(self.text) <= EXCERPT_LENGTH:
            return self.text
        return self.text[:EXCERPT_LENGTH - 1].rstrip() + "…"


@dataclass
class ConstraintGraph:
    """Nodes clustered by group, edges are mined relations"""
    nodes: List[GraphNode] = field(default_factory=list)
    edges: List[Relation] = field(default_factory=list)
    groups: List[str] = field(default_factory=list)


def build_graph(partition: Partition, relations: Sequence[Relation],
                sentences: Sequence[ConstraintSentence]) -> ConstraintGraph:
    """One node per constraint sentence, one edge per relation"""
    assignments = partition.assignments()
    nodes = []
    for sentence in sentences:
        if sentence.sentence_id not in assignments:
            raise GraphIntegrityError("sentence is missing from the partition", sentence.sentence_id)
        nodes.append(GraphNode(sentence.sentence_id, sentence.text, assignments[sentence.sentence_id],
                               sentence.doc_id))

    known = {node.sentence_id for node in nodes}
    for relation in relations:
        for endpoint in (relation.a, relation.b):
            if endpoint not in known:
                raise GraphIntegrityError("relation references an unknown sentence", endpoint)

    groups = [name for name in partition.groups if name != UNDEFINED]
    if partition.groups.get(UNDEFINED):
        groups.append(UNDEFINED)

    logger.debug(f"Built graph with {len(nodes)} nodes, {len(relations)} edges, {len(groups)} groups")
    return ConstraintGraph(nodes=nodes, edges=list(relations), groups=groups)


def _quote(value: str) -> str:
    escaped = value.replace('\\', '\\\\').replace('"', '\\"').replace('\n', ' ')
    return f'"{escaped}"'


def _edge_line(relation: Relation) -> str:
    color, label, undirected = EDGE_STYLES[relation.kind]
    source, target = relation.a, relation.b
    if relation.kind == RelationKind.SUBSUMED and relation.direction == Direction.B_SUBSUMED_BY_A:
        source, target = relation.b, relation.a
    attributes = f'color={_quote(color)}, label={_quote(label)}'
    if undirected:
        attributes += ', dir="none"'
    return f'  {_quote(source)} -> {_quote(target)} [{attributes}];'


def to_dot(graph: ConstraintGraph) -> str:
    """Graphviz text with one cluster per group; subsumed edges point at the subsuming sentence"""
    members: Dict[str, List[GraphNode]] = {name: [] for name in graph.groups}
    for node in graph.nodes:
        members.setdefault(node.group, []).append(node)

    lines = [
        'digraph "constraints" {',
        '  graph [compound="true", rankdir="LR"];',
        '  node [shape="box", fontsize="10"];',
    ]
    for index, name in enumerate(graph.groups):
        lines.append(f'  subgraph "cluster_{index}" {{')
        lines.append(f'    label={_quote(name)};')
        for node in members[name]:
            label = _quote(f"{node.sentence_id}: {node.excerpt}")
            lines.append(f'    {_quote(node.sentence_id)} [label={label}];')
        lines.append('  }')
    for relation in graph.edges:
        lines.append(_edge_line(relation))
    lines.append('}')
    return "\n".join(lines) + "\n"


def to_json(graph: ConstraintGraph) -> str:
    """Compact JSON with fixed key order; round-trips through from_json"""
    document = {
        "nodes": [
            {"id": node.sentence_id, "text": node.text, "group": node.group, "doc": node.doc_id}
            for node in graph.nodes
        ],
        "edges": [
            {"kind": edge.kind, "a": edge.a, "b": edge.b, "similarity": edge.similarity,
             "direction": edge.direction}
            for edge in graph.edges
        ],
        "groups": list(graph.groups),
    }
    return json.dumps(document, ensure_ascii=False, separators=(",", ":"))


def from_json(text: str) -> ConstraintGraph:
    """Parse the to_json rendition back into a ConstraintGraph"""
    document = json.loads(text)
    return ConstraintGraph(
        nodes=[GraphNode(item["id"], item["text"], item["group"], item["doc"]) for item in document["nodes"]],
        edges=[Relation(item["kind"], item["a"], item["b"], item["similarity"], item["direction"])
               for item in document["edges"]],
        groups=list(document["groups"]),
    )
