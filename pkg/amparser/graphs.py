"""
As-graphs: rooted labeled graphs with source-marked nodes, their types, and
the graph-level APP and MOD operations.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import MultiDiGraphMatcher

from amparser.algebra import EMPTY, Type, TypeSyntaxError, request, type_combine
from amparser.models import app, mod

logger = logging.getLogger(__name__)

Edge = Tuple[str, str, str]


class GraphError(ValueError):
    """Raised for malformed as-graphs and failed APP/MOD merges."""


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: Optional[str] = None
    source: Optional[str] = None
    request: Optional[Type] = None

    @property
    def effective_request(self) -> Optional[Type]:
        if self.source is None:
            return None
        return self.request if self.request is not None else EMPTY


@dataclass(frozen=True)
class AsGraph:
    nodes: Tuple[GraphNode, ...]
    edges: FrozenSet[Edge]
    root: str

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'edges', frozenset(self.edges))
        ids = [n.id for n in nodes]
        if len(set(ids)) != len(ids):
            raise GraphError(f'Duplicate node ids in {ids}')
        if self.root not in ids:
            raise GraphError(f'Root {self.root!r} is not a node')
        sources = [n.source for n in nodes if n.source is not None]
        if len(set(sources)) != len(sources):
            raise GraphError(f'Source names must be unique, got {sorted(sources)}')
        for node in nodes:
            if node.request is not None and node.source is None:
                raise GraphError(f'Node {node.id} has a request but no source')
        for a, label, b in self.edges:
            if a not in ids or b not in ids:
                raise GraphError(f'Edge {a} -{label}-> {b} leaves the graph')
        if len(nodes) > 1:
            skeleton = nx.Graph()
            skeleton.add_nodes_from(ids)
            skeleton.add_edges_from((a, b) for a, _, b in self.edges)
            if not nx.is_connected(skeleton):
                raise GraphError('Every node must be connected to the root')

    def node(self, node_id: str) -> GraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def source_node(self, source: str) -> Optional[GraphNode]:
        for n in self.nodes:
            if n.source == source:
                return n
        return None

    @property
    def sources(self) -> Set[str]:
        return {n.source for n in self.nodes if n.source is not None}

    def relabel(self, prefix: str) -> 'AsGraph':
        """Copy with every node id prefixed."""
        return AsGraph(
            tuple(replace(n, id=prefix + n.id) for n in self.nodes),
            frozenset((prefix + a, lab, prefix + b) for a, lab, b in self.edges),
            prefix + self.root,
        )


def graph_type(g: AsGraph) -> Type:
    """The type read off the source nodes and their request annotations."""
    names = g.sources
    edges = set()
    for node in g.nodes:
        req = node.effective_request
        if req is None:
            continue
        missing = req.nodes - names
        if missing:
            raise GraphError(f'Request of {node.source} names sources {sorted(missing)} absent from the graph')
        edges |= {(node.source, r) for r in req.nodes}
        edges |= req.edges
    try:
        result = Type(frozenset(names), frozenset(edges))
    except TypeSyntaxError as exc:
        raise GraphError(f'Inconsistent request annotations: {exc}') from exc
    for node in g.nodes:
        if node.source is not None and request(result, node.source) != node.effective_request:
            raise GraphError(
                f'Inconsistent request annotations at {node.source}: '
                f'annotated {node.effective_request}, implied {request(result, node.source)}'
            )
    return result


class _Merger:
    """Union-find over the nodes of two graphs being glued together."""

    def __init__(self, head: AsGraph, arg: AsGraph, filled: str, filled_in_head: bool):
        taken = {n.id for n in head.nodes}
        self.rename: Dict[str, str] = {}
        for n in arg.nodes:
            new_id = n.id
            k = 1
            while new_id in taken:
                new_id = f'{n.id}~{k}'
                k += 1
            taken.add(new_id)
            self.rename[n.id] = new_id
        self.nodes: Dict[str, GraphNode] = {n.id: n for n in head.nodes}
        self.head_ids = set(self.nodes)
        for n in arg.nodes:
            self.nodes[self.rename[n.id]] = replace(n, id=self.rename[n.id])
        # the filled source loses its marking
        filled_id = filled if filled_in_head else self.rename[filled]
        self.nodes[filled_id] = replace(self.nodes[filled_id], source=None, request=None)
        self.edges = set(head.edges) | {(self.rename[a], lab, self.rename[b]) for a, lab, b in arg.edges}
        self.parent = {i: i for i in self.nodes}

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # head-side ids name the merged node
        if rb in self.head_ids and ra not in self.head_ids:
            ra, rb = rb, ra
        self.parent[rb] = ra

    def result(self, root: str) -> AsGraph:
        classes: Dict[str, List[GraphNode]] = {}
        for node_id, node in self.nodes.items():
            classes.setdefault(self.find(node_id), []).append(node)
        merged = []
        for rep, members in sorted(classes.items()):
            labels = {m.label for m in members if m.label is not None}
            if len(labels) > 1:
                raise GraphError(f'Label conflict merging into {rep}: {sorted(labels)}')
            sources = {m.source for m in members if m.source is not None}
            if len(sources) > 1:
                raise GraphError(f'Source conflict merging into {rep}: {sorted(sources)}')
            source = next(iter(sources)) if sources else None
            req = None
            if source is not None:
                reqs = [m.request for m in members if m.source == source]
                req = reqs[0]
            merged.append(GraphNode(rep, next(iter(labels)) if labels else None, source, req))
        edges = frozenset((self.find(a), lab, self.find(b)) for a, lab, b in self.edges)
        return AsGraph(tuple(merged), edges, self.find(root))


def _glue(head: AsGraph, arg: AsGraph, anchor_head: str, anchor_arg: str, filled_in_head: bool) -> AsGraph:
    filled = anchor_head if filled_in_head else anchor_arg
    merger = _Merger(head, arg, filled, filled_in_head)
    merger.union(anchor_head, merger.rename[anchor_arg])
    for node in arg.nodes:
        if node.source is None or (not filled_in_head and node.id == filled):
            continue
        partner = head.source_node(node.source)
        if partner is not None and not (filled_in_head and partner.id == filled):
            merger.union(partner.id, merger.rename[node.id])
    return merger.result(head.root)


def graph_apply(head: AsGraph, a: str, arg: AsGraph) -> AsGraph:
    """
    APP_a: plug the root of `arg` into the a-source of `head`, merging
    same-named sources.

    Raises:
        GraphError: a-source missing, types do not combine, or labels clash.
    """
    slot = head.source_node(a)
    if slot is None:
        raise GraphError(f'Head graph has no {a} source')
    expected = type_combine(app(a), graph_type(head), graph_type(arg))
    if expected is None:
        raise GraphError(f'APP_{a} is not defined for {graph_type(head)} and {graph_type(arg)}')
    result = _glue(head, arg, slot.id, arg.root, filled_in_head=True)
    if graph_type(result) != expected:
        raise GraphError(f'APP_{a} produced type {graph_type(result)}, expected {expected}')
    return result


def graph_modify(head: AsGraph, b: str, modifier: AsGraph) -> AsGraph:
    """MOD_b: plug the root of `head` into the b-source of `modifier`; the head keeps its type."""
    slot = modifier.source_node(b)
    if slot is None:
        raise GraphError(f'Modifier graph has no {b} source')
    if slot.effective_request != EMPTY:
        raise GraphError(f'MOD_{b} needs an empty request at {b}, found {slot.effective_request}')
    expected = type_combine(mod(b), graph_type(head), graph_type(modifier))
    if expected is None:
        raise GraphError(f'MOD_{b} is not defined for {graph_type(head)} and {graph_type(modifier)}')
    result = _glue(head, modifier, head.root, slot.id, filled_in_head=False)
    if graph_type(result) != expected:
        raise GraphError(f'MOD_{b} produced type {graph_type(result)}, expected {expected}')
    return result


def _to_networkx(g: AsGraph) -> nx.MultiDiGraph:
    out = nx.MultiDiGraph()
    for node in g.nodes:
        req = node.effective_request
        out.add_node(node.id, label=node.label, source=node.source,
                     request=None if req is None else str(req), is_root=node.id == g.root)
    for a, label, b in g.edges:
        out.add_edge(a, b, label=label)
    return out


def _same_edges(e1: Dict, e2: Dict) -> bool:
    return sorted(d['label'] for d in e1.values()) == sorted(d['label'] for d in e2.values())


def graphs_isomorphic(g1: AsGraph, g2: AsGraph) -> bool:
    """Node bijection preserving root, labels, sources, requests and labeled edges."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False
    matcher = MultiDiGraphMatcher(_to_networkx(g1), _to_networkx(g2), node_match=lambda a, b: a == b,
                                  edge_match=_same_edges)
    return matcher.is_isomorphic()


def star_graph(root_label: str, t: Type, edge_prefix: str = 'op') -> AsGraph:
    """A root with one edge per source of `t`, each source carrying its request."""
    nodes = [GraphNode('r', root_label)]
    edges = set()
    for k, name in enumerate(sorted(t.nodes), start=1):
        nodes.append(GraphNode(f'n{k}', None, name, request(t, name) or None))
        edges.add(('r', f'{edge_prefix}{k}', f'n{k}'))
    return AsGraph(tuple(nodes), frozenset(edges), 'r')


def collect_sources(graphs: Iterable[AsGraph]) -> Set[str]:
    names: Set[str] = set()
    for g in graphs:
        names |= g.sources
    return names
