"""
Apply-Modify type system

Types are DAGs over source names; an edge requester -> requested says that
the argument plugged into the requester must itself carry the requested
source. This module holds:
- the Type value and its bracket notation ("[s, o[s]]")
- requests, the type-level APP/MOD combination and apply sets
- the term-type fold shared by type checking, evaluation and the oracles
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

SOURCE_NAME = re.compile(r'[a-z][a-z0-9_]*')


class TypeSyntaxError(ValueError):
    """Raised for malformed or inconsistent type strings."""


def _closure(nodes: FrozenSet[str], edges: Iterable[Tuple[str, str]]) -> FrozenSet[Tuple[str, str]]:
    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from(edges)
    if not nx.is_directed_acyclic_graph(graph):
        raise TypeSyntaxError(f'Request structure is cyclic: {sorted(graph.edges)}')
    closed = nx.transitive_closure_dag(graph)
    return frozenset(closed.edges)


@dataclass(frozen=True)
class Type:
    """
    A type: source names plus request edges.

    Edges are stored transitively closed, so the request at a source is
    simply the induced sub-DAG on its successors and two spellings of the
    same request structure compare equal.
    """
    nodes: FrozenSet[str] = frozenset()
    edges: FrozenSet[Tuple[str, str]] = field(default=frozenset())

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        edges = frozenset(self.edges)
        for name in nodes:
            if not SOURCE_NAME.fullmatch(name):
                raise TypeSyntaxError(f'Invalid source name: {name!r}')
        for requester, requested in edges:
            if requester not in nodes or requested not in nodes:
                raise TypeSyntaxError(f'Request edge {requester}->{requested} leaves the type')
            if requester == requested:
                raise TypeSyntaxError(f'Source {requester} requests itself')
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'edges', _closure(nodes, edges) if edges else edges)

    def __str__(self) -> str:
        return serialize_type(self)

    def __repr__(self) -> str:
        return f'Type({serialize_type(self)})'

    def __len__(self) -> int:
        return len(self.nodes)

    def successors(self, name: str) -> Set[str]:
        return {b for a, b in self.edges if a == name}

    def predecessors(self, name: str) -> Set[str]:
        return {a for a, b in self.edges if b == name}

    def induced(self, names: Iterable[str]) -> 'Type':
        """Sub-DAG induced on `names`."""
        keep = frozenset(names)
        return _closed_type(keep, frozenset((a, b) for a, b in self.edges if a in keep and b in keep))

    def without(self, names: Iterable[str]) -> 'Type':
        return self.induced(self.nodes - frozenset(names))

    def sort_key(self) -> str:
        return serialize_type(self)


EMPTY = Type()


def _closed_type(nodes: FrozenSet[str], edges: FrozenSet[Tuple[str, str]]) -> Type:
    # induced subgraphs of a closed DAG are closed DAGs; skip re-validation
    t = object.__new__(Type)
    object.__setattr__(t, 'nodes', nodes)
    object.__setattr__(t, 'edges', edges)
    return t


def single(name: str) -> Type:
    """The type [name] with empty request."""
    return Type(frozenset([name]))


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

class _TypeReader:
    """Recursive-descent reader for Type := '[' [Entry (',' Entry)*] ']'."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.mentions: Dict[str, Type] = {}

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _expect(self, char: str):
        self._skip()
        if self.pos >= len(self.text) or self.text[self.pos] != char:
            found = self.text[self.pos] if self.pos < len(self.text) else 'end of input'
            raise TypeSyntaxError(f'Expected {char!r} at offset {self.pos} in {self.text!r}, found {found!r}')
        self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ''

    def read(self) -> Type:
        result = self._type()
        self._skip()
        if self.pos != len(self.text):
            raise TypeSyntaxError(f'Trailing input at offset {self.pos} in {self.text!r}')
        return result

    def _type(self) -> Type:
        self._expect('[')
        nodes: Set[str] = set()
        edges: Set[Tuple[str, str]] = set()
        if self._peek() == ']':
            self.pos += 1
            return EMPTY
        while True:
            name, req = self._entry()
            nodes.add(name)
            nodes |= req.nodes
            edges |= req.edges
            edges |= {(name, r) for r in req.nodes}
            if self._peek() == ',':
                self.pos += 1
                continue
            self._expect(']')
            break
        return Type(frozenset(nodes), frozenset(edges))

    def _entry(self) -> Tuple[str, Type]:
        self._skip()
        match = SOURCE_NAME.match(self.text, self.pos)
        if not match:
            raise TypeSyntaxError(f'Expected a source name at offset {self.pos} in {self.text!r}')
        name = match.group(0)
        self.pos = match.end()
        req = self._type() if self._peek() == '[' else EMPTY
        seen = self.mentions.get(name)
        if seen is not None and seen != req:
            raise TypeSyntaxError(
                f'Source {name} is mentioned with requests {seen} and {req} in {self.text!r}'
            )
        self.mentions[name] = req
        return name, req


@lru_cache(maxsize=4096)
def parse_type(text: str) -> Type:
    """
    Parse the bracket notation, e.g. "[s, o[s]]".

    Every source may be listed at top level; sources that only occur inside
    a request are picked up from there. Repeated mentions of a source must
    carry the same request.
    """
    result = _TypeReader(text).read()
    return result


@lru_cache(maxsize=65536)
def serialize_type(t: Type) -> str:
    """
    Canonical text: every source at top level in lexicographic order, with
    its full request printed at every mention.
    """
    return _render(t, frozenset(t.nodes))


def _render(t: Type, names: FrozenSet[str]) -> str:
    parts = []
    for name in sorted(names):
        succ = frozenset(t.successors(name))
        parts.append(name + (_render(t, succ) if succ else ''))
    return '[' + ', '.join(parts) + ']'


# ---------------------------------------------------------------------------
# Requests, combination, apply sets
# ---------------------------------------------------------------------------

def request(t: Type, a: str) -> Type:
    """The request at source `a`: the sub-DAG of everything `a` reaches."""
    if a not in t.nodes:
        raise KeyError(f'Source {a} is not in type {t}')
    return t.induced(t.successors(a))


@lru_cache(maxsize=65536)
def _apply(head: Type, alpha: str, arg: Type) -> Optional[Type]:
    if alpha not in head.nodes or head.predecessors(alpha):
        return None
    if request(head, alpha) != arg:
        return None
    return head.without([alpha])


@lru_cache(maxsize=65536)
def _modify(head: Type, beta: str, arg: Type) -> Optional[Type]:
    if beta not in arg.nodes or request(arg, beta) != EMPTY:
        return None
    rest = arg.without([beta])
    if not rest.nodes <= head.nodes or head.induced(rest.nodes) != rest:
        return None
    return head


def type_combine(label, head: Type, arg: Type) -> Optional[Type]:
    """
    Term type of attaching a subtree of type `arg` to a head of type `head`
    with an APP or MOD edge; None when the combination is not well-typed.
    """
    if label.is_app:
        return _apply(head, label.source, arg)
    if label.is_mod:
        return _modify(head, label.source, arg)
    raise ValueError(f'{label} is not an APP or MOD label')


@lru_cache(maxsize=65536)
def apply_set(lex: Type, term: Type) -> Optional[FrozenSet[str]]:
    """
    Sources consumed when turning lexical type `lex` into term type `term`
    with APP operations, or None when `term` is not apply-reachable.
    """
    if not term.nodes <= lex.nodes or lex.induced(term.nodes) != term:
        return None
    consumed = lex.nodes - term.nodes
    for a, b in lex.edges:
        if a in term.nodes and b in consumed:
            return None
    return frozenset(consumed)


def apply_reachable(lex: Type, term: Type) -> bool:
    return apply_set(lex, term) is not None


def app_order(t: Type, sources: Iterable[str]) -> Optional[List[str]]:
    """
    Order in which `sources` can be applied to `t`: always the
    lexicographically smallest source without remaining incoming edges.
    None if no such order exists.
    """
    pending = set(sources)
    current = t
    order = []
    while pending:
        ready = sorted(a for a in pending if a in current.nodes and not current.predecessors(a))
        if not ready:
            return None
        order.append(ready[0])
        pending.discard(ready[0])
        current = current.without([ready[0]])
    return order


def fold_children(lexical: Type, children: Sequence[Tuple[object, Type]]) -> Tuple[Optional[Type], Optional[str]]:
    """
    Fold type_combine over the children of one node.

    MOD children go first, against the lexical type; APP children follow in
    app_order. Returns (term type, None) or (None, reason).
    """
    current = lexical
    apps: Dict[str, Type] = {}
    for label, child_type in children:
        if label.is_mod:
            if type_combine(label, current, child_type) is None:
                return None, f'{label} with argument type {child_type} does not fit {current}'
        elif label.is_app:
            if label.source in apps:
                return None, f'duplicate {label} edge'
            apps[label.source] = child_type
        else:
            return None, f'{label} cannot label an edge between tokens'
    order = app_order(current, apps.keys())
    if order is None:
        missing = sorted(a for a in apps if a not in current.nodes)
        if missing:
            return None, f'{lexical} has no source {missing[0]}'
        return None, f'no legal APP order for sources {sorted(apps)} on {lexical}'
    for alpha in order:
        combined = _apply(current, alpha, apps[alpha])
        if combined is None:
            return None, f'APP_{alpha} expects {request(current, alpha)}, got {apps[alpha]}'
        current = combined
    return current, None


@lru_cache(maxsize=65536)
def remaining_type(lexical: Type, applied: FrozenSet[str]) -> Optional[Type]:
    """Term type left after applying `applied` to `lexical`, if some APP order allows it."""
    term = lexical.without(applied)
    return term if apply_set(lexical, term) is not None else None
