"""
Readers and writers for the lexicon, graph and tree files.

Lexicon and graph files share one block syntax:

    constant <name>            (graph files say: graph <name>)
    node <id> <label|_>
    root <id>
    source <id> <sourcename> [request <type-string>]
    edge <fromid> <label> <toid>
    end

Lexicon files may add `omega <type>` and `modlabel <source>` lines. Tree files
are tab separated, one block per sentence, blank-line separated, optionally
headed by `# sentence <id>`; a block reading `# sentence <id> NO-PARSE` (or
LIMIT) stands for a sentence the decoder gave up on.
"""

import io
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, TextIO, Tuple, Union

from amparser.algebra import TypeSyntaxError, parse_type, serialize_type, single
from amparser.graphs import AsGraph, GraphError, GraphNode
from amparser.lexicon import Lexicon
from amparser.models import AmDepTree, EdgeLabel, InvalidTree, TreeEntry

Text = Union[str, TextIO]


class FormatError(ValueError):
    """Raised for malformed lexicon, graph, tree or transition text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line else message)


def _lines(source: Text) -> List[Tuple[int, str]]:
    stream = io.StringIO(source) if isinstance(source, str) else source
    return [(k, raw.rstrip('\n')) for k, raw in enumerate(stream, start=1)]


class _BlockBuilder:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.nodes: Dict[str, GraphNode] = {}
        self.edges = set()
        self.root: Optional[str] = None

    def feed(self, parts: List[str], lineno: int):
        keyword = parts[0]
        if keyword == 'node':
            if len(parts) != 3:
                raise FormatError('expected: node <id> <label|_>', lineno)
            if parts[1] in self.nodes:
                raise FormatError(f'duplicate node {parts[1]}', lineno)
            self.nodes[parts[1]] = GraphNode(parts[1], None if parts[2] == '_' else parts[2])
        elif keyword == 'root':
            if len(parts) != 2:
                raise FormatError('expected: root <id>', lineno)
            self.root = parts[1]
        elif keyword == 'source':
            if len(parts) not in (3, 5) or (len(parts) == 5 and parts[3] != 'request'):
                raise FormatError('expected: source <id> <name> [request <type>]', lineno)
            node = self._node(parts[1], lineno)
            req = None
            if len(parts) == 5:
                try:
                    req = parse_type(parts[4])
                except TypeSyntaxError as exc:
                    raise FormatError(str(exc), lineno)
            self.nodes[node.id] = GraphNode(node.id, node.label, parts[2], req or None)
        elif keyword == 'edge':
            if len(parts) != 4:
                raise FormatError('expected: edge <from> <label> <to>', lineno)
            self._node(parts[1], lineno)
            self._node(parts[3], lineno)
            self.edges.add((parts[1], parts[2], parts[3]))
        else:
            raise FormatError(f'unexpected {keyword!r} inside block {self.name}', lineno)

    def _node(self, node_id: str, lineno: int) -> GraphNode:
        if node_id not in self.nodes:
            raise FormatError(f'unknown node {node_id}', lineno)
        return self.nodes[node_id]

    def build(self, lineno: int) -> AsGraph:
        if self.root is None:
            raise FormatError(f'block {self.name} has no root', lineno)
        try:
            return AsGraph(tuple(self.nodes.values()), frozenset(self.edges), self.root)
        except GraphError as exc:
            raise FormatError(f'block {self.name}: {exc}', lineno)


def _split_type_line(line: str) -> List[str]:
    """Split on whitespace, keeping a bracketed type string in one piece."""
    head, bracket, rest = line.partition('[')
    parts = head.split()
    if bracket:
        parts.append('[' + rest.strip())
    return parts


def _read_blocks(source: Text, header: str, extra=None) -> Dict[str, AsGraph]:
    graphs: Dict[str, AsGraph] = {}
    block: Optional[_BlockBuilder] = None
    for lineno, raw in _lines(source):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = _split_type_line(line)
        if parts[0] == header:
            if block is not None:
                raise FormatError(f'{header} {block.name} is missing its end line', lineno)
            if len(parts) != 2:
                raise FormatError(f'expected: {header} <name>', lineno)
            if parts[1] in graphs:
                raise FormatError(f'duplicate {header} {parts[1]}', lineno)
            block = _BlockBuilder(parts[1], lineno)
        elif parts[0] == 'end':
            if block is None:
                raise FormatError('end without an open block', lineno)
            graphs[block.name] = block.build(lineno)
            block = None
        elif block is not None:
            block.feed(parts, lineno)
        elif extra is not None:
            extra(parts, lineno)
        else:
            raise FormatError(f'unexpected {parts[0]!r} outside a block', lineno)
    if block is not None:
        raise FormatError(f'{header} {block.name} is missing its end line')
    return graphs


def read_lexicon(source: Text, name: str = 'lexicon') -> Lexicon:
    omega = []
    mod_sources = []

    def extra(parts: List[str], lineno: int):
        if parts[0] == 'omega' and len(parts) == 2:
            try:
                omega.append(parse_type(parts[1]))
            except TypeSyntaxError as exc:
                raise FormatError(str(exc), lineno)
        elif parts[0] == 'modlabel' and len(parts) == 2:
            try:
                single(parts[1])
            except TypeSyntaxError as exc:
                raise FormatError(str(exc), lineno)
            mod_sources.append(parts[1])
        else:
            raise FormatError(f'unexpected line starting with {parts[0]!r}', lineno)

    constants = _read_blocks(source, 'constant', extra)
    try:
        return Lexicon.from_parts(constants, omega, mod_sources, name)
    except (GraphError, ValueError) as exc:
        raise FormatError(str(exc))


def read_graphs(source: Text) -> Dict[str, AsGraph]:
    return _read_blocks(source, 'graph')


def _graph_lines(header: str, name: str, g: AsGraph) -> List[str]:
    lines = [f'{header} {name}']
    for node in g.nodes:
        lines.append(f'node {node.id} {node.label if node.label is not None else "_"}')
    lines.append(f'root {g.root}')
    for node in g.nodes:
        if node.source is not None:
            req = node.effective_request
            lines.append(f'source {node.id} {node.source}' + (f' request {serialize_type(req)}' if req else ''))
    for a, label, b in sorted(g.edges):
        lines.append(f'edge {a} {label} {b}')
    lines.append('end')
    return lines


def write_graph(name: str, g: AsGraph) -> str:
    return '\n'.join(_graph_lines('graph', name, g)) + '\n'


def write_lexicon(lex: Lexicon) -> str:
    """Canonical lexicon text; omega and modlabel lines only where the constants do not imply them."""
    lines = []
    for name in sorted(lex.constants):
        lines.extend(_graph_lines('constant', name, lex.constants[name]))
        lines.append('')
    implied = {lex.type_of(name) for name in lex.constants}
    for t in lex.sorted_omega():
        if t not in implied:
            lines.append(f'omega {serialize_type(t)}')
    for label in lex.mod_labels:
        lines.append(f'modlabel {label.source}')
    return '\n'.join(lines).rstrip('\n') + '\n'


@dataclass
class TreeRecord:
    """One block of a tree file: a tree, or the reason there is none."""
    sid: str
    tree: Optional[AmDepTree] = None
    status: str = 'ok'


def read_trees(source: Text) -> List[TreeRecord]:
    records = []
    sid = None
    status = 'ok'
    rows: List[TreeEntry] = []
    start = 0

    def flush(lineno: int):
        nonlocal sid, status, rows
        if rows or status != 'ok':
            name = sid if sid is not None else str(len(records) + 1)
            tree = None
            if rows:
                try:
                    tree = AmDepTree(tuple(rows))
                except InvalidTree as exc:
                    raise FormatError(f'tree {name}: {exc}', start)
            records.append(TreeRecord(name, tree, status))
        sid, status, rows = None, 'ok', []

    for lineno, raw in _lines(source):
        line = raw.strip()
        if not line:
            flush(lineno)
            continue
        if line.startswith('#'):
            words = line[1:].split()
            if words and words[0] == 'sentence':
                if rows:
                    flush(lineno)
                sid = words[1] if len(words) > 1 else None
                status = words[2].lower() if len(words) > 2 else 'ok'
                start = lineno
            continue
        cols = raw.split('\t')
        if len(cols) != 5:
            raise FormatError(f'expected 5 tab-separated columns, found {len(cols)}', lineno)
        if not rows:
            start = lineno
        try:
            index, head = int(cols[0]), int(cols[3])
            label = EdgeLabel.parse(cols[4])
        except ValueError as exc:
            raise FormatError(str(exc), lineno)
        rows.append(TreeEntry(index, cols[1], cols[2], head, label))
    flush(0)
    return records


def write_tree(tree: AmDepTree, sid: Optional[str] = None) -> str:
    lines = [f'# sentence {sid}'] if sid is not None else []
    for e in tree.entries:
        lines.append(f'{e.index}\t{e.form}\t{e.constant}\t{e.head}\t{e.label}')
    return '\n'.join(lines) + '\n'


def write_trees(records: Iterable[TreeRecord]) -> str:
    blocks = []
    for record in records:
        if record.tree is None:
            blocks.append(f'# sentence {record.sid} {record.status.upper()}\n')
        else:
            blocks.append(write_tree(record.tree, record.sid))
    return '\n'.join(blocks)
