"""
Supertag and edge cost tables.

A sentence's costs are a sparse map; anything not listed costs +inf. The
on-disk format is line oriented:

    sentence <id> <n>
    form <i> <string>
    tag <i> <constant|BOT> <cost>
    edge <o> <j> <label> <cost>
    end
"""

import io
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, TextIO, Tuple, Union

from amparser.models import BOTTOM, IGNORE, ROOT, AmDepTree, EdgeLabel

logger = logging.getLogger(__name__)

INF = math.inf


class CostFileError(ValueError):
    """Raised for malformed or invalid cost data; carries the line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line else message)


@dataclass(frozen=True)
class SentenceCosts:
    sid: str
    n: int
    forms: Tuple[str, ...]
    tag_costs: Dict[Tuple[int, str], float] = field(default_factory=dict)
    edge_costs: Dict[Tuple[int, int, EdgeLabel], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'forms', tuple(self.forms))
        if self.n < 1:
            raise CostFileError(f'Sentence {self.sid}: token count must be positive')
        if len(self.forms) != self.n:
            raise CostFileError(f'Sentence {self.sid}: {len(self.forms)} forms for {self.n} tokens')
        for (i, name), cost in self.tag_costs.items():
            if not 1 <= i <= self.n:
                raise CostFileError(f'Sentence {self.sid}: tag index {i} out of range')
            _check_cost(cost, f'tag {i} {name}')
        for (o, j, label), cost in self.edge_costs.items():
            _check_edge(self.n, o, j, label, self.sid)
            _check_cost(cost, f'edge {o} {j} {label}')

    def tag(self, i: int, constant: str) -> float:
        return self.tag_costs.get((i, constant), INF)

    def edge(self, o: int, j: int, label: EdgeLabel) -> float:
        return self.edge_costs.get((o, j, label), INF)

    def incoming(self, j: int) -> Iterator[Tuple[int, EdgeLabel, float]]:
        for (o, target, label), cost in self.edge_costs.items():
            if target == j:
                yield o, label, cost

    def tags_for(self, i: int) -> Iterator[Tuple[str, float]]:
        for (token, name), cost in self.tag_costs.items():
            if token == i:
                yield name, cost


def _check_cost(cost: float, what: str):
    if not isinstance(cost, (int, float)) or math.isnan(cost) or math.isinf(cost):
        raise CostFileError(f'{what}: cost must be a finite number, got {cost!r}')
    if cost < 0:
        raise CostFileError(f'{what}: negative cost {cost}')


def _check_edge(n: int, o: int, j: int, label: EdgeLabel, sid: str):
    if not 1 <= j <= n:
        raise CostFileError(f'Sentence {sid}: edge target {j} out of range')
    if label in (ROOT, IGNORE):
        if o != 0:
            raise CostFileError(f'Sentence {sid}: {label} edges must start at 0')
    elif not 1 <= o <= n or o == j:
        raise CostFileError(f'Sentence {sid}: {label} edge {o}->{j} must join two distinct tokens')


def _number(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CostFileError(f'not a number: {text!r}', line)
    if math.isnan(value) or math.isinf(value):
        raise CostFileError(f'cost must be finite: {text!r}', line)
    if value < 0:
        raise CostFileError(f'negative cost {text}', line)
    return value


def _integer(text: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise CostFileError(f'not an integer: {text!r}', line)


def load_costs(source: Union[str, TextIO]) -> List[SentenceCosts]:
    """
    Read every sentence block from a cost file.

    Args:
        source: file contents or an open text stream

    Returns:
        The sentences in file order.

    Raises:
        CostFileError: on syntax errors, negative costs, bad indices or labels.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    sentences = []
    current = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = line.split()
        keyword = parts[0]
        if keyword == 'sentence':
            if current is not None:
                raise CostFileError('sentence block opened before the previous one ended', lineno)
            if len(parts) != 3:
                raise CostFileError('expected: sentence <id> <n>', lineno)
            current = {'sid': parts[1], 'n': _integer(parts[2], lineno), 'forms': {}, 'tags': {}, 'edges': {}}
            continue
        if current is None:
            raise CostFileError(f'{keyword!r} outside a sentence block', lineno)
        n = current['n']
        if keyword == 'form':
            parts = line.split(None, 2)
            if len(parts) != 3:
                raise CostFileError('expected: form <i> <string>', lineno)
            i = _integer(parts[1], lineno)
            if not 1 <= i <= n:
                raise CostFileError(f'form index {i} out of range', lineno)
            current['forms'][i] = parts[2]
        elif keyword == 'tag':
            if len(parts) != 4:
                raise CostFileError('expected: tag <i> <constant|BOT> <cost>', lineno)
            i = _integer(parts[1], lineno)
            if not 1 <= i <= n:
                raise CostFileError(f'tag index {i} out of range', lineno)
            current['tags'][(i, parts[2])] = _number(parts[3], lineno)
        elif keyword == 'edge':
            if len(parts) != 5:
                raise CostFileError('expected: edge <o> <j> <label> <cost>', lineno)
            o, j = _integer(parts[1], lineno), _integer(parts[2], lineno)
            try:
                label = EdgeLabel.parse(parts[3])
            except ValueError as exc:
                raise CostFileError(str(exc), lineno)
            try:
                _check_edge(n, o, j, label, current['sid'])
            except CostFileError as exc:
                raise CostFileError(str(exc), lineno)
            current['edges'][(o, j, label)] = _number(parts[4], lineno)
        elif keyword == 'end':
            forms = tuple(current['forms'].get(i, f'w{i}') for i in range(1, n + 1))
            try:
                sentences.append(SentenceCosts(current['sid'], n, forms, current['tags'], current['edges']))
            except CostFileError as exc:
                raise CostFileError(str(exc), lineno)
            current = None
        else:
            raise CostFileError(f'unknown keyword {keyword!r}', lineno)
    if current is not None:
        raise CostFileError(f'sentence {current["sid"]} is missing its end line')
    return sentences


def _fmt(cost: float) -> str:
    return repr(float(cost)) if cost != int(cost) else str(int(cost))


def dump_costs(sentences: Iterable[SentenceCosts]) -> str:
    """Canonical text for a list of sentences: tags and edges sorted."""
    lines = []
    for s in sentences:
        lines.append(f'sentence {s.sid} {s.n}')
        for i, form in enumerate(s.forms, start=1):
            lines.append(f'form {i} {form}')
        for (i, name), cost in sorted(s.tag_costs.items()):
            lines.append(f'tag {i} {name} {_fmt(cost)}')
        for (o, j, label), cost in sorted(s.edge_costs.items(), key=lambda kv: (kv[0][1], kv[0][0], str(kv[0][2]))):
            lines.append(f'edge {o} {j} {label} {_fmt(cost)}')
        lines.append('end')
    return '\n'.join(lines) + ('\n' if lines else '')


def tree_cost(tree: AmDepTree, costs: SentenceCosts) -> float:
    """Sum of the tree's supertag and edge costs; +inf if any decision is unpriced."""
    if tree.n != costs.n:
        raise ValueError(f'Tree has {tree.n} tokens, costs have {costs.n}')
    total = 0.0
    for e in tree.entries:
        total += costs.tag(e.index, e.constant) + costs.edge(e.head, e.index, e.label)
    return total


@dataclass(frozen=True)
class SyntheticParams:
    lo: float = 0.0
    hi: float = 1.0
    decimals: int = 3

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo < 0 or self.hi < self.lo:
            raise ValueError(f'Cost range must satisfy 0 <= lo <= hi, got [{self.lo}, {self.hi}]')
        if self.decimals < 0:
            raise ValueError('decimals must be non-negative')


def legal_edges(n: int, lexicon) -> Iterator[Tuple[int, int, EdgeLabel]]:
    """Every edge a tree over n tokens could use with this lexicon's labels."""
    arc_labels = lexicon.arc_labels
    for j in range(1, n + 1):
        yield 0, j, ROOT
        yield 0, j, IGNORE
        for o in range(1, n + 1):
            if o != j:
                for label in arc_labels:
                    yield o, j, label


def gen_synthetic(seed: int, n: int, lexicon, params: Optional[SyntheticParams] = None,
                  sid: Optional[str] = None) -> SentenceCosts:
    """Uniform random costs for every tag and every legal edge, reproducible under `seed`."""
    if n < 1:
        raise ValueError('n must be at least 1')
    params = params or SyntheticParams()
    rng = random.Random(seed)

    def draw() -> float:
        return round(rng.uniform(params.lo, params.hi), params.decimals)

    names = sorted(lexicon.constants) + [BOTTOM]
    tags = {(i, name): draw() for i in range(1, n + 1) for name in names}
    edges = {edge: draw() for edge in legal_edges(n, lexicon)}
    return SentenceCosts(sid or f's{seed}', n, tuple(f'w{i}' for i in range(1, n + 1)), tags, edges)


def gold_zero_costs(tree: AmDepTree, lexicon, sid: str = 'gold') -> SentenceCosts:
    """Price every decision: 0 for those `tree` makes, 1 for everything else."""
    gold_tags = {(e.index, e.constant) for e in tree.entries}
    gold_edges = {(e.head, e.index, e.label) for e in tree.entries}
    names = sorted(lexicon.constants) + [BOTTOM]
    tags = {(i, name): 0.0 if (i, name) in gold_tags else 1.0
            for i in range(1, tree.n + 1) for name in names}
    edges = {edge: 0.0 if edge in gold_edges else 1.0 for edge in legal_edges(tree.n, lexicon)}
    return SentenceCosts(sid, tree.n, tree.forms, tags, edges)


def top_k_tags(costs: SentenceCosts, i: int, k: Optional[int] = None,
               allowed: Optional[Iterable[str]] = None) -> List[Tuple[str, float]]:
    """
    The k cheapest non-BOTTOM constants for token i, by ascending cost and
    then name. k=None keeps them all; `allowed` restricts to a lexicon.
    """
    if not 1 <= i <= costs.n:
        raise ValueError(f'Token {i} out of range 1..{costs.n}')
    if k is not None and k < 1:
        raise ValueError('k must be at least 1')
    allowed_set = set(allowed) if allowed is not None else None
    ranked = sorted(
        ((name, cost) for name, cost in costs.tags_for(i)
         if name != BOTTOM and (allowed_set is None or name in allowed_set)),
        key=lambda pair: (pair[1], pair[0]),
    )
    return ranked if k is None else ranked[:k]
