"""
Projective decoder.

Items are ([i,k], r, lexical, applied): token r heads the tokens of [i,k)
that are not skipped, carries the constant's lexical type, and has already
been given APP children for the sources in `applied`. Its term type is
lexical minus applied, provided that is apply-reachable; only items with a
term type can become dependents or goals.

Rules: Init assigns a supertag, Skip-L/Skip-R absorb an ignored neighbour,
Arc-L/Arc-R join adjacent items with an APP or MOD edge, and goal assembly
adds the ROOT edge to a full-span item of empty term type.
"""

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from amparser.algebra import EMPTY, Type, remaining_type, request, type_combine
from amparser.costs import INF, SentenceCosts, top_k_tags
from amparser.models import (BOTTOM, IGNORE, ROOT, STATUS_NO_PARSE, STATUS_OK, AmDepTree, EdgeLabel,
                             ParseOutcome, TreeEntry)

logger = logging.getLogger(__name__)

LEFT = 'left'
RIGHT = 'right'

Signature = Tuple[int, int, int, Type, FrozenSet[str]]


@dataclass(frozen=True, eq=False)
class ParseItem:
    start: int
    end: int
    head: int
    lexical: Type
    applied: FrozenSet[str]
    cost: float
    back: Tuple = field(default=(), repr=False)

    @property
    def type(self) -> Optional[Type]:
        """Term type, or None while the applied sources leave it unreachable."""
        return remaining_type(self.lexical, self.applied)

    @property
    def signature(self) -> Signature:
        return self.start, self.end, self.head, self.lexical, self.applied

    @property
    def is_goal(self) -> bool:
        return bool(self.back) and self.back[0] == 'goal'

    def __len__(self) -> int:
        return self.end - self.start


@lru_cache(maxsize=65536)
def attach(lexical: Type, applied: FrozenSet[str], label: EdgeLabel, dep_type: Type) -> Optional[FrozenSet[str]]:
    """
    Applied-source set after giving a head of lexical type `lexical` a
    dependent of term type `dep_type` along `label`; None if not allowed.
    """
    if label.is_app:
        alpha = label.source
        if alpha not in lexical.nodes or alpha in applied or request(lexical, alpha) != dep_type:
            return None
        return applied | {alpha}
    if label.is_mod:
        return applied if type_combine(label, lexical, dep_type) is not None else None
    return None


def rule_init(i: int, constant: str, costs: SentenceCosts, lexicon) -> Optional[ParseItem]:
    if not 1 <= i <= costs.n:
        raise ValueError(f'Token {i} out of range')
    cost = costs.tag(i, constant)
    if cost == INF:
        return None
    return ParseItem(i, i + 1, i, lexicon.type_of(constant), frozenset(), cost, ('init', constant))


def rule_skip(item: ParseItem, side: str, costs: SentenceCosts) -> ParseItem:
    """Extend `item` by one ignored token on `side`."""
    if side == LEFT:
        if item.start < 2:
            raise ValueError(f'Cannot skip left of token {item.start}')
        token, start, end = item.start - 1, item.start - 1, item.end
    elif side == RIGHT:
        if item.end > costs.n:
            raise ValueError(f'Cannot skip right of span ending at {item.end}')
        token, start, end = item.end, item.start, item.end + 1
    else:
        raise ValueError(f'Unknown side {side!r}')
    cost = item.cost + costs.tag(token, BOTTOM) + costs.edge(0, token, IGNORE)
    return ParseItem(start, end, item.head, item.lexical, item.applied, cost, ('skip', item, token))


def rule_arc(left: ParseItem, right: ParseItem, label: EdgeLabel, costs: SentenceCosts,
             head_side: str = LEFT) -> Optional[ParseItem]:
    """
    Join adjacent items with an edge between their heads. head_side=LEFT is
    Arc-R (the left item's head takes the right head as dependent).
    """
    if left.end != right.start:
        raise ValueError(f'Spans [{left.start},{left.end}) and [{right.start},{right.end}) are not adjacent')
    head, dep = (left, right) if head_side == LEFT else (right, left)
    dep_type = dep.type
    if dep_type is None:
        return None
    applied = attach(head.lexical, head.applied, label, dep_type)
    if applied is None:
        return None
    cost = head.cost + dep.cost + costs.edge(head.head, dep.head, label)
    return ParseItem(left.start, right.end, head.head, head.lexical, applied, cost, ('arc', head, dep, label))


def assemble_goal(item: ParseItem, costs: SentenceCosts) -> ParseItem:
    if (item.start, item.end) != (1, costs.n + 1):
        raise ValueError(f'Goal needs the full span, item covers [{item.start},{item.end})')
    if item.type != EMPTY:
        raise ValueError(f'Goal needs term type [], item has {item.type}')
    cost = item.cost + costs.edge(0, item.head, ROOT)
    return ParseItem(0, costs.n + 1, item.head, item.lexical, item.applied, cost, ('goal', item))


def init_items(costs: SentenceCosts, lexicon, k_tags: Optional[int]) -> List[ParseItem]:
    items = []
    for i in range(1, costs.n + 1):
        for constant, _ in top_k_tags(costs, i, k_tags, allowed=lexicon.constants):
            item = rule_init(i, constant, costs, lexicon)
            if item is not None:
                items.append(item)
    return items


def combinations(left_items: Iterable[ParseItem], right_items: Iterable[ParseItem],
                 lexicon, costs: SentenceCosts) -> Iterable[ParseItem]:
    """All finite-cost Arc-R and Arc-L results of adjacent item lists."""
    right_items = list(right_items)
    left_items = list(left_items)
    labels = lexicon.arc_labels
    for head_side, heads, deps in ((LEFT, left_items, right_items), (RIGHT, right_items, left_items)):
        by_type: Dict[Type, List[ParseItem]] = {}
        for dep in deps:
            dep_type = dep.type
            if dep_type is not None:
                by_type.setdefault(dep_type, []).append(dep)
        if not by_type:
            continue
        for head in heads:
            for dep_type, group in by_type.items():
                for label in labels:
                    applied = attach(head.lexical, head.applied, label, dep_type)
                    if applied is None:
                        continue
                    for dep in group:
                        edge = costs.edge(head.head, dep.head, label)
                        if edge == INF:
                            continue
                        left, right = (head, dep) if head_side == LEFT else (dep, head)
                        yield ParseItem(left.start, right.end, head.head, head.lexical, applied,
                                        head.cost + dep.cost + edge, ('arc', head, dep, label))


def decisions(item: ParseItem) -> Dict[int, Tuple[str, Optional[int], EdgeLabel]]:
    """
    Token decisions made inside an item's derivation: constant, head and
    label per token. The item's own head gets head None unless the item is
    a goal.
    """
    out: Dict[int, Tuple[str, Optional[int], EdgeLabel]] = {}
    stack: List[Tuple[ParseItem, Optional[int], Optional[EdgeLabel]]] = [(item, None, None)]
    while stack:
        current, parent, label = stack.pop()
        kind = current.back[0]
        if kind == 'goal':
            stack.append((current.back[1], 0, ROOT))
        elif kind == 'init':
            out[current.head] = (current.back[1], parent, label)
        elif kind == 'skip':
            token = current.back[2]
            out[token] = (BOTTOM, 0, IGNORE)
            stack.append((current.back[1], parent, label))
        elif kind == 'arc':
            _, head, dep, arc_label = current.back
            stack.append((head, parent, label))
            stack.append((dep, current.head, arc_label))
        else:
            raise ValueError(f'Unknown backpointer {kind!r}')
    return out


def item_tree(goal: ParseItem, costs: SentenceCosts) -> AmDepTree:
    """Read the tree off a goal item's backpointers."""
    chosen = decisions(goal)
    entries = []
    for i in range(1, costs.n + 1):
        constant, head, label = chosen.get(i, (BOTTOM, 0, IGNORE))
        entries.append(TreeEntry(i, costs.forms[i - 1], constant, head, label))
    return AmDepTree(tuple(entries))


class Chart:
    """Best item per signature, grouped by span in discovery order."""

    def __init__(self):
        self.best: Dict[Signature, ParseItem] = {}
        self.spans: Dict[Tuple[int, int], Dict[Signature, None]] = {}

    def add(self, item: Optional[ParseItem]) -> bool:
        if item is None or item.cost == INF:
            return False
        sig = item.signature
        known = self.best.get(sig)
        if known is not None and known.cost <= item.cost:
            return False
        self.best[sig] = item
        self.spans.setdefault((item.start, item.end), {})[sig] = None
        return True

    def span(self, i: int, k: int) -> List[ParseItem]:
        return [self.best[sig] for sig in self.spans.get((i, k), {})]

    def __len__(self) -> int:
        return len(self.best)


def build_chart(costs: SentenceCosts, lexicon, k_tags: Optional[int] = None) -> Chart:
    """Close the chart under every rule, shortest spans first."""
    n = costs.n
    chart = Chart()
    for item in init_items(costs, lexicon, k_tags):
        chart.add(item)
    for length in range(2, n + 1):
        for i in range(1, n + 2 - length):
            k = i + length
            for item in chart.span(i + 1, k):
                chart.add(rule_skip(item, LEFT, costs))
            for item in chart.span(i, k - 1):
                chart.add(rule_skip(item, RIGHT, costs))
            for m in range(i + 1, k):
                for item in combinations(chart.span(i, m), chart.span(m, k), lexicon, costs):
                    chart.add(item)
    return chart


def best_goal(items: Iterable[ParseItem], costs: SentenceCosts) -> Optional[ParseItem]:
    goal = None
    for item in items:
        if item.type != EMPTY:
            continue
        candidate = assemble_goal(item, costs)
        if candidate.cost == INF:
            continue
        if goal is None or candidate.cost < goal.cost:
            goal = candidate
    return goal


def chart_parse(costs: SentenceCosts, lexicon, k_tags: Optional[int] = None,
                on_chart: Optional[Callable[[Chart], None]] = None) -> ParseOutcome:
    """
    Exhaustive Viterbi decoding over all projective well-typed trees.

    Returns a ParseOutcome with status ok and the cheapest tree, or status
    no-parse when no goal item has finite cost.
    """
    started = time.perf_counter()
    chart = build_chart(costs, lexicon, k_tags)
    if on_chart is not None:
        on_chart(chart)
    goal = best_goal(chart.span(1, costs.n + 1), costs)
    stats = {'items': len(chart), 'elapsed': time.perf_counter() - started}
    logger.debug(f'Chart for sentence {costs.sid}: {len(chart)} items in {stats["elapsed"]:.3f}s')
    if goal is None:
        return ParseOutcome(STATUS_NO_PARSE, None, INF, stats)
    return ParseOutcome(STATUS_OK, item_tree(goal, costs), goal.cost, stats)
