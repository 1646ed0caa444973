"""
Agenda-based A* over the projective item schema.

Items are popped in order of cost plus an outside estimate; the first goal
item popped is optimal because every estimate is admissible and never
decreases along a derivation. Four estimates are available, from weakest to
tightest: trivial, supertag, edge and ignore-aware. The edge and
ignore-aware estimates also charge the item head for its cheapest incoming
ROOT, APP or MOD edge, which it has not paid yet.
"""

import heapq
import itertools
import logging
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Tuple

from amparser.algebra import EMPTY, serialize_type
from amparser.chart import (LEFT, RIGHT, ParseItem, Signature, assemble_goal, combinations, init_items, item_tree,
                            rule_skip)
from amparser.costs import INF, SentenceCosts
from amparser.models import (BOTTOM, IGNORE, ROOT, STATUS_LIMIT, STATUS_NO_PARSE, STATUS_OK, ParseOutcome)

logger = logging.getLogger(__name__)

TRIVIAL = 'trivial'
SUPERTAG = 'supertag'
EDGE = 'edge'
IGNORE_AWARE = 'ignore-aware'
HEURISTICS = (TRIVIAL, SUPERTAG, EDGE, IGNORE_AWARE)


@dataclass
class SearchStats:
    dequeued: int = 0
    pushed: int = 0
    goal_cost: Optional[float] = None
    elapsed: float = 0.0
    limit_hit: bool = False

    def to_dict(self) -> Dict:
        return asdict(self)


def token_bounds(kind: str, costs: SentenceCosts, lexicon=None) -> List[float]:
    """
    Per-token lower bound on what a token outside an item will add to any
    completed tree; index 0 unused.
    """
    if kind not in HEURISTICS:
        raise ValueError(f'Unknown heuristic {kind!r}; expected one of {", ".join(HEURISTICS)}')
    n = costs.n
    bounds = [0.0] * (n + 1)
    if kind == TRIVIAL:
        return bounds
    allowed = None if lexicon is None else set(lexicon.constants)
    for j in range(1, n + 1):
        tags = [(name, cost) for name, cost in costs.tags_for(j)
                if name == BOTTOM or allowed is None or name in allowed]
        best_tag = min((cost for _, cost in tags), default=INF)
        best_constant = min((cost for name, cost in tags if name != BOTTOM), default=INF)
        incoming = list(costs.incoming(j))
        if kind == SUPERTAG:
            bounds[j] = best_tag
        elif kind == EDGE:
            bounds[j] = best_tag + min((cost for _, _, cost in incoming), default=INF)
        else:
            ignored = costs.tag(j, BOTTOM) + costs.edge(0, j, IGNORE)
            attached = best_constant + min((cost for _, label, cost in incoming
                                            if label.is_app or label.is_mod), default=INF)
            rooted = best_constant + costs.edge(0, j, ROOT)
            bounds[j] = min(ignored, attached, rooted)
    return bounds


def head_bounds(kind: str, costs: SentenceCosts) -> List[float]:
    """Cheapest ROOT, APP or MOD edge into each token; zeros for the tag-only estimates."""
    bounds = [0.0] * (costs.n + 1)
    if kind in (EDGE, IGNORE_AWARE):
        for j in range(1, costs.n + 1):
            bounds[j] = min((cost for _, label, cost in costs.incoming(j) if label != IGNORE), default=INF)
    return bounds


class OutsideEstimate:
    """O(1) outside cost of an item from prefix sums of token bounds."""

    def __init__(self, kind: str, costs: SentenceCosts, lexicon=None):
        self.kind = kind
        self.bounds = token_bounds(kind, costs, lexicon)
        self.head = head_bounds(kind, costs)
        n = costs.n
        self.prefix = [0.0] * (n + 1)
        self.suffix = [0.0] * (n + 2)
        for j in range(1, n + 1):
            self.prefix[j] = self.prefix[j - 1] + self.bounds[j]
        for j in range(n, 0, -1):
            self.suffix[j] = self.suffix[j + 1] + self.bounds[j]
        self.n = n

    def __call__(self, item: ParseItem) -> float:
        if item.start == 0:
            return 0.0
        return self.span(item.start, item.end) + self.head[item.head]

    def span(self, start: int, end: int) -> float:
        """Bounds of the tokens outside [start, end)."""
        return self.prefix[start - 1] + self.suffix[end]


def heuristic(kind: str, item: ParseItem, costs: SentenceCosts, lexicon=None) -> float:
    return OutsideEstimate(kind, costs, lexicon)(item)


class Agenda:
    """Priority queue ordered by (f, span length, head, lexical type, applied sources)."""

    def __init__(self):
        self.heap: List[Tuple] = []
        self.counter = itertools.count()

    def push(self, item: ParseItem, f: float):
        key = (f, len(item), item.head, serialize_type(item.lexical), tuple(sorted(item.applied)), next(self.counter))
        heapq.heappush(self.heap, key + (item,))

    def pop(self) -> Tuple[float, ParseItem]:
        entry = heapq.heappop(self.heap)
        return entry[0], entry[-1]

    def __len__(self) -> int:
        return len(self.heap)


def astar_parse(costs: SentenceCosts, lexicon, kind: str = IGNORE_AWARE, k_tags: Optional[int] = 6,
                dequeue_limit: int = 1_000_000,
                observer: Optional[Callable[[ParseItem, float], None]] = None) -> ParseOutcome:
    """
    A* decoding.

    Args:
        costs: the sentence's cost table
        lexicon: graph lexicon
        kind: outside estimate, one of HEURISTICS
        k_tags: Init restricted to the k cheapest constants per token (None: all)
        dequeue_limit: give up after this many pops
        observer: called with every non-stale dequeued item and its estimate

    Returns:
        ParseOutcome with status ok, no-parse (agenda exhausted) or limit.
    """
    if dequeue_limit < 1:
        raise ValueError('dequeue_limit must be at least 1')
    started = time.perf_counter()
    estimate = OutsideEstimate(kind, costs, lexicon)
    stats = SearchStats()
    agenda = Agenda()
    pushed_cost: Dict[Signature, float] = {}
    done: Dict[Signature, ParseItem] = {}
    starts: Dict[int, List[ParseItem]] = {}
    ends: Dict[int, List[ParseItem]] = {}
    full = (1, costs.n + 1)

    def push(item: Optional[ParseItem]):
        if item is None or item.cost == INF:
            return
        sig = item.signature
        if sig in done or pushed_cost.get(sig, INF) <= item.cost:
            return
        pushed_cost[sig] = item.cost
        agenda.push(item, item.cost + estimate(item))
        stats.pushed += 1

    for item in init_items(costs, lexicon, k_tags):
        push(item)

    outcome = None
    while agenda:
        if stats.dequeued >= dequeue_limit:
            stats.limit_hit = True
            logger.warning(f'Sentence {costs.sid}: dequeue limit {dequeue_limit} reached')
            outcome = ParseOutcome(STATUS_LIMIT, None, INF)
            break
        f, item = agenda.pop()
        sig = item.signature
        if sig in done:
            continue
        stats.dequeued += 1
        done[sig] = item
        if observer is not None:
            observer(item, f - item.cost)
        if item.is_goal:
            stats.goal_cost = item.cost
            outcome = ParseOutcome(STATUS_OK, item_tree(item, costs), item.cost)
            break
        if item.start > 1:
            push(rule_skip(item, LEFT, costs))
        if item.end <= costs.n:
            push(rule_skip(item, RIGHT, costs))
        for new in combinations(ends.get(item.start, []), [item], lexicon, costs):
            push(new)
        for new in combinations([item], starts.get(item.end, []), lexicon, costs):
            push(new)
        starts.setdefault(item.start, []).append(item)
        ends.setdefault(item.end, []).append(item)
        if (item.start, item.end) == full and item.type == EMPTY:
            push(assemble_goal(item, costs))
    if outcome is None:
        outcome = ParseOutcome(STATUS_NO_PARSE, None, INF)
    stats.elapsed = time.perf_counter() - started
    outcome.stats = stats.to_dict()
    logger.debug(f'A* ({kind}) sentence {costs.sid}: {outcome.status}, '
                 f'{stats.dequeued} dequeued / {stats.pushed} pushed')
    return outcome
