"""
Exhaustive reference decoder.

Enumerates every projective dependency structure over every subset of
attached tokens and prices each with a small dynamic program over
constant/label choices. Exponential; meant for sentences of a handful of
tokens, where it checks the chart and A* decoders.
"""

import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from amparser.algebra import EMPTY, Type, fold_children
from amparser.costs import INF, SentenceCosts, top_k_tags
from amparser.evaluation import check_well_typed
from amparser.models import BOTTOM, IGNORE, ROOT, AmDepTree, EdgeLabel, TreeEntry

logger = logging.getLogger(__name__)

# token -> (constant, head or None, label or None)
Constraints = Dict[int, Tuple[str, Optional[int], Optional[EdgeLabel]]]
Structure = Tuple[int, Tuple[Tuple[int, int], ...]]


@lru_cache(maxsize=None)
def projective_trees(tokens: Tuple[int, ...]) -> List[Structure]:
    """All projective trees over an ordered token sequence, as (root, ((dependent, head), ...))."""
    results = []
    for p, root in enumerate(tokens):
        for left in _forests(tokens[:p]):
            for right in _forests(tokens[p + 1:]):
                arcs = []
                for sub_root, sub_arcs in left + right:
                    arcs.append((sub_root, root))
                    arcs.extend(sub_arcs)
                results.append((root, tuple(sorted(arcs))))
    return results


@lru_cache(maxsize=None)
def _forests(tokens: Tuple[int, ...]) -> List[Tuple[Structure, ...]]:
    if not tokens:
        return [()]
    out = []
    for cut in range(1, len(tokens) + 1):
        for tree in projective_trees(tokens[:cut]):
            for rest in _forests(tokens[cut:]):
                out.append((tree,) + rest)
    return out


class _Pricer:
    def __init__(self, costs: SentenceCosts, lexicon, constraints: Constraints, k_tags: Optional[int]):
        self.costs = costs
        self.lexicon = lexicon
        self.constraints = constraints
        self.candidates = {
            i: [name for name, _ in top_k_tags(costs, i, k_tags, allowed=lexicon.constants)]
            for i in range(1, costs.n + 1)
        }

    def constants_for(self, i: int) -> List[str]:
        fixed = self.constraints.get(i)
        if fixed is not None:
            return [fixed[0]] if fixed[0] in self.candidates[i] else []
        return self.candidates[i]

    def labels_for(self, i: int) -> List[EdgeLabel]:
        fixed = self.constraints.get(i)
        if fixed is not None and fixed[2] is not None:
            return [fixed[2]]
        return self.lexicon.arc_labels

    def price(self, root: int, arcs: Sequence[Tuple[int, int]]):
        """Cheapest well-typed assignment for one structure, or None."""
        children: Dict[int, List[int]] = {}
        for dep, head in arcs:
            children.setdefault(head, []).append(dep)
        tables: Dict[int, Dict[Type, Tuple[float, str, Tuple]]] = {}
        for token in _postorder(root, children):
            tables[token] = self._node(token, sorted(children.get(token, [])), tables)
            if not tables[token]:
                return None
        best = tables[root].get(EMPTY)
        if best is None:
            return None
        total = best[0] + self.costs.edge(0, root, ROOT)
        if total == INF:
            return None
        return total, tables

    def _node(self, token: int, kids: List[int], tables) -> Dict[Type, Tuple[float, str, Tuple]]:
        out: Dict[Type, Tuple[float, str, Tuple]] = {}
        for constant in self.constants_for(token):
            lexical = self.lexicon.type_of(constant)
            # state: (MOD (label, type) pairs, APP (source, type) pairs)
            states = {(frozenset(), frozenset()): (self.costs.tag(token, constant), ())}
            for kid in kids:
                grown = {}
                for (mods, apps), (cost, picks) in states.items():
                    used = {source for source, _ in apps}
                    for label in self.labels_for(kid):
                        edge = self.costs.edge(token, kid, label)
                        if edge == INF:
                            continue
                        for kid_type, (kid_cost, _, _) in tables[kid].items():
                            if label.is_app:
                                if label.source in used:
                                    continue
                                key = (mods, apps | {(label.source, kid_type)})
                            elif label.is_mod:
                                if fold_children(lexical, [(label, kid_type)])[0] is None:
                                    continue
                                key = (mods | {(label, kid_type)}, apps)
                            else:
                                continue
                            total = cost + edge + kid_cost
                            if key not in grown or total < grown[key][0]:
                                grown[key] = (total, picks + ((kid, label, kid_type),))
                states = grown
            for (cost, picks) in states.values():
                term, _ = fold_children(lexical, [(label, kid_type) for _, label, kid_type in picks])
                if term is None:
                    continue
                if term not in out or cost < out[term][0]:
                    out[term] = (cost, constant, picks)
        return out


def _postorder(root: int, children: Dict[int, List[int]]) -> List[int]:
    order = []
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in children.get(node, []))
    return order


def _read_tree(costs: SentenceCosts, root: int, tables) -> AmDepTree:
    rows = {i: (BOTTOM, 0, IGNORE) for i in range(1, costs.n + 1)}
    stack = [(root, EMPTY, 0, ROOT)]
    while stack:
        token, term, head, label = stack.pop()
        _, constant, picks = tables[token][term]
        rows[token] = (constant, head, label)
        for kid, kid_label, kid_type in picks:
            stack.append((kid, kid_type, token, kid_label))
    return AmDepTree(tuple(TreeEntry(i, costs.forms[i - 1], *rows[i]) for i in range(1, costs.n + 1)))


def _head_ok(arcs: Sequence[Tuple[int, int]], root: int, constraints: Constraints) -> bool:
    heads = dict(arcs)
    heads[root] = 0
    for token, (_, head, _) in constraints.items():
        if head is not None and token in heads and heads[token] != head:
            return False
    return True


def best_projective_tree(costs: SentenceCosts, lexicon, constraints: Optional[Constraints] = None,
                         k_tags: Optional[int] = None) -> Optional[Tuple[AmDepTree, float]]:
    """
    Cheapest well-typed projective tree by exhaustive enumeration.

    Args:
        costs: the sentence's cost table
        lexicon: graph lexicon
        constraints: optional fixed (constant, head, label) per token; BOT
            forces a token to be ignored, head/label None leave them free
        k_tags: per-token supertag pruning, as in the other decoders

    Returns:
        (tree, cost) or None if no finite-cost tree exists.
    """
    constraints = constraints or {}
    pricer = _Pricer(costs, lexicon, constraints, k_tags)
    forced_out = {i for i, (constant, _, _) in constraints.items() if constant == BOTTOM}
    forced_in = {i for i, (constant, _, _) in constraints.items() if constant != BOTTOM}
    free = [i for i in range(1, costs.n + 1) if i not in forced_out and i not in forced_in]
    best: Optional[Tuple[AmDepTree, float]] = None
    for size in range(len(free) + 1):
        for extra in itertools.combinations(free, size):
            attached = tuple(sorted(forced_in | set(extra)))
            if not attached:
                continue
            skipped = 0.0
            for i in range(1, costs.n + 1):
                if i not in attached:
                    skipped += costs.tag(i, BOTTOM) + costs.edge(0, i, IGNORE)
            if skipped == INF:
                continue
            for root, arcs in projective_trees(attached):
                if not _head_ok(arcs, root, constraints):
                    continue
                priced = pricer.price(root, arcs)
                if priced is None:
                    continue
                total, tables = priced
                total += skipped
                if best is not None and total >= best[1]:
                    continue
                tree = _read_tree(costs, root, tables)
                if not check_well_typed(tree, lexicon).ok:
                    logger.error(f'Sentence {costs.sid}: priced tree fails type checking')
                    continue
                best = (tree, total)
    return best
