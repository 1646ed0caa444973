"""
Type checking and evaluation of AM dependency trees.
"""

import logging
from typing import Dict, List, Optional, Tuple

from amparser.algebra import EMPTY, Type, app_order, fold_children
from amparser.graphs import AsGraph, graph_apply, graph_modify
from amparser.models import AmDepTree, TypingReport

logger = logging.getLogger(__name__)


class NotWellTyped(ValueError):
    """Raised when evaluating a tree whose typing report is not ok."""

    def __init__(self, report: TypingReport):
        self.report = report
        token, reason = report.failure if report.failure else (0, 'unknown')
        super().__init__(f'Tree is not well-typed at token {token}: {reason}')


def _postorder(tree: AmDepTree) -> List[int]:
    order = []
    stack: List[Tuple[int, bool]] = [(tree.root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        stack.append((node, True))
        for child in reversed(tree.children(node)):
            stack.append((child.index, False))
    return order


def check_well_typed(tree: AmDepTree, lexicon) -> TypingReport:
    """
    Compute the term type of every subtree bottom-up.

    The report fails at the first node (in post-order) whose fold is
    undefined, or at the root when its term type is not empty.
    """
    term_types: Dict[int, Type] = {}
    for i in _postorder(tree):
        entry = tree.entry(i)
        if entry.constant not in lexicon.constants:
            return TypingReport(False, term_types, (i, f'unknown constant {entry.constant}'))
        children = [(c.label, term_types[c.index]) for c in tree.children(i)]
        term, reason = fold_children(lexicon.type_of(entry.constant), children)
        if term is None:
            logger.debug(f'Token {i} ({entry.form}) fails to type: {reason}')
            return TypingReport(False, term_types, (i, reason))
        if i == tree.root and term != EMPTY:
            return TypingReport(False, term_types, (i, f'root term type {term} is not []'))
        term_types[i] = term
    return TypingReport(True, term_types, None)


def evaluate_tree(tree: AmDepTree, lexicon, report: Optional[TypingReport] = None) -> AsGraph:
    """
    Evaluate a well-typed tree to its graph.

    At every head the MOD children are glued first, then the APP children in
    the same source order the type checker uses.

    Raises:
        NotWellTyped: if the tree fails type checking.
    """
    report = report or check_well_typed(tree, lexicon)
    if not report.ok:
        raise NotWellTyped(report)
    graphs: Dict[int, AsGraph] = {}
    for i in _postorder(tree):
        entry = tree.entry(i)
        current = lexicon.constants[entry.constant].relabel(f'{i}.')
        children = tree.children(i)
        for child in children:
            if child.label.is_mod:
                current = graph_modify(current, child.label.source, graphs.pop(child.index))
        apps = {c.label.source: c.index for c in children if c.label.is_app}
        for alpha in app_order(lexicon.type_of(entry.constant), apps):
            current = graph_apply(current, alpha, graphs.pop(apps[alpha]))
        graphs[i] = current
    return graphs[tree.root]
