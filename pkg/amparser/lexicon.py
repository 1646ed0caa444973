"""
Graph lexicon: constants, the type inventory and the operation labels, with
the closure checks the transition systems rely on.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from slugify import slugify

from amparser.algebra import EMPTY, Type, request, serialize_type, single
from amparser.graphs import AsGraph, graph_type, star_graph
from amparser.models import BOTTOM, IGNORE, ROOT, EdgeLabel, app, mod

logger = logging.getLogger(__name__)

SYNTH_LABEL = '_synth'


class LexiconNotClosed(ValueError):
    """Raised when a transition decoder is handed a lexicon that fails validation."""

    def __init__(self, report: 'ClosureReport'):
        self.report = report
        super().__init__(f'Lexicon is not closed: {report.violations[0][1]}'
                         + (f' (and {len(report.violations) - 1} more)' if len(report.violations) > 1 else ''))


@dataclass(frozen=True)
class Lexicon:
    constants: Dict[str, AsGraph]
    omega: FrozenSet[Type]
    labels: FrozenSet[EdgeLabel]
    name: str = 'lexicon'
    _types: Dict[str, Type] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if BOTTOM in self.constants:
            raise ValueError(f'{BOTTOM} is reserved and cannot name a constant')
        types = {name: graph_type(g) for name, g in self.constants.items()}
        object.__setattr__(self, '_types', types)
        object.__setattr__(self, 'omega', frozenset(self.omega) | frozenset(types.values()))
        object.__setattr__(self, 'labels', frozenset(self.labels))

    def __hash__(self):
        return hash((self.name, self.omega, self.labels, tuple(sorted(self.constants))))

    def type_of(self, constant: str) -> Type:
        return self._types[constant]

    @property
    def sources(self) -> Set[str]:
        names: Set[str] = set()
        for t in self.omega:
            names |= t.nodes
        return names

    @property
    def app_labels(self) -> List[EdgeLabel]:
        return sorted(label for label in self.labels if label.is_app)

    @property
    def mod_labels(self) -> List[EdgeLabel]:
        return sorted(label for label in self.labels if label.is_mod)

    @property
    def arc_labels(self) -> List[EdgeLabel]:
        return self.app_labels + self.mod_labels

    def sorted_omega(self) -> List[Type]:
        return sorted(self.omega, key=serialize_type)

    def constants_of_type(self, t: Type) -> List[str]:
        """All constants of type `t`, lexicographically."""
        if t not in self.omega:
            raise ValueError(f'Type {t} is not in the lexicon type inventory')
        return sorted(name for name, ty in self._types.items() if ty == t)

    @classmethod
    def from_parts(cls, constants: Dict[str, AsGraph], extra_omega: Iterable[Type] = (),
                   mod_sources: Iterable[str] = (), name: str = 'lexicon') -> 'Lexicon':
        """
        Build a lexicon the way lexicon files describe one.

        Labels are ROOT, IGNORE, APP for every source a constant carries and
        MOD for every listed modifier source.
        """
        labels = {ROOT, IGNORE}
        for graph in constants.values():
            labels |= {app(s) for s in graph.sources}
        labels |= {mod(s) for s in mod_sources}
        return cls(dict(constants), frozenset(extra_omega), frozenset(labels), name)


@dataclass
class ClosureReport:
    violations: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def closed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            'closed': self.closed,
            'violations': [{'assumption': k, 'witness': w} for k, w in self.violations],
        }


def validate_closure(lex: Lexicon) -> ClosureReport:
    """Report every violated instance of the four closure assumptions."""
    report = ClosureReport()
    realized = set(lex._types.values())
    for t in lex.sorted_omega():
        if t not in realized:
            report.violations.append((1, f'no constant has type {t}'))
    for t in lex.sorted_omega():
        for alpha in sorted(t.nodes):
            req = request(t, alpha)
            if req not in lex.omega:
                report.violations.append((2, f'request({t}, {alpha}) = {req} is not in omega'))
    for label in lex.mod_labels:
        if single(label.source) not in lex.omega:
            report.violations.append((3, f'{label} is a label but [{label.source}] is not in omega'))
    labels = lex.labels
    for alpha in sorted(lex.sources):
        if app(alpha) not in labels:
            report.violations.append((4, f'source {alpha} occurs but APP_{alpha} is not a label'))
    return report


def _synth_name(t: Type, taken: Set[str]) -> str:
    base = f'{SYNTH_LABEL}_{slugify(serialize_type(t), separator="_") or "empty"}'
    candidate = base
    k = 2
    while candidate in taken:
        candidate = f'{base}_{k}'
        k += 1
    return candidate


def augment_closure(lex: Lexicon) -> Lexicon:
    """
    Close a lexicon: add requests and modifier types to omega, APP labels
    for every source, and one synthesized star constant per unrealized type.
    """
    omega: Set[Type] = set(lex.omega) | {single(label.source) for label in lex.mod_labels}
    pending = list(omega)
    while pending:
        t = pending.pop()
        for alpha in t.nodes:
            req = request(t, alpha)
            if req not in omega:
                omega.add(req)
                pending.append(req)
    labels = set(lex.labels)
    for t in omega:
        labels |= {app(alpha) for alpha in t.nodes}
    constants = dict(lex.constants)
    realized = set(lex._types.values())
    added = []
    for t in sorted(omega, key=serialize_type):
        if t in realized:
            continue
        name = _synth_name(t, set(constants))
        constants[name] = star_graph(SYNTH_LABEL, t)
        added.append(name)
    if not added and omega == set(lex.omega) and labels == set(lex.labels):
        return lex
    logger.info(f'Augmented lexicon {lex.name}: {len(omega) - len(lex.omega)} types, '
                f'{len(labels) - len(lex.labels)} labels, constants {added}')
    return Lexicon(constants, frozenset(omega), frozenset(labels), lex.name)


def require_closed(lex: Lexicon) -> Lexicon:
    report = validate_closure(lex)
    if not report.closed:
        raise LexiconNotClosed(report)
    return lex


def empty_constant(lex: Lexicon) -> Optional[str]:
    names = lex.constants_of_type(EMPTY) if EMPTY in lex.omega else []
    return names[0] if names else None
