"""
The LTF and LTL transition systems.

A configuration holds the incoming edge of each attached token (E), its
possible term types (T), the APP sources it has already covered (A), its
constant (G) and a stack whose top is the active token. LTF picks a token's
constant before drawing its edges (Choose ... Pop); LTL draws the edges first
and then picks a constant that fits them (Finish).

Both systems only offer transitions from which a goal configuration is still
reachable: every token that owes APP edges keeps enough headless tokens in
reserve (the W - O budget).
"""

import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from amparser.algebra import EMPTY, Type, apply_set, parse_type, request, serialize_type, type_combine
from amparser.costs import SentenceCosts, tree_cost
from amparser.formats import FormatError
from amparser.models import (BOTTOM, IGNORE, ROOT, STATUS_OK, AmDepTree, EdgeLabel, ParseOutcome, TreeEntry,
                             app, mod)

logger = logging.getLogger(__name__)

LTF = 'ltf'
LTL = 'ltl'
SYSTEMS = (LTF, LTL)

INIT = 'Init'
CHOOSE = 'Choose'
APPLY = 'Apply'
MODIFY = 'Modify'
POP = 'Pop'
FINISH = 'Finish'

KIND_ORDER = {INIT: 0, APPLY: 1, MODIFY: 2, CHOOSE: 3, FINISH: 3, POP: 4}


class IllegalTransition(ValueError):
    """Raised when a transition is not in the legal set of a configuration."""


class InvariantViolation(AssertionError):
    """Raised by debug checks when a configuration breaks a system invariant."""


@dataclass(frozen=True)
class Transition:
    kind: str
    token: Optional[int] = None
    source: Optional[str] = None
    type: Optional[Type] = None
    constant: Optional[str] = None

    def __str__(self) -> str:
        if self.kind == INIT:
            return f'Init({self.token})'
        if self.kind == CHOOSE:
            return f'Choose({serialize_type(self.type)}, {self.constant})'
        if self.kind in (APPLY, MODIFY):
            return f'{self.kind}({self.source},{self.token})'
        if self.kind == FINISH:
            return f'Finish({self.constant})'
        return POP

    def sort_key(self) -> Tuple:
        return (KIND_ORDER[self.kind], self.token or 0, self.source or '', self.constant or '',
                serialize_type(self.type) if self.type is not None else '')

    @property
    def label(self) -> Optional[EdgeLabel]:
        if self.kind == APPLY:
            return app(self.source)
        if self.kind == MODIFY:
            return mod(self.source)
        return None


def init(i: int) -> Transition:
    return Transition(INIT, token=i)


def choose(t: Type, constant: str) -> Transition:
    return Transition(CHOOSE, type=t, constant=constant)


def apply(alpha: str, j: int) -> Transition:
    return Transition(APPLY, token=j, source=alpha)


def modify(beta: str, j: int) -> Transition:
    return Transition(MODIFY, token=j, source=beta)


def pop() -> Transition:
    return Transition(POP)


def finish(constant: str) -> Transition:
    return Transition(FINISH, constant=constant)


_PATTERNS = [
    (re.compile(r'Init\(\s*(\d+)\s*\)'), lambda m: init(int(m.group(1)))),
    (re.compile(r'Choose\(\s*(\[.*\])\s*,\s*([^\s,()]+)\s*\)'), lambda m: choose(parse_type(m.group(1)), m.group(2))),
    (re.compile(r'Apply\(\s*([a-z][a-z0-9_]*)\s*,\s*(\d+)\s*\)'), lambda m: apply(m.group(1), int(m.group(2)))),
    (re.compile(r'Modify\(\s*([a-z][a-z0-9_]*)\s*,\s*(\d+)\s*\)'), lambda m: modify(m.group(1), int(m.group(2)))),
    (re.compile(r'Pop'), lambda m: pop()),
    (re.compile(r'Finish\(\s*([^\s,()]+)\s*\)'), lambda m: finish(m.group(1))),
]


def parse_transition(text: str) -> Transition:
    """Read `Init(3)`, `Choose([s], sleep)`, `Apply(s,2)`, `Modify(m,6)`, `Pop` or `Finish(want)`."""
    text = text.strip()
    for pattern, build in _PATTERNS:
        match = pattern.fullmatch(text)
        if match:
            try:
                return build(match)
            except ValueError as exc:
                raise FormatError(f'{text!r}: {exc}')
    raise FormatError(f'Not a transition: {text!r}')


@dataclass(frozen=True)
class Configuration:
    """
    Value-semantic parser state. `edges` keeps insertion order, which is
    the order the edges were drawn in.
    """
    n: int
    edges: Dict[int, Tuple[int, EdgeLabel]] = field(default_factory=dict)
    types: Dict[int, FrozenSet[Type]] = field(default_factory=dict)
    applied: Dict[int, FrozenSet[str]] = field(default_factory=dict)
    constants: Dict[int, str] = field(default_factory=dict)
    stack: Tuple[int, ...] = ()

    @property
    def top(self) -> Optional[int]:
        return self.stack[-1] if self.stack else None

    @property
    def is_initial(self) -> bool:
        return not self.stack and not self.edges

    def headless(self) -> List[int]:
        return [j for j in range(1, self.n + 1) if j not in self.edges]

    @property
    def w(self) -> int:
        return sum(1 for j in range(1, self.n + 1) if j not in self.edges)

    def children(self, i: int) -> List[Tuple[int, EdgeLabel]]:
        """Dependents of i in the order their edges were drawn."""
        return [(j, label) for j, (head, label) in self.edges.items() if head == i]

    def canonical(self) -> str:
        parts = [
            f'n={self.n}',
            'E=' + ','.join(f'{h}>{j}:{lab}' for j, (h, lab) in sorted(self.edges.items())),
            'T=' + ','.join(f'{i}:' + '|'.join(sorted(serialize_type(t) for t in ts))
                            for i, ts in sorted(self.types.items())),
            'A=' + ','.join(f'{i}:' + '|'.join(sorted(a)) for i, a in sorted(self.applied.items())),
            'G=' + ','.join(f'{i}:{g}' for i, g in sorted(self.constants.items())),
            'S=' + ','.join(str(i) for i in self.stack),
        ]
        return ';'.join(parts)

    def digest(self) -> str:
        return hashlib.sha1(self.canonical().encode('utf-8')).hexdigest()


@dataclass
class Counters:
    w: int
    o: int
    owed: Dict[int, int]


def poss_lex(omega, t: Type, covered: FrozenSet[str], budget: int) -> FrozenSet[Type]:
    """Lexical types that can still end in term type t, covering `covered` plus at most `budget` more applies."""
    if budget < 0:
        return frozenset()
    out = set()
    for lam in omega:
        consumed = apply_set(lam, t)
        if consumed is not None and covered <= consumed and len(consumed - covered) <= budget:
            out.add(lam)
    return frozenset(out)


class TransitionSystem:
    """
    Legality and effects of the transitions of one system over one lexicon.

    Args:
        lexicon: a closed lexicon
        system: LTF or LTL
        type_check: False drops every type guard (LTL only), keeping stack
            discipline, headless targets and distinct APP sources
        debug: check goal definitions and invariants after every step
    """

    def __init__(self, lexicon, system: str, type_check: bool = True, debug: bool = False):
        if system not in SYSTEMS:
            raise ValueError(f'Unknown transition system {system!r}')
        if not type_check and system != LTL:
            raise ValueError('Type checks can only be switched off for LTL')
        self.lexicon = lexicon
        self.system = system
        self.type_check = type_check
        self.debug = debug
        self.omega = lexicon.sorted_omega()
        self._poss: Dict[Tuple, FrozenSet[Type]] = {}
        self._mod: Dict[Tuple, FrozenSet[Type]] = {}

    # -- type queries ------------------------------------------------------

    def poss_lex(self, t: Type, covered: FrozenSet[str], budget: int) -> FrozenSet[Type]:
        key = (t, covered, budget)
        if key not in self._poss:
            self._poss[key] = poss_lex(self.omega, t, covered, budget)
        return self._poss[key]

    def mod_types(self, lexical: Type, beta: str) -> FrozenSet[Type]:
        """Term types a MOD_beta dependent of a head with this lexical type may have."""
        key = (lexical, beta)
        if key not in self._mod:
            label = mod(beta)
            self._mod[key] = frozenset(t for t in self.omega if type_combine(label, lexical, t) is not None)
        return self._mod[key]

    def owed(self, cfg: Configuration, i: int) -> int:
        """
        APP edges token i still has to draw, minimised over the lexical
        types it may still get and its possible term types.
        """
        if not self.type_check or i not in cfg.types or i not in cfg.applied:
            return 0
        covered = cfg.applied[i]
        lexicals = [self.lexicon.type_of(cfg.constants[i])] if i in cfg.constants else self.omega
        best = None
        for lam in lexicals:
            for t in cfg.types[i]:
                consumed = apply_set(lam, t)
                if consumed is None or not covered <= consumed:
                    continue
                missing = len(consumed - covered)
                if best is None or missing < best:
                    best = missing
        return best or 0

    def counters(self, cfg: Configuration) -> Counters:
        owed = {i: self.owed(cfg, i) for i in cfg.types}
        return Counters(cfg.w, sum(owed.values()), owed)

    # -- legality ----------------------------------------------------------

    def initial(self, n: int) -> Configuration:
        if n < 1:
            raise ValueError('A sentence needs at least one token')
        return Configuration(n)

    def legal_transitions(self, cfg: Configuration) -> List[Transition]:
        """The legal set, in the fixed transition order."""
        if cfg.is_initial:
            return [init(i) for i in range(1, cfg.n + 1)]
        if not cfg.stack:
            return []
        if self.system == LTF:
            legal = self._legal_ltf(cfg)
        elif self.type_check:
            legal = self._legal_ltl(cfg)
        else:
            legal = self._legal_untyped(cfg)
        return sorted(legal, key=Transition.sort_key)

    def _legal_ltf(self, cfg: Configuration) -> List[Transition]:
        i = cfg.top
        out = []
        budget = cfg.w - self.counters(cfg).o
        if i not in cfg.constants:
            for t in cfg.types[i]:
                for lam in self.poss_lex(t, frozenset(), budget):
                    out.extend(choose(t, g) for g in self.lexicon.constants_of_type(lam))
            return out
        lam = self.lexicon.type_of(cfg.constants[i])
        (t,) = cfg.types[i]
        consumed = apply_set(lam, t)
        covered = cfg.applied[i]
        headless = cfg.headless()
        for alpha in sorted(consumed - covered):
            out.extend(apply(alpha, j) for j in headless)
        if budget >= 1:
            for label in self.lexicon.mod_labels:
                if self.mod_types(lam, label.source):
                    out.extend(modify(label.source, j) for j in headless)
        if covered == consumed:
            out.append(pop())
        return out

    def _legal_ltl(self, cfg: Configuration) -> List[Transition]:
        i = cfg.top
        out = []
        types = cfg.types[i]
        covered = cfg.applied[i]
        headless = cfg.headless()
        w = cfg.w
        if headless:
            for label in self.lexicon.app_labels:
                alpha = label.source
                if alpha in covered:
                    continue
                if any(self.poss_lex(t, covered | {alpha}, w - 1) for t in types):
                    out.extend(apply(alpha, j) for j in headless)
            if w - self.counters(cfg).o >= 1:
                for label in self.lexicon.mod_labels:
                    out.extend(modify(label.source, j) for j in headless)
        for lam in self.omega:
            if any(apply_set(lam, t) == covered for t in types):
                out.extend(finish(g) for g in self.lexicon.constants_of_type(lam))
        return out

    def _legal_untyped(self, cfg: Configuration) -> List[Transition]:
        i = cfg.top
        out = []
        covered = cfg.applied[i]
        for j in cfg.headless():
            out.extend(apply(label.source, j) for label in self.lexicon.app_labels if label.source not in covered)
            out.extend(modify(label.source, j) for label in self.lexicon.mod_labels)
        out.extend(finish(g) for g in sorted(self.lexicon.constants))
        return out

    def is_legal(self, cfg: Configuration, tr: Transition) -> bool:
        return tr in self.legal_transitions(cfg)

    # -- effects -----------------------------------------------------------

    def apply_transition(self, cfg: Configuration, tr: Transition, check: bool = True) -> Configuration:
        """
        Successor configuration.

        Raises:
            IllegalTransition: if `check` and tr is not legal in cfg.
        """
        if check and not self.is_legal(cfg, tr):
            raise IllegalTransition(f'{tr} is not legal ({self.system}) in {cfg.canonical()}')
        edges = dict(cfg.edges)
        types = dict(cfg.types)
        applied = dict(cfg.applied)
        constants = dict(cfg.constants)
        stack = list(cfg.stack)
        i = cfg.top
        if tr.kind == INIT:
            edges[tr.token] = (0, ROOT)
            types[tr.token] = frozenset([EMPTY])
            if self.system == LTL:
                applied[tr.token] = frozenset()
            stack = [tr.token]
        elif tr.kind == CHOOSE:
            types[i] = frozenset([tr.type])
            applied[i] = frozenset()
            constants[i] = tr.constant
        elif tr.kind == APPLY:
            edges[tr.token] = (i, app(tr.source))
            applied[i] = applied[i] | {tr.source}
            if self.system == LTF:
                types[tr.token] = frozenset([request(self.lexicon.type_of(constants[i]), tr.source)])
                stack.append(tr.token)
        elif tr.kind == MODIFY:
            edges[tr.token] = (i, mod(tr.source))
            if self.system == LTF:
                types[tr.token] = self.mod_types(self.lexicon.type_of(constants[i]), tr.source)
                stack.append(tr.token)
        elif tr.kind == POP:
            stack.pop()
        elif tr.kind == FINISH:
            self._finish(cfg, tr, types, applied, constants, stack)
        else:
            raise IllegalTransition(f'Unknown transition kind {tr.kind}')
        result = Configuration(cfg.n, edges, types, applied, constants, tuple(stack))
        if self.debug:
            self.check_invariants(result)
        return result

    def _finish(self, cfg, tr, types, applied, constants, stack):
        i = stack.pop()
        lam = self.lexicon.type_of(tr.constant)
        if self.type_check:
            types[i] = frozenset([lam.without(cfg.applied[i])])
        else:
            types[i] = frozenset([lam])
        constants[i] = tr.constant
        children = cfg.children(i)
        for j, label in children:
            applied[j] = frozenset()
            if not self.type_check:
                types[j] = frozenset([EMPTY])
            elif label.is_app:
                types[j] = frozenset([request(lam, label.source)])
            else:
                types[j] = self.mod_types(lam, label.source)
        stack.extend(j for j, _ in reversed(children))

    # -- goals and invariants ----------------------------------------------

    def is_goal(self, cfg: Configuration) -> bool:
        goal = not cfg.stack and bool(cfg.constants)
        if goal and self.debug and self.type_check:
            self._check_goal_definition(cfg)
        return goal

    def _check_goal_definition(self, cfg: Configuration):
        for i in range(1, cfg.n + 1):
            if i not in cfg.edges:
                continue
            types = cfg.types.get(i, frozenset())
            if len(types) != 1 or i not in cfg.constants:
                raise InvariantViolation(f'Goal token {i} has types {types} and constant {cfg.constants.get(i)}')
            (t,) = types
            if apply_set(self.lexicon.type_of(cfg.constants[i]), t) != cfg.applied.get(i):
                raise InvariantViolation(f'Goal token {i} has not covered its apply set')

    def check_invariants(self, cfg: Configuration):
        for i, covered in cfg.applied.items():
            drawn = {label.source for j, label in cfg.children(i) if label.is_app}
            if drawn != set(covered):
                raise InvariantViolation(f'Token {i}: covered {sorted(covered)} but APP edges for {sorted(drawn)}')
        if self.system == LTF and self.type_check:
            counters = self.counters(cfg)
            if counters.o > counters.w:
                raise InvariantViolation(f'O={counters.o} exceeds W={counters.w}')
        if self.system == LTL:
            finishes = len(cfg.constants)
            if finishes > cfg.n:
                raise InvariantViolation(f'{finishes} Finish transitions for {cfg.n} tokens')


def config_to_tree(cfg: Configuration, forms: Optional[Sequence[str]] = None) -> AmDepTree:
    """The tree a goal configuration describes; headless tokens are ignored."""
    if cfg.stack or not cfg.constants:
        raise ValueError(f'Not a goal configuration: {cfg.canonical()}')
    forms = list(forms) if forms is not None else [f'w{i}' for i in range(1, cfg.n + 1)]
    entries = []
    for i in range(1, cfg.n + 1):
        if i in cfg.edges:
            head, label = cfg.edges[i]
            entries.append(TreeEntry(i, forms[i - 1], cfg.constants[i], head, label))
        else:
            entries.append(TreeEntry(i, forms[i - 1], BOTTOM, 0, IGNORE))
    return AmDepTree(tuple(entries))


def _types_text(types: FrozenSet[Type]) -> str:
    return '{' + ', '.join(sorted(serialize_type(t) for t in types)) + '}'


def trace_table(configs: Sequence[Configuration], transitions: Sequence[Transition],
                forms: Optional[Sequence[str]] = None) -> List[Dict[str, str]]:
    """
    One row per transition: what it added to E, T, A and G, and the stack
    afterwards (bottom to top).
    """
    def name(i: int) -> str:
        return forms[i - 1] if forms else str(i)

    rows = []
    for step, (before, after, tr) in enumerate(zip(configs, configs[1:], transitions), start=1):
        e_delta = [f'{h}->{j} {lab}' for j, (h, lab) in after.edges.items() if j not in before.edges]
        t_delta = [f'{name(i)} -> {_types_text(ts)}' for i, ts in sorted(after.types.items())
                   if before.types.get(i) != ts]
        a_delta = [f'{name(i)} -> {{{", ".join(sorted(a))}}}' for i, a in sorted(after.applied.items())
                   if before.applied.get(i) != a]
        g_delta = [f'{name(i)} -> {g}' for i, g in sorted(after.constants.items()) if i not in before.constants]
        rows.append({
            'step': str(step),
            'E': '; '.join(e_delta),
            'T': '; '.join(t_delta),
            'A': '; '.join(a_delta),
            'G': '; '.join(g_delta),
            'stack': ' '.join(str(i) for i in after.stack),
            'transition': str(tr),
        })
    return rows


# -- scoring and decoding ---------------------------------------------------

def transition_cost(cfg: Configuration, tr: Transition, costs: SentenceCosts) -> float:
    """Static score of a transition: the cost of the edge or supertag it commits to."""
    if tr.kind == INIT:
        return costs.edge(0, tr.token, ROOT)
    if tr.kind in (APPLY, MODIFY):
        return costs.edge(cfg.top, tr.token, tr.label)
    if tr.kind in (CHOOSE, FINISH):
        return costs.tag(cfg.top, tr.constant)
    return 0.0


Scorer = Callable[[Configuration, Transition, SentenceCosts], float]


@dataclass
class _Beam:
    score: float
    keys: Tuple
    cfg: Configuration
    transitions: Tuple[Transition, ...] = ()


def decode(costs: SentenceCosts, system: TransitionSystem, beam: int = 1,
           scorer: Scorer = transition_cost) -> Tuple[ParseOutcome, List[Configuration], List[Transition]]:
    """
    Greedy (beam=1) or beam decoding with a static scorer; lower is better.

    Finished hypotheses stay in the beam unchanged while the others grow.
    Returns the outcome plus the configurations and transitions of the best
    derivation, for tracing.
    """
    if beam < 1:
        raise ValueError('beam must be at least 1')
    start = system.initial(costs.n)
    beams = [_Beam(0.0, (), start)]
    rounds = 0
    while not all(system.is_goal(b.cfg) for b in beams):
        candidates = []
        for b in beams:
            if system.is_goal(b.cfg):
                candidates.append((b.score, b.keys, b, None))
                continue
            legal = system.legal_transitions(b.cfg)
            if not legal:
                raise RuntimeError(f'Dead end after {len(b.transitions)} transitions: {b.cfg.canonical()}')
            for tr in legal:
                candidates.append((b.score + scorer(b.cfg, tr, costs), b.keys + (tr.sort_key(),), b, tr))
        candidates.sort(key=lambda c: (c[0], c[1]))
        beams = []
        for score, keys, parent, tr in candidates[:beam]:
            if tr is None:
                beams.append(parent)
            else:
                cfg = system.apply_transition(parent.cfg, tr, check=False)
                beams.append(_Beam(score, keys, cfg, parent.transitions + (tr,)))
        rounds += 1
        if rounds > 4 * costs.n + 4:
            raise RuntimeError('Decoding did not terminate')
    best = min(beams, key=lambda b: (b.score, b.keys))
    configs = [start]
    for tr in best.transitions:
        configs.append(system.apply_transition(configs[-1], tr, check=False))
    tree = config_to_tree(best.cfg, costs.forms)
    stats = {'transitions': len(best.transitions), 'score': best.score}
    logger.debug(f'{system.system} decode of {costs.sid}: {len(best.transitions)} transitions')
    return ParseOutcome(STATUS_OK, tree, tree_cost(tree, costs), stats), configs, list(best.transitions)
