"""
Constructive procedures over the transition systems: transition sequences
that build a given tree, completion of any reachable configuration to a goal,
and a seeded random walk that exercises both.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from amparser.algebra import EMPTY, apply_set, serialize_type
from amparser.evaluation import check_well_typed
from amparser.formats import read_trees, write_tree
from amparser.lexicon import require_closed
from amparser.models import AmDepTree
from amparser.transitions import (APPLY, FINISH, LTF, LTL, MODIFY, Configuration, IllegalTransition,
                                  InvariantViolation, Transition, TransitionSystem, apply, choose, config_to_tree,
                                  finish, init, modify, parse_transition, pop)

logger = logging.getLogger(__name__)


def oracle_sequence(tree: AmDepTree, system: TransitionSystem) -> List[Transition]:
    """
    Transitions that build `tree`: Init at the root, then depth first with
    children in ascending token order, APP children before MOD children.

    Raises:
        ValueError: if the tree is not well-typed.
        IllegalTransition: if the tree cannot be derived (a MOD dependent
            whose term type is outside the type inventory).
    """
    report = check_well_typed(tree, system.lexicon)
    if not report.ok:
        token, reason = report.failure
        raise ValueError(f'Tree is not well-typed at token {token}: {reason}')
    sequence = [init(tree.root)]

    def ordered_children(i: int):
        kids = tree.children(i)
        return [c for c in kids if c.label.is_app] + [c for c in kids if c.label.is_mod]

    def edge(child) -> Transition:
        return apply(child.label.source, child.index) if child.label.is_app else modify(child.label.source, child.index)

    def visit_ltf(i: int):
        sequence.append(choose(report.term_types[i], tree.entry(i).constant))
        for child in ordered_children(i):
            sequence.append(edge(child))
            visit_ltf(child.index)
        sequence.append(pop())

    def visit_ltl(i: int):
        kids = ordered_children(i)
        sequence.extend(edge(child) for child in kids)
        sequence.append(finish(tree.entry(i).constant))
        for child in kids:
            visit_ltl(child.index)

    if system.system == LTF:
        visit_ltf(tree.root)
    else:
        visit_ltl(tree.root)
    cfg = system.initial(tree.n)
    for tr in sequence:
        cfg = system.apply_transition(cfg, tr)
    return sequence


def replay(system: TransitionSystem, n: int, transitions: List[Transition],
           cfg: Optional[Configuration] = None) -> List[Configuration]:
    """Apply transitions one by one with legality checks; returns every configuration visited."""
    configs = [cfg or system.initial(n)]
    for tr in transitions:
        configs.append(system.apply_transition(configs[-1], tr))
    return configs


def _first_constant(system: TransitionSystem, t) -> str:
    return system.lexicon.constants_of_type(t)[0]


def _minimizer(system: TransitionSystem, cfg: Configuration, i: int):
    """Lexical type, term type and apply set attaining token i's owed count; ties by serialization."""
    covered = cfg.applied.get(i, frozenset())
    lexicals = [system.lexicon.type_of(cfg.constants[i])] if i in cfg.constants else system.omega
    best = None
    for lam in lexicals:
        for t in sorted(cfg.types[i], key=serialize_type):
            consumed = apply_set(lam, t)
            if consumed is None or not covered <= consumed:
                continue
            key = (len(consumed - covered), serialize_type(lam), serialize_type(t))
            if best is None or key < best[0]:
                best = (key, lam, t, consumed)
    if best is None:
        raise InvariantViolation(f'Token {i} has no lexical type left: {cfg.canonical()}')
    return best[1], best[2], best[3]


def completion_step(system: TransitionSystem, cfg: Configuration) -> List[Transition]:
    """One round of completion from `cfg`; empty at a goal."""
    if system.is_goal(cfg):
        return []
    if cfg.is_initial:
        closing = [choose(EMPTY, _first_constant(system, EMPTY)), pop()] if system.system == LTF \
            else [finish(_first_constant(system, EMPTY))]
        return [init(1)] + closing
    i = cfg.top
    headless = cfg.headless()
    if system.system == LTF:
        if i not in cfg.constants:
            t = min(cfg.types[i], key=lambda ty: (not system.lexicon.constants_of_type(ty), serialize_type(ty)))
            return [choose(t, _first_constant(system, t)), pop()]
        lam = system.lexicon.type_of(cfg.constants[i])
        (t,) = cfg.types[i]
        missing = sorted(apply_set(lam, t) - cfg.applied[i])
        out = []
        for alpha, j in zip(missing, headless):
            req = lam.induced(lam.successors(alpha))
            out.extend([apply(alpha, j), choose(req, _first_constant(system, req)), pop()])
        return out + [pop()]
    lam, t, consumed = _minimizer(system, cfg, i)
    missing = sorted(consumed - cfg.applied[i])
    return [apply(alpha, j) for alpha, j in zip(missing, headless)] + [finish(_first_constant(system, lam))]


def complete_config(system: TransitionSystem, cfg: Configuration,
                    check: bool = True) -> Tuple[List[Transition], Configuration]:
    """
    Extend `cfg` to a goal configuration.

    With `check`, every round must shrink the stack (LTF) or add exactly one
    Finish (LTL), and the LTL run may hold at most n Finish transitions.

    Returns:
        The transitions taken and the goal configuration.
    """
    taken: List[Transition] = []
    rounds = 0
    while not system.is_goal(cfg):
        before = cfg
        step = completion_step(system, cfg)
        for tr in step:
            cfg = system.apply_transition(cfg, tr)
        taken.extend(step)
        rounds += 1
        if check:
            if system.system == LTF and not before.is_initial and len(cfg.stack) >= len(before.stack):
                raise InvariantViolation(f'Completion round did not shrink the stack: {before.canonical()}')
            if system.system == LTL:
                finishes = sum(1 for tr in step if tr.kind == FINISH)
                if finishes != 1:
                    raise InvariantViolation(f'Completion round added {finishes} Finish transitions')
                if len(cfg.constants) > cfg.n:
                    raise InvariantViolation(f'More than {cfg.n} Finish transitions')
        if rounds > 2 * cfg.n + 2:
            raise InvariantViolation(f'Completion does not terminate from {before.canonical()}')
    return taken, cfg


@dataclass
class Episode:
    seed: int
    system: str
    lexicon: str
    n: int
    random_steps: int
    trace: List[Tuple[str, str]] = field(default_factory=list)
    tree: Optional[AmDepTree] = None

    @property
    def transitions(self) -> List[Transition]:
        return [parse_transition(text) for _, text in self.trace]

    def to_dict(self) -> Dict:
        return {
            'seed': self.seed,
            'system': self.system,
            'lexicon': self.lexicon,
            'n': self.n,
            'random_steps': self.random_steps,
            'trace': [{'digest': d, 'transition': t} for d, t in self.trace],
            'tree': write_tree(self.tree) if self.tree is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Episode':
        records = read_trees(data['tree']) if data.get('tree') else []
        return cls(data['seed'], data['system'], data['lexicon'], data['n'], data['random_steps'],
                   [(step['digest'], step['transition']) for step in data['trace']],
                   records[0].tree if records else None)


APPLY_WEIGHT = 4


def fuzz_episode(seed: int, system: TransitionSystem, n: int, steps: int, weighted: bool = False) -> Episode:
    """
    Take `steps` random legal transitions from the initial configuration,
    then complete. Deterministic under `seed`. `weighted` favours Apply and
    Modify to reach deep stacks.
    """
    require_closed(system.lexicon)
    rng = random.Random(seed)
    cfg = system.initial(n)
    episode = Episode(seed, system.system, system.lexicon.name, n, 0)
    for _ in range(steps):
        legal = system.legal_transitions(cfg)
        if not legal:
            break
        if weighted:
            weights = [APPLY_WEIGHT if tr.kind in (APPLY, MODIFY) else 1 for tr in legal]
            tr = rng.choices(legal, weights=weights, k=1)[0]
        else:
            tr = rng.choice(legal)
        cfg = system.apply_transition(cfg, tr)
        episode.trace.append((cfg.digest(), str(tr)))
        episode.random_steps += 1
    rest, _ = complete_config(system, cfg)
    for tr in rest:
        cfg = system.apply_transition(cfg, tr)
        episode.trace.append((cfg.digest(), str(tr)))
    episode.tree = config_to_tree(cfg)
    logger.debug(f'Episode {seed} ({system.system}, n={n}): {len(episode.trace)} transitions')
    return episode


def replay_episode(episode: Episode, system: TransitionSystem) -> bool:
    """Re-run an episode's trace and compare every configuration digest and the final tree."""
    cfg = system.initial(episode.n)
    try:
        for digest, text in episode.trace:
            cfg = system.apply_transition(cfg, parse_transition(text))
            if cfg.digest() != digest:
                return False
    except IllegalTransition:
        return False
    return system.is_goal(cfg) and config_to_tree(cfg) == episode.tree
