"""
Tree-level records shared by the decoders: edge labels, AM dependency trees,
typing reports and decoder outcomes.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from amparser.algebra import SOURCE_NAME, Type

BOTTOM = 'BOT'

APP = 'APP'
MOD = 'MOD'
ROOT_KIND = 'ROOT'
IGNORE_KIND = 'IGNORE'


class InvalidTree(ValueError):
    """Raised when head/label/constant columns do not form an AM dependency tree."""


@dataclass(frozen=True, order=True)
class EdgeLabel:
    kind: str
    source: Optional[str] = None

    def __post_init__(self):
        if self.kind in (APP, MOD):
            if not self.source or not SOURCE_NAME.fullmatch(self.source):
                raise ValueError(f'{self.kind} label needs a source name, got {self.source!r}')
        elif self.kind in (ROOT_KIND, IGNORE_KIND):
            if self.source is not None:
                raise ValueError(f'{self.kind} label carries no source')
        else:
            raise ValueError(f'Unknown edge label kind: {self.kind!r}')

    @property
    def is_app(self) -> bool:
        return self.kind == APP

    @property
    def is_mod(self) -> bool:
        return self.kind == MOD

    def __str__(self) -> str:
        if self.source is None:
            return self.kind
        return f'{self.kind}_{self.source}'

    @classmethod
    def parse(cls, text: str) -> 'EdgeLabel':
        """Read the on-disk spelling: APP_s, MOD_m, ROOT, IGNORE."""
        text = text.strip()
        if text in (ROOT_KIND, IGNORE_KIND):
            return cls(text)
        kind, sep, source = text.partition('_')
        if not sep or kind not in (APP, MOD):
            raise ValueError(f'Unknown edge label: {text!r}')
        return cls(kind, source)


ROOT = EdgeLabel(ROOT_KIND)
IGNORE = EdgeLabel(IGNORE_KIND)


def app(source: str) -> EdgeLabel:
    return EdgeLabel(APP, source)


def mod(source: str) -> EdgeLabel:
    return EdgeLabel(MOD, source)


@dataclass(frozen=True)
class TreeEntry:
    index: int
    form: str
    constant: str
    head: int
    label: EdgeLabel

    @property
    def ignored(self) -> bool:
        return self.constant == BOTTOM


@dataclass(frozen=True)
class AmDepTree:
    """
    An AM dependency tree over tokens 1..n; node 0 is the artificial root.

    Ignored tokens carry BOTTOM and an IGNORE edge from 0; exactly one token
    hangs off 0 with ROOT; every other token has an APP or MOD edge.
    """
    entries: Tuple[TreeEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(self.entries))
        n = len(self.entries)
        if n == 0:
            raise InvalidTree('A tree needs at least one token')
        roots = []
        for pos, entry in enumerate(self.entries, start=1):
            if entry.index != pos:
                raise InvalidTree(f'Token {pos} is numbered {entry.index}')
            if not 0 <= entry.head <= n or entry.head == pos:
                raise InvalidTree(f'Token {pos} has head {entry.head} out of range')
            if entry.ignored != (entry.label == IGNORE):
                raise InvalidTree(f'Token {pos}: IGNORE edges go exactly with {BOTTOM}')
            if entry.label in (IGNORE, ROOT) and entry.head != 0:
                raise InvalidTree(f'Token {pos}: {entry.label} edges must come from 0')
            if entry.label == ROOT:
                roots.append(pos)
            elif not entry.ignored and (entry.head == 0 or not (entry.label.is_app or entry.label.is_mod)):
                raise InvalidTree(f'Token {pos} needs an APP or MOD edge from a token')
        if len(roots) != 1:
            raise InvalidTree(f'Expected exactly one ROOT token, found {len(roots)}')
        for entry in self.entries:
            if entry.ignored:
                continue
            seen = set()
            pos = entry.index
            while pos != 0:
                if pos in seen:
                    raise InvalidTree(f'Token {entry.index} lies on a cycle')
                seen.add(pos)
                parent = self.entries[pos - 1]
                if parent.ignored:
                    raise InvalidTree(f'Token {pos} hangs below an ignored token')
                pos = parent.head

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def root(self) -> int:
        return next(e.index for e in self.entries if e.label == ROOT)

    @property
    def forms(self) -> Tuple[str, ...]:
        return tuple(e.form for e in self.entries)

    def entry(self, i: int) -> TreeEntry:
        return self.entries[i - 1]

    def attached(self) -> List[int]:
        return [e.index for e in self.entries if not e.ignored]

    def children(self, i: int) -> List[TreeEntry]:
        """Dependents of token i in ascending token order."""
        return [e for e in self.entries if e.head == i and not e.ignored and e.label != ROOT]

    def is_projective(self) -> bool:
        """No head-dependent arc crosses another, ignored tokens disregarded."""
        arcs = [(min(e.index, e.head), max(e.index, e.head)) for e in self.entries
                if not e.ignored and e.label != ROOT]
        for a, b in arcs:
            for c, d in arcs:
                if a < c < b < d:
                    return False
        root = self.root
        return all(not (a < root < b) for a, b in arcs)

    @classmethod
    def build(cls, rows) -> 'AmDepTree':
        """Build from (form, constant, head, label) tuples for tokens 1..n."""
        return cls(tuple(
            TreeEntry(i, form, constant, head, label if isinstance(label, EdgeLabel) else EdgeLabel.parse(label))
            for i, (form, constant, head, label) in enumerate(rows, start=1)
        ))


@dataclass
class TypingReport:
    ok: bool
    term_types: Dict[int, Type] = field(default_factory=dict)
    failure: Optional[Tuple[int, str]] = None

    def to_dict(self) -> Dict:
        return {
            'ok': self.ok,
            'term_types': {str(i): str(t) for i, t in sorted(self.term_types.items())},
            'failure': None if self.failure is None else {'token': self.failure[0], 'reason': self.failure[1]},
        }


STATUS_OK = 'ok'
STATUS_NO_PARSE = 'no-parse'
STATUS_LIMIT = 'limit'


@dataclass
class ParseOutcome:
    """What a decoder hands back for one sentence."""
    status: str
    tree: Optional[AmDepTree] = None
    cost: float = float('inf')
    stats: Dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK
