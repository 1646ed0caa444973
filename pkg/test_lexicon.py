"""Closure validation and augmentation of graph lexicons."""

import pytest
from hypothesis import given, settings, strategies as st

from amparser.algebra import EMPTY, parse_type, single
from amparser.formats import read_lexicon
from amparser.graphs import graph_type, star_graph
from amparser.lexicon import (SYNTH_LABEL, Lexicon, LexiconNotClosed, augment_closure, empty_constant,
                              require_closed, validate_closure)
from amparser.models import IGNORE, ROOT, app, mod
from conftest import dag_types

# A control verb whose embedded argument type no constant realizes.
OPEN = """
constant persuade
node r persuade
node s _
node o _
root r
source s s
source o o request [s]
edge r ARG0 s
edge r ARG1 o
end

modlabel m
"""


def test_desk_lexicon_is_closed(desk):
    report = validate_closure(desk)
    assert report.closed
    assert report.to_dict() == {'closed': True, 'violations': []}
    assert require_closed(desk) is desk


def test_desk_inventory(desk):
    assert {str(t) for t in desk.omega} == {'[]', '[s]', '[m]', '[m, s]', '[o[s], s]'}
    assert set(desk.labels) == {app('m'), app('o'), app('s'), mod('m'), ROOT, IGNORE}
    assert desk.constants_of_type(single('s')) == ['sleep']
    assert empty_constant(desk) == 'writer'
    with pytest.raises(ValueError):
        desk.constants_of_type(parse_type('[a]'))


def test_violations_name_the_assumption():
    lex = read_lexicon(OPEN, name='open')
    report = validate_closure(lex)
    kinds = {k for k, _ in report.violations}
    assert 2 in kinds and 3 in kinds
    with pytest.raises(LexiconNotClosed) as info:
        require_closed(lex)
    assert info.value.report is not None


def test_augmentation_closes_the_lexicon():
    lex = read_lexicon(OPEN, name='open')
    closed = augment_closure(lex)
    assert validate_closure(closed).closed
    added = sorted(name for name in closed.constants if name not in lex.constants)
    assert added and all(name.startswith(SYNTH_LABEL) for name in added)
    for t in (EMPTY, single('s'), single('m')):
        assert t in closed.omega
        assert any(graph_type(closed.constants[name]) == t for name in closed.constants_of_type(t))
    assert app('m') in closed.labels


def test_augmentation_is_idempotent(desk):
    assert augment_closure(desk) is desk
    lex = augment_closure(read_lexicon(OPEN, name='open'))
    assert augment_closure(lex) is lex


def test_bottom_cannot_name_a_constant(desk):
    with pytest.raises(ValueError):
        Lexicon({'BOT': desk.constants['writer']}, frozenset(), frozenset())


@st.composite
def random_lexicons(draw):
    types = draw(st.lists(dag_types(), min_size=1, max_size=4))
    constants = {f'c{k}': star_graph(f'c{k}', t) for k, t in enumerate(types)}
    extra = draw(st.lists(dag_types(), max_size=2))
    modifiers = draw(st.sets(st.sampled_from(['a', 'm', 's', 'x']), max_size=2))
    return Lexicon.from_parts(constants, extra, modifiers, name='random')


@settings(max_examples=200, deadline=None)
@given(random_lexicons())
def test_augmentation_closes_random_lexicons(lex):
    closed = augment_closure(lex)
    assert validate_closure(closed).closed
    assert EMPTY in closed.omega
    for name in lex.constants:
        assert closed.type_of(name) == lex.type_of(name)
    assert lex.omega <= closed.omega and lex.labels <= closed.labels
    assert augment_closure(closed) is closed
