"""Types, requests, type-level APP/MOD and apply sets."""

import pytest
from hypothesis import given, strategies as st

from amparser.algebra import (EMPTY, Type, TypeSyntaxError, app_order, apply_set, fold_children, parse_type,
                              remaining_type, request, serialize_type, single, type_combine)
from amparser.models import app, mod
from conftest import dag_types

WANT = parse_type('[s, o[s]]')


def test_serialization_lists_every_source_at_top_level():
    assert serialize_type(WANT) == '[o[s], s]'
    assert serialize_type(EMPTY) == '[]'
    assert str(parse_type('[m]')) == '[m]'


def test_spellings_of_the_same_type_compare_equal():
    assert parse_type('[o[s]]') == WANT
    assert parse_type('[ s , o [ s ] ]') == WANT
    assert parse_type('[]') == EMPTY


def test_edges_are_stored_transitively_closed():
    t = parse_type('[a[b[c]]]')
    assert ('a', 'c') in t.edges
    assert serialize_type(t) == '[a[b[c], c], b[c], c]'


@pytest.mark.parametrize('text', ['[s', 's]', '[S]', '[s, s[o]]', '[a[b], b[a]]', '[s] x', '[s,]'])
def test_malformed_types_are_rejected(text):
    with pytest.raises(TypeSyntaxError):
        parse_type(text)


def test_cyclic_request_structure_is_rejected():
    with pytest.raises(TypeSyntaxError):
        Type(frozenset(['a', 'b']), frozenset([('a', 'b'), ('b', 'a')]))


def test_request_is_the_reachable_sub_dag():
    assert request(WANT, 'o') == single('s')
    assert request(WANT, 's') == EMPTY
    with pytest.raises(KeyError):
        request(WANT, 'm')


def test_apply_needs_an_unrequested_source_and_a_matching_argument():
    assert type_combine(app('o'), WANT, single('s')) == single('s')
    assert type_combine(app('o'), WANT, EMPTY) is None
    # o still asks for s, so s cannot be filled first
    assert type_combine(app('s'), WANT, EMPTY) is None
    assert type_combine(app('s'), single('s'), EMPTY) == EMPTY
    assert type_combine(app('m'), single('s'), EMPTY) is None


def test_modify_keeps_the_head_type():
    sleep = single('s')
    assert type_combine(mod('m'), sleep, single('m')) == sleep
    assert type_combine(mod('m'), sleep, parse_type('[s, m]')) == sleep
    assert type_combine(mod('m'), EMPTY, parse_type('[s, m]')) is None
    assert type_combine(mod('m'), sleep, single('s')) is None
    assert type_combine(mod('m'), sleep, parse_type('[m[s], s]')) is None


def test_type_combine_rejects_structural_labels():
    from amparser.models import ROOT
    with pytest.raises(ValueError):
        type_combine(ROOT, EMPTY, EMPTY)


def test_apply_sets():
    assert apply_set(WANT, EMPTY) == frozenset({'s', 'o'})
    assert apply_set(WANT, single('s')) == frozenset({'o'})
    assert apply_set(WANT, WANT) == frozenset()
    assert apply_set(WANT, single('o')) is None
    assert apply_set(single('s'), single('m')) is None


def test_app_order_follows_the_requests():
    assert app_order(WANT, {'s', 'o'}) == ['o', 's']
    assert app_order(WANT, {'s'}) is None
    assert app_order(parse_type('[a, b]'), {'b', 'a'}) == ['a', 'b']


def test_fold_children_applies_mods_first():
    term, reason = fold_children(WANT, [(app('s'), EMPTY), (app('o'), single('s')), (mod('m'), single('m'))])
    assert term == EMPTY
    term, reason = fold_children(WANT, [(app('s'), EMPTY), (mod('m'), parse_type('[a, m]'))])
    assert term is None
    assert 'MOD_m' in reason
    term, reason = fold_children(single('s'), [(mod('m'), single('m'))])
    assert term == single('s') and reason is None
    term, reason = fold_children(WANT, [(app('s'), EMPTY), (app('o'), single('s'))])
    assert term == EMPTY


def test_fold_children_reports_bad_arguments():
    term, reason = fold_children(WANT, [(app('o'), EMPTY)])
    assert term is None and 'expects' in reason
    term, reason = fold_children(single('s'), [(app('s'), EMPTY), (app('s'), EMPTY)])
    assert term is None and 'duplicate' in reason


def test_remaining_type():
    assert remaining_type(WANT, frozenset({'o'})) == single('s')
    assert remaining_type(WANT, frozenset({'s'})) is None
    assert remaining_type(WANT, frozenset({'s', 'o'})) == EMPTY


@given(dag_types())
def test_serialization_round_trip(t):
    assert parse_type(serialize_type(t)) == t


@given(dag_types())
def test_apply_set_extremes(t):
    assert apply_set(t, t) == frozenset()
    assert apply_set(t, EMPTY) == t.nodes


@given(dag_types(), st.data())
def test_remaining_type_agrees_with_apply_set(t, data):
    applied = frozenset(data.draw(st.sets(st.sampled_from(sorted(t.nodes))) if t.nodes else st.just(set())))
    term = remaining_type(t, applied)
    if term is not None:
        assert apply_set(t, term) == applied
        assert app_order(t, applied) is not None


def _reachable_by_apply(lex):
    """Every type reachable from `lex` by APP steps, with the sources consumed on the way."""
    seen = {lex: frozenset()}
    frontier = [lex]
    while frontier:
        current = frontier.pop()
        for alpha in sorted(current.nodes):
            after = type_combine(app(alpha), current, request(current, alpha))
            if after is not None and after not in seen:
                seen[after] = seen[current] | {alpha}
                frontier.append(after)
    return seen


@given(dag_types(), dag_types())
def test_apply_set_matches_exhaustive_app_search(lex, term):
    reachable = _reachable_by_apply(lex)
    assert apply_set(lex, term) == reachable.get(term)
    for t, consumed in reachable.items():
        assert apply_set(lex, t) == consumed
        assert lex.nodes - t.nodes == consumed
