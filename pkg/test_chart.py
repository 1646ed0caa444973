"""Projective chart decoding against the exhaustive reference decoder."""

import pytest

from amparser import chart
from amparser.algebra import EMPTY, parse_type, single
from amparser.brute import best_projective_tree, projective_trees
from amparser.chart import (LEFT, RIGHT, ParseItem, assemble_goal, attach, build_chart, chart_parse, decisions,
                            rule_arc, rule_init, rule_skip)
from amparser.costs import INF, tree_cost
from amparser.evaluation import check_well_typed
from amparser.models import BOTTOM, IGNORE, ROOT, STATUS_NO_PARSE, STATUS_OK, app, mod
from conftest import random_instances


def test_gold_zero_costs_recover_the_tree(desk, wants_tree, gold_costs):
    outcome = chart_parse(gold_costs, desk)
    assert outcome.status == STATUS_OK
    assert outcome.cost == 0
    assert outcome.tree == wants_tree
    assert outcome.stats['items'] > 0


def test_projective_structure_counts():
    assert len(projective_trees((1,))) == 1
    assert len(projective_trees((1, 2))) == 2
    assert len(projective_trees((1, 2, 3))) == 7


def test_attach():
    want = parse_type('[o[s], s]')
    assert attach(want, frozenset(), app('o'), single('s')) == frozenset({'o'})
    assert attach(want, frozenset({'o'}), app('o'), single('s')) is None
    assert attach(want, frozenset(), app('o'), EMPTY) is None
    assert attach(want, frozenset(), mod('m'), single('m')) == frozenset()
    assert attach(want, frozenset(), ROOT, EMPTY) is None


def test_rules(desk, gold_costs):
    sleep = rule_init(5, 'sleep', gold_costs, desk)
    soundly = rule_init(6, 'soundly', gold_costs, desk)
    assert sleep.type == single('s') and sleep.cost == 0
    joined = rule_arc(sleep, soundly, mod('m'), gold_costs)
    assert joined.head == 5 and (joined.start, joined.end) == (5, 7)
    assert joined.cost == 0
    assert rule_arc(sleep, soundly, app('s'), gold_costs) is None
    skipped = rule_skip(joined, LEFT, gold_costs)
    assert (skipped.start, skipped.end, skipped.cost) == (4, 7, 0)
    with pytest.raises(ValueError):
        rule_skip(joined, RIGHT, gold_costs)
    with pytest.raises(ValueError):
        rule_arc(sleep, sleep, mod('m'), gold_costs)
    with pytest.raises(ValueError):
        assemble_goal(joined, gold_costs)
    with pytest.raises(ValueError):
        rule_init(7, 'sleep', gold_costs, desk)


def test_decisions_leave_the_head_open(desk, gold_costs):
    sleep = rule_init(5, 'sleep', gold_costs, desk)
    joined = rule_arc(sleep, rule_init(6, 'soundly', gold_costs, desk), mod('m'), gold_costs)
    skipped = rule_skip(joined, LEFT, gold_costs)
    assert decisions(skipped) == {
        4: (BOTTOM, 0, IGNORE),
        5: ('sleep', None, None),
        6: ('soundly', 5, mod('m')),
    }


def test_chart_keeps_the_best_item_per_signature(desk, gold_costs):
    chart = build_chart(gold_costs, desk)
    signatures = [item.signature for item in chart.best.values()]
    assert len(signatures) == len(set(signatures)) == len(chart)
    for (i, k), sigs in chart.spans.items():
        assert all(chart.best[sig].start == i and chart.best[sig].end == k for sig in sigs)


def test_unpriced_sentence_has_no_parse(desk):
    from amparser.costs import load_costs
    [costs] = load_costs('sentence s 2\ntag 1 sleep 0\ntag 2 sleep 0\nedge 0 1 ROOT 0\nend\n')
    outcome = chart_parse(costs, desk)
    assert outcome.status == STATUS_NO_PARSE
    assert outcome.tree is None and outcome.cost == INF


def test_single_token_sentence(desk):
    from amparser.costs import load_costs
    [costs] = load_costs('sentence s 1\ntag 1 writer 0.5\ntag 1 sleep 0\nedge 0 1 ROOT 0.25\nend\n')
    outcome = chart_parse(costs, desk)
    assert outcome.cost == 0.75
    assert outcome.tree.entry(1).constant == 'writer'


@pytest.mark.slow
def test_chart_matches_exhaustive_search(desk):
    for costs in random_instances(desk, 50, 1, 5, seed=100):
        outcome = chart_parse(costs, desk)
        reference = best_projective_tree(costs, desk)
        assert outcome.ok and reference is not None
        assert outcome.cost == pytest.approx(reference[1], abs=1e-9)
        assert tree_cost(outcome.tree, costs) == pytest.approx(outcome.cost, abs=1e-9)
        assert outcome.tree.is_projective()
        assert check_well_typed(outcome.tree, desk).ok


def test_exhaustive_search_types_trees_without_the_chart(desk, wants_tree, gold_costs, monkeypatch):
    monkeypatch.setattr(chart, 'attach', lambda *args: None)
    ignored = {1: (BOTTOM, None, None), 4: (BOTTOM, None, None)}
    tree, cost = best_projective_tree(gold_costs, desk, ignored)
    assert tree == wants_tree and cost == 0
