"""Cost tables: the file format, tree costs and the synthetic generators."""

import math

import pytest

from amparser.costs import (INF, CostFileError, SentenceCosts, SyntheticParams, dump_costs, gen_synthetic,
                            gold_zero_costs, legal_edges, load_costs, top_k_tags, tree_cost)
from amparser.models import IGNORE, ROOT, app, mod

SMALL = """
# two tokens
sentence s1 2
form 1 writers
form 2 sleep
tag 1 writer 0.5
tag 2 sleep 0.25
tag 1 BOT 2
edge 0 2 ROOT 0
edge 2 1 APP_s 1.5
end
"""


def test_load_small_file():
    [s] = load_costs(SMALL)
    assert s.sid == 's1' and s.n == 2
    assert s.forms == ('writers', 'sleep')
    assert s.tag(1, 'writer') == 0.5
    assert s.tag(1, 'sleep') == INF
    assert s.edge(2, 1, app('s')) == 1.5
    assert s.edge(1, 2, app('s')) == INF
    assert list(s.incoming(1)) == [(2, app('s'), 1.5)]


def test_missing_forms_default_to_positions():
    [s] = load_costs('sentence x 2\nend\n')
    assert s.forms == ('w1', 'w2')


def test_forms_may_contain_spaces():
    [s] = load_costs('sentence x 2\nform 1 New York\nform 2 sleeps\nend\n')
    assert s.forms == ('New York', 'sleeps')
    assert load_costs(dump_costs([s]))[0].forms == ('New York', 'sleeps')


def test_dump_is_reloadable():
    sentences = load_costs(SMALL)
    again = load_costs(dump_costs(sentences))
    assert again[0].tag_costs == sentences[0].tag_costs
    assert again[0].edge_costs == sentences[0].edge_costs


@pytest.mark.parametrize('text, line', [
    ('sentence s 2\ntag 1 writer -1\nend\n', 2),
    ('sentence s 2\ntag 3 writer 1\nend\n', 2),
    ('sentence s 2\nedge 1 2 ROOT 0\nend\n', 2),
    ('sentence s 2\nedge 1 1 APP_s 0\nend\n', 2),
    ('sentence s 2\nedge 1 2 APP_S 0\nend\n', 2),
    ('sentence s 2\ntag 1 writer nan\nend\n', 2),
    ('sentence s 2\ntag 1 writer inf\nend\n', 2),
    ('sentence s two\nend\n', 1),
    ('tag 1 writer 0\n', 1),
    ('sentence s 1\nsentence t 1\n', 2),
    ('sentence s 1\nbogus\nend\n', 2),
])
def test_bad_files_report_the_line(text, line):
    with pytest.raises(CostFileError) as info:
        load_costs(text)
    assert info.value.line == line


def test_unterminated_block():
    with pytest.raises(CostFileError):
        load_costs('sentence s 1\n')


def test_sentence_costs_validate_themselves():
    with pytest.raises(CostFileError):
        SentenceCosts('s', 0, ())
    with pytest.raises(CostFileError):
        SentenceCosts('s', 1, ('a',), {(1, 'x'): -0.5})
    with pytest.raises(CostFileError):
        SentenceCosts('s', 1, ('a',), {}, {(0, 1, ROOT): math.nan})


def test_tree_cost(wants_tree, gold_costs):
    assert tree_cost(wants_tree, gold_costs) == 0
    assert tree_cost(wants_tree, load_costs('sentence s 6\nend\n')[0]) == INF


def test_gold_zero_costs_match_the_fixture(desk, wants_tree, gold_costs):
    generated = gold_zero_costs(wants_tree, desk, sid='wants')
    assert generated.tag_costs == gold_costs.tag_costs
    assert generated.edge_costs == gold_costs.edge_costs
    assert generated.forms == gold_costs.forms


def test_legal_edges(desk):
    edges = list(legal_edges(3, desk))
    assert (0, 2, ROOT) in edges and (0, 2, IGNORE) in edges
    assert (1, 2, mod('m')) in edges
    assert all(o != j for o, j, _ in edges)
    assert len(edges) == 3 * 2 + 3 * 2 * len(desk.arc_labels)


def test_synthetic_costs_are_seeded(desk):
    a = gen_synthetic(7, 4, desk)
    b = gen_synthetic(7, 4, desk)
    c = gen_synthetic(8, 4, desk)
    assert a == b
    assert a.edge_costs != c.edge_costs
    assert a.sid == 's7'
    assert all(0 <= cost <= 1 for cost in a.tag_costs.values())
    assert len(a.tag_costs) == 4 * (len(desk.constants) + 1)


def test_synthetic_params():
    with pytest.raises(ValueError):
        SyntheticParams(lo=2, hi=1)
    with pytest.raises(ValueError):
        SyntheticParams(lo=-1)
    with pytest.raises(ValueError):
        SyntheticParams(decimals=-1)


def test_top_k_tags_skips_bottom(gold_costs):
    ranked = top_k_tags(gold_costs, 1)
    assert 'BOT' not in [name for name, _ in ranked]
    assert ranked[0] == ('sleep', 1.0)
    assert top_k_tags(gold_costs, 2, k=1) == [('writer', 0.0)]
    assert [name for name, _ in top_k_tags(gold_costs, 2, allowed={'want', 'sleep'})] == ['sleep', 'want']
    with pytest.raises(ValueError):
        top_k_tags(gold_costs, 7)
    with pytest.raises(ValueError):
        top_k_tags(gold_costs, 1, k=0)
