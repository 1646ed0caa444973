"""As-graphs: validation, typing, APP/MOD gluing and isomorphism."""

import pytest

from amparser.algebra import EMPTY, parse_type, single
from amparser.formats import read_graphs
from amparser.graphs import (AsGraph, GraphError, GraphNode, graph_apply, graph_modify, graph_type, graphs_isomorphic,
                             star_graph)

SLEPT = """
graph slept
node a sleep
node b writer
root a
edge a ARG0 b
end
"""


def test_constant_types(desk):
    assert graph_type(desk.constants['want']) == parse_type('[s, o[s]]')
    assert graph_type(desk.constants['willingly']) == parse_type('[m, s]')
    assert graph_type(desk.constants['writer']) == EMPTY


@pytest.mark.parametrize('nodes, edges, root', [
    ((GraphNode('a'), GraphNode('a')), set(), 'a'),
    ((GraphNode('a'),), set(), 'b'),
    ((GraphNode('a'), GraphNode('b')), set(), 'a'),
    ((GraphNode('a', source='s'), GraphNode('b', source='s')), {('a', 'x', 'b')}, 'a'),
    ((GraphNode('a', request=EMPTY),), set(), 'a'),
    ((GraphNode('a'),), {('a', 'x', 'c')}, 'a'),
])
def test_malformed_graphs_are_rejected(nodes, edges, root):
    with pytest.raises(GraphError):
        AsGraph(nodes, frozenset(edges), root)


def test_request_naming_an_absent_source():
    g = AsGraph((GraphNode('r', 'want'), GraphNode('o', source='o', request=single('s'))),
                frozenset({('r', 'ARG1', 'o')}), 'r')
    with pytest.raises(GraphError):
        graph_type(g)


def test_apply_fills_the_source(desk):
    result = graph_apply(desk.constants['sleep'], 's', desk.constants['writer'])
    assert graph_type(result) == EMPTY
    assert graphs_isomorphic(result, read_graphs(SLEPT)['slept'])


def test_apply_merges_shared_sources(desk):
    result = graph_apply(desk.constants['want'], 'o', desk.constants['sleep'])
    assert graph_type(result) == single('s')
    assert len(result.nodes) == 3
    s_node = result.source_node('s')
    assert {(label) for a, label, b in result.edges if b == s_node.id} == {'ARG0'}
    assert len([e for e in result.edges if e[2] == s_node.id]) == 2


def test_apply_errors(desk):
    with pytest.raises(GraphError):
        graph_apply(desk.constants['writer'], 's', desk.constants['writer'])
    with pytest.raises(GraphError):
        graph_apply(desk.constants['want'], 'o', desk.constants['writer'])
    with pytest.raises(GraphError):
        graph_apply(desk.constants['want'], 's', desk.constants['writer'])


def test_modify_keeps_the_head_type(desk):
    result = graph_modify(desk.constants['sleep'], 'm', desk.constants['soundly'])
    assert graph_type(result) == single('s')
    assert result.node(result.root).label == 'sleep'
    assert any(label == 'manner' for _, label, _ in result.edges)


def test_modify_merges_the_modifier_sources(desk):
    result = graph_modify(desk.constants['sleep'], 'm', desk.constants['willingly'])
    assert graph_type(result) == single('s')
    s_node = result.source_node('s')
    assert len([e for e in result.edges if e[2] == s_node.id]) == 2


def test_modify_errors(desk):
    with pytest.raises(GraphError):
        graph_modify(desk.constants['sleep'], 'm', desk.constants['writer'])
    with pytest.raises(GraphError):
        graph_modify(desk.constants['writer'], 'm', desk.constants['willingly'])


def test_isomorphism_ignores_node_ids(wants_graph):
    assert graphs_isomorphic(wants_graph, wants_graph.relabel('x.'))


def test_isomorphism_sees_labels_and_edges(wants_graph):
    edges = set(wants_graph.edges)
    edges.remove(('l', 'manner', 'd'))
    edges.add(('l', 'time', 'd'))
    changed = AsGraph(wants_graph.nodes, frozenset(edges), wants_graph.root)
    assert not graphs_isomorphic(wants_graph, changed)
    rerooted = AsGraph(wants_graph.nodes, wants_graph.edges, 'l')
    assert not graphs_isomorphic(wants_graph, rerooted)


def test_star_graph_realizes_its_type():
    for text in ['[]', '[s]', '[o[s], s]', '[a[b[c], c], b[c], c]']:
        t = parse_type(text)
        assert graph_type(star_graph('x', t)) == t
