"""Lexicon, graph and tree file readers and writers."""

import pytest

from amparser.formats import (FormatError, TreeRecord, read_graphs, read_lexicon, read_trees, write_graph,
                              write_lexicon, write_tree, write_trees)
from amparser.graphs import graphs_isomorphic
from conftest import read_instance


def test_lexicon_text_is_canonical(desk):
    text = write_lexicon(desk)
    again = read_lexicon(text, name='desk')
    assert set(again.constants) == set(desk.constants)
    assert again.omega == desk.omega and again.labels == desk.labels
    for name in desk.constants:
        assert graphs_isomorphic(again.constants[name], desk.constants[name])
    assert write_lexicon(again) == text
    assert 'modlabel m' in text


def test_lexicon_keeps_extra_omega_lines():
    lex = read_lexicon('constant c\nnode r c\nroot r\nend\nomega [a[b]]\n')
    assert '[a[b], b]' in {str(t) for t in lex.omega}
    assert 'omega [a[b], b]' in write_lexicon(lex)


def test_graph_text(wants_graph):
    text = write_graph('wants', wants_graph)
    assert graphs_isomorphic(read_graphs(text)['wants'], wants_graph)


def test_source_requests_survive(desk):
    text = write_graph('want', desk.constants['want'])
    assert 'source o o request [s]' in text
    assert graphs_isomorphic(read_graphs(text)['want'], desk.constants['want'])


@pytest.mark.parametrize('text, line', [
    ('constant a\nnode r\nend\n', 2),
    ('constant a\nnode r a\nnode r b\nroot r\nend\n', 3),
    ('constant a\nnode r a\nedge r x q\nroot r\nend\n', 3),
    ('constant a\nnode r a\nsource r s request [s\nroot r\nend\n', 3),
    ('constant a\nnode r a\nend\n', 3),
    ('node r a\n', 1),
    ('constant a\nnode r a\nroot r\nconstant b\n', 4),
    ('constant a\nnode r a\nroot r\nend\nmodlabel M\n', 5),
    ('constant a\nnode r a\nroot r\nend\nconstant a\nnode r a\nroot r\nend\n', 5),
])
def test_lexicon_errors_report_the_line(text, line):
    with pytest.raises(FormatError) as info:
        read_lexicon(text)
    assert info.value.line == line


def test_tree_file(wants_tree):
    [record] = read_trees(read_instance('wants.tree'))
    assert record.sid == 'wants' and record.status == 'ok'
    assert record.tree.root == 3
    assert record.tree.forms == ('The', 'writer', 'wants', 'to', 'sleep', 'soundly')
    assert read_trees(write_tree(wants_tree, 'wants'))[0].tree == wants_tree


def test_failed_sentences_are_kept_in_order(wants_tree):
    records = [TreeRecord('a', wants_tree), TreeRecord('b', None, 'no-parse'), TreeRecord('c', None, 'limit')]
    text = write_trees(records)
    assert '# sentence b NO-PARSE' in text
    back = read_trees(text)
    assert [(r.sid, r.status, r.tree is None) for r in back] == [
        ('a', 'ok', False), ('b', 'no-parse', True), ('c', 'limit', True)]


def test_unnamed_blocks_are_numbered():
    text = '1\tx\twriter\t0\tROOT\n\n1\ty\twriter\t0\tROOT\n'
    assert [r.sid for r in read_trees(text)] == ['1', '2']


@pytest.mark.parametrize('text, line', [
    ('1\tx\twriter\t0\n', 1),
    ('1\tx\twriter\tzero\tROOT\n', 1),
    ('1\tx\twriter\t0\tAPP\n', 1),
    ('# sentence t\n1\tx\twriter\t2\tAPP_s\n2\ty\twriter\t1\tAPP_s\n', 2),
])
def test_tree_errors_report_the_line(text, line):
    with pytest.raises(FormatError) as info:
        read_trees(text)
    assert info.value.line == line
