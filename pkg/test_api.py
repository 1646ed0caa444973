"""HTTP API: health check and the evaluate, parse and oracle endpoints."""

import importlib

import pytest

from amparser.formats import read_graphs, read_trees
from amparser.graphs import graphs_isomorphic
from conftest import instance_path, read_instance


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert response.get_json() == {'status': 'healthy'}


def test_evaluate(client, wants_graph):
    response = client.post('/api/evaluate', json={'tree': read_instance('wants.tree')})
    assert response.status_code == 200
    data = response.get_json()
    assert data['success'] is True
    assert graphs_isomorphic(read_graphs(data['graphs'])['wants'], wants_graph)
    assert data['reports'][0]['ok'] is True


def test_evaluate_ill_typed(client):
    response = client.post('/api/evaluate', json={'tree': '1\tsleeps\tsleep\t0\tROOT\n'})
    assert response.status_code == 422
    data = response.get_json()
    assert data['success'] is False
    assert data['reports'][0]['failure']['token'] == 1


def test_evaluate_needs_a_tree(client):
    assert client.post('/api/evaluate', json={}).status_code == 400
    assert client.post('/api/evaluate', data='not json').status_code == 400
    response = client.post('/api/evaluate', json={'tree': '1\tx\twriter\n'})
    assert response.status_code == 400


def test_evaluate_with_an_inline_lexicon(client):
    lexicon = 'constant dog\nnode r dog\nroot r\nend\n'
    response = client.post('/api/evaluate', json={'tree': '1\tdog\tdog\t0\tROOT\n', 'lexicon': lexicon})
    assert response.status_code == 200
    assert 'node r dog' in response.get_json()['graphs'].replace('1.', '')


def test_parse(client, wants_tree):
    response = client.post('/api/parse', json={'costs': read_instance('wants.costs'), 'decoder': 'chart'})
    assert response.status_code == 200
    data = response.get_json()
    assert read_trees(data['trees'])[0].tree == wants_tree
    assert data['report']['totals']['ok'] == 1
    assert 'records' not in data and 'exit_code' not in data


def test_parse_with_trace(client):
    response = client.post('/api/parse', json={'costs': read_instance('wants.costs'), 'decoder': 'ltl',
                                               'trace': True})
    assert response.status_code == 200
    [row] = response.get_json()['report']['sentences']
    assert row['trace'][0]['transition'] == 'Init(3)'


def test_parse_rejects_bad_settings(client):
    costs = read_instance('wants.costs')
    assert client.post('/api/parse', json={'costs': costs, 'decoder': 'cky'}).status_code == 400
    assert client.post('/api/parse', json={'costs': costs, 'decoder': 'chart', 'type_check': False}).status_code == 400
    assert client.post('/api/parse', json={'costs': 'sentence s x\n'}).status_code == 400
    assert client.post('/api/parse', json={}).status_code == 400


def test_oracle(client):
    response = client.post('/api/oracle', json={'tree': read_instance('wants.tree'), 'system': 'ltf'})
    assert response.status_code == 200
    [sequence] = response.get_json()['sequences']
    assert sequence['sid'] == 'wants'
    assert sequence['transitions'][:2] == ['Init(3)', 'Choose([], want)']
    assert sequence['transitions'][-1] == 'Pop'


def test_oracle_unknown_system(client):
    response = client.post('/api/oracle', json={'tree': read_instance('wants.tree'), 'system': 'arc-eager'})
    assert response.status_code == 400


def test_lexicon_field_is_text_not_a_path(client):
    tree = read_instance('wants.tree')
    path = instance_path('desk.lex')
    response = client.post('/api/evaluate', json={'tree': tree, 'lexicon': path})
    assert response.status_code == 400
    error = response.get_json()['error']
    assert 'unexpected line' in error
    assert 'node r' not in error
    response = client.post('/api/parse', json={'costs': read_instance('wants.costs'), 'lexicon': path})
    assert response.status_code == 400
    assert 'constant want' not in response.get_json()['error']
    response = client.post('/api/oracle', json={'tree': tree, 'lexicon': ['constant']})
    assert response.status_code == 400


def test_parse_k_supertags_zero_keeps_every_constant(client, wants_tree):
    response = client.post('/api/parse', json={'costs': read_instance('wants.costs'), 'decoder': 'astar',
                                               'k_supertags': 0})
    assert response.status_code == 200
    assert read_trees(response.get_json()['trees'])[0].tree == wants_tree


def test_wsgi_app_follows_the_environment(monkeypatch):
    import wsgi
    monkeypatch.setenv('AMPARSER_ENV', 'testing')
    assert importlib.reload(wsgi).app.config['TESTING'] is True
    monkeypatch.setenv('AMPARSER_ENV', 'staging')
    with pytest.raises(ValueError):
        importlib.reload(wsgi)
