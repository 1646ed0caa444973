"""Shared fixtures: the desk lexicon, the running-example tree, graph and gold-zero costs."""

import os
import random

import pytest
from hypothesis import strategies as st

from amparser import create_app
from amparser.algebra import Type
from amparser.costs import gen_synthetic, load_costs
from amparser.formats import read_graphs, read_lexicon, read_trees

ROOT_DIR = os.path.dirname(os.path.abspath(__file__))
INSTANCE = os.path.join(ROOT_DIR, 'instance')

# transitions that build the running example from its gold-zero costs
LTF_GOLD = ['Init(3)', 'Choose([], want)', 'Apply(s,2)', 'Choose([], writer)', 'Pop', 'Apply(o,5)',
            'Choose([s], sleep)', 'Modify(m,6)', 'Choose([m], soundly)', 'Pop', 'Pop', 'Pop']
LTL_GOLD = ['Init(3)', 'Apply(s,2)', 'Apply(o,5)', 'Finish(want)', 'Finish(writer)', 'Modify(m,6)',
            'Finish(sleep)', 'Finish(soundly)']


@st.composite
def dag_types(draw, names=('a', 'b', 'm', 'o', 's'), max_size=4):
    """Random source DAGs; edges only run forward in draw order, so every draw is acyclic."""
    picked = draw(st.lists(st.sampled_from(names), unique=True, max_size=max_size))
    edges = set()
    for i, a in enumerate(picked):
        for b in picked[i + 1:]:
            if draw(st.booleans()):
                edges.add((a, b))
    return Type(frozenset(picked), frozenset(edges))


def instance_path(name):
    return os.path.join(INSTANCE, name)


def read_instance(name):
    with open(instance_path(name), 'r', encoding='utf-8') as f:
        return f.read()


@pytest.fixture(scope='session')
def desk():
    return read_lexicon(read_instance('desk.lex'), name='desk')


@pytest.fixture(scope='session')
def wants_tree():
    return read_trees(read_instance('wants.tree'))[0].tree


@pytest.fixture(scope='session')
def wants_graph():
    return read_graphs(read_instance('wants.graph'))['wants']


@pytest.fixture(scope='session')
def gold_costs():
    return load_costs(read_instance('wants.costs'))[0]


def random_instances(lexicon, count, n_min, n_max, seed=0):
    """Seeded synthetic cost tables with lengths drawn from [n_min, n_max]."""
    out = []
    for k in range(count):
        n = random.Random(seed + k).randint(n_min, n_max)
        out.append(gen_synthetic(seed + k, n, lexicon))
    return out


@pytest.fixture
def app():
    return create_app('testing')


@pytest.fixture
def client(app):
    return app.test_client()
