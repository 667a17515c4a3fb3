import sys
from pathlib import Path

import networkx as nx
import pytest
from networkx.algorithms.isomorphism import DiGraphMatcher

root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

from app.schemas.poset_models import Poset  # noqa: E402
from app.services.poset_service import poset_service  # noqa: E402
from app.services.quasivar_service import quasivar_service  # noqa: E402

BASE = (1, 2, 3)


@pytest.fixture
def reduced_p():
    return quasivar_service.make_reduced(BASE, [(1, 2)])


@pytest.fixture
def reduced_q():
    return quasivar_service.make_reduced(BASE, [(1, 2), (2, 3)])


@pytest.fixture
def reduced_r():
    return quasivar_service.make_reduced(BASE, [(1, 2), (2, 3), (1, 3)])


@pytest.fixture
def P(reduced_p):
    return reduced_p.realized


@pytest.fixture
def Q(reduced_q):
    return reduced_q.realized


@pytest.fixture
def R(reduced_r):
    return reduced_r.realized


@pytest.fixture
def B2():
    return poset_service.make_bm_poset(2)


@pytest.fixture
def point():
    return poset_service.make_bm_poset(0)


def to_digraph(p: Poset) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(p.n))
    graph.add_edges_from((i, j) for i, j in p.pairs() if i != j)
    return graph


def nx_isomorphic(p: Poset, q: Poset) -> bool:
    """独立的同构判定"""
    return p.n == q.n and DiGraphMatcher(to_digraph(p), to_digraph(q)).is_isomorphic()
