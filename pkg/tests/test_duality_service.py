import pytest

from conftest import nx_isomorphic
from config.settings import settings
from app.schemas.algebra_models import PAlgebra
from app.schemas.poset_models import Poset
from app.services.duality_service import duality_service
from app.services.exceptions import BudgetExceededError, InvalidAlgebraError, PreconditionError
from app.services.poset_service import poset_service
from app.services.quasivar_service import quasivar_service


def lattice(size, meet, join, star, zero, one) -> PAlgebra:
    return PAlgebra(
        size=size,
        meet=tuple(tuple(meet(x, y) for y in range(size)) for x in range(size)),
        join=tuple(tuple(join(x, y) for y in range(size)) for x in range(size)),
        star=tuple(star),
        zero=zero,
        one=one,
    )


def m3() -> PAlgebra:
    # 0 < a, b, c < 1, 编号 0..4
    def meet(x, y):
        if x == y or y == 4:
            return x
        if x == 4:
            return y
        return 0

    def join(x, y):
        if x == y or y == 0:
            return x
        if x == 0:
            return y
        return 4

    return lattice(5, meet, join, (4, 0, 0, 0, 0), 0, 4)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_epsilon_of_bm_size(m):
    assert duality_service.epsilon(poset_service.make_bm_poset(m)).size == 2 ** m + 1


def test_epsilon_small_posets(point):
    empty = duality_service.epsilon(Poset(n=0))
    assert empty.size == 1 and empty.zero == empty.one
    two = duality_service.epsilon(point)
    assert two.size == 2
    assert two.star == (1, 0)


def test_epsilon_is_p_algebra():
    for p in poset_service.enumerate_posets(4):
        assert duality_service.is_p_algebra(duality_service.epsilon(p)).ok


def test_epsilon_star_is_complement_of_downset(R):
    a = duality_service.epsilon(R)
    for i, mask in enumerate(a.upsets):
        down = 0
        for x in range(R.n):
            if mask >> x & 1:
                down |= R.down[x]
        assert a.upsets[a.star[i]] == R.full_mask & ~down


def test_delta_round_trip():
    for p in poset_service.enumerate_posets(4):
        assert nx_isomorphic(duality_service.delta(duality_service.epsilon(p)), p)


def test_delta_of_b_bar(B2, point):
    assert nx_isomorphic(duality_service.delta(duality_service.b_bar(2)), B2)
    assert nx_isomorphic(duality_service.delta(duality_service.b_bar(0)), point)
    assert nx_isomorphic(duality_service.delta(duality_service.b_bar(3)), poset_service.make_bm_poset(3))


def test_b_bar_is_epsilon_of_bm():
    for m in range(4):
        b_bar = duality_service.b_bar(m)
        assert duality_service.is_p_algebra(b_bar).ok
        epsilon = duality_service.epsilon(poset_service.make_bm_poset(m))
        assert duality_service.are_isomorphic_algebras(b_bar, epsilon) is not None
    with pytest.raises(PreconditionError):
        duality_service.b_bar(-1)


def test_is_p_algebra_detects_non_distributive():
    report = duality_service.is_p_algebra(m3())
    assert not report.ok
    assert report.axiom == "distributivity"


def test_is_p_algebra_detects_bad_pseudocomplement():
    chain = lattice(2, min, max, (0, 0), 0, 1)
    report = duality_service.is_p_algebra(chain)
    assert report.axiom == "pseudocomplement"
    assert report.witness == (1, 0)


def test_is_p_algebra_detects_bad_shape():
    broken = PAlgebra(size=2, meet=((0, 0),), join=((0, 1), (1, 1)), star=(1, 0), zero=0, one=1)
    assert duality_service.is_p_algebra(broken).axiom == "shape"


def test_invalid_algebra_is_rejected():
    with pytest.raises(InvalidAlgebraError):
        duality_service.delta(m3())
    with pytest.raises(InvalidAlgebraError):
        duality_service.evaluate_ibm(m3(), 1)


def test_join_irreducibles_of_epsilon_are_principal_upsets(R):
    a = duality_service.epsilon(R)
    principal = {R.leq[x] for x in range(R.n)}
    assert {a.upsets[i] for i in duality_service.join_irreducibles(a)} == principal


def test_ibm_examples(B2, R):
    assert duality_service.evaluate_ibm(duality_service.epsilon(B2), 2).satisfied
    result = duality_service.evaluate_ibm(duality_service.epsilon(R), 2)
    assert not result.satisfied
    assert len(result.assignment) == 3
    assert duality_service.evaluate_ibm(duality_service.trivial_algebra(), 3).satisfied


def test_ibm_matches_max_set_criterion():
    for p in poset_service.enumerate_posets(4):
        a = duality_service.epsilon(p)
        for m in (1, 2):
            assert duality_service.evaluate_ibm(a, m).satisfied == quasivar_service.in_pa_m(p, m)


def test_ibm_counterexample_is_lexicographically_first(B2):
    a = duality_service.epsilon(B2)
    result = duality_service.evaluate_ibm(a, 1)
    assert not result.satisfied
    assert result.checked == result.assignment[0] * a.size + result.assignment[1] + 1


def test_ibm_rejects_non_positive_m(point):
    with pytest.raises(PreconditionError):
        duality_service.evaluate_ibm(duality_service.epsilon(point), 0)


def test_ibm_budget(monkeypatch, R):
    monkeypatch.setattr(settings, "PAQ_BUDGET", 10)
    with pytest.raises(BudgetExceededError):
        duality_service.evaluate_ibm(duality_service.epsilon(R), 2)


def test_product(B2, point):
    a = duality_service.epsilon(B2)
    chain = duality_service.epsilon(Poset.chain(2))
    both = duality_service.product(a, chain)
    assert both.size == a.size * chain.size
    assert duality_service.is_p_algebra(both).ok
    union = poset_service.disjoint_union([B2, Poset.chain(2)]).poset
    assert duality_service.are_isomorphic_algebras(both, duality_service.epsilon(union)) is not None
    trivial = duality_service.product(duality_service.trivial_algebra(), a)
    assert duality_service.are_isomorphic_algebras(trivial, a) is not None


def test_find_embedding(B2, point):
    two = duality_service.epsilon(point)
    four = duality_service.epsilon(B2)
    embedding = duality_service.find_embedding(two, four)
    assert embedding == (four.zero, four.one)
    assert duality_service.find_embedding(four, two) is None
    assert duality_service.find_embedding(duality_service.trivial_algebra(), two) is None


def test_embedding_preserves_operations(B2):
    a = duality_service.epsilon(Poset.chain(2))
    b = duality_service.epsilon(B2)
    f = duality_service.find_embedding(a, b)
    assert f is not None
    for x in range(a.size):
        assert f[a.star[x]] == b.star[f[x]]
        for y in range(a.size):
            assert f[a.meet[x][y]] == b.meet[f[x]][f[y]]
            assert f[a.join[x][y]] == b.join[f[x]][f[y]]


def test_upset_index(B2):
    a = duality_service.epsilon(B2)
    assert a.upsets[duality_service.upset_index(a, B2.full_mask)] == B2.full_mask
