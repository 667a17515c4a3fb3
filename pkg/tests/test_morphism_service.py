from itertools import product

import pytest

from conftest import nx_isomorphic
from app.schemas.poset_models import Poset
from app.services.exceptions import BudgetExceededError, IndexRangeError, PreconditionError
from app.services.morphism_service import morphism_service
from app.services.poset_service import poset_service
from app.services.quasivar_service import quasivar_service


def brute_force_pp(p: Poset, q: Poset):
    return [f for f in product(range(q.n), repeat=p.n) if morphism_service.is_pp_morphism(f, p, q).ok]


def test_constant_map_to_point(R, point):
    assert morphism_service.is_pp_morphism((0,) * R.n, R, point).ok


def test_collapsing_map_fails_at_the_collapsed_element(Q, reduced_q):
    # {2,3} 被送到底元: 保序, 但 M(f({2,3})) 多出 {1}
    e = reduced_q.index_of((2, 3))
    f = [x if x != e else reduced_q.bottom for x in range(Q.n)]
    check = morphism_service.is_pp_morphism(f, Q, Q)
    assert not check.ok
    assert check.condition == "maxima"
    assert check.element == (e,)


def test_inclusion_of_p_into_q_is_pp(P, Q, reduced_p, reduced_q):
    f = [reduced_q.index_of(s) for s in reduced_p.subsets]
    assert morphism_service.is_pp_morphism(f, P, Q).ok


def test_is_pp_morphism_arity_errors(B2, point):
    with pytest.raises(IndexRangeError):
        morphism_service.is_pp_morphism((0, 0), B2, point)
    with pytest.raises(IndexRangeError):
        morphism_service.is_pp_morphism((0, 1, 0), B2, point)


def test_enumerate_small_examples(B2, point):
    chain = Poset.chain(2)
    assert [f.map for f in morphism_service.enumerate_pp_morphisms(chain, chain)] == brute_force_pp(chain, chain)
    assert len(morphism_service.enumerate_pp_morphisms(chain, chain)) == 2
    assert [f.map for f in morphism_service.enumerate_pp_morphisms(point, B2)] == [(1,), (2,)]
    assert [f.map for f in morphism_service.enumerate_pp_morphisms(B2, point)] == [(0, 0, 0)]


def test_enumerate_matches_brute_force():
    posets = list(poset_service.enumerate_posets(3))
    for p in posets:
        for q in posets:
            found = [f.map for f in morphism_service.enumerate_pp_morphisms(p, q)]
            assert found == brute_force_pp(p, q)


def test_enumerate_limit(P, Q):
    everything = morphism_service.enumerate_pp_morphisms(P, Q)
    assert morphism_service.enumerate_pp_morphisms(P, Q, limit=2) == everything[:2]


def test_pp_morphisms_send_maxima_to_maxima():
    posets = list(poset_service.enumerate_posets(3))
    for p in posets:
        for q in posets:
            for f in morphism_service.enumerate_pp_morphisms(p, q):
                assert all(q.is_maximal(f.map[x]) for x in poset_service.maximal_elements(p))


def test_exists_surjective_pp(P, Q, B2):
    found = morphism_service.exists_surjective_pp(P, B2)
    assert found is not None and found.is_surjective()
    assert morphism_service.is_pp_morphism(found.map, P, B2).ok
    assert morphism_service.exists_surjective_pp(Q, P) is None


def test_identity_and_surjection_on_every_poset():
    for p in poset_service.enumerate_posets(4):
        identity = morphism_service.identity(p)
        assert morphism_service.is_pp_morphism(identity.map, p, p).ok
        assert morphism_service.exists_surjective_pp(p, p) is not None


def test_empty_source():
    empty = Poset(n=0)
    point = Poset.chain(1)
    assert [f.map for f in morphism_service.enumerate_pp_morphisms(empty, point)] == [()]
    assert morphism_service.exists_surjective_pp(empty, empty) is not None
    assert morphism_service.exists_surjective_pp(empty, point) is None


def test_covered_points(P, Q, reduced_p, point):
    assert morphism_service.covered_points(P, Q).complete
    report = morphism_service.covered_points(Q, P)
    assert report.uncovered == (reduced_p.bottom,)
    for y in report.covered:
        witness = report.witness(y)
        assert y in witness.image
        assert morphism_service.is_pp_morphism(witness.map, Q, P).ok
    assert morphism_service.covered_points(point, point).covered == {0}


def test_surjection_from_copies(P, Q, R):
    pq = morphism_service.exists_surjection_from_copies(P, Q)
    assert pq is not None and pq.copies == 2
    qr = morphism_service.exists_surjection_from_copies(Q, R)
    assert qr is not None and qr.copies == 2
    covered = 0
    for f in qr.morphisms:
        covered |= f.image_mask
    assert covered == R.full_mask
    assert morphism_service.exists_surjection_from_copies(R, Q) is None


def test_copies_agree_with_literal_disjoint_unions():
    posets = [p for p in poset_service.enumerate_posets(3) if p.n > 0]
    for p in posets:
        for q in posets:
            copies = morphism_service.exists_surjection_from_copies(p, q)
            literal = any(
                morphism_service.exists_surjective_pp(poset_service.disjoint_union([p] * k).poset, q) is not None
                for k in range(1, q.n + 1)
            )
            assert (copies is not None) == literal
            assert (copies is not None) == morphism_service.covered_points(p, q).complete
            if copies is not None:
                assert copies.copies <= q.n


@pytest.mark.slow
def test_copies_agree_with_literal_disjoint_unions_up_to_five():
    posets = [p for p in poset_service.enumerate_posets(5) if p.n > 0]
    for p in posets:
        p_max = len(poset_service.maximal_elements(p))
        for q in posets:
            copies = morphism_service.exists_surjection_from_copies(p, q)
            if copies is not None:
                assert copies.copies <= q.n
                # 各份上的态射拼成不交并上的满 pp-态射
                union = poset_service.disjoint_union([p] * copies.copies).poset
                glued = tuple(y for f in copies.morphisms for y in f.map)
                assert morphism_service.is_pp_morphism(glued, union, q).ok, (p, q)
                assert set(glued) == set(range(q.n))
                continue
            q_max = len(poset_service.maximal_elements(q))
            # 极大元赋值的搜索空间为 q_max^(k * p_max)
            for k in range(1, q.n + 1):
                if q_max ** (k * p_max) > 1024:
                    break
                union = poset_service.disjoint_union([p] * k).poset
                assert morphism_service.exists_surjective_pp(union, q) is None, (p, q, k)


def test_composition_closure(P, Q, R):
    for f in morphism_service.enumerate_pp_morphisms(P, Q):
        for g in morphism_service.enumerate_pp_morphisms(Q, R):
            h = morphism_service.compose(f, g)
            assert morphism_service.is_pp_morphism(h.map, P, R).ok


def test_compose_rejects_mismatched_middle(P, Q):
    f = morphism_service.identity(P)
    g = morphism_service.identity(Q)
    with pytest.raises(PreconditionError):
        morphism_service.compose(f, g)


def test_images_of_r(R, B2, point):
    images = morphism_service.pp_morphic_images(R)
    assert len(images) == 3
    for expected in (R, B2, point):
        assert sum(nx_isomorphic(image, expected) for image in images) == 1


def test_images_are_reduced(R):
    everything = morphism_service.pp_morphic_images(R, reduced_only=False)
    assert len(everything) > 3
    assert any(nx_isomorphic(image, Poset.chain(2)) for image in everything)
    images = morphism_service.pp_morphic_images(R)
    for image in images:
        assert len(set(image.max_masks)) == image.n
    # 约化的像恰为全部像的约化
    reductions = [quasivar_service.reduction(image).poset for image in everything]
    for reduced in reductions:
        assert sum(nx_isomorphic(image, reduced) for image in images) == 1


def test_images_of_small_posets(point):
    assert [image.n for image in morphism_service.pp_morphic_images(point)] == [1]
    assert [image.n for image in morphism_service.pp_morphic_images(Poset.chain(2))] == [1]
    images = morphism_service.pp_morphic_images(Poset.chain(2), reduced_only=False)
    assert len(images) == 2
    assert any(nx_isomorphic(image, Poset.chain(2)) for image in images)
    assert any(nx_isomorphic(image, point) for image in images)


def test_images_agree_with_surjection_search():
    posets = list(poset_service.enumerate_posets(4))
    for p in posets:
        images = morphism_service.pp_morphic_images(p, reduced_only=False)
        for q in posets:
            has_image = any(nx_isomorphic(image, q) for image in images)
            assert has_image == (morphism_service.exists_surjective_pp(p, q) is not None)


def test_images_budget():
    with pytest.raises(BudgetExceededError):
        morphism_service.pp_morphic_images(Poset.antichain(9))
