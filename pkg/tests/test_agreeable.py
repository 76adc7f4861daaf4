import pytest

from artifact.agreeable import (
    AbelianQuotient, CharacterMap, agreeable_closure, family_member, is_agreeable,
    maximal_agreeable, quotient_presentation, twist_image,
)
from artifact.gl2 import (
    GL2, OpenSubgroup, certify_level, commutator_open, open_subgroup, whole,
)
from conftest import BOREL37_GENS, LEVEL27_GENS, NORMAL54_GENS


@pytest.fixture(scope="module")
def level27():
    G27 = certify_level(open_subgroup(GL2, 27, LEVEL27_GENS))
    N54 = certify_level(open_subgroup(GL2, 54, NORMAL54_GENS))
    P = quotient_presentation(G27, N54, reps=[(31, 44, 36, 25), (28, 27, 27, 28), (53, 0, 0, 53)],
                              orders=[9, 2, 2])
    return G27, N54, P


def test_agreeable_examples():
    assert is_agreeable(whole(GL2))
    B37 = certify_level(open_subgroup(GL2, 37, BOREL37_GENS))
    assert is_agreeable(B37)
    assert is_agreeable(certify_level(open_subgroup(GL2, 27, LEVEL27_GENS)))
    # no scalars
    assert not is_agreeable(open_subgroup(GL2, 5, [(1, 1, 0, 1), (2, 0, 0, 1)]))


def test_closure_properties(corpus):
    for img in corpus:
        G = certify_level(OpenSubgroup(GL2, img.N, img))
        A = agreeable_closure(G)
        assert is_agreeable(A)
        assert G.is_subgroup_of(A)
        assert agreeable_closure(A) == A
        assert commutator_open(A) == commutator_open(G)


def test_quotient_presentation(level27):
    G27, N54, P = level27
    assert P.order == 36
    assert N54.is_subgroup_of(G27)
    assert P.label((31, 44, 36, 25), 54) == (1, 0, 0)
    assert P.label((1, 0, 0, 1), 54) == (0, 0, 0)
    Q = AbelianQuotient(G27.at(54), N54.at(54))
    assert sorted(Q.orders) in ([2, 2, 9], [2, 18])
    assert Q.order == 36


def test_character_map_checks(level27):
    _, _, P = level27
    Q = P.quotient
    chi = CharacterMap(57, Q, {5: (7, 0, 1), 11: (3, 0, 1), 13: (5, 1, 0)})
    assert chi(5 * 11) == Q.add((7, 0, 1), (3, 0, 1))
    assert chi.conductor() == 57
    with pytest.raises(ValueError):
        CharacterMap(57, Q, {5: (7, 0, 1)})
    with pytest.raises(ValueError):
        CharacterMap(57, Q, {3: (1, 0, 0)})


def test_family_member_level27(level27):
    G27, N54, P = level27
    chi = CharacterMap(57, P.quotient, {5: (7, 0, 1), 11: (3, 0, 1), 13: (5, 1, 0)})
    H = family_member(P, chi)
    assert (H.level, H.index()) == (1026, 1296)
    assert H.det_full()
    assert agreeable_closure(H) == G27
    assert family_member(P, CharacterMap.trivial(P.quotient)) == N54


def test_twist_twice_is_identity():
    B37 = certify_level(open_subgroup(GL2, 37, BOREL37_GENS))
    for d in (-1, 5, -15):
        T = twist_image(B37, d)
        assert twist_image(T, d) == B37
    G = certify_level(open_subgroup(GL2, 4, [(1, 1, 0, 1), (3, 0, 0, 1), (1, 2, 0, 1)]))
    T = twist_image(G, -1)
    assert T.index() == G.index()
    with pytest.raises(ValueError):
        twist_image(G, 4)


def test_maximal_agreeable_in_gl2():
    subs = maximal_agreeable(whole(GL2))
    assert len(subs) == 6
    for H in subs:
        assert (H.level, H.index()) == (6, 6)
        assert is_agreeable(H) and H.det_full()
    for i, H in enumerate(subs):
        for K in subs[i + 1:]:
            assert H != K
