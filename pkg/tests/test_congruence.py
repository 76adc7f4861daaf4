import random
from math import gcd

import pytest

from artifact.congruence import CongruenceData, cusp_galois, genus, has_real_points
from artifact.gl2 import GL2, FinSubgroup, full_group, sl2_part
from conftest import BOREL37_GENS, LEVEL27_GENS


def cusp_count_by_vectors(G):
    """Cusps as orbits of +-(G meet SL2) on primitive column vectors mod N."""
    N = G.N
    H = sl2_part(G).elements()
    vecs = {(a, c) for a in range(N) for c in range(N) if gcd(gcd(a, c), N) == 1}
    seen, orbits = set(), 0
    for v in sorted(vecs):
        if v in seen:
            continue
        orbits += 1
        stack = [v]
        seen.add(v)
        while stack:
            a, c = stack.pop()
            for h in H:
                for s in (1, -1):
                    w = ((s * (h[0] * a + h[1] * c)) % N, (s * (h[2] * a + h[3] * c)) % N)
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
    return orbits


def test_known_curves():
    B37 = FinSubgroup(BOREL37_GENS, 37)
    gd = genus(B37)
    assert (gd.index, gd.genus, gd.cusps) == (38, 2, 2)
    B11 = FinSubgroup([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)], 11)
    assert genus(B11).genus == 1
    D = CongruenceData(FinSubgroup(LEVEL27_GENS, 27))
    gd = D.gamma_data()
    assert (gd.index, gd.genus) == (36, 0)
    assert sorted(c.width for c in D.cusps()) == [1] * 6 + [3, 27]
    assert genus(full_group(GL2, 5)).genus == 0
    # X(7) through the full level-7 structure: genus 3 with 24 cusps
    X7 = FinSubgroup([(1, 0, 0, u) for u in (3,)], 7)
    gd = genus(X7)
    assert (gd.index, gd.genus, gd.cusps) == (168, 3, 24)


def test_width_sums(corpus):
    for G in corpus:
        D = CongruenceData(G)
        cs = D.cusps()
        gd = D.gamma_data()
        assert sum(c.h for c in cs) == gd.index
        assert sum(len(c.cosets) for c in cs) == D.gamma_index()
        for c in cs:
            assert c.width in (c.h, 2 * c.h)
            if D.has_minus_identity:
                assert c.width == c.h


def test_cusp_count_matches_vector_orbits(corpus):
    for G in corpus:
        if G.N > 16:
            continue
        assert len(CongruenceData(G).cusps()) == cusp_count_by_vectors(G)


def test_genus_formula_integral_and_conjugation_invariant(corpus):
    rng = random.Random(11)
    for G in corpus:
        D = CongruenceData(G)
        gd = D.gamma_data()
        assert gd.genus >= 0
        els = full_group(GL2, G.N).elements()
        x = rng.choice(els)
        D2 = CongruenceData(G.conjugate(x))
        gd2 = D2.gamma_data()
        assert (gd.index, gd.genus, gd.cusps, gd.v2, gd.v3) == (gd2.index, gd2.genus, gd2.cusps, gd2.v2, gd2.v3)
        assert sorted(c.width for c in D.cusps()) == sorted(c.width for c in D2.cusps())


def test_galois_action_on_cusps():
    B37 = FinSubgroup(BOREL37_GENS, 37)
    D = CongruenceData(B37)
    # both cusps of X0(37) are rational
    assert D.galois_orbits() == [[0], [1]]
    D = CongruenceData(FinSubgroup(LEVEL27_GENS, 27))
    orbits = D.galois_orbits()
    assert sum(len(o) for o in orbits) == len(D.cusps())
    for i in range(len(D.cusps())):
        assert cusp_galois(D, cusp_galois(D, i, 2), pow(2, -1, 27)) == i


def test_real_points():
    assert has_real_points(FinSubgroup(BOREL37_GENS + [(36, 0, 0, 36)], 37))
    # the non-split Cartan mod 3 has no element with eigenvalues 1, -1
    C = FinSubgroup([(0, 1, 1, 1)], 3)
    assert C.order() == 8 and not has_real_points(C)
    with pytest.raises(ValueError):
        has_real_points(FinSubgroup([(1, 1, 0, 1), (1, 0, 0, 2)], 3))


def test_determinant_check():
    with pytest.raises(ValueError):
        CongruenceData(FinSubgroup([(1, 1, 0, 1)], 5))
