from fractions import Fraction

import pytest
import sympy

from artifact.agreeable import AbelianQuotient, CharacterMap, quotient_presentation
from artifact.exactarith import kronecker
from artifact.galoisimage import (
    BadReductionError, CatalogEntry, EllCurveQ, SingularCurveError, ap_count,
    assemble_image, catalog_locate, curve_invariants, frobenius_samples, gamma_candidates,
    good_primes, integral_model, quadratic_twist, rational_preimages, reconstruct_gamma,
    serre_curve_data, sign_quotient, trace_det_filter, twist_discriminant,
)
from artifact.gl2 import GL2, FinSubgroup, certify_level, open_subgroup, whole
from conftest import LEVEL27_GENS, NORMAL54_GENS

E37 = EllCurveQ(1, 1, 1, -8, 6)
E27 = EllCurveQ(0, 1, 1, 1, 0)


def naive_ap(E, p):
    """Point count by testing every (x, y) pair."""
    a1, a2, a3, a4, a6 = (int(a) % p for a in integral_model(E).ainvs)
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return p + 1 - n


def test_invariants():
    c4, c6, disc, j = curve_invariants(1, 1, 1, -8, 6)
    assert (c4, c6, disc) == (385, -8225, -6125)
    assert j == c4 ** 3 / disc == -7 * 11 ** 3
    assert c4 ** 3 - c6 ** 2 == 1728 * disc
    assert E27.j == Fraction(32768, 19) and E27.disc == -19
    with pytest.raises(SingularCurveError):
        EllCurveQ(0, 0, 0, 0, 0)


def test_ap_against_naive_count():
    for E in (E37, E27, EllCurveQ(0, -1, 1, -10, -20)):
        for p in good_primes(E, 120):
            assert ap_count(E, p) == naive_ap(E, p)
    with pytest.raises(BadReductionError):
        ap_count(EllCurveQ(0, -1, 1, -10, -20), 11)


def test_known_ap_values():
    E11 = EllCurveQ(0, -1, 1, -10, -20)
    assert [ap_count(E11, p) for p in (2, 3, 5, 7, 13, 17, 19)] == [-2, -1, 1, -2, 4, -2, 0]


def test_integral_model_and_twists():
    E = EllCurveQ(0, 0, 0, Fraction(1, 16), Fraction(1, 64))
    Ei = integral_model(E)
    assert Ei.is_integral() and Ei.j == E.j
    T = quadratic_twist(E37, -3)
    assert twist_discriminant(E37, T) == -3
    for p in good_primes(E37, 80, exclude=3 * int(integral_model(T).disc)):
        assert ap_count(T, p) == kronecker(-3, p) * ap_count(E37, p)


def test_serre_curve_data():
    sd = serre_curve_data(E37)
    assert sd.d == -5
    assert (sd.group.level, sd.group.index()) == (20, 2)
    P = sign_quotient()
    assert P.order == 2


def test_trace_det_filter_excludes_wrong_groups():
    samples = frobenius_samples(E37, good_primes(E37, 200, exclude=37))
    B37 = FinSubgroup([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)], 37)
    assert trace_det_filter(B37, samples).compatible
    # no rational 5-isogeny, so some Frobenius trace mod 5 is impossible in the Borel
    B5 = FinSubgroup([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)], 5)
    res = trace_det_filter(B5, frobenius_samples(E37, good_primes(E37, 200, exclude=5)))
    assert not res.compatible and res.excluded_by is not None


def borel_character_quotient():
    """Borel mod 37 over the matrices with upper-left entry 1: labels are log_2 of that entry."""
    A = FinSubgroup([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)], 37)
    D = FinSubgroup([(1, 1, 0, 1), (1, 0, 0, 2)], 37)
    return AbelianQuotient(A, D, [(2, 0, 0, 1)], [36])


def test_reconstruct_matches_direct_character():
    Q = borel_character_quotient()
    log = {pow(2, k, 37): k for k in range(36)}
    values = {13: 6, 19: 26, 29: 36}
    samples = [(p, (log[v],)) for p, v in values.items()]
    gam = reconstruct_gamma(Q, samples, 1295, 36, values="gamma")
    direct = CharacterMap(1295, Q, {p: (log[v],) for p, v in values.items()})
    assert gam.conductor() == direct.conductor()
    for u in range(1, 1295):
        if u % 5 and u % 7 and u % 37:
            assert gam(u) == direct(u)
    # Borel structure: a_p = beta + p / beta mod 37
    for p in good_primes(E37, 300, exclude=1295):
        b = pow(2, gam(p)[0], 37)
        assert (ap_count(E37, p) - b - p * pow(b, -1, 37)) % 37 == 0


def test_level27_candidates_and_filter():
    G27 = certify_level(open_subgroup(GL2, 27, LEVEL27_GENS))
    N54 = certify_level(open_subgroup(GL2, 54, NORMAL54_GENS))
    P = quotient_presentation(G27, N54, reps=[(31, 44, 36, 25), (28, 27, 27, 28), (53, 0, 0, 53)],
                              orders=[9, 2, 2])
    Q = P.quotient
    alpha = {5: (2, 0, 1), 11: (6, 0, 1), 13: (4, 1, 1)}
    samples = [(p, Q.add(v, (0, 0, 1)) if kronecker(-19, p) == -1 else v) for p, v in alpha.items()]
    with pytest.raises(ValueError):
        reconstruct_gamma(P, samples, 114, 18)
    cands = gamma_candidates(P, samples, 114, 18)
    assert sorted(c.conductor() for c in cands) == [57, 152, 456, 456]
    fs = frobenius_samples(E27, good_primes(E27, 2000, exclude=6))
    survivors = [c for c in cands if trace_det_filter(assemble_image(P, c).group.at(24), fs).compatible]
    assert [c.conductor() for c in survivors] == [57]


def test_catalog_lookup():
    t = sympy.Symbol("t")
    G27 = certify_level(open_subgroup(GL2, 27, LEVEL27_GENS))
    num = (t ** 3 + 3) ** 3 * (t ** 9 + 9 * t ** 6 + 27 * t ** 3 + 3) ** 3
    den = t ** 3 * (t ** 6 + 9 * t ** 3 + 27)
    assert rational_preimages(num, den, Fraction(32768, 19)) == [Fraction(-1)]
    entry = CatalogEntry(G27, num, den, "27")
    r = catalog_locate(E27.j, [entry])
    assert r.group == G27 and r.parameter == -1 and r.entry is entry
    r = catalog_locate(Fraction(1, 3), [entry])
    assert r.entry is None and r.group == whole(GL2)


def test_listed_level27_generators_use_the_transposed_orientation():
    from artifact.galoisimage import transpose_group
    from conftest import H1026_GENS
    G27 = certify_level(open_subgroup(GL2, 27, LEVEL27_GENS))
    assert not all(G27.contains(g, 1026) for g in H1026_GENS)
    GT = transpose_group(G27)
    assert all(GT.contains(g, 1026) for g in H1026_GENS)
