import itertools
from math import gcd

import pytest
import sympy

from artifact.curvemodels import (
    choose_model_params, companion_matrix, curve_model, evaluate_relation, invariant_subspace,
    jmap, monomials, relations, relative_minpoly, j_local, star, torsion_function_qexp,
    universal_curve,
)
from artifact.exactarith import CycNum, QSeries
from artifact.galoisimage import EllCurveQ, ap_count
from artifact.gl2 import GL2, FinSubgroup, full_group
from artifact.modforms import classical_qexp, mk_basis, sturm
from conftest import LEVEL27_GENS

B11 = FinSubgroup([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2), (10, 0, 0, 10)], 11)
NS13 = FinSubgroup([(2, 0, 0, 1), (1, 0, 0, 2), (0, 1, 1, 0)], 13)


def eval_poly(F, pt, p=None):
    v = sum(c * pt[0] ** e[0] * pt[1] ** e[1] * pt[2] ** e[2] for e, c in F.items())
    return v % p if p else v


def projective_count(F, p):
    n = 0
    for pt in itertools.product(range(p), repeat=3):
        if any(pt) and next(a for a in pt if a) == 1 and eval_poly(F, pt, p) == 0:
            n += 1
    return n


@pytest.fixture(scope="module")
def x0_11():
    return curve_model(B11)


@pytest.fixture(scope="module")
def xs13():
    return curve_model(NS13)


def test_monomials():
    assert monomials(3, 2) == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]
    assert len(monomials(4, 3)) == 20


def test_model_parameters():
    p = choose_model_params(full_group(GL2, 2))
    assert (p.k, p.degree) == (12, 1)
    p = choose_model_params(B11)
    assert (p.k, p.degree) == (4, 3)


def test_x0_11_is_the_elliptic_curve_11a(x0_11):
    M = x0_11
    assert (M.d, M.genus) == (2, 1)
    assert not M.ideal[2] and len(M.ideal[3]) == 1
    F = M.ideal[3][0]
    E = EllCurveQ(0, -1, 1, -10, -20)
    for p in (13, 17, 19, 23, 29, 31):
        assert projective_count(F, p) == p + 1 - ap_count(E, p)


def test_split_cartan_13_quartic(xs13):
    M = xs13
    assert M.canonical and M.genus == 3 and M.d == 2
    F = M.ideal[4][0]
    assert len(M.ideal[4]) == 1 and all(sum(e) == 4 for e in F)
    # the curve has exactly seven rational points; all have small height on this model
    pts = set()
    for pt in itertools.product(range(-20, 21), repeat=3):
        if any(pt) and gcd(gcd(pt[0], pt[1]), pt[2]) == 1 and eval_poly(F, pt) == 0:
            s = 1 if next(a for a in pt if a) > 0 else -1
            pts.add(tuple(s * a for a in pt))
    assert len(pts) == 7


def test_relations_stable_under_doubled_precision(x0_11, xs13):
    for M, n in ((x0_11, 3), (xs13, 4)):
        b = sturm(M.data, n * M.k).b
        assert relations(M.forms, n, 2 * b) == M.ideal[n]
        for F in M.ideal[n]:
            assert evaluate_relation(F, M.forms, 2 * b)


def test_relations_refuse_low_precision(x0_11):
    from artifact.exactarith import PrecisionError
    with pytest.raises(PrecisionError):
        relations(x0_11.forms, 3, 1)


def test_jmap_of_the_j_line():
    M = curve_model(full_group(GL2, 2))
    assert M.d == 1 and M.genus == 0
    J = jmap(M)
    assert J.degree == 1
    num, den = sympy.fraction(sympy.cancel(J.rational_function("t")))
    t = sympy.Symbol("t")
    assert max(sympy.degree(num, t), sympy.degree(den, t)) == 1


def test_jmap_linear_route(x0_11):
    J = jmap(x0_11)
    assert J.route != "hauptmodul"
    assert J.degree == 12


def test_torsion_function_symmetries():
    N, P = 5, 40
    x = torsion_function_qexp("x_alpha", (1, 2), N, P)
    assert x == torsion_function_qexp("x_alpha", (4, 3), N, P)
    h = torsion_function_qexp("h_alpha", (1, 2), N, P)
    assert h == -torsion_function_qexp("h_alpha", (4, 3), N, P)
    # tau -> tau + 1 sends alpha = (1, 2) to (1, 3)
    shifted = QSeries.from_dict(x.N, {e: c * CycNum.zeta(x.K, e) for e, c in x.terms()}, x.prec, x.K)
    assert shifted == torsion_function_qexp("x_alpha", (1, 3), N, P)
    assert x.galois(2) == torsion_function_qexp("x_alpha", (1, 4), N, P)
    with pytest.raises(ValueError):
        torsion_function_qexp("x_alpha", (0, 1), N, P)


def test_universal_curve_recovers_j():
    G = FinSubgroup([(1, 1, 0, 1), (1, 0, 0, 2)], 3)
    uc = universal_curve(G, prec=30, express=True)
    j = sympy.Symbol("j")
    assert sympy.expand(uc.discriminant - 2176782336 * j ** 2 * (j - 1728) ** 3) == 0
    for i in range(len(uc.delta)):
        tj = uc.twisted_j(i)
        ref = classical_qexp("j", tj.prec // 3 + 2).rescale(3).embed_field(3).truncate(tj.prec)
        assert tj == ref
    assert uc.delta_expression.degree == 6


def test_invariant_subspace_companion_relation():
    G = FinSubgroup([(1, 1, 0, 1), (1, 0, 0, 2)], 3)
    big = FinSubgroup(G.gens + [(2, 0, 0, 2)], 3)
    inv = invariant_subspace(big, G, 3)
    assert inv.companion == [[-1]] and inv.order == 2 and len(inv.forms) == 1
    f = inv.forms[0]
    assert star(f, inv.g0).vector() == [-x for x in f.vector()]
    assert companion_matrix(4) == [[0, -1], [1, 0]]
    assert companion_matrix(9) == [[0, 0, 0, 0, 0, -1], [1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0],
                                   [0, 0, 1, 0, 0, -1], [0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0]]


def test_relative_minpoly_annihilates_the_function():
    B3 = FinSubgroup([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2), (2, 0, 0, 2)], 3)
    G0 = full_group(GL2, 3)
    E4 = classical_qexp("E4", 40).rescale(3).embed_field(3)
    basis = mk_basis(B3, 4)
    f = next(g for g in basis
             if any(not (g.expansion(0, 10)[e] * E4[0] - E4[e] * g.expansion(0, 10)[0]).is_zero()
                    for e in range(10)))
    rm = relative_minpoly(f, E4, G0, 90, hauptmodul=j_local(1, 60, 3), width=1,
                          pole_bounds=[0, 0, 0, 1, 1], deg_cap=3)
    assert rm.degree == 4
    # sum c_i h^(m-i) vanishes for h = f / E4 at infinity
    h = f.expansion(0, 60) * E4.truncate(60).inverse()
    tot = None
    for i, c in enumerate(rm.coefficients):
        term = c * h ** (rm.degree - i)
        tot = term if tot is None else tot + term
    assert tot.is_zero()
    # the coefficients are rational functions of j with poles bounded as requested
    jj = sympy.Symbol("t")
    for e in rm.expressions[1:]:
        num, den = sympy.fraction(sympy.cancel(e.sympy("t")))
        assert sympy.degree(den, jj) <= 1


def test_level27_jmap_matches_closed_form_up_to_scaling():
    # recomputed from our own model of the transposed level-27 group
    G = FinSubgroup([(a, c, b, d) for a, b, c, d in LEVEL27_GENS], 27)
    J = jmap(curve_model(G))
    assert J.route == "hauptmodul" and J.degree == 36
    t = sympy.Symbol("t")
    ours = sympy.cancel(J.rational_function("t"))
    num, den = sympy.fraction(ours)
    # pole orders are the cusp widths: at infinity and at each root of the denominator
    poles = [sympy.degree(num, t) - sympy.degree(den, t)]
    for f, m in sympy.factor_list(den, t)[1]:
        poles += [m] * sympy.degree(f, t)
    assert sorted(poles) == [1] * 6 + [3, 27]
    # move the width-27 cusp to infinity, then rescale t so the denominator matches
    if poles[0] != 27:
        ours = sympy.cancel(ours.subs(t, 1 / t))
        num, den = sympy.fraction(ours)
    d = sympy.Poly(den, t)
    d = sympy.Poly(d.as_expr() / d.LC(), t)
    c3 = sympy.Rational(9) / d.coeff_monomial(t ** 6)
    c = sympy.real_root(c3, 3)
    closed = (t ** 3 + 3) ** 3 * (t ** 9 + 9 * t ** 6 + 27 * t ** 3 + 3) ** 3 / (t ** 3 * (t ** 6 + 9 * t ** 3 + 27))
    assert sympy.cancel(closed.subs(t, c * t) - ours) == 0
