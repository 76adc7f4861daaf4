"""Projective models of modular curves, maps to the j-line and function-field tools.

Forms are ModForm objects from ``modforms``; polynomials are dicts mapping an
exponent tuple to an integer coefficient.  Expansions used for function-field
recognition are taken at one or more cusps and written in the local parameter
q_w (w the cusp width), so that orders of vanishing are multiplicities on X_G.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd, lcm

import numpy as np

from .congruence import CongruenceData
from .exactarith import (
    EXACT, CycNum, PrecisionError, QSeries, cyclotomic_poly, inv_mod,
)
from .gl2 import FinSubgroup, Mat, as_tuple, mat_det, mat_mul
from .modforms import (
    FormSpace, ModForm, _act_vec, _decode, _encode, classical_qexp, lll_reduce,
    mk_basis, nice_basis, rank_mod_p, reduce_rows, saturate, series_galois, series_mul, sturm, to_qseries,
)

Poly = dict  # exponent tuple -> int


# ------------------------------------------------------------ small helpers

def monomials(m: int, n: int) -> list[tuple]:
    """Exponent tuples of degree n in m variables, in descending lexicographic order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(m), n):
        e = [0] * m
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(set(out), reverse=True)


def poly_str(F: Poly, names: list[str] | None = None) -> str:
    if not F:
        return "0"
    m = len(next(iter(F)))
    names = names or [f"x{i}" for i in range(m)]
    parts = []
    for e in sorted(F, reverse=True):
        c = F[e]
        mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(names, e) if k)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def _nullspace(columns: list[list[int]]) -> list[list[Fraction]]:
    """Rational basis of {c : sum_m c_m columns[m] = 0}."""
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    nv = len(columns)
    if nv == 0:
        return []
    rows = len(columns[0])
    if rows == 0:
        return [[Fraction(int(i == j)) for j in range(nv)] for i in range(nv)]
    M = DomainMatrix([[QQ(int(columns[m][r])) for m in range(nv)] for r in range(rows)],
                     (rows, nv), QQ)
    ns = M.nullspace().to_Matrix()
    return [[Fraction(int(x.p), int(x.q)) for x in ns.row(i)] for i in range(ns.rows)]


def _nice_integral(vectors: list[list[Fraction]]) -> list[list[int]]:
    """Saturated, LLL-reduced integral basis of the span."""
    if not vectors:
        return []
    return lll_reduce(saturate(vectors))


def _common_arrays(forms: list[ModForm], P: int) -> list[list[np.ndarray]]:
    """Per form and cusp, expansion arrays scaled to one common denominator (dropped)."""
    raw = [f.arrays(P) for f in forms]
    D = lcm(*[den for _, den in raw]) if raw else 1
    return [[a * (D // den) for a in arrs] for arrs, den in raw]


def _common_den(forms: list[ModForm], P: int) -> int:
    return lcm(*[f.arrays(P)[1] for f in forms])


def _cusp_rows(data: CongruenceData, i: int, count: int) -> list[int]:
    step = data.N // data.cusps()[i].width
    return [n * step for n in range(count)]


def _sturm_vector(data: CongruenceData, counts: list[int], arrays: list[np.ndarray]) -> list[int]:
    vec = []
    for i, (cnt, arr) in enumerate(zip(counts, arrays)):
        rows = arr[_cusp_rows(data, i, cnt)]
        for row in reduce_rows(rows):
            vec.extend(int(v) for v in row)
    return vec


def _level_one_array(which: str, N: int, P: int) -> np.ndarray:
    """A level-one form as a (P, N) array in q_N."""
    s = classical_qexp(which, (P + N - 1) // N + 1)
    arr = np.zeros((P, N), dtype=object)
    for n in range(0, P, N):
        arr[n, 0] = int(s[n // N].to_rational())
    return arr


def _monomial_arrays(base: list[list[np.ndarray]], n: int) -> dict[tuple, list[np.ndarray]]:
    """Products of the forms for every exponent tuple of degree n, per cusp."""
    m = len(base)
    ncusps = len(base[0])
    P, N = base[0][0].shape
    one = np.zeros((P, N), dtype=object)
    one[0, 0] = 1
    cache: dict[tuple, list[np.ndarray]] = {(0,) * m: [one] * ncusps}

    def get(e: tuple) -> list[np.ndarray]:
        if e in cache:
            return cache[e]
        i = max(j for j in range(m) if e[j])
        prev = list(e)
        prev[i] -= 1
        lower = get(tuple(prev))
        val = [series_mul(lower[c].astype(object), base[i][c].astype(object)) for c in range(ncusps)]
        cache[e] = val
        return val

    return {e: get(e) for e in monomials(m, n)}


# ---------------------------------------------------------- model parameters

@dataclass
class ModelParams:
    k: int
    divisor: list[int]          # e_i per cusp
    degree: int                 # deg of the line bundle L_k(-E)
    orbits: list[list[int]]


def line_bundle_degree(gd, k: int) -> int:
    g, r = gd.genus, gd.cusps
    return k // 2 * (2 * g - 2) + k // 2 * r + (k // 4) * gd.v2 + (k // 3) * gd.v3


def choose_model_params(G) -> ModelParams:
    """Smallest even k with deg L_k >= 2g+1, and a rational cusp divisor E making deg L_k(-E) minimal."""
    data = G if isinstance(G, CongruenceData) else CongruenceData(G)
    if not data.has_minus_identity:
        raise ValueError("-I must lie in G")
    gd = data.gamma_data()
    target = 2 * gd.genus + 1
    k = 2
    while line_bundle_degree(gd, k) < target:
        k += 2
    deg = line_bundle_degree(gd, k)
    orbits = data.galois_orbits()
    cusps = data.cusps()
    # prefer small orbits, then wide cusps
    order = sorted(range(len(orbits)), key=lambda o: (len(orbits[o]), -cusps[orbits[o][0]].width, o))
    slack = deg - target
    # best[s] = orbit multiplicities reaching the sum s, filled in preference order
    best: dict[int, tuple] = {0: ()}
    for s in range(1, slack + 1):
        for o in order:
            size = len(orbits[o])
            if size <= s and (s - size) in best:
                best[s] = best[s - size] + (o,)
                break
    reach = max(best)
    e = [0] * len(cusps)
    for o in best[reach]:
        for i in orbits[o]:
            e[i] += 1
    return ModelParams(k, e, deg - reach, orbits)


def _combine(forms: list[ModForm], coeffs) -> ModForm:
    terms = []
    for c, f in zip(coeffs, forms):
        c = Fraction(c)
        if c:
            terms += [(c * x, t, j) for x, t, j in f.terms]
    return ModForm(forms[0].space, terms)


def vanishing_subspace(basis: list[ModForm], divisor: list[int], nice: bool = True) -> list[ModForm]:
    """Basis of {f in span(basis) : ord_{P_i} f >= e_i at every cusp}."""
    if not basis:
        return []
    sp = basis[0].space
    data = sp.data
    top = max(divisor) if divisor else 0
    if top:
        P = max((top - 1) * (sp.N // c.width) for c in data.cusps()) + 1
        arrs = _common_arrays(basis, P)
        cols = []
        for per_cusp in arrs:
            vec = []
            for i, e in enumerate(divisor):
                if e:
                    for row in reduce_rows(per_cusp[i][_cusp_rows(data, i, e)]):
                        vec.extend(int(v) for v in row)
            cols.append(vec)
        sol = _nullspace(cols)
    else:
        sol = [[Fraction(int(i == j)) for j in range(len(basis))] for i in range(len(basis))]
    if not sol:
        return []
    forms = [_combine(basis, r) for r in sol]
    return nice_basis(forms, lll=True) if nice else forms


# ---------------------------------------------------------------- relations

def relations(V: list[ModForm], n: int, prec: int | None = None) -> list[Poly]:
    """Basis of the degree-n homogeneous relations among the forms of V.

    prec is the number of q_N-coefficients used at each cusp; it must reach the
    coefficient bound of weight n*k so that vanishing is certified."""
    if not V:
        return []
    sp = V[0].space
    data = sp.data
    st = sturm(data, n * sp.k)
    P = st.b if prec is None else prec
    if P < st.b:
        raise PrecisionError(f"precision {P} below the coefficient bound {st.b} of weight {n * sp.k}")
    counts = [ceil(Fraction(c.width * P, data.N)) for c in data.cusps()]
    base = _common_arrays(V, P)
    mons = _monomial_arrays(base, n)
    keys = list(mons)
    cols = [_sturm_vector(data, counts, mons[e]) for e in keys]
    sol = _nice_integral(_nullspace(cols))
    out = []
    for r in sol:
        # vanishing to the coefficient bound is asserted, not assumed
        acc = [0] * len(cols[0])
        for c, col in zip(r, cols):
            if c:
                acc = [a + c * x for a, x in zip(acc, col)]
        assert not any(acc), "relation does not vanish"
        out.append({e: c for e, c in zip(keys, r) if c})
    return out


def evaluate_relation(F: Poly, V: list[ModForm], prec: int) -> bool:
    """Whether F(f_0,...,f_d) vanishes at every cusp to q_N-precision prec."""
    base = _common_arrays(V, prec)
    n = sum(next(iter(F)))
    mons = _monomial_arrays(base, n)
    ncusps = len(base[0])
    for c in range(ncusps):
        tot = None
        for e, coef in F.items():
            term = coef * mons[e][c]
            tot = term if tot is None else tot + term
        if tot is not None and np.any(reduce_rows(tot) != 0):
            return False
    return True


# ------------------------------------------------------------------ models

@dataclass
class ProjectiveModel:
    d: int
    k: int
    forms: list[ModForm] = field(repr=False)
    ideal: dict[int, list[Poly]]
    genus: int
    cusp_images: list[list[CycNum]] = field(repr=False)
    divisor: list[int]
    canonical: bool = False
    hyperelliptic: bool = False

    @property
    def data(self) -> CongruenceData:
        return self.forms[0].space.data

    def generators(self) -> list[Poly]:
        return [F for n in sorted(self.ideal) for F in self.ideal[n]]


def cusp_images(forms: list[ModForm]) -> list[list[CycNum]]:
    """Image of each cusp under [f_0 : ... : f_d], normalised so some coordinate is 1."""
    sp = forms[0].space
    data = sp.data
    N = sp.N
    gd = data.gamma_data()
    top = sp.k * gd.index // 12 + 1
    P = top * N + 1
    arrs = _common_arrays(forms, P)
    out = []
    for i, c in enumerate(data.cusps()):
        rows = _cusp_rows(data, i, top + 1)
        lead = []
        for per_cusp in arrs:
            red = reduce_rows(per_cusp[i][rows])
            v = next((n for n, row in enumerate(red) if any(row)), None)
            lead.append((v, red))
        m = min((v for v, _ in lead if v is not None))
        vals = []
        for v, red in lead:
            if v == m:
                vals.append(CycNum(N, [Fraction(int(x)) for x in red[m]], _reduced=True))
            else:
                vals.append(CycNum.zero(N))
        piv = next(x for x in vals if not x.is_zero())
        out.append([x / piv for x in vals])
    return out


def curve_model(G, max_degree: int = 4) -> ProjectiveModel:
    """A model of X_G: canonical when g >= 3 and not hyperelliptic, otherwise a large-degree one."""
    data = CongruenceData(G) if not isinstance(G, CongruenceData) else G
    if not data.has_minus_identity:
        raise ValueError("-I must lie in G")
    gd = data.gamma_data()
    g = gd.genus
    if g >= 3:
        basis = mk_basis(data.G, 2)
        V = vanishing_subspace(basis, [1] * gd.cusps)
        if len(V) != g:
            raise ArithmeticError(f"cusp form space has dimension {len(V)}, expected {g}")
        I2 = relations(V, 2)
        if len(I2) != (g - 1) * (g - 2) // 2:
            if len(I2) != (g - 2) * (g - 3) // 2:
                raise ArithmeticError(f"unexpected dim I_2 = {len(I2)}")
            ideal = {2: I2}
            if g == 3:
                ideal = {4: relations(V, 4)}
            else:
                ideal[3] = _new_relations(V, 3, I2)
            return ProjectiveModel(g - 1, 2, V, ideal, g, cusp_images(V), [1] * gd.cusps,
                                   canonical=True)
        hyper = True
    else:
        hyper = False
    params = choose_model_params(data)
    basis = mk_basis(data.G, params.k)
    V = vanishing_subspace(basis, params.divisor)
    d = len(V) - 1
    if d != params.degree - g:
        raise ArithmeticError(f"dim V = {d + 1}, Riemann-Roch predicts {params.degree - g + 1}")
    ideal: dict[int, list[Poly]] = {}
    if d >= 2:
        ideal[2] = relations(V, 2)
        if params.degree < 2 * g + 2 and 3 <= max_degree:
            ideal[3] = _new_relations(V, 3, ideal[2])
    return ProjectiveModel(d, params.k, V, ideal, g, cusp_images(V), params.divisor,
                           hyperelliptic=hyper)


def _new_relations(V: list[ModForm], n: int, lower: list[Poly]) -> list[Poly]:
    """Degree-n relations not in the ideal generated by the given lower-degree ones."""
    full = relations(V, n)
    if not lower:
        return full
    m = len(V)
    dl = sum(next(iter(lower[0])))
    span = []
    for F in lower:
        for mono in monomials(m, n - dl):
            span.append({tuple(a + b for a, b in zip(e, mono)): c for e, c in F.items()})
    keys = monomials(m, n)
    idx = {e: i for i, e in enumerate(keys)}

    def vec(F):
        v = [0] * len(keys)
        for e, c in F.items():
            v[idx[e]] += c
        return v

    from sympy import Matrix
    base = Matrix([vec(F) for F in span]) if span else Matrix(0, len(keys), [])
    rank = base.rank()
    out = []
    for F in full:
        trial = base.col_join(Matrix([vec(F)]))
        if trial.rank() > rank:
            base, rank = trial, rank + 1
            out.append(F)
    return out


# -------------------------------------------------------- local expansions

def local_expansion(arr: np.ndarray, den: int, width: int, prec: int | None = None) -> QSeries:
    """Turn a (P, N) q_N-array at a cusp of the given width into a series in q_width."""
    P, N = arr.shape
    step = N // width
    s = to_qseries(arr, den)
    terms = {}
    for e, c in s.terms():
        if e % step:
            raise ArithmeticError("expansion is not a series in the local parameter")
        terms[e // step] = c
    lp = (P - 1) // step + 1 if prec is None else prec
    return QSeries.from_dict(width, terms, lp, N)


def rationalize(series: list[QSeries]) -> list[QSeries] | None:
    """Find s with c_m * zeta_w^(-s m) rational for every series; return them over Q."""
    if not series:
        return []
    w = series[0].N
    K = series[0].K
    for s in range(w):
        out = []
        ok = True
        for f in series:
            terms = {}
            for m, c in f.terms():
                x = c * CycNum.zeta(K, (-s * m * (K // w)) % K) if K % w == 0 else None
                if x is None or not x.is_rational():
                    ok = False
                    break
                terms[m] = x.to_rational()
            if not ok:
                break
            out.append(QSeries.from_dict(w, terms, f.prec, 1) if terms
                       else QSeries(w, [], f.prec, min(0, f.prec), 1))
        if ok:
            return out
    return None


def j_local(width: int, prec: int, K: int = 1) -> QSeries:
    """The j-invariant in the local parameter q_width (q = q_width^width)."""
    n = max(prec // width + 2, 2)
    j = classical_qexp("j", n + 1)
    terms = {(e) * width: c for e, c in j.terms()}
    s = QSeries.from_dict(width, terms, min(j.prec * width - (width - 1), prec), 1)
    return s if K == 1 else s.embed_field(K)


# ----------------------------------------------------- function-field tools

@dataclass
class Expression:
    """h = F1(f)/F2(f) with polynomial coefficient lists (constant term first)."""
    F1: list[Fraction]
    F2: list[Fraction]
    zeros_checked: int
    pole_bound: int

    @property
    def degree(self) -> int:
        return max(len(self.F1), len(self.F2)) - 1

    def sympy(self, var="t"):
        from sympy import Rational, Symbol
        t = Symbol(var)
        num = sum(Rational(c.numerator, c.denominator) * t ** i for i, c in enumerate(self.F1))
        den = sum(Rational(c.numerator, c.denominator) * t ** i for i, c in enumerate(self.F2))
        return num / den


def _coord_rows(s: QSeries, lo: int, hi: int) -> list[list[Fraction]]:
    """Power-basis coordinates of the coefficients lo..hi-1."""
    out = []
    for e in range(lo, hi):
        c = s[e]
        out.append(list(c.c))
    return out


def hauptmodul_express(h: list[QSeries], f: list[QSeries], pole_bound: int,
                       deg_cap: int, f_poles: int = 1, deg_min: int = 0) -> Expression:
    """Minimal-degree F1, F2 in Q[t] with F2(f) h = F1(f), certified by counting zeros.

    h and f are expansions in local parameters at some cusps (aligned lists).
    pole_bound bounds the poles of h and f_poles those of f on the whole curve.
    """
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    ncusps = len(h)
    powers = [[QSeries.constant(x.N, 1, x.K) for x in f]]
    for d in range(deg_cap + 1):
        while len(powers) <= d:
            powers.append([a * b for a, b in zip(powers[-1], f)])
        hp = [[powers[i][c] * h[c] for c in range(ncusps)] for i in range(d + 1)]
        rows = []
        zeros = 0
        for c in range(ncusps):
            series = [hp[i][c] for i in range(d + 1)] + [-powers[i][c] for i in range(d + 1)]
            finite = [s.prec for s in series if s.prec < EXACT // 2]
            if finite:
                prec = min(finite)
                zeros += max(prec, 0)
            else:
                # exact series: every coefficient is known
                prec = max(s.low + len(s.coeffs) for s in series)
                zeros = EXACT
            lo = min((s.low for s in series if s.coeffs), default=prec)
            if prec <= lo:
                continue
            blocks = [_coord_rows(s, lo, prec) for s in series]
            for e in range(prec - lo):
                for coord in range(len(blocks[0][e])):
                    rows.append([b[e][coord] for b in blocks])
        if d < deg_min:
            continue
        nv = 2 * (d + 1)
        if rows and _full_rank_mod_p(rows, nv):
            continue
        M = DomainMatrix([[QQ(x.numerator, x.denominator) for x in r] for r in rows],
                         (len(rows), nv), QQ)
        ns = M.nullspace().to_Matrix()
        if ns.rows == 0:
            continue
        if ns.rows > 1:
            raise PrecisionError(f"{ns.rows} independent relations of degree {d}; add precision")
        sol = [Fraction(int(x.p), int(x.q)) for x in ns.row(0)]
        F2, F1 = sol[: d + 1], sol[d + 1:]
        if not any(F2):
            continue
        if zeros <= pole_bound + d * f_poles:
            raise PrecisionError(f"{zeros} zeros checked, need more than {pole_bound + d * f_poles}")
        F1, F2 = _normalize_pair(F1, F2)
        return Expression(F1, F2, zeros, pole_bound + d * f_poles)
    raise ArithmeticError(f"no expression of degree <= {deg_cap}")


_SCAN_PRIME = 2147483629


def _full_rank_mod_p(rows: list[list[Fraction]], nv: int) -> bool:
    """True when the rows have rank nv modulo a prime (then also over Q)."""
    p = _SCAN_PRIME
    out = []
    for r in rows:
        if any(x.denominator % p == 0 for x in r):
            return False
        out.append([x.numerator * pow(x.denominator, -1, p) % p for x in r])
    return rank_mod_p(np.array(out, dtype=np.int64), p) == nv


def _normalize_pair(F1: list[Fraction], F2: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    while len(F1) > 1 and F1[-1] == 0:
        F1 = F1[:-1]
    while len(F2) > 1 and F2[-1] == 0:
        F2 = F2[:-1]
    lead = next(c for c in reversed(F2) if c)
    F1 = [c / lead for c in F1]
    F2 = [c / lead for c in F2]
    return F1, F2


# ------------------------------------------------------------------ j-maps

@dataclass
class JMap:
    n: int
    F1: Poly
    F2: Poly
    degree: int
    route: str
    hauptmodul: Expression | None = None

    def rational_function(self, var="t"):
        """pi(t) = F1(t, 1)/F2(t, 1) for a P^1 model."""
        if self.hauptmodul is None:
            raise ValueError("only available for models of P^1")
        return self.hauptmodul.sympy(var)


def _pick_cusp(model: ProjectiveModel, P_loc: int):
    """Expansions of the two coordinates at the widest cusp that gives rational series."""
    data = model.data
    sp = model.forms[0].space
    N = sp.N
    cusps = data.cusps()
    order = sorted(range(len(cusps)), key=lambda i: (-cusps[i].width, i))
    top = sp.k * data.gamma_data().index // 12 + 1
    fallback = None
    for i in order:
        w = cusps[i].width
        P = (P_loc + top + 2) * (N // w) + 1
        arrs = _common_arrays(model.forms, P)
        den = _common_den(model.forms, P)
        ser = [local_expansion(a[i], den, w) for a in arrs]
        rat = rationalize(ser)
        if rat is not None:
            return i, w, rat, 1
        if fallback is None:
            fallback = (i, w, ser, N)
    return fallback


def jmap(model: ProjectiveModel, deg_cap: int | None = None, max_tries: int = 4) -> JMap:
    """The map X_G -> j-line as F1/F2 in the model coordinates."""
    data = model.data
    index = data.gamma_data().index
    cap = index if deg_cap is None else deg_cap
    if model.d == 1:
        P_loc = 4 * index + 16
        for _ in range(max_tries):
            i, w, (f0, f1), K = _pick_cusp(model, P_loc)
            t = f0 / f1
            j = j_local(w, t.prec + index + 2, K)
            try:
                ex = hauptmodul_express([j], [t], index, cap, deg_min=1)
            except PrecisionError:
                P_loc *= 2
                continue
            deg = _sympy_degree(ex)
            if deg != index:
                raise ArithmeticError(f"j-map degree {deg} differs from the index {index}")
            n = ex.degree
            F1 = {(a, n - a): _as_int(c) for a, c in enumerate(_pad(ex.F1, n + 1)) if c}
            F2 = {(a, n - a): _as_int(c) for a, c in enumerate(_pad(ex.F2, n + 1)) if c}
            return JMap(n, F1, F2, deg, "hauptmodul", ex)
        raise PrecisionError("precision escalation exhausted")
    return _jmap_linear(model, cap)


def _pad(c: list, n: int) -> list:
    return list(c) + [Fraction(0)] * (n - len(c))


def _as_int(c: Fraction):
    return int(c) if c.denominator == 1 else c


def _sympy_degree(ex: Expression) -> int:
    from sympy import Poly as SPoly, Symbol, cancel, fraction
    t = Symbol("t")
    num, den = fraction(cancel(ex.sympy("t")))
    return max(SPoly(num, t).degree(), SPoly(den, t).degree())


def _jmap_linear(model: ProjectiveModel, cap: int) -> JMap:
    """Solve F1(f) Delta = F2(f) E4^3 degree by degree in weight n k + 12."""
    V = model.forms
    sp = V[0].space
    data = sp.data
    N = sp.N
    index = data.gamma_data().index
    for n in range(1, cap + 1):
        weight = n * sp.k + 12
        st = sturm(data, weight)
        P = st.b
        counts = [ceil(Fraction(c.width * P, N)) for c in data.cusps()]
        base = _common_arrays(V, P)
        mons = _monomial_arrays(base, n)
        keys = list(mons)
        delta = _level_one_array("Delta", N, P)
        e4 = _level_one_array("E4", N, P)
        e43 = series_mul(series_mul(e4, e4), e4)
        cols = []
        for e in keys:
            cols.append(_sturm_vector(data, counts, [series_mul(a, delta) for a in mons[e]]))
        for e in keys:
            cols.append(_sturm_vector(data, counts, [-series_mul(a, e43) for a in mons[e]]))
        sol = _nullspace(cols)
        ideal_n = relations(V, n)
        if len(sol) <= 2 * len(ideal_n):
            continue
        # a solution whose F2 part is not a relation
        for r in sol:
            F2v = r[len(keys):]
            F2 = {e: c for e, c in zip(keys, F2v) if c}
            if F2 and not _in_span(F2, ideal_n, keys):
                F1 = {e: c for e, c in zip(keys, r[: len(keys)]) if c}
                den = lcm(*[c.denominator for c in list(F1.values()) + list(F2.values())])
                F1 = {e: int(c * den) for e, c in F1.items()}
                F2 = {e: int(c * den) for e, c in F2.items()}
                g = 0
                for c in list(F1.values()) + list(F2.values()):
                    g = gcd(g, c)
                F1 = {e: c // g for e, c in F1.items()}
                F2 = {e: c // g for e, c in F2.items()}
                deg = _pole_degree(V, F1, F2, data)
                if deg != index:
                    raise ArithmeticError(f"j-map degree {deg} differs from the index {index}")
                return JMap(n, F1, F2, deg, "linear")
    raise ArithmeticError(f"no j-map of degree <= {cap}")


def _in_span(F: Poly, basis: list[Poly], keys: list[tuple]) -> bool:
    if not basis:
        return False
    from sympy import Matrix
    B = Matrix([[G.get(e, 0) for e in keys] for G in basis])
    return B.col_join(Matrix([[F.get(e, 0) for e in keys]])).rank() == B.rank()


def _pole_degree(V: list[ModForm], F1: Poly, F2: Poly, data: CongruenceData) -> int:
    """Sum over cusps of the pole order of F1(f)/F2(f), read off the expansions."""
    sp = V[0].space
    N = sp.N
    n = sum(next(iter(F1 or F2)))
    top = n * sp.k * data.gamma_data().index // 12 + 2
    P = top * N + 1
    base = _common_arrays(V, P)
    mons = _monomial_arrays(base, n)
    total = 0
    for i, c in enumerate(data.cusps()):
        rows = _cusp_rows(data, i, top)

        def order(F):
            tot = sum(coef * mons[e][i] for e, coef in F.items())
            red = reduce_rows(tot[rows])
            return next((r for r, row in enumerate(red) if any(row)), None)
        o1, o2 = order(F1), order(F2)
        if o2 is None:
            raise PrecisionError("F2(f) vanishes beyond the available precision")
        if o1 is None or o2 > o1:
            total += o2 - (o1 if o1 is not None else o2)
    return total


# --------------------------------------------------------- star action

def star(f: ModForm, A) -> ModForm:
    """f * A for A normalising the group of f (the result lies in the same space)."""
    sp = f.space
    N = sp.N
    A = as_tuple(A, N)
    d = mat_det(A, N)
    terms = []
    for c, tup, j in f.terms:
        new = tuple(sorted(_encode(_act_vec(_decode(e, N), A, N), N) for e in tup))
        terms.append((c, new, (j * d) % N))
    return ModForm(sp, terms)


def star_expansion(f: ModForm, A, prec: int) -> QSeries:
    """Expansion at infinity (in q_N) of f * A for any A in GL2(Z/NZ)."""
    sp = f.space
    N = sp.N
    A = as_tuple(A, N)
    d = mat_det(A, N)
    A1 = mat_mul(A, (1, 0, 0, inv_mod(d, N)), N)
    arr = series_galois(f._slash_sl2(A1, prec), d)
    dens = [c.denominator for c, _, _ in f.terms] or [1]
    return to_qseries(arr, sp.denominator() * lcm(*dens))


# ------------------------------------------------------ relative minpolys

@dataclass
class RelativeMinpoly:
    degree: int
    coefficients: list[QSeries]       # c_0 = 1, c_1, ... (coefficient of t^(m-i))
    expressions: list[Expression | None]


def right_cosets(G: FinSubgroup, G0: FinSubgroup) -> list[Mat]:
    """Representatives A with G0 the disjoint union of the G A."""
    N = G.N
    seen: set = set()
    reps = []
    H = G.elements()
    for x in G0.elements():
        if x in seen:
            continue
        reps.append(x)
        for h in H:
            seen.add(mat_mul(h, x, N))
    return reps


def relative_minpoly(f: ModForm, denom: QSeries, G0: FinSubgroup, prec: int,
                     hauptmodul: QSeries | None = None, width: int = 1,
                     pole_bounds: list[int] | None = None, deg_cap: int = 20) -> RelativeMinpoly:
    """prod over cosets A of (t - h*A) for h = f / denom with denom invariant under G0.

    Coefficients are returned as expansions at infinity; with a hauptmodul of X_{G0}
    (expansion at infinity in q_width) they are also written as rational functions of it.
    """
    G = f.space.G
    N = f.space.N
    S = right_cosets(G, G0)
    conj = [star_expansion(f, A, prec) for A in S]
    for a, b in itertools.combinations(range(len(conj)), 2):
        if conj[a] == conj[b]:
            raise ArithmeticError("h is fixed by a nontrivial coset")
    dinv = denom.inverse() if not isinstance(denom, (int, Fraction)) else Fraction(1, denom)
    hs = [c * dinv for c in conj]
    # elementary symmetric functions
    e = [QSeries.constant(N, 1, N)]
    for x in hs:
        new = [e[0]]
        for i in range(1, len(e)):
            new.append(e[i] - e[i - 1] * x)
        new.append(-(e[-1] * x))
        e = new
    exprs: list[Expression | None] = [None] * len(e)
    if hauptmodul is not None:
        step = N // width
        for i, c in enumerate(e):
            terms = {}
            for n, v in c.terms():
                if n % step:
                    raise ArithmeticError("coefficient is not invariant under the larger group")
                terms[n // step] = v
            lp = EXACT if c.prec >= EXACT // 2 else (c.prec - 1) // step + 1
            loc = QSeries.from_dict(width, terms, lp, N) if terms else QSeries(width, [], lp, 0, N)
            pb = pole_bounds[i] if pole_bounds else deg_cap
            exprs[i] = hauptmodul_express([loc], [hauptmodul], pb, deg_cap)
    return RelativeMinpoly(len(S), e, exprs)


# ------------------------------------------------------- torsion functions

def torsion_function_qexp(kind: str, alpha, N: int, prec: int) -> QSeries:
    """q_N-expansion of h_alpha (weight 3) or x_alpha (weight 0) for alpha = (r, s), 0 < r < N."""
    r, s = alpha
    r %= N
    s %= N
    if r == 0:
        raise ValueError("r must be nonzero modulo N")
    if kind == "h_alpha":
        return _h_alpha(r, s, N, prec)
    if kind == "x_alpha":
        return _x_alpha(r, s, N, prec)
    raise ValueError(f"unknown torsion function {kind!r}")


def _add(terms: dict, e: int, c: CycNum, prec: int):
    if e < prec:
        terms[e] = terms[e] + c if e in terms else c


def _h_alpha(r: int, s: int, N: int, prec: int) -> QSeries:
    terms: dict[int, CycNum] = {}
    n = 1
    while min(r * n, N * n - r * n) < prec:
        _add(terms, r * n, CycNum.zeta(N, s * n) * (n * n), prec)
        m = 1
        while N * m * n - r * n < prec:
            _add(terms, r * n + N * m * n, CycNum.zeta(N, s * n) * (n * n), prec)
            _add(terms, N * m * n - r * n, CycNum.zeta(N, -s * n) * (-n * n), prec)
            m += 1
        n += 1
    return QSeries.from_dict(N, terms, prec) if terms else QSeries(N, [], prec)


def _wp_normalized(r: int, s: int, N: int, prec: int) -> QSeries:
    """(2 pi i)^-2 wp(r tau/N + s/N; tau) in q_N."""
    terms: dict[int, CycNum] = {0: CycNum.rational(N, Fraction(1, 12))}
    for mn in range(1, prec // N + 1):
        # -2 sum_{m n = mn} n q^(mn)
        sig = sum(d for d in range(1, mn + 1) if mn % d == 0)
        _add(terms, N * mn, CycNum.rational(N, -2 * sig), prec)
    n = 1
    while True:
        low = min(r * n, N * n - r * n)
        if low >= prec:
            break
        _add(terms, r * n, CycNum.zeta(N, s * n) * n, prec)
        m = 1
        while N * m * n - r * n < prec:
            _add(terms, r * n + N * m * n, CycNum.zeta(N, s * n) * n, prec)
            _add(terms, N * m * n - r * n, CycNum.zeta(N, -s * n) * n, prec)
            m += 1
        n += 1
    return QSeries.from_dict(N, terms, prec)


def _x_alpha(r: int, s: int, N: int, prec: int) -> QSeries:
    n = prec // N + 3
    e4 = classical_qexp("E4", n)
    e6 = classical_qexp("E6", n)
    dl = classical_qexp("Delta", n + 1)
    ratio = (e4 * e6 / dl).scale(36)
    ratio = ratio.rescale(N).embed_field(N)
    wp = _wp_normalized(r, s, N, prec + N)
    return (ratio * wp).truncate(prec)


# ------------------------------------------------------- universal curve

@dataclass
class UniversalCurve:
    f0: ModForm = field(repr=False)
    delta: list[QSeries] = field(repr=False)     # per cusp, in q_N
    a4: object = None                            # sympy expression in j
    a6: object = None
    discriminant: object = None
    delta_expression: Expression | None = None

    def twisted_j(self, i: int) -> QSeries:
        """j-invariant of y^2 = x^3 + a4 delta^2 x + a6 delta^3 from the expansions at cusp i."""
        N = self.delta[i].N
        prec = self.delta[i].prec
        j = classical_qexp("j", prec // N + 3).rescale(N).embed_field(N)
        d = self.delta[i]
        A = j * (j - 1728) * d * d * (-27)
        B = j * (j - 1728) * (j - 1728) * d * d * d * 54
        num = A * A * A * 4 * 1728
        den = A * A * A * 4 + B * B * 27
        return num / den


def universal_curve(G: FinSubgroup, prec: int = 60, express: bool = False) -> UniversalCurve:
    """delta = j f0^2 / E6 and the family delta y^2 = x^3 - 27 j (j-1728) x + 54 j (j-1728)^2."""
    from sympy import Symbol, factor
    sp = FormSpace(G, 3)
    if sp.data.has_minus_identity:
        raise ValueError("-I must not lie in G")
    basis = mk_basis(sp, 3)
    if not basis:
        raise ArithmeticError("no weight 3 form; the group should have one")
    f0 = basis[0]
    N = sp.N
    exps = f0.expansions(prec)
    e6 = classical_qexp("E6", prec // N + 3).rescale(N).embed_field(N)
    j = classical_qexp("j", prec // N + 3).rescale(N).embed_field(N)
    delta = [(j * f * f / e6).truncate(min(prec, (j * f * f / e6).prec)) for f in exps]
    js = Symbol("j")
    a4 = -27 * js * (js - 1728)
    a6 = 54 * js * (js - 1728) ** 2
    disc = factor(-16 * (4 * a4 ** 3 + 27 * a6 ** 2))
    uc = UniversalCurve(f0, delta, a4, a6, disc)
    if express:
        uc.delta_expression = _express_delta(sp, f0)
    return uc


def _express_delta(sp: FormSpace, f0: ModForm) -> Expression:
    """delta as a rational function of a hauptmodul of X_{+-G} (genus 0 only)."""
    N = sp.N
    pm = FinSubgroup(sp.G.gens + [as_tuple((-1, 0, 0, -1), N)], N)
    model = curve_model(pm)
    if model.d != 1 or model.genus:
        raise ValueError("delta expressions need a genus 0 model")
    index = model.data.gamma_data().index
    i, w, (g0, g1), K = _pick_cusp(model, 3 * index + 10)
    cusp = model.data.cusps()[i]
    # the pm cusp i and the cusp of sp with the same representative share an expansion
    target = next(n for n, c in enumerate(sp.data.cusps()) if c.rep == cusp.rep)
    P = (3 * index + 12) * (N // w) + 1
    f = local_expansion(*f0.arrays(P)[0][target:target + 1], f0.arrays(P)[1], w)
    e6 = classical_qexp("E6", P // w + 3)
    jj = classical_qexp("j", P // w + 3)
    e6 = QSeries.from_dict(w, {e * w: c for e, c in e6.terms()}, e6.prec * w - w + 1, 1).embed_field(N)
    jj = QSeries.from_dict(w, {e * w: c for e, c in jj.terms()}, jj.prec * w - w + 1, 1).embed_field(N)
    d = jj * f * f / e6
    t = g0 / g1
    if K == 1:
        rat = rationalize([d])
        if rat is None:
            raise ArithmeticError("delta is not rational at the chosen cusp")
        d = rat[0]
    return hauptmodul_express([d], [t], index + index // 2, 3 * index)


# ------------------------------------------------------ invariant subspaces

@dataclass
class InvariantSubspace:
    forms: list[ModForm] = field(repr=False)
    companion: list[list[int]]
    g0: Mat
    order: int


def companion_matrix(n: int) -> list[list[int]]:
    """Companion matrix of the n-th cyclotomic polynomial (f_j * g0 = sum_i f_i C[i][j])."""
    phi = cyclotomic_poly(n)           # coefficients, constant term first
    m = len(phi) - 1
    C = [[0] * m for _ in range(m)]
    for j in range(m - 1):
        C[j + 1][j] = 1
    for i in range(m):
        C[i][m - 1] = -phi[i]
    return C


def _mat_order(C: list[list[int]], cap: int = 10000) -> int:
    from sympy import Matrix, eye
    M = Matrix(C)
    X = M
    for n in range(1, cap + 1):
        if X == eye(M.rows):
            return n
        X = X * M
    raise ArithmeticError("matrix order exceeds the cap")


def invariant_subspace(big: FinSubgroup, G: FinSubgroup, k: int, g0: Mat | None = None) -> InvariantSubspace:
    """V in M_{k,G} on which big/G (cyclic of prime-power order) acts through a companion matrix."""
    from sympy import Matrix
    N = G.N
    n = big.order() // G.order()
    if n <= 1:
        raise ValueError("quotient must be nontrivial")
    ps = [p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))]
    if len(ps) != 1:
        raise ValueError("quotient order must be a prime power")
    for h in big.gens:
        for x in G.gens:
            if not G.contains(mat_mul(mat_mul(h, x, N), _inv(h, N), N)):
                raise ValueError("G is not normal")
    if g0 is None:
        cands = [as_tuple((-1, 0, 0, -1), N)] + big.elements()
        g0 = next(x for x in cands if big.contains(x) and _order_mod(x, G, N) == n)
    elif _order_mod(g0, G, N) != n:
        raise ValueError("g0 does not generate the quotient")
    sp = FormSpace(G, k)
    basis = mk_basis(sp, k)
    if not basis:
        raise ArithmeticError(f"M_{k} is zero; increase k")
    vecs = [f.vector() for f in basis]
    B = Matrix([[x for x in v] for v in vecs]).T        # columns = basis vectors
    imgs = Matrix([[x for x in star(f, g0).vector()] for f in basis]).T
    # matrix of g0 on the basis: B X = imgs
    X = (B.T * B).LUsolve(B.T * imgs)
    phi = cyclotomic_poly(n)
    m = len(phi) - 1
    PhiX = sum((c * X ** i for i, c in enumerate(phi)), Matrix.zeros(*X.shape))
    ker = PhiX.nullspace()
    if not ker:
        raise ArithmeticError(f"no faithful part of M_{k}; increase k")
    v = ker[0]
    v = v * lcm(*[int(Fraction(str(x)).denominator) for x in v])
    cols = [v]
    for _ in range(m - 1):
        cols.append(X * cols[-1])
    forms = [_combine(basis, [Fraction(str(x)) for x in c]) for c in cols]
    C = companion_matrix(n)
    # exact check of the transformation rule on coefficient vectors
    fv = [Matrix(f.vector()) for f in forms]
    for j, f in enumerate(forms):
        lhs = Matrix(star(f, g0).vector())
        rhs = sum((fv[i] * C[i][j] for i in range(m)), Matrix.zeros(len(fv[0]), 1))
        if lhs != rhs:
            raise ArithmeticError("companion relation failed")
    return InvariantSubspace(forms, C, g0, _mat_order(C))


def _inv(x: Mat, N: int) -> Mat:
    from .gl2 import mat_inv
    return mat_inv(x, N)


def _order_mod(x: Mat, G: FinSubgroup, N: int) -> int:
    y = as_tuple(x, N)
    n = 1
    while not G.contains(y):
        y = mat_mul(y, x, N)
        n += 1
        if n > 10 ** 6:
            raise ArithmeticError("order too large")
    return n
