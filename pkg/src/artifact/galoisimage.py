"""Elliptic curves over Q and the assembly of their adelic image groups.

The pipeline: Frobenius data (traces, determinants, quotient labels) ->
the character gamma on Zhat^x -> the group {g : g*G = gamma(det g)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

from .agreeable import AbelianQuotient, CharacterMap, QuotientPresentation, family_member
from .exactarith import (
    Rat, fundamental_discriminant, is_prime, kronecker, prime_divisors, primes_up_to,
    squarefree_part, units, valuation,
)
from .gl2 import (
    GL2, FinSubgroup, OpenSubgroup, full_group, mat_det, mat_mul, sl2_part, whole,
)

AP_BOUND = 10 ** 6


class SingularCurveError(ValueError):
    pass


class BadReductionError(ValueError):
    pass


@dataclass(frozen=True)
class EllCurveQ:
    """Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q."""
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        for k in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, k, Rat(getattr(self, k)))
        if self.disc == 0:
            raise SingularCurveError("discriminant is zero")

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = a1 * a3 + 2 * a4
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> Fraction:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> Fraction:
        b2, b4, b6, _ = self.b_invariants
        return -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def disc(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j(self) -> Fraction:
        return self.c4 ** 3 / self.disc

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.ainvs)

    def __str__(self):
        a1, a2, a3, a4, a6 = (str(a) for a in self.ainvs)
        return f"[{a1},{a2},{a3},{a4},{a6}]"


def curve_invariants(a1, a2, a3, a4, a6) -> tuple:
    """(c4, c6, discriminant, j) of the Weierstrass model."""
    E = EllCurveQ(a1, a2, a3, a4, a6)
    return E.c4, E.c6, E.disc, E.j


def short_model(c4, c6) -> EllCurveQ:
    """y^2 = x^3 - 27 c4 x - 54 c6, a model with the given c4 and c6 up to scaling."""
    return EllCurveQ(0, 0, 0, -27 * Rat(c4), -54 * Rat(c6))


def quadratic_twist(E: EllCurveQ, d: int) -> EllCurveQ:
    return short_model(d * d * E.c4, d ** 3 * E.c6)


def twist_discriminant(E: EllCurveQ, E2: EllCurveQ) -> int:
    """The squarefree d with E2 isomorphic to the twist of E by d."""
    if E.j != E2.j:
        raise ValueError("j-invariants differ")
    if E.j in (0, 1728):
        raise ValueError("j = 0 or 1728 has non-quadratic twists")
    # c4' = d^2 u^4 c4 and c6' = d^3 u^6 c6, so c6' c4 / (c6 c4') = d u^2
    return squarefree_part(E2.c6 * E.c4 / (E.c6 * E2.c4))


def integral_model(E: EllCurveQ) -> EllCurveQ:
    """An isomorphic model with integer coefficients (scaling by u with a_i -> u^i a_i)."""
    if E.is_integral():
        return E
    weights = (1, 2, 3, 4, 6)
    u = 1
    for a, w in zip(E.ainvs, weights):
        for p in prime_divisors(a.denominator):
            k = -(-valuation(a.denominator, p) // w)
            while u % p ** k:
                u *= p
    return EllCurveQ(*(a * u ** w for a, w in zip(E.ainvs, weights)))


def ap_count(E: EllCurveQ, p: int, bound: int = AP_BOUND) -> int:
    """a_p = p + 1 - #E(F_p) by counting points (p of good reduction)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p > bound:
        raise ValueError(f"p = {p} exceeds the counting bound {bound}")
    E = integral_model(E)
    if int(E.disc) % p == 0:
        raise BadReductionError(f"bad reduction at {p} for this model")
    a1, a2, a3, a4, a6 = (int(a) % p for a in E.ainvs)
    count = 1
    if p == 2:
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    count += 1
    else:
        sq = [0] * p
        for y in range(p):
            sq[y * y % p] += 1
        for x in range(p):
            # (2y + a1 x + a3)^2 = disc(x)
            r = ((a1 * x + a3) ** 2 + 4 * (x ** 3 + a2 * x * x + a4 * x + a6)) % p
            count += sq[r]
    ap = p + 1 - count
    if ap * ap > 4 * p:
        raise ArithmeticError("Hasse bound violated")
    return ap


def good_primes(E: EllCurveQ, bound: int, exclude: int = 1) -> list[int]:
    bad = int(integral_model(E).disc)
    return [p for p in primes_up_to(bound) if bad % p and exclude % p]


@dataclass
class FrobeniusSample:
    p: int
    ap: int

    def mod(self, N: int) -> tuple[int, int]:
        return self.ap % N, self.p % N


def frobenius_samples(E: EllCurveQ, primes) -> list[FrobeniusSample]:
    return [FrobeniusSample(p, ap_count(E, p)) for p in primes]


@dataclass
class FilterResult:
    compatible: bool
    excluded_by: int | None = None


def trace_det_filter(G: FinSubgroup, samples) -> FilterResult:
    """Exclude G when a Frobenius (trace, det) pair mod N occurs for no element of G.

    Elements of determinant u form the coset x_u * (G meet SL2); since the
    trace of x_u s is linear in s, each sample costs one vectorised pass.
    """
    import numpy as np
    N = G.N
    if N == 1:
        return FilterResult(True)
    S = np.array(sl2_part(G).elements(), dtype=np.int64)
    reps = _det_reps(G)
    for s in samples:
        if gcd(s.p, N) != 1:
            continue            # Frobenius at p says nothing modulo N
        t, u = s.mod(N)
        x = reps.get(u)
        if x is None:
            return FilterResult(False, s.p)
        tr = (x[0] * S[:, 0] + x[1] * S[:, 2] + x[2] * S[:, 1] + x[3] * S[:, 3]) % N
        if not np.any(tr == t):
            return FilterResult(False, s.p)
    return FilterResult(True)


def _det_reps(G: FinSubgroup) -> dict:
    N = G.N
    reps = {1 % N: (1, 0, 0, 1)}
    frontier = [1 % N]
    while frontier:
        u = frontier.pop()
        for g in G.gens:
            x = mat_mul(reps[u], g, N)
            v = mat_det(x, N)
            if v not in reps:
                reps[v] = x
                frontier.append(v)
    return reps


# ------------------------------------------------------- gamma reconstruction

def _detection_modulus(M: int, e: int) -> int:
    """D with (Z/D)^x / e-th powers equal to Z_M^x / e-th powers."""
    D = 1
    for ell in prime_divisors(M):
        D *= ell ** (valuation(e, ell) + (2 if ell == 2 else 1))
    return D


class _UnitClasses:
    """Z_M^x modulo e-th powers, realised as (Z/D)^x modulo e-th powers."""

    def __init__(self, M: int, e: int):
        self.D = D = _detection_modulus(M, e)
        self.units = units(D) if D > 1 else [0]
        self.powers = sorted({pow(u, e, D) for u in self.units}) if D > 1 else [0]
        self.classes = sorted({self.coset(u) for u in self.units})

    def coset(self, u: int) -> int:
        D = self.D
        return min(u * h % D for h in self.powers) if D > 1 else 0


def _sample_values(Q, samples, values: str, D: int) -> dict:
    if values not in ("alpha", "gamma"):
        raise ValueError("values must be 'alpha' or 'gamma'")
    out = {}
    for p, lab in samples:
        if gcd(p, D) != 1:
            raise ValueError(f"sample prime {p} divides the modulus")
        lab = tuple(lab)
        out[p] = Q.neg(lab) if values == "alpha" else lab
    return out


def _close_table(Q, C: _UnitClasses, gens: dict, table: dict) -> dict:
    """Extend a partial character table on classes through multiplication by gens."""
    D = C.D
    frontier = list(table)
    while frontier:
        c = frontier.pop()
        for g, v in gens.items():
            w = C.coset(c * g % D)
            val = Q.add(table[c], v)
            if w not in table:
                table[w] = val
                frontier.append(w)
            elif table[w] != val:
                raise ValueError("samples are inconsistent with a homomorphism")
    return table


def _table_to_map(Q, C: _UnitClasses, table: dict) -> CharacterMap:
    if C.D == 1:
        return CharacterMap.trivial(Q)
    gamma = CharacterMap.from_function(C.D, Q, lambda u: table[C.coset(u)])
    for u in C.units:
        if gamma(u) != table[C.coset(u)]:
            raise ValueError("samples are inconsistent with a homomorphism")
    return gamma.minimal()


def _sample_table(Q, C: _UnitClasses, vals: dict) -> tuple[dict, dict]:
    gens = {}
    for p, v in vals.items():
        c = C.coset(p % C.D)
        if c in gens and gens[c] != v:
            raise ValueError(f"inconsistent samples on the class of {p}")
        gens[c] = v
    table = _close_table(Q, C, gens, {C.coset(1 % C.D): Q.zero()})
    return gens, table


def reconstruct_gamma(P: QuotientPresentation | AbelianQuotient, samples, M: int, e: int,
                      values: str = "alpha") -> CharacterMap:
    """The character on Zhat^x determined by its values at the sampled primes.

    ``samples`` are (p, label) pairs.  With values="alpha" a label is the
    Frobenius class alpha(Frob_p) and gamma(p) is its inverse; with
    values="gamma" labels are values of gamma itself.  The character is
    assumed to factor through Z_M^x modulo e-th powers, and the sampled
    primes must generate that group.  The result is given at its conductor.
    """
    Q = P.quotient if isinstance(P, QuotientPresentation) else P
    if e % Q.exponent:
        raise ValueError("e must be a multiple of the exponent of the quotient")
    C = _UnitClasses(M, e)
    _, table = _sample_table(Q, C, _sample_values(Q, samples, values, C.D))
    if len(table) != len(C.classes):
        raise ValueError(f"sampled primes generate {len(table)} of {len(C.classes)} classes")
    return _table_to_map(Q, C, table)


def gamma_candidates(P: QuotientPresentation | AbelianQuotient, samples, M: int, e: int,
                     values: str = "alpha", cap: int = 10000) -> list[CharacterMap]:
    """Every character through Z_M^x / e-th powers taking the sampled values."""
    Q = P.quotient if isinstance(P, QuotientPresentation) else P
    if e % Q.exponent:
        raise ValueError("e must be a multiple of the exponent of the quotient")
    C = _UnitClasses(M, e)
    gens, table = _sample_table(Q, C, _sample_values(Q, samples, values, C.D))
    partial = [(gens, table)]
    while len(partial[0][1]) != len(C.classes):
        known = partial[0][1]
        c = next(x for x in C.classes if x not in known)
        # smallest k with c^k in the known subgroup
        k, y = 1, c
        while y not in known:
            y = C.coset(y * c % C.D)
            k += 1
        nxt = []
        for g, tab in partial:
            target = tab[y]
            for v in Q.elements():
                if Q.scale(v, k) != target:
                    continue
                g2 = dict(g)
                g2[c] = tuple(v)
                nxt.append((g2, _close_table(Q, C, g2, dict(tab))))
        partial = nxt
        if len(partial) > cap:
            raise ValueError("too many candidate characters")
        if not partial:
            return []
    return [_table_to_map(Q, C, t) for _, t in partial]


@dataclass
class ImageResult:
    group: OpenSubgroup        # {g in ambient : g*G = gamma(det g)}
    transpose: OpenSubgroup

    @property
    def level(self) -> int:
        return self.group.level

    def index(self) -> int:
        return self.group.index()


def transpose_group(G: OpenSubgroup) -> OpenSubgroup:
    N = G.level
    img = FinSubgroup([(g[0], g[2], g[1], g[3]) for g in G.gens], N)
    return OpenSubgroup(G.ambient, N, img, G.minimal)


def assemble_image(P: QuotientPresentation, gamma: CharacterMap) -> ImageResult:
    """The group {g in ambient : g*G = gamma(det g)} and its transpose, with checks."""
    H = family_member(P, gamma)
    if not H.det_full():
        raise ArithmeticError("assembled group does not have full determinant")
    L = lcm(H.level, P.normal.level)
    if sl2_part(H.at(L)) != sl2_part(P.normal.at(L)):
        raise ArithmeticError("assembled group meets SL2 differently from G")
    return ImageResult(H, transpose_group(H))


# ------------------------------------------------------------ Serre curves

def sign_quotient() -> QuotientPresentation:
    """GL2(Zhat) over its level-2 index-2 subgroup, labelled by the sign mod 2."""
    A = full_group(GL2, 2)
    G = OpenSubgroup(GL2, 2, FinSubgroup([(0, 1, 1, 1)], 2))
    return QuotientPresentation(whole(GL2), G, AbelianQuotient(A, G.image, [(0, 1, 1, 0)], [2]))


def serre_gamma(P: QuotientPresentation, d: int) -> CharacterMap:
    """The quadratic character of Q(sqrt d) as a map to the sign quotient."""
    Q = P.quotient
    if d == 1:
        return CharacterMap.trivial(Q)
    D = abs(fundamental_discriminant(d))
    disc = fundamental_discriminant(d)
    return CharacterMap.from_function(D, Q, lambda u: (0 if kronecker(disc, u) == 1 else 1,))


@dataclass
class SerreData:
    d: int
    group: OpenSubgroup


def serre_curve_data(E: EllCurveQ) -> SerreData:
    """d = squarefree part of the discriminant and the index-2 group it determines."""
    if E.j in (0, 1728):
        raise ValueError("j = 0 or 1728")
    d = squarefree_part(E.disc)
    P = sign_quotient()
    return SerreData(d, family_member(P, serre_gamma(P, d)))


# ------------------------------------------------------------ catalog lookup

@dataclass
class CatalogEntry:
    group: OpenSubgroup
    numerator: object          # sympy expression or Poly in the parameter
    denominator: object = 1
    name: str = ""


@dataclass
class LocateResult:
    group: OpenSubgroup
    entry: CatalogEntry | None
    parameter: Fraction | None = None
    candidates: list = field(default_factory=list)


def rational_preimages(num, den, j) -> list[Fraction]:
    """Rational t with num(t) = j den(t) and den(t) != 0."""
    import sympy
    t = _symbol_of(num, den)
    jj = sympy.Rational(Rat(j).numerator, Rat(j).denominator)
    poly = sympy.Poly(sympy.expand(sympy.sympify(num) - jj * sympy.sympify(den)), t)
    dpoly = sympy.Poly(sympy.sympify(den), t)
    out = []
    if poly.is_zero:
        raise ValueError("j-map is constant")
    for fac, _ in poly.factor_list()[1]:
        if fac.degree() == 1:
            a, b = fac.all_coeffs()
            r = -sympy.Rational(b) / sympy.Rational(a)
            if dpoly.eval(r) != 0:
                out.append(Fraction(int(r.p), int(r.q)))
    return sorted(set(out))


def _symbol_of(num, den):
    import sympy
    syms = sympy.sympify(num).free_symbols | sympy.sympify(den).free_symbols
    if len(syms) != 1:
        raise ValueError("j-map must be a rational function of one variable")
    return next(iter(syms))


def catalog_locate(j, catalog: list[CatalogEntry]) -> LocateResult:
    """The largest-index catalog group whose j-map hits j at a rational parameter."""
    hits = []
    for entry in catalog:
        roots = rational_preimages(entry.numerator, entry.denominator, j)
        if roots:
            hits.append((entry.group.index(), entry, roots[0]))
    if not hits:
        return LocateResult(whole(GL2), None)
    hits.sort(key=lambda h: -h[0])
    _, entry, t = hits[0]
    return LocateResult(entry.group, entry, t, [h[1] for h in hits])
