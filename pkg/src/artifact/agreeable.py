"""Agreeable groups: predicate, closure, maximal agreeable subgroups, abelian quotients.

An open subgroup of GL2(Zhat) is agreeable when it has full determinant,
contains every scalar, and its level has the same odd prime divisors as the
level of its intersection with SL2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, lcm, prod

from .exactarith import (
    crt, fundamental_discriminant, kronecker, prime_divisors, squarefree_part,
    unit_generators, units, valuation,
)
from .gl2 import (
    GL2, IDENT, CertificationError, FinSubgroup, Mat, OpenSubgroup, as_tuple,
    certify_level, commutator, commutator_open, conj, contains_scalars, full_group,
    hom_kernel, label_subgroup, mat_det, mat_inv, mat_mul, mat_pow, mat_reduce,
    normal_closure, perm_mul, phi3, scalar_gens, whole,
)

S3_ID = (0, 1, 2)


def _odd_primes(n: int) -> set[int]:
    return {p for p in prime_divisors(n) if p != 2}


def _radical(n: int) -> int:
    return prod(prime_divisors(n)) if n > 1 else 1


def _part(L: int, N: int) -> int:
    """The largest divisor of L supported on primes dividing N."""
    return prod(p ** valuation(L, p) for p in prime_divisors(L) if N % p == 0)


def _embed(g: Mat, n: int, L: int) -> Mat:
    """Matrix mod L that is g mod n and I mod L/n (n and L/n coprime)."""
    m = L // n
    return tuple(crt([g[i] % n, (1 if i in (0, 3) else 0) % m], [n, m]) % L for i in range(4))


def _ident(N: int) -> Mat:
    return as_tuple(IDENT, N) if N > 1 else (0, 0, 0, 0)


def project(G: OpenSubgroup, n: int) -> OpenSubgroup:
    """The projection of G to the primes dividing n, times GL2 at the other primes."""
    Ln = _part(G.level, n)
    if Ln == 1:
        return whole(G.ambient)
    return OpenSubgroup(G.ambient, Ln, G.image.reduce(Ln))


# ------------------------------------------------------------- predicate

def is_agreeable(G: OpenSubgroup) -> bool:
    if G.ambient != GL2:
        raise ValueError("agreeable groups live in GL2")
    G = certify_level(G)
    if not G.det_full() or not contains_scalars(G):
        return False
    S = certify_level(G.intersect_sl2())
    return _odd_primes(G.level) == _odd_primes(S.level)


def agreeable_closure(G: OpenSubgroup) -> OpenSubgroup:
    """The smallest agreeable group containing G."""
    if not G.det_full():
        raise ValueError("determinant of G is not surjective")
    N = _radical(commutator_open(G).level)
    Ln = _part(G.level, N)
    if Ln == 1:
        return whole(GL2)
    img = FinSubgroup(G.image.reduce(Ln).gens + scalar_gens(Ln), Ln)
    return certify_level(OpenSubgroup(GL2, Ln, img))


# ------------------------------------------------- finite abelian quotients

class AbelianQuotient:
    """The abelian group A/D for finite groups D <= A mod the same N.

    Elements are exponent vectors on ``reps`` (orders ``orders``).  When reps
    are not given, an invariant-factor basis is computed.  Labelling sifts
    through the chain D = D_0 < D_1 < ... < A obtained by adding one
    generator at a time.
    """

    def __init__(self, A: FinSubgroup, D: FinSubgroup, reps=None, orders=None):
        if A.N != D.N:
            raise ValueError("modulus mismatch")
        self.A, self.D, self.N = A, D, A.N
        N = self.N
        for h in D.gens:
            if not A.contains(h):
                raise ValueError("subgroup is not contained in the ambient group")
            for g in A.gens:
                if not D.contains(conj(h, g, N)):
                    raise ValueError("subgroup is not normal")
        for x, y in itertools.combinations(A.gens, 2):
            if not D.contains(commutator(x, y, N)):
                raise ValueError("quotient is not abelian")
        index = A.order() // D.order()
        if reps is None:
            self._build_chain(A.gens)
            self._invariant_basis(index)
        else:
            reps = [as_tuple(r, N) for r in reps]
            orders = [int(o) for o in orders]
            if len(reps) != len(orders):
                raise ValueError("need one order per representative")
            for r, o in zip(reps, orders):
                if not A.contains(r):
                    raise ValueError("representative outside the ambient group")
                if not D.contains(mat_pow(r, o, N)):
                    raise ValueError(f"representative order relation fails for {r}")
            if prod(orders) != index:
                raise ValueError("product of orders differs from the index")
            self._build_chain(reps, keep_all=True)
            if [m for _, m, _ in self._chain] != orders:
                raise ValueError("representatives do not give a direct product basis")
            self.reps, self.orders = reps, orders
            self._transform = [[int(i == j) for j in range(len(reps))] for i in range(len(reps))]
            for g in A.gens:
                self._pc_label(g)

    # chain D_0 < D_1 < ... with D_i = <D_{i-1}, g_i>
    def _build_chain(self, gens, keep_all: bool = False) -> None:
        N = self.N
        chain = []
        cur = self.D
        for g in gens:
            nxt = FinSubgroup(cur.gens + [g], N)
            m = nxt.order() // cur.order()
            if m > 1 or keep_all:
                invs = [_ident(N)]
                gi = mat_inv(g, N)
                for _ in range(m - 1):
                    invs.append(mat_mul(invs[-1], gi, N))
                chain.append((g, m, cur, invs))
                cur = nxt
        if cur.order() != self.A.order():
            raise ValueError("representatives do not generate the quotient")
        self._chain = [(g, m, sub) for g, m, sub, _ in chain]
        self._invs = [invs for *_, invs in chain]

    def _pc_label(self, x) -> list[int]:
        N = self.N
        x = as_tuple(x, N)
        out = [0] * len(self._chain)
        for i in range(len(self._chain) - 1, -1, -1):
            _, m, sub = self._chain[i]
            for k in range(m):
                y = mat_mul(x, self._invs[i][k], N)
                if sub.contains(y):
                    out[i], x = k, y
                    break
            else:
                raise ValueError("element does not lie in the ambient group")
        if not self.D.contains(x):
            raise ValueError("element does not lie in the ambient group")
        return out

    def _invariant_basis(self, index: int) -> None:
        from sympy import Matrix, ZZ
        from sympy.matrices.normalforms import smith_normal_decomp
        N = self.N
        s = len(self._chain)
        if s == 0:
            self.reps, self.orders, self._transform = [], [], []
            return
        rels = []
        for i, (g, m, _) in enumerate(self._chain):
            c = self._pc_label(mat_pow(g, m, N))
            row = [-c[j] for j in range(s)]
            row[i] += m
            rels.append(row)
        S, U, V = smith_normal_decomp(Matrix(rels), domain=ZZ)
        Vinv = V.inv()
        reps, orders, cols = [], [], []
        for j in range(s):
            d = abs(int(S[j, j]))
            if d == 1:
                continue
            x = _ident(N)
            for k, (g, _, _) in enumerate(self._chain):
                c = int(Vinv[j, k]) % index
                if c:
                    x = mat_mul(x, mat_pow(g, c, N), N)
            reps.append(x)
            orders.append(d)
            cols.append(j)
        if prod(orders) != index:
            raise ArithmeticError("invariant factors do not match the index")
        self.reps, self.orders = reps, orders
        self._transform = [[int(V[i, j]) for j in cols] for i in range(s)]

    @property
    def order(self) -> int:
        return prod(self.orders)

    @property
    def exponent(self) -> int:
        return lcm(*self.orders) if self.orders else 1

    def label(self, x) -> tuple:
        pc = self._pc_label(x)
        T = self._transform
        return tuple(sum(pc[i] * T[i][j] for i in range(len(pc))) % o
                     for j, o in enumerate(self.orders))

    def element(self, e) -> Mat:
        N = self.N
        x = _ident(N)
        for r, k, o in zip(self.reps, e, self.orders):
            x = mat_mul(x, mat_pow(r, k % o, N), N)
        return x

    def add(self, a, b) -> tuple:
        return tuple((x + y) % o for x, y, o in zip(a, b, self.orders))

    def neg(self, a) -> tuple:
        return tuple((-x) % o for x, o in zip(a, self.orders))

    def scale(self, a, k: int) -> tuple:
        return tuple((k * x) % o for x, o in zip(a, self.orders))

    def zero(self) -> tuple:
        return tuple(0 for _ in self.orders)

    def elements(self):
        return itertools.product(*[range(o) for o in self.orders])


@dataclass
class QuotientPresentation:
    """An open group G normal in an open group (the ambient) with abelian quotient."""
    ambient: OpenSubgroup
    normal: OpenSubgroup
    quotient: AbelianQuotient

    @property
    def level(self) -> int:
        return self.quotient.N

    @property
    def order(self) -> int:
        return self.quotient.order

    def label(self, g, M: int | None = None) -> tuple:
        """Quotient label of an ambient element given modulo M (a multiple of the level)."""
        M = self.level if M is None else M
        if M % self.level:
            raise ValueError("modulus must be a multiple of the level")
        return self.quotient.label(mat_reduce(as_tuple(g, M), self.level))


def quotient_presentation(ambient: OpenSubgroup, normal: OpenSubgroup,
                          reps=None, orders=None) -> QuotientPresentation:
    """Presentation of ambient/normal, from given coset generators or computed.

    Given representatives are read modulo lcm of the two levels.
    """
    L = lcm(ambient.level, normal.level)
    A, D = ambient.at(L), normal.at(L)
    return QuotientPresentation(ambient, normal, AbelianQuotient(A, D, reps, orders))


# ------------------------------------------------------- character maps

class CharacterMap:
    """A homomorphism (Z/D)^x -> abelian quotient, given by images of generators."""

    def __init__(self, D: int, Q: AbelianQuotient, images: dict):
        self.D, self.Q = D, Q
        self.images = {u % D: tuple(v) for u, v in images.items()}
        for u in self.images:
            if gcd(u, D) != 1:
                raise ValueError(f"{u} is not a unit mod {D}")
        table = {1 % D: Q.zero()}
        frontier = [1 % D]
        while frontier:
            u = frontier.pop()
            for g, v in self.images.items():
                w = u * g % D
                val = Q.add(table[u], v)
                if w not in table:
                    table[w] = val
                    frontier.append(w)
                elif table[w] != val:
                    raise ValueError(f"relation of (Z/{D})^x violated at {w}")
        if len(table) != len(units(D)) and D > 1:
            raise ValueError("the given units do not generate (Z/D)^x")
        self.table = table

    @classmethod
    def trivial(cls, Q: AbelianQuotient) -> "CharacterMap":
        return cls(1, Q, {})

    @classmethod
    def from_function(cls, D: int, Q: AbelianQuotient, f) -> "CharacterMap":
        return cls(D, Q, {u: tuple(f(u)) for u in unit_generators(D)} if D > 1 else {})

    def __call__(self, u: int) -> tuple:
        return self.table[u % self.D]

    def is_trivial(self) -> bool:
        z = self.Q.zero()
        return all(v == z for v in self.table.values())

    def restrict(self, D: int) -> "CharacterMap":
        """The same character viewed modulo a divisor D it factors through."""
        if self.D % D:
            raise ValueError("D must divide the modulus")
        imgs = {}
        for g in (unit_generators(D) if D > 1 else []):
            u = next(x for x in self.table if x % D == g)
            imgs[g] = self(u)
        out = CharacterMap(D, self.Q, imgs)
        for u, v in self.table.items():
            if out(u) != v:
                raise ValueError(f"character does not factor through modulus {D}")
        return out

    def conductor(self) -> int:
        D = self.D
        z = self.Q.zero()
        for p in prime_divisors(self.D):
            while D % p == 0:
                d = D // p
                if all(v == z for u, v in self.table.items() if (u - 1) % d == 0):
                    D = d
                else:
                    break
        return D

    def minimal(self) -> "CharacterMap":
        c = self.conductor()
        return self if c == self.D else self.restrict(c)

    def __repr__(self):
        return f"CharacterMap(D={self.D}, images={self.images})"


def family_member(P: QuotientPresentation, gamma: CharacterMap) -> OpenSubgroup:
    """{g in ambient : g*normal = gamma(det g)}, with certified level."""
    if gamma.Q is not P.quotient:
        raise ValueError("character target differs from the quotient")
    Q = P.quotient
    L = lcm(P.level, gamma.D)
    A = P.ambient.at(L)
    imgs = [Q.add(P.label(g, L), Q.neg(gamma(mat_det(g, L)))) for g in A.gens]
    res = hom_kernel(A, imgs, Q.add, Q.zero())
    if res is None:
        raise CertificationError("quotient labelling is not a homomorphism")
    return certify_level(OpenSubgroup(GL2, L, res[0]))


def twist_image(G: OpenSubgroup, d: int) -> OpenSubgroup:
    """Image group after a quadratic twist by d: {psi(det g) g : g in G}."""
    if d == 0 or squarefree_part(d) != d:
        raise ValueError("d must be a nonzero squarefree integer")
    if d == 1:
        return G
    disc = fundamental_discriminant(d)
    L = lcm(G.level, abs(disc))
    gens = []
    for g in G.at(L).gens:
        gens.append(g if kronecker(disc, mat_det(g, L)) == 1 else tuple((-x) % L for x in g))
    return certify_level(OpenSubgroup(GL2, L, FinSubgroup(gens, L)))


# ----------------------------------------------- maximal agreeable subgroups

@dataclass
class SearchLimits:
    """Caps on the maximal agreeable search; exceeding one raises SearchBoundExceeded."""
    max_quotient: int = 5000
    max_candidates: int = 50000
    max_overgroups: int = 500


class SearchBoundExceeded(RuntimeError):
    pass


def _coset_reps(A: FinSubgroup, G: FinSubgroup) -> list[Mat]:
    """Representatives of the right cosets G x in A."""
    N = A.N
    reps, invs = [_ident(N)], [_ident(N)]
    target = A.order() // G.order()
    i = 0
    while len(reps) < target:
        for g in A.gens:
            x = mat_mul(reps[i], g, N)
            if not any(G.contains(mat_mul(x, r, N)) for r in invs):
                reps.append(x)
                invs.append(mat_inv(x, N))
        i += 1
    return reps


def intermediate_groups(G: FinSubgroup, A: FinSubgroup, limits: SearchLimits | None = None):
    """All groups W with G < W < A (strict inclusions), mod the same N."""
    limits = limits or SearchLimits()
    N = A.N
    idx = A.order() // G.order()
    if idx == 1 or idx in prime_divisors(idx):
        return []
    reps = _coset_reps(A, G)[1:]
    found: list[FinSubgroup] = []
    queue = [G]
    while queue:
        W = queue.pop()
        for x in reps:
            if W.contains(x):
                continue
            V = FinSubgroup(W.gens + [x], N)
            o = V.order()
            if o == A.order() or any(o == U.order() and V == U for U in found):
                continue
            found.append(V)
            queue.append(V)
            if len(found) > limits.max_overgroups:
                raise SearchBoundExceeded("too many intermediate groups")
    return found


def is_maximal_agreeable(G: OpenSubgroup, amb: OpenSubgroup,
                         limits: SearchLimits | None = None) -> bool:
    """No agreeable group lies strictly between G and amb."""
    L = lcm(G.level, amb.level)
    for W in intermediate_groups(G.at(L), amb.at(L), limits):
        if is_agreeable(OpenSubgroup(GL2, L, W)):
            return False
    return True


def _same_projections(H: OpenSubgroup, Gc: OpenSubgroup) -> bool:
    L = lcm(H.level, Gc.level)
    for p in prime_divisors(L):
        q = p ** valuation(L, p)
        if H.at(q).order() != Gc.at(q).order():
            return False
    return True


def _p_quotient(A: FinSubgroup, p: int, limits: SearchLimits) -> AbelianQuotient:
    """A / (commutators and p-th powers), an elementary abelian p-group."""
    N = A.N
    seeds = [commutator(x, y, N) for x, y in itertools.combinations(A.gens, 2)]
    seeds += [mat_pow(x, p, N) for x in A.gens]
    D = normal_closure(seeds, A.gens, N)
    if A.order() // D.order() > limits.max_quotient:
        raise SearchBoundExceeded("abelian quotient too large")
    return AbelianQuotient(A, D)


def _functionals(Q: AbelianQuotient, p: int):
    """Nonzero functionals Q -> Z/p up to scalars (one per kernel)."""
    for v in itertools.product(range(p), repeat=len(Q.orders)):
        if any(v) and next(a for a in v if a) == 1:
            yield v


def _evaluate(Q: AbelianQuotient, v, x, p: int) -> int:
    return sum(a * b for a, b in zip(Q.label(x), v)) % p


def _order2_characters(A: FinSubgroup, limits: SearchLimits):
    """Surjective characters A -> Z/2, as functions on matrices."""
    if A.N == 1:
        return []
    Q = _p_quotient(A, 2, limits)
    return [lambda x, v=v: _evaluate(Q, v, x, 2) for v in _functionals(Q, 2)]


def _lines_perm(x: Mat) -> tuple:
    """Permutation of the nonzero vectors of F_2^2 under v -> v x."""
    vecs = [(1, 0), (0, 1), (1, 1)]
    a, b, c, d = (v % 2 for v in x)
    return tuple(vecs.index(((v[0] * a + v[1] * c) % 2, (v[0] * b + v[1] * d) % 2)) for v in vecs)


def _sign_mod2(x: Mat) -> int:
    p = _lines_perm(x)
    return sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j]) % 2


def _two_adic_characters():
    """The seven order-2 characters of GL2(Z_2) trivial on scalars (level dividing 8)."""
    dets = [lambda u: 0, lambda u: int(u % 4 == 3), lambda u: int(u % 8 in (3, 5)),
            lambda u: int(u % 8 in (5, 7))]
    out = []
    for s in (0, 1):
        for k, chi in enumerate(dets):
            if s or k:
                out.append(lambda x, s=s, chi=chi:
                           ((_sign_mod2(x) if s else 0) + chi(mat_det(x, 8))) % 2)
    return out


def _s3_inverse(p) -> tuple:
    out = [0, 0, 0]
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def _s3_autos():
    """The six automorphisms of S3 (all inner)."""
    out = []
    for c in itertools.permutations(range(3)):
        ci = _s3_inverse(c)
        out.append(lambda p, c=c, ci=ci: perm_mul(perm_mul(ci, p), c))
    return out


def _s3_surjections(A: FinSubgroup, limits: SearchLimits):
    """All surjective homomorphisms A -> S3 (perm_mul convention)."""
    N = A.N
    if N == 1:
        return []
    Q2 = _p_quotient(A, 2, limits)
    r3, s3 = (1, 2, 0), (1, 0, 2)
    out = []
    for v2 in _functionals(Q2, 2):
        def sign(x, v2=v2):
            return _evaluate(Q2, v2, x, 2)
        K2 = label_subgroup(A, sign, lambda lab: lab == 0)
        t = next(g for g in A.gens if sign(g))
        tinv = mat_inv(t, N)
        Q3 = _p_quotient(K2, 3, limits)
        for v3 in _functionals(Q3, 3):
            def lam(x, v3=v3, Q3=Q3):
                return _evaluate(Q3, v3, x, 3)
            # ker(lam) must be normal in A with t acting by inversion
            if not all(lam(conj(h, g, N)) == (lam(h) * (-1 if sign(g) else 1)) % 3
                       for g in A.gens for h in Q3.reps):
                continue

            def psi(x, sign=sign, lam=lam, tinv=tinv):
                e = sign(x)
                p = S3_ID
                for _ in range(lam(mat_mul(x, tinv, N) if e else x)):
                    p = perm_mul(p, r3)
                return perm_mul(p, s3) if e else p

            if hom_kernel(A, [psi(g) for g in A.gens], perm_mul, S3_ID) is None:
                raise ArithmeticError("failed to build an S3 quotient map")
            for auto in _s3_autos():
                out.append(lambda x, psi=psi, auto=auto: auto(psi(x)))
    return out


def _fiber_product(A1: FinSubgroup, f1, A2: FinSubgroup, f2) -> FinSubgroup:
    """{(a, b) in A1 x A2 : f1(a) = f2(b)} for coprime moduli."""
    n1, n2 = A1.N, A2.N
    L = n1 * n2
    gens = [_embed(a, n1, L) for a in A1.gens] + [_embed(b, n2, L) for b in A2.gens]
    P = FinSubgroup(gens, L)
    return label_subgroup(P, lambda x: (f1(mat_reduce(x, n1)), f2(mat_reduce(x, n2))),
                          lambda lab: lab[0] == lab[1])


def _double_prime_candidates(Gc: OpenSubgroup, limits: SearchLimits):
    out = []
    for beta in _order2_characters(Gc.image, limits):
        for alpha in _two_adic_characters():
            H = _fiber_product(full_group(GL2, 8), alpha, Gc.image, beta)
            out.append(OpenSubgroup(GL2, H.N, H))
    return out


def _triple_prime_candidates(Gc: OpenSubgroup, limits: SearchLimits):
    out = []
    for psi in _s3_surjections(Gc.image, limits):
        H = _fiber_product(full_group(GL2, 3), phi3, Gc.image, psi)
        out.append(OpenSubgroup(GL2, H.N, H))
    return out


def _six_candidates(Gc: OpenSubgroup):
    out = []
    L = 6 * Gc.level
    for auto in _s3_autos():
        H6 = _fiber_product(full_group(GL2, 2), lambda x, a=auto: a(_lines_perm(x)),
                            full_group(GL2, 3), phi3)
        gens = [_embed(g, 6, L) for g in H6.gens] + [_embed(g, Gc.level, L) for g in Gc.gens]
        out.append(OpenSubgroup(GL2, L, FinSubgroup(gens, L)))
    return out


def _same_prime_candidates(Gc: OpenSubgroup, limits: SearchLimits):
    N = _radical(Gc.level)
    primes = prime_divisors(N)
    out = []
    for r in range(1, len(primes)):
        for sub in itertools.combinations(primes, r):
            d1 = prod(sub)
            if d1 * d1 <= N:
                out += _split_candidates(Gc, d1, N // d1, limits)
    return out


def _split_level(Gc: OpenSubgroup, d1: int, d2: int) -> int:
    """A multiple of the level at which each group scalars*[B_i, B_i] is visible."""
    L = Gc.level
    A = Gc.image
    out = L
    for d, e in ((d1, d2), (d2, d1)):
        Ld, Le = _part(L, d), _part(L, e)
        B = FinSubgroup([mat_reduce(g, Ld) for g in A.reduction_kernel(Le).gens], Ld)
        c = _part(commutator_open(OpenSubgroup(GL2, Ld, B)).level, d)
        if c % 2 == 0:
            c *= 2
        out = lcm(out, c)
    return out


def _split_candidates(Gc: OpenSubgroup, d1: int, d2: int, limits: SearchLimits):
    L = _split_level(Gc, d1, d2)
    A = Gc.at(L)
    L1, L2 = _part(L, d1), _part(L, d2)
    G1, G2 = A.reduce(L1), A.reduce(L2)
    B1 = FinSubgroup([mat_reduce(g, L1) for g in A.reduction_kernel(L2).gens], L1)
    B2 = FinSubgroup([mat_reduce(g, L2) for g in A.reduction_kernel(L1).gens], L2)
    out = []
    C1s = _maximal_normal_below(G1, B1, limits)
    if not C1s:
        return out
    C2s = _maximal_normal_below(G2, B2, limits)
    for C1 in C1s:
        for C2 in C2s:
            a1, a2 = B1.order() // C1.order(), B2.order() // C2.order()
            if a1 != a2 or G1.order() // C1.order() != G2.order() // C2.order():
                continue
            out += _graphs(A, L1, L2, B1, C1, C2, a1, limits)
    return out


def _maximal_normal_below(G: FinSubgroup, B: FinSubgroup, limits: SearchLimits):
    """Maximal G-normal subgroups C < B that contain the scalars and [B, B]."""
    N = G.N
    scal = scalar_gens(N)
    if not all(B.contains(s) for s in scal):
        return []
    seeds = [commutator(x, y, N) for x, y in itertools.combinations(B.gens, 2)] + scal
    K = normal_closure(seeds, G.gens, N)
    if K.order() == B.order():
        return []
    if B.order() // K.order() > limits.max_quotient:
        raise SearchBoundExceeded("quotient B/K too large")
    Q = AbelianQuotient(B, K)
    out = []
    for p in sorted({q for o in Q.orders for q in prime_divisors(o)}):
        idx = [i for i, o in enumerate(Q.orders) if o % p == 0]
        r = len(idx)
        # conjugation on Q/pQ: row i holds the image of basis vector i
        mats = []
        for g in G.gens:
            mats.append([[Q.label(conj(Q.reps[i], g, N))[j] % p for j in idx] for i in idx])
        if (p ** r - 1) // (p - 1) > limits.max_candidates:
            raise SearchBoundExceeded("too many functionals to scan")
        subs = set()
        for f in itertools.product(range(p), repeat=r):
            if any(f) and next(a for a in f if a) == 1:
                subs.add(_submodule(f, mats, p))
        # kernels of minimal invariant sets of functionals are maximal invariant subgroups
        for W in subs:
            if any(V < W for V in subs):
                continue
            basis = _basis(W, p)

            def lab(x, basis=basis, idx=idx):
                e = Q.label(x)
                return tuple(sum(b[k] * e[i] for k, i in enumerate(idx)) % p for b in basis)
            out.append(label_subgroup(B, lab, lambda v: not any(v)))
    return out


def _span_add(span: set, v, p: int) -> set:
    return {tuple((a + k * b) % p for a, b in zip(w, v)) for w in span for k in range(p)}


def _submodule(f, mats, p) -> frozenset:
    """Span of the orbit of the functional f under the transposed action."""
    r = len(f)
    span = {tuple([0] * r)}
    todo = [tuple(f)]
    while todo:
        v = todo.pop()
        if v in span:
            continue
        span = _span_add(span, v, p)
        for M in mats:
            w = tuple(sum(M[i][j] * v[j] for j in range(r)) % p for i in range(r))
            if w not in span:
                todo.append(w)
    return frozenset(span)


def _basis(span: frozenset, p: int) -> list[tuple]:
    basis: list[tuple] = []
    cur = {tuple([0] * len(next(iter(span))))}
    for v in sorted(span):
        if v not in cur:
            basis.append(v)
            cur = _span_add(cur, v, p)
    return basis


def _graphs(A: FinSubgroup, L1: int, L2: int, B1: FinSubgroup, C1: FinSubgroup,
            C2: FinSubgroup, size: int, limits: SearchLimits) -> list[OpenSubgroup]:
    """Subgroups of A containing C1 x C2, of index ``size``, projecting onto both factors."""
    L = A.N
    base = [_embed(c, L1, L) for c in C1.gens] + [_embed(c, L2, L) for c in C2.gens]
    gens: list[Mat] = []
    cur = FinSubgroup(base, L)
    for g in A.gens:
        if not cur.contains(g):
            gens.append(g)
            cur = FinSubgroup(cur.gens + [g], L)
    twists = _coset_reps(FinSubgroup([_embed(b, L1, L) for b in B1.gens], L),
                         FinSubgroup([_embed(c, L1, L) for c in C1.gens], L))
    if len(twists) ** len(gens) > limits.max_candidates:
        raise SearchBoundExceeded("too many graph candidates")
    target = A.order() // size
    n1, n2 = A.reduce(L1).order(), A.reduce(L2).order()
    found: list[FinSubgroup] = []
    for choice in itertools.product(twists, repeat=len(gens)):
        H = FinSubgroup(base + [mat_mul(g, c, L) for g, c in zip(gens, choice)], L)
        if H.order() != target or any(H == K for K in found):
            continue
        if H.reduce(L1).order() != n1 or H.reduce(L2).order() != n2:
            continue
        found.append(H)
    return [OpenSubgroup(GL2, L, H) for H in found]


def maximal_agreeable(Gc: OpenSubgroup, limits: SearchLimits | None = None) -> list[OpenSubgroup]:
    """Maximal proper agreeable subgroups with the same l-adic projections as Gc.

    Raises SearchBoundExceeded when a cap in ``limits`` is hit; results are
    never silently truncated.
    """
    limits = limits or SearchLimits()
    Gc = certify_level(Gc)
    if not is_agreeable(Gc):
        raise ValueError("input group is not agreeable")
    N = _radical(Gc.level)
    cands = _same_prime_candidates(Gc, limits)
    if N % 2:
        cands += _double_prime_candidates(Gc, limits)
    if N % 3:
        cands += _triple_prime_candidates(Gc, limits)
        if N % 2:
            cands += _six_candidates(Gc)
    out: list[OpenSubgroup] = []
    for H in cands:
        H = certify_level(H)
        if any(H == K for K in out):
            continue
        if H == Gc or not is_agreeable(H) or not _same_projections(H, Gc):
            continue
        if is_maximal_agreeable(H, Gc, limits):
            out.append(H)
    out.sort(key=lambda H: (H.index(), H.level, sorted(H.gens)))
    return out
