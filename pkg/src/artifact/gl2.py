"""Finite subgroups of GL2(Z/NZ) and open subgroups of GL2/SL2 over the profinite integers.

Matrices are handled internally as 4-tuples ``(a, b, c, d)`` of residues in
``[0, N)``.  Public functions also accept :class:`ZModMat` instances and nested
lists.  Groups act on row vectors, ``(x, y) * g = (xa + yc, xb + yd)``, which is
what the stabilizer chain uses for its base points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, lcm, prod
from typing import Callable, Hashable, Iterable, Sequence

from .exactarith import (
    ZModMat, crt, factor_int, inv_mod, prime_divisors, unit_generators, valuation,
)

Mat = tuple  # (a, b, c, d)
IDENT = (1, 0, 0, 1)
GL2, SL2 = "GL2", "SL2"


class CertificationError(ValueError):
    """A level criterion did not hold at the supplied modulus."""


# ---------------------------------------------------------------- matrices

def as_tuple(g, N: int) -> Mat:
    if isinstance(g, ZModMat):
        g = g.entries
    elif len(g) == 2:
        (a, b), (c, d) = g
        g = (a, b, c, d)
    a, b, c, d = g
    return (a % N, b % N, c % N, d % N)


def mat_mul(x: Mat, y: Mat, N: int) -> Mat:
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % N, (a * f + b * h) % N,
            (c * e + d * g) % N, (c * f + d * h) % N)


def mat_det(x: Mat, N: int) -> int:
    return (x[0] * x[3] - x[1] * x[2]) % N


def mat_inv(x: Mat, N: int) -> Mat:
    if N == 1:
        return (0, 0, 0, 0)
    a, b, c, d = x
    di = inv_mod((a * d - b * c) % N, N)
    return ((d * di) % N, (-b * di) % N, (-c * di) % N, (a * di) % N)


def mat_pow(x: Mat, e: int, N: int) -> Mat:
    if e < 0:
        x, e = mat_inv(x, N), -e
    r = IDENT if N > 1 else (0, 0, 0, 0)
    while e:
        if e & 1:
            r = mat_mul(r, x, N)
        x = mat_mul(x, x, N)
        e >>= 1
    return r


def mat_reduce(x: Mat, M: int) -> Mat:
    return (x[0] % M, x[1] % M, x[2] % M, x[3] % M)


def conj(x: Mat, g: Mat, N: int) -> Mat:
    """g^-1 x g"""
    return mat_mul(mat_mul(mat_inv(g, N), x, N), g, N)


def commutator(x: Mat, y: Mat, N: int) -> Mat:
    """x^-1 y^-1 x y"""
    return mat_mul(mat_mul(mat_inv(x, N), mat_inv(y, N), N), mat_mul(x, y, N), N)


def is_invertible(x: Mat, N: int) -> bool:
    return gcd(mat_det(x, N), N) == 1


def gl2_order(N: int) -> int:
    r = 1
    for p, e in factor_int(N).items():
        r *= p ** (4 * (e - 1)) * (p * p - 1) * (p * p - p)
    return r


def sl2_order(N: int) -> int:
    r = 1
    for p, e in factor_int(N).items():
        r *= p ** (3 * (e - 1)) * p * (p * p - 1)
    return r


def ambient_order(ambient: str, N: int) -> int:
    return gl2_order(N) if ambient == GL2 else sl2_order(N)


def lift_sl2z(g, N: int) -> Mat:
    """An integer matrix of determinant 1 congruent to g modulo N."""
    a, b, c, d = as_tuple(g, N)
    if N == 1:
        return IDENT
    if mat_det((a, b, c, d), N) != 1 % N:
        raise ValueError("matrix is not in SL2")
    c1 = c if c else N
    d1 = d
    while gcd(c1, d1) != 1:
        d1 += N
    # a0*d1 - b0*c1 = 1
    g0, x, y = _egcd(d1, c1)
    a0, b0 = x, -y
    s, t = _egcd(c1, d1)[1:]
    k = s * (a - a0) + t * (b - b0)
    return (a0 + k * c1, b0 + k * d1, c1, d1)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _embed_prime_power(x: Mat, q: int, N: int) -> Mat:
    """Matrix that is x modulo the prime power q and the identity modulo N/q."""
    r = N // q
    if r == 1:
        return mat_reduce(x, N)
    return tuple(crt([x[i] % q, IDENT[i]], [q, r]) for i in range(4))


def lift_matrix(g: Mat, N: int, M: int, ambient: str = GL2) -> Mat:
    """Lift g mod N to M (N | M), trivially at primes of M not dividing N."""
    if M % N:
        raise ValueError("N must divide M")
    g = as_tuple(g, N)
    npart = prod(p ** valuation(M, p) for p in prime_divisors(N))
    if ambient == SL2:
        x = mat_reduce(lift_sl2z(g, N), npart)
    else:
        x = mat_reduce(g, npart)
    return _embed_prime_power(x, npart, M) if npart != M else x


def _layer_gens(ell: int, i: int, f: int, ambient: str) -> list[Mat]:
    q = ell ** f
    t = ell ** i
    if ambient == GL2:
        return [(1, t, 0, 1), (1, 0, t, 1), ((1 + t) % q, 0, 0, 1), (1, 0, 0, (1 + t) % q)]
    u = (1 + t) % q
    return [(1, t % q, 0, 1), (1, 0, t % q, 1), (u, 0, 0, inv_mod(u, q))]


def full_gens(ambient: str, q: int) -> list[Mat]:
    """Generators of GL2 or SL2 modulo q."""
    if q == 1:
        return []
    gens = [(1, 1 % q, 0, 1), (1, 0, 1 % q, 1)]
    if ambient == GL2:
        gens += [(u, 0, 0, 1) for u in unit_generators(q)]
    return gens


def kernel_gens(N: int, M: int, ambient: str = GL2) -> list[Mat]:
    """Generators of the kernel of reduction from level M to level N (N | M)."""
    out = []
    for ell, f in factor_int(M).items():
        e = valuation(N, ell)
        if e == f:
            continue
        q = ell ** f
        if e == 0:
            local = full_gens(ambient, q)
        else:
            local = [x for i in range(e, f) for x in _layer_gens(ell, i, f, ambient)]
        out.extend(_embed_prime_power(x, q, M) for x in local)
    return out


# ------------------------------------------------------- stabilizer chain

class _Level:
    __slots__ = ("m", "row", "gens", "orbit", "trans", "tinv", "done")

    def __init__(self, m: int, row: int):
        self.m = m
        self.row = row
        self.gens: list[Mat] = []
        self.orbit: list[int] = []
        self.trans: dict[int, Mat] = {}
        self.tinv: dict[int, Mat] = {}
        self.done: list[int] = []

    def image(self, g: Mat) -> int:
        m = self.m
        if self.row == 0:
            return (g[0] % m) * m + g[1] % m
        return (g[2] % m) * m + g[3] % m

    def act(self, p: int, g: Mat) -> int:
        m = self.m
        x, y = divmod(p, m)
        return ((x * g[0] + y * g[2]) % m) * m + (x * g[1] + y * g[3]) % m


class StabChain:
    """Deterministic Schreier-Sims chain.

    The base runs through the vectors e1, e2 modulo ell, ell^2, ... for each
    prime power ell^e exactly dividing N, so the pointwise stabilizer after the
    levels of a divisor d is the kernel of reduction modulo d.
    """

    def __init__(self, N: int, prime_order: Sequence[int] | None = None, split: int = 1):
        self.N = N
        fac = factor_int(N)
        ps = list(prime_order) if prime_order is not None else sorted(fac)
        first, rest = [], []
        for p in ps:
            e = fac[p]
            s = valuation(split, p)
            for j in range(1, e + 1):
                tgt = first if j <= s else rest
                tgt.append(_Level(p ** j, 0))
                tgt.append(_Level(p ** j, 1))
        self.levels = first + rest
        self.split_depth = len(first)
        for lev in self.levels:
            lev.orbit.append(lev.image(IDENT))
            lev.trans[lev.orbit[0]] = IDENT
            lev.tinv[lev.orbit[0]] = IDENT

    def sift(self, g: Mat, start: int = 0) -> tuple[Mat, int]:
        N = self.N
        levels = self.levels
        for i in range(start, len(levels)):
            lev = levels[i]
            t = lev.tinv.get(lev.image(g))
            if t is None:
                return g, i
            g = mat_mul(g, t, N)
        return g, len(levels)

    def contains(self, g: Mat) -> bool:
        return self.sift(g)[1] == len(self.levels)

    def _extend(self, h: Mat, lo: int, hi: int) -> None:
        for lev in self.levels[lo:hi + 1]:
            lev.gens.append(h)
            lev.done.append(0)

    def add(self, g: Mat) -> bool:
        h, j = self.sift(g)
        if j == len(self.levels):
            return False
        self._extend(h, 0, j)
        self._complete(j)
        return True

    def _complete(self, i: int) -> None:
        L = len(self.levels)
        while i >= 0:
            j = self._close_level(i)
            i = j if j < L else i - 1

    def _close_level(self, i: int) -> int:
        """Close the orbit at level i and sift its Schreier generators.

        Returns the depth of the deepest level that received a new strong
        generator, or the chain length when level i is complete.
        """
        N = self.N
        L = len(self.levels)
        lev = self.levels[i]
        while True:
            pending = [gi for gi, k in enumerate(lev.done) if k < len(lev.orbit)]
            if not pending:
                return L
            for gi in pending:
                s = lev.gens[gi]
                while lev.done[gi] < len(lev.orbit):
                    p = lev.orbit[lev.done[gi]]
                    lev.done[gi] += 1
                    q = lev.act(p, s)
                    us = mat_mul(lev.trans[p], s, N)
                    if q not in lev.trans:
                        lev.orbit.append(q)
                        lev.trans[q] = us
                        lev.tinv[q] = mat_inv(us, N)
                        continue
                    h = mat_mul(us, lev.tinv[q], N)
                    if h == IDENT:
                        continue
                    r, j = self.sift(h, i + 1)
                    if j < L:
                        self._extend(r, i + 1, j)
                        return j

    def order(self) -> int:
        return prod(len(lev.orbit) for lev in self.levels)

    def strong_gens(self) -> list[Mat]:
        seen, out = set(), []
        for lev in self.levels:
            for g in lev.gens:
                if g not in seen:
                    seen.add(g)
                    out.append(g)
        return out

    def elements(self) -> Iterable[Mat]:
        N = self.N
        reps = [list(lev.trans.values()) for lev in reversed(self.levels)]
        for combo in itertools.product(*reps):
            g = IDENT if N > 1 else (0, 0, 0, 0)
            for t in combo:
                g = mat_mul(g, t, N)
            yield g


# ----------------------------------------------------------- finite groups

class FinSubgroup:
    """Subgroup of GL2(Z/NZ) given by generators."""

    def __init__(self, gens: Iterable, N: int):
        if N < 1:
            raise ValueError("modulus must be positive")
        self.N = N
        gl = []
        for g in gens:
            t = as_tuple(g, N)
            if not is_invertible(t, N):
                raise ValueError(f"generator {t} is not invertible mod {N}")
            if t != mat_reduce(IDENT, N) and t not in gl:
                gl.append(t)
        self.gens = gl
        self._chain: StabChain | None = None
        self._split: dict[int, StabChain] = {}

    @property
    def chain(self) -> StabChain:
        if self._chain is None:
            ch = StabChain(self.N)
            for g in self.gens:
                ch.add(g)
            self._chain = ch
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def __len__(self) -> int:
        return self.order()

    def contains(self, g) -> bool:
        return self.chain.contains(as_tuple(g, self.N))

    __contains__ = contains

    def elements(self) -> list[Mat]:
        return list(self.chain.elements())

    def reduce(self, M: int) -> "FinSubgroup":
        if self.N % M:
            raise ValueError("M must divide the modulus")
        if M == self.N:
            return self
        return FinSubgroup([mat_reduce(g, M) for g in self.gens], M)

    def kernel_chain(self, d: int) -> StabChain:
        """Chain whose tail past ``split_depth`` stabilizes everything mod d."""
        if d not in self._split:
            ch = StabChain(self.N, split=d)
            for g in self.gens:
                ch.add(g)
            self._split[d] = ch
        return self._split[d]

    def reduction_kernel(self, d: int) -> "FinSubgroup":
        """Elements congruent to I modulo d."""
        ch = self.kernel_chain(d)
        gens = [g for lev in ch.levels[ch.split_depth:] for g in lev.gens]
        out = FinSubgroup(gens, self.N)
        return out

    def is_subgroup_of(self, other: "FinSubgroup") -> bool:
        if other.N != self.N:
            raise ValueError("modulus mismatch")
        return all(other.contains(g) for g in self.gens)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinSubgroup) or other.N != self.N:
            return NotImplemented
        return self.order() == other.order() and self.is_subgroup_of(other)

    __hash__ = None

    def conjugate(self, x) -> "FinSubgroup":
        x = as_tuple(x, self.N)
        return FinSubgroup([conj(g, x, self.N) for g in self.gens], self.N)

    def det_image(self) -> set[int]:
        N = self.N
        return _cyclic_closure({mat_det(g, N) for g in self.gens}, N)

    def in_sl2(self) -> bool:
        return all(mat_det(g, self.N) == 1 % self.N for g in self.gens)

    def __repr__(self):
        return f"FinSubgroup(N={self.N}, gens={self.gens})"


def _cyclic_closure(seeds: set[int], N: int) -> set[int]:
    out = {1 % N}
    frontier = [1 % N]
    while frontier:
        x = frontier.pop()
        for s in seeds:
            y = x * s % N
            if y not in out:
                out.add(y)
                frontier.append(y)
    return out


def group_closure(gens: Iterable, N: int) -> FinSubgroup:
    return FinSubgroup(gens, N)


def full_group(ambient: str, N: int) -> FinSubgroup:
    gens = []
    for p, e in factor_int(N).items():
        q = p ** e
        gens += [_embed_prime_power(x, q, N) for x in full_gens(ambient, q)]
    return FinSubgroup(gens, N)


def normal_closure(seeds: Iterable[Mat], ambient_gens: Sequence[Mat], N: int) -> FinSubgroup:
    H = FinSubgroup([], N)
    ch = H.chain
    queue = []
    for s in seeds:
        if ch.add(s):
            queue.append(s)
    while queue:
        x = queue.pop()
        for g in ambient_gens:
            y = conj(x, g, N)
            if ch.add(y):
                queue.append(y)
    H.gens = ch.strong_gens()
    return H


def derived_subgroup(G: FinSubgroup) -> FinSubgroup:
    N = G.N
    gens = G.gens
    seeds = [commutator(x, y, N) for i, x in enumerate(gens) for y in gens[i + 1:]]
    return normal_closure(seeds, gens, N)


def hom_kernel(G: FinSubgroup, images: Sequence[Hashable], mul: Callable,
               identity: Hashable) -> tuple[FinSubgroup, list] | None:
    """Kernel and image of the homomorphism sending ``G.gens[i]`` to ``images[i]``.

    Returns None when the assignment does not extend to a homomorphism.
    """
    N = G.N
    reps = {identity: (IDENT if N > 1 else (0, 0, 0, 0))}
    order = [identity]
    K = FinSubgroup([], N)
    ch = K.chain
    i = 0
    while i < len(order):
        v = order[i]
        u = reps[v]
        for g, im in zip(G.gens, images):
            w = mul(v, im)
            ug = mat_mul(u, g, N)
            if w not in reps:
                reps[w] = ug
                order.append(w)
            else:
                ch.add(mat_mul(ug, mat_inv(reps[w], N), N))
        i += 1
    K.gens = ch.strong_gens()
    if K.order() * len(order) != G.order():
        return None
    return K, order


def sl2_part(G: FinSubgroup) -> FinSubgroup:
    N = G.N
    res = hom_kernel(G, [mat_det(g, N) for g in G.gens], lambda x, y: x * y % N, 1 % N)
    return res[0]


def label_subgroup(G: FinSubgroup, label: Callable[[Mat], Hashable],
                   accept: Callable[[Hashable], bool]) -> FinSubgroup:
    """Subgroup {g in G : accept(label(g))}.

    ``label`` must identify right cosets K*g of a subgroup K contained in the
    result, and the accepted labels must form a subgroup union of cosets.
    """
    N = G.N
    start = IDENT if N > 1 else (0, 0, 0, 0)
    reps = {label(start): start}
    frontier = [start]
    H = FinSubgroup([], N)
    ch = H.chain
    while frontier:
        u = frontier.pop()
        for g in G.gens:
            x = mat_mul(u, g, N)
            lab = label(x)
            if lab not in reps:
                reps[lab] = x
                frontier.append(x)
                if accept(lab):
                    ch.add(x)
            else:
                ch.add(mat_mul(x, mat_inv(reps[lab], N), N))
    H.gens = ch.strong_gens()
    return H


# ------------------------------------------------------------ open groups

class OpenSubgroup:
    """Open subgroup of GL2 or SL2 of the profinite integers.

    It is the full preimage of ``image`` (a subgroup mod ``level``).  When
    ``minimal`` is set, ``level`` is the smallest such modulus.
    """

    def __init__(self, ambient: str, level: int, image, minimal: bool = False):
        if ambient not in (GL2, SL2):
            raise ValueError("ambient must be GL2 or SL2")
        if not isinstance(image, FinSubgroup):
            image = FinSubgroup(image, level)
        if image.N != level:
            raise ValueError("image modulus differs from level")
        if ambient == SL2 and not image.in_sl2():
            raise ValueError("generator outside SL2")
        self.ambient = ambient
        self.level = level
        self.image = image
        self.minimal = minimal
        self._at: dict[int, FinSubgroup] = {level: image}

    @property
    def gens(self) -> list[Mat]:
        return self.image.gens

    def at(self, M: int) -> FinSubgroup:
        """Image modulo M."""
        if M not in self._at:
            L = lcm(self.level, M)
            if L in self._at:
                big = self._at[L]
            else:
                gens = [lift_matrix(g, self.level, L, self.ambient) for g in self.gens]
                gens += kernel_gens(self.level, L, self.ambient)
                big = FinSubgroup(gens, L)
                self._at[L] = big
            self._at[M] = big.reduce(M) if M != L else big
        return self._at[M]

    def index(self) -> int:
        return ambient_order(self.ambient, self.level) // self.image.order()

    def contains(self, g, M: int | None = None) -> bool:
        """Membership of an element given modulo M (a multiple of the level)."""
        M = self.level if M is None else M
        if M % self.level:
            raise ValueError("element modulus must be a multiple of the level")
        return self.image.contains(mat_reduce(as_tuple(g, M), self.level))

    def is_subgroup_of(self, other: "OpenSubgroup") -> bool:
        L = lcm(self.level, other.level)
        return self.at(L).is_subgroup_of(other.at(L))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpenSubgroup):
            return NotImplemented
        if self.ambient != other.ambient:
            return False
        L = lcm(self.level, other.level)
        return self.at(L) == other.at(L)

    __hash__ = None

    def det_full(self) -> bool:
        N = self.level
        return len(self.image.det_image()) == len([u for u in range(N) if gcd(u, N) == 1])

    def intersect_sl2(self) -> "OpenSubgroup":
        if self.ambient == SL2:
            return self
        return OpenSubgroup(SL2, self.level, sl2_part(self.image))

    def conjugate(self, x) -> "OpenSubgroup":
        return OpenSubgroup(self.ambient, self.level, self.image.conjugate(x), self.minimal)

    def __repr__(self):
        return f"OpenSubgroup({self.ambient}, level={self.level}, index={self.index()})"


def open_subgroup(ambient: str, N: int, gens: Iterable, minimal: bool = False) -> OpenSubgroup:
    return OpenSubgroup(ambient, N, FinSubgroup(gens, N), minimal)


def whole(ambient: str = GL2) -> OpenSubgroup:
    return OpenSubgroup(ambient, 1, FinSubgroup([], 1), True)


def subgroup_index(H: OpenSubgroup, G: OpenSubgroup) -> int:
    L = lcm(H.level, G.level)
    h, g = H.at(L), G.at(L)
    if not h.is_subgroup_of(g):
        raise ValueError("H is not contained in G")
    return g.order() // h.order()


def _level_holds(G: FinSubgroup, d: int, ambient: str) -> bool:
    """Whether G (mod N) is the full preimage of its image mod d."""
    N = G.N
    ker = ambient_order(ambient, N) // ambient_order(ambient, d)
    return G.reduce(d).order() * ker == G.order()


def certify_level(G: OpenSubgroup) -> OpenSubgroup:
    """Return G with its minimal level.

    The moduli n for which G is a preimage of its image mod n are closed under
    gcd, so a greedy descent one prime at a time reaches the minimum.
    """
    if G.minimal:
        return G
    img, N = G.image, G.level
    for ell in prime_divisors(N):
        while N % ell == 0 and _level_holds(img, N // ell, G.ambient):
            N //= ell
            img = img.reduce(N)
    return OpenSubgroup(G.ambient, N, img, minimal=True)


def sl_criterion(image_of: Callable[[int], FinSubgroup], N: int) -> list[int]:
    """Primes at which the SL2 level criterion fails for modulus N.

    ``image_of(n)`` returns the image of the group modulo n (for n | N*ell).
    """
    fac = factor_int(N)
    if fac.get(2) == 1:
        raise CertificationError("2-part of the modulus must not be exactly 2")
    bad = []
    for ell, e in fac.items():
        nl = ell ** e * prod(p for p in fac if p != ell and (p * p - 1) % ell == 0)
        big = image_of(nl * ell)
        if big.order() != big.reduce(nl).order() * ell ** 3:
            bad.append(ell)
    return bad


def commutator_open(G: OpenSubgroup) -> OpenSubgroup:
    """The commutator subgroup [G, G] as an open subgroup of SL2, with minimal level."""
    primes = set(prime_divisors(G.level)) | {2, 3}
    exps = {p: max(valuation(G.level, p), 1) for p in primes}
    exps[2] = max(exps[2], 2)
    cache: dict[int, FinSubgroup] = {}

    def image_of(n: int) -> FinSubgroup:
        if n not in cache:
            cache[n] = derived_subgroup(G.at(n))
        return cache[n]

    while True:
        N = prod(p ** e for p, e in exps.items())
        bad = sl_criterion(image_of, N)
        if not bad:
            break
        for p in bad:
            exps[p] += 1
    return certify_level(OpenSubgroup(SL2, N, image_of(N)))


def scalar_gens(N: int) -> list[Mat]:
    return [(u, 0, 0, u) for u in unit_generators(N)] if N > 1 else []


def adjoin_scalars(H: OpenSubgroup, N0: int | None = None) -> OpenSubgroup:
    """The group generated by H and all scalar matrices, with minimal level.

    N0 is a multiple of the level of H meet SL2; the result has level dividing
    N0 (odd) or 2*N0 (even), which is checked.
    """
    if N0 is None:
        N0 = certify_level(H.intersect_sl2()).level
        if N0 % 2 == 0 and N0 % 4:
            N0 *= 2
    if N0 % 2 == 0 and N0 % 4:
        raise ValueError("N0 must be divisible by 4 when even")
    N1 = N0 if N0 % 2 else 2 * N0
    L = lcm(N1, H.level)
    img = FinSubgroup(H.at(L).gens + scalar_gens(L), L)
    out = certify_level(OpenSubgroup(GL2, L, img))
    if N1 % out.level:
        raise CertificationError(f"level {out.level} does not divide {N1}")
    return out


def contains_scalars(G: OpenSubgroup) -> bool:
    return all(G.image.contains(s) for s in scalar_gens(G.level))


def _threshold(ell: int) -> int:
    return {2: 3, 3: 2}.get(ell, 1)


def is_full(G: FinSubgroup, ell: int, ambient: str = SL2, det_full: bool | None = None) -> bool:
    """Whether a closed subgroup of GL2 (or SL2) over Z_ell with image G mod ell^e is everything."""
    e = valuation(G.N, ell)
    if ell ** e != G.N:
        raise ValueError("modulus must be a power of ell")
    if ambient == SL2:
        t = _threshold(ell)
        if e < t:
            raise ValueError(f"image modulo {ell}^{t} is needed")
        return G.reduce(ell ** t).order() == sl2_order(ell ** t)
    if ell < 5:
        raise ValueError("GL2 criterion needs ell >= 5")
    if e < 1:
        raise ValueError("image modulo ell is needed")
    if G.reduce(ell).order() != gl2_order(ell):
        return False
    if e >= 2:
        q = ell * ell
        return len(G.reduce(q).det_image()) == q - ell
    if det_full is None:
        raise ValueError("determinant information needed when only the mod-ell image is known")
    return det_full


# -------------------------------------------------------------- Goursat

@dataclass
class GoursatData:
    d1: int
    d2: int
    N1: FinSubgroup
    N2: FinSubgroup
    reps1: list
    reps2: list  # reps2[i] corresponds to reps1[i]

    def quotient_order(self) -> int:
        return len(self.reps1)

    def _coset_index(self, x: Mat, reps: list, K: FinSubgroup, m: int) -> int:
        for i, r in enumerate(reps):
            if K.contains(mat_mul(mat_inv(r, m), x, m)):
                return i
        raise ValueError("element outside the group")

    def iso(self, a) -> Mat:
        """A representative of the coset of G2 matched with the coset of a."""
        i = self._coset_index(as_tuple(a, self.d1), self.reps1, self.N1, self.d1)
        return self.reps2[i]

    def contains(self, a, b) -> bool:
        """Whether the pair (a mod d1, b mod d2) lies in the reconstructed group."""
        b = as_tuple(b, self.d2)
        r = self.iso(a)
        return self.N2.contains(mat_mul(mat_inv(r, self.d2), b, self.d2))


def goursat(H: FinSubgroup, d1: int, d2: int, cap: int = 20000) -> GoursatData:
    """Goursat decomposition of H mod d1*d2 (coprime) as a subgroup of G1 x G2."""
    N = H.N
    if d1 * d2 != N or gcd(d1, d2) != 1:
        raise ValueError("need coprime d1, d2 with d1*d2 = modulus")
    N1 = H.reduction_kernel(d2).reduce(d1)
    N2 = H.reduction_kernel(d1).reduce(d2)
    r1 = [mat_reduce(IDENT, d1)]
    r2 = [mat_reduce(IDENT, d2)]
    data = GoursatData(d1, d2, N1, N2, r1, r2)
    i = 0
    while i < len(r1):
        a, b = r1[i], r2[i]
        for h in H.gens:
            x = mat_mul(a, mat_reduce(h, d1), d1)
            try:
                data._coset_index(x, r1, N1, d1)
            except ValueError:
                if len(r1) >= cap:
                    raise ValueError("quotient too large for explicit Goursat data")
                r1.append(x)
                r2.append(mat_mul(b, mat_reduce(h, d2), d2))
        i += 1
    return data


# ---------------------------------------------------------------- phi3

_LINES3 = [(1, 0), (0, 1), (1, 1), (1, 2)]
_PAIRINGS = [frozenset({frozenset({0, 1}), frozenset({2, 3})}),
             frozenset({frozenset({0, 2}), frozenset({1, 3})}),
             frozenset({frozenset({0, 3}), frozenset({1, 2})})]


def _line_index(v: tuple[int, int]) -> int:
    x, y = v[0] % 3, v[1] % 3
    if x:
        s = 2 if x == 2 else 1  # inverse of x mod 3
        x, y = 1, y * s % 3
    else:
        y = 1
    return _LINES3.index((x, y))


def phi3(A) -> tuple[int, int, int]:
    """Image of A in S3, via the action of GL2(F3) on pairings of the four lines.

    Permutations are tuples p with p[i] the image of i; composition is
    :func:`perm_mul` (apply the left factor first), so phi3(A*B) = perm_mul(phi3(A), phi3(B)).
    """
    if isinstance(A, ZModMat):
        A = A.entries
    elif len(A) == 2:
        A = (*A[0], *A[1])
    a, b, c, d = (x % 3 for x in A)
    if (a * d - b * c) % 3 == 0:
        raise ValueError("matrix not invertible mod 3")
    perm4 = [_line_index((x * a + y * c, x * b + y * d)) for x, y in _LINES3]
    out = []
    for P in _PAIRINGS:
        img = frozenset(frozenset(perm4[i] for i in pair) for pair in P)
        out.append(_PAIRINGS.index(img))
    return tuple(out)


def perm_mul(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """p followed by q."""
    return tuple(q[p[i]] for i in range(len(p)))


def perm_sign(p: Sequence[int]) -> int:
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


# ------------------------------------------------------------ file format

def format_group(G: OpenSubgroup | FinSubgroup, ambient: str | None = None) -> str:
    if isinstance(G, OpenSubgroup):
        ambient, N, gens = G.ambient, G.level, G.gens
    else:
        ambient = ambient or (SL2 if G.in_sl2() else GL2)
        N, gens = G.N, G.gens
    lines = [f"{ambient} {N}"] + [" ".join(map(str, g)) for g in gens]
    return "\n".join(lines) + "\n"


def parse_group(text: str) -> OpenSubgroup:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2 or lines[0][0] not in (GL2, SL2):
        raise ValueError("first line must be 'GL2 N' or 'SL2 N'")
    ambient, N = lines[0][0], int(lines[0][1])
    gens = []
    for ln in lines[1:]:
        if len(ln) != 4:
            raise ValueError(f"bad matrix line: {' '.join(ln)}")
        gens.append(tuple(int(x) for x in ln))
    return open_subgroup(ambient, N, gens)


def read_group_file(path) -> OpenSubgroup:
    with open(path) as fh:
        return parse_group(fh.read())


def write_group_file(path, G: OpenSubgroup) -> None:
    with open(path, "w") as fh:
        fh.write(format_group(G))
