"""Modular forms from weight-one Eisenstein series.

Forms of level N are handled through their q_N-expansions at every cusp.
Internally an expansion is an integer array ``A`` of shape (P, N): row n holds
the coefficient of q_N^n as a polynomial in zeta_N, taken modulo x^N - 1, and
the whole series carries one common denominator.  Reduction to the power basis
of Q(zeta_N) only happens when rational vectors are needed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, lcm

import numpy as np

from .congruence import CongruenceData, GammaData
from .exactarith import (
    EXACT, CycNum, QSeries, euler_phi, inv_mod, is_prime,
    primitive_root, reduction_table,
)
from .gl2 import (
    IDENT, FinSubgroup, Mat, as_tuple, kernel_gens, lift_matrix, mat_det, mat_mul,
)

_INT64_SAFE = 2 ** 62


# ------------------------------------------------------------ series arrays

def _fits(a: np.ndarray, b: np.ndarray, terms: int) -> bool:
    if a.dtype == object or b.dtype == object:
        return False
    ma = int(np.abs(a).max(initial=0))
    mb = int(np.abs(b).max(initial=0))
    return ma * mb * max(terms, 1) < _INT64_SAFE


def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two (P, N) arrays over Z[x]/(x^N - 1), truncated to P rows."""
    P, N = a.shape
    if not _fits(a, b, P * N):
        a, b = a.astype(object), b.astype(object)
    # iterate over the sparser factor
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    out = np.zeros((P, N), dtype=a.dtype if a.dtype == object else np.int64)
    rows, cols = np.nonzero(a)
    for i, x in zip(rows.tolist(), cols.tolist()):
        c = a[i, x]
        out[i:] += c * np.roll(b[: P - i], x, axis=1)
    return out


def series_shift_zeta(a: np.ndarray, e: int) -> np.ndarray:
    """Multiply every coefficient by zeta_N^e."""
    return np.roll(a, e % a.shape[1], axis=1)


def series_galois(a: np.ndarray, d: int) -> np.ndarray:
    """Apply zeta -> zeta^d coefficientwise (d a unit)."""
    P, N = a.shape
    out = np.zeros_like(a)
    for x in range(N):
        out[:, (x * d) % N] += a[:, x]
    return out


def reduce_rows(a: np.ndarray) -> np.ndarray:
    """Power-basis coordinates (P, phi(N)) of each coefficient."""
    N = a.shape[1]
    R = np.array(reduction_table(N), dtype=object)
    return np.asarray(a, dtype=object).dot(R)


def to_qseries(a: np.ndarray, den: int, prec: int | None = None) -> QSeries:
    P, N = a.shape
    prec = P if prec is None else prec
    red = reduce_rows(a[:prec])
    coeffs = [CycNum(N, [Fraction(int(v), den) for v in row], _reduced=True) for row in red]
    return QSeries(N, coeffs, prec)


# --------------------------------------------------------- Eisenstein series

def eisenstein1_array(alpha, N: int, P: int) -> np.ndarray:
    """2N times the q_N-expansion of the weight-one Eisenstein series E_alpha."""
    a, b = alpha[0] % N, alpha[1] % N
    out = np.zeros((P, N), dtype=np.int64)
    if P == 0 or (a == 0 and b == 0):
        return out
    if a == 0:
        m = N // gcd(b, N)
        # 1/(1 - w) = -(1/m) sum_t t w^t for w of order m
        s = N // m
        for t in range(m):
            out[0, (b * t) % N] -= s * t
            out[0, (b * (t + 1)) % N] -= s * t
    else:
        out[0, 0] = N - 2 * a
    two_n = 2 * N
    for m in range(1, P):
        if m % N == a:
            for n in range(1, (P - 1) // m + 1):
                out[m * n, (b * n) % N] += two_n
        if m % N == (-a) % N:
            for n in range(1, (P - 1) // m + 1):
                out[m * n, (-b * n) % N] -= two_n
    return out


def eisenstein1_qexp(alpha, N: int, prec: int) -> QSeries:
    return to_qseries(eisenstein1_array(alpha, N, prec), 2 * N)


def _sigma(n: int, k: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def classical_qexp(which: str, prec: int) -> QSeries:
    """E4, E6, Delta, j or j - 1728 as series in q = q_1 known to O(q^prec)."""
    if which == "E4":
        return QSeries(1, [1] + [240 * _sigma(n, 3) for n in range(1, prec)], prec)
    if which == "E6":
        return QSeries(1, [1] + [-504 * _sigma(n, 5) for n in range(1, prec)], prec)
    if which == "Delta":
        # q * prod (1 - q^n)^24
        c = [0] * prec
        if prec > 1:
            c[1] = 1
        for n in range(1, prec):
            for _ in range(24):
                for e in range(prec - 1, n - 1, -1):
                    c[e] -= c[e - n]
        return QSeries(1, c, prec)
    if which in ("j", "jm1728"):
        e = classical_qexp("E4" if which == "j" else "E6", prec + 2)
        num = e * e * e if which == "j" else e * e
        return (num / classical_qexp("Delta", prec + 2)).truncate(prec)
    raise ValueError(f"unknown form {which!r}")


# ------------------------------------------------------------- monomials

@dataclass(frozen=True)
class EisMonomial:
    """zeta_N^j times a product of weight-one Eisenstein series."""
    N: int
    alphas: tuple
    j: int = 0

    @property
    def weight(self) -> int:
        return len(self.alphas)

    def normalized(self) -> "EisMonomial":
        N = self.N
        al = tuple(sorted((a % N, b % N) for a, b in self.alphas))
        return EisMonomial(N, al, self.j % N)

    def array(self, P: int) -> np.ndarray:
        N = self.N
        out = None
        for al in self.alphas:
            e = eisenstein1_array(al, N, P)
            out = e if out is None else series_mul(out, e)
        if out is None:
            out = np.zeros((P, N), dtype=np.int64)
            if P:
                out[0, 0] = 1
        return series_shift_zeta(out, self.j)

    def denominator(self) -> int:
        return (2 * self.N) ** len(self.alphas)

    def qexp(self, prec: int) -> QSeries:
        return to_qseries(self.array(prec), self.denominator())


def _act_vec(alpha, A: Mat, N: int) -> tuple[int, int]:
    x, y = alpha
    return ((x * A[0] + y * A[2]) % N, (x * A[1] + y * A[3]) % N)


def star_monomial(m: EisMonomial, A) -> EisMonomial:
    N = m.N
    A = as_tuple(A, N)
    return EisMonomial(N, tuple(_act_vec(al, A, N) for al in m.alphas), (m.j * mat_det(A, N)) % N)


# ------------------------------------------------------- dimension & Sturm

def _gamma_data(G) -> GammaData:
    if isinstance(G, GammaData):
        return G
    if isinstance(G, CongruenceData):
        return G.gamma_data()
    return CongruenceData(G).gamma_data()


def dimension(G, k: int, minus_identity: bool | None = None) -> int:
    """dim M_k of the congruence group (G a FinSubgroup, CongruenceData or GammaData)."""
    gd = _gamma_data(G)
    if minus_identity is None:
        if isinstance(G, GammaData):
            minus_identity = gd.irregular == 0
        else:
            data = G if isinstance(G, CongruenceData) else CongruenceData(G)
            minus_identity = data.has_minus_identity
    if k == 0:
        return 1
    if k == 1:
        raise ValueError("weight 1 is not supported")
    g, r = gd.genus, gd.cusps
    if k % 2 == 0:
        return (k - 1) * (g - 1) + (k // 2) * r + gd.v2 * (k // 4) + gd.v3 * (k // 3)
    if minus_identity:
        return 0
    reg = r - gd.irregular
    val = Fraction((k - 1) * (g - 1)) + Fraction(k, 2) * reg + Fraction(k - 1, 2) * gd.irregular \
        + gd.v3 * (k // 3)
    assert val.denominator == 1
    return int(val)


@dataclass
class SturmData:
    B: Fraction
    b: int
    counts: list


def sturm(G, k: int) -> SturmData:
    """Sturm bound B, the coefficient bound b on q_N-exponents, and per-cusp counts."""
    data = G if isinstance(G, CongruenceData) else CongruenceData(G)
    gd = data.gamma_data()
    g, r = gd.genus, gd.cusps
    if k % 2 == 0:
        B = Fraction(k // 2 * (2 * g - 2) + k // 2 * r + (k // 4) * gd.v2 + (k // 3) * gd.v3)
    else:
        # f vanishes iff f^2 does, and f^2 has weight 2k
        kk = 2 * k
        B = Fraction(kk // 2 * (2 * g - 2) + kk // 2 * r + (kk // 4) * gd.v2 + (kk // 3) * gd.v3, 2)
    N = data.N
    b = floor(B * N / gd.index) + 1
    counts = [ceil(Fraction(c.width * b, N)) for c in data.cusps()]
    return SturmData(B, b, counts)


# ------------------------------------------------------------ form spaces

def _encode(alpha, N: int) -> int:
    return alpha[0] + N * alpha[1]


def _decode(e: int, N: int) -> tuple[int, int]:
    return (e % N, e // N)


class FormSpace:
    """M_{k,G} for G a subgroup of GL2(Z/NZ) with full determinant."""

    def __init__(self, G: FinSubgroup, k: int):
        if G.N <= 2:
            M = 4
            gens = [lift_matrix(g, G.N, M) for g in G.gens] + kernel_gens(G.N, M)
            G = FinSubgroup(gens, M)
        self.G = G
        self.N = G.N
        self.k = k
        self.data = CongruenceData(G)
        if k % 2 and self.data.has_minus_identity:
            self.dim = 0
        else:
            self.dim = dimension(self.data, k)
        self.sturm = sturm(self.data, k)
        self._elements: list[Mat] | None = None
        self._prod_cache: dict[tuple, np.ndarray] = {}
        self._prod_prec = 0
        self._trace_cache: dict[tuple, list[np.ndarray]] = {}

    @property
    def cusps(self):
        return self.data.cusps()

    def elements(self) -> list[Mat]:
        if self._elements is None:
            self._elements = self.G.elements()
        return self._elements

    def denominator(self) -> int:
        return (2 * self.N) ** self.k

    def _product(self, key: tuple, P: int) -> np.ndarray:
        if P != self._prod_prec:
            self._prod_cache.clear()
            self._eis = {}
            self._prod_prec = P
        arr = self._prod_cache.get(key)
        if arr is None:
            N = self.N
            if len(key) == 1:
                arr = eisenstein1_array(_decode(key[0], N), N, P)
            else:
                arr = series_mul(self._product(key[:-1], P), self._product(key[-1:], P))
            self._prod_cache[key] = arr
        return arr

    def _weights(self, tup: tuple) -> list[dict]:
        """Per cusp: (sorted index tuple, det) -> multiplicity over g in G."""
        N = self.N
        alphas = [_decode(e, N) for e in tup]
        out = []
        for c in self.cusps:
            A = c.rep
            acc: dict = {}
            for g in self.elements():
                gA = mat_mul(g, A, N)
                key = tuple(sorted(_encode(_act_vec(al, gA, N), N) for al in alphas))
                kd = (key, mat_det(g, N))
                acc[kd] = acc.get(kd, 0) + 1
            out.append(acc)
        return out

    def trace_arrays(self, tup: tuple, P: int) -> list[list[np.ndarray]]:
        """For each cusp and each det value u, sum of products with det g = u.

        Returns per cusp a dict-like list indexed by u in [0, N)."""
        ck = (tup, P)
        if ck in self._trace_cache:
            return self._trace_cache[ck]
        res = []
        for acc in self._weights(tup):
            byu: dict[int, np.ndarray] = {}
            for (key, u), mult in acc.items():
                arr = self._product(key, P)
                cur = byu.get(u)
                term = mult * arr
                byu[u] = term if cur is None else cur + term
            res.append(byu)
        self._trace_cache[ck] = res
        return res

    def form_arrays(self, tup: tuple, j: int, P: int) -> list[np.ndarray]:
        """Expansion arrays (times the denominator) at each cusp of sum_g zeta^(j det g) prod E."""
        out = []
        for byu in self.trace_arrays(tup, P):
            tot = None
            for u, arr in byu.items():
                term = series_shift_zeta(arr, j * u)
                tot = term if tot is None else tot + term
            out.append(tot)
        return out

    def vector(self, arrays: list[np.ndarray]) -> list[int]:
        """Flattened power-basis coordinates of the first m_i coefficients of q_{w_i} at each cusp."""
        N = self.N
        vec = []
        for c, cnt, arr in zip(self.cusps, self.sturm.counts, arrays):
            step = N // c.width
            rows = arr[[n * step for n in range(cnt)]]
            for row in reduce_rows(rows):
                vec.extend(int(v) for v in row)
        return vec

    def candidate_tuples(self):
        """Sorted k-tuples of nonzero vectors up to the action of G, in lexicographic order."""
        N = self.N
        nonzero = sorted(_encode((a, b), N) for a in range(N) for b in range(N) if a or b)
        seen = set()
        elts = self.elements()
        for tup in itertools.combinations_with_replacement(nonzero, self.k):
            if tup in seen:
                continue
            alphas = [_decode(e, N) for e in tup]
            for g in elts:
                seen.add(tuple(sorted(_encode(_act_vec(al, g, N), N) for al in alphas)))
            yield tup


class ModForm:
    """Element of M_{k,G} given as a rational combination of traced Eisenstein monomials."""

    def __init__(self, space: FormSpace, terms: list[tuple[Fraction, tuple, int]]):
        self.space = space
        self.k = space.k
        self.terms = [(Fraction(c), t, j) for c, t, j in terms if c]

    def arrays(self, P: int) -> tuple[list[np.ndarray], int]:
        """Per-cusp arrays and the common denominator."""
        sp = self.space
        dens = [c.denominator for c, _, _ in self.terms] or [1]
        L = lcm(*dens)
        tot = None
        for c, tup, j in self.terms:
            arrs = sp.form_arrays(tup, j, P)
            scale = c.numerator * (L // c.denominator)
            arrs = [scale * a.astype(object) for a in arrs]
            tot = arrs if tot is None else [x + y for x, y in zip(tot, arrs)]
        if tot is None:
            tot = [np.zeros((P, sp.N), dtype=object) for _ in sp.cusps]
        return tot, sp.denominator() * L

    def expansions(self, prec: int) -> list[QSeries]:
        arrs, den = self.arrays(prec)
        return [to_qseries(a, den) for a in arrs]

    def expansion(self, i: int, prec: int) -> QSeries:
        return self.expansions(prec)[i]

    def vector(self) -> list[Fraction]:
        arrs, den = self.arrays(self.space.sturm.b)
        return [Fraction(v, den) for v in self.space.vector(arrs)]

    def __add__(self, other: "ModForm") -> "ModForm":
        return ModForm(self.space, self.terms + other.terms)

    def scale(self, c) -> "ModForm":
        return ModForm(self.space, [(c * x, t, j) for x, t, j in self.terms])

    def is_invariant(self, A, prec: int) -> bool:
        """Whether f * A = f at the cusp infinity, to the given precision (A in GL2(Z/NZ))."""
        sp = self.space
        N = sp.N
        A = as_tuple(A, N)
        d = mat_det(A, N)
        # f * A = sigma_d(f * A') with A' = A diag(1, d^-1) in SL2
        A1 = mat_mul(A, (1, 0, 0, inv_mod(d, N)), N)
        lhs = self._slash_sl2(A1, prec)
        lhs = series_galois(lhs, d)
        base, _ = self.arrays(prec)
        idx = [i for i, c in enumerate(sp.cusps) if c.rep == as_tuple(IDENT, N)]
        return bool(np.array_equal(np.asarray(lhs, dtype=object), base[idx[0]]))

    def _slash_sl2(self, A: Mat, P: int) -> np.ndarray:
        """Array of f|A (times the common denominator) computed from the monomials."""
        sp = self.space
        N = sp.N
        dens = [c.denominator for c, _, _ in self.terms] or [1]
        L = lcm(*dens)
        tot = np.zeros((P, N), dtype=object)
        for c, tup, j in self.terms:
            alphas = [_decode(e, N) for e in tup]
            scale = c.numerator * (L // c.denominator)
            for g in sp.elements():
                gA = mat_mul(g, A, N)
                key = tuple(sorted(_encode(_act_vec(al, gA, N), N) for al in alphas))
                arr = sp._product(key, P)
                tot = tot + scale * series_shift_zeta(arr, j * mat_det(g, N)).astype(object)
        return tot

    def __repr__(self):
        return f"ModForm(k={self.k}, N={self.space.N}, terms={len(self.terms)})"


# ------------------------------------------------------------ basis search

_RANK_PRIME = 2305843009213693951  # 2^61 - 1


class _ModpEchelon:
    """Incremental row echelon form modulo a prime (independence modulo p implies over Q)."""

    def __init__(self, p: int = _RANK_PRIME):
        self.p = p
        self.rows: dict[int, list[int]] = {}

    def reduce(self, v: list[int]) -> list[int]:
        p = self.p
        v = [x % p for x in v]
        for piv in sorted(self.rows):
            if v[piv]:
                r = self.rows[piv]
                c = v[piv]
                v = [(x - c * y) % p for x, y in zip(v, r)]
        return v

    def add(self, v: list[int]) -> bool:
        v = self.reduce(v)
        for i, x in enumerate(v):
            if x:
                inv = pow(x, -1, self.p)
                row = [(y * inv) % self.p for y in v]
                for piv, r in self.rows.items():
                    if r[i]:
                        c = r[i]
                        self.rows[piv] = [(a - c * b) % self.p for a, b in zip(r, row)]
                self.rows[i] = row
                return True
        return False

    def __len__(self):
        return len(self.rows)


def mk_basis(G: FinSubgroup, k: int, prec: int | None = None,
             max_tuples: int | None = None) -> list[ModForm]:
    """A Q-basis of M_{k,G} built from traced Eisenstein monomials."""
    space = G if isinstance(G, FormSpace) else FormSpace(G, k)
    d = space.dim
    if d == 0:
        return []
    if space.k % 2 == 0 and not space.data.has_minus_identity:
        raise ValueError("-I must lie in G for even weight bases")
    b = space.sturm.b
    if prec is not None and prec < b:
        raise ValueError(f"precision {prec} below the Sturm requirement {b}")
    ech = _ModpEchelon()
    basis: list[ModForm] = []
    phi = euler_phi(space.N)
    for n, tup in enumerate(space.candidate_tuples()):
        if max_tuples is not None and n >= max_tuples:
            break
        for j in range(phi):
            arrs = space.form_arrays(tup, j, b)
            if ech.add(space.vector(arrs)):
                basis.append(ModForm(space, [(Fraction(1), tup, j)]))
                if len(basis) == d:
                    return basis
    raise ArithmeticError(f"found {len(basis)} independent forms, expected {d}")


# ------------------------------------------------------------ slash action

@dataclass
class SlashExpansion:
    """factor * sqrt(radicand) * series, the series in q_{dN} over Q(zeta_{dN})."""
    series: QSeries
    factor: Fraction
    radicand: Fraction = Fraction(1)


def _decompose(B, data: CongruenceData):
    """Write B = eps * gamma * A_j * [[a, b], [0, d]] with gamma in the congruence group."""
    p, q, r, s = B
    g = gcd(p, r)
    x, y = p // g, r // g
    # complete (x, y) to a matrix of determinant 1
    from .gl2 import _egcd
    _, u, v = _egcd(x, y)          # u x + v y = 1
    M = (x, -v, y, u)
    # M^-1 B is upper triangular
    Minv = (u, v, -y, x)
    up = (Minv[0] * p + Minv[1] * r, Minv[0] * q + Minv[1] * s,
          Minv[2] * p + Minv[3] * r, Minv[2] * q + Minv[3] * s)
    assert up[2] == 0
    N = data.N
    Mn = as_tuple(M, N)
    cusps = data.cusps()
    H = data.H
    from .gl2 import mat_inv
    for j, c in enumerate(cusps):
        Ainv = mat_inv(c.rep, N)
        for eps in (1, -1):
            for t in range(N):
                u_mat = as_tuple((eps, eps * t, 0, eps), N)
                cand = mat_mul(mat_mul(Mn, mat_inv(u_mat, N), N), Ainv, N)
                if H.contains(cand):
                    # B = M up = gamma A_j eps T^t up
                    a, bb, d = up[0], up[1] + t * up[3], up[3]
                    if a < 0:
                        a, bb, d, eps = -a, -bb, -d, -eps
                    return j, eps, (a, bb, d)
    raise ArithmeticError("no cusp found for B")


def slash_expand(f: ModForm, B, prec: int) -> SlashExpansion:
    """Expansion of f|_k B for an integer matrix B with positive determinant and coprime entries."""
    B = tuple(B) if len(B) == 4 else (B[0][0], B[0][1], B[1][0], B[1][1])
    if B[0] * B[3] - B[1] * B[2] <= 0:
        raise ValueError("B must have positive determinant")
    if gcd(gcd(B[0], B[1]), gcd(B[2], B[3])) != 1:
        raise ValueError("entries of B must be coprime")
    sp = f.space
    N, k = sp.N, f.k
    j, eps, (a, b, d) = _decompose(B, sp.data)
    need = ceil(Fraction(prec, a)) if a else prec
    series = f.expansion(j, need)
    M = d * N
    terms = {}
    for n, c in series.terms():
        coeff = c.embed(M) * CycNum.zeta(M, b * n)
        terms[a * n] = coeff
    out_prec = a * series.prec - (a - 1) if series.prec < EXACT // 2 else EXACT
    out_prec = min(out_prec, a * need)
    qs = QSeries.from_dict(M, terms, out_prec, M) if terms else QSeries(M, [], out_prec, 0, M)
    ratio = Fraction(a, d)
    sign = eps ** k
    if k % 2 == 0:
        return SlashExpansion(qs, sign * ratio ** (k // 2))
    return SlashExpansion(qs, sign * ratio ** (k // 2), ratio)


# ----------------------------------------------------------- nice bases

def integer_kernel(rows: list[list[int]], n: int) -> list[list[int]]:
    """Z-basis of {x in Z^n : W x = 0} for the integer matrix W given by rows."""
    # column operations on W tracked in a unimodular matrix U (W U = [H | 0])
    W = [list(r) for r in rows]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    col = 0
    for r in range(len(W)):
        if col >= n:
            break
        # gcd-eliminate entries W[r][col+1:] into W[r][col]
        while True:
            nz = [c for c in range(col, n) if W[r][c]]
            if not nz:
                break
            piv = min(nz, key=lambda c: abs(W[r][c]))
            _swap_cols(W, U, col, piv)
            done = True
            for c in range(col + 1, n):
                if W[r][c]:
                    qt = W[r][c] // W[r][col]
                    _addmul_col(W, U, c, col, -qt)
                    if W[r][c]:
                        done = False
            if done:
                break
        if any(W[r][c] for c in range(col, n)):
            col += 1
    return [[U[i][c] for i in range(n)] for c in range(col, n)]


def _swap_cols(W, U, a, b):
    if a == b:
        return
    for M in (W, U):
        for row in M:
            row[a], row[b] = row[b], row[a]


def _addmul_col(W, U, dst, src, q):
    for M in (W, U):
        for row in M:
            row[dst] += q * row[src]


def saturate(vectors: list[list[Fraction]]) -> list[list[int]]:
    """Basis of the saturation in Z^n of the lattice spanned by the (scaled) vectors."""
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    if not vectors:
        return []
    n = len(vectors[0])
    M = DomainMatrix([[QQ(x.numerator, x.denominator) for x in v] for v in vectors],
                     (len(vectors), n), QQ)
    comp = M.nullspace().to_Matrix()  # rows spanning the orthogonal complement
    W = []
    for i in range(comp.rows):
        row = [Fraction(int(x.p), int(x.q)) for x in comp.row(i)]
        den = lcm(*[x.denominator for x in row]) if row else 1
        W.append([int(x * den) for x in row])
    return integer_kernel(W, n)


def lll_reduce(rows: list[list[int]]) -> list[list[int]]:
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix
    if not rows:
        return rows
    M = DomainMatrix([[ZZ(x) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    return [[int(x) for x in r] for r in M.lll().to_Matrix().tolist()]


def nice_basis(basis: list[ModForm], lll: bool = False) -> list[ModForm]:
    """Integral basis of the saturated coefficient lattice, as combinations of the input forms."""
    if not basis:
        return []
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    vecs = [f.vector() for f in basis]
    rows = saturate(vecs)
    if lll:
        rows = lll_reduce(rows)
    d, n = len(vecs), len(vecs[0])
    # express each integral row in terms of the input vectors
    A = DomainMatrix([[QQ(x.numerator, x.denominator) for x in v] for v in vecs], (d, n), QQ)
    out = []
    At = A.transpose()
    for r in rows:
        rhs = DomainMatrix([[QQ(x)] for x in r], (n, 1), QQ)
        sol = _solve_consistent(At, rhs)
        coeffs = [Fraction(int(c.numerator), int(c.denominator)) for c in sol]
        terms = []
        for c, f in zip(coeffs, basis):
            terms += [(c * x, t, j) for x, t, j in f.terms]
        out.append(ModForm(basis[0].space, terms))
    return out


def _solve_consistent(A, b):
    """Solve A x = b (A has full column rank)."""
    aug = A.hstack(b)
    rref, pivots = aug.rref()
    ncols = A.shape[1]
    if ncols in pivots:
        raise ArithmeticError("inconsistent system")
    sol = [rref.to_Matrix()[i, ncols] for i in range(len(pivots))]
    x = [0] * ncols
    for i, pcol in enumerate(pivots):
        x[pcol] = sol[i]
    from sympy import Rational
    return [Rational(v) for v in x]


# ---------------------------------------------- span of Eisenstein monomials

def _prime_1_mod(N: int, lower: int = 1000) -> int:
    p = lower + 1
    while p % N != 1 or not is_prime(p):
        p += 1
    return p


def _eis_modp(alpha, N: int, P: int, p: int, w: int) -> np.ndarray:
    """E_alpha reduced modulo p, with zeta_N sent to w (of order N mod p)."""
    arr = eisenstein1_array(alpha, N, P)
    powers = np.array([pow(w, x, p) for x in range(N)], dtype=np.int64)
    inv2n = pow(2 * N, -1, p)
    return (arr % p).dot(powers) % p * inv2n % p


@dataclass
class SpanCertificate:
    N: int
    k: int
    prec: int
    sturm_B: Fraction
    prime: int
    rank_mod_p: int
    monomials: int


def eisenstein_span_rank(N: int, k: int, prec: int | None = None,
                         p: int | None = None) -> SpanCertificate:
    """Rank modulo p of the q-expansions at infinity of all weight-k monomials for Gamma(N).

    A prime p = 1 mod N (p not dividing 2N) gives a ring map Z[zeta_N, 1/2N] -> F_p, so the
    rank modulo p is a lower bound for the rank over Q(zeta_N).  With prec above the Sturm
    bound, truncation at infinity is injective on M_k(Gamma(N)).
    """
    N = int(N)
    G = FinSubgroup([(1, 0, 0, u) for u in range(1, N) if gcd(u, N) == 1], N)
    data = CongruenceData(G)
    st = sturm(data, k)
    prec = int(floor(st.B)) + 1 if prec is None else prec
    p = _prime_1_mod(N) if p is None else p
    w = pow(primitive_root(p), (p - 1) // N, p)
    nonzero = [(a, b) for b in range(N) for a in range(N) if a or b]
    base = {al: _eis_modp(al, N, prec, p, w) for al in nonzero}
    rows = []
    for tup in itertools.combinations_with_replacement(nonzero, k):
        v = base[tup[0]]
        for al in tup[1:]:
            v = np.convolve(v, base[al])[:prec] % p
        rows.append(v)
    mat = np.array(rows, dtype=np.int64)
    return SpanCertificate(N, k, prec, st.B, p, rank_mod_p(mat, p), len(rows))


def rank_mod_p(mat: np.ndarray, p: int) -> int:
    """Rank of an integer matrix modulo a prime p < 2^31."""
    M = np.array(mat, dtype=np.int64) % p
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        nz = np.nonzero(M[rank:, c])[0]
        if len(nz) == 0:
            continue
        r = rank + nz[0]
        M[[rank, r]] = M[[r, rank]]
        inv = pow(int(M[rank, c]), -1, p)
        M[rank] = M[rank] * inv % p
        others = np.nonzero(M[:, c])[0]
        for i in others:
            if i != rank:
                M[i] = (M[i] - M[i, c] * M[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank
