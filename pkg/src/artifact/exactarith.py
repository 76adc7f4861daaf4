"""Exact arithmetic: rationals, residue rings, the cyclotomic field Q(zeta_N)
in the power basis, and truncated q-series over it."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

Rat = Fraction


class PrecisionError(ArithmeticError):
    """Raised when a coefficient beyond the known precision is requested."""


# ---------------------------------------------------------------------------
# elementary number theory on Z / NZ

TRIAL_DIVISION_BOUND = 10**7


def factor_int(n: int, bound: int = TRIAL_DIVISION_BOUND) -> dict[int, int]:
    """Factor |n| by trial division. Raises if a cofactor above bound**2 remains."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        if p > bound:
            raise ValueError(f"trial division bound {bound} exceeded")
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_divisors(n: int) -> list[int]:
    return sorted(factor_int(n)) if abs(n) > 1 else []


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, v in enumerate(sieve) if v]


def euler_phi(n: int) -> int:
    r = n
    for p in prime_divisors(n):
        r = r // p * (p - 1)
    return r


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def inv_mod(x: int, n: int) -> int:
    return pow(x, -1, n)


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """Combine residues modulo pairwise coprime moduli."""
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        t = ((r - x) * inv_mod(m, n)) % n
        x += m * t
        m *= n
    return x % m


def squarefree_part(x: int | Fraction) -> int:
    """The squarefree integer d with x in d * (Q^x)^2."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("squarefree part of 0")
    n = x.numerator * x.denominator
    d = -1 if n < 0 else 1
    for p, e in factor_int(n).items():
        if e % 2:
            d *= p
    return d


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt d) for squarefree d != 1."""
    return d if d % 4 == 1 else 4 * d


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def primitive_root(pe: int) -> int:
    """A generator of (Z/p^e)^x for an odd prime power p^e (or 2, 4)."""
    if pe in (2, 4):
        return pe - 1
    p = prime_divisors(pe)[0]
    if p == 2:
        raise ValueError("(Z/2^e)^x is not cyclic for e >= 3")
    q = euler_phi(pe)
    fs = prime_divisors(q)
    for g in range(2, pe):
        if g % p and all(pow(g, q // f, pe) != 1 for f in fs):
            return g
    raise AssertionError("no primitive root found")


def unit_generators(n: int) -> list[int]:
    """A small generating set of (Z/n)^x, one or two elements per prime power."""
    if n <= 2:
        return []
    fac = factor_int(n)
    out = []
    for p, e in sorted(fac.items()):
        pe = p**e
        rest = n // pe
        local = []
        if p == 2:
            if e >= 2:
                local.append(pe - 1)
            if e >= 3:
                local.append(5)
        else:
            local.append(primitive_root(pe))
        for g in local:
            out.append(crt([g, 1], [pe, rest]) if rest > 1 else g)
    return out


def units(n: int) -> list[int]:
    return [u for u in range(n) if math.gcd(u, n) == 1] if n > 1 else [0]


def multiplicative_order(x: int, n: int) -> int:
    if n == 1:
        return 1
    k, y = 1, x % n
    while y != 1:
        y = y * x % n
        k += 1
    return k


# ---------------------------------------------------------------------------
# cyclotomic polynomials and reduction tables


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    assert not any(num), "inexact polynomial division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("n must be positive")
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _polydiv_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


@lru_cache(maxsize=None)
def reduction_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row i is x^i reduced mod Phi_n in the power basis, for 0 <= i < n."""
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    rows = []
    cur = [0] * deg
    cur[0] = 1
    for _ in range(n):
        rows.append(tuple(cur))
        # multiply by x
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for j in range(deg):
                cur[j] -= top * phi[j]
    return tuple(rows)


def _to_frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.replace(" ", ""))
    return Fraction(x)


# ---------------------------------------------------------------------------
# Q(zeta_N)


class CycNum:
    """An element sum c_i zeta_N^i of Q(zeta_N) with 0 <= i < phi(N)."""

    __slots__ = ("N", "c", "_hash")

    def __init__(self, N: int, coeffs: Iterable, _reduced: bool = False):
        if N < 1:
            raise ValueError("modulus must be positive")
        self.N = N
        cs = tuple(_to_frac(x) for x in coeffs)
        deg = euler_phi(N)
        if not _reduced:
            if len(cs) > deg:
                cs = cyc_reduce(cs, N).c
            elif len(cs) < deg:
                cs = cs + (Fraction(0),) * (deg - len(cs))
        self.c = cs
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, N: int) -> "CycNum":
        return cls(N, (Fraction(0),) * euler_phi(N), True)

    @classmethod
    def one(cls, N: int) -> "CycNum":
        return cls.rational(N, 1)

    @classmethod
    def rational(cls, N: int, x) -> "CycNum":
        deg = euler_phi(N)
        return cls(N, (_to_frac(x),) + (Fraction(0),) * (deg - 1), True)

    @classmethod
    def zeta(cls, N: int, e: int = 1) -> "CycNum":
        return cls(N, reduction_table(N)[e % N], True)

    # predicates
    def is_zero(self) -> bool:
        return not any(self.c)

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return self.c[0]

    # arithmetic
    def _coerce(self, other) -> "CycNum":
        if isinstance(other, CycNum):
            if other.N != self.N:
                if other.is_rational():
                    return CycNum.rational(self.N, other.c[0])
                if self.is_rational():
                    raise _Swap
                raise ValueError(f"modulus mismatch: {self.N} vs {other.N}")
            return other
        if isinstance(other, (int, Fraction)):
            return CycNum.rational(self.N, other)
        return NotImplemented

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except _Swap:
            return other + self
        if o is NotImplemented:
            return o
        return CycNum(self.N, (a + b for a, b in zip(self.c, o.c)), True)

    __radd__ = __add__

    def __neg__(self):
        return CycNum(self.N, (-a for a in self.c), True)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycNum(self.N, (a * other for a in self.c), True)
        try:
            o = self._coerce(other)
        except _Swap:
            return other * self
        if o is NotImplemented:
            return o
        if o.is_rational():
            return self * o.c[0]
        if self.is_rational():
            return o * self.c[0]
        deg = len(self.c)
        prod = [Fraction(0)] * (2 * deg - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        prod[i + j] += a * b
        return cyc_reduce(prod, self.N)

    __rmul__ = __mul__

    def inverse(self) -> "CycNum":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        if self.is_rational():
            return CycNum.rational(self.N, 1 / self.c[0])
        deg = len(self.c)
        # columns of the multiplication-by-self matrix
        cols = []
        basis_elt = CycNum.one(self.N)
        z = CycNum.zeta(self.N)
        for _ in range(deg):
            cols.append((self * basis_elt).c)
            basis_elt = basis_elt * z
        mat = [[cols[j][i] for j in range(deg)] + [Fraction(int(i == 0))] for i in range(deg)]
        sol = _solve_square(mat, deg)
        return CycNum(self.N, sol, True)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNum.one(self.N)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.c[0] == other
        if not isinstance(other, CycNum):
            return NotImplemented
        if other.N != self.N:
            return self.is_rational() and other.is_rational() and self.c[0] == other.c[0]
        return self.c == other.c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.c[0]) if self.is_rational() else hash((self.N, self.c))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def galois(self, d: int) -> "CycNum":
        return cyc_galois(self, d)

    def embed(self, M: int) -> "CycNum":
        return cyc_embed(self, M)

    def denominator(self) -> int:
        return math.lcm(*(a.denominator for a in self.c))

    def __str__(self):
        return format_cyc(self)

    def __repr__(self):
        return f"CycNum({self.N}, {format_cyc(self)!r})"


class _Swap(Exception):
    pass


def _solve_square(mat: list[list[Fraction]], n: int) -> list[Fraction]:
    for col in range(n):
        piv = next(r for r in range(col, n) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for r in range(n):
            if r != col and mat[r][col]:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    return [mat[r][n] for r in range(n)]


def cyc_reduce(poly: Sequence, N: int) -> CycNum:
    """Reduce sum poly[i] zeta_N^i into the power basis of Q[x]/Phi_N."""
    table = reduction_table(N)
    deg = euler_phi(N)
    out = [Fraction(0)] * deg
    for i, a in enumerate(poly):
        a = _to_frac(a)
        if a:
            row = table[i % N]
            for j in range(deg):
                if row[j]:
                    out[j] += a * row[j]
    return CycNum(N, out, True)


def cyc_reduce_int(poly: Sequence[int], N: int, den: int = 1) -> CycNum:
    """Integer variant of cyc_reduce with a common denominator."""
    table = reduction_table(N)
    deg = euler_phi(N)
    out = [0] * deg
    for i, a in enumerate(poly):
        if a:
            row = table[i % N]
            for j in range(deg):
                if row[j]:
                    out[j] += int(a) * row[j]
    return CycNum(N, (Fraction(x, den) for x in out), True)


def cyc_galois(x: CycNum, d: int) -> CycNum:
    """The automorphism sigma_d with zeta_N -> zeta_N^d."""
    N = x.N
    if math.gcd(d, N) != 1:
        raise ValueError(f"{d} is not a unit modulo {N}")
    if x.is_rational():
        return x
    poly = [Fraction(0)] * N
    for i, a in enumerate(x.c):
        if a:
            poly[(i * d) % N] += a
    return cyc_reduce(poly, N)


def cyc_embed(x: CycNum, M: int) -> CycNum:
    """Image of x under zeta_N -> zeta_M^(M/N)."""
    N = x.N
    if M % N:
        raise ValueError(f"{N} does not divide {M}")
    s = M // N
    poly = [Fraction(0)] * M
    for i, a in enumerate(x.c):
        if a:
            poly[(i * s) % M] += a
    return cyc_reduce(poly, M)


def format_cyc(x: CycNum) -> str:
    terms = []
    for i, a in enumerate(x.c):
        if a == 0 and not (i == 0 and x.is_zero()):
            continue
        if i == 0:
            terms.append(str(a))
        elif i == 1:
            terms.append(f"{a}*z")
        else:
            terms.append(f"{a}*z^{i}")
    return " + ".join(terms)


_TERM = re.compile(r"^\s*([+-]?\s*[0-9]+(?:/[0-9]+)?)\s*(?:\*\s*z(?:\^([0-9]+))?)?\s*$")


def parse_cyc(text: str, N: int) -> CycNum:
    """Inverse of format_cyc; accepts terms 'a/b', 'a/b*z', 'a/b*z^i' joined by ' + '."""
    poly: dict[int, Fraction] = {}
    for part in text.split(" + "):
        m = _TERM.match(part)
        if not m:
            raise ValueError(f"cannot parse cyclotomic term {part!r}")
        coeff = Fraction(m.group(1).replace(" ", ""))
        if "z" in part:
            e = int(m.group(2)) if m.group(2) else 1
        else:
            e = 0
        poly[e] = poly.get(e, Fraction(0)) + coeff
    top = max(poly) if poly else 0
    return cyc_reduce([poly.get(i, 0) for i in range(top + 1)], N)


# ---------------------------------------------------------------------------
# truncated q_N-series


EXACT = 2**62  # precision of series known exactly (polynomials)


class QSeries:
    """Truncated Laurent series sum_{low <= n < prec} c_n q_N^n over Q(zeta_K).

    Coefficients of exponents >= prec are unknown and reading them raises
    PrecisionError. Stored coefficients cover low .. low+len-1; the rest of
    the known range is zero.
    """

    __slots__ = ("N", "K", "low", "coeffs", "prec")

    def __init__(self, N: int, coeffs: Sequence, prec: int, low: int = 0, K: int | None = None):
        self.N = N
        self.K = K if K is not None else N
        if low > prec:
            raise ValueError("lowDeg exceeds precision")
        cs = []
        for c in list(coeffs)[: max(prec - low, 0)]:
            if not isinstance(c, CycNum):
                c = CycNum.rational(self.K, c)
            elif c.N != self.K:
                c = CycNum.rational(self.K, c.c[0]) if c.is_rational() else cyc_embed(c, self.K)
            cs.append(c)
        i = 0
        while i < len(cs) and cs[i].is_zero():
            i += 1
        j = len(cs)
        while j > i and cs[j - 1].is_zero():
            j -= 1
        self.low = low + i if j > i else min(max(low, 0), prec)
        self.coeffs = tuple(cs[i:j])
        self.prec = prec

    @classmethod
    def from_dict(cls, N: int, terms: dict, prec: int, K: int | None = None) -> "QSeries":
        keys = [e for e in terms if e < prec]
        if not keys:
            return cls(N, [], prec, min(0, prec), K)
        low = min(keys)
        cs = [terms.get(e, 0) for e in range(low, max(keys) + 1)]
        return cls(N, cs, prec, low, K)

    @classmethod
    def constant(cls, N: int, c, K: int | None = None) -> "QSeries":
        return cls(N, [c], EXACT, 0, K)

    def __getitem__(self, n: int) -> CycNum:
        if n >= self.prec:
            raise PrecisionError(f"coefficient of q_{self.N}^{n} unknown (precision {self.prec})")
        i = n - self.low
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return CycNum.zero(self.K)

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return not self.coeffs

    def valuation(self) -> int:
        """Lowest exponent with a nonzero coefficient; PrecisionError if none is known."""
        if not self.coeffs:
            raise PrecisionError("series vanishes to its full precision")
        return self.low

    def terms(self) -> list[tuple[int, CycNum]]:
        return [(self.low + i, c) for i, c in enumerate(self.coeffs) if not c.is_zero()]

    def _top(self) -> int:
        return self.low + len(self.coeffs)

    def _lift(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction, CycNum)):
            return QSeries.constant(self.N, other, self.K)
        if not isinstance(other, QSeries):
            raise TypeError("expected QSeries")
        if other.N != self.N:
            raise ValueError(f"series modulus mismatch: q_{self.N} vs q_{other.N}")
        if other.K != self.K:
            raise ValueError(f"coefficient field mismatch: Q(zeta_{self.K}) vs Q(zeta_{other.K})")
        return other

    def __add__(self, other):
        other = self._lift(other)
        prec = min(self.prec, other.prec)
        if not self.coeffs and not other.coeffs:
            return QSeries(self.N, [], prec, min(0, prec), self.K)
        lo = min(x.low for x in (self, other) if x.coeffs)
        hi = min(max(self._top(), other._top()), prec)
        cs = [self[n] + other[n] for n in range(lo, hi)]
        return QSeries(self.N, cs, prec, min(lo, prec), self.K)

    __radd__ = __add__

    def __neg__(self):
        return QSeries(self.N, [-c for c in self.coeffs], self.prec, self.low, self.K)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QSeries":
        return QSeries(self.N, [x * c for x in self.coeffs], self.prec, self.low, self.K)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycNum)):
            return self.scale(other)
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            # a zero factor: precision limited by the other operand's lowDeg
            a_low = self.low if self.coeffs else self.prec
            b_low = other.low if other.coeffs else other.prec
            prec = min(self.prec + b_low, other.prec + a_low)
            return QSeries(self.N, [], prec, min(0, prec), self.K)
        prec = min(self.prec + other.low, other.prec + self.low)
        low = self.low + other.low
        n_out = min(prec, self._top() + other._top() - 1) - low
        out = [CycNum.zero(self.K)] * max(n_out, 0)
        for i, a in enumerate(self.coeffs):
            if i >= n_out:
                break
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if i + j >= n_out:
                    break
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return QSeries(self.N, out, prec, min(low, prec), self.K)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        if not self.coeffs:
            raise PrecisionError("cannot invert a series whose leading term is unknown")
        low = self.low
        rel = self.prec - low
        if rel > EXACT // 2:
            if len(self.coeffs) == 1:
                return QSeries(self.N, [self.coeffs[0].inverse()], EXACT, -low, self.K)
            raise PrecisionError("inverse of an exact non-monomial needs a finite precision")
        lead_inv = self.coeffs[0].inverse()
        out = [lead_inv]
        for n in range(1, rel):
            s = CycNum.zero(self.K)
            for i in range(1, min(n, len(self.coeffs) - 1) + 1):
                if not self.coeffs[i].is_zero():
                    s = s + self.coeffs[i] * out[n - i]
            out.append(-s * lead_inv)
        return QSeries(self.N, out, -low + rel, -low, self.K)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / Fraction(other))
        if isinstance(other, CycNum):
            return self.scale(other.inverse())
        return self * self._lift(other).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = QSeries.constant(self.N, 1, self.K)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def galois(self, d: int) -> "QSeries":
        return QSeries(self.N, [cyc_galois(c, d) for c in self.coeffs], self.prec, self.low, self.K)

    def truncate(self, prec: int) -> "QSeries":
        if prec > self.prec:
            raise PrecisionError("cannot raise precision by truncation")
        return QSeries(self.N, self.coeffs, prec, min(self.low, prec), self.K)

    def rescale(self, M: int) -> "QSeries":
        """Rewrite the series in q_M for a multiple M of N (q_N = q_M^(M/N))."""
        if M % self.N:
            raise ValueError(f"{self.N} does not divide {M}")
        s = M // self.N
        terms = {(self.low + i) * s: c for i, c in enumerate(self.coeffs)}
        prec = EXACT if self.prec >= EXACT // 2 else self.prec * s - (s - 1)
        if not terms:
            return QSeries(M, [], prec, min(0, prec), self.K)
        return QSeries.from_dict(M, terms, prec, self.K)

    def embed_field(self, M: int) -> "QSeries":
        return QSeries(self.N, [cyc_embed(c, M) for c in self.coeffs], self.prec, self.low, M)

    def __eq__(self, other):
        """Equality of all coefficients known to both series."""
        if not isinstance(other, QSeries):
            return NotImplemented
        if other.N != self.N:
            return False
        prec = min(self.prec, other.prec)
        lo = min(self.low, other.low)
        hi = min(max(self._top(), other._top()), prec)
        return all(self[n] == other[n] for n in range(lo, hi))

    __hash__ = None

    def __str__(self):
        parts = ", ".join(f"({e}, {format_cyc(c)})" for e, c in self.terms())
        return f"[{parts}] + O(q_{self.N}^{self.prec})"

    __repr__ = __str__


def series_arith(a: QSeries, b: QSeries | None, op: str) -> QSeries:
    """Dispatch for 'add', 'mul' and 'invert-unit'."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "invert-unit":
        return a.inverse()
    raise ValueError(f"unknown series operation {op!r}")


def parse_series(text: str, N: int, K: int | None = None) -> QSeries:
    """Parse the output of str(QSeries)."""
    K = K if K is not None else N
    m = re.match(r"^\s*\[(.*)\]\s*\+\s*O\(q_(\d+)\^(-?\d+)\)\s*$", text, re.S)
    if not m:
        raise ValueError("malformed series text")
    if int(m.group(2)) != N:
        raise ValueError("series modulus mismatch")
    prec = int(m.group(3))
    body = m.group(1).strip()
    terms: dict[int, CycNum] = {}
    for e, c in re.findall(r"\((-?\d+),\s*([^()]*)\)", body):
        terms[int(e)] = parse_cyc(c, K)
    if not terms:
        return QSeries(N, [], prec, 0 if prec >= 0 else prec, K)
    return QSeries.from_dict(N, terms, prec, K)


# ---------------------------------------------------------------------------
# 2x2 matrices over Z/NZ


@dataclass(frozen=True)
class ZModMat:
    a: int
    b: int
    c: int
    d: int
    N: int

    def __post_init__(self):
        N = self.N
        object.__setattr__(self, "a", self.a % N)
        object.__setattr__(self, "b", self.b % N)
        object.__setattr__(self, "c", self.c % N)
        object.__setattr__(self, "d", self.d % N)

    @classmethod
    def of(cls, m: Sequence[int], N: int) -> "ZModMat":
        if len(m) == 2:
            (a, b), (c, d) = m
        else:
            a, b, c, d = m
        return cls(a, b, c, d, N)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.N

    def __mul__(self, o: "ZModMat") -> "ZModMat":
        if o.N != self.N:
            raise ValueError("modulus mismatch")
        return ZModMat(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                       self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d, self.N)

    def inverse(self) -> "ZModMat":
        di = inv_mod(self.det(), self.N) if self.N > 1 else 0
        return ZModMat(self.d * di, -self.b * di, -self.c * di, self.a * di, self.N)

    def transpose(self) -> "ZModMat":
        return ZModMat(self.a, self.c, self.b, self.d, self.N)

    def reduce(self, M: int) -> "ZModMat":
        if self.N % M:
            raise ValueError(f"{M} does not divide {self.N}")
        return ZModMat(self.a, self.b, self.c, self.d, M)

    def __str__(self):
        return f"{self.a} {self.b} {self.c} {self.d}"
