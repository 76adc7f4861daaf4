"""Cusps, widths, elliptic points and genus of the congruence group attached to G.

For G a subgroup of GL2(Z/NZ) with full determinant, the congruence group is
the set of integer matrices of determinant 1 whose reduction lies in
H = G meet SL2(Z/NZ).  Everything here works on the right coset space
H \\ SL2(Z/NZ); cusps are the orbits of <-I, T> on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .gl2 import (
    IDENT, FinSubgroup, Mat, as_tuple, conj, full_group, lift_sl2z,
    mat_det, mat_inv, mat_mul, sl2_part,
)

S_MAT = (0, -1, 1, 0)
T_MAT = (1, 1, 0, 1)
ST_MAT = (0, -1, 1, 1)


class CosetSpace:
    """Right cosets H x of a subgroup H of SL2(Z/NZ), with a lookup table."""

    def __init__(self, H: FinSubgroup):
        N = H.N
        self.N = N
        elts = H.elements()
        self.subgroup_order = len(elts)
        self.reps: list[Mat] = []
        self.index: dict[Mat, int] = {}
        gens = [as_tuple(S_MAT, N), as_tuple(T_MAT, N)]
        self._add(as_tuple(IDENT, N), elts)
        i = 0
        while i < len(self.reps):
            x = self.reps[i]
            for g in gens:
                y = mat_mul(x, g, N)
                if y not in self.index:
                    self._add(y, elts)
            i += 1

    def _add(self, x: Mat, elts: list[Mat]) -> None:
        k = len(self.reps)
        self.reps.append(x)
        N = self.N
        for h in elts:
            self.index[mat_mul(h, x, N)] = k

    def __len__(self) -> int:
        return len(self.reps)

    def coset_of(self, x: Mat) -> int:
        return self.index[as_tuple(x, self.N)]

    def act(self, i: int, g: Mat) -> int:
        return self.index[mat_mul(self.reps[i], g, self.N)]

    def perm(self, g: Mat) -> list[int]:
        g = as_tuple(g, self.N)
        return [self.act(i, g) for i in range(len(self.reps))]


@dataclass
class CuspData:
    rep: Mat            # representative in SL2(Z/NZ)
    lift: Mat           # integer lift in SL2(Z)
    width: int
    h: int
    cosets: list = field(default_factory=list, repr=False)

    @property
    def regular(self) -> bool:
        return self.width == self.h


@dataclass
class GammaData:
    index: int          # [SL2(Z) : +-Gamma]
    genus: int
    cusps: int
    v2: int
    v3: int
    irregular: int = 0


class CongruenceData:
    """Cached combinatorial data for G (subgroup of GL2(Z/NZ), full determinant)."""

    def __init__(self, G: FinSubgroup, check_det: bool = True):
        N = G.N
        if check_det and len(G.det_image()) != sum(1 for u in range(N) if gcd(u, N) == 1):
            raise ValueError("determinant of G is not surjective")
        self.G = G
        self.N = N
        self.H = sl2_part(G)
        minus = as_tuple((-1, 0, 0, -1), N)
        self.has_minus_identity = self.H.contains(minus)
        pm = self.H if self.has_minus_identity else FinSubgroup(self.H.gens + [minus], N)
        self.space = CosetSpace(self.H)
        self.pm_space = self.space if pm is self.H else CosetSpace(pm)
        self._cusps: list[CuspData] | None = None
        self._det_reps: dict[int, Mat] | None = None

    # -- cusps
    def cusps(self) -> list[CuspData]:
        if self._cusps is not None:
            return self._cusps
        N = self.N
        sp = self.space
        tperm = sp.perm(T_MAT)
        mperm = sp.perm((-1, 0, 0, -1))
        pm = self.pm_space
        ptperm = pm.perm(T_MAT)
        owner = [-1] * len(sp)
        out = []
        for i in range(len(sp)):
            if owner[i] >= 0:
                continue
            orbit = []
            stack = [i]
            owner[i] = len(out)
            while stack:
                c = stack.pop()
                orbit.append(c)
                for d in (tperm[c], mperm[c]):
                    if owner[d] < 0:
                        owner[d] = len(out)
                        stack.append(d)
            w = _cycle_length(tperm, i)
            h = _cycle_length(ptperm, pm.coset_of(sp.reps[i]))
            rep = sp.reps[i]
            out.append(CuspData(rep, lift_sl2z(rep, N), w, h, sorted(orbit)))
        self._owner = owner
        self._cusps = out
        return out

    def cusp_of(self, x: Mat) -> int:
        """Index of the cusp containing H x for x in SL2(Z/NZ)."""
        self.cusps()
        return self._owner[self.space.coset_of(x)]

    def det_reps(self) -> dict[int, Mat]:
        if self._det_reps is None:
            N = self.N
            reps = {1 % N: as_tuple(IDENT, N)}
            frontier = [1 % N]
            while frontier:
                u = frontier.pop()
                for g in self.G.gens:
                    x = mat_mul(reps[u], g, N)
                    v = mat_det(x, N)
                    if v not in reps:
                        reps[v] = x
                        frontier.append(v)
            self._det_reps = reps
        return self._det_reps

    def cusp_galois(self, i: int, m: int) -> int:
        """Index of the cusp m . P_i (the Galois conjugate under zeta -> zeta^m)."""
        N = self.N
        m %= N
        if gcd(m, N) != 1:
            raise ValueError("m must be a unit")
        A = self.cusps()[i].rep
        g = self.det_reps()[pow(m, -1, N) if N > 1 else 0]
        x = mat_mul(mat_mul(g, A, N), (1, 0, 0, m), N)
        return self.cusp_of(x)

    def galois_orbits(self) -> list[list[int]]:
        N = self.N
        units = [u for u in range(1, N) if gcd(u, N) == 1] or [0]
        seen, out = set(), []
        for i in range(len(self.cusps())):
            if i in seen:
                continue
            orb = sorted({self.cusp_galois(i, m) for m in units})
            seen.update(orb)
            out.append(orb)
        return out

    # -- elliptic points and genus
    def elliptic_counts(self) -> tuple[int, int]:
        pm = self.pm_space
        sperm = pm.perm(S_MAT)
        stperm = pm.perm(ST_MAT)
        v2 = sum(1 for i, j in enumerate(sperm) if i == j)
        v3 = sum(1 for i, j in enumerate(stperm) if i == j)
        return v2, v3

    def index(self) -> int:
        """[SL2(Z) : +-Gamma]."""
        return len(self.pm_space)

    def gamma_index(self) -> int:
        """[SL2(Z) : Gamma]."""
        return len(self.space)

    def gamma_data(self) -> GammaData:
        mu = self.index()
        r = len(self.cusps())
        v2, v3 = self.elliptic_counts()
        twelve_g = 12 + mu - 3 * v2 - 4 * v3 - 6 * r
        if twelve_g % 12 or twelve_g < 0:
            raise ArithmeticError(f"inconsistent data: 12g = {twelve_g}")
        irr = sum(1 for c in self.cusps() if not c.regular)
        return GammaData(mu, twelve_g // 12, r, v2, v3, irr)

    def genus(self) -> int:
        return self.gamma_data().genus

    def has_real_points(self) -> bool:
        N = self.N
        return any(_class_meets(self.G, as_tuple(c, N)) for c in ((1, 0, 0, -1), (1, 1, 0, -1)))

    def to_record(self) -> dict:
        gd = self.gamma_data()
        orbit_id = {}
        for k, orb in enumerate(self.galois_orbits()):
            for i in orb:
                orbit_id[i] = k
        return {
            "index": gd.index, "genus": gd.genus, "v2": gd.v2, "v3": gd.v3,
            "cusps": [{"width": c.width, "lift": list(c.lift), "regular": c.regular,
                       "galois_orbit_id": orbit_id[i]} for i, c in enumerate(self.cusps())],
            "real_points": self.has_real_points(),
        }


def _cycle_length(perm: list[int], i: int) -> int:
    n, j = 1, perm[i]
    while j != i:
        j = perm[j]
        n += 1
    return n


def _class_meets(G: FinSubgroup, c: Mat) -> bool:
    """Whether G contains a GL2(Z/NZ)-conjugate of c."""
    N = G.N
    gens = full_group("GL2", N).gens
    seen = {c}
    stack = [c]
    while stack:
        x = stack.pop()
        if G.contains(x):
            return True
        for g in gens:
            y = conj(x, g, N)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


# ---------------------------------------------------------- functional API

def congruence_data(G: FinSubgroup) -> CongruenceData:
    return CongruenceData(G)


def cusps(G: FinSubgroup) -> list[CuspData]:
    return CongruenceData(G).cusps()


def cusp_galois(G: FinSubgroup | CongruenceData, i: int, m: int) -> int:
    data = G if isinstance(G, CongruenceData) else CongruenceData(G)
    return data.cusp_galois(i, m)


def elliptic_counts(G: FinSubgroup) -> tuple[int, int]:
    return CongruenceData(G).elliptic_counts()


def genus(G: FinSubgroup) -> GammaData:
    return CongruenceData(G).gamma_data()


def has_real_points(G: FinSubgroup) -> bool:
    N = G.N
    if not G.contains(as_tuple((-1, 0, 0, -1), N)):
        raise ValueError("-I must lie in G")
    return CongruenceData(G).has_real_points()


def stabilizes(G: FinSubgroup, x: Mat, g: Mat) -> bool:
    """Whether x g x^-1 lies in G."""
    N = G.N
    return G.contains(mat_mul(mat_mul(x, g, N), mat_inv(x, N), N))
