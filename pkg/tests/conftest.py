import os
import random
import sys

import pytest

from artifact.exactarith import unit_generators
from artifact.gl2 import FinSubgroup, is_invertible, mat_det

DATA = os.path.join(os.path.dirname(__file__), "data")

BOREL37_GENS = [(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)]
LEVEL27_GENS = [(1, 1, 0, 1), (1, 2, 3, 2), (2, 1, 9, 5)]
NORMAL54_GENS = [(7, 0, 36, 1), (7, 16, 0, 25), (16, 7, 3, 5)]
HE5180_GENS = [(1, 38, 0, 1), (1, 1, 37, 38), (13, 0, 0, 2391), (64, 3737, 37, 2970),
               (70, 851, 37, 5038), (42, 1961, 37, 4318)]
H1026_GENS = [(31, 198, 10, 97), (1, 0, 18, 1), (28, 729, 27, 703), (149, 681, 271, 448),
              (994, 9, 689, 790)]


def data_path(name):
    return os.path.join(DATA, name)


def random_det_full(rng, N, d=1):
    """A random subgroup of GL2(Z/N) with surjective determinant, lower-left entry divisible by d."""
    def draw(u=None):
        while True:
            a, b, c, e = (rng.randrange(N) for _ in range(4))
            g = (a, b, c - c % d, e)
            if is_invertible(g, N) and (u is None or mat_det(g, N) == u % N):
                return g

    gens = [draw(u) for u in unit_generators(N)]
    gens += [draw() for _ in range(rng.randrange(3))]
    if not gens:
        gens = [(1, 0, 0, 1)]
    return FinSubgroup(gens, N)


def make_corpus(count=60, seed=20240611, max_level=24):
    """Seeded corpus of det-full subgroups; a quarter are forced to contain -I."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        N = rng.randrange(2, max_level + 1)
        divs = [x for x in range(2, N + 1) if N % x == 0]
        d = rng.choice(divs) if rng.random() < 0.4 else 1
        G = random_det_full(rng, N, d)
        if len(out) % 4 == 0:
            G = FinSubgroup(G.gens + [(N - 1, 0, 0, N - 1)], N)
        out.append(G)
    return out


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
