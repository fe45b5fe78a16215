import itertools
import math
import sys

import numpy as np
import pytest

from burstymac.core import AntennaConfig


def brute_force_bounds(M, N, L, law, subset):
    """Direct evaluation of both cut terms by looping over every activity pattern.

    ``law`` maps frozenset patterns to probability; nothing from the package is used.
    """
    recv = trans = 0.0
    for pattern, prob in law.items():
        active = sum(M[i - 1] for i in pattern if i in subset)
        recv += prob * min(active, N + L)
        trans += prob * min(active + L, N)
    return recv, trans


def independent_law(p, K):
    law = {}
    for bits in itertools.product([0, 1], repeat=K):
        pattern = frozenset(i + 1 for i, b in enumerate(bits) if b)
        law[pattern] = math.prod(p if b else 1 - p for b in bits)
    return law


def dependent_law(p, K):
    return {frozenset(range(1, K + 1)): p, frozenset(): 1 - p}


def random_symmetric_configs(n, seed, K_max=8, max_antennas=8, L_min=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        K = int(rng.integers(1, K_max + 1))
        M = int(rng.integers(1, max_antennas + 1))
        N = int(rng.integers(1, max_antennas + 1))
        L = int(rng.integers(L_min, max_antennas + 1))
        out.append(AntennaConfig(K, M, N, L))
    return out


@pytest.fixture
def example1():
    return AntennaConfig(2, 1, 1, 1)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.summary_lines():
        terminalreporter.write_line(line)
