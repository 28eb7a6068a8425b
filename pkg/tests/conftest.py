import itertools
import math

import numpy as np
import pytest

from succsample.generators import counterexample_points, generate
from succsample.metric import Instance


def brute_cost(points, centers, dist, weights=None):
    """Pure-python cost; independent of the package's vectorized paths."""
    weights = weights or [1.0] * len(points)
    return math.fsum(weights[x] * min(dist(points[x], points[c]) for c in centers)
                     for x in range(len(points)))


def brute_opt(points, k, dist, weights=None):
    best = None
    for c in itertools.combinations(range(len(points)), k):
        cost = brute_cost(points, c, dist, weights)
        if best is None or cost < best[0]:
            best = (cost, c)
    return best


@pytest.fixture
def path4():
    return generate("path", {"n": 4})


@pytest.fixture
def path64():
    return generate("path", {"n": 64})


@pytest.fixture
def five_point():
    return Instance.from_coordinates(counterexample_points(1000.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            for name, value in rep.user_properties:
                if name == "acceptance":
                    lines.append(("PASS" if rep.passed else "FAIL", value))
    if lines:
        terminalreporter.section("acceptance criteria")
        for status, (num, text) in sorted(lines, key=lambda x: x[1][0]):
            terminalreporter.write_line(f"[{status}] {num:>2}. {text}")
