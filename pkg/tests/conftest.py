import itertools
import random

import pytest

from iabc import kernels
from iabc.generators import chord, complete, core_network, hypercube
from iabc.graph import Digraph


def _all_digraphs(n):
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        yield Digraph(n, frozenset(p for p, b in zip(pairs, bits) if b))


def _random_digraphs(count, seed=20120202):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(4, 6)
        p = rng.choice((0.5, 0.7, 0.85, 0.95))
        out.append(Digraph(n, frozenset((i, j) for i in range(n) for j in range(n) if i != j and rng.random() < p)))
    return out


NAMED_SMALL = {
    "K2": complete(2),
    "K3": complete(3),
    "K4": complete(4),
    "K5": complete(5),
    "K6": complete(6),
    "chord4": chord(4, 1),
    "chord5": chord(5, 1),
    "chord6": chord(6, 1),
    "core4": core_network(4, 1),
    "core5": core_network(5, 1),
    "core6": core_network(6, 1),
    "cube1": hypercube(1),
    "cube2": hypercube(2),
}

# every graph with n <= 6 that the suite cross-checks against the brute-force oracle
SMALL_CORPUS = (
    [(name, g) for name, g in NAMED_SMALL.items()]
    + [(f"all3_{k}", g) for k, g in enumerate(_all_digraphs(3))]
    + [(f"rand_{k}", g) for k, g in enumerate(_random_digraphs(40))]
)


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request, monkeypatch):
    """Run a test once per available witness-scan backend."""
    monkeypatch.setattr(kernels, "_scan", kernels.backends()[request.param])
    return request.param


# --- acceptance summary ------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion this test implements")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    num, title = marker.args
    ok = rep.passed if rep.when == "call" else not rep.failed
    prev = _CRITERIA.get(num, (title, True))
    _CRITERIA[num] = (title, prev[1] and ok and not rep.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok = _CRITERIA[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num:>2}: {title}")
