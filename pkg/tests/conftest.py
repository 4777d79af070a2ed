from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gfmforge.graph import AttributedGraph  # noqa: E402

ATTR_NAMES = ("color", "weight", "label", "score", "flag", "note", "x_1")
TRICKY_TEXT = (
    "", " padded ", "42", "-3.5", "true", "False", "1e5", "a|b", "back\\slash", '"quoted"',
    "it's", "<tag> & amp", "naïve café", "日本語", "none", "unknown", "a -> b", "#hash", "x y z",
)


def random_value(rng: random.Random):
    kind = rng.randrange(4)
    if kind == 0:
        return rng.choice((0, 1, -1, 7, 2**62, -(2**63), rng.randint(-10**6, 10**6)))
    if kind == 1:
        return rng.choice((0.5, -2.25, 1.0, 1e-300, 6.02e23, rng.uniform(-1e3, 1e3)))
    if kind == 2:
        return rng.random() < 0.5
    if rng.random() < 0.5:
        return rng.choice(TRICKY_TEXT)
    return "".join(rng.choice("abcXYZ 019_-.") for _ in range(rng.randint(1, 8)))


def random_attr_graph(rng: random.Random, n_max: int = 8, attr_p: float = 0.6) -> AttributedGraph:
    n = rng.randint(0, n_max)
    directed = rng.random() < 0.5
    nodes = [
        {name: random_value(rng) for name in ATTR_NAMES if rng.random() < attr_p / 2}
        for _ in range(n)
    ]
    edges = []
    seen = set()
    for u in range(n):
        for v in range(n):
            if u == v or rng.random() > 0.3:
                continue
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            attrs = {name: random_value(rng) for name in ATTR_NAMES[2:] if rng.random() < attr_p / 2}
            if rng.random() < 0.5:
                attrs["weight"] = rng.randint(1, 10)
            edges.append((u, v, attrs))
    return AttributedGraph.build(nodes, edges, directed=directed)


@pytest.fixture
def rng():
    return random.Random(1234)


# acceptance lines collected by test_acceptance, echoed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
