"""Erdős–Rényi sampling and the closed graph families used by the structure task."""

from __future__ import annotations

import random
from dataclasses import dataclass

from gfmforge.graph import AttributedGraph, EdgeRecord, NodeRecord


@dataclass(frozen=True)
class ErConfig:
    n_range: tuple[int, int] = (5, 25)
    p_range: tuple[float, float] = (0.1, 0.6)
    directed: bool = False
    weighted: bool = False
    weight_range: tuple[int, int] = (1, 10)
    seed: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.n_range
        if lo < 2 or hi < lo:
            raise ValueError(f"n_range must satisfy 2 <= low <= high, got {self.n_range}")
        plo, phi = self.p_range
        if not 0.0 <= plo <= phi <= 1.0:
            raise ValueError(f"p_range must lie in [0, 1] with low <= high, got {self.p_range}")
        wlo, whi = self.weight_range
        if wlo < 1 or whi < wlo:
            raise ValueError(f"weight_range must satisfy 1 <= low <= high, got {self.weight_range}")

    @classmethod
    def from_dict(cls, data: dict) -> "ErConfig":
        kw = dict(data)
        for key in ("n_range", "p_range", "weight_range"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "n_range": list(self.n_range),
            "p_range": list(self.p_range),
            "directed": self.directed,
            "weighted": self.weighted,
            "weight_range": list(self.weight_range),
            "seed": self.seed,
        }


def sample_er(rng: random.Random, cfg: ErConfig) -> AttributedGraph:
    n = rng.randint(*cfg.n_range)
    p = rng.uniform(*cfg.p_range)
    return er_graph(rng, n, p, cfg.directed, cfg.weight_range if cfg.weighted else None)


def er_graph(
    rng: random.Random,
    n: int,
    p: float,
    directed: bool = False,
    weight_range: tuple[int, int] | None = None,
) -> AttributedGraph:
    if directed:
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = []
    for u, v in pairs:
        if rng.random() < p:
            attrs = {"weight": rng.randint(*weight_range)} if weight_range else {}
            edges.append(EdgeRecord(u, v, attrs))
    nodes = tuple(NodeRecord(i, {}) for i in range(n))
    return AttributedGraph(directed, nodes, tuple(edges), {})


def gen_er(cfg: ErConfig) -> AttributedGraph:
    """One ER graph, fully determined by ``cfg.seed``."""
    return sample_er(random.Random(cfg.seed), cfg)


# -- structure families ----------------------------------------------------------

FAMILIES = ("cycle", "path", "star", "complete", "tree", "bipartite-complete", "general")

# smallest n at which a family is not captured by an earlier label in
# the classification priority order
FAMILY_MIN_N = {
    "cycle": 3,
    "path": 2,
    "star": 4,
    "complete": 4,
    "tree": 5,
    "bipartite-complete": 5,
    "general": 4,
}


def _relabel(rng: random.Random, n: int, pairs: list[tuple[int, int]]) -> AttributedGraph:
    perm = list(range(n))
    rng.shuffle(perm)
    edges = sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in pairs)
    return AttributedGraph.build(n, edges)


def _random_tree_pairs(rng: random.Random, n: int) -> list[tuple[int, int]]:
    # decode a uniform Prüfer sequence
    seq = [rng.randrange(n) for _ in range(n - 2)]
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    pairs = []
    for x in seq:
        leaf = min(i for i in range(n) if deg[i] == 1)
        pairs.append((leaf, x))
        deg[leaf] -= 1
        deg[x] -= 1
    u, v = [i for i in range(n) if deg[i] == 1]
    pairs.append((u, v))
    return pairs


def family_graph(rng: random.Random, family: str, n: int) -> AttributedGraph:
    """A graph of ``family`` on ``n`` nodes with randomly permuted node ids.

    ``tree`` excludes paths and stars, ``bipartite-complete`` excludes stars and
    C4, and ``general`` is ER rejection-sampled to fall outside every named
    family; callers must respect :data:`FAMILY_MIN_N`.
    """
    from gfmforge.synth.solvers import solve_graph_structure

    if n < FAMILY_MIN_N[family]:
        raise ValueError(f"{family} needs n >= {FAMILY_MIN_N[family]}, got {n}")
    if family == "cycle":
        pairs = [(i, (i + 1) % n) for i in range(n)]
    elif family == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif family == "star":
        pairs = [(0, i) for i in range(1, n)]
    elif family == "complete":
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    elif family == "tree":
        while True:
            pairs = _random_tree_pairs(rng, n)
            if solve_graph_structure(AttributedGraph.build(n, pairs)) == "tree":
                break
    elif family == "bipartite-complete":
        a = rng.randint(2, n - 2)
        pairs = [(u, v) for u in range(a) for v in range(a, n)]
    elif family == "general":
        while True:
            g = er_graph(rng, n, rng.uniform(0.2, 0.8))
            if solve_graph_structure(g) == "general":
                pairs = [e.pair for e in g.edges]
                break
    else:
        raise ValueError(f"unknown family {family!r}")
    return _relabel(rng, n, pairs)


__all__ = [
    "ErConfig",
    "FAMILIES",
    "FAMILY_MIN_N",
    "er_graph",
    "family_graph",
    "gen_er",
    "sample_er",
]
