"""Structure-understanding task generators.

Each generator samples a graph, computes the answer with the exact solver and
attaches the rule used to judge predictions. Constraints that a sampled graph
fails (unreachable endpoints, no triangle, wrong yes/no label) trigger a
resample, up to ``TaskConstraints.max_retries``.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field, replace
from typing import Any

from gfmforge.answers import Answer, VerifyRule, render_answer
from gfmforge.graph import (
    AttributedGraph,
    EdgeRecord,
    GraphError,
    NodeRecord,
    graph_from_dict,
    graph_to_dict,
    neighbors,
)
from gfmforge.synth import solvers
from gfmforge.synth.er import FAMILIES, FAMILY_MIN_N, ErConfig, family_graph, sample_er
from gfmforge.textualize.templates import TemplatePack, default_pack

TASK_KINDS = (
    "GraphSize-Node",
    "GraphSize-Edge",
    "AttributeRetrieval-Node",
    "AttributeRetrieval-Edge",
    "DegreeCount",
    "ShortestPath",
    "MaxTriangleSum",
    "HamiltonPath",
    "SubgraphMatching",
    "GraphStructure",
    "GraphAutomorphism",
)

TASK_LEVEL = {
    "GraphSize-Node": "entity",
    "GraphSize-Edge": "entity",
    "AttributeRetrieval-Node": "entity",
    "AttributeRetrieval-Edge": "entity",
    "DegreeCount": "entity",
    "ShortestPath": "path",
    "MaxTriangleSum": "path",
    "HamiltonPath": "path",
    "SubgraphMatching": "structure",
    "GraphStructure": "structure",
    "GraphAutomorphism": "structure",
}

BINARY_KINDS = ("HamiltonPath", "SubgraphMatching", "GraphAutomorphism")

_LEVEL_N = {"entity": (5, 25), "path": (5, 12), "structure": (4, 8)}

COLORS = ("red", "green", "blue", "yellow", "purple", "orange", "black", "white")
NODE_WEIGHT_RANGE = (1, 20)
EDGE_WEIGHT_RANGE = (1, 10)
NO_PATH = "no path"
NO_TRIANGLE = "no triangle"


def default_er_config(kind: str, seed: int = 0) -> ErConfig:
    return ErConfig(
        n_range=_LEVEL_N[TASK_LEVEL[kind]],
        p_range=(0.1, 0.6),
        weighted=kind == "ShortestPath",
        seed=seed,
    )


class GenerationError(GraphError):
    pass


class _Reject(Exception):
    pass


@dataclass(frozen=True)
class TaskConstraints:
    label: bool | None = None
    max_retries: int = 1000
    require_reachable: bool = True
    require_triangle: bool = True
    pattern_size: tuple[int, int] = (3, 5)
    hamilton_max_n: int = 12
    automorphism_max_n: int = 8

    @classmethod
    def from_dict(cls, data: dict | None) -> "TaskConstraints":
        kw = dict(data or {})
        if "pattern_size" in kw:
            kw["pattern_size"] = tuple(kw["pattern_size"])
        return cls(**kw)


@dataclass(frozen=True)
class TaskInstance:
    task: str
    graph: AttributedGraph
    query: str
    answer: Answer
    verifier: VerifyRule
    seed: int
    level: str
    target: Any = None
    slots: dict[str, Any] = field(default_factory=dict)
    witness: tuple[int, ...] | None = None
    pattern: AttributedGraph | None = None
    uid: str = ""
    description: str | None = None
    template: str | None = None

    @property
    def template_kind(self) -> str:
        """Template pack entry; differs from ``task`` for named semantic datasets."""
        return self.template or self.task

    def accepts(self, pred: Answer | None) -> bool:
        return self.verifier.accepts(pred, self.answer, self.graph)

    def to_dict(self) -> dict[str, Any]:
        return {
            "uid": self.uid,
            "task": self.task,
            "level": self.level,
            "seed": self.seed,
            "graph": graph_to_dict(self.graph),
            "target": list(self.target) if isinstance(self.target, tuple) else self.target,
            "query": self.query,
            "answer": self.answer.to_dict(),
            "verifier": self.verifier.to_dict(),
            "slots": self.slots,
            "witness": list(self.witness) if self.witness is not None else None,
            "pattern": graph_to_dict(self.pattern) if self.pattern is not None else None,
            "description": self.description,
            "template": self.template,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TaskInstance":
        target = d.get("target")
        if isinstance(target, list):
            target = tuple(target)
        return cls(
            task=d["task"],
            graph=graph_from_dict(d["graph"]),
            query=d["query"],
            answer=Answer.from_dict(d["answer"]),
            verifier=VerifyRule.from_dict(d["verifier"]),
            seed=d["seed"],
            level=d["level"],
            target=target,
            slots=d.get("slots", {}),
            witness=tuple(d["witness"]) if d.get("witness") is not None else None,
            pattern=graph_from_dict(d["pattern"]) if d.get("pattern") else None,
            uid=d.get("uid", ""),
            description=d.get("description"),
            template=d.get("template"),
        )


def _decorate(rng: random.Random, g: AttributedGraph, node_color: bool = True, edge_weight: bool = True) -> AttributedGraph:
    nodes = []
    for nd in g.nodes:
        attrs = {"weight": rng.randint(*NODE_WEIGHT_RANGE)}
        if node_color:
            attrs["color"] = rng.choice(COLORS)
        nodes.append(NodeRecord(nd.id, attrs))
    edges = []
    for e in g.edges:
        attrs = dict(e.attrs)
        if edge_weight and "weight" not in attrs:
            attrs["weight"] = rng.randint(*EDGE_WEIGHT_RANGE)
        edges.append(EdgeRecord(e.src, e.dst, attrs))
    return g.replace(nodes=tuple(nodes), edges=tuple(edges))


def _attr_answer(value: Any) -> Answer:
    if isinstance(value, bool):
        return Answer("boolean", value)
    if isinstance(value, int):
        return Answer("integer", value)
    if isinstance(value, float):
        return Answer("real", value)
    return Answer("label", value)


def _attr_rule(value: Any) -> VerifyRule:
    if isinstance(value, bool):
        return VerifyRule("boolean")
    if isinstance(value, float):
        return VerifyRule("numeric", {"eps": 1e-6})
    return VerifyRule("exact")


def _mapping_text(mapping: dict[int, int], names: dict[int, str] | None = None) -> str:
    items = sorted(mapping.items())
    return ", ".join(f"{names[a] if names else a} to {b}" for a, b in items)


# -- per-kind generators -----------------------------------------------------------
# Each returns a dict of TaskInstance fields (minus query/seed/level) or raises _Reject.


def _gen_graph_size(kind: str):
    def gen(rng, cfg, con):
        g = sample_er(rng, cfg)
        n, m = solvers.solve_graph_size(g)
        return {"graph": g, "answer": Answer("integer", n if kind == "GraphSize-Node" else m),
                "verifier": VerifyRule("exact")}

    return gen


def _gen_attr_node(rng, cfg, con):
    g = _decorate(rng, sample_er(rng, cfg))
    v = rng.randrange(g.n)
    attr = rng.choice(sorted(g.nodes[v].attrs))
    value = solvers.solve_attribute_retrieval(g, v, attr)
    return {"graph": g, "target": v, "answer": _attr_answer(value), "verifier": _attr_rule(value),
            "slots": {"node": v, "attr": attr}}


def _gen_attr_edge(rng, cfg, con):
    g = _decorate(rng, sample_er(rng, cfg))
    if g.m == 0:
        raise _Reject("graph has at least one edge")
    e = g.edges[rng.randrange(g.m)]
    attr = rng.choice(sorted(e.attrs))
    value = solvers.solve_attribute_retrieval(g, e.pair, attr)
    return {"graph": g, "target": e.pair, "answer": _attr_answer(value), "verifier": _attr_rule(value),
            "slots": {"source": e.src, "target": e.dst, "attr": attr}}


def _gen_degree(rng, cfg, con):
    g = sample_er(rng, cfg)
    v = rng.randrange(g.n)
    return {"graph": g, "target": v, "answer": Answer("integer", solvers.solve_degree(g, v)),
            "verifier": VerifyRule("exact"), "slots": {"node": v}}


def _gen_shortest_path(rng, cfg, con):
    g = sample_er(rng, cfg)
    s = rng.randrange(g.n)
    t = rng.randrange(g.n - 1)
    t += t >= s
    weighted = cfg.weighted
    note = ('Edge lengths are given by the "weight" attribute.' if weighted
            else "Every edge has length 1.")
    slots = {"source": s, "target": t, "weight_note": note}
    res = solvers.solve_shortest_path(g, s, t)
    if res is None:
        if con.require_reachable:
            raise _Reject(f"node {t} reachable from node {s}")
        return {"graph": g, "target": (s, t), "answer": Answer("label", NO_PATH),
                "verifier": VerifyRule("exact"), "slots": {**slots, "path": "none"}}
    length, path = res
    return {"graph": g, "target": (s, t), "answer": Answer("integer", int(length)),
            "verifier": VerifyRule("path", {"path_kind": "shortest", "source": s, "target": t}),
            "witness": tuple(path), "slots": {**slots, "path": " -> ".join(map(str, path))}}


def _gen_triangle(rng, cfg, con):
    g = _decorate(rng, sample_er(rng, cfg), node_color=False, edge_weight=False)
    best = solvers.solve_max_triangle_sum(g)
    if best is None:
        if con.require_triangle:
            raise _Reject("graph contains a triangle")
        return {"graph": g, "answer": Answer("label", NO_TRIANGLE), "verifier": VerifyRule("exact"),
                "slots": {"detail": "none"}}
    w = [nd.attrs["weight"] for nd in g.nodes]
    tri = next(
        (u, v, x)
        for u in range(g.n) for v in range(u + 1, g.n) for x in range(v + 1, g.n)
        if g.has_edge(u, v) or g.has_edge(v, u)
        if (g.has_edge(u, x) or g.has_edge(x, u)) and (g.has_edge(v, x) or g.has_edge(x, v))
        and w[u] + w[v] + w[x] == best
    )
    return {"graph": g, "answer": Answer("integer", best), "verifier": VerifyRule("exact"),
            "slots": {"detail": "{" + ", ".join(map(str, tri)) + "}"}}


def _gen_hamilton(rng, cfg, con):
    cfg_n = (min(cfg.n_range[0], con.hamilton_max_n), min(cfg.n_range[1], con.hamilton_max_n))
    g = sample_er(rng, replace(cfg, n_range=cfg_n))
    exists, witness = solvers.solve_hamilton_path(g)
    if con.label is not None and exists != con.label:
        raise _Reject(f"Hamilton path label {'Yes' if con.label else 'No'}")
    if exists:
        detail = "Yes. One such path is " + " -> ".join(map(str, witness)) + "."
    else:
        detail = "No. No ordering of the nodes forms a path through every node."
    return {"graph": g, "answer": Answer("boolean", exists),
            "verifier": VerifyRule("path", {"path_kind": "hamilton"}),
            "witness": tuple(witness) if witness else None, "slots": {"detail": detail}}


def _pattern_from(rng: random.Random, g: AttributedGraph, k: int) -> AttributedGraph:
    start = rng.randrange(g.n)
    chosen = [start]
    frontier = set(neighbors(g, start))
    while len(chosen) < k:
        if not frontier:
            raise _Reject(f"connected {k}-node subgraph to use as pattern")
        nxt = rng.choice(sorted(frontier))
        chosen.append(nxt)
        frontier |= neighbors(g, nxt)
        frontier -= set(chosen)
    inside = set(chosen)
    induced = [e.pair for e in g.edges if e.src in inside and e.dst in inside]
    rng.shuffle(induced)
    # random spanning tree first (ignoring direction), then each extra edge with probability 1/2
    comp = {v: v for v in chosen}

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    keep = []
    for a, b in induced:
        ra, rb = find(a), find(b)
        if ra != rb:
            comp[ra] = rb
            keep.append((a, b))
        elif rng.random() < 0.5:
            keep.append((a, b))
    perm = list(range(k))
    rng.shuffle(perm)
    relabel = {old: perm[i] for i, old in enumerate(chosen)}
    edges = sorted((relabel[a], relabel[b]) for a, b in keep)
    return AttributedGraph.build(k, edges, directed=g.directed)


def _random_pattern(rng: random.Random, k: int, directed: bool) -> AttributedGraph:
    from gfmforge.graph import is_connected
    from gfmforge.synth.er import er_graph

    p = rng.uniform(0.3, 1.0)
    pat = er_graph(rng, k, p, directed)
    if not is_connected(pat):
        raise _Reject("connected random pattern")
    return pat


def _gen_subgraph(rng, cfg, con):
    g = sample_er(rng, cfg)
    lo, hi = con.pattern_size
    if g.n < lo:
        raise _Reject(f"graph with at least {lo} nodes")
    k = rng.randint(lo, min(hi, g.n))
    want_yes = con.label if con.label is not None else rng.random() < 0.5
    pat = _pattern_from(rng, g, k) if want_yes else _random_pattern(rng, k, g.directed)
    emb = solvers.find_subgraph_embedding(g, pat)
    found = emb is not None
    if con.label is not None and found != con.label:
        raise _Reject(f"subgraph matching label {'Yes' if con.label else 'No'}")
    names = {i: string.ascii_lowercase[i] for i in range(k)}
    arrow = "->" if g.directed else "-"
    slots = {
        "pattern_nodes": ", ".join(names[i] for i in range(k)),
        "pattern_edges": ", ".join(f"{names[e.src]}{arrow}{names[e.dst]}" for e in pat.edges) or "none",
    }
    if found:
        slots["detail"] = f"Yes. One match maps {_mapping_text(emb, names)}."
    else:
        slots["detail"] = "No. No assignment of pattern nodes to distinct graph nodes preserves every pattern edge."
    return {"graph": g, "pattern": pat, "answer": Answer("boolean", found),
            "verifier": VerifyRule("boolean"), "slots": slots}


def _gen_structure(rng, cfg, con):
    lo, hi = cfg.n_range
    fams = [f for f in FAMILIES if FAMILY_MIN_N[f] <= hi]
    fam = rng.choice(fams)
    n = rng.randint(max(lo, FAMILY_MIN_N[fam]), hi)
    g = family_graph(rng, fam, n)
    label = solvers.solve_graph_structure(g)
    if label != fam:
        raise GenerationError(f"family generator produced {label!r} for {fam!r}")
    return {"graph": g, "answer": Answer("label", label), "verifier": VerifyRule("exact"),
            "slots": {"family": fam}}


def _gen_automorphism(rng, cfg, con):
    cfg_n = (min(cfg.n_range[0], con.automorphism_max_n), min(cfg.n_range[1], con.automorphism_max_n))
    g = sample_er(rng, replace(cfg, n_range=cfg_n))
    auto = solvers.find_nontrivial_automorphism(g)
    found = auto is not None
    if con.label is not None and found != con.label:
        raise _Reject(f"automorphism label {'Yes' if con.label else 'No'}")
    if found:
        moved = {a: b for a, b in auto.items() if a != b}
        detail = f"Yes. The permutation mapping {_mapping_text(moved)} (fixing all other nodes) maps edges to edges."
    else:
        detail = "No. Only the identity permutation maps edges to edges."
    return {"graph": g, "answer": Answer("boolean", found), "verifier": VerifyRule("boolean"),
            "slots": {"detail": detail}}


_GENERATORS = {
    "GraphSize-Node": _gen_graph_size("GraphSize-Node"),
    "GraphSize-Edge": _gen_graph_size("GraphSize-Edge"),
    "AttributeRetrieval-Node": _gen_attr_node,
    "AttributeRetrieval-Edge": _gen_attr_edge,
    "DegreeCount": _gen_degree,
    "ShortestPath": _gen_shortest_path,
    "MaxTriangleSum": _gen_triangle,
    "HamiltonPath": _gen_hamilton,
    "SubgraphMatching": _gen_subgraph,
    "GraphStructure": _gen_structure,
    "GraphAutomorphism": _gen_automorphism,
}


def gen_task(
    kind: str,
    cfg: ErConfig | None = None,
    constraints: TaskConstraints | None = None,
    templates: TemplatePack | None = None,
) -> TaskInstance:
    """Generate one instance of ``kind``; deterministic in ``cfg.seed``."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown task kind {kind!r}; expected one of {TASK_KINDS}")
    cfg = cfg or default_er_config(kind)
    con = constraints or TaskConstraints()
    pack = templates or default_pack()
    rng = random.Random(cfg.seed)
    last = "none"
    for _ in range(con.max_retries):
        try:
            fields_ = _GENERATORS[kind](rng, cfg, con)
        except _Reject as exc:
            last = str(exc)
            continue
        slots = dict(fields_.pop("slots", {}))
        slots["value"] = render_answer(fields_["answer"])
        directed = fields_["graph"].directed and kind != "GraphStructure"
        query = pack.render(kind, "query", slots, directed=directed)
        inst = TaskInstance(task=kind, query=query, seed=cfg.seed, level=TASK_LEVEL[kind], slots=slots, **fields_)
        if not inst.accepts(inst.answer):
            raise GenerationError(f"{kind}: verifier rejects the canonical answer")
        return inst
    raise GenerationError(
        f"{kind}: retry budget of {con.max_retries} exhausted; unsatisfied constraint: {last}"
    )
