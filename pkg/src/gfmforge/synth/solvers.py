"""Exact solvers for the structure-understanding tasks."""

from __future__ import annotations

import heapq
from collections import deque
from typing import Sequence

from gfmforge.graph import AttributedGraph, AttrValue, GraphError, degree, is_connected, neighbors


class SolverError(GraphError):
    pass


def solve_graph_size(g: AttributedGraph) -> tuple[int, int]:
    return g.n, g.m


def solve_attribute_retrieval(
    g: AttributedGraph, target: int | tuple[int, int], attr: str
) -> AttrValue:
    if isinstance(target, tuple):
        attrs = g.edge(*target).attrs
    else:
        g._check_node(target)
        attrs = g.nodes[target].attrs
    if attr not in attrs:
        raise SolverError(f"{target!r} has no attribute {attr!r}")
    return attrs[attr]


def solve_degree(g: AttributedGraph, v: int) -> int:
    return degree(g, v)


def edge_weight(g: AttributedGraph, u: int, v: int) -> int | float:
    return g.edge(u, v).attrs.get("weight", 1)


def walk_weight(g: AttributedGraph, path: Sequence[int]) -> int | float | None:
    """Total weight of ``path`` as a walk in ``g`` or None if a hop is not an edge."""
    if not path or any(type(v) is not int or not 0 <= v < g.n for v in path):
        return None
    total: int | float = 0
    for u, v in zip(path, path[1:]):
        if not g.has_edge(u, v):
            return None
        total += edge_weight(g, u, v)
    return total


def solve_shortest_path(
    g: AttributedGraph, s: int, t: int
) -> tuple[int | float, list[int]] | None:
    """``(length, witness)`` or None when ``t`` is unreachable from ``s``.

    Dijkstra when any edge carries a weight, BFS otherwise.
    """
    g._check_node(s)
    g._check_node(t)
    weighted = any("weight" in e.attrs for e in g.edges)
    prev: dict[int, int] = {}
    if not weighted:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if u == t:
                break
            for w in sorted(g.successors(u)):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    prev[w] = u
                    queue.append(w)
    else:
        dist = {s: 0}
        done: set[int] = set()
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == t:
                break
            for w in g.successors(u):
                if w in done:
                    continue
                if edge_weight(g, u, w) <= 0:
                    raise SolverError("shortest path needs positive edge weights")
                nd = d + edge_weight(g, u, w)
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    prev[w] = u
                    heapq.heappush(heap, (nd, w))
    if t not in dist:
        return None
    path = [t]
    while path[-1] != s:
        path.append(prev[path[-1]])
    path.reverse()
    return dist[t], path


def solve_max_triangle_sum(g: AttributedGraph) -> int | None:
    """Largest node-weight sum over all triangles (direction ignored), None if none."""
    weights = [nd.attrs.get("weight", 0) for nd in g.nodes]
    adj = [neighbors(g, v) for v in range(g.n)]
    best = None
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if v not in adj[u]:
                continue
            for w in range(v + 1, g.n):
                if w in adj[u] and w in adj[v]:
                    s = weights[u] + weights[v] + weights[w]
                    if best is None or s > best:
                        best = s
    return best


def solve_hamilton_path(g: AttributedGraph) -> tuple[bool, list[int] | None]:
    """Backtracking search for a path visiting every node once.

    Directed graphs follow edge direction. Prunes on isolated nodes, more than
    two degree-1 nodes and disconnection, and memoises failed (end, visited)
    states, which bounds the search by n * 2**n.
    """
    n = g.n
    if n == 0:
        return True, []
    if n == 1:
        return True, [0]
    if not is_connected(g):
        return False, None
    out = [sorted(g.successors(v)) for v in range(n)]
    und = [len(neighbors(g, v)) for v in range(n)]
    if min(und) == 0:
        return False, None
    ends = [v for v in range(n) if und[v] == 1]
    if len(ends) > 2:
        return False, None
    if g.directed:
        starts = [v for v in range(n) if not g.predecessors(v)]
        if len(starts) > 1:
            return False, None
        if not starts:
            starts = list(range(n))
    else:
        starts = ends[:1] if ends else list(range(n))

    full = (1 << n) - 1
    failed: set[tuple[int, int]] = set()
    path: list[int] = []

    def extend(u: int, mask: int) -> bool:
        if mask == full:
            return True
        if (u, mask) in failed:
            return False
        # fewest onward options first
        nxt = [w for w in out[u] if not mask >> w & 1]
        nxt.sort(key=lambda w: sum(1 for x in out[w] if not mask >> x & 1))
        for w in nxt:
            path.append(w)
            if extend(w, mask | 1 << w):
                return True
            path.pop()
        failed.add((u, mask))
        return False

    for s in starts:
        path[:] = [s]
        if extend(s, 1 << s):
            return True, list(path)
    return False, None


def is_hamilton_path(g: AttributedGraph, path: Sequence[int]) -> bool:
    return (
        len(path) == g.n
        and sorted(path) == list(range(g.n))
        and walk_weight(g, path) is not None
    )


def solve_subgraph_matching(g: AttributedGraph, pattern: AttributedGraph) -> bool:
    """Whether ``pattern`` embeds in ``g`` by an injective, edge-preserving map.

    Non-induced; direction must be preserved when both graphs are directed.
    """
    return find_subgraph_embedding(g, pattern) is not None


def find_subgraph_embedding(g: AttributedGraph, pattern: AttributedGraph) -> dict[int, int] | None:
    k = pattern.n
    if k > g.n:
        return None
    if k == 0:
        return {}
    pdeg = [len(neighbors(pattern, v)) for v in range(k)]
    gdeg = [len(neighbors(g, v)) for v in range(g.n)]
    # connected-first order: each next pattern node touches the mapped prefix when possible
    order: list[int] = []
    remaining = set(range(k))
    while remaining:
        linked = [v for v in remaining if neighbors(pattern, v) & set(order)]
        pool = linked or list(remaining)
        v = max(pool, key=lambda x: (pdeg[x], -x))
        order.append(v)
        remaining.discard(v)
    pedges = [(e.src, e.dst) for e in pattern.edges]
    directed = g.directed and pattern.directed

    def ok(a: int, b: int) -> bool:
        return g.has_edge(a, b) if directed else (g.has_edge(a, b) or g.has_edge(b, a))

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def place(i: int) -> bool:
        if i == k:
            return True
        p = order[i]
        for c in range(g.n):
            if c in used or gdeg[c] < pdeg[p]:
                continue
            consistent = all(
                ok(c if a == p else mapping[a], c if b == p else mapping[b])
                for a, b in pedges
                if (a == p or a in mapping) and (b == p or b in mapping) and p in (a, b)
            )
            if not consistent:
                continue
            mapping[p] = c
            used.add(c)
            if place(i + 1):
                return True
            del mapping[p]
            used.discard(c)
        return False

    return dict(mapping) if place(0) else None


def _two_colouring(g: AttributedGraph) -> list[int] | None:
    colour = [-1] * g.n
    for s in range(g.n):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in neighbors(g, u):
                if colour[w] < 0:
                    colour[w] = 1 - colour[u]
                    queue.append(w)
                elif colour[w] == colour[u]:
                    return None
    return colour


def solve_graph_structure(g: AttributedGraph) -> str:
    """Classify into cycle, path, star, complete, tree, bipartite-complete or general.

    Labels are tested in that order, so C3 is a cycle and P3 a path.
    Direction is ignored.
    """
    n = g.n
    pairs = {(min(e.pair), max(e.pair)) for e in g.edges}
    m = len(pairs)
    deg = [len(neighbors(g, v)) for v in range(n)]
    connected = is_connected(g)
    if n >= 3 and connected and all(d == 2 for d in deg):
        return "cycle"
    if n >= 2 and connected and m == n - 1 and max(deg) <= 2:
        return "path"
    if n >= 3 and connected and m == n - 1 and max(deg) == n - 1:
        return "star"
    if n >= 1 and m == n * (n - 1) // 2:
        return "complete"
    if connected and m == n - 1:
        return "tree"
    if connected and n >= 2:
        colour = _two_colouring(g)
        if colour is not None:
            a = colour.count(0)
            if m == a * (n - a):
                return "bipartite-complete"
    return "general"


def solve_graph_automorphism(g: AttributedGraph) -> bool:
    """True iff some non-identity node permutation preserves adjacency."""
    return find_nontrivial_automorphism(g) is not None


def find_nontrivial_automorphism(g: AttributedGraph) -> dict[int, int] | None:
    n = g.n
    sig = [(len(g.successors(v)), len(g.predecessors(v))) for v in range(n)]
    adj = {(e.src, e.dst) for e in g.edges}
    if not g.directed:
        adj |= {(b, a) for a, b in adj}
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def place(u: int, moved: bool) -> dict[int, int] | None:
        if u == n:
            return dict(mapping) if moved else None
        # once a node is moved, any completion is non-identity; try the identity image first
        cands = sorted(range(n), key=lambda c: (c != u, c))
        for c in cands:
            if c in used or sig[c] != sig[u]:
                continue
            if any(
                ((u, w) in adj) != ((c, mapping[w]) in adj)
                or ((w, u) in adj) != ((mapping[w], c) in adj)
                for w in mapping
            ):
                continue
            if ((u, u) in adj) != ((c, c) in adj):
                continue
            mapping[u] = c
            used.add(c)
            found = place(u + 1, moved or c != u)
            if found is not None:
                return found
            del mapping[u]
            used.discard(c)
        return None

    return place(0, False)
