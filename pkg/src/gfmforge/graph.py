"""Attributed graph model, canonical JSON graph files and basic queries."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

AttrValue = Union[str, int, float, bool]

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# graph_attrs flags understood by the validator
ALLOW_SELF_LOOPS = "allow_self_loops"
MULTIGRAPH = "multigraph"
# set on feature-masked graphs, whose weights may read "unknown"
# placeholder for a hidden attribute value; the only text allowed as an edge weight
MASK_TOKEN = "unknown"


class GraphError(Exception):
    """Base class for graph model errors."""


class GraphParseError(GraphError):
    pass


class GraphValidationError(GraphError):
    pass


class NodeLookupError(GraphError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown node"


def attr_kind(value: Any) -> str:
    """Return the AttrValue tag of ``value``: text, integer, real or boolean."""
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "real"
    if isinstance(value, str):
        return "text"
    raise GraphValidationError(f"unsupported attribute value {value!r}")


def check_attr_value(value: Any, where: str) -> None:
    kind = attr_kind(value)
    if kind == "real" and not math.isfinite(value):
        raise GraphValidationError(f"{where}: non-finite real {value!r}")
    if kind == "integer" and not INT64_MIN <= value <= INT64_MAX:
        raise GraphValidationError(f"{where}: integer out of 64-bit range")
    if kind == "text" and any(ord(c) < 32 or ord(c) == 127 for c in value):
        raise GraphValidationError(f"{where}: control character in text value")


def _check_attrs(attrs: Mapping[str, Any], where: str) -> None:
    for name, value in attrs.items():
        if not isinstance(name, str) or not name:
            raise GraphValidationError(f"{where}: attribute names must be nonempty strings")
        check_attr_value(value, f"{where}.{name}")


def typed(value: AttrValue) -> tuple[str, AttrValue]:
    # bool == int in Python; equality must not conflate them
    return (attr_kind(value), value)


def typed_attrs(attrs: Mapping[str, AttrValue]) -> tuple:
    return tuple(sorted((k, typed(v)) for k, v in attrs.items()))


@dataclass(frozen=True)
class NodeRecord:
    id: int
    attrs: dict[str, AttrValue] = field(default_factory=dict)


@dataclass(frozen=True)
class EdgeRecord:
    src: int
    dst: int
    attrs: dict[str, AttrValue] = field(default_factory=dict)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Immutable attributed (di)graph with contiguous integer node ids.

    ``graph_attrs`` carries graph-level metadata and is free-form JSON; node and
    edge attributes are restricted to text, integer, real and boolean values.
    Equality is structural and type-aware (``True`` differs from ``1``) and
    ignores ``graph_attrs``; use :meth:`identical` to include them.
    """

    directed: bool = False
    nodes: tuple[NodeRecord, ...] = ()
    edges: tuple[EdgeRecord, ...] = ()
    graph_attrs: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        self.validate()

    @classmethod
    def build(
        cls,
        n: int | Iterable[Mapping[str, AttrValue]],
        edges: Iterable[tuple] = (),
        directed: bool = False,
        graph_attrs: Mapping[str, Any] | None = None,
    ) -> "AttributedGraph":
        """Convenience constructor.

        ``n`` is either a node count or an iterable of per-node attribute maps;
        each edge is ``(src, dst)`` or ``(src, dst, attrs)``.
        """
        if isinstance(n, int):
            node_attrs: list[Mapping[str, AttrValue]] = [{} for _ in range(n)]
        else:
            node_attrs = list(n)
        nodes = tuple(NodeRecord(i, dict(a)) for i, a in enumerate(node_attrs))
        recs = []
        for e in edges:
            attrs = dict(e[2]) if len(e) > 2 else {}
            recs.append(EdgeRecord(int(e[0]), int(e[1]), attrs))
        return cls(directed, nodes, tuple(recs), dict(graph_attrs or {}))

    def validate(self) -> None:
        for i, node in enumerate(self.nodes):
            if type(node.id) is not int or node.id != i:
                raise GraphValidationError(
                    f"nodes[{i}]: node ids must be contiguous 0..n-1 in order, got {node.id!r}"
                )
            _check_attrs(node.attrs, f"nodes[{i}].attrs")
        n = len(self.nodes)
        loops_ok = bool(self.graph_attrs.get(ALLOW_SELF_LOOPS, False))
        multi_ok = bool(self.graph_attrs.get(MULTIGRAPH, False))
        seen: set[tuple[int, int]] = set()
        for k, e in enumerate(self.edges):
            for end in (e.src, e.dst):
                if type(end) is not int or not 0 <= end < n:
                    raise GraphValidationError(
                        f"edges[{k}]: endpoint {end!r} does not reference an existing node"
                    )
            if e.src == e.dst and not loops_ok:
                raise GraphValidationError(f"edges[{k}]: self-loop on node {e.src}")
            key = e.pair if self.directed else (min(e.pair), max(e.pair))
            if key in seen and not multi_ok:
                raise GraphValidationError(f"edges[{k}]: parallel edge {key}")
            seen.add(key)
            _check_attrs(e.attrs, f"edges[{k}].attrs")
            w = e.attrs.get("weight")
            if w == MASK_TOKEN:
                continue
            if w is not None and (isinstance(w, (bool, str)) or not math.isfinite(w)):
                raise GraphValidationError(f"edges[{k}]: weight must be a finite number")

    # -- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def _out(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            out[e.src].append(e.dst)
            if not self.directed:
                out[e.dst].append(e.src)
        return tuple(tuple(x) for x in out)

    @cached_property
    def _in(self) -> tuple[tuple[int, ...], ...]:
        if not self.directed:
            return self._out
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            inn[e.dst].append(e.src)
        return tuple(tuple(x) for x in inn)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        """Map ``(src, dst)`` (both orientations when undirected) to edge position."""
        idx: dict[tuple[int, int], int] = {}
        for k, e in enumerate(self.edges):
            idx.setdefault(e.pair, k)
            if not self.directed:
                idx.setdefault((e.dst, e.src), k)
        return idx

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edge_index

    def edge(self, u: int, v: int) -> EdgeRecord:
        try:
            return self.edges[self.edge_index[(u, v)]]
        except KeyError:
            raise GraphError(f"no edge ({u}, {v})") from None

    def _check_node(self, v: int) -> None:
        if type(v) is not int or not 0 <= v < self.n:
            raise NodeLookupError(f"unknown node id {v!r}")

    def successors(self, v: int) -> tuple[int, ...]:
        self._check_node(v)
        return self._out[v]

    def predecessors(self, v: int) -> tuple[int, ...]:
        self._check_node(v)
        return self._in[v]

    # -- equality --------------------------------------------------------

    def structure_key(self) -> tuple:
        return (
            self.directed,
            tuple(typed_attrs(nd.attrs) for nd in self.nodes),
            tuple((e.src, e.dst, typed_attrs(e.attrs)) for e in self.edges),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return self.structure_key() == other.structure_key()

    def __hash__(self) -> int:
        return hash(self.structure_key())

    def identical(self, other: "AttributedGraph") -> bool:
        return self == other and self.graph_attrs == other.graph_attrs

    def replace(self, **changes: Any) -> "AttributedGraph":
        fields_ = {
            "directed": self.directed,
            "nodes": self.nodes,
            "edges": self.edges,
            "graph_attrs": self.graph_attrs,
        }
        fields_.update(changes)
        return AttributedGraph(**fields_)


# -- queries -----------------------------------------------------------------


def degree(g: AttributedGraph, v: int) -> int:
    """Incident edge count; total (in + out) degree for directed graphs."""
    g._check_node(v)
    if g.directed:
        return len(g._out[v]) + len(g._in[v])
    return len(g._out[v])


def neighbors(g: AttributedGraph, v: int, direction: str = "both") -> set[int]:
    """Adjacent nodes of ``v``. ``direction`` (out/in/both) only matters when directed."""
    g._check_node(v)
    if not g.directed or direction == "both":
        return set(g._out[v]) | set(g._in[v])
    if direction == "out":
        return set(g._out[v])
    if direction == "in":
        return set(g._in[v])
    raise ValueError(f"direction must be out, in or both, not {direction!r}")


def induced_subgraph(
    g: AttributedGraph, keep: Iterable[int], graph_attrs: Mapping[str, Any] | None = None
) -> AttributedGraph:
    """Subgraph induced on ``keep``, relabelled 0..k-1 in ascending old-id order."""
    old = sorted(set(keep))
    new_of = {o: i for i, o in enumerate(old)}
    nodes = tuple(NodeRecord(new_of[o], dict(g.nodes[o].attrs)) for o in old)
    edges = tuple(
        EdgeRecord(new_of[e.src], new_of[e.dst], dict(e.attrs))
        for e in g.edges
        if e.src in new_of and e.dst in new_of
    )
    attrs = dict(g.graph_attrs) if graph_attrs is None else dict(graph_attrs)
    return AttributedGraph(g.directed, nodes, edges, attrs)


def ego_graph(g: AttributedGraph, center: int | tuple[int, int], radius: int) -> AttributedGraph:
    """Induced subgraph within ``radius`` hops (ignoring direction) of a node or edge.

    The old id of every kept node is recorded in ``graph_attrs["ego_origin"]``
    (list index is the new id) and the center's new id(s) in ``"ego_center"``.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    sources = list(center) if isinstance(center, tuple) else [center]
    for s in sources:
        g._check_node(s)
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        if dist[u] == radius:
            continue
        for w in neighbors(g, u):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    old = sorted(dist)
    new_of = {o: i for i, o in enumerate(old)}
    attrs = dict(g.graph_attrs)
    attrs["ego_origin"] = old
    attrs["ego_center"] = [new_of[s] for s in sources]
    return induced_subgraph(g, old, attrs)


def is_connected(g: AttributedGraph) -> bool:
    """Weak connectivity. The empty graph counts as connected."""
    if g.n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in neighbors(g, u):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


# -- canonical JSON files ------------------------------------------------------


def format_real(x: float) -> str:
    """Shortest round-trip decimal for a finite float (``1.5``, ``2.0``, ``1e-07``)."""
    return repr(float(x))


def graph_to_dict(g: AttributedGraph) -> dict[str, Any]:
    return {
        "directed": g.directed,
        "graph": _sorted_json(g.graph_attrs),
        "nodes": [{"id": nd.id, "attrs": dict(sorted(nd.attrs.items()))} for nd in g.nodes],
        "edges": [
            {"src": e.src, "dst": e.dst, "attrs": dict(sorted(e.attrs.items()))} for e in g.edges
        ],
    }


def _sorted_json(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {k: _sorted_json(value[k]) for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_sorted_json(v) for v in value]
    return value


def dumps_graph(g: AttributedGraph, compact: bool = False) -> str:
    """Canonical text of ``g``: fixed key order, sorted attribute maps, trailing LF."""
    data = graph_to_dict(g)
    if compact:
        text = json.dumps(data, ensure_ascii=False, separators=(",", ":"), allow_nan=False)
    else:
        text = json.dumps(data, ensure_ascii=False, indent=2, allow_nan=False)
    return text + "\n"


def _expect(cond: bool, where: str, msg: str) -> None:
    if not cond:
        raise GraphParseError(f"{where}: {msg}")


def graph_from_dict(data: Any) -> AttributedGraph:
    _expect(isinstance(data, dict), "$", "top level must be an object")
    missing = {"directed", "nodes", "edges"} - set(data)
    _expect(not missing, "$", f"missing keys {sorted(missing)}")
    extra = set(data) - {"directed", "graph", "nodes", "edges"}
    _expect(not extra, "$", f"unexpected keys {sorted(extra)}")
    _expect(isinstance(data["directed"], bool), "$.directed", "must be a boolean")
    gattrs = data.get("graph", {})
    _expect(isinstance(gattrs, dict), "$.graph", "must be an object")
    _expect(isinstance(data["nodes"], list), "$.nodes", "must be an array")
    _expect(isinstance(data["edges"], list), "$.edges", "must be an array")
    nodes = []
    for i, nd in enumerate(data["nodes"]):
        where = f"$.nodes[{i}]"
        _expect(isinstance(nd, dict) and "id" in nd, where, "must be an object with an id")
        _expect(type(nd["id"]) is int, f"{where}.id", "must be an integer")
        attrs = nd.get("attrs", {})
        _expect(isinstance(attrs, dict), f"{where}.attrs", "must be an object")
        nodes.append(NodeRecord(nd["id"], attrs))
    edges = []
    for k, e in enumerate(data["edges"]):
        where = f"$.edges[{k}]"
        _expect(isinstance(e, dict) and "src" in e and "dst" in e, where, "needs src and dst")
        _expect(type(e["src"]) is int and type(e["dst"]) is int, where, "endpoints must be integers")
        attrs = e.get("attrs", {})
        _expect(isinstance(attrs, dict), f"{where}.attrs", "must be an object")
        edges.append(EdgeRecord(e["src"], e["dst"], attrs))
    return AttributedGraph(data["directed"], tuple(nodes), tuple(edges), gattrs)


def loads_graph(text: str) -> AttributedGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return graph_from_dict(data)


def load_graph(path: str | Path) -> AttributedGraph:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return loads_graph(text)
    except GraphError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def save_graph(g: AttributedGraph, path: str | Path, compact: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_graph(g, compact=compact))
