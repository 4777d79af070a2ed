"""Graph text in GML, GraphML, node-link JSON and Markdown tables.

Every renderer emits attributes in lexicographic name order and nodes/edges in
graph order, so output is a pure function of the graph. Each parser inverts its
renderer exactly, including the integer/real/boolean/text distinction.
Graph-level metadata (``graph_attrs``) is not part of the graph text.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any, Callable
from xml.sax.saxutils import escape as xml_escape

from gfmforge.graph import (
    AttributedGraph,
    AttrValue,
    EdgeRecord,
    GraphError,
    GraphValidationError,
    NodeRecord,
    attr_kind,
    format_real,
)

FORMATS = ("GML", "GraphML", "JSON", "MarkdownTable")


class FormatError(GraphError):
    pass


class RenderError(FormatError):
    pass


class FormatParseError(FormatError):
    pass


class UnsupportedFeatureError(FormatError):
    pass


@dataclass(frozen=True)
class FormatSpec:
    kind: str
    compact: bool = False
    attr_order: str = "lexicographic"

    def __post_init__(self) -> None:
        if self.kind not in FORMATS:
            raise ValueError(f"unknown format {self.kind!r}; expected one of {FORMATS}")
        if self.attr_order != "lexicographic":
            raise ValueError("only lexicographic attribute order is supported")

    @classmethod
    def parse(cls, value: "str | FormatSpec | dict") -> "FormatSpec":
        if isinstance(value, FormatSpec):
            return value
        if isinstance(value, dict):
            return cls(**value)
        return cls(value)


def render_graph_text(g: AttributedGraph, fmt: FormatSpec | str) -> str:
    fmt = FormatSpec.parse(fmt)
    return _RENDERERS[fmt.kind](g, fmt.compact)


def parse_graph_text(text: str, fmt: FormatSpec | str) -> AttributedGraph:
    fmt = FormatSpec.parse(fmt)
    try:
        return _PARSERS[fmt.kind](text)
    except GraphValidationError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatParseError(f"{fmt.kind}: {exc}") from None


def _assemble(directed: bool, nodes: dict[int, dict], edges: list[tuple[int, int, dict]], where: str) -> AttributedGraph:
    n = len(nodes)
    if sorted(nodes) != list(range(n)):
        raise FormatParseError(f"{where}: node ids must be the integers 0..{n - 1}")
    recs = tuple(NodeRecord(i, nodes[i]) for i in range(n))
    erecs = tuple(EdgeRecord(s, t, a) for s, t, a in edges)
    return AttributedGraph(directed, recs, erecs, {})


def _names(records) -> list[str]:
    return sorted({k for r in records for k in r.attrs})


# -- GML ------------------------------------------------------------------------

_GML_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _gml_value(v: AttrValue) -> str:
    kind = attr_kind(v)
    if kind == "boolean":
        return "true" if v else "false"
    if kind == "integer":
        return str(v)
    if kind == "real":
        return format_real(v)
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _gml_check_key(name: str, reserved: tuple[str, ...]) -> None:
    if not _GML_KEY.match(name) or name in reserved:
        raise RenderError(
            f"GML: attribute name {name!r} is not a valid GML key; "
            "rename it to an identifier other than id/source/target"
        )


def _render_gml(g: AttributedGraph, compact: bool) -> str:
    lines: list[tuple[int, str]] = [(0, "graph ["), (1, f"directed {int(g.directed)}")]
    for nd in g.nodes:
        lines.append((1, "node ["))
        lines.append((2, f"id {nd.id}"))
        for k in sorted(nd.attrs):
            _gml_check_key(k, ("id",))
            lines.append((2, f"{k} {_gml_value(nd.attrs[k])}"))
        lines.append((1, "]"))
    for e in g.edges:
        lines.append((1, "edge ["))
        lines.append((2, f"source {e.src}"))
        lines.append((2, f"target {e.dst}"))
        for k in sorted(e.attrs):
            _gml_check_key(k, ("source", "target"))
            lines.append((2, f"{k} {_gml_value(e.attrs[k])}"))
        lines.append((1, "]"))
    lines.append((0, "]"))
    if compact:
        return " ".join(s for _, s in lines)
    return "\n".join("  " * d + s for d, s in lines)


_GML_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<open>\[)
  | (?P<close>\])
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<real>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)|[+-]?(?:\d+\.\d*|\.\d+))
  | (?P<int>[+-]?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _gml_tokens(text: str):
    pos = 0
    line, col0 = 1, 0
    while pos < len(text):
        m = _GML_TOKEN.match(text, pos)
        where = f"line {line} column {pos - col0 + 1}"
        if not m:
            raise FormatParseError(f"GML: unexpected character {text[pos]!r} at {where}")
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            yield kind, tok, where
        nl = tok.count("\n")
        if nl:
            line += nl
            col0 = m.start() + tok.rindex("\n") + 1
        pos = m.end()
    yield "eof", "", f"line {line}"


def _gml_unquote(tok: str) -> str:
    return re.sub(r"\\(.)", r"\1", tok[1:-1])


def _gml_parse_list(tokens, closing: bool) -> list[tuple[str, Any, str]]:
    items: list[tuple[str, Any, str]] = []
    while True:
        kind, tok, where = next(tokens)
        if kind == "close" and closing:
            return items
        if kind == "eof":
            if closing:
                raise FormatParseError(f"GML: unexpected end of input at {where}, missing ']'")
            return items
        if kind != "ident":
            raise FormatParseError(f"GML: expected a key at {where}, got {tok!r}")
        vkind, vtok, vwhere = next(tokens)
        if vkind == "open":
            value: Any = _gml_parse_list(tokens, True)
        elif vkind == "int":
            value = int(vtok)
        elif vkind == "real":
            value = float(vtok)
        elif vkind == "string":
            value = _gml_unquote(vtok)
        elif vkind == "ident" and vtok in ("true", "false"):
            value = vtok == "true"
        else:
            raise FormatParseError(f"GML: expected a value for {tok!r} at {vwhere}, got {vtok!r}")
        items.append((tok, value, where))


def _parse_gml(text: str) -> AttributedGraph:
    top = _gml_parse_list(_gml_tokens(text), False)
    graphs = [v for k, v, _ in top if k == "graph"]
    if len(graphs) != 1 or not isinstance(graphs[0], list):
        raise FormatParseError("GML: expected exactly one 'graph [ ... ]' block")
    directed = False
    nodes: dict[int, dict] = {}
    edges: list[tuple[int, int, dict]] = []
    for key, value, where in graphs[0]:
        if key == "directed":
            if value not in (0, 1) or isinstance(value, (bool, float)):
                raise FormatParseError(f"GML: 'directed' must be 0 or 1 at {where}")
            directed = bool(value)
        elif key == "node":
            attrs = _gml_record(value, where)
            nid = attrs.pop("id", None)
            if type(nid) is not int:
                raise FormatParseError(f"GML: node without integer id at {where}")
            if nid in nodes:
                raise FormatParseError(f"GML: duplicate node id {nid} at {where}")
            nodes[nid] = attrs
        elif key == "edge":
            attrs = _gml_record(value, where)
            s, t = attrs.pop("source", None), attrs.pop("target", None)
            if type(s) is not int or type(t) is not int:
                raise FormatParseError(f"GML: edge without integer source/target at {where}")
            edges.append((s, t, attrs))
        elif isinstance(value, list):
            raise UnsupportedFeatureError(f"GML: unsupported graph section {key!r} at {where}")
        else:
            raise UnsupportedFeatureError(f"GML: unsupported graph-level key {key!r} at {where}")
    return _assemble(directed, nodes, edges, "GML")


def _gml_record(value: Any, where: str) -> dict:
    if not isinstance(value, list):
        raise FormatParseError(f"GML: expected '[ ... ]' at {where}")
    out: dict[str, Any] = {}
    for k, v, w in value:
        if isinstance(v, list):
            raise UnsupportedFeatureError(f"GML: nested section {k!r} at {w} is not supported")
        if k in out:
            raise FormatParseError(f"GML: duplicate key {k!r} at {w}")
        out[k] = v
    return out


# -- GraphML ----------------------------------------------------------------------

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
_GRAPHML_TYPE = {"text": "string", "integer": "long", "real": "double", "boolean": "boolean"}
_KIND_ORDER = {"boolean": 0, "integer": 1, "real": 2, "text": 3}


def _graphml_keys(g: AttributedGraph) -> dict[tuple[str, str, str], str]:
    found: set[tuple[int, str, str]] = set()
    for nd in g.nodes:
        found |= {(0, k, attr_kind(v)) for k, v in nd.attrs.items()}
    for e in g.edges:
        found |= {(1, k, attr_kind(v)) for k, v in e.attrs.items()}
    ordered = sorted(found, key=lambda t: (t[0], t[1], _KIND_ORDER[t[2]]))
    return {(("node", "edge")[d], k, kind): f"d{i}" for i, (d, k, kind) in enumerate(ordered)}


def _graphml_value(v: AttrValue) -> str:
    kind = attr_kind(v)
    if kind == "boolean":
        return "true" if v else "false"
    if kind == "real":
        return format_real(v)
    return xml_escape(str(v))


def _render_graphml(g: AttributedGraph, compact: bool) -> str:
    keys = _graphml_keys(g)
    lines: list[tuple[int, str]] = [
        (0, '<?xml version="1.0" encoding="UTF-8"?>'),
        (0, f'<graphml xmlns="{GRAPHML_NS}">'),
    ]
    for (dom, name, kind), kid in keys.items():
        qname = xml_escape(name, {'"': "&quot;"})
        lines.append((1, f'<key id="{kid}" for="{dom}" attr.name="{qname}" attr.type="{_GRAPHML_TYPE[kind]}"/>'))
    lines.append((1, f'<graph id="G" edgedefault="{"directed" if g.directed else "undirected"}">'))

    def element(open_tag: str, close_tag: str, dom: str, attrs: dict) -> None:
        if not attrs:
            lines.append((2, open_tag[:-1] + "/>"))
            return
        lines.append((2, open_tag))
        for k in sorted(attrs):
            kid = keys[(dom, k, attr_kind(attrs[k]))]
            lines.append((3, f'<data key="{kid}">{_graphml_value(attrs[k])}</data>'))
        lines.append((2, close_tag))

    for nd in g.nodes:
        element(f'<node id="{nd.id}">', "</node>", "node", nd.attrs)
    for e in g.edges:
        element(f'<edge source="{e.src}" target="{e.dst}">', "</edge>", "edge", e.attrs)
    lines.append((1, "</graph>"))
    lines.append((0, "</graphml>"))
    if compact:
        return "".join(s for _, s in lines)
    return "\n".join("  " * d + s for d, s in lines)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _graphml_cast(text: str | None, typ: str, where: str) -> AttrValue:
    raw = text or ""
    try:
        if typ == "boolean":
            low = raw.strip().lower()
            if low not in ("true", "false"):
                raise ValueError(raw)
            return low == "true"
        if typ in ("int", "long"):
            return int(raw.strip())
        if typ in ("float", "double"):
            return float(raw.strip())
    except ValueError:
        raise FormatParseError(f"GraphML: {where}: {raw!r} is not a valid {typ}") from None
    if typ != "string":
        raise UnsupportedFeatureError(f"GraphML: attr.type {typ!r} is not supported")
    return raw


def _graphml_id(value: str | None, where: str) -> int:
    if value is None or not re.fullmatch(r"\d+", value):
        raise FormatParseError(f"GraphML: {where}: node references must be integer ids, got {value!r}")
    return int(value)


def _parse_graphml(text: str) -> AttributedGraph:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise FormatParseError(f"GraphML: malformed XML at line {line} column {col + 1}") from None
    if _local(root.tag) != "graphml":
        raise FormatParseError("GraphML: root element must be <graphml>")
    keys: dict[str, tuple[str, str, str]] = {}
    defaults: dict[str, AttrValue] = {}
    graphs = []
    for child in root:
        tag = _local(child.tag)
        if tag == "key":
            kid = child.get("id")
            dom, name, typ = child.get("for", "all"), child.get("attr.name"), child.get("attr.type", "string")
            if kid is None or name is None:
                raise FormatParseError("GraphML: <key> needs id and attr.name")
            keys[kid] = (dom, name, typ)
            for sub in child:
                if _local(sub.tag) == "default":
                    defaults[kid] = _graphml_cast(sub.text, typ, f"default of key {kid}")
        elif tag == "graph":
            graphs.append(child)
        elif tag != "desc":
            raise UnsupportedFeatureError(f"GraphML: unsupported element <{tag}>")
    if len(graphs) != 1:
        raise FormatParseError("GraphML: expected exactly one <graph>")
    graph = graphs[0]
    directed = graph.get("edgedefault", "directed") == "directed"

    def read_data(elem: ET.Element, dom: str, where: str) -> dict:
        attrs: dict[str, AttrValue] = {}
        for kid, (kdom, name, _) in keys.items():
            if kid in defaults and kdom in (dom, "all"):
                attrs[name] = defaults[kid]
        for sub in elem:
            st = _local(sub.tag)
            if st != "data":
                raise UnsupportedFeatureError(f"GraphML: <{st}> inside <{dom}> is not supported")
            kid = sub.get("key")
            if kid not in keys:
                raise FormatParseError(f"GraphML: {where}: undeclared key {kid!r}")
            kdom, name, typ = keys[kid]
            if kdom not in (dom, "all"):
                raise FormatParseError(f"GraphML: {where}: key {kid!r} is declared for {kdom}")
            attrs[name] = _graphml_cast(sub.text, typ, where)
        return attrs

    nodes: dict[int, dict] = {}
    edges: list[tuple[int, int, dict]] = []
    for i, elem in enumerate(graph):
        tag = _local(elem.tag)
        where = f"<graph> child {i}"
        if tag == "node":
            nid = _graphml_id(elem.get("id"), where)
            if nid in nodes:
                raise FormatParseError(f"GraphML: duplicate node id {nid}")
            nodes[nid] = read_data(elem, "node", where)
        elif tag == "edge":
            s = _graphml_id(elem.get("source"), where)
            t = _graphml_id(elem.get("target"), where)
            if elem.get("directed") is not None and (elem.get("directed") == "true") != directed:
                raise UnsupportedFeatureError("GraphML: mixed edge directions are not supported")
            edges.append((s, t, read_data(elem, "edge", where)))
        elif tag != "desc":
            raise UnsupportedFeatureError(f"GraphML: unsupported element <{tag}> in <graph>")
    return _assemble(directed, nodes, edges, "GraphML")


# -- node-link JSON -------------------------------------------------------------------


def _render_json(g: AttributedGraph, compact: bool) -> str:
    nodes = []
    for nd in g.nodes:
        if "id" in nd.attrs:
            raise RenderError("JSON: node attribute 'id' clashes with the node-link id field")
        nodes.append({"id": nd.id, **{k: nd.attrs[k] for k in sorted(nd.attrs)}})
    links = []
    for e in g.edges:
        if "source" in e.attrs or "target" in e.attrs:
            raise RenderError("JSON: edge attributes 'source'/'target' clash with node-link fields")
        links.append({"source": e.src, "target": e.dst, **{k: e.attrs[k] for k in sorted(e.attrs)}})
    data = {"directed": g.directed, "nodes": nodes, "links": links}
    if compact:
        return json.dumps(data, ensure_ascii=False, separators=(",", ":"))
    return json.dumps(data, ensure_ascii=False, indent=2)


def _no_dup_object(pairs: list[tuple[str, Any]]) -> dict:
    out: dict[str, Any] = {}
    for k, v in pairs:
        if k in out:
            raise FormatParseError(f"JSON: duplicate key {k!r}")
        out[k] = v
    return out


def _parse_json(text: str) -> AttributedGraph:
    try:
        data = json.loads(text, object_pairs_hook=_no_dup_object)
    except json.JSONDecodeError as exc:
        raise FormatParseError(f"JSON: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict) or "nodes" not in data:
        raise FormatParseError("JSON: expected a node-link object with 'nodes'")
    unknown = set(data) - {"directed", "multigraph", "graph", "nodes", "links", "edges"}
    if unknown:
        raise UnsupportedFeatureError(f"JSON: unsupported top-level keys {sorted(unknown)}")
    if data.get("multigraph"):
        raise UnsupportedFeatureError("JSON: multigraphs are not supported")
    directed = data.get("directed", False)
    if not isinstance(directed, bool):
        raise FormatParseError("JSON: 'directed' must be a boolean")
    nodes: dict[int, dict] = {}
    for i, nd in enumerate(data["nodes"]):
        if not isinstance(nd, dict) or type(nd.get("id")) is not int:
            raise FormatParseError(f"JSON: nodes[{i}] needs an integer 'id'")
        attrs = {k: v for k, v in nd.items() if k != "id"}
        if nd["id"] in nodes:
            raise GraphValidationError(f"JSON: duplicate node id {nd['id']}")
        nodes[nd["id"]] = attrs
    edges = []
    for i, e in enumerate(data.get("links", data.get("edges", []))):
        if not isinstance(e, dict) or type(e.get("source")) is not int or type(e.get("target")) is not int:
            raise FormatParseError(f"JSON: links[{i}] needs integer 'source' and 'target'")
        edges.append((e["source"], e["target"], {k: v for k, v in e.items() if k not in ("source", "target")}))
    for where, attrs in [(f"node {k}", a) for k, a in nodes.items()] + [(f"link {i}", e[2]) for i, e in enumerate(edges)]:
        for k, v in attrs.items():
            if isinstance(v, (dict, list)) or v is None:
                raise UnsupportedFeatureError(f"JSON: {where}: attribute {k!r} must be a scalar")
    return _assemble(directed, nodes, edges, "JSON")


# -- Markdown tables ---------------------------------------------------------------------

_MD_INT = re.compile(r"[+-]?\d+\Z")
_MD_REAL = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?\Z")


def _md_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace("|", "\\|")


def _md_cell(v: AttrValue) -> str:
    kind = attr_kind(v)
    if kind == "boolean":
        return "true" if v else "false"
    if kind == "integer":
        return str(v)
    if kind == "real":
        return format_real(v)
    needs_quotes = (
        v == ""
        or v != v.strip()
        or v in ("true", "false")
        or v.startswith('"')
        or _MD_REAL.match(v) is not None
    )
    if needs_quotes:
        return '"' + _md_escape(v).replace('"', '\\"') + '"'
    return _md_escape(v)


def _md_uncell(raw: str, where: str) -> AttrValue | None:
    if raw == "":
        return None
    if raw.startswith('"'):
        m = re.fullmatch(r'"((?:[^"\\]|\\.)*)"', raw)
        if not m:
            raise FormatParseError(f"Markdown: {where}: malformed quoted cell {raw!r}")
        return re.sub(r"\\(.)", r"\1", m.group(1))
    if raw in ("true", "false"):
        return raw == "true"
    if _MD_INT.match(raw):
        return int(raw)
    if _MD_REAL.match(raw):
        return float(raw)
    return re.sub(r"\\(.)", r"\1", raw)


def _md_check_name(name: str, reserved: tuple[str, ...]) -> None:
    if name in reserved or name != name.strip() or "|" in name or "\\" in name:
        raise RenderError(
            f"MarkdownTable: attribute name {name!r} cannot be a column header; "
            "avoid pipes, backslashes, surrounding spaces and reserved names"
        )


def _md_table(header: list[str], rows: list[list[str]]) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "|".join(" --- " for _ in header) + "|"]
    for row in rows:
        out.append("| " + " | ".join(row) + " |")
    return out


def _render_markdown(g: AttributedGraph, compact: bool) -> str:
    nnames = _names(g.nodes)
    enames = _names(g.edges)
    for k in nnames:
        _md_check_name(k, ("id",))
    for k in enames:
        _md_check_name(k, ("source", "target"))
    nrows = [[str(nd.id)] + [_md_cell(nd.attrs[k]) if k in nd.attrs else "" for k in nnames] for nd in g.nodes]
    erows = [
        [str(e.src), str(e.dst)] + [_md_cell(e.attrs[k]) if k in e.attrs else "" for k in enames]
        for e in g.edges
    ]
    lines = ["Node table:", ""] + _md_table(["id"] + nnames, nrows)
    lines += ["", f"Edge table ({'directed' if g.directed else 'undirected'}):", ""]
    lines += _md_table(["source", "target"] + enames, erows)
    return "\n".join(lines)


def _md_split(line: str, where: str) -> list[str]:
    s = line.strip()
    if not (s.startswith("|") and s.endswith("|")) or len(s) < 2:
        raise FormatParseError(f"Markdown: {where}: table rows must start and end with '|'")
    cells, cur, i = [], [], 1
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            cur.append(s[i : i + 2])
            i += 2
            continue
        if c == "|":
            cells.append("".join(cur).strip())
            cur = []
        else:
            cur.append(c)
        i += 1
    if cur and "".join(cur).strip():
        raise FormatParseError(f"Markdown: {where}: trailing text after last '|'")
    return cells


def _md_read_table(lines: list[str], start: int, first: list[str]) -> tuple[list[str], list[list[str]], int]:
    if start + 1 >= len(lines):
        raise FormatParseError(f"Markdown: line {start + 1}: table header without separator row")
    header = _md_split(lines[start], f"line {start + 1}")
    if header[: len(first)] != first:
        raise FormatParseError(f"Markdown: line {start + 1}: table must start with columns {first}")
    sep = _md_split(lines[start + 1], f"line {start + 2}")
    if len(sep) != len(header) or not all(re.fullmatch(r":?-{3,}:?", c) for c in sep):
        raise FormatParseError(f"Markdown: line {start + 2}: malformed separator row")
    rows = []
    i = start + 2
    while i < len(lines) and lines[i].strip():
        row = _md_split(lines[i], f"line {i + 1}")
        if len(row) != len(header):
            raise FormatParseError(f"Markdown: line {i + 1}: expected {len(header)} cells, got {len(row)}")
        rows.append(row)
        i += 1
    return header, rows, i


def _md_int(cell: str, where: str) -> int:
    if not re.fullmatch(r"\d+", cell):
        raise FormatParseError(f"Markdown: {where}: expected an integer node id, got {cell!r}")
    return int(cell)


def _parse_markdown(text: str) -> AttributedGraph:
    lines = text.split("\n")
    idx = [i for i, ln in enumerate(lines) if ln.strip()]
    if not idx or lines[idx[0]].strip() != "Node table:":
        raise FormatParseError("Markdown: expected 'Node table:' caption")
    pos = idx[0] + 1
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    nheader, nrows, pos = _md_read_table(lines, pos, ["id"])
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos >= len(lines):
        raise FormatParseError("Markdown: missing edge table")
    m = re.fullmatch(r"Edge table \((directed|undirected)\):", lines[pos].strip())
    if not m:
        raise FormatParseError(f"Markdown: line {pos + 1}: expected 'Edge table (directed|undirected):'")
    directed = m.group(1) == "directed"
    pos += 1
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    eheader, erows, pos = _md_read_table(lines, pos, ["source", "target"])
    if any(ln.strip() for ln in lines[pos:]):
        raise FormatParseError(f"Markdown: line {pos + 1}: unexpected content after edge table")
    nodes: dict[int, dict] = {}
    for r, row in enumerate(nrows):
        nid = _md_int(row[0], f"node row {r}")
        if nid in nodes:
            raise FormatParseError(f"Markdown: duplicate node id {nid}")
        attrs = {}
        for name, raw in zip(nheader[1:], row[1:]):
            v = _md_uncell(raw, f"node row {r}")
            if v is not None:
                attrs[name] = v
        nodes[nid] = attrs
    edges = []
    for r, row in enumerate(erows):
        s, t = _md_int(row[0], f"edge row {r}"), _md_int(row[1], f"edge row {r}")
        attrs = {}
        for name, raw in zip(eheader[2:], row[2:]):
            v = _md_uncell(raw, f"edge row {r}")
            if v is not None:
                attrs[name] = v
        edges.append((s, t, attrs))
    return _assemble(directed, nodes, edges, "Markdown")


_RENDERERS: dict[str, Callable[[AttributedGraph, bool], str]] = {
    "GML": _render_gml,
    "GraphML": _render_graphml,
    "JSON": _render_json,
    "MarkdownTable": _render_markdown,
}
_PARSERS: dict[str, Callable[[str], AttributedGraph]] = {
    "GML": _parse_gml,
    "GraphML": _parse_graphml,
    "JSON": _parse_json,
    "MarkdownTable": _parse_markdown,
}
