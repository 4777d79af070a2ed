from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfmforge.graph import AttributedGraph
from gfmforge.textualize.formats import (
    FORMATS,
    FormatParseError,
    FormatSpec,
    RenderError,
    parse_graph_text,
    render_graph_text,
)
from gfmforge.textualize.tokens import count_tokens

GOLDEN = Path(__file__).parent / "golden"
EXT = {"GML": "gml", "GraphML": "graphml", "JSON": "json", "MarkdownTable": "md"}

SAMPLE = AttributedGraph.build(
    [{"name": "Ada", "score": 1.5, "active": True}, {"name": 'a|b "q"', "score": 2}, {"name": "42"}],
    [(0, 1, {"weight": 3, "kind": "friend"}), (1, 2, {"weight": 1.25}), (2, 0, {})],
    directed=True,
)

names = st.sampled_from(["color", "weight", "label", "score", "flag", "x_1", "Name"])
text = st.text(
    alphabet=st.characters(blacklist_categories=("Cc", "Cs")),
    max_size=12,
)
values = st.one_of(
    st.integers(min_value=-(2**63), max_value=2**63 - 1),
    st.floats(allow_nan=False, allow_infinity=False),
    st.booleans(),
    text,
)


@st.composite
def graphs(draw):
    n = draw(st.integers(0, 6))
    directed = draw(st.booleans())
    nodes = [draw(st.dictionaries(names, values, max_size=3)) for _ in range(n)]
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v and (directed or u < v)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=8)) if pairs else []
    edges = []
    for u, v in chosen:
        attrs = draw(st.dictionaries(st.sampled_from(["kind", "label", "note"]), values, max_size=2))
        if draw(st.booleans()):
            attrs["weight"] = draw(st.integers(1, 10) | st.floats(0.5, 9.5))
        flip = not directed and draw(st.booleans())
        edges.append((v, u, attrs) if flip else (u, v, attrs))
    return AttributedGraph.build(nodes, edges, directed=directed)


@pytest.mark.parametrize("fmt", FORMATS)
@settings(max_examples=150, deadline=None)
@given(g=graphs(), compact=st.booleans())
def test_round_trip_property(fmt, g, compact):
    spec = FormatSpec(fmt, compact=compact)
    assert parse_graph_text(render_graph_text(g, spec), fmt) == g


@pytest.mark.parametrize("fmt", FORMATS)
def test_golden_rendering(fmt):
    expected = (GOLDEN / f"sample.{EXT[fmt]}").read_text("utf-8")
    assert render_graph_text(SAMPLE, fmt) == expected
    assert parse_graph_text(expected, fmt) == SAMPLE


@pytest.mark.parametrize("fmt", FORMATS)
def test_rendering_is_deterministic(fmt):
    assert render_graph_text(SAMPLE, fmt) == render_graph_text(SAMPLE, fmt)


@pytest.mark.parametrize("fmt", FORMATS)
def test_compact_is_not_longer(fmt):
    assert count_tokens(render_graph_text(SAMPLE, FormatSpec(fmt, compact=True))) <= count_tokens(
        render_graph_text(SAMPLE, fmt)
    )


def test_empty_graph_round_trips():
    g = AttributedGraph.build(0, [])
    for fmt in FORMATS:
        assert parse_graph_text(render_graph_text(g, fmt), fmt) == g


def test_truncated_graphml_reports_position():
    text = render_graph_text(SAMPLE, "GraphML")
    with pytest.raises(FormatParseError, match=r"line \d+"):
        parse_graph_text(text[: len(text) // 2], "GraphML")


@pytest.mark.parametrize(
    "fmt, text",
    [
        ("JSON", '{"directed": false, "nodes": [{"id": 0}, {"id": 0}], "links": []}'),
        ("GML", "graph [\n  node [\n    id 0\n  ]\n  node [\n    id 0\n  ]\n]"),
        ("JSON", '{"directed": false, "nodes": [{"id": 0}], "links": [{"source": 0, "target": 3}]}'),
        ("GML", "graph [ node [ id 0 ]"),
        ("MarkdownTable", "Node table:\n\n| id |\n| --- |\n| x |"),
    ],
)
def test_malformed_inputs(fmt, text):
    with pytest.raises(FormatParseError):
        parse_graph_text(text, fmt)


def test_unknown_format():
    with pytest.raises(ValueError):
        FormatSpec("DOT")


def test_markdown_rejects_unrepresentable_attr_name():
    g = AttributedGraph.build([{"a|b": 1}], [])
    with pytest.raises(RenderError):
        render_graph_text(g, "MarkdownTable")


def test_markdown_quotes_ambiguous_text():
    g = AttributedGraph.build([{"v": "42"}, {"v": " pad"}, {"v": ""}, {"v": 42}, {"v": "true"}], [])
    out = render_graph_text(g, "MarkdownTable")
    assert '| "42" |' in out and "| 42 |" in out and '| "true" |' in out and '| "" |' in out
    assert parse_graph_text(out, "MarkdownTable") == g


def test_gml_booleans_and_reals_keep_type():
    g = AttributedGraph.build([{"b": True, "r": 2.0, "i": 2}], [])
    out = render_graph_text(g, "GML")
    assert "b true" in out and "r 2.0" in out and "i 2\n" in out
    assert parse_graph_text(out, "GML") == g


def test_graphml_mixed_types_get_separate_keys():
    g = AttributedGraph.build([{"v": 1}, {"v": "one"}, {"v": 1.0}, {"v": False}], [])
    out = render_graph_text(g, "GraphML")
    assert out.count('attr.name="v"') == 4
    assert parse_graph_text(out, "GraphML") == g
