import math
import random
from dataclasses import replace

import pytest

import oracles
from conftest import random_attr_graph
from gfmforge.augment import (
    MASK_TOKEN,
    AugmentPlan,
    NotApplicableError,
    expand_task,
    make_fmae_sample,
    make_tae_sample,
    mask_graph,
    maskable_value,
)
from gfmforge.answers import Answer, VerifyRule
from gfmforge.evaluate import extract_for_rule
from gfmforge.graph import AttributedGraph
from gfmforge.synth.tasks import TASK_KINDS, default_er_config, gen_task
from gfmforge.textualize.formats import FORMATS, parse_graph_text, render_graph_text
from gfmforge.textualize.lang import split_sections


def population(g):
    return sum(1 for r in (*g.nodes, *g.edges) for v in r.attrs.values() if maskable_value(v))


def test_maskable_values():
    assert maskable_value(3) and maskable_value(0.5) and maskable_value("red")
    assert not maskable_value(True)
    assert not maskable_value("") and not maskable_value("?!") and not maskable_value("Unknown")


def test_ten_attributed_nodes_mask_two():
    g = AttributedGraph.build([{"topic": f"t{i}"} for i in range(10)], [])
    m = mask_graph(g, 0.2, seed=1)
    assert len(m.masked_targets) == 2
    assert m.probe in m.masked_targets


def test_full_rate_masks_everything():
    g = AttributedGraph.build([{"a": 1}, {"a": 2}], [(0, 1, {"weight": 4})])
    m = mask_graph(g, 1.0, seed=0)
    assert len(m.masked_targets) == 3
    assert all(v == MASK_TOKEN for r in (*m.graph.nodes, *m.graph.edges) for v in r.attrs.values())


def test_featureless_graph_is_not_applicable():
    with pytest.raises(NotApplicableError):
        mask_graph(AttributedGraph.build(3, [(0, 1)]), 0.2, seed=0)


def test_mask_count_topology_and_determinism():
    rng = random.Random(3)
    for _ in range(300):
        g = random_attr_graph(rng, n_max=9)
        pop = population(g)
        if pop == 0:
            continue
        seed = rng.getrandbits(32)
        m = mask_graph(g, 0.2, seed)
        assert len(m.masked_targets) == math.ceil(0.2 * pop - 1e-9)
        assert [e.pair for e in m.graph.edges] == [e.pair for e in g.edges]
        assert m.graph.n == g.n
        assert mask_graph(g, 0.2, seed) == m


@pytest.mark.parametrize("fmt", ["GML", "JSON", "MarkdownTable"])
def test_masked_rendering_differs_only_at_masked_values(fmt):
    rng = random.Random(4)
    for _ in range(100):
        g = random_attr_graph(rng, n_max=7, attr_p=1.0)
        if population(g) == 0:
            continue
        m = mask_graph(g, 0.2, rng.getrandbits(32))
        before = render_graph_text(g, fmt).split("\n")
        after = render_graph_text(m.graph, fmt).split("\n")
        if fmt == "MarkdownTable":
            # one line per element; compare cell by cell
            changed = sum(
                1 for a, b in zip(before, after) if a != b
                for ca, cb in zip(a.split(" | "), b.split(" | ")) if ca != cb
            )
        else:
            assert len(before) == len(after)
            changed = sum(1 for a, b in zip(before, after) if a != b)
        assert changed == len(m.masked_targets)
        assert all(MASK_TOKEN in b for a, b in zip(before, after) if a != b)


def test_masked_graphml_differs_only_at_masked_values():
    rng = random.Random(5)
    for _ in range(100):
        g = random_attr_graph(rng, n_max=7, attr_p=1.0)
        if population(g) == 0:
            continue
        m = mask_graph(g, 0.2, rng.getrandbits(32))
        # key declarations change with value types, so compare parsed values
        back = parse_graph_text(render_graph_text(m.graph, "GraphML"), "GraphML")
        diff = [
            (i, k) for i, (a, b) in enumerate(zip((*g.nodes, *g.edges), (*back.nodes, *back.edges)))
            for k in a.attrs if a.attrs[k] != b.attrs[k] or type(a.attrs[k]) is not type(b.attrs[k])
        ]
        assert len(diff) == len(m.masked_targets)


def test_fmae_examples():
    g = AttributedGraph.build([{}, {}, {}, {"label": "economics"}], [(0, 1, {"weight": 7})])
    for seed in range(50):
        m = mask_graph(g, 1.0, seed)
        s = make_fmae_sample(m, "GML", seed)
        if m.probe.element == 3:
            assert s.output.endswith("Answer: economics")
        else:
            assert s.output.endswith("Answer: 7")
    assert {mask_graph(g, 1.0, s).probe.element for s in range(50)} == {3, (0, 1)}


def test_fmae_closed_loop_extraction():
    rng = random.Random(6)
    checked = 0
    for i in range(300):
        g = random_attr_graph(rng, n_max=7, attr_p=1.0)
        if population(g) == 0:
            continue
        m = mask_graph(g, 0.2, i)
        s = make_fmae_sample(m, FORMATS[i % 4], i)
        ref = Answer.from_dict(s.meta["answer"])
        rule = VerifyRule.from_dict(s.meta["verifier"])
        pred = extract_for_rule(s.output, rule, ref)
        assert rule.accepts(pred, ref), (s.output, ref)
        if ref.kind in ("integer", "real"):
            assert pred.value == m.probe.original
        checked += 1
    assert checked > 200


def test_tae_matches_neighbor_oracle_and_says_out_for_directed():
    rng = random.Random(7)
    for i in range(300):
        g = random_attr_graph(rng, n_max=9)
        if g.n == 0:
            continue
        s = make_tae_sample(g, "JSON", seed=i)
        v = s.meta["query_node"]
        assert set(s.meta["answer"]["value"]) == oracles.out_neighbors(g, v)
        if g.directed:
            assert "outgoing" in split_sections(s.input)["query"]


@pytest.mark.parametrize("kind", TASK_KINDS)
def test_expand_task_multiplicity(kind):
    plan = AugmentPlan()
    t = gen_task(kind, default_er_config(kind, 9))
    t = replace(t, uid=f"{kind}/0")
    samples = expand_task(t, plan, seed=1)
    fmt_samples = [s for s in samples if s.meta["augmentation"] == "format"]
    assert len(fmt_samples) == 4
    assert len({s.output for s in fmt_samples}) == 1
    assert sum(s.task == "TAE" for s in samples) == 1
    attributed = population(t.graph) > 0
    assert sum(s.task == "FMAE" for s in samples) == (1 if attributed else 0)
    assert len({s.id for s in samples}) == len(samples)


def test_plan_validation():
    with pytest.raises(ValueError):
        AugmentPlan(formats=())
    with pytest.raises(ValueError):
        AugmentPlan(mask_rate=0)
    plan = AugmentPlan.from_dict({"formats": ["GML", "JSON"], "fmae": {"enabled": False}})
    assert AugmentPlan.from_dict(plan.to_dict()) == plan
