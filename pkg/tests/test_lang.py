import json

import pytest

from gfmforge.answers import Answer, VerifyRule, render_answer
from gfmforge.evaluate import extract_for_rule
from gfmforge.synth.tasks import TASK_KINDS, default_er_config, gen_task
from gfmforge.textualize.formats import FORMATS, parse_graph_text
from gfmforge.textualize.lang import (
    ANSWER_MARKER,
    InstructionSample,
    lang_y,
    make_sample,
    split_sections,
)
from gfmforge.textualize.templates import TemplateError, default_pack, load_pack


@pytest.mark.parametrize("kind", TASK_KINDS)
def test_prompt_sections_and_answer_line(kind):
    for seed in range(5):
        t = gen_task(kind, default_er_config(kind, seed))
        for fmt in FORMATS:
            s = make_sample(t, fmt)
            parts = split_sections(s.input)
            assert parts["query"] == t.query
            assert parse_graph_text(parts["graph"], fmt) == t.graph
            last = s.output.rstrip("\n").split("\n")[-1]
            assert last == f"{ANSWER_MARKER} {render_answer(t.answer)}"


@pytest.mark.parametrize("kind", TASK_KINDS)
def test_closed_loop_extraction(kind):
    for seed in range(20):
        t = gen_task(kind, default_er_config(kind, 500 + seed))
        pred = extract_for_rule(lang_y(t), t.verifier, t.answer)
        assert pred is not None
        assert t.verifier.accepts(pred, t.answer, t.graph)
        if t.verifier.kind != "path":
            assert pred == t.answer


def test_render_answer_forms():
    assert render_answer(Answer("boolean", True)) == "Yes"
    assert render_answer(Answer("id_set", [3, 1])) == "1, 3"
    assert render_answer(Answer("id_set", [])) == "none"
    assert render_answer(Answer("id_seq", [0, 4, 2])) == "0 -> 4 -> 2"
    assert render_answer(Answer("real", 2.0)) == "2.0"


def test_sample_schema_keys():
    t = gen_task("DegreeCount", default_er_config("DegreeCount", 1))
    d = make_sample(t, "GML").to_dict()
    assert list(d) == ["id", "task", "level", "format", "split", "input", "output", "meta"]
    assert InstructionSample.from_dict(json.loads(json.dumps(d))).to_dict() == d


def test_directed_query_variant():
    pack = default_pack()
    assert pack.template("TAE", "query", directed=True) != pack.template("TAE", "query")


def test_user_pack_overrides_entries(tmp_path):
    p = tmp_path / "pack.json"
    entry = {"description": "D {directedness}", "query": "How many nodes?", "answer": "It is {value}."}
    p.write_text(json.dumps({"version": "mine/1", "tasks": {"GraphSize-Node": entry}}))
    pack = load_pack(p)
    t = gen_task("GraphSize-Node", default_er_config("GraphSize-Node", 2), templates=pack)
    assert t.query == "How many nodes?"
    assert make_sample(t, "JSON", pack).meta["template_version"] == "mine/1"
    assert pack.template("DegreeCount", "query")  # built-ins kept


def test_unbound_placeholder_is_an_error(tmp_path):
    p = tmp_path / "pack.json"
    p.write_text(json.dumps({"version": "x", "tasks": {"GraphSize-Node": {
        "description": "d", "query": "q {nonexistent}", "answer": "a"}}}))
    with pytest.raises(TemplateError, match="nonexistent"):
        gen_task("GraphSize-Node", templates=load_pack(p))


def test_verify_rule_round_trip():
    r = VerifyRule("path", {"path_kind": "shortest", "source": 0, "target": 3})
    assert VerifyRule.from_dict(r.to_dict()) == r
