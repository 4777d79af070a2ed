"""Instruction text: graph + task -> input prompt, answer -> output text."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from gfmforge.answers import render_answer
from gfmforge.synth.tasks import TaskInstance
from gfmforge.textualize.formats import FormatSpec, render_graph_text
from gfmforge.textualize.templates import TemplatePack, default_pack

DESCRIPTION_HEADER = "# Graph Description"
GRAPH_TEXT_HEADER = "# Graph Text"
QUERY_HEADER = "# Query"
ANSWER_HEADER = "# Answer"
ANSWER_MARKER = "Answer:"

_SECTIONS = re.compile(
    rf"\A{re.escape(DESCRIPTION_HEADER)}\n(?P<description>.*?)\n\n"
    rf"{re.escape(GRAPH_TEXT_HEADER)}\n(?P<graph>.*?)\n\n"
    rf"{re.escape(QUERY_HEADER)}\n(?P<query>.*)\Z",
    re.S,
)


class SectionError(ValueError):
    pass


@dataclass(frozen=True)
class InstructionSample:
    id: str
    task: str
    level: str
    format: str
    input: str
    output: str
    split: str = ""
    meta: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "task": self.task,
            "level": self.level,
            "format": self.format,
            "split": self.split,
            "input": self.input,
            "output": self.output,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "InstructionSample":
        return cls(d["id"], d["task"], d["level"], d["format"], d["input"], d["output"], d["split"], d["meta"])

    def with_split(self, split: str) -> "InstructionSample":
        return InstructionSample(self.id, self.task, self.level, self.format, self.input, self.output, split,
                                 {**self.meta, "split": split})


def description_text(task: TaskInstance, pack: TemplatePack) -> str:
    if task.description is not None:
        return task.description
    slots = {
        "directedness": "directed" if task.graph.directed else "undirected",
        **task.slots,
    }
    return pack.render(task.template_kind, "description", slots, directed=task.graph.directed)


def lang_g(g, task: TaskInstance, fmt: FormatSpec | str, pack: TemplatePack | None = None) -> str:
    """Prompt with the Graph Description, Graph Text and Query sections, in that order."""
    pack = pack or default_pack()
    desc = description_text(task, pack)
    text = render_graph_text(g, fmt)
    return f"{DESCRIPTION_HEADER}\n{desc}\n\n{GRAPH_TEXT_HEADER}\n{text}\n\n{QUERY_HEADER}\n{task.query}"


def lang_y(task: TaskInstance, pack: TemplatePack | None = None) -> str:
    """Answer text whose final line is ``Answer: <canonical answer>``."""
    pack = pack or default_pack()
    slots = {**task.slots, "value": render_answer(task.answer)}
    explanation = pack.render(task.template_kind, "answer", slots, directed=task.graph.directed)
    return f"{ANSWER_HEADER}\n{explanation}\n{ANSWER_MARKER} {render_answer(task.answer)}"


def split_sections(prompt: str) -> dict[str, str]:
    m = _SECTIONS.match(prompt)
    if not m:
        raise SectionError("prompt lacks the Graph Description / Graph Text / Query sections")
    return m.groupdict()


def make_sample(
    task: TaskInstance,
    fmt: FormatSpec | str,
    pack: TemplatePack | None = None,
    augmentation: str = "none",
    extra_meta: dict[str, Any] | None = None,
) -> InstructionSample:
    pack = pack or default_pack()
    fmt = FormatSpec.parse(fmt)
    meta = {
        "task": task.task,
        "format": fmt.kind,
        "split": "",
        "seed": task.seed,
        "graph_size": [task.graph.n, task.graph.m],
        "augmentation": augmentation,
        "group": task.uid,
        "answer": task.answer.to_dict(),
        "verifier": task.verifier.to_dict(),
        "metric": task.verifier.metric,
        "template_version": pack.version,
        **(extra_meta or {}),
    }
    return InstructionSample(
        id=f"{task.uid}/{fmt.kind}",
        task=task.task,
        level=task.level,
        format=fmt.kind,
        input=lang_g(task.graph, task, fmt, pack),
        output=lang_y(task, pack),
        meta=meta,
    )
