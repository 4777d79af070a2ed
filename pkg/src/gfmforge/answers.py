"""Canonical answers, their one-line rendering, and verification rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from gfmforge.graph import AttributedGraph, format_real

ANSWER_KINDS = ("integer", "real", "boolean", "label", "id_set", "id_seq", "text")
RULE_KINDS = ("exact", "set", "numeric", "path", "boolean", "rouge")

NONE_MARKER = "none"


@dataclass(frozen=True)
class Answer:
    kind: str
    value: Any

    def __post_init__(self) -> None:
        if self.kind not in ANSWER_KINDS:
            raise ValueError(f"unknown answer kind {self.kind!r}")
        if self.kind == "id_set":
            object.__setattr__(self, "value", tuple(sorted(set(self.value))))
        elif self.kind == "id_seq":
            object.__setattr__(self, "value", tuple(self.value))

    def to_dict(self) -> dict[str, Any]:
        value = list(self.value) if self.kind in ("id_set", "id_seq") else self.value
        return {"kind": self.kind, "value": value}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Answer":
        return cls(data["kind"], data["value"])


def render_answer(ans: Answer) -> str:
    """Canonical single-line text used after the ``Answer:`` marker."""
    if ans.kind == "boolean":
        return "Yes" if ans.value else "No"
    if ans.kind == "real":
        return format_real(ans.value)
    if ans.kind == "id_set":
        return ", ".join(str(v) for v in ans.value) if ans.value else NONE_MARKER
    if ans.kind == "id_seq":
        return " -> ".join(str(v) for v in ans.value)
    return str(ans.value)


def normalize_label(text: str) -> str:
    return " ".join(str(text).casefold().strip().strip(".,;:!?\"'`").split())


@dataclass(frozen=True)
class VerifyRule:
    """How a predicted answer is judged against the reference.

    ``path`` rules carry ``path_kind`` (``shortest`` or ``hamilton``) and need
    the task graph to check model-supplied witnesses.
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown verify rule {self.kind!r}")
        if self.params.get("metric", "accuracy") not in ("accuracy", "rmse", "rouge_l"):
            raise ValueError(f"unknown metric {self.params['metric']!r}")
        if self.kind == "numeric" and self.params.get("eps", 0) < 0:
            raise ValueError("numeric tolerance must be >= 0")

    @property
    def metric(self) -> str:
        if "metric" in self.params:
            return self.params["metric"]
        return "rouge_l" if self.kind == "rouge" else "accuracy"

    def answer_kinds(self, reference: Answer) -> tuple[str, ...]:
        """Answer kinds a prediction may take, tried in order during extraction."""
        if self.kind == "path":
            return ("id_seq", reference.kind)
        return (reference.kind,)

    def accepts(self, pred: Answer | None, ref: Answer, graph: AttributedGraph | None = None) -> bool:
        if pred is None:
            return False
        if self.kind == "path":
            return self._accept_path(pred, ref, graph)
        if self.kind == "set":
            return pred.kind == "id_set" and set(pred.value) == set(ref.value)
        if self.kind == "boolean":
            return pred.kind == "boolean" and bool(pred.value) == bool(ref.value)
        if self.kind == "numeric":
            if pred.kind not in ("integer", "real"):
                return False
            eps = float(self.params.get("eps", 1e-6))
            return math.isclose(float(pred.value), float(ref.value), rel_tol=eps, abs_tol=eps)
        if self.kind == "rouge":
            from gfmforge.evaluate import rouge_l

            return rouge_l(str(pred.value), str(ref.value))["f1"] == 1.0
        # exact
        if ref.kind in ("label", "text"):
            return normalize_label(pred.value) == normalize_label(ref.value)
        if ref.kind == "integer":
            return pred.kind == "integer" and pred.value == ref.value
        if ref.kind == "real":
            return pred.kind in ("integer", "real") and float(pred.value) == float(ref.value)
        return pred.kind == ref.kind and pred.value == ref.value

    def _accept_path(self, pred: Answer, ref: Answer, graph: AttributedGraph | None) -> bool:
        from gfmforge.synth.solvers import is_hamilton_path, walk_weight

        path_kind = self.params["path_kind"]
        if pred.kind != "id_seq":
            if path_kind == "hamilton":
                return pred.kind == "boolean" and bool(pred.value) == bool(ref.value)
            return pred.kind in ("integer", "real") and float(pred.value) == float(ref.value)
        if graph is None:
            raise ValueError("path verification needs the task graph")
        path = list(pred.value)
        if path_kind == "hamilton":
            return bool(ref.value) and is_hamilton_path(graph, path)
        if not path or path[0] != self.params["source"] or path[-1] != self.params["target"]:
            return False
        w = walk_weight(graph, path)
        return w is not None and float(w) == float(ref.value)

    def to_dict(self) -> dict[str, Any]:
        return {"rule": self.kind, **self.params}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "VerifyRule":
        params = {k: v for k, v in data.items() if k != "rule"}
        return cls(data["rule"], params)
