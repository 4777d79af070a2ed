"""Answer extraction, metrics and corpus scoring."""

from __future__ import annotations

import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from gfmforge.answers import NONE_MARKER, Answer, VerifyRule, normalize_label
from gfmforge.graph import GraphError
from gfmforge.textualize.formats import FormatError, parse_graph_text
from gfmforge.textualize.lang import InstructionSample, SectionError, split_sections

ROUGE_TOKENIZATION = "lowercase; split on whitespace and punctuation; no stemming"
METRIC_VERSION = "gfmforge-metrics/1"

_ANSWER_LINE = re.compile(r"^[ \t>*#-]*answer\s*:[ \t]*(.*)$", re.I | re.M)
_NUMBER = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")
_INT = re.compile(r"[-+]?\d+")
_BOOL = re.compile(r"\b(yes|no|true|false)\b", re.I)
_WORD = re.compile(r"\w+", re.UNICODE)


class EvaluationError(Exception):
    pass


# -- extraction ----------------------------------------------------------------------


def _number(token: str, kind: str) -> Answer | None:
    try:
        x = float(token)
    except ValueError:
        return None
    if not math.isfinite(x):
        return None
    if kind == "integer":
        if _INT.fullmatch(token):
            return Answer("integer", int(token))
        return Answer("integer", int(x)) if x.is_integer() else None
    return Answer("real", x)


def _parse_segment(seg: str, kind: str, anchored: bool) -> Answer | None:
    if kind in ("integer", "real"):
        nums = _NUMBER.findall(seg)
        return _number(nums[-1], kind) if nums else None
    if kind == "boolean":
        # a verdict leads its justification ("Yes, because ... no ...")
        m = _BOOL.search(seg)
        return Answer("boolean", m.group(1).lower() in ("yes", "true")) if m else None
    if kind == "id_seq":
        lines = [ln for ln in seg.split("\n") if "->" in ln]
        if not lines:
            return None
        parts = [p.strip(" .,;:()[]`*") for p in lines[-1].split("->")]
        # tolerate prose before the first id ("path: 0 -> 1")
        head = _INT.findall(parts[0])
        parts[0] = head[-1] if head else ""
        if not all(_INT.fullmatch(p) for p in parts):
            return None
        return Answer("id_seq", [int(p) for p in parts])
    if kind == "id_set":
        line = seg.strip().split("\n")[0] if anchored and seg.strip() else seg
        if not anchored:
            cands = [ln for ln in seg.split("\n") if _INT.search(ln) or ln.strip().lower() == NONE_MARKER]
            if not cands:
                return None
            line = cands[-1]
        if normalize_label(line) in (NONE_MARKER, "none of them", "no nodes", "empty"):
            return Answer("id_set", [])
        ids = _INT.findall(line)
        return Answer("id_set", [int(i) for i in ids]) if ids else None
    if kind == "label":
        lines = [ln for ln in seg.strip().split("\n") if ln.strip()]
        if not lines:
            return None
        label = normalize_label(lines[0] if anchored else lines[-1])
        return Answer("label", label) if label else None
    if kind == "text":
        text = seg.strip()
        return Answer("text", text) if text else None
    raise ValueError(f"unknown answer kind {kind!r}")


def extract_answer(raw_text: str, kind: str) -> Answer | None:
    """Parse a prediction as ``kind``; None means unparseable.

    The text after the last ``Answer:`` marker is preferred (its first line,
    or everything after it for free text); otherwise the whole generation is
    searched for the last match of the kind's grammar.
    """
    if raw_text is None:
        return None
    marks = list(_ANSWER_LINE.finditer(raw_text))
    if marks:
        last = marks[-1]
        if kind == "text":
            seg = raw_text[last.start(1):]
        elif kind == "id_seq":
            seg = last.group(1)
        else:
            seg = last.group(1)
        ans = _parse_segment(seg, kind, anchored=True)
        if ans is not None:
            return ans
        if kind not in ("text",):
            return None
    return _parse_segment(raw_text, kind, anchored=False)


def extract_for_rule(raw_text: str, rule: VerifyRule, reference: Answer) -> Answer | None:
    for kind in rule.answer_kinds(reference):
        ans = extract_answer(raw_text, kind)
        if ans is not None:
            return ans
    return None


# -- metrics -------------------------------------------------------------------------


def score_classification(verdicts: Sequence[bool]) -> float:
    if not verdicts:
        raise EvaluationError("accuracy over zero predictions")
    return sum(1 for v in verdicts if v) / len(verdicts)


def score_rmse(preds: Sequence[float], refs: Sequence[float]) -> float:
    if len(preds) != len(refs):
        raise EvaluationError("predictions and references differ in length")
    if not preds:
        raise EvaluationError("RMSE needs at least one parseable prediction")
    return math.sqrt(sum((p - r) ** 2 for p, r in zip(preds, refs)) / len(preds))


def rouge_tokens(text: str) -> list[str]:
    return _WORD.findall(text.lower().replace("_", " "))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(pred_text: str, ref_text: str) -> dict[str, float]:
    """Token-level ROUGE-L precision, recall and F1."""
    p_tok, r_tok = rouge_tokens(pred_text), rouge_tokens(ref_text)
    lcs = lcs_length(p_tok, r_tok)
    precision = lcs / len(p_tok) if p_tok else 0.0
    recall = lcs / len(r_tok) if r_tok else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


score_rouge_l = rouge_l


# -- corpus scoring ----------------------------------------------------------------------


@dataclass
class ScoreReport:
    split: str
    per_task: dict[str, dict[str, dict[str, Any]]]
    aggregate: dict[str, dict[str, Any]]
    samples: list[dict[str, Any]] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "split": self.split,
            "per_task": self.per_task,
            "aggregate": self.aggregate,
            "missing": self.missing,
            "notes": self.notes,
            "samples": self.samples,
        }

    def table(self) -> str:
        rows = [("task", "metric", "value", "n", "unparseable")]
        for task in sorted(self.per_task):
            for metric, s in sorted(self.per_task[task].items()):
                rows.append((task, metric, _fmt(s["value"]), str(s["n"]), str(s["n_unparseable"])))
        for metric, s in sorted(self.aggregate.items()):
            rows.append(("ALL", metric, _fmt(s["value"]), str(s["n"]), str(s["n_unparseable"])))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = []
        for k, r in enumerate(rows):
            lines.append("  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _fmt(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise EvaluationError(f"{path}:{lineno}: {exc.msg}") from None
    return out


def read_predictions(path: str | Path) -> dict[str, str | None]:
    preds: dict[str, str | None] = {}
    for rec in read_jsonl(path):
        if "header" in rec and "id" not in rec:
            continue
        if "id" not in rec or "prediction" not in rec:
            raise EvaluationError(f"{path}: prediction records need 'id' and 'prediction'")
        preds[rec["id"]] = rec["prediction"]
    return preds


def _sample_graph(sample: InstructionSample):
    try:
        text = split_sections(sample.input)["graph"]
        return parse_graph_text(text, sample.format)
    except (SectionError, FormatError, GraphError) as exc:
        raise EvaluationError(f"{sample.id}: cannot recover the task graph: {exc}") from None


def judge(sample: InstructionSample, raw: str | None) -> dict[str, Any]:
    """Per-sample verdict: parsed answer plus correctness or metric contribution."""
    ref = Answer.from_dict(sample.meta["answer"])
    rule = VerifyRule.from_dict(sample.meta["verifier"])
    metric = sample.meta.get("metric", rule.metric)
    verdict: dict[str, Any] = {"id": sample.id, "task": sample.task, "format": sample.format, "metric": metric}
    if metric == "rouge_l":
        pred = extract_answer(raw, "text") if raw is not None else None
        verdict["parsed"] = pred is not None
        verdict["score"] = rouge_l(pred.value, str(ref.value))["f1"] if pred is not None else 0.0
        return verdict
    pred = extract_for_rule(raw, rule, ref) if raw is not None else None
    verdict["parsed"] = pred is not None
    if metric == "rmse":
        verdict["prediction"] = float(pred.value) if pred is not None and pred.kind in ("integer", "real") else None
        verdict["parsed"] = verdict["prediction"] is not None
        verdict["reference"] = float(ref.value)
        return verdict
    graph = _sample_graph(sample) if rule.kind == "path" and pred is not None and pred.kind == "id_seq" else None
    verdict["correct"] = bool(rule.accepts(pred, ref, graph))
    return verdict


def _summarise(verdicts: list[dict[str, Any]], metric: str, penalty: float | None) -> dict[str, Any]:
    n = len(verdicts)
    n_bad = sum(1 for v in verdicts if not v["parsed"])
    out: dict[str, Any] = {"n": n, "n_unparseable": n_bad}
    if metric == "accuracy":
        out["value"] = score_classification([v["correct"] for v in verdicts])
    elif metric == "rouge_l":
        out["value"] = sum(v["score"] for v in verdicts) / n
    else:
        pairs = [(v["prediction"], v["reference"]) for v in verdicts if v["parsed"]]
        if penalty is not None:
            pairs += [(v["reference"] + penalty, v["reference"]) for v in verdicts if not v["parsed"]]
        out["value"] = score_rmse([p for p, _ in pairs], [r for _, r in pairs]) if pairs else None
        out["coverage"] = (n - n_bad) / n
    return out


def evaluate_samples(
    samples: Iterable[InstructionSample],
    predictions: dict[str, str | None],
    split: str = "",
    penalize_unparseable: float | None = None,
) -> ScoreReport:
    samples = sorted(samples, key=lambda s: s.id)
    if not predictions:
        raise EvaluationError("predictions file is empty")
    known = {s.id for s in samples}
    unknown = sorted(set(predictions) - known)
    if unknown:
        shown = ", ".join(unknown[:10]) + (" ..." if len(unknown) > 10 else "")
        raise EvaluationError(f"{len(unknown)} prediction id(s) not in split {split!r}: {shown}")
    missing = sorted(known - set(predictions))
    verdicts = [judge(s, predictions.get(s.id)) for s in samples]
    by_task: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    by_metric: dict[str, list] = defaultdict(list)
    for v in verdicts:
        by_task[v["task"]][v["metric"]].append(v)
        by_metric[v["metric"]].append(v)
    per_task = {
        t: {m: _summarise(vs, m, penalize_unparseable) for m, vs in sorted(ms.items())}
        for t, ms in sorted(by_task.items())
    }
    aggregate = {m: _summarise(vs, m, penalize_unparseable) for m, vs in sorted(by_metric.items())}
    notes = {
        "metric_version": METRIC_VERSION,
        "rouge_tokenization": ROUGE_TOKENIZATION,
        "multi_witness_tasks": "any valid optimal path counts as correct",
        "unparseable_regression": (
            "excluded from RMSE" if penalize_unparseable is None
            else f"scored as reference + {penalize_unparseable}"
        ),
    }
    return ScoreReport(split, per_task, aggregate, verdicts, missing, notes)


def load_split(corpus_dir: str | Path, split: str) -> list[InstructionSample]:
    path = Path(corpus_dir) / f"{split}.jsonl"
    if not path.exists():
        raise EvaluationError(f"no split file {path}")
    return [InstructionSample.from_dict(d) for d in read_jsonl(path)]


def evaluate(
    corpus_dir: str | Path,
    split: str,
    predictions_path: str | Path,
    penalize_unparseable: float | None = None,
) -> ScoreReport:
    samples = load_split(corpus_dir, split)
    preds = read_predictions(predictions_path)
    return evaluate_samples(samples, preds, split, penalize_unparseable)
