"""Per-format prompt length and accuracy (the performance/token trade-off)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

from gfmforge.evaluate import judge
from gfmforge.textualize.lang import InstructionSample
from gfmforge.textualize.tokens import count_tokens


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class FormatRow:
    format: str
    n: int
    mean_tokens: float
    accuracy: float | None = None
    n_scored: int = 0


def format_report(
    samples: Sequence[InstructionSample],
    predictions: Mapping[str, str | None] | None = None,
    tokenizer: str = "simple",
) -> list[FormatRow]:
    """Rows for the format-augmented samples, one per format, in first-seen order.

    Accuracy counts only accuracy-scored samples that have a prediction.
    """
    pool = [s for s in samples if s.meta.get("augmentation") in ("format", "none")]
    formats = list(dict.fromkeys(s.format for s in pool))
    if len(formats) < 2:
        raise ReportError(f"format report needs a corpus with at least 2 formats, found {formats or 'none'}")
    rows = []
    for fmt in formats:
        group = [s for s in pool if s.format == fmt]
        mean = sum(count_tokens(s.input, tokenizer) for s in group) / len(group)
        acc, scored = None, 0
        if predictions is not None:
            verdicts = [
                judge(s, predictions[s.id])["correct"]
                for s in group
                if s.id in predictions and s.meta.get("metric") == "accuracy"
            ]
            scored = len(verdicts)
            acc = sum(verdicts) / scored if scored else None
        rows.append(FormatRow(fmt, len(group), mean, acc, scored))
    return rows


def rows_to_csv(rows: Sequence[FormatRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    with_acc = any(r.accuracy is not None for r in rows)
    w.writerow(["format", "n", "mean_tokens"] + (["accuracy", "n_scored"] if with_acc else []))
    for r in rows:
        acc = [] if not with_acc else ["" if r.accuracy is None else f"{r.accuracy:.4f}", r.n_scored]
        w.writerow([r.format, r.n, f"{r.mean_tokens:.2f}"] + acc)
    return buf.getvalue()


def rows_to_table(rows: Sequence[FormatRow]) -> str:
    reader = list(csv.reader(io.StringIO(rows_to_csv(rows))))
    widths = [max(len(r[i]) for r in reader) for i in range(len(reader[0]))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in reader]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def plot_format_report(rows: Sequence[FormatRow], path: str) -> None:
    """Bar chart of mean tokens per format, with accuracy on a twin axis when known."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r.format for r in rows]
    xs = range(len(rows))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(xs, [r.mean_tokens for r in rows], color="#8da0cb", width=0.6)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names)
    ax.set_ylabel("mean tokens per prompt")
    ax.spines["top"].set_visible(False)
    accs = [r.accuracy for r in rows]
    if any(a is not None for a in accs):
        ax2 = ax.twinx()
        ax2.plot([x for x, a in zip(xs, accs) if a is not None], [a for a in accs if a is not None],
                 "o-", color="#d95f02")
        ax2.set_ylim(0, 1.05)
        ax2.set_ylabel("accuracy", color="#d95f02")
        ax2.spines["top"].set_visible(False)
    fig.tight_layout()
    # fixed metadata keeps the file byte-stable across runs
    fig.savefig(path, metadata={"Software": None} if path.endswith(".png") else None)
    plt.close(fig)
