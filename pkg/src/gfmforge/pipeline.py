"""Corpus assembly: semantic ingestion, synthetic generation, splits and JSONL output."""

from __future__ import annotations

import hashlib
import json
import os
import random
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from gfmforge.answers import Answer, VerifyRule, normalize_label, render_answer
from gfmforge.augment import AugmentPlan, expand_task
from gfmforge.graph import (
    AttributedGraph,
    EdgeRecord,
    GraphError,
    NodeRecord,
    attr_kind,
    dumps_graph,
    ego_graph,
    load_graph,
)
from gfmforge.seeding import derive_seed
from gfmforge.synth.er import ErConfig
from gfmforge.synth.tasks import (
    BINARY_KINDS,
    TASK_KINDS,
    TaskConstraints,
    TaskInstance,
    default_er_config,
    gen_task,
)
from gfmforge.textualize.lang import InstructionSample
from gfmforge.textualize.templates import TemplatePack, default_pack, load_pack

SCHEMA_VERSION = "gfmforge-corpus/1"
SPLITS = ("train", "valid", "test")
SAMPLE_KEYS = ("id", "task", "level", "format", "split", "input", "output", "meta")
TASK_LEVELS = ("node", "link", "graph", "open-ended")
TASK_TYPES = ("multiclass", "binary", "ordinal-regression", "regression", "text-generation")
SPLIT_MODES = ("random", "respect-original")
MAX_DEDUP_ATTEMPTS = 200


class ConfigError(ValueError):
    pass


class PipelineError(Exception):
    pass


class LeakageError(PipelineError):
    pass


# -- semantic datasets ---------------------------------------------------------------------


@dataclass(frozen=True)
class SemanticTaskConfig:
    name: str
    graph_file: str
    task_level: str
    task_type: str
    target_attr: str
    ego_radius: int | None = None
    description: str = ""
    split_attr: str = "split"

    def __post_init__(self) -> None:
        if self.task_level not in TASK_LEVELS:
            raise ConfigError(f"{self.name}: task_level must be one of {TASK_LEVELS}")
        if self.task_type not in TASK_TYPES:
            raise ConfigError(f"{self.name}: task_type must be one of {TASK_TYPES}")
        if not self.name or "/" in self.name:
            raise ConfigError(f"dataset name {self.name!r} must be non-empty and contain no '/'")
        if self.ego_radius is None:
            object.__setattr__(self, "ego_radius", 1 if self.task_level == "link" else 2)
        if self.task_level in ("node", "link") and self.ego_radius < 1:
            raise ConfigError(f"{self.name}: ego_radius must be >= 1 for node and link tasks")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str | Path | None = None) -> "SemanticTaskConfig":
        kw = dict(data)
        unknown = set(kw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"semantic task: unknown keys {sorted(unknown)}")
        for key in ("name", "graph_file", "task_level", "task_type", "target_attr"):
            if key not in kw:
                raise ConfigError(f"semantic task: missing {key!r}")
        path = Path(kw["graph_file"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        kw["graph_file"] = str(path)
        return cls(**kw)

    def to_dict(self) -> dict[str, Any]:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}

    def graph_paths(self) -> list[Path]:
        p = Path(self.graph_file)
        if p.is_dir():
            return sorted(p.glob("*.json"))
        if not p.exists():
            raise ConfigError(f"{self.name}: graph file {p} does not exist")
        return [p]


def _strip(g: AttributedGraph, names: set[str]) -> AttributedGraph:
    return g.replace(
        nodes=tuple(NodeRecord(nd.id, {k: v for k, v in nd.attrs.items() if k not in names}) for nd in g.nodes),
        edges=tuple(EdgeRecord(e.src, e.dst, {k: v for k, v in e.attrs.items() if k not in names}) for e in g.edges),
    )


def _without_edge(g: AttributedGraph, u: int, v: int) -> AttributedGraph:
    def hit(e: EdgeRecord) -> bool:
        return (e.src, e.dst) == (u, v) or (not g.directed and (e.src, e.dst) == (v, u))

    return g.replace(edges=tuple(e for e in g.edges if not hit(e)))


def _semantic_answer(cfg: SemanticTaskConfig, value: Any) -> tuple[Answer, VerifyRule]:
    if cfg.task_type in ("regression", "ordinal-regression"):
        if attr_kind(value) not in ("integer", "real"):
            raise PipelineError(f"{cfg.name}: regression label {value!r} is not numeric")
        kind = "integer" if attr_kind(value) == "integer" else "real"
        return Answer(kind, value), VerifyRule("numeric", {"eps": 1e-6, "metric": "rmse"})
    if cfg.task_type == "text-generation":
        return Answer("text", str(value)), VerifyRule("rouge")
    if cfg.task_type == "binary" and isinstance(value, bool):
        return Answer("boolean", value), VerifyRule("boolean")
    return Answer("label", str(value)), VerifyRule("exact")


def _leak_check(cfg: SemanticTaskConfig, uid: str, g: AttributedGraph, answer: Answer) -> None:
    """The label attribute must be gone and no remaining value may equal the label."""
    if answer.kind not in ("label", "boolean"):
        return
    for nd in g.nodes:
        if cfg.target_attr in nd.attrs:
            raise LeakageError(f"{uid}: node {nd.id} still carries {cfg.target_attr!r}")
    for e in g.edges:
        if cfg.task_level == "link" and cfg.target_attr in e.attrs:
            raise LeakageError(f"{uid}: edge {e.pair} still carries {cfg.target_attr!r}")
    if answer.kind == "label":
        want = normalize_label(answer.value)
        for rec in (*g.nodes, *g.edges):
            for k, v in rec.attrs.items():
                if isinstance(v, str) and normalize_label(v) == want:
                    raise LeakageError(f"{uid}: attribute {k!r} repeats the label {answer.value!r}")


def _choices_note(cfg: SemanticTaskConfig, labels: Iterable[Any]) -> str:
    if cfg.task_type not in ("multiclass", "binary"):
        return ""
    names = sorted({str(x) for x in labels})
    return " Choose one of: " + ", ".join(names) + "." if names else ""


def build_semantic_instances(
    cfg: SemanticTaskConfig, seed: int = 0, pack: TemplatePack | None = None
) -> list[TaskInstance]:
    """One TaskInstance per labelled target (node/link) or per graph file (graph/open-ended).

    The original split tag, if the element carries ``cfg.split_attr``, is kept
    in ``slots["original_split"]`` and the attribute itself is stripped.
    """
    pack = pack or default_pack()
    paths = cfg.graph_paths()
    if not paths:
        raise ConfigError(f"{cfg.name}: no graph files under {cfg.graph_file}")
    hidden = {cfg.target_attr, cfg.split_attr}
    out: list[TaskInstance] = []

    def emit(kind: str, g: AttributedGraph, answer: Answer, rule: VerifyRule, slots: dict, target: Any,
             original: Any) -> None:
        uid = f"{cfg.name}/{len(out):06d}"
        slots = {"domain": cfg.description or f"This graph comes from the {cfg.name} dataset.", **slots}
        if original is not None:
            slots["original_split"] = str(original)
        _leak_check(cfg, uid, g, answer)
        slots["value"] = render_answer(answer)
        query = pack.render(kind, "query", slots, directed=g.directed)
        out.append(TaskInstance(
            task=cfg.name, graph=g, query=query, answer=answer, verifier=rule,
            seed=derive_seed(seed, "semantic", cfg.name, len(out)), level=cfg.task_level,
            target=target, slots=slots, uid=uid, template=kind,
            description=pack.render(kind, "description", slots, directed=g.directed),
        ))

    if cfg.task_level in ("graph", "open-ended"):
        graphs = [(p, _load(cfg, p)) for p in paths]
        labels = [g.graph_attrs.get(cfg.target_attr) for _, g in graphs]
        note = _choices_note(cfg, [x for x in labels if x is not None])
        kind = "Semantic-open-ended" if cfg.task_level == "open-ended" else "Semantic-graph"
        for (p, g), value in zip(graphs, labels):
            if value is None:
                continue
            answer, rule = _semantic_answer(cfg, value)
            attrs = {k: v for k, v in g.graph_attrs.items() if k not in hidden}
            g2 = _strip(g, hidden).replace(graph_attrs=attrs)
            slots = {"target_attr": cfg.target_attr, "choices_note": note}
            emit(kind, g2, answer, rule, slots, p.name, g.graph_attrs.get(cfg.split_attr))
        if not out:
            raise PipelineError(f"{cfg.name}: no graph carries {cfg.target_attr!r}")
        return out

    if len(paths) != 1:
        raise ConfigError(f"{cfg.name}: node and link tasks read a single graph file")
    g = _load(cfg, paths[0])

    if cfg.task_level == "node":
        targets = [nd for nd in g.nodes if cfg.target_attr in nd.attrs]
        note = _choices_note(cfg, [nd.attrs[cfg.target_attr] for nd in targets])
        for nd in targets:
            ego = ego_graph(g, nd.id, cfg.ego_radius)
            center = ego.graph_attrs["ego_center"][0]
            answer, rule = _semantic_answer(cfg, nd.attrs[cfg.target_attr])
            slots = {"target_attr": cfg.target_attr, "node": center, "choices_note": note}
            emit("Semantic-node", _strip(ego, hidden), answer, rule, slots, nd.id, nd.attrs.get(cfg.split_attr))
    elif cfg.task_type == "binary" and not any(cfg.target_attr in e.attrs for e in g.edges):
        _binary_links(cfg, g, seed, hidden, emit)
    else:
        targets = [e for e in g.edges if cfg.target_attr in e.attrs]
        note = _choices_note(cfg, [e.attrs[cfg.target_attr] for e in targets])
        for e in targets:
            ego = ego_graph(g, (e.src, e.dst), cfg.ego_radius)
            a, b = ego.graph_attrs["ego_center"]
            answer, rule = _semantic_answer(cfg, e.attrs[cfg.target_attr])
            slots = {"target_attr": cfg.target_attr, "source": a, "target": b, "choices_note": note}
            view = _strip(_without_edge(ego, a, b), hidden)
            emit("Semantic-link", view, answer, rule, slots, [e.src, e.dst], e.attrs.get(cfg.split_attr))
    if not out:
        raise PipelineError(f"{cfg.name}: no element carries the label attribute {cfg.target_attr!r}")
    return out


def _binary_links(cfg: SemanticTaskConfig, g: AttributedGraph, seed: int, hidden: set[str], emit: Callable) -> None:
    """Existing edges as positives, an equal number of uniform non-edges as negatives."""
    positives = sorted({e.pair if g.directed else tuple(sorted(e.pair)) for e in g.edges if e.src != e.dst})
    pos_set = set(positives)
    rng = random.Random(derive_seed(seed, "negatives", cfg.name))
    if g.directed:
        space = g.n * (g.n - 1)
    else:
        space = g.n * (g.n - 1) // 2
    if space - len(pos_set) < len(positives):
        raise PipelineError(f"{cfg.name}: not enough non-edges for 1:1 negative sampling")
    negatives: set[tuple[int, int]] = set()
    while len(negatives) < len(positives):
        u, v = rng.sample(range(g.n), 2)
        if not g.directed:
            u, v = min(u, v), max(u, v)
        if (u, v) not in pos_set:
            negatives.add((u, v))
    pairs = [(p, True) for p in positives] + [(p, False) for p in sorted(negatives)]
    for (u, v), label in pairs:
        ego = ego_graph(g, (u, v), cfg.ego_radius)
        a, b = ego.graph_attrs["ego_center"]
        view = _strip(_without_edge(ego, a, b), hidden)
        answer = Answer("boolean", label)
        detail = (f"Yes. Node {a} and node {b} are linked." if label
                  else f"No. Node {a} and node {b} are not linked.")
        slots = {"source": a, "target": b, "detail": detail}
        emit("Semantic-link-binary", view, answer, VerifyRule("boolean"), slots, [u, v], None)


def _load(cfg: SemanticTaskConfig, path: Path) -> AttributedGraph:
    try:
        return load_graph(path)
    except (OSError, GraphError) as exc:
        raise ConfigError(f"{cfg.name}: {exc}") from None


# -- splitting -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train: int = 500
    valid: int = 100
    test: int = 200
    seed: int = 0
    mode: str = "random"

    def __post_init__(self) -> None:
        for name in SPLITS:
            if getattr(self, name) < 0:
                raise ConfigError(f"split count {name} must be >= 0")
        if self.total < 1:
            raise ConfigError("split counts must not all be zero")
        if self.mode not in SPLIT_MODES:
            raise ConfigError(f"split mode must be one of {SPLIT_MODES}")

    @property
    def total(self) -> int:
        return self.train + self.valid + self.test

    def counts(self) -> dict[str, int]:
        return {s: getattr(self, s) for s in SPLITS}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "SplitSpec":
        kw = dict(data or {})
        unknown = set(kw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"split: unknown keys {sorted(unknown)}")
        return cls(**kw)

    def to_dict(self) -> dict[str, Any]:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def split(
    items: Sequence[str],
    spec: SplitSpec,
    original: Mapping[str, str] | None = None,
    stream: str = "",
) -> dict[str, str]:
    """Assign ids to splits: seeded shuffle, then prefix assignment.

    In ``respect-original`` mode each id competes only for the split named in
    ``original``. Ids beyond the requested counts are left unassigned.
    """
    ids = sorted(set(items))
    if len(ids) != len(items):
        raise PipelineError("split items must be unique")
    rng = random.Random(derive_seed(spec.seed, "split", stream))
    if spec.mode == "respect-original" and original:
        out: dict[str, str] = {}
        for name in SPLITS:
            pool = [i for i in ids if original.get(i) == name]
            want = getattr(spec, name)
            if len(pool) < want:
                raise PipelineError(
                    f"{stream or 'split'}: original {name} split has {len(pool)} items, "
                    f"{want} requested (short by {want - len(pool)})"
                )
            rng.shuffle(pool)
            out.update({i: name for i in pool[:want]})
        return out
    if len(ids) < spec.total:
        raise PipelineError(
            f"{stream or 'split'}: {len(ids)} items available, {spec.total} requested "
            f"(short by {spec.total - len(ids)})"
        )
    rng.shuffle(ids)
    out = {}
    pos = 0
    for name in SPLITS:
        want = getattr(spec, name)
        out.update({i: name for i in ids[pos:pos + want]})
        pos += want
    return out


# -- suite config ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TaskEntry:
    kind: str
    count: int
    er: dict[str, Any] = field(default_factory=dict)
    constraints: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in TASK_KINDS:
            raise ConfigError(f"unknown task kind {self.kind!r}")
        if self.count < 0:
            raise ConfigError(f"{self.kind}: count must be >= 0")
        # validate eagerly so bad configs fail before any output is written
        ErConfig.from_dict({**default_er_config(self.kind).to_dict(), **self.er})
        TaskConstraints.from_dict(self.constraints)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TaskEntry":
        unknown = set(data) - {"kind", "count", "er", "constraints"}
        if unknown:
            raise ConfigError(f"task entry: unknown keys {sorted(unknown)}")
        if "kind" not in data or "count" not in data:
            raise ConfigError("task entry needs 'kind' and 'count'")
        try:
            return cls(data["kind"], int(data["count"]), dict(data.get("er", {})), dict(data.get("constraints", {})))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{data.get('kind')}: {exc}") from None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "count": self.count, "er": self.er, "constraints": self.constraints}


@dataclass(frozen=True)
class SuiteConfig:
    tasks: tuple[TaskEntry, ...] = ()
    semantic: tuple[SemanticTaskConfig, ...] = ()
    augment: AugmentPlan = field(default_factory=AugmentPlan)
    split: SplitSpec = field(default_factory=SplitSpec)
    templates: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        names = [t.kind for t in self.tasks] + [s.name for s in self.semantic]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise ConfigError(f"dataset names must be unique, repeated: {dup}")
        if self.templates is not None and not Path(self.templates).exists():
            raise ConfigError(f"template pack {self.templates} does not exist")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str | Path | None = None) -> "SuiteConfig":
        unknown = set(data) - {"tasks", "semantic", "augment", "split", "templates", "seed"}
        if unknown:
            raise ConfigError(f"suite config: unknown keys {sorted(unknown)}")
        templates = data.get("templates")
        if templates is not None and base_dir is not None and not Path(templates).is_absolute():
            templates = str(Path(base_dir) / templates)
        try:
            plan = AugmentPlan.from_dict(data.get("augment"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"augment: {exc}") from None
        return cls(
            tasks=tuple(TaskEntry.from_dict(t) for t in data.get("tasks", [])),
            semantic=tuple(SemanticTaskConfig.from_dict(s, base_dir) for s in data.get("semantic", [])),
            augment=plan,
            split=SplitSpec.from_dict(data.get("split")),
            templates=templates,
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SuiteConfig":
        try:
            data = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: suite config must be a JSON object")
        return cls.from_dict(data, Path(path).parent)

    def with_seed(self, seed: int) -> "SuiteConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tasks": [t.to_dict() for t in self.tasks],
            "semantic": [s.to_dict() for s in self.semantic],
            "augment": self.augment.to_dict(),
            "split": self.split.to_dict(),
            "templates": self.templates,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- synthetic generation --------------------------------------------------------------------


def _slot(args: tuple[TaskEntry, int, int, int, TemplatePack]) -> TaskInstance:
    entry, seed, index, attempt, pack = args
    s = derive_seed(seed, "generate", entry.kind, index, attempt)
    er = ErConfig.from_dict({**default_er_config(entry.kind).to_dict(), **entry.er, "seed": s})
    con = dict(entry.constraints)
    if entry.kind in BINARY_KINDS and "label" not in con:
        con["label"] = index % 2 == 0
    inst = gen_task(entry.kind, er, TaskConstraints.from_dict(con), pack)
    return replace(inst, uid=f"{entry.kind}/{index:06d}")


def content_key(inst: TaskInstance) -> str:
    blob = dumps_graph(inst.graph, compact=True) + "\x1f" + inst.query
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def generate_instances(
    entry: TaskEntry, seed: int, pack: TemplatePack | None = None, executor: Executor | None = None
) -> list[TaskInstance]:
    """``entry.count`` distinct instances; slot i is redrawn until its content is new."""
    pack = pack or default_pack()
    jobs = [(entry, seed, i, 0, pack) for i in range(entry.count)]
    first = list(executor.map(_slot, jobs, chunksize=16)) if executor else [_slot(j) for j in jobs]
    seen: set[str] = set()
    out = []
    for i, inst in enumerate(first):
        attempt = 0
        while content_key(inst) in seen:
            attempt += 1
            if attempt > MAX_DEDUP_ATTEMPTS:
                raise PipelineError(f"{entry.kind}: cannot find a distinct instance for slot {i}")
            inst = _slot((entry, seed, i, attempt, pack))
        seen.add(content_key(inst))
        out.append(inst)
    return out


def write_instances(instances: Iterable[TaskInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def read_instances(path: str | Path) -> list[TaskInstance]:
    with open(path, encoding="utf-8") as fh:
        return [TaskInstance.from_dict(json.loads(line)) for line in fh if line.strip()]


def _expand(args: tuple[TaskInstance, AugmentPlan, int, TemplatePack]) -> list[InstructionSample]:
    inst, plan, seed, pack = args
    return expand_task(inst, plan, seed, pack)


def augment_instances(
    instances: Sequence[TaskInstance],
    plan: AugmentPlan,
    seed: int,
    pack: TemplatePack | None = None,
    executor: Executor | None = None,
) -> list[InstructionSample]:
    pack = pack or default_pack()
    aseed = derive_seed(seed, "augment")
    jobs = [(inst, plan, aseed, pack) for inst in instances]
    groups = executor.map(_expand, jobs, chunksize=16) if executor else map(_expand, jobs)
    out = []
    for inst, group in zip(instances, groups):
        dataset = inst.uid.split("/", 1)[0]
        out += [replace(s, meta={**s.meta, "dataset": dataset, "parent": inst.uid}) for s in group]
    return out


# -- corpus ------------------------------------------------------------------------------------


@dataclass
class Corpus:
    samples: list[InstructionSample]
    manifest: dict[str, Any]

    def split(self, name: str) -> list[InstructionSample]:
        return [s for s in self.samples if s.split == name]


def input_hash(sample: InstructionSample) -> str:
    return hashlib.sha256(sample.input.encode("utf-8")).hexdigest()


def make_manifest(
    samples: Sequence[InstructionSample],
    template_version: str,
    config_hash: str | None = None,
    extra: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    from gfmforge import __version__

    per_split = {s: 0 for s in SPLITS}
    per_task: dict[str, dict[str, int]] = {}
    per_dataset: dict[str, dict[str, int]] = {}
    per_format: dict[str, int] = {}
    metrics: dict[str, list[str]] = {}
    for s in samples:
        per_split[s.split] = per_split.get(s.split, 0) + 1
        t = per_task.setdefault(s.task, {k: 0 for k in SPLITS})
        t[s.split] = t.get(s.split, 0) + 1
        d = per_dataset.setdefault(s.meta.get("dataset", s.task), {k: 0 for k in SPLITS})
        d[s.split] = d.get(s.split, 0) + 1
        per_format[s.format] = per_format.get(s.format, 0) + 1
        m = metrics.setdefault(s.task, [])
        if s.meta.get("metric") not in m:
            m.append(s.meta.get("metric"))
    return {
        "schema": SCHEMA_VERSION,
        "tool": f"gfmforge {__version__}",
        "template_version": template_version,
        "config_hash": config_hash,
        "sample_keys": list(SAMPLE_KEYS),
        "splits": per_split,
        "tasks": dict(sorted(per_task.items())),
        "datasets": dict(sorted(per_dataset.items())),
        "formats": dict(sorted(per_format.items())),
        "metrics": {k: sorted(v) for k, v in sorted(metrics.items())},
        **(extra or {}),
    }


def _dump_line(sample: InstructionSample) -> str:
    return json.dumps(sample.to_dict(), ensure_ascii=False, sort_keys=False, separators=(", ", ": ")) + "\n"


def emit_jsonl(corpus: Corpus, out_dir: str | Path) -> None:
    """``train/valid/test.jsonl`` sorted by sample id, plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = [s.id for s in corpus.samples]
    if len(set(ids)) != len(ids):
        raise PipelineError("sample ids are not unique")
    bad = sorted({s.split for s in corpus.samples} - set(SPLITS))
    if bad:
        raise PipelineError(f"samples without a valid split: {bad}")
    for name in SPLITS:
        rows = sorted((s for s in corpus.samples if s.split == name), key=lambda s: s.id)
        with open(out / f"{name}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(_dump_line(s) for s in rows)
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(corpus.manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def load_corpus(corpus_dir: str | Path) -> Corpus:
    root = Path(corpus_dir)
    if not root.is_dir():
        raise PipelineError(f"corpus directory {root} does not exist")
    samples = []
    for name in SPLITS:
        path = root / f"{name}.jsonl"
        if not path.exists():
            continue
        with open(path, encoding="utf-8") as fh:
            samples += [InstructionSample.from_dict(json.loads(line)) for line in fh if line.strip()]
    mpath = root / "manifest.json"
    manifest = json.loads(mpath.read_text("utf-8")) if mpath.exists() else {}
    return Corpus(samples, manifest)


def make_pool(jobs: int | None) -> Executor | None:
    n = jobs if jobs is not None else (os.cpu_count() or 1)
    return ProcessPoolExecutor(max_workers=n) if n > 1 else None


def assign_splits(instances: Sequence[TaskInstance], spec: SplitSpec) -> list[TaskInstance]:
    """Split each dataset separately; returns kept instances with slots["split"] set."""
    by_ds: dict[str, list[TaskInstance]] = {}
    for inst in instances:
        by_ds.setdefault(inst.uid.split("/", 1)[0], []).append(inst)
    kept = []
    for ds, group in by_ds.items():
        original = {i.uid: i.slots["original_split"] for i in group if "original_split" in i.slots}
        assignment = split([i.uid for i in group], spec, original, stream=ds)
        kept += [replace(i, slots={**i.slots, "split": assignment[i.uid]}) for i in group if i.uid in assignment]
    return kept


_SPLIT_RANK = {"test": 0, "valid": 1, "train": 2}


def decontaminate(samples: Sequence[InstructionSample]) -> tuple[list[InstructionSample], list[str]]:
    """Drop SSL samples whose prompt also appears in another split.

    Small unattributed graphs recur across tasks, so their TAE/FMAE prompts
    can coincide. The copy in the evaluation-most split survives (test, then
    valid, then train). A clash between two task samples is a real leak.
    """
    by_hash: dict[str, list[InstructionSample]] = {}
    for s in samples:
        by_hash.setdefault(input_hash(s), []).append(s)
    drop: set[str] = set()
    for group in by_hash.values():
        if len({s.split for s in group}) < 2:
            continue
        keep = min(_SPLIT_RANK[s.split] for s in group)
        for s in group:
            if _SPLIT_RANK[s.split] == keep:
                continue
            if s.meta.get("augmentation") not in ("tae", "fmae"):
                others = ", ".join(sorted(x.id for x in group if x is not s))
                raise LeakageError(f"{s.id} ({s.split}) has the same prompt as {others}")
            drop.add(s.id)
    return [s for s in samples if s.id not in drop], sorted(drop)


def build_suite(cfg: SuiteConfig, jobs: int | None = 1) -> Corpus:
    """Generate, split at the instance level, then augment; every split inherits its parent's."""
    pack = load_pack(cfg.templates)
    executor = make_pool(jobs)
    try:
        instances: list[TaskInstance] = []
        for entry in cfg.tasks:
            instances += generate_instances(entry, cfg.seed, pack, executor)
        for sem in cfg.semantic:
            instances += build_semantic_instances(sem, cfg.seed, pack)
        kept = assign_splits(instances, cfg.split)
        samples = augment_instances(kept, cfg.augment, cfg.seed, pack, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    split_of = {i.uid: i.slots["split"] for i in kept}
    samples = [s.with_split(split_of[s.meta["parent"]]) for s in samples]
    samples, dropped = decontaminate(samples)
    samples.sort(key=lambda s: s.id)
    manifest = make_manifest(samples, pack.version, cfg.config_hash(),
                             {"seed": cfg.seed, "split_spec": cfg.split.to_dict(), "decontaminated": dropped})
    return Corpus(samples, manifest)
