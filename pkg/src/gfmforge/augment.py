"""Format augmentation and the two self-supervised instruction types.

Topology autoencoding (TAE) asks for the direct neighbours of one node. Feature
masked autoencoding (FMAE) hides a share of the node/edge attribute values
behind the literal ``"unknown"`` and asks for one of them back.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from typing import Any

from gfmforge.answers import Answer, VerifyRule, normalize_label
from gfmforge.graph import MASK_TOKEN, AttributedGraph, AttrValue, EdgeRecord, GraphError, NodeRecord, attr_kind, neighbors
from gfmforge.seeding import rng_for
from gfmforge.synth.tasks import TaskInstance
from gfmforge.textualize.formats import FORMATS, FormatSpec
from gfmforge.textualize.lang import InstructionSample, description_text, make_sample
from gfmforge.textualize.templates import TemplatePack, default_pack

DEFAULT_MASK_RATE = 0.2


class NotApplicableError(GraphError):
    pass


@dataclass(frozen=True)
class AugmentPlan:
    formats: tuple[FormatSpec, ...] = tuple(FormatSpec(k) for k in FORMATS)
    tae: bool = True
    fmae: bool = True
    mask_rate: float = DEFAULT_MASK_RATE

    def __post_init__(self) -> None:
        fmts = tuple(FormatSpec.parse(f) for f in self.formats)
        object.__setattr__(self, "formats", fmts)
        if not fmts:
            raise ValueError("augment plan needs at least one format")
        if len({f.kind for f in fmts}) != len(fmts):
            raise ValueError("augment plan formats must be distinct")
        if not 0.0 < self.mask_rate <= 1.0:
            raise ValueError("mask_rate must lie in (0, 1]")

    @classmethod
    def from_dict(cls, data: dict | None) -> "AugmentPlan":
        data = dict(data or {})
        fmae = data.get("fmae", {})
        if isinstance(fmae, bool):
            fmae = {"enabled": fmae}
        return cls(
            formats=tuple(data.get("formats", FORMATS)),
            tae=bool(data.get("tae", True)),
            fmae=bool(fmae.get("enabled", True)),
            mask_rate=float(fmae.get("mask_rate", DEFAULT_MASK_RATE)),
        )

    def to_dict(self) -> dict:
        return {
            "formats": [f.kind for f in self.formats],
            "tae": self.tae,
            "fmae": {"enabled": self.fmae, "mask_rate": self.mask_rate},
        }


@dataclass(frozen=True)
class MaskTarget:
    element: int | tuple[int, int]
    attr: str
    original: AttrValue

    def describe(self, directed: bool) -> str:
        if isinstance(self.element, tuple):
            a, b = self.element
            if directed:
                return f"the edge from node {a} to node {b}"
            return f"the edge between node {a} and node {b}"
        return f"node {self.element}"


@dataclass(frozen=True)
class MaskedGraph:
    graph: AttributedGraph
    masked_targets: tuple[MaskTarget, ...]
    probe: MaskTarget
    population: int = 0


def augment_formats(
    task: TaskInstance, plan: AugmentPlan, pack: TemplatePack | None = None
) -> list[InstructionSample]:
    """One sample per plan format, all sharing description, query and output."""
    tag = "format" if len(plan.formats) > 1 else "none"
    return [make_sample(task, fmt, pack, augmentation=tag) for fmt in plan.formats]


def _ssl_task(
    parent: TaskInstance | None, kind: str, g: AttributedGraph, seed: int, pack: TemplatePack, **fields: Any
) -> TaskInstance:
    parent_desc = description_text(parent, pack) if parent is not None else (
        f"This is {'a directed' if g.directed else 'an undirected'} graph. Nodes are identified by integer ids."
    )
    slots = {"parent_description": parent_desc, **fields.pop("slots")}
    query = pack.render(kind, "query", slots, directed=g.directed)
    uid = f"{parent.uid}/{kind}" if parent is not None else kind
    level = parent.level if parent is not None else "self-supervised"
    return TaskInstance(task=kind, graph=g, query=query, seed=seed, level=level, slots=slots, uid=uid, **fields)


def make_tae_sample(
    g: AttributedGraph,
    fmt: FormatSpec | str,
    seed: int,
    parent: TaskInstance | None = None,
    pack: TemplatePack | None = None,
) -> InstructionSample:
    """Ask for every direct neighbour (out-neighbour when directed) of a random node."""
    if g.n < 1:
        raise NotApplicableError("topology autoencoding needs at least one node")
    pack = pack or default_pack()
    rng = random.Random(seed)
    v = rng.randrange(g.n)
    nbrs = neighbors(g, v, direction="out")
    task = _ssl_task(
        parent, "TAE", g, seed, pack,
        target=v,
        answer=Answer("id_set", nbrs),
        verifier=VerifyRule("set"),
        slots={"node": v},
    )
    return make_sample(task, fmt, pack, augmentation="tae", extra_meta={"query_node": v})


_WORD = re.compile(r"\w")


def maskable_value(value: AttrValue) -> bool:
    """Booleans, word-less text and the mask token itself cannot be hidden meaningfully."""
    kind = attr_kind(value)
    if kind == "boolean":
        return False
    if kind == "text":
        return bool(_WORD.search(value)) and normalize_label(value) != MASK_TOKEN
    return True


def _maskable(g: AttributedGraph) -> list[tuple[int | tuple[int, int], str]]:
    out: list[tuple[int | tuple[int, int], str]] = []
    for nd in g.nodes:
        out += [(nd.id, k) for k in sorted(nd.attrs) if maskable_value(nd.attrs[k])]
    for k_e, e in enumerate(g.edges):
        out += [(("e", k_e), k) for k in sorted(e.attrs) if maskable_value(e.attrs[k])]
    return out


def mask_count(rate: float, population: int) -> int:
    # guard against 0.2 * 15 == 3.0000000000000004
    return min(population, math.ceil(round(rate * population, 9)))


def mask_graph(g: AttributedGraph, rate: float, seed: int) -> MaskedGraph:
    """Replace ``ceil(rate * population)`` attribute values with ``"unknown"``.

    The population pools every maskable attribute value of every node and
    edge; one masked value is chosen as the probe.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must lie in (0, 1]")
    pool = _maskable(g)
    if not pool:
        raise NotApplicableError("graph has no text or numeric node/edge attributes to mask")
    rng = random.Random(seed)
    chosen = rng.sample(range(len(pool)), mask_count(rate, len(pool)))
    chosen.sort()
    node_attrs = [dict(nd.attrs) for nd in g.nodes]
    edge_attrs = [dict(e.attrs) for e in g.edges]
    targets = []
    for i in chosen:
        elem, attr = pool[i]
        if isinstance(elem, tuple):
            k_e = elem[1]
            original = edge_attrs[k_e][attr]
            edge_attrs[k_e][attr] = MASK_TOKEN
            targets.append(MaskTarget(g.edges[k_e].pair, attr, original))
        else:
            original = node_attrs[elem][attr]
            node_attrs[elem][attr] = MASK_TOKEN
            targets.append(MaskTarget(elem, attr, original))
    masked = g.replace(
        nodes=tuple(NodeRecord(nd.id, a) for nd, a in zip(g.nodes, node_attrs)),
        edges=tuple(EdgeRecord(e.src, e.dst, a) for e, a in zip(g.edges, edge_attrs)),
    )
    probe = targets[rng.randrange(len(targets))]
    return MaskedGraph(masked, tuple(targets), probe, len(pool))


def _fmae_answer(value: AttrValue) -> tuple[Answer, VerifyRule]:
    kind = attr_kind(value)
    if kind == "integer":
        return Answer("integer", value), VerifyRule("exact")
    if kind == "real":
        return Answer("real", value), VerifyRule("numeric", {"eps": 1e-6})
    if len(value.split()) > 1:
        return Answer("text", value), VerifyRule("rouge")
    return Answer("label", value), VerifyRule("exact")


def make_fmae_sample(
    m: MaskedGraph,
    fmt: FormatSpec | str,
    seed: int = 0,
    parent: TaskInstance | None = None,
    pack: TemplatePack | None = None,
) -> InstructionSample:
    pack = pack or default_pack()
    probe = m.probe
    answer, rule = _fmae_answer(probe.original)
    task = _ssl_task(
        parent, "FMAE", m.graph, seed, pack,
        target=probe.element,
        answer=answer,
        verifier=rule,
        slots={"attr": probe.attr, "element": probe.describe(m.graph.directed)},
    )
    element = list(probe.element) if isinstance(probe.element, tuple) else probe.element
    extra = {
        "probe": {"element": element, "attr": probe.attr},
        "masked_count": len(m.masked_targets),
        "mask_population": m.population,
    }
    return make_sample(task, fmt, pack, augmentation="fmae", extra_meta=extra)


def has_maskable_attrs(g: AttributedGraph) -> bool:
    return bool(_maskable(g))


def expand_task(
    task: TaskInstance, plan: AugmentPlan, seed: int, pack: TemplatePack | None = None
) -> list[InstructionSample]:
    """Format variants of ``task`` plus its TAE sample and, if attributed, its FMAE sample.

    Each self-supervised sample uses a single format picked from the plan.
    """
    pack = pack or default_pack()
    samples = augment_formats(task, plan, pack)
    if plan.tae and task.graph.n >= 1:
        fmt = plan.formats[rng_for(seed, "tae-format", task.uid).randrange(len(plan.formats))]
        samples.append(make_tae_sample(task.graph, fmt, rng_for(seed, "tae", task.uid).getrandbits(63), task, pack))
    if plan.fmae and has_maskable_attrs(task.graph):
        fmt = plan.formats[rng_for(seed, "fmae-format", task.uid).randrange(len(plan.formats))]
        mseed = rng_for(seed, "fmae", task.uid).getrandbits(63)
        m = mask_graph(task.graph, plan.mask_rate, mseed)
        samples.append(make_fmae_sample(m, fmt, mseed, task, pack))
    return samples

