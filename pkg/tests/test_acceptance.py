"""The ten acceptance criteria, one test each.

Every test registers a PASS/FAIL line that is printed after the run, so the
summary survives even when pytest captures output.
"""

import contextlib
import filecmp
import itertools
import json
import math
import random
import re
import time
from pathlib import Path

import pytest

import conftest
import oracles
from conftest import random_attr_graph
from gfmforge.answers import Answer, VerifyRule
from gfmforge.augment import MASK_TOKEN, AugmentPlan
from gfmforge.cli import main
from gfmforge.evaluate import lcs_length, rouge_l, rouge_tokens, score_rmse
from gfmforge.graph import AttributedGraph, save_graph
from gfmforge.pipeline import (
    SPLITS,
    SuiteConfig,
    augment_instances,
    build_suite,
    generate_instances,
    input_hash,
    load_corpus,
    TaskEntry,
)
from gfmforge.synth.er import FAMILIES, FAMILY_MIN_N, er_graph, family_graph
from gfmforge.synth.solvers import (
    solve_attribute_retrieval,
    solve_degree,
    solve_graph_automorphism,
    solve_graph_size,
    solve_graph_structure,
    solve_hamilton_path,
    solve_max_triangle_sum,
    solve_shortest_path,
    solve_subgraph_matching,
)
from gfmforge.synth.tasks import TASK_KINDS
from gfmforge.textualize.formats import FORMATS, parse_graph_text, render_graph_text
from gfmforge.textualize.lang import split_sections
from stub_server import StubEndpoint
from test_evaluate import LCS_CASES


@contextlib.contextmanager
def criterion(number, title):
    """Record PASS unless the body raises; the detail dict is filled by the body."""
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        msg = str(exc).split("\n")[0][:120]
        conftest.ACCEPTANCE[number] = f"[FAIL] {number:2d}. {title}: {msg}"
        print(conftest.ACCEPTANCE[number])
        raise
    note = ", ".join(f"{k}={v}" for k, v in detail.items())
    conftest.ACCEPTANCE[number] = f"[PASS] {number:2d}. {title}" + (f" ({note})" if note else "")
    print(conftest.ACCEPTANCE[number])


# -- shared fixtures ------------------------------------------------------------------------


def write_semantic_data(root: Path, n_nodes: int, n_link_edges: int, n_docs: int, seed: int = 0) -> None:
    rng = random.Random(seed)
    topics = ["databases", "learning", "theory", "systems", "vision"]
    nodes = [{"title": f"paper {i}", "topic": rng.choice(topics), "year": rng.randint(1990, 2020)}
             for i in range(n_nodes)]
    edges = set()
    while len(edges) < 2 * n_nodes:
        u, v = rng.sample(range(n_nodes), 2)
        edges.add((min(u, v), max(u, v)))
    save_graph(AttributedGraph.build(nodes, sorted(edges)), root / "citations.json")

    n_link_nodes = max(12, n_link_edges // 2)
    links = set()
    while len(links) < n_link_edges:
        u, v = rng.sample(range(n_link_nodes), 2)
        links.add((min(u, v), max(u, v)))
    lnodes = [{"name": f"user {i}"} for i in range(n_link_nodes)]
    save_graph(AttributedGraph.build(lnodes, sorted(links)), root / "social.json")

    docs = root / "molecules"
    docs.mkdir()
    for i in range(n_docs):
        n = rng.randint(3, 6)
        g = AttributedGraph.build([{"element": rng.choice("CNO")} for _ in range(n)],
                                  [(j, j + 1) for j in range(n - 1)],
                                  graph_attrs={"summary": f"a chain of {n} atoms with tag {i}"})
        save_graph(g, docs / f"mol{i:03d}.json")


def semantic_entries():
    return [
        {"name": "Cite-topic", "graph_file": "citations.json", "task_level": "node",
         "task_type": "multiclass", "target_attr": "topic", "description": "Nodes are papers."},
        {"name": "Cite-year", "graph_file": "citations.json", "task_level": "node",
         "task_type": "regression", "target_attr": "year", "description": "Nodes are papers."},
        {"name": "Social-link", "graph_file": "social.json", "task_level": "link",
         "task_type": "binary", "target_attr": "follows", "description": "Nodes are users."},
        {"name": "Mol-caption", "graph_file": "molecules", "task_level": "open-ended",
         "task_type": "text-generation", "target_attr": "summary", "description": "A molecule."},
    ]


@pytest.fixture(scope="module")
def full_config(tmp_path_factory):
    """Every synthetic task plus one semantic dataset per answer type."""
    root = tmp_path_factory.mktemp("full")
    write_semantic_data(root, n_nodes=40, n_link_edges=20, n_docs=14)
    tasks = [{"kind": k, "count": 14} for k in TASK_KINDS]
    cfg = {"seed": 21, "tasks": tasks, "semantic": semantic_entries(),
           "split": {"train": 8, "valid": 2, "test": 4, "seed": 21}}
    path = root / "suite.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


# -- 1 --------------------------------------------------------------------------------------


def _rand(rng, lo, hi, weighted=False):
    return er_graph(rng, rng.randint(lo, hi), rng.uniform(0.1, 0.8), rng.random() < 0.5,
                    (1, 10) if weighted else None)


def _node_weights(rng, g):
    return g.replace(nodes=tuple(type(nd)(nd.id, {"weight": rng.randint(1, 20)}) for nd in g.nodes))


def _check_size(rng):
    g = _rand(rng, 0, 8)
    return solve_graph_size(g) == oracles.size(g)


def _check_attr(rng):
    g = random_attr_graph(rng, n_max=8, attr_p=1.0)
    targets = [(nd.id, k) for nd in g.nodes for k in nd.attrs]
    targets += [((e.src, e.dst), k) for e in g.edges for k in e.attrs]
    if not targets:
        return None
    where, attr = rng.choice(targets)
    got, want = solve_attribute_retrieval(g, where, attr), oracles.lookup(g, where, attr)
    return got == want and type(got) is type(want)


def _check_degree(rng):
    g = _rand(rng, 1, 8)
    v = rng.randrange(g.n)
    return solve_degree(g, v) == oracles.degree(g, v)


def _check_shortest(rng):
    g = _rand(rng, 2, 8, weighted=True)
    s, t = rng.randrange(g.n), rng.randrange(g.n)
    res, ref = solve_shortest_path(g, s, t), oracles.bellman_ford(g, s, t)
    if ref is None:
        return res is None
    return res is not None and res[0] == ref and oracles.walk_length(g, res[1]) == ref


def _check_triangle(rng):
    g = _node_weights(rng, _rand(rng, 3, 8))
    return solve_max_triangle_sum(g) == oracles.max_triangle(g)


def _check_hamilton(rng):
    g = _rand(rng, 1, 8)
    ok, witness = solve_hamilton_path(g)
    if ok != oracles.hamilton(g):
        return False
    return not ok or (sorted(witness) == list(range(g.n)) and oracles.walk_ok(g, witness))


def _check_subgraph(rng):
    g = _rand(rng, 2, 7)
    pattern = er_graph(rng, rng.randint(1, min(4, g.n)), rng.uniform(0.3, 0.9), g.directed)
    return solve_subgraph_matching(g, pattern) == oracles.subgraph(g, pattern)


def _check_structure(rng):
    if rng.random() < 0.5:
        family = rng.choice(FAMILIES)
        g = family_graph(rng, family, rng.randint(max(4, FAMILY_MIN_N[family]), 7))
    else:
        g = er_graph(rng, rng.randint(2, 7), rng.uniform(0.2, 1.0), False)
    return solve_graph_structure(g) == oracles.structure(g)


def _check_automorphism(rng):
    g = _rand(rng, 1, 7)
    return solve_graph_automorphism(g) == oracles.automorphism(g)


SOLVER_CHECKS = {
    "graph_size": _check_size,
    "attribute_retrieval": _check_attr,
    "degree": _check_degree,
    "shortest_path": _check_shortest,
    "max_triangle_sum": _check_triangle,
    "hamilton_path": _check_hamilton,
    "subgraph_matching": _check_subgraph,
    "graph_structure": _check_structure,
    "graph_automorphism": _check_automorphism,
}


def test_01_oracle_equivalence():
    with criterion(1, "oracle equivalence, 9 solvers x 1000 instances") as d:
        start = time.perf_counter()
        for i, (name, check) in enumerate(SOLVER_CHECKS.items()):
            rng = random.Random(10_000 + i)
            done = 0
            while done < 1000:
                ok = check(rng)
                if ok is None:
                    continue
                assert ok, f"{name} disagrees with its oracle on instance {done}"
                done += 1
        elapsed = time.perf_counter() - start
        d["seconds"] = f"{elapsed:.1f}"
        assert elapsed < 300, f"took {elapsed:.0f}s"


# -- 2 --------------------------------------------------------------------------------------


def test_02_round_trip():
    with criterion(2, "round trip, 1000 graphs x 4 formats") as d:
        rng = random.Random(2)
        failures = 0
        for _ in range(1000):
            g = random_attr_graph(rng, n_max=8, attr_p=0.8)
            for fmt in FORMATS:
                if parse_graph_text(render_graph_text(g, fmt), fmt) != g:
                    failures += 1
        d["failures"] = failures
        assert failures == 0


# -- 3 --------------------------------------------------------------------------------------


def test_03_split_exactness(tmp_path):
    with criterion(3, "split exactness 500/100/200 per dataset") as d:
        write_semantic_data(tmp_path, n_nodes=850, n_link_edges=420, n_docs=1)
        sem = [e for e in semantic_entries() if e["name"] in ("Cite-topic", "Social-link")]
        cfg = SuiteConfig.from_dict({
            "seed": 3,
            "tasks": [{"kind": "GraphSize-Edge", "count": 820}, {"kind": "DegreeCount", "count": 800}],
            "semantic": sem,
            "augment": {"formats": ["JSON", "GML"]},
            "split": {"train": 500, "valid": 100, "test": 200, "seed": 3},
        }, tmp_path)
        corpus = build_suite(cfg, jobs=2)
        parents = {}
        for s in corpus.samples:
            parents.setdefault(s.meta["dataset"], {})[s.meta["parent"]] = s.split
        for ds, assignment in parents.items():
            counts = {name: sum(v == name for v in assignment.values()) for name in SPLITS}
            assert counts == {"train": 500, "valid": 100, "test": 200}, (ds, counts)
        ids = {name: {s.id for s in corpus.split(name)} for name in SPLITS}
        hashes = {name: {input_hash(s) for s in corpus.split(name)} for name in SPLITS}
        for a, b in itertools.combinations(SPLITS, 2):
            assert not ids[a] & ids[b], f"{a}/{b} share ids"
            assert not hashes[a] & hashes[b], f"{a}/{b} share input hashes"
        d["datasets"] = len(parents)
        d["samples"] = len(corpus.samples)


# -- 4 --------------------------------------------------------------------------------------


def test_04_format_multiplicity():
    with criterion(4, "4-format plan gives 4x samples, identical outputs per group") as d:
        plan = AugmentPlan(tae=False, fmae=False)
        instances = []
        for kind in TASK_KINDS:
            instances += generate_instances(TaskEntry(kind, 20), seed=4)
        samples = augment_instances(instances, plan, seed=4)
        assert len(samples) == 4 * len(instances)
        groups = {}
        for s in samples:
            groups.setdefault(s.meta["parent"], []).append(s)
        for parent, group in groups.items():
            assert sorted(s.format for s in group) == sorted(FORMATS), parent
            assert len({s.output.encode("utf-8") for s in group}) == 1, parent
            assert len({split_sections(s.input)["query"] for s in group}) == 1, parent
        d["instances"] = len(instances)
        d["samples"] = len(samples)


# -- 5 --------------------------------------------------------------------------------------


def _population(g):
    # values the masker may hide: numbers and text with a word character, never booleans
    count = 0
    for rec in (*g.nodes, *g.edges):
        for v in rec.attrs.values():
            if isinstance(v, bool):
                continue
            if isinstance(v, str) and (not re.search(r"\w", v) or v.strip().lower() == MASK_TOKEN):
                continue
            count += 1
    return count


def test_05_ssl_construction():
    with criterion(5, "SSL: 1 TAE per graph, 1 FMAE per attributed graph, TAE = neighbours oracle") as d:
        instances = []
        for kind in TASK_KINDS:
            instances += generate_instances(TaskEntry(kind, 100), seed=5)
        samples = augment_instances(instances, AugmentPlan(), seed=5)
        by_parent = {}
        for s in samples:
            by_parent.setdefault(s.meta["parent"], []).append(s)
        tae_checks = fmae_checks = 0
        for inst in instances:
            group = by_parent[inst.uid]
            taes = [s for s in group if s.task == "TAE"]
            fmaes = [s for s in group if s.task == "FMAE"]
            assert len(taes) == 1, inst.uid
            pop = _population(inst.graph)
            assert len(fmaes) == (1 if pop else 0), inst.uid
            tae = taes[0]
            g = parse_graph_text(split_sections(tae.input)["graph"], tae.format)
            want = oracles.out_neighbors(g, tae.meta["query_node"])
            assert set(tae.meta["answer"]["value"]) == want, tae.id
            tae_checks += 1
            if fmaes:
                f = fmaes[0]
                masked = parse_graph_text(split_sections(f.input)["graph"], f.format)
                changed = sum(
                    1 for a, b in zip((*inst.graph.nodes, *inst.graph.edges), (*masked.nodes, *masked.edges))
                    for k in a.attrs if b.attrs[k] != a.attrs[k] or type(b.attrs[k]) is not type(a.attrs[k])
                )
                assert changed == math.ceil(0.2 * pop - 1e-9), (f.id, changed, pop)
                fmae_checks += 1
        assert tae_checks >= 1000
        d["tae_checks"] = tae_checks
        d["fmae_checks"] = fmae_checks


# -- 6 --------------------------------------------------------------------------------------


def test_06_self_evaluation_fixed_point(full_config, tmp_path):
    with criterion(6, "forge eval on reference outputs is perfect on every task") as d:
        corpus = tmp_path / "corpus"
        assert main(["build", "--config", str(full_config), "--out", str(corpus), "--jobs", "2"]) == 0
        cells = 0
        for name in SPLITS:
            rows = [json.loads(x) for x in (corpus / f"{name}.jsonl").read_text().splitlines()]
            preds = tmp_path / f"{name}.preds.jsonl"
            preds.write_text("".join(json.dumps({"id": r["id"], "prediction": r["output"]}) + "\n" for r in rows))
            out = tmp_path / f"{name}.report.json"
            assert main(["eval", "--corpus", str(corpus), "--split", name, "--preds", str(preds),
                         "--report", str(out)]) == 0
            report = json.loads(out.read_text())
            perfect = {"accuracy": 1.0, "rmse": 0.0, "rouge_l": 1.0}
            for task, metrics in report["per_task"].items():
                for metric, cell in metrics.items():
                    assert cell["value"] == perfect[metric], (name, task, metric, cell)
                    cells += 1
        tasks = set(json.loads((corpus / "manifest.json").read_text())["tasks"])
        assert {"TAE", "FMAE", "Cite-year", "Mol-caption"} <= tasks
        d["task_metric_cells"] = cells


# -- 7 --------------------------------------------------------------------------------------


def test_07_metric_goldens():
    with criterion(7, "metric goldens and 20+ hand LCS cases") as d:
        assert abs(score_rmse([1, 2], [1, 4]) - math.sqrt(2)) <= 1e-9
        assert abs(rouge_l("the cat sat", "the cat")["f1"] - 0.8) <= 1e-9
        for pred, ref, want in LCS_CASES:
            p, r = rouge_tokens(pred), rouge_tokens(ref)
            assert lcs_length(p, r) == want, (pred, ref)
        assert len(LCS_CASES) >= 20
        d["lcs_cases"] = len(LCS_CASES)


# -- 8 --------------------------------------------------------------------------------------


def test_08_determinism(full_config, tmp_path):
    with criterion(8, "two pipeline runs give byte-identical trees") as d:
        for name, jobs in (("a", "1"), ("b", "3")):
            assert main(["build", "--config", str(full_config), "--out", str(tmp_path / name), "--jobs", jobs]) == 0
        files = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
        diff = [f for f in files if not filecmp.cmp(tmp_path / "a" / f, tmp_path / "b" / f, shallow=False)]
        assert not diff, f"differing files: {diff}"
        d["files"] = len(files)


# -- 9 --------------------------------------------------------------------------------------


def test_09_end_to_end_stub(tmp_path):
    with criterion(9, "infer + eval against a stub endpoint on 100 samples") as d:
        cfg = tmp_path / "suite.json"
        cfg.write_text(json.dumps({
            "seed": 9,
            "tasks": [{"kind": "ShortestPath", "count": 32}],
            "augment": {"tae": False, "fmae": {"enabled": False}},
            "split": {"train": 5, "valid": 2, "test": 25, "seed": 9},
        }))
        corpus = tmp_path / "corpus"
        assert main(["build", "--config", str(cfg), "--out", str(corpus), "--jobs", "1"]) == 0
        keep = load_corpus(corpus).split("test")
        assert len(keep) == 100
        limit = 4
        with StubEndpoint({s.input: s.output for s in keep}, delay=0.02) as stub:
            ep = tmp_path / "endpoint.json"
            ep.write_text(json.dumps({"base_url": stub.url, "model": "echo", "max_concurrent": limit}))
            preds = tmp_path / "preds.jsonl"
            assert main(["infer", "--corpus", str(corpus), "--endpoint", str(ep), "--out", str(preds)]) == 0
        assert len(stub.requests) == 100
        assert stub.max_in_flight <= limit
        report = tmp_path / "report.json"
        assert main(["eval", "--corpus", str(corpus), "--preds", str(preds), "--report", str(report)]) == 0
        agg = json.loads(report.read_text())["aggregate"]
        assert agg["accuracy"]["value"] == 1.0 and agg["accuracy"]["n"] == 100
        d["max_in_flight"] = stub.max_in_flight
        d["limit"] = limit


# -- 10 -------------------------------------------------------------------------------------


def _simple_paths(g, s, t, limit=200):
    adj = {}
    for u, v, w in oracles.arcs(g):
        adj.setdefault(u, []).append(v)
    out = []

    def dfs(u, path):
        if len(out) >= limit:
            return
        if u == t:
            out.append(list(path))
            return
        for v in adj.get(u, []):
            if v not in path:
                path.append(v)
                dfs(v, path)
                path.pop()

    dfs(s, [s])
    return out


def test_10_verifier_soundness():
    with criterion(10, "verifiers reject 1000 perturbed and accept 1000 alternative witnesses") as d:
        rng = random.Random(10)
        ham_rule = VerifyRule("path", {"path_kind": "hamilton"})
        rejected = accepted = 0
        ham_bad = sp_bad = ham_alt = sp_alt = 0
        while ham_bad < 500 or ham_alt < 500:
            g = er_graph(rng, rng.randint(4, 7), rng.uniform(0.3, 0.8), False)
            ok, witness = solve_hamilton_path(g)
            if not ok:
                continue
            yes = Answer("boolean", True)
            if ham_bad < 500:
                # reverse a suffix: exactly one consecutive pair changes
                cuts = [k for k in range(len(witness) - 2)
                        if not oracles.adjacent(g, witness[k], witness[-1])]
                if cuts:
                    k = rng.choice(cuts)
                    bad = witness[:k + 1] + witness[k + 1:][::-1]
                    assert not oracles.walk_ok(g, bad)
                    assert not ham_rule.accepts(Answer("id_seq", bad), yes, g), (g, bad)
                    ham_bad += 1
                    rejected += 1
            if ham_alt < 500:
                alts = [p for p in oracles.hamilton_paths(g) if p != list(witness)]
                for p in rng.sample(alts, min(2, len(alts))):
                    assert ham_rule.accepts(Answer("id_seq", p), yes, g), (g, p)
                    ham_alt += 1
                    accepted += 1
        while sp_bad < 500 or sp_alt < 500:
            g = er_graph(rng, rng.randint(4, 8), rng.uniform(0.25, 0.7), rng.random() < 0.5, (1, 4))
            s, t = rng.sample(range(g.n), 2)
            best = oracles.bellman_ford(g, s, t)
            if best is None:
                continue
            rule = VerifyRule("path", {"path_kind": "shortest", "source": s, "target": t})
            ref = Answer("integer", best)
            witness = solve_shortest_path(g, s, t)[1]
            if sp_bad < 500:
                worse = [p for p in _simple_paths(g, s, t) if oracles.walk_length(g, p) > best]
                if worse:
                    p = rng.choice(worse)
                    assert not rule.accepts(Answer("id_seq", p), ref, g), (g, p)
                    sp_bad += 1
                    rejected += 1
            if sp_alt < 500:
                alts = [p for p in oracles.all_shortest_paths(g, s, t) if p != witness]
                for p in rng.sample(alts, min(2, len(alts))):
                    assert rule.accepts(Answer("id_seq", p), ref, g), (g, p)
                    sp_alt += 1
                    accepted += 1
        assert rejected >= 1000 and accepted >= 1000
        d["rejected"] = rejected
        d["accepted"] = accepted
