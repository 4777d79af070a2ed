"""``forge`` command line: generate, augment, build, infer, eval and report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from gfmforge import __version__
from gfmforge.augment import AugmentPlan
from gfmforge.client import AuthError, ClientError, EndpointConfig, run_inference
from gfmforge.evaluate import EvaluationError, evaluate, load_split, read_predictions
from gfmforge.graph import GraphError
from gfmforge.pipeline import (
    SCHEMA_VERSION,
    ConfigError,
    LeakageError,
    PipelineError,
    SuiteConfig,
    augment_instances,
    build_semantic_instances,
    build_suite,
    emit_jsonl,
    generate_instances,
    load_corpus,
    make_manifest,
    make_pool,
    read_instances,
    write_instances,
)
from gfmforge.report import ReportError, format_report, plot_format_report, rows_to_csv, rows_to_table
from gfmforge.synth.tasks import GenerationError
from gfmforge.textualize.templates import TemplateError, default_pack, load_pack


def _suite(args: argparse.Namespace) -> SuiteConfig:
    cfg = SuiteConfig.load(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.templates is not None:
        if not Path(args.templates).exists():
            raise ConfigError(f"template pack {args.templates} does not exist")
        cfg = SuiteConfig(cfg.tasks, cfg.semantic, cfg.augment, cfg.split, args.templates, cfg.seed)
    load_pack(cfg.templates)
    return cfg


def _write_json(path: Path, data: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _suite(args)
    pack = load_pack(cfg.templates)
    executor = make_pool(args.jobs)
    try:
        instances = []
        for entry in cfg.tasks:
            instances += generate_instances(entry, cfg.seed, pack, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    for sem in cfg.semantic:
        instances += build_semantic_instances(sem, cfg.seed, pack)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_instances(instances, out / "instances.jsonl")
    counts: dict[str, int] = {}
    for inst in instances:
        counts[inst.uid.split("/", 1)[0]] = counts.get(inst.uid.split("/", 1)[0], 0) + 1
    _write_json(out / "generate.json", {"seed": cfg.seed, "config_hash": cfg.config_hash(), "datasets": counts})
    print(f"wrote {len(instances)} instances to {out / 'instances.jsonl'}")
    return 0


def _plan(path: str) -> AugmentPlan:
    try:
        data = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(data, dict) and "augment" in data:
        data = data["augment"]
    try:
        return AugmentPlan.from_dict(data)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def cmd_augment(args: argparse.Namespace) -> int:
    plan = _plan(args.plan)
    pack = load_pack(args.templates)
    src = Path(args.inp) / "instances.jsonl"
    if not src.exists():
        raise PipelineError(f"{src} not found; run 'forge generate' first")
    instances = read_instances(src)
    seed = args.seed if args.seed is not None else 0
    executor = make_pool(args.jobs)
    try:
        samples = augment_instances(instances, plan, seed, pack, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    samples.sort(key=lambda s: s.id)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "samples.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")
    manifest = make_manifest(samples, pack.version, extra={"seed": seed, "plan": plan.to_dict()})
    _write_json(out / "manifest.json", manifest)
    print(f"wrote {len(samples)} samples to {out / 'samples.jsonl'}")
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    cfg = _suite(args)
    corpus = build_suite(cfg, jobs=args.jobs)
    emit_jsonl(corpus, args.out)
    counts = corpus.manifest["splits"]
    print(f"wrote {len(corpus.samples)} samples to {args.out} "
          f"(train {counts['train']}, valid {counts['valid']}, test {counts['test']})")
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    try:
        endpoint = EndpointConfig.load(args.endpoint)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    samples = load_split(args.corpus, args.split)
    res = run_inference(samples, endpoint, args.out, log_path=args.log, split=args.split)
    print(f"requested {res.requested}, succeeded {res.succeeded}, failed {res.failed}, skipped {res.skipped}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    report = evaluate(args.corpus, args.split, args.preds, args.penalize_unparseable)
    path = Path(args.report) if args.report else Path(args.preds).with_name("report.json")
    _write_json(path, report.to_dict())
    print(report.table())
    if report.missing:
        print(f"missing predictions: {len(report.missing)}", file=sys.stderr)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    samples = corpus.samples if args.split is None else corpus.split(args.split)
    preds = read_predictions(args.preds) if args.preds else None
    rows = format_report(samples, preds, args.tokenizer)
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        Path(args.csv).write_text(rows_to_csv(rows), encoding="utf-8")
    if args.figure:
        Path(args.figure).parent.mkdir(parents=True, exist_ok=True)
        plot_format_report(rows, args.figure)
    print(rows_to_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="forge", description="Build and score graph instruction corpora.")
    p.add_argument("--version", action="version",
                   version=f"gfmforge {__version__} (schema {SCHEMA_VERSION}, templates {default_pack().version})")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="global seed (overrides the config)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--templates", default=None, help="template pack JSON overriding built-in prompts")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample task instances")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("augment", parents=[common], help="format augmentation plus TAE/FMAE samples")
    a.add_argument("--plan", required=True)
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_augment)

    b = sub.add_parser("build", parents=[common], help="generate, split, augment and write JSONL")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    i = sub.add_parser("infer", parents=[common], help="query a chat-completions endpoint")
    i.add_argument("--corpus", required=True)
    i.add_argument("--split", default="test")
    i.add_argument("--endpoint", required=True)
    i.add_argument("--out", required=True)
    i.add_argument("--log", default=None, help="request log (default: <out>.log)")
    i.set_defaults(func=cmd_infer)

    e = sub.add_parser("eval", parents=[common], help="score predictions")
    e.add_argument("--corpus", required=True)
    e.add_argument("--split", default="test")
    e.add_argument("--preds", required=True)
    e.add_argument("--penalize-unparseable", type=float, default=None, metavar="VALUE",
                   help="score unparseable regression answers as reference + VALUE")
    e.add_argument("--report", default=None, help="report path (default: report.json beside --preds)")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("report", parents=[common], help="per-format token and accuracy report")
    r.add_argument("--corpus", required=True)
    r.add_argument("--split", default=None)
    r.add_argument("--preds", default=None)
    r.add_argument("--csv", default=None)
    r.add_argument("--figure", default=None, help="bar chart path (.png, .svg or .pdf)")
    r.add_argument("--tokenizer", default="simple", choices=("simple", "whitespace"))
    r.set_defaults(func=cmd_report)
    return p


_CATEGORIES = (
    (LeakageError, "leakage"),
    (AuthError, "auth"),
    (ConfigError, "config"),
    (TemplateError, "config"),
    (EvaluationError, "evaluation"),
    (ReportError, "report"),
    (ClientError, "endpoint"),
    (PipelineError, "pipeline"),
    (GenerationError, "generation"),
    (GraphError, "graph"),
    (OSError, "io"),
)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        for cls, category in _CATEGORIES:
            if isinstance(exc, cls):
                msg = " ".join(str(exc).split())
                print(f"error: {category}: {msg}", file=sys.stderr)
                return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
