"""Command line interface: mine, build, train, eval, scan."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import baselines as bl
from .comments import Language
from .corpus import (
    SchemaViolation,
    TooFewSamples,
    build_triples,
    corpus_stats,
    read_corpus,
    render_stats,
    split_dataset,
    write_corpus,
)
from .metrics import evaluate, format_report_table, report_record
from .mining import GitUnavailable, NotARepository, mine_repository, read_commits, write_commits
from .model import (
    ExternalVectorStore,
    MissingExternalVector,
    TrainConfig,
    load_model,
    parse_mask,
    predict,
    save_model,
    train,
)
from .scan import scan_repository, write_findings

DEFAULT_SEED = 0


def _fail(kind: str, detail: str) -> int:
    print(json.dumps({"error": kind, "detail": detail}), file=sys.stderr)
    return 1


def _cmd_mine(args) -> int:
    commits = mine_repository(args.repo)
    count = write_commits(commits, args.out)
    print(f"mined {count} commits from {args.repo} -> {args.out}")
    return 0


def _cmd_build(args) -> int:
    language = Language(args.lang)
    samples, counts = build_triples(read_commits(args.input), language)
    write_corpus(samples, args.out)
    stats = corpus_stats(samples, counts.todo_commits)
    report = render_stats(stats)
    stats_path = args.out + ".stats.txt"
    with open(stats_path, "w", encoding="utf-8") as fh:
        fh.write(report + "\n")
    print(report)
    print(
        f"drops: parse={counts.parse_failures} oversize={counts.oversize}"
        f" multi/zero-todo={counts.no_single_todo} unassociated={counts.unassociated}"
        f" added-kind={counts.added_kind} empty-change={counts.empty_change}"
        f" empty-message={counts.empty_message}"
    )
    print(f"wrote {len(samples)} triples -> {args.out}")
    return 0


def _load_store(args) -> Optional[ExternalVectorStore]:
    if args.backend == "external":
        if not args.vectors:
            raise ValueError("--backend external requires --vectors")
        return ExternalVectorStore.read(args.vectors)
    return None


def _cmd_train(args) -> int:
    samples = read_corpus(args.corpus)
    split = split_dataset(samples, seed=args.seed)
    config = TrainConfig(
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        validate_every=args.validate_every,
        max_epochs=args.epochs,
        seed=args.seed,
        component_mask=parse_mask(args.mask),
        backend=args.backend,
        dim=args.dim,
        min_freq=args.min_freq,
    )
    store = _load_store(args)
    model, history = train(split, config, store)
    save_model(model, args.out)
    best = next(
        (v for v in history.validations if v.batch == history.best_batch), None
    )
    best_f1 = None if best is None else best.val_f1
    print(
        f"trained {history.final_batch} batches"
        f" (best checkpoint at batch {history.best_batch}, val F1 "
        f"{'n/a' if best_f1 is None else f'{best_f1:.4f}'})"
        f"{' [diverged]' if history.diverged else ''}"
    )
    print(f"model -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    samples = read_corpus(args.corpus)
    split = split_dataset(samples, seed=args.seed)
    test = list(split.test)
    reports = []

    if args.model:
        model = load_model(args.model)
        store = None
        if model.config.backend == "external":
            if not args.vectors:
                raise ValueError("evaluating an external-backend model requires --vectors")
            store = ExternalVectorStore.read(args.vectors)
        reports.append(
            evaluate(
                lambda s: predict(s, model, store),
                test,
                method_name="classifier",
                dataset=args.corpus,
            )
        )

    if args.baselines:
        background = bl.background_documents(list(split.train))
        space = bl.TfidfSpace(background)
        for name, fn in (("TCO", bl.tco), ("TMO", bl.tmo), ("TCMO", bl.tcmo)):
            reports.append(evaluate(fn, test, method_name=name, dataset=args.corpus))
            reports.append(
                evaluate(
                    lambda s, f=fn: f(s, use_stemming=False),
                    test,
                    method_name=f"{name} (no stem)",
                    dataset=args.corpus,
                )
            )
        if args.irsc_sweep:
            threshold = _sweep_irsc(list(split.val), space)
            print(f"IRSC threshold swept on validation split: {threshold}")
        else:
            threshold = args.irsc_threshold
        reports.append(
            evaluate(
                lambda s: bl.irsc(s, bl.added_lines_text(s.code_change), threshold, space),
                test,
                method_name=f"IRSC@{threshold}",
                dataset=args.corpus,
            )
        )

    if not reports:
        raise ValueError("nothing to evaluate: pass --model and/or --baselines")
    print(format_report_table(reports))
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for report in reports:
                fh.write(json.dumps(report_record(report)) + "\n")
        print(f"records -> {args.records}")
    return 0


def _sweep_irsc(val, space) -> float:
    best_threshold, best_f1 = 0.3, -1.0
    for i in range(1, 20):
        threshold = i / 20
        report = evaluate(
            lambda s: bl.irsc(s, bl.added_lines_text(s.code_change), threshold, space),
            val,
        )
        f1 = -1.0 if report.f1 is None else report.f1
        if f1 > best_f1:
            best_threshold, best_f1 = threshold, f1
    return best_threshold


def _cmd_scan(args) -> int:
    model = load_model(args.model)
    store = None
    if model.config.backend == "external":
        if not args.vectors:
            raise ValueError("scanning with an external-backend model requires --vectors")
        store = ExternalVectorStore.read(args.vectors)
    findings = scan_repository(args.repo, lambda s: predict(s, model, store))
    for finding in findings:
        location = (
            f"{finding.file_path}:{finding.line_no}"
            if finding.line_no is not None
            else finding.file_path
        )
        print(
            f"{finding.classification.value}  score={finding.score:.4f}"
            f"  {location}  resolved-by={finding.commit_id}  {finding.todo_text}"
        )
    print(f"{len(findings)} finding(s)")
    if args.report:
        write_findings(findings, args.report)
        print(f"report -> {args.report}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="staletodo",
        description="Detect TODO comments whose task was finished but whose comment survived.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="dump a repository's commit history to a file")
    p.add_argument("--repo", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("build", help="build a labeled triple corpus from mined commits")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lang", required=True, choices=[l.value for l in Language])
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("train", help="train the classifier on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mask", default="cc,td,msg")
    p.add_argument("--backend", default="internal", choices=["internal", "external"])
    p.add_argument("--vectors", default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--validate-every", type=int, default=1000)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--min-freq", type=int, default=2)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate the classifier and/or baselines")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--vectors", default=None)
    p.add_argument("--baselines", action="store_true")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--irsc-threshold", type=float, default=0.3)
    group.add_argument("--irsc-sweep", action="store_true")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--records", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("scan", help="scan a repository for obsolete TODO comments")
    p.add_argument("--repo", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vectors", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_scan)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GitUnavailable as exc:
        return _fail("git_unavailable", str(exc))
    except NotARepository as exc:
        return _fail("not_a_repository", str(exc))
    except SchemaViolation as exc:
        return _fail("schema_violation", str(exc))
    except TooFewSamples as exc:
        return _fail("too_few_samples", str(exc))
    except MissingExternalVector as exc:
        return _fail("missing_external_vector", str(exc))
    except (ValueError, OSError) as exc:
        return _fail(type(exc).__name__.lower(), str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
