"""Command-line entry point.

Offline subcommands (ingest, annotate, export) maintain the snapshot file;
online ones (claim, eval, stats) answer from it. ``serve`` starts the HTTP
service. Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ClaimGraphError
from .evaluation import run_eval
from .evidence import DEFAULT_CANDIDATE_CAP
from .ingest import SegmentationConfig, ingest_file
from .linking import Gazetteer, LinkerConfig, WikifierClient
from .pipeline import EvaluationLimits, evaluate_claim, explain
from .remote import RemoteNliProvider, RemoteStsProvider
from .scoring import ReferenceNliProvider, ReferenceStsProvider
from .store import GraphStore

DEFAULT_STORE = "graph.ffg"

ENV_WIKIFIER_ENDPOINT = "CLAIMGRAPH_WIKIFIER_ENDPOINT"
ENV_WIKIFIER_KEY = "CLAIMGRAPH_WIKIFIER_KEY"
ENV_STS_ENDPOINT = "CLAIMGRAPH_STS_ENDPOINT"
ENV_NLI_ENDPOINT = "CLAIMGRAPH_NLI_ENDPOINT"


def _add_store_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--store", default=DEFAULT_STORE, help="snapshot file path")


def _add_format_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--format", choices=("text", "json"), default="text")


def _add_linker_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--linker", choices=("gazetteer", "wikifier"), default="gazetteer")
    parser.add_argument("--gazetteer", help="alias table file for the gazetteer linker")
    parser.add_argument("--threshold", type=float, default=0.80, help="mention confidence cutoff")
    parser.add_argument("--language", default="el")
    parser.add_argument(
        "--endpoint",
        default=os.environ.get(ENV_WIKIFIER_ENDPOINT),
        help="wikifier service URL (or env CLAIMGRAPH_WIKIFIER_ENDPOINT)",
    )


def _add_scorer_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--sts-provider", choices=("reference", "remote"), default="reference")
    parser.add_argument("--nli-provider", choices=("reference", "remote"), default="reference")
    parser.add_argument("--sts-endpoint", default=os.environ.get(ENV_STS_ENDPOINT))
    parser.add_argument("--nli-endpoint", default=os.environ.get(ENV_NLI_ENDPOINT))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="claimgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a line-delimited article file")
    p.add_argument("--input", required=True)
    p.add_argument("--min-section-chars", type=int, default=3)
    _add_store_flag(p)
    _add_format_flag(p)

    p = sub.add_parser("annotate", help="link entities in every stored section")
    _add_store_flag(p)
    _add_linker_flags(p)
    _add_format_flag(p)

    p = sub.add_parser("stats", help="print graph statistics")
    _add_store_flag(p)
    _add_format_flag(p)

    p = sub.add_parser("claim", help="evaluate one claim")
    p.add_argument("--text", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--nli-top-k", type=int, default=1)
    p.add_argument("--max-candidates", type=int, default=DEFAULT_CANDIDATE_CAP)
    _add_store_flag(p)
    _add_linker_flags(p)
    _add_scorer_flags(p)
    _add_format_flag(p)

    p = sub.add_parser("eval", help="run a labeled dataset through the pipeline")
    p.add_argument("--dataset", required=True)
    p.add_argument("--report", required=True, help="write the JSON report here")
    p.add_argument("--workers", type=int, default=1)
    _add_store_flag(p)
    _add_linker_flags(p)
    _add_scorer_flags(p)
    _add_format_flag(p)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--listen", default="127.0.0.1:8080")
    p.add_argument("--strict-providers", action="store_true")
    p.add_argument("--config", help="JSON file overriding service settings")
    _add_store_flag(p)
    _add_linker_flags(p)
    _add_scorer_flags(p)

    p = sub.add_parser("export", help="save the store snapshot to a file")
    p.add_argument("--output", required=True)
    _add_store_flag(p)

    return parser


def load_store(path: str | Path) -> GraphStore:
    if Path(path).exists():
        return GraphStore.load_snapshot(path)
    return GraphStore()


def make_linker(args) :
    if args.linker == "wikifier":
        if not args.endpoint:
            raise ClaimGraphError("wikifier linker needs --endpoint or CLAIMGRAPH_WIKIFIER_ENDPOINT")
        return WikifierClient(args.endpoint, api_key=os.environ.get(ENV_WIKIFIER_KEY))
    if args.gazetteer:
        return Gazetteer.load(args.gazetteer)
    return Gazetteer({})


def make_providers(args):
    if args.sts_provider == "remote":
        if not args.sts_endpoint:
            raise ClaimGraphError("remote STS provider needs --sts-endpoint")
        sts = RemoteStsProvider(args.sts_endpoint)
    else:
        sts = ReferenceStsProvider()
    if args.nli_provider == "remote":
        if not args.nli_endpoint:
            raise ClaimGraphError("remote NLI provider needs --nli-endpoint")
        nli = RemoteNliProvider(args.nli_endpoint)
    else:
        nli = ReferenceNliProvider()
    return sts, nli


def _emit(payload: dict, args, text: str | None = None):
    if args.format == "json":
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        print(text if text is not None else json.dumps(payload, ensure_ascii=False))


def _cmd_ingest(args) -> int:
    store = load_store(args.store)
    cfg = SegmentationConfig(min_section_chars=args.min_section_chars)
    stats = ingest_file(args.input, store, cfg)
    store.save_snapshot(args.store)
    _emit(
        stats.as_dict(),
        args,
        f"ingested {stats.articles} articles ({stats.sections} sections, {stats.skipped} skipped)",
    )
    return 0


def _cmd_annotate(args) -> int:
    store = load_store(args.store)
    linker = make_linker(args)
    cfg = LinkerConfig(threshold=args.threshold, language=args.language)
    sections = 0
    mentions = 0
    with store.exclusive_writer():
        for sid, text in store.iter_sections():
            sections += 1
            for mention in linker.annotate(text, cfg):
                store.attach_entity(sid, mention)
                mentions += 1
    store.save_snapshot(args.store)
    payload = {
        "sections": sections,
        "mentions": mentions,
        "entities": store.stats().entities,
    }
    _emit(payload, args, f"annotated {sections} sections: {mentions} mentions, "
                         f"{payload['entities']} entities in graph")
    return 0


def _cmd_stats(args) -> int:
    store = load_store(args.store)
    stats = store.stats()
    _emit(
        stats.as_dict(),
        args,
        f"articles={stats.articles} sections={stats.sections} "
        f"entities={stats.entities} mention_edges={stats.mention_edges}",
    )
    return 0


def _cmd_claim(args) -> int:
    store = load_store(args.store)
    linker = make_linker(args)
    sts, nli = make_providers(args)
    limits = EvaluationLimits(
        top_k=args.top_k, nli_top_k=args.nli_top_k, max_candidates=args.max_candidates
    )
    evaluation = evaluate_claim(
        args.text,
        store,
        linker,
        sts,
        nli,
        linker_cfg=LinkerConfig(threshold=args.threshold, language=args.language),
        limits=limits,
    )
    if args.format == "json":
        print(json.dumps(evaluation.as_dict(), ensure_ascii=False, indent=2))
    else:
        print(explain(evaluation), end="")
    return 0


def _cmd_eval(args) -> int:
    store = load_store(args.store)
    linker = make_linker(args)
    sts, nli = make_providers(args)
    result = run_eval(
        args.dataset,
        store,
        linker,
        sts,
        nli,
        linker_cfg=LinkerConfig(threshold=args.threshold, language=args.language),
        workers=args.workers,
    )
    Path(args.report).write_text(
        json.dumps(result.report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    summary = result.metrics
    if args.format == "json":
        print(json.dumps(summary.as_dict(), ensure_ascii=False, indent=2))
    else:
        for label, m in summary.per_label.items():
            print(f"{label}: precision={m.precision:.2f} recall={m.recall:.2f} "
                  f"f1={m.f1:.2f} support={m.support}")
        print(f"weighted: precision={summary.weighted_precision:.2f} "
              f"recall={summary.weighted_recall:.2f} f1={summary.weighted_f1:.2f}")
        print(f"accuracy: {summary.accuracy:.2f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, configure_structured_logging, create_app

    configure_structured_logging()
    config = ServiceConfig.from_args(args)
    app = create_app(config)
    host, _, port = config.listen.rpartition(":")
    # log_config=None lets uvicorn loggers propagate to the JSON root handler
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_config=None)
    return 0


def _cmd_export(args) -> int:
    store = load_store(args.store)
    stats = store.save_snapshot(args.output)
    print(f"exported {stats.articles} articles to {args.output}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "annotate": _cmd_annotate,
    "stats": _cmd_stats,
    "claim": _cmd_claim,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
    "export": _cmd_export,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except ClaimGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
