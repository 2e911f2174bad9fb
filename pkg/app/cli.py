"""Operator commands: ingest, index, run, evaluate, report, serve.

Exit codes: 0 success, 1 command failure, 2 usage error.
"""

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from loguru import logger as log

from app.config import RunConfig, Settings, load_run_config, settings
from app.dataset.dataset_store import Dataset
from app.db.enums import EmbedderKind, GtinMetric, SegmenterKind, Split, VlmKind
from app.errors import ConfigError, VisualRagError
from app.eval import build_report, load_report, render_table, report_json, write_report
from app.logs import setup_logging
from app.pipeline.runner import TraceFile, build_clients, index_items, run_batch
from app.vstore import VectorStore


def _print_json(data: Any) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def run_config(args: argparse.Namespace) -> RunConfig:
    """Config file plus the flags given on the command line."""
    overrides = {
        "manifest": args.manifest,
        "snapshot": args.snapshot,
        "traces": args.traces,
        "k": args.k,
        "max_samples": args.max_samples,
        "budget": args.budget,
        "workers": args.workers,
        "gtin_metric": args.gtin_metric,
        "embedder.kind": args.embedder,
        "segmenter.kind": args.segmenter,
        "vlm.kind": args.vlm,
        "run_name": args.run_name,
    }
    overrides = {k: str(v) if isinstance(v, Path) else v for k, v in overrides.items()}
    return load_run_config(args.config, overrides)


def _required(value: Optional[Path], name: str) -> Path:
    if value is None:
        raise ConfigError(f"no {name} configured, pass --{name} or set it in --config")
    return value


def load_dataset(config: RunConfig) -> Dataset:
    return Dataset.from_manifest(_required(config.manifest, "manifest"))


async def _store_in_db(dataset: Dataset, env: Settings) -> int:
    from app.db.database import get_db_connection_pool, save_dataset

    if not env.DB_CONN_URL:
        raise ConfigError("--db needs DB_CONN_URL in the environment")
    db_pool = get_db_connection_pool(env.DB_CONN_URL)
    await db_pool.open()
    try:
        return await save_dataset(db_pool, dataset)
    finally:
        await db_pool.close()


def cmd_ingest(args: argparse.Namespace, config: RunConfig) -> int:
    dataset = Dataset()
    stats = dataset.ingest_manifest(_required(config.manifest, "manifest"))
    if args.db:
        asyncio.run(_store_in_db(dataset, settings))
    _print_json(stats.model_dump(mode="json"))
    return 0


async def _index(config: RunConfig, dataset: Dataset):
    clients = build_clients(config)
    try:
        store = VectorStore(clients.embedder.dimension)
        summary = await index_items(dataset.items(Split.TRAIN), store, clients, config)
    finally:
        await clients.aclose()
    return store, summary


def cmd_index(args: argparse.Namespace, config: RunConfig) -> int:
    snapshot = _required(config.snapshot, "snapshot")
    dataset = load_dataset(config)
    store, summary = asyncio.run(_index(config, dataset))
    _print_json(summary.model_dump(mode="json"))
    if summary.n_indexed == 0:
        print("error: no item was indexed", file=sys.stderr)
        return 1
    store.snapshot(snapshot)
    log.info(f"Wrote {len(store)} embeddings to {snapshot}")
    return 0


async def _run(config: RunConfig, dataset: Dataset, store: VectorStore, traces: TraceFile):
    clients = build_clients(config)
    try:
        return await run_batch(
            dataset.items(Split.TEST),
            store,
            dataset,
            clients,
            config,
            done_ids=traces.done_ids(),
            sink=traces.append,
        )
    finally:
        await clients.aclose()


def cmd_run(args: argparse.Namespace, config: RunConfig) -> int:
    traces = TraceFile(_required(config.traces, "traces"))
    if args.fresh and traces.path.exists():
        traces.path.unlink()
    dataset = load_dataset(config)
    store = VectorStore.restore(_required(config.snapshot, "snapshot"))
    results = asyncio.run(_run(config, dataset, store, traces))
    _print_json(
        {
            "traces": str(traces.path),
            "n_run": len(results),
            "n_failed": sum(1 for r in results if r.error is not None),
        }
    )
    return 0


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    traces = TraceFile(_required(config.traces, "traces"))
    if not traces.path.exists():
        raise ConfigError(f"traces file {traces.path} does not exist")
    dataset = load_dataset(config)
    report = build_report(traces.read(), dataset, config)
    if args.output:
        write_report(report, args.output)
    if args.format == "json":
        sys.stdout.write(report_json(report))
    else:
        sys.stdout.write(render_table([report]))
    return 0


def cmd_report(args: argparse.Namespace, config: RunConfig) -> int:
    reports = [load_report(path) for path in args.reports]
    sys.stdout.write(render_table(reports))
    return 0


def cmd_serve(args: argparse.Namespace, config: RunConfig) -> int:
    import uvicorn

    from app.main import get_application

    uvicorn.run(
        get_application(config),
        host=args.host,
        port=args.port,
        log_level="debug" if settings.DEBUG else "info",
    )
    return 0


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run config")
    common.add_argument("--manifest", type=Path)
    common.add_argument("--snapshot", type=Path)
    common.add_argument("--traces", type=Path)
    common.add_argument("--k", type=int)
    common.add_argument("--max-samples", type=int)
    common.add_argument("--budget", type=int, help="token budget of a prompt")
    common.add_argument("--workers", type=int)
    common.add_argument("--gtin-metric", choices=[m.value for m in GtinMetric])
    common.add_argument("--embedder", choices=[k.value for k in EmbedderKind])
    common.add_argument("--segmenter", choices=[k.value for k in SegmenterKind])
    common.add_argument("--vlm", choices=[k.value for k in VlmKind])
    common.add_argument("--run-name")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="visual-rag", description="Visual RAG fine-grained product classification."
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_ingest = sub.add_parser("ingest", parents=[common], help="Validate and load a manifest.")
    p_ingest.add_argument("--db", action="store_true", help="also store items in Postgres")
    p_ingest.set_defaults(func=cmd_ingest)

    p_index = sub.add_parser("index", parents=[common], help="Embed train items, write snapshot.")
    p_index.set_defaults(func=cmd_index)

    p_run = sub.add_parser("run", parents=[common], help="Run every test item, append traces.")
    p_run.add_argument("--fresh", action="store_true", help="discard existing traces")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("evaluate", parents=[common], help="Score a traces file.")
    p_eval.add_argument("--output", type=Path, help="write the JSON report here")
    p_eval.add_argument("--format", choices=["text", "json"], default="text")
    p_eval.set_defaults(func=cmd_evaluate)

    p_report = sub.add_parser("report", parents=[common], help="Compare JSON reports.")
    p_report.add_argument("reports", nargs="+", type=Path)
    p_report.set_defaults(func=cmd_report)

    p_serve = sub.add_parser("serve", parents=[common], help="Serve predictions over HTTP.")
    p_serve.add_argument("--host", default="0.0.0.0")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(enqueue=False)
    try:
        config = run_config(args)
        return args.func(args, config)
    except VisualRagError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
