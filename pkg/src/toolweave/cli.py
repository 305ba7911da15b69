"""Command-line entry point.

One subcommand per pipeline stage so long runs stay scriptable and
resumable; every subcommand is idempotent for identical inputs, config,
and seed. Reports land as JSON next to their outputs, with a short human
summary on stdout. Exit codes: 0 ok, 2 config error, 3 endpoint error,
4 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from . import bench, pipeline
from .annotate import (ChatEndpoint, RejectReason, ReplyBackend, Verdict,
                       endpoint_backend, load_template, rejection_report,
                       scripted_backend)
from .chatml import Entry, read_entries, serialize_entry, strip_tool_spans, write_entries
from .errors import ConfigError, DataError, EndpointError, ToolweaveError
from .filtering import (Executor, ScriptedExecutor, SubprocessRunnerExecutor,
                        dataset_stats)
from .journal import Journal
from .pool import (DEFAULT_SAMPLE_N, SelectionBudget, compute_stats,
                   load_clean_labels, load_manifest, normalize_source,
                   rank_and_select, sample_entries)
from .runtime import EndpointTokenSource, GenConfig, ScriptSource, run_inference

logger = logging.getLogger(__name__)

API_KEY_ENV = "TOOLWEAVE_API_KEY"


# --------------------------------------------------------------------------
# Small IO helpers

def _read_entries_file(path: str) -> list[Entry]:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return list(read_entries(fp))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _write_entries_file(path: str, entries: Sequence[Entry]) -> int:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fp:
        return write_entries(fp, entries)


def _write_json(path: str, payload: Any) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(payload, fp, ensure_ascii=False, indent=2, sort_keys=True)
        fp.write("\n")


def _write_outcomes(path: str, rows: Sequence[tuple[str, str]]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fp:
        for entry_id, outcome in rows:
            fp.write(json.dumps({"entry_id": entry_id, "outcome": outcome}) + "\n")


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc


# --------------------------------------------------------------------------
# Backend / executor construction

def _conf(args: argparse.Namespace, key: str, fallback: Any) -> Any:
    value = getattr(args, key, None)
    if value is not None:
        return value
    return args.config_data.get(key, fallback)


def _reply_backend(args: argparse.Namespace, kind: str) -> ReplyBackend:
    replies_path = getattr(args, "replies", None)
    if replies_path:
        table = _load_json(replies_path)
        if not isinstance(table, dict):
            raise ConfigError(f"{replies_path} must map entry_id to reply text")
        return scripted_backend(table, default=getattr(args, "default_reply", None))
    url = _conf(args, "endpoint_url", None)
    if not url:
        raise ConfigError(f"{kind}: need --endpoint-url or --replies")
    ep = ChatEndpoint(
        base_url=url,
        model_name=_conf(args, "model", "unknown"),
        timeout=float(_conf(args, "endpoint_timeout", 60.0)),
        max_retries=int(_conf(args, "max_retries", 2)),
        temperature=float(_conf(args, "temperature", 0.0)),
        api_key=os.environ.get(API_KEY_ENV) or None,
    )
    return endpoint_backend(ep, load_template(kind))


def _executor_from(args: argparse.Namespace) -> Executor:
    scripted = getattr(args, "scripted_executor", None)
    if scripted:
        return ScriptedExecutor.from_json(scripted)
    runner_cmd = _conf(args, "runner_cmd", None)
    if runner_cmd:
        cmd = shlex.split(runner_cmd) if isinstance(runner_cmd, str) else list(runner_cmd)
        return SubprocessRunnerExecutor(cmd)
    raise ConfigError("need --runner-cmd or --scripted-executor")


def _journal_from(args: argparse.Namespace) -> Journal | None:
    path = getattr(args, "journal", None)
    return Journal(path) if path else None


# --------------------------------------------------------------------------
# Subcommands

def _cmd_normalize(args: argparse.Namespace) -> int:
    sources = load_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(desc) -> tuple[str, int]:
        out_path = out_dir / f"{desc.source_id}.jsonl"
        with open(out_path, "w", encoding="utf-8") as fp:
            return desc.source_id, write_entries(
                fp, normalize_source(desc, skip_bad=args.skip_bad))

    # One worker per source, bounded; each source owns its output file.
    workers = min(len(sources), int(_conf(args, "workers", 4)))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool_:
        counts = dict(pool_.map(one, sources))
    for sid in sorted(counts):
        print(f"{sid}: {counts[sid]} entries")
    _write_json(str(out_dir / "normalize_report.json"), {"sources": counts})
    return 0


def _cmd_score_pool(args: argparse.Namespace) -> int:
    sources = load_manifest(args.manifest)
    labels = load_clean_labels(args.labels)
    backend = _reply_backend(args, "judge")
    sample_n = int(_conf(args, "sample_n", DEFAULT_SAMPLE_N))
    seed = int(_conf(args, "seed", 0))
    workers = int(_conf(args, "workers", pipeline.DEFAULT_WORKERS))

    def draw(desc):
        return sample_entries(normalize_source(desc, skip_bad=True), sample_n, seed)

    # Normalize and sample the sources in parallel; judging shares one
    # bounded request pool per source afterwards.
    with ThreadPoolExecutor(max_workers=max(1, min(len(sources), 4))) as pool_:
        samples = list(pool_.map(draw, sources))

    rows = []
    for desc, sample in zip(sources, samples):
        if not sample:
            raise DataError(f"source {desc.source_id} yielded no entries")
        verdicts = pipeline.judge_entries(sample, backend, workers=workers)
        judgements = [v is Verdict.YES for _, v in verdicts]
        source_labels = labels.get(desc.source_id)
        if source_labels is None:
            raise DataError(f"no clean labels for source {desc.source_id}")
        try:
            clean = [source_labels[i] for i in range(len(sample))]
        except KeyError as exc:
            raise DataError(
                f"labels for {desc.source_id} miss sample index {exc}") from exc
        stats = compute_stats(judgements, clean, source_id=desc.source_id)
        rows.append({"source_id": stats.source_id, "sample_size": stats.sample_size,
                     "valuable_count": stats.valuable_count,
                     "clean_count": stats.clean_count,
                     "w": stats.w, "q": stats.q, "qw": stats.qw})
        print(f"{desc.source_id}: W={stats.w:.4f} Q={stats.q:.4f} QxW={stats.qw:.4f}")
    _write_json(args.out, {"sample_n": sample_n, "seed": seed, "sources": rows})
    return 0


def _cmd_select(args: argparse.Namespace) -> int:
    stats_doc = _load_json(args.stats)
    from .pool import PoolStats
    stats = [PoolStats(source_id=r["source_id"], sample_size=r["sample_size"],
                       valuable_count=r["valuable_count"], clean_count=r["clean_count"])
             for r in stats_doc["sources"]]
    counts_path = args.counts or str(Path(args.normalized_dir) / "normalize_report.json")
    counts = _load_json(counts_path)["sources"]
    budget = SelectionBudget(int(_conf(args, "budget", 10_000_000)))
    plan = rank_and_select(stats, counts, budget)
    taken = 0
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as out_fp:
        for source_id, take in plan:
            path = Path(args.normalized_dir) / f"{source_id}.jsonl"
            written = 0
            with open(path, "r", encoding="utf-8") as fp:
                for e in read_entries(fp):
                    if written >= take:
                        break
                    out_fp.write(serialize_entry(e) + "\n")
                    written += 1
            if written != take:
                raise DataError(f"{source_id}: wanted {take} entries, file held {written}")
            taken += written
    by_id = {s.source_id: s for s in stats}
    plan_rows = []
    for source_id, take in plan:
        s = by_id[source_id]
        plan_rows.append({"source_id": source_id, "take_count": take,
                          "sample_size": s.sample_size, "w": s.w, "q": s.q,
                          "qw": s.qw, "entry_count": counts[source_id]})
    report = {"budget": budget.target_entries, "total_selected": taken,
              "plan": plan_rows}
    _write_json(args.report, report)
    print(f"selected {taken} entries across {len(plan)} sources")
    return 0


def _cmd_judge(args: argparse.Namespace) -> int:
    entries = _read_entries_file(args.infile)
    backend = _reply_backend(args, "judge")
    workers = int(_conf(args, "workers", pipeline.DEFAULT_WORKERS))
    journal = _journal_from(args)
    try:
        results = pipeline.judge_entries(entries, backend, workers=workers, journal=journal)
    finally:
        if journal:
            journal.close()
    kept = [e for e, v in results if v is Verdict.YES]
    counts = {v.value: sum(1 for _, got in results if got is v) for v in Verdict}
    _write_entries_file(args.out, kept)
    if args.report:
        _write_json(args.report, {"total": len(results), **counts})
    print(f"judged {len(results)}: yes={counts['yes']} no={counts['no']} "
          f"ambiguous={counts['ambiguous']}")
    return 0


def _cmd_convert(args: argparse.Namespace) -> int:
    entries = _read_entries_file(args.infile)
    backend = _reply_backend(args, "convert")
    workers = int(_conf(args, "workers", pipeline.DEFAULT_WORKERS))
    journal = _journal_from(args)
    try:
        results = pipeline.convert_entries(entries, backend, workers=workers, journal=journal)
    finally:
        if journal:
            journal.close()
    kept: list[Entry] = []
    outcome_rows: list[tuple[str, str]] = []
    outcomes: list[RejectReason | None] = []
    for e, res in results:
        if isinstance(res, RejectReason):
            outcome_rows.append((e.entry_id or "", res.value))
            outcomes.append(res)
        else:
            kept.append(res)
            outcome_rows.append((e.entry_id or "", "kept"))
            outcomes.append(None)
    _write_entries_file(args.out, kept)
    if args.outcomes:
        _write_outcomes(args.outcomes, outcome_rows)
    if args.report:
        _write_json(args.report, rejection_report(outcomes).to_dict())
    print(f"converted {len(kept)}/{len(results)}")
    return 0


def _run_filter_stage(args: argparse.Namespace,
                      results: list[tuple[Entry, RejectReason | None]]) -> int:
    kept = [e for e, reject in results if reject is None]
    _write_entries_file(args.out, kept)
    if args.outcomes:
        _write_outcomes(args.outcomes, [(e.entry_id or "", r.value if r else "kept")
                                        for e, r in results])
    if args.report:
        _write_json(args.report, rejection_report(r for _, r in results).to_dict())
    print(f"kept {len(kept)}/{len(results)}")
    return 0


def _cmd_filter_trivial(args: argparse.Namespace) -> int:
    return _run_filter_stage(args, pipeline.filter_trivial(_read_entries_file(args.infile)))


def _cmd_exec_filter(args: argparse.Namespace) -> int:
    entries = _read_entries_file(args.infile)
    executor = _executor_from(args)
    workers = int(_conf(args, "workers", 1))
    timeout = float(_conf(args, "timeout", 30.0))
    journal = _journal_from(args)
    try:
        results = pipeline.exec_filter(entries, executor, timeout=timeout,
                                       workers=workers, journal=journal)
    finally:
        if journal:
            journal.close()
    return _run_filter_stage(args, results)


def _cmd_consistency_filter(args: argparse.Namespace) -> int:
    return _run_filter_stage(args, pipeline.consistency_stage(_read_entries_file(args.infile)))


def _cmd_stats(args: argparse.Namespace) -> int:
    report = dataset_stats(_read_entries_file(args.infile))
    if args.out:
        _write_json(args.out, report.to_dict())
    for sid, s in sorted(report.per_source.items()):
        print(f"{sid}: entries={s.entries} tool_calls={s.tool_calls} "
              f"libraries={len(s.libraries)}")
    print(f"total: entries={report.total_entries} tool_calls={report.total_tool_calls} "
          f"libraries={len(report.all_libraries)}")
    return 0


def _cmd_strip_baseline(args: argparse.Namespace) -> int:
    entries = [strip_tool_spans(e) for e in _read_entries_file(args.infile)]
    _write_entries_file(args.out, entries)
    print(f"stripped {len(entries)} entries")
    return 0


def _cmd_gen_randomqa(args: argparse.Namespace) -> int:
    templates = None
    if args.templates:
        templates = [int(t) for t in args.templates.split(",") if t.strip()]
    try:
        pairs = bench.gen_randomqa(args.n, int(_conf(args, "seed", 0)), templates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fp:
        bench.write_qa_file(fp, pairs)
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return 0


def _cmd_emit_fact_prompts(args: argparse.Namespace) -> int:
    prompts = bench.emit_fact_prompts()
    if args.out:
        _write_json(args.out, prompts)
    for p in prompts:
        print(p)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    try:
        if args.fact:
            pairs: Sequence[Any] = bench.load_fact_pairs(args.pairs)
        else:
            pairs = bench.read_qa_file(args.pairs)
    except (ValueError, KeyError) as exc:
        raise DataError(f"cannot load pairs from {args.pairs}: {exc}") from exc

    if args.predictions:
        table = {}
        with open(args.predictions, "r", encoding="utf-8") as fp:
            for line in fp:
                line = line.strip()
                if line:
                    rec = json.loads(line)
                    table[rec["question"]] = rec.get("predicted", "")
        session = lambda q: table.get(q, "")
    elif args.session == "echo":
        gold_by_question = {p.question: p.answer for p in pairs}
        session = lambda q: bench.gold_text(gold_by_question[q])
    elif args.session == "empty":
        session = lambda q: ""
    else:
        url = _conf(args, "endpoint_url", None)
        if not url:
            raise ConfigError("eval: need --predictions, --session, or --endpoint-url")
        ep = ChatEndpoint(base_url=url, model_name=_conf(args, "model", "unknown"),
                          api_key=os.environ.get(API_KEY_ENV) or None)
        executor = _executor_from(args)
        cfg = GenConfig(max_new_tokens=int(_conf(args, "max_new_tokens", 512)),
                        timeout=float(_conf(args, "timeout", 30.0)))

        def session(q: str) -> str:
            result = run_inference([q], EndpointTokenSource(ep), executor, cfg)
            return result.text

    report = bench.evaluate(pairs, session, workers=int(_conf(args, "workers", 1)))
    if args.report:
        _write_json(args.report, report.to_dict())
    print(f"accuracy {report.accuracy:.3f} ({report.matched}/{report.total})")
    return 0


def _cmd_run_infer(args: argparse.Namespace) -> int:
    if args.prompt is not None:
        prompt = [args.prompt]
    elif args.prompt_file:
        prompt = [Path(args.prompt_file).read_text(encoding="utf-8")]
    else:
        raise ConfigError("run-infer: need --prompt or --prompt-file")
    if args.script:
        src = ScriptSource.from_json(args.script)
    else:
        url = _conf(args, "endpoint_url", None)
        if not url:
            raise ConfigError("run-infer: need --script or --endpoint-url")
        src = EndpointTokenSource(ChatEndpoint(
            base_url=url, model_name=_conf(args, "model", "unknown"),
            temperature=float(_conf(args, "temperature", 0.0)),
            api_key=os.environ.get(API_KEY_ENV) or None))
    executor = _executor_from(args)
    cfg = GenConfig(max_new_tokens=int(_conf(args, "max_new_tokens", 512)),
                    temperature=float(_conf(args, "temperature", 0.0)),
                    timeout=float(_conf(args, "timeout", 30.0)))
    result = run_inference(prompt, src, executor, cfg)
    if args.out:
        _write_json(args.out, {"tokens": result.outputs, "text": result.text,
                               "stop_reason": result.stop_reason,
                               "abandoned_span": result.abandoned_span})
    print(result.text)
    return 0


# --------------------------------------------------------------------------
# Parser

def _add_endpoint_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--endpoint-url", dest="endpoint_url", help="chat completion URL")
    p.add_argument("--model", help="model name sent to the endpoint")
    p.add_argument("--replies", help="JSON file mapping entry_id to a scripted reply")
    p.add_argument("--default-reply", dest="default_reply",
                   help="fallback reply for entries missing from --replies")


def _add_executor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runner-cmd", dest="runner_cmd",
                   help="command for the snippet runner, e.g. 'python -m snippet_runner'")
    p.add_argument("--scripted-executor", dest="scripted_executor",
                   help="JSON file mapping snippet text to a canned outcome")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toolweave",
        description="Build tool-augmented SFT datasets: select, convert, filter; "
                    "plus benchmark generation and the token-interpreting inference loop.")
    parser.add_argument("--config", help="JSON config file with default settings")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="normalize raw sources to entry JSONL")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--skip-bad", dest="skip_bad", action="store_true",
                   help="log and skip records that do not fit the adapter")
    p.set_defaults(fn=_cmd_normalize)

    p = sub.add_parser("score-pool", help="estimate W/Q per source")
    p.add_argument("--manifest", required=True)
    p.add_argument("--labels", required=True, help="CSV source_id,entry_index,clean")
    p.add_argument("--out", required=True)
    p.add_argument("--sample-n", dest="sample_n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    _add_endpoint_flags(p)
    p.set_defaults(fn=_cmd_score_pool)

    p = sub.add_parser("select", help="greedy QxW selection up to the budget")
    p.add_argument("--stats", required=True)
    p.add_argument("--normalized-dir", dest="normalized_dir", required=True)
    p.add_argument("--counts", help="defaults to normalize_report.json in --normalized-dir")
    p.add_argument("--budget", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("judge", help="keep entries the judge deems valuable")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--journal")
    p.add_argument("--workers", type=int)
    _add_endpoint_flags(p)
    p.set_defaults(fn=_cmd_judge)

    p = sub.add_parser("convert", help="insert tool spans and validate replies")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--outcomes")
    p.add_argument("--report")
    p.add_argument("--journal")
    p.add_argument("--workers", type=int)
    _add_endpoint_flags(p)
    p.set_defaults(fn=_cmd_convert)

    p = sub.add_parser("filter-trivial", help="drop entries whose code is only assign+print")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--outcomes")
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_filter_trivial)

    p = sub.add_parser("exec-filter", help="execute spans, inject results, drop dead entries")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--outcomes")
    p.add_argument("--report")
    p.add_argument("--journal")
    p.add_argument("--timeout", type=float)
    p.add_argument("--workers", type=int)
    _add_executor_flags(p)
    p.set_defaults(fn=_cmd_exec_filter)

    p = sub.add_parser("consistency-filter",
                       help="drop entries whose results never appear in later text")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--outcomes")
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_consistency_filter)

    p = sub.add_parser("stats", help="entry/tool-call/library counts per source")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("strip-baseline", help="delete every tool span (baseline dataset)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_strip_baseline)

    p = sub.add_parser("gen-randomqa", help="generate seeded QA pairs")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--templates", help="comma-separated template ids, default all 50")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_randomqa)

    p = sub.add_parser("emit-fact-prompts", help="print the 15 construction prompts")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_emit_fact_prompts)

    p = sub.add_parser("eval", help="score a session against gold answers")
    p.add_argument("--pairs", required=True)
    p.add_argument("--fact", action="store_true", help="pairs file is question/answer text")
    p.add_argument("--predictions", help="JSONL {question, predicted} to score offline")
    p.add_argument("--session", choices=["echo", "empty"],
                   help="built-in oracle sessions for self-checks")
    p.add_argument("--report")
    p.add_argument("--workers", type=int)
    p.add_argument("--max-new-tokens", dest="max_new_tokens", type=int)
    p.add_argument("--timeout", type=float)
    _add_endpoint_flags(p)
    _add_executor_flags(p)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("run-infer", help="token-interpreting generation loop")
    p.add_argument("--prompt")
    p.add_argument("--prompt-file", dest="prompt_file")
    p.add_argument("--script", help="JSON list of tokens for the scripted source")
    p.add_argument("--max-new-tokens", dest="max_new_tokens", type=int)
    p.add_argument("--temperature", type=float)
    p.add_argument("--timeout", type=float)
    p.add_argument("--out")
    _add_endpoint_flags(p)
    _add_executor_flags(p)
    p.set_defaults(fn=_cmd_run_infer)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args.config_data = _load_json(args.config) if args.config else {}
    if not isinstance(args.config_data, dict):
        print("config file must hold a JSON object", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EndpointError as exc:
        print(f"endpoint error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 4
    except ToolweaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("interrupted; journals are flushed per write", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
