"""Command line interface: ``tracemine <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 I/O error. Every run writes a JSON
manifest (to ``--manifest`` or, by default, one line on stderr) holding the
argv needed to reproduce it via ``tracemine replay``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter

from . import __version__
from .bench import bench_rows, rows_as_dicts, rows_to_tsv
from .counting import count_traces, total_traces
from .dag import load_dag, save_dag
from .enumeration import DEFAULT_BUDGET, exact_frequencies, walk_all
from .errors import BudgetExceeded, TraceMineError
from .hashing import DEFAULT_HASHER, format_hash
from .heavy_hitters import FRESH_EXTRA_C, MODES, mine_frequent
from .ingestion import ingest, read_events
from .sampling import LAWS, SampleConfig, TraceSampler, choose_p
from .synthetic import GeneratorSpec, synthetic_events

DEFAULT_M = 5
DEFAULT_DELTA = 10.0
DEFAULT_C = 10.0


def _floats(text):
    return [float(x) for x in text.split(",") if x]


def _ints(text):
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracemine", description="Frequent label sequences among paths of a labeled DAG.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="write the run manifest here (default: stderr)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="event CSV -> DAG file")
    p.add_argument("events")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="max gap in minutes (default 10)")
    p.add_argument("-o", "--output", required=True, help="DAG file to write")
    p.add_argument("--allow-zero-gap", action="store_true", help="connect readings with equal timestamps")

    def dag_cmd(name, help_, workers=1):
        q = sub.add_parser(name, parents=[common], help=help_)
        q.add_argument("dag")
        q.add_argument("-m", "--max-len", type=int, default=DEFAULT_M, dest="m")
        q.add_argument("--workers", type=int, default=workers)
        return q

    p = dag_cmd("enumerate", "print every trace of S_m")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--hashed-output", action="store_true")
    p.add_argument("--counts", action="store_true", help="aggregate: trace<TAB>count, most frequent first")

    p = dag_cmd("count", "path counts and |S_m|")
    p.add_argument("--dump-table", help="write the c[v][i] table as TSV")

    ncpu = os.cpu_count() or 1
    p = dag_cmd("sample", "draw one Bernoulli sample of S_m", workers=ncpu)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--oversample-c", type=float, default=DEFAULT_C, dest="C")
    p.add_argument("--p", type=float, help="inclusion probability (overrides epsilon/C)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--law", choices=LAWS, default="exact")
    p.add_argument("--hashed-output", action="store_true")
    p.add_argument("-o", "--output", help="write sampled traces here, one per line")

    p = dag_cmd("mine", "report traces with relative frequency >= epsilon", workers=ncpu)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--oversample-c", type=float, default=DEFAULT_C, dest="C")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="same-seed")
    p.add_argument("--fresh-extra-c", type=float, default=FRESH_EXTRA_C)
    p.add_argument("--law", choices=LAWS, default="exact")
    p.add_argument("--hashed-output", action="store_true")
    p.add_argument("--plot", help="render the report as a bar chart to this file")

    p = sub.add_parser("bench", parents=[common], help="synthetic (delta, m) sweep")
    p.add_argument("--generator", default="", help="key=value,... (tags, readings_per_tag, zones, mean_gap, planted=1-2-3;4-5, planted_prob, overlap_prob, repeat_prob, seed)")
    p.add_argument("--events", help="use this event CSV instead of the generator")
    p.add_argument("--deltas", type=_floats, default=[20.0, 10.0, 5.0, 3.0])
    p.add_argument("--max-lens", type=_ints, default=[5, 3], dest="ms")
    p.add_argument("--epsilon", type=float, help="threshold (default: frequency of the 100th most frequent trace)")
    p.add_argument("--oversample-c", type=float, default=DEFAULT_C, dest="C")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--no-exact", action="store_true", help="skip the enumeration oracle columns")
    p.add_argument("--plot-dir", help="write figures into this directory")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest_file")
    return parser


class Run:
    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.manifest = {
            "tool": "tracemine",
            "version": __version__,
            "subcommand": args.command,
            "argv": list(argv),
            "params": {k: v for k, v in vars(args).items() if k not in ("manifest",)},
            "hash_base": f"{DEFAULT_HASHER.base:#x}",
            "outputs": {},
            "stats": {},
        }
        self.t0 = time.perf_counter()

    def finish(self, status):
        self.manifest["status"] = status
        self.manifest["seconds"] = round(time.perf_counter() - self.t0, 6)
        text = json.dumps(self.manifest, sort_keys=True, default=str)
        if self.args.manifest:
            with open(self.args.manifest, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text, file=sys.stderr)


def cmd_ingest(run, out):
    a = run.args
    events = read_events(a.events)
    res = ingest(events, a.delta, allow_zero_gap=a.allow_zero_gap)
    save_dag(res.dag, a.output)
    out.write(f"|V|={res.vertex_count} |E|={res.edge_count}\n")
    run.manifest["outputs"]["dag"] = a.output
    run.manifest["stats"] = {"events": len(events), "V": res.vertex_count, "E": res.edge_count,
                             "long_gap_merges": res.long_gap_merges}


def cmd_enumerate(run, out):
    a = run.args
    dag = load_dag(a.dag)
    if dag.vertex_count == 0:
        run.manifest["stats"] = {"total_traces": 0}
        return
    total = total_traces(count_traces(dag, a.m))
    if total > a.budget:
        raise BudgetExceeded(f"|S_{a.m}| = {total} exceeds the enumeration budget of {a.budget}")
    if a.counts:
        ms = exact_frequencies(dag, a.m, budget=a.budget, hashed=a.hashed_output)
        for key, cnt in sorted(ms.counts.items(), key=lambda kv: (-kv[1], kv[0])):
            name = format_hash(key) if a.hashed_output else dag.format_trace(key)
            out.write(f"{name}\t{cnt}\n")
        run.manifest["stats"] = {"total_traces": ms.total, "distinct_traces": ms.distinct}
        return
    write = out.write
    if a.hashed_output:
        walk_all(dag, a.m, lambda h, st: write(format_hash(h) + "\n"))
    else:
        names = {lab: dag.label_name(lab) for lab in set(dag.label_list)}
        walk_all(dag, a.m, lambda h, st: write("-".join(names[x] for x in st) + "\n"))
    run.manifest["stats"] = {"total_traces": total}


def cmd_count(run, out):
    a = run.args
    dag = load_dag(a.dag)
    if dag.vertex_count == 0:
        out.write("total=0\n")
        return
    table = count_traces(dag, a.m)
    total = total_traces(table)
    out.write(f"total={total}\n")
    out.write("m\t|V|\t|E|\ttot_traces\n")
    for i in range(1, a.m + 1):
        out.write(f"{i}\t{dag.vertex_count}\t{dag.edge_count}\t{total_traces(table, i)}\n")
    if a.dump_table:
        with open(a.dump_table, "w", encoding="utf-8") as fh:
            fh.write(table.to_tsv())
        run.manifest["outputs"]["table"] = a.dump_table
    run.manifest["stats"] = {"total_traces": total, "V": dag.vertex_count, "E": dag.edge_count}


def cmd_sample(run, out):
    a = run.args
    dag = load_dag(a.dag)
    table = count_traces(dag, a.m)
    total = total_traces(table)
    p = a.p if a.p is not None else choose_p(a.epsilon, a.C, max(total, 1))
    cfg = SampleConfig(m=a.m, p=p, seed=a.seed, epsilon=a.epsilon, C=a.C, law=a.law)
    sampler = TraceSampler.from_config(dag, table, cfg)
    fh = open(a.output, "w", encoding="utf-8") if a.output else None
    try:
        if fh is None:
            emit = lambda h, st: None  # noqa: E731
        elif a.hashed_output:
            emit = lambda h, st: fh.write(format_hash(h) + "\n")  # noqa: E731
        else:
            emit = lambda h, st: fh.write(dag.format_trace(st) + "\n")  # noqa: E731
        stats = sampler.run(a.seed, emit, workers=a.workers) if total else None
    finally:
        if fh is not None:
            fh.close()
    n = stats.emitted if stats else 0
    ratio = total / n if n else 0.0
    out.write("m\ttot_traces\t# samples\tratio\n")
    out.write(f"{a.m}\t{total}\t{n}\t{ratio:.6g}\n")
    run.manifest["stats"] = {"total_traces": total, "p": p, "expected_samples": p * total,
                             **(stats.to_dict() if stats else {})}
    if a.output:
        run.manifest["outputs"]["samples"] = a.output


def cmd_mine(run, out):
    a = run.args
    dag = load_dag(a.dag)
    report = mine_frequent(dag, a.m, a.epsilon, a.C, a.seed, a.mode, fresh_extra_c=a.fresh_extra_c,
                           law=a.law, workers=a.workers)
    out.write(report.to_tsv(dag, hashed=a.hashed_output))
    run.manifest["stats"] = report.metadata
    if a.plot:
        from .plotting import plot_report

        plot_report(report, dag, a.plot)
        run.manifest["outputs"]["plot"] = a.plot


def cmd_bench(run, out):
    a = run.args
    if a.events:
        events = read_events(a.events)
    else:
        events = synthetic_events(GeneratorSpec.parse(a.generator))
    rows = bench_rows(events, a.deltas, a.ms, epsilon=a.epsilon, C=a.C, seed=a.seed,
                      exact=not a.no_exact, budget=a.budget)
    out.write(rows_to_tsv(rows))
    run.manifest["stats"] = {"rows": rows_as_dicts(rows), "events": len(events)}
    if a.plot_dir:
        from .plotting import plot_bench

        run.manifest["outputs"]["figures"] = plot_bench(rows, a.plot_dir)


COMMANDS = {
    "ingest": cmd_ingest,
    "enumerate": cmd_enumerate,
    "count": cmd_count,
    "sample": cmd_sample,
    "mine": cmd_mine,
    "bench": cmd_bench,
}


def main(argv=None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            with open(args.manifest_file, encoding="utf-8") as fh:
                recorded = json.load(fh)
        except OSError as exc:
            print(f"tracemine: {exc}", file=sys.stderr)
            return 2
        return main(recorded["argv"], out)

    run = Run(args, argv)
    try:
        COMMANDS[args.command](run, out)
    except OSError as exc:
        print(f"tracemine: {exc}", file=sys.stderr)
        run.finish("io-error")
        return 2
    except (TraceMineError, ValueError, OverflowError) as exc:
        print(f"tracemine: {exc}", file=sys.stderr)
        run.finish("error")
        return 1
    run.finish("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
