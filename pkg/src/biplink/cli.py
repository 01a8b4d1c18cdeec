"""Command-line entry point: ingest, split, run, benchmark, report.

Exit codes: 0 success, 1 method/run failure, 2 usage or IO error. Worker
count for benchmark cells comes from --workers or the BIPLINK_WORKERS env
var; every random choice is driven by explicit seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BiplinkError, ParseError
from .evaluate import (METHOD_NAMES, benchmark_run, build_scorer, config_digest,
                       evaluate_method)
from .graph import (EDGE_LIST_FORMATS, degree_stats, load_edge_list,
                    min_degree_filter, save_edge_list, split_per_left_node)

_PARAM_FLAGS = {
    "alpha": float, "max_length": int, "tolerance": float, "epsilon": float,
    "perturbation_fraction": float, "repetitions": int, "node_cap": int,
    "dim": int, "epochs": int, "learning_rate": float, "l2_reg": float,
    "batch_size": int, "layers": int, "n_trees": int, "max_depth": int,
    "min_child_weight": float,
}


def _add_dataset_args(p):
    p.add_argument("path", help="edge list file")
    p.add_argument("--format", default="tsv_pair", choices=EDGE_LIST_FORMATS)
    p.add_argument("--min-left-degree", type=int, default=0,
                   help="drop left nodes below this degree, then right isolates")


def _load(args):
    g = load_edge_list(args.path, args.format)
    if args.min_left_degree > 1:
        g = min_degree_filter(g, args.min_left_degree)
    return g


def cmd_ingest(args) -> int:
    g = _load(args)
    for key, value in degree_stats(g).items():
        print(f"{key}\t{value}")
    if args.out:
        save_edge_list(g, args.out)
        print(f"saved\t{args.out}")
    return 0


def cmd_split(args) -> int:
    g = _load(args)
    split = split_per_left_node(g, args.test_fraction, args.seed)
    split.save(args.out)
    print(f"train_edges\t{len(split.train_edges)}")
    print(f"test_edges\t{len(split.test_edges)}")
    return 0


def cmd_run(args) -> int:
    g = _load(args)
    params = {k: v for k, v in vars(args).items()
              if k in _PARAM_FLAGS and v is not None}
    split = split_per_left_node(g, args.test_fraction, args.seed)
    scorer = build_scorer(args.method, params, args.seed)
    digest = config_digest({"method": args.method, "params": params,
                            "seed": args.seed, "test_fraction": args.test_fraction,
                            "dataset": str(args.path)})
    dataset_name = Path(args.path).stem
    report, table = evaluate_method(g, split, scorer, args.method, dataset_name, digest)
    out = Path(args.out or f"runs/{dataset_name}_{args.method}_seed{args.seed}")
    out.mkdir(parents=True, exist_ok=True)
    table.save(out / "scores.tsv")
    report.save(out / "report.json")
    print(f"aupr\t{report.aupr!r}")
    print(f"auroc\t{report.auroc!r}")
    print(f"runtime_seconds\t{report.runtime_seconds:.3f}")
    print(f"outputs\t{out}")
    return 0


def cmd_benchmark(args) -> int:
    config = json.loads(Path(args.config).read_text())
    reports, failures = benchmark_run(config, args.out, args.workers)
    out = Path(args.out or config.get("output_dir", "runs/out"))
    print(f"cells_ok\t{len(reports)}")
    print(f"cells_failed\t{len(failures)}")
    print(f"outputs\t{out}")
    for ds, method, seed, err in failures:
        print(f"failed\t{ds}\t{method}\tseed={seed}\t{err}", file=sys.stderr)
    return 1 if failures else 0


def cmd_report(args) -> int:
    lines = Path(args.results).read_text().strip().split("\n")
    header = lines[0].split(",")
    idx = {name: header.index(name) for name in header}
    groups: dict = {}
    for line in lines[1:]:
        cells = line.split(",")
        key = (cells[idx["dataset"]], cells[idx["method"]])
        groups.setdefault(key, []).append(
            (float(cells[idx["aupr"]]), float(cells[idx["auroc"]])))
    print("| dataset | method | AUPR | AUROC | seeds |")
    print("|---|---|---|---|---|")
    for (ds, meth), vals in sorted(groups.items()):
        n = len(vals)
        mp = sum(v[0] for v in vals) / n
        mr = sum(v[1] for v in vals) / n
        sp = (sum((v[0] - mp) ** 2 for v in vals) / n) ** 0.5
        sr = (sum((v[1] - mr) ** 2 for v in vals) / n) ** 0.5
        print(f"| {ds} | {meth} | {mp:.4f} ± {sp:.4f} | {mr:.4f} ± {sr:.4f} | {n} |")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biplink",
        description="Link prediction benchmarks on bipartite graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a dataset and print its statistics")
    _add_dataset_args(p)
    p.add_argument("--out", default=None, help="optionally save the (filtered) edge list")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("split", help="write a per-left-node train/test split")
    _add_dataset_args(p)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("run", help="split, score and evaluate one method")
    _add_dataset_args(p)
    p.add_argument("--method", required=True, choices=METHOD_NAMES)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    for flag, typ in _PARAM_FLAGS.items():
        p.add_argument(f"--{flag.replace('_', '-')}", type=typ, default=None)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("benchmark", help="run a dataset x method x seed matrix from a config")
    p.add_argument("config", help="JSON benchmark configuration")
    p.add_argument("--out", default=None, help="override the config output_dir")
    p.add_argument("--workers", type=int, default=None,
                   help=f"concurrent cells (default: ${{{'BIPLINK_WORKERS'}}} or 1)")
    p.set_defaults(fn=cmd_benchmark)

    p = sub.add_parser("report", help="summarize a results.csv as a Markdown table")
    p.add_argument("results", help="path to results.csv")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, FileNotFoundError, IsADirectoryError, PermissionError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BiplinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
