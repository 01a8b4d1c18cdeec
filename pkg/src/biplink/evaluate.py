"""Split/score/evaluate harness and the benchmark matrix runner.

A scorer is any callable (train_graph, candidate_pairs) -> ScoreTable; the
registry builds one per method name so heuristics, learners, and recommender
conversions all run under the same protocol: score every non-train pair,
label by test membership, rank, report AUPR/AUROC. Wall-clock covers the
scoring phase only (training included, data plumbing excluded).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import BiplinkError
from .features import build_pair_dataset, pair_feature_matrix
from .gbdt import GbdtConfig, fit_gbdt, predict_gbdt
from .graph import (BipartiteGraph, EdgeSplit, candidate_pairs, load_edge_list,
                    min_degree_filter, split_per_left_node, train_graph_from_split)
from .measures import compute_node_measures
from .metrics import aupr, auroc, positive_labels_for_pairs
from .recommend import (TrainConfig, scores_from_embeddings, train_bpr,
                        train_lightgcn)
from .reduction import fit_reduction, score_reduction
from .scores import (KatzParams, ScoreTable, SpmParams, score_dist, score_katz,
                     score_lp, score_pa, score_path_index)
from .spm import score_spm

METHOD_NAMES = ("l3", "l5", "l7", "katz", "lp", "pa", "dist", "spm",
                "bpr", "lightgcn", "gbdt", "pca", "lda")

WORKER_ENV_VAR = "BIPLINK_WORKERS"

CSV_COLUMNS = ("dataset", "method", "seed", "aupr", "auroc", "runtime_seconds",
               "n_candidates", "config_digest")
# wall-clock can never be reproduced byte-for-byte; the _repro variant drops it
REPRO_CSV_COLUMNS = tuple(c for c in CSV_COLUMNS if c != "runtime_seconds")


@dataclass(frozen=True)
class EvalReport:
    method_name: str
    dataset_name: str
    aupr: float
    auroc: float
    runtime_seconds: float
    n_positives: int
    n_candidates: int
    config_digest: str

    def __post_init__(self):
        if not (0.0 <= self.aupr <= 1.0 and 0.0 <= self.auroc <= 1.0):
            raise ValueError("metric out of [0, 1]")
        if self.n_positives > self.n_candidates:
            raise ValueError("more positives than candidates")

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: Path | str) -> "EvalReport":
        return cls(**json.loads(Path(path).read_text()))


def config_digest(obj) -> str:
    """Stable short hash of any JSON-serializable configuration object."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def build_scorer(name: str, params: dict | None = None, seed: int = 0):
    """Scorer callable for a method name; params override per-method defaults."""
    p = dict(params or {})
    if name in ("l3", "l5", "l7"):
        length = int(name[1:])
        normalized = bool(p.get("normalized", True))
        return lambda g, pairs: score_path_index(g, pairs, length, normalized)
    if name == "katz":
        kp = KatzParams(alpha=p.get("alpha", 0.01), max_length=p.get("max_length", 21),
                        tolerance=p.get("tolerance", 1e-12))
        return lambda g, pairs: score_katz(g, kp, pairs)
    if name == "lp":
        eps = p.get("epsilon", 0.001)
        return lambda g, pairs: score_lp(g, eps, pairs)
    if name == "pa":
        return lambda g, pairs: score_pa(g, pairs)
    if name == "dist":
        return lambda g, pairs: score_dist(g, pairs)
    if name == "spm":
        sp_ = SpmParams(perturbation_fraction=p.get("perturbation_fraction", 0.1),
                        repetitions=p.get("repetitions", 10),
                        degeneracy_tolerance=p.get("degeneracy_tolerance", 1e-10),
                        node_cap=p.get("node_cap", 5000))
        return lambda g, pairs: score_spm(g, sp_, pairs, seed=seed)
    if name in ("bpr", "lightgcn"):
        cfg = TrainConfig(dim=p.get("dim", 64), epochs=p.get("epochs", 300),
                          learning_rate=p.get("learning_rate", 0.001),
                          l2_reg=p.get("l2_reg", 1e-4),
                          batch_size=p.get("batch_size", 4096),
                          layers=p.get("layers", 3) if name == "lightgcn" else 0,
                          seed=seed)

        def rec_scorer(g, pairs, _cfg=cfg, _name=name):
            if _name == "bpr":
                emb = train_bpr(g, _cfg)
            else:
                emb = train_lightgcn(g, _cfg).final
            return scores_from_embeddings(emb, pairs, _name, g.fingerprint(),
                                          {**_cfg.__dict__})

        return rec_scorer
    if name in ("gbdt", "pca", "lda"):
        def learner_scorer(g, pairs, _name=name, _p=p, _seed=seed):
            measures = compute_node_measures(g)
            data = build_pair_dataset(g, measures, _seed)
            feats = pair_feature_matrix(g, measures, np.asarray(pairs, dtype=np.int64))
            if _name == "gbdt":
                cfg = GbdtConfig(n_trees=_p.get("n_trees", 200),
                                 max_depth=_p.get("max_depth", 4),
                                 learning_rate=_p.get("learning_rate", 0.1),
                                 l2_reg=_p.get("l2_reg", 1.0),
                                 min_child_weight=_p.get("min_child_weight", 1.0))
                model = fit_gbdt(data, cfg, _seed)
                scores = predict_gbdt(model, feats)
                meta = {**cfg.__dict__, "seed": _seed}
            else:
                model = fit_reduction(data, _name)
                scores = score_reduction(model, feats)
                meta = {"seed": _seed}
            return ScoreTable(_name, np.asarray(pairs, dtype=np.int64), scores,
                              g.fingerprint(), meta)

        return learner_scorer
    raise ValueError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")


def evaluate_method(graph: BipartiteGraph, split: EdgeSplit, scorer,
                    method_name: str = "method", dataset_name: str = "dataset",
                    digest: str = "") -> tuple[EvalReport, ScoreTable]:
    """Score all candidates of a split and report ranking quality.

    The scorer sees only the train graph; labels come from test membership
    afterwards. Timing wraps the scorer call alone.
    """
    train = train_graph_from_split(graph, split)
    cands = candidate_pairs(graph, split)
    t0 = time.perf_counter()
    table = scorer(train, cands)
    runtime = time.perf_counter() - t0
    labels = positive_labels_for_pairs(cands, split.test_edges, graph.right_count)
    report = EvalReport(method_name, dataset_name,
                        aupr(table.scores, labels), auroc(table.scores, labels),
                        runtime, int(labels.sum()), len(cands), digest)
    return report, table


def _load_dataset(entry: dict) -> BipartiteGraph:
    g = load_edge_list(entry["path"], entry.get("format", "tsv_pair"))
    if entry.get("min_left_degree", 0) > 1:
        g = min_degree_filter(g, int(entry["min_left_degree"]))
    return g


def _run_cell(graph, dataset_name, method, seed, test_fraction, digest):
    split = split_per_left_node(graph, test_fraction, seed)
    scorer = build_scorer(method["name"], method.get("params"), seed)
    report, table = evaluate_method(graph, split, scorer, method["name"],
                                    dataset_name, digest)
    return report, table


def _format_cell_rows(reports) -> list[str]:
    rows = []
    for r, seed in reports:
        rows.append(",".join([r.dataset_name, r.method_name, str(seed),
                              repr(r.aupr), repr(r.auroc), repr(r.runtime_seconds),
                              str(r.n_candidates), r.config_digest]))
    return rows


def _markdown_table(reports) -> str:
    """Mean +/- stdev per (dataset, method), Table-2-like layout."""
    groups: dict = {}
    for r, _seed in reports:
        groups.setdefault((r.dataset_name, r.method_name), []).append(r)
    lines = ["| dataset | method | AUPR | AUROC | runtime (s) |",
             "|---|---|---|---|---|"]
    for (ds, meth), rs in sorted(groups.items()):
        au = np.array([r.aupr for r in rs])
        ro = np.array([r.auroc for r in rs])
        rt = np.array([r.runtime_seconds for r in rs])
        note = "" if len(rs) > 1 else " (single seed)"
        lines.append(f"| {ds} | {meth} | {au.mean():.4f} ± {au.std():.4f} | "
                     f"{ro.mean():.4f} ± {ro.std():.4f} | {rt.mean():.2f}{note} |")
    return "\n".join(lines) + "\n"


def benchmark_run(config: dict, out_dir: Path | str | None = None,
                  workers: int | None = None):
    """Full (dataset x method x seed) matrix from a benchmark config dict.

    Persists every ScoreTable and EvalReport, then results.csv (full),
    results_repro.csv (without wall-clock, byte-stable across reruns),
    report.md, and failures.csv when any cell failed. Returns
    (reports, failures) where reports is a list of (EvalReport, seed).
    """
    out_dir = Path(out_dir if out_dir is not None else config.get("output_dir", "runs/out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_digest(config)
    if workers is None:
        workers = int(os.environ.get(WORKER_ENV_VAR, "1"))
    test_fraction = config.get("split", {}).get("test_fraction", 0.1)
    seeds = config.get("split", {}).get("seeds", [0])

    cells = []
    for ds in config["datasets"]:
        graph = _load_dataset(ds)
        for method in config["methods"]:
            for seed in seeds:
                cells.append((graph, ds["name"], method, seed))

    reports, failures = [], []

    def run_one(cell):
        graph, ds_name, method, seed = cell
        return _run_cell(graph, ds_name, method, seed, test_fraction, digest)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(lambda c: _safe(run_one, c), cells))
    for (graph, ds_name, method, seed), outcome in zip(cells, outcomes):
        tag = f"{ds_name}_{method['name']}_seed{seed}"
        if isinstance(outcome, Exception):
            failures.append((ds_name, method["name"], seed, f"{type(outcome).__name__}: {outcome}"))
            continue
        report, table = outcome
        table.save(out_dir / "scores" / f"{tag}.tsv")
        report.save(out_dir / "reports" / f"{tag}.json")
        reports.append((report, seed))

    reports.sort(key=lambda rs: (rs[0].dataset_name, rs[0].method_name, rs[1]))
    rows = _format_cell_rows(reports)
    (out_dir / "results.csv").write_text("\n".join([",".join(CSV_COLUMNS)] + rows) + "\n")
    repro_rows = []
    for r, seed in reports:
        repro_rows.append(",".join([r.dataset_name, r.method_name, str(seed),
                                    repr(r.aupr), repr(r.auroc),
                                    str(r.n_candidates), r.config_digest]))
    (out_dir / "results_repro.csv").write_text(
        "\n".join([",".join(REPRO_CSV_COLUMNS)] + repro_rows) + "\n")
    (out_dir / "report.md").write_text(_markdown_table(reports))
    if failures:
        flines = ["dataset,method,seed,error"]
        flines += [f"{d},{m},{s},{e.replace(',', ';')}" for d, m, s, e in failures]
        (out_dir / "failures.csv").write_text("\n".join(flines) + "\n")
    return reports, failures


def _safe(fn, arg):
    try:
        return fn(arg)
    except (BiplinkError, ValueError, AssertionError, OSError) as exc:
        return exc
