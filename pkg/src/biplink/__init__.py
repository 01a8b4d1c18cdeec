"""Link prediction on bipartite graphs.

Heuristic link scores (path counts, Katz, LP, PA, Dist, SPM), topological
feature classifiers (GBDT, PCA, LDA), recommender conversion (BPR, LightGCN),
and a split/rank/evaluate benchmark harness with AUPR/AUROC reporting.
"""

from .errors import (BiplinkError, CapacityError, ConvergenceError,
                     DegenerateDataError, DegenerateLabelsError, DivergenceError,
                     EmptyGraphError, GraphTooLargeError, MetricUndefinedError,
                     ParseError, SchemaError, SplitInfeasibleError)
from .evaluate import (EvalReport, benchmark_run, build_scorer, config_digest,
                       evaluate_method)
from .features import (FEATURE_NAMES, PairFeatures, build_pair_dataset,
                       negative_sample, pair_feature_matrix)
from .gbdt import GbdtConfig, GbdtModel, fit_gbdt, predict_gbdt
from .graph import (BipartiteGraph, EdgeSplit, candidate_pairs, degree_stats,
                    density, load_edge_list, min_degree_filter, non_edge_pairs,
                    save_edge_list, split_per_left_node, train_graph_from_split)
from .measures import (MEASURE_NAMES, MeasureConfig, NodeMeasures,
                       closeness_and_betweenness, compute_node_measures,
                       degree_centrality, eigenvector_centrality,
                       katz_centrality, pagerank)
from .metrics import aupr, auroc, positive_labels_for_pairs
from .recommend import (EmbeddingTable, TrainConfig, TrainedEmbeddings,
                        propagate_lightgcn, scores_from_embeddings, train_bpr,
                        train_lightgcn)
from .reduction import LinearReduction, fit_reduction, score_reduction
from .scores import (KatzParams, ScoreTable, SpmParams, rank_and_select,
                     score_dist, score_katz, score_lp, score_pa,
                     score_path_index, spectral_radius)
from .spm import score_spm

__version__ = "0.1.0"
