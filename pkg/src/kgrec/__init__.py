"""kgrec: knowledge-graph embeddings, HNSW retrieval, and explainable
semantic filtering for cultural-heritage recommendation.

The top level re-exports the distinctive names from each stage; generic
verbs (``build``, ``search``, ``run``, ``save``, ``load``) stay on their
modules (``kgrec.ann_hnsw``, ``kgrec.pipeline``, ...) so call sites read
unambiguously.  ``split_triples`` is the three-way link-prediction split
over a store; the pipeline's two-way holdout over raw triples is
``holdout_split``.
"""

from kgrec import ann_hnsw, kge, pipeline, rdf_store, semantic_filter, synth
from kgrec.ann_hnsw import (
    HnswError,
    HnswFormatError,
    HnswIndex,
    HnswParams,
    RetrievalReport,
    brute_force_knn,
)
from kgrec.kge import (
    COMPLEX,
    TRANSE,
    CheckpointError,
    EmbeddingModel,
    EpochStats,
    KgeError,
    RankingReport,
    TrainConfig,
    TrainingDivergedError,
    entity_vector,
    evaluate_ranking,
    init_model,
    load_checkpoint,
    report_from_ranks,
    save_checkpoint,
)
from kgrec.pipeline import (
    PipelineConfig,
    PipelineError,
    RunManifest,
    compare_models,
    generate_synthetic_graph,
    holdout_split,
    sweep_hyperparams,
    train_and_evaluate,
    verify_run,
)
from kgrec.rdf_store import (
    NTriplesError,
    ParseStats,
    StoreError,
    Term,
    TermKind,
    Triple,
    TripleStore,
    parse_ntriples,
    parse_term,
    split_triples,
)
from kgrec.semantic_filter import (
    Evidence,
    FilterError,
    FilterSpec,
    Recommendation,
    builtin_filters,
    evidence_is_sound,
    filter_candidates,
    load_filter_config,
    shared_value_test,
    type_gate,
)
from kgrec.synth import SynthError, SynthResult, SynthSpec

__version__ = "0.1.0"

__all__ = [
    "COMPLEX",
    "TRANSE",
    "CheckpointError",
    "EmbeddingModel",
    "EpochStats",
    "Evidence",
    "FilterError",
    "FilterSpec",
    "HnswError",
    "HnswFormatError",
    "HnswIndex",
    "HnswParams",
    "KgeError",
    "NTriplesError",
    "ParseStats",
    "PipelineConfig",
    "PipelineError",
    "RankingReport",
    "Recommendation",
    "RetrievalReport",
    "RunManifest",
    "StoreError",
    "SynthError",
    "SynthResult",
    "SynthSpec",
    "Term",
    "TermKind",
    "TrainConfig",
    "TrainingDivergedError",
    "Triple",
    "TripleStore",
    "__version__",
    "ann_hnsw",
    "brute_force_knn",
    "builtin_filters",
    "compare_models",
    "entity_vector",
    "evaluate_ranking",
    "evidence_is_sound",
    "filter_candidates",
    "generate_synthetic_graph",
    "holdout_split",
    "init_model",
    "kge",
    "load_checkpoint",
    "load_filter_config",
    "parse_ntriples",
    "parse_term",
    "pipeline",
    "rdf_store",
    "report_from_ranks",
    "save_checkpoint",
    "semantic_filter",
    "shared_value_test",
    "split_triples",
    "sweep_hyperparams",
    "synth",
    "train_and_evaluate",
    "type_gate",
    "verify_run",
]
