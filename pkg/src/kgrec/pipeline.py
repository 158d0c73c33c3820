"""End-to-end orchestration: parse, embed, index, retrieve, filter, explain.

`run` drives the three recommendation stages over a target list and writes a
JSON-Lines report (one object per target, with machine-checkable evidence)
plus a manifest carrying the config snapshot, corpus counts, per-target
diagnostics, and artifact checksums. `compare_models` and `sweep_hyperparams`
are the batch evaluation harnesses (model shoot-out and lr x dim grid), and
`verify_run` re-proves a finished run: artifact checksums, evidence
soundness against the input graph, the retention rule, and the per-target
counting invariant.

All randomness flows from the single top-level seed in `PipelineConfig`,
fanned out to the stage seeds by fixed documented offsets (model +1,
index +2, synthesis +3, split +4, queries +5), so one integer pins the whole
run. In deterministic mode outputs are byte-stable across reruns: wall times
are recorded in a separate timings file so the manifest and report files
hash identically.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from kgrec import ann_hnsw, kge, synth
from kgrec.ann_hnsw import HnswIndex, HnswParams
from kgrec.kge import EmbeddingModel, TrainConfig
from kgrec.rdf_store import RDFS_LABEL, Term, TripleStore
from kgrec.semantic_filter import (
    Evidence,
    FilterSpec,
    Recommendation,
    builtin_filters,
    evidence_is_sound,
    filter_candidates,
    load_filter_config,
    type_gate,
)

MODEL_SEED_OFFSET = 1
INDEX_SEED_OFFSET = 2
SYNTH_SEED_OFFSET = 3
SPLIT_SEED_OFFSET = 4
QUERY_SEED_OFFSET = 5

RECOMMENDATIONS_NAME = "recommendations.jsonl"
MANIFEST_NAME = "manifest.json"
TIMINGS_NAME = "timings.json"
MODEL_NAME = "model.kge"
INDEX_NAME = "index.hnsw"

COMPARE_COLUMNS = "model,mrr,hits1,hits3,hits10,time_s"
SWEEP_COLUMNS = "lr,dim,mrr,hits1,hits3,hits10,time_s"


class PipelineError(RuntimeError):
    """A stage failed; `stage` names which one."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one recommendation run needs; see module docstring for seeds."""

    input_graph: str
    output: str
    targets: tuple[str, ...] = ()
    train_config: TrainConfig = field(default_factory=TrainConfig)
    hnsw_params: HnswParams = field(default_factory=HnswParams)
    raw_k: int = 100
    top_n: int = 10
    filter_config: str | None = None
    allowed_classes: tuple[str, ...] | None = None
    label_property: str = RDFS_LABEL
    checkpoint: str | None = None
    index_path: str | None = None
    seed: int = 0
    strict: bool = True
    deterministic: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.top_n < 1:
            raise PipelineError("config", "top_n must be >= 1")
        if self.raw_k < self.top_n:
            raise PipelineError("config", "raw_k must be >= top_n (filters only shrink)")
        if self.workers < 1:
            raise PipelineError("config", "workers must be >= 1")
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.allowed_classes is not None:
            object.__setattr__(self, "allowed_classes", tuple(self.allowed_classes))

    def snapshot(self) -> dict:
        snap = dataclasses.asdict(self)
        snap["train_config"] = dataclasses.asdict(self.train_config)
        snap["hnsw_params"] = dataclasses.asdict(self.hnsw_params)
        snap["targets"] = list(self.targets)
        if self.allowed_classes is not None:
            snap["allowed_classes"] = list(self.allowed_classes)
        return snap


@dataclass
class RunManifest:
    """Provenance record of one run; validates the counting invariant."""

    config: dict
    counts: dict
    per_target: list[dict]
    stage_wall_times_s: dict
    artifacts: dict

    def __post_init__(self):
        raw_k = int(self.config.get("raw_k", 0))
        for row in self.per_target:
            if row.get("error") is not None:
                continue
            if not 0 <= row["connected"] <= row["gated"] <= row["raw_k"] <= raw_k:
                raise PipelineError(
                    "manifest",
                    f"target {row['target']}: counting invariant violated "
                    f"(connected {row['connected']} <= gated {row['gated']} "
                    f"<= raw_k {row['raw_k']} <= {raw_k} must hold)",
                )

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "counts": self.counts,
            "per_target": self.per_target,
            "stage_wall_times_s": self.stage_wall_times_s,
            "artifacts": self.artifacts,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, path: str | Path) -> "RunManifest":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            config=payload["config"],
            counts=payload["counts"],
            per_target=payload["per_target"],
            stage_wall_times_s=payload["stage_wall_times_s"],
            artifacts=payload["artifacts"],
        )


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def graph_triples(store: TripleStore) -> list[tuple[int, int, int]]:
    """Entity-to-entity triples (literal objects are not rankable links)."""
    return [(s, p, o) for s, p, o in store.match() if not store.is_literal(o)]


def holdout_split(
    triples: Sequence[tuple[int, int, int]],
    eval_fraction: float,
    seed: int,
) -> tuple[list[tuple[int, int, int]], list[tuple[int, int, int]]]:
    """Deterministic train/eval split; eval gets round(n * fraction) triples."""
    if not 0.0 <= eval_fraction < 1.0:
        raise PipelineError("split", "eval_fraction must lie in [0, 1)")
    n = len(triples)
    n_eval = int(round(n * eval_fraction))
    order = np.random.default_rng(seed).permutation(n)
    eval_rows = set(order[:n_eval].tolist())
    train, evaluation = [], []
    for i, t in enumerate(triples):
        (evaluation if i in eval_rows else train).append(t)
    return train, evaluation


def label_of(store: TripleStore, entity: int, label_property: str = RDFS_LABEL) -> str | None:
    """Lexically smallest literal label of an entity, or None."""
    pid = store.lookup_iri(label_property)
    if pid is None:
        return None
    labels = [
        store.resolve(t.o).lexical
        for t in store.match(s=entity, p=pid)
        if store.is_literal(t.o)
    ]
    return min(labels) if labels else None


def evidence_payload(store: TripleStore, ev: Evidence) -> dict:
    """Evidence as the JSONL wire shape (n3-encoded terms throughout)."""
    if isinstance(ev.shared_value, Term):
        shared = ev.shared_value.n3()
    else:
        target_date, candidate_date, delta = ev.shared_value
        shared = [target_date, candidate_date, delta]
    return {
        "filter": ev.filter_name,
        "path": [str(step) for step in ev.property_path],
        "shared_value": shared,
        "witnesses": [
            [store.resolve(s).n3(), store.resolve(p).n3(), store.resolve(o).n3()]
            for s, p, o in ev.witness_triples
        ],
    }


def recommendation_payload(store: TripleStore, rec: Recommendation, label_property: str) -> dict:
    return {
        "iri": store.resolve(rec.candidate).lexical,
        "label": label_of(store, rec.candidate, label_property),
        "similarity": rec.similarity,
        "rank": rec.rank,
        "evidence": [evidence_payload(store, ev) for ev in rec.evidence],
    }


def _load_or_train_model(
    store: TripleStore,
    config: PipelineConfig,
    checkpoint_path: Path,
) -> EmbeddingModel:
    if checkpoint_path.exists():
        model = kge.load_checkpoint(checkpoint_path, store)
        return model
    triples = graph_triples(store)
    if not triples:
        raise PipelineError("train", "graph has no entity-to-entity triples to train on")
    entities = store.entity_ids()
    relations = sorted({p for _, p, _ in triples})
    train_cfg = dataclasses.replace(config.train_config, seed=config.seed + MODEL_SEED_OFFSET)
    model = kge.init_model(train_cfg, entities, relations)
    kge.train(model, triples, train_cfg)
    kge.save_checkpoint(model, checkpoint_path, store)
    return model


def _load_or_build_index(
    model: EmbeddingModel,
    config: PipelineConfig,
    index_path: Path,
) -> HnswIndex:
    if index_path.exists():
        index = ann_hnsw.load(index_path)
        # An index file binds node ids and vectors to the model it was built
        # from; reusing it with a different model would silently pair search
        # hits with the wrong entities.
        with np.errstate(all="ignore"):
            norms = np.linalg.norm(model.entity_params, axis=1)
            matches = (
                index.ids.shape == model.entity_ids.shape
                and np.array_equal(index.ids, model.entity_ids)
                and index.vectors.shape == model.entity_params.shape
                and np.array_equal(index.vectors, model.entity_params / norms[:, None])
            )
        if not matches:
            raise PipelineError(
                "index",
                f"stored index {index_path} was built from a different model; "
                "delete it or point index_path at the matching one",
            )
        return index
    params = dataclasses.replace(config.hnsw_params, seed=config.seed + INDEX_SEED_OFFSET)
    index = ann_hnsw.build(model.entity_params, model.entity_ids, params)
    ann_hnsw.save(index, index_path)
    return index


def _recommend_one(
    store: TripleStore,
    model: EmbeddingModel,
    index: HnswIndex,
    specs: Sequence[FilterSpec],
    config: PipelineConfig,
    target_iri: str,
) -> tuple[dict | None, dict]:
    """(jsonl_record | None, manifest_row) for one target; never raises."""
    row: dict = {"target": target_iri, "error": None, "raw_k": 0, "gated": 0, "connected": 0, "emitted": 0}
    tid = store.lookup_iri(target_iri)
    if tid is None:
        row["error"] = "target not found in graph"
        return None, row
    try:
        query = kge.entity_vector(model, tid)
    except kge.KgeError:
        row["error"] = "target has no embedding (not an entity in the graph)"
        return None, row
    try:
        hits = ann_hnsw.search(index, query, config.raw_k + 1)
        candidates = [(int(c), sim) for c, sim in hits if int(c) != tid][: config.raw_k]
        gated = type_gate(store, candidates, config.allowed_classes)
        recs = filter_candidates(store, tid, candidates, specs, config.allowed_classes)
    except Exception as exc:
        row["error"] = f"recommendation failed: {exc}"
        return None, row
    final = recs[: config.top_n]
    row.update(raw_k=len(candidates), gated=len(gated), connected=len(recs), emitted=len(final))
    record = {
        "target": target_iri,
        "target_label": label_of(store, tid, config.label_property),
        "recommendations": [
            recommendation_payload(store, r, config.label_property) for r in final
        ],
        "diagnostics": {"raw_k": len(candidates), "gated": len(gated), "connected": len(recs)},
    }
    return record, row


def run(config: PipelineConfig) -> RunManifest:
    """Parse, train-or-load, index, then recommend for every target.

    Writes recommendations.jsonl, manifest.json, and timings.json under
    `config.output`; returns the manifest. Per-target failures are recorded
    and skipped; stage failures raise PipelineError naming the stage.
    """
    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    try:
        store = TripleStore.from_ntriples(config.input_graph, strict=config.strict)
    except Exception as exc:
        raise PipelineError("parse", str(exc)) from exc
    timings["parse"] = time.perf_counter() - t0

    checkpoint_path = Path(config.checkpoint) if config.checkpoint else out_dir / MODEL_NAME
    t0 = time.perf_counter()
    try:
        model = _load_or_train_model(store, config, checkpoint_path)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("train", str(exc)) from exc
    timings["train"] = time.perf_counter() - t0

    index_path = Path(config.index_path) if config.index_path else out_dir / INDEX_NAME
    t0 = time.perf_counter()
    try:
        index = _load_or_build_index(model, config, index_path)
    except Exception as exc:
        raise PipelineError("index", str(exc)) from exc
    timings["index"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        specs = (
            load_filter_config(config.filter_config)
            if config.filter_config
            else builtin_filters()
        )
    except Exception as exc:
        raise PipelineError("filters", str(exc)) from exc

    def work(target: str) -> tuple[dict | None, dict]:
        return _recommend_one(store, model, index, specs, config, target)

    if config.workers > 1 and config.targets:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, config.targets))
    else:
        results = [work(t) for t in config.targets]
    timings["recommend"] = time.perf_counter() - t0

    rec_path = out_dir / RECOMMENDATIONS_NAME
    with open(rec_path, "w", encoding="utf-8") as fh:
        for record, _ in results:
            if record is not None:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    triple_count = sum(1 for _ in store.match())
    relation_count = len({p for _, p, _ in store.match()})
    artifacts = {
        "graph": {"path": str(config.input_graph), "sha256": sha256_file(config.input_graph)},
        "model": {"path": str(checkpoint_path), "sha256": sha256_file(checkpoint_path)},
        "index": {"path": str(index_path), "sha256": sha256_file(index_path)},
        "recommendations": {"path": str(rec_path), "sha256": sha256_file(rec_path)},
    }
    if config.filter_config:
        artifacts["filter_config"] = {
            "path": str(config.filter_config),
            "sha256": sha256_file(config.filter_config),
        }
    manifest = RunManifest(
        config=config.snapshot(),
        counts={
            "triples": triple_count,
            "entities": len(store.entity_ids()),
            "relations": relation_count,
        },
        per_target=[row for _, row in results],
        stage_wall_times_s={k: (None if config.deterministic else v) for k, v in timings.items()},
        artifacts=artifacts,
    )
    (out_dir / MANIFEST_NAME).write_text(manifest.to_json(), encoding="utf-8")
    (out_dir / TIMINGS_NAME).write_text(
        json.dumps({k: round(v, 6) for k, v in timings.items()}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest


# -- evaluation harnesses ----------------------------------------------------


def train_and_evaluate(
    store: TripleStore,
    cfg: TrainConfig,
    eval_fraction: float,
    split_seed: int,
    mode: str = "filtered",
) -> tuple[kge.RankingReport, float]:
    """Train one model on a deterministic held-out split.

    Returns the link-prediction ranking report on the evaluation split and
    the training wall time in seconds.
    """
    triples = graph_triples(store)
    if not triples:
        raise PipelineError("train", "graph has no entity-to-entity triples")
    train_set, eval_set = holdout_split(triples, eval_fraction, split_seed)
    if not eval_set:
        raise PipelineError("eval", "evaluation split is empty; raise eval_fraction")
    entities = store.entity_ids()
    relations = sorted({p for _, p, _ in triples})
    model = kge.init_model(cfg, entities, relations)
    t0 = time.perf_counter()
    kge.train(model, train_set, cfg)
    train_time = time.perf_counter() - t0
    report = kge.evaluate_ranking(model, eval_set, known_triples=triples, mode=mode)
    return report, train_time


def _metrics_csv(
    header: str,
    rows: Iterable[tuple],
    key_width: int,
    path: str | Path | None,
    deterministic: bool,
) -> str:
    """Render rows to CSV; deterministic mode zeroes the trailing time column.

    The first `key_width` columns identify the row; real wall times go to a
    `.timings.json` sidecar keyed by those columns so the CSV itself stays
    byte-stable under reruns.
    """
    lines = [header]
    timings = {}
    for row in rows:
        *front, time_s = row
        timings[",".join(str(v) for v in front[:key_width])] = round(time_s, 6)
        shown = 0.0 if deterministic else round(time_s, 6)
        cells = [repr(v) if isinstance(v, float) else str(v) for v in front]
        lines.append(",".join([*cells, repr(shown)]))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        Path(str(path) + ".timings.json").write_text(
            json.dumps(timings, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return text


def compare_models(
    graph: str | Path | TripleStore,
    models: Sequence[TrainConfig],
    epochs: int,
    out_csv: str | Path | None = None,
    eval_fraction: float = 0.1,
    seed: int = 0,
    deterministic: bool = True,
) -> str:
    """Train each configured model for `epochs` and report filtered ranking.

    Every config is run with the same epoch budget and the same split; the
    CSV has columns model,mrr,hits1,hits3,hits10,time_s (time zeroed in
    deterministic mode, real values in the .timings.json sidecar).
    """
    store = graph if isinstance(graph, TripleStore) else TripleStore.from_ntriples(graph)
    if not models:
        raise PipelineError("compare", "no model configs given")
    rows = []
    for cfg in models:
        run_cfg = dataclasses.replace(cfg, epochs=epochs, seed=seed + MODEL_SEED_OFFSET)
        report, train_time = train_and_evaluate(store, run_cfg, eval_fraction, seed + SPLIT_SEED_OFFSET)
        rows.append((run_cfg.model, report.mrr, report.hits1, report.hits3, report.hits10, train_time))
    return _metrics_csv(COMPARE_COLUMNS, rows, 1, out_csv, deterministic)


def sweep_hyperparams(
    graph: str | Path | TripleStore,
    lrs: Sequence[float],
    dims: Sequence[int],
    fixed: TrainConfig,
    out_csv: str | Path | None = None,
    eval_fraction: float = 0.1,
    seed: int = 0,
    deterministic: bool = True,
) -> str:
    """Full lr x dim cross product with all other hyperparameters fixed."""
    store = graph if isinstance(graph, TripleStore) else TripleStore.from_ntriples(graph)
    if not lrs or not dims:
        raise PipelineError("sweep", "lr and dim grids must be non-empty")
    rows = []
    for lr in lrs:
        for dim in dims:
            cfg = dataclasses.replace(fixed, lr=lr, dim=dim, seed=seed + MODEL_SEED_OFFSET)
            report, train_time = train_and_evaluate(store, cfg, eval_fraction, seed + SPLIT_SEED_OFFSET)
            rows.append((lr, dim, report.mrr, report.hits1, report.hits3, report.hits10, train_time))
    return _metrics_csv(SWEEP_COLUMNS, rows, 2, out_csv, deterministic)


def generate_synthetic_graph(
    graph_path: str | Path,
    n_persons: int = 1000,
    community_size: int = 10,
    noise_fraction: float = 0.05,
    seed: int = 0,
    truth_path: str | Path | None = None,
) -> synth.SynthResult:
    """Write a planted-community graph; seed is fanned out like the other stages."""
    spec = synth.SynthSpec(
        n_persons=n_persons,
        community_size=community_size,
        noise_fraction=noise_fraction,
        seed=seed + SYNTH_SEED_OFFSET,
    )
    return synth.write_synthetic_graph(spec, graph_path, truth_path)


# -- post-hoc verification ----------------------------------------------------


def _witness_in_store(store: TripleStore, witness: Sequence[str]) -> bool:
    from kgrec.rdf_store import parse_ntriples

    if len(witness) != 3:
        return False
    try:
        parsed = list(parse_ntriples(" ".join(witness) + " .\n", strict=True))
    except Exception:
        return False
    if len(parsed) != 1:
        return False
    s, p, o = (store.lookup(term) for term in parsed[0])
    if s is None or p is None or o is None:
        return False
    return next(iter(store.match(s, p, o)), None) is not None


def verify_run(manifest_path: str | Path) -> list[str]:
    """Re-prove a finished run; returns a list of problems (empty = clean).

    Checks artifact checksums, reloads the graph and the JSONL report,
    re-verifies every witness triple against the store, enforces the
    retention rule (every recommendation carries evidence) and the
    counting invariant, and cross-checks diagnostics against the manifest.
    """
    problems: list[str] = []
    try:
        manifest = RunManifest.from_json(manifest_path)
    except PipelineError as exc:
        return [str(exc)]
    except Exception as exc:
        return [f"manifest unreadable: {exc}"]

    for name, entry in sorted(manifest.artifacts.items()):
        path = Path(entry["path"])
        if not path.exists():
            problems.append(f"artifact missing: {name} ({path})")
            continue
        actual = sha256_file(path)
        if actual != entry["sha256"]:
            problems.append(f"checksum mismatch: {name} ({path})")

    graph_entry = manifest.artifacts.get("graph")
    rec_entry = manifest.artifacts.get("recommendations")
    if graph_entry is None or rec_entry is None:
        problems.append("manifest lacks graph/recommendations artifacts")
        return problems
    if not Path(graph_entry["path"]).exists() or not Path(rec_entry["path"]).exists():
        return problems

    try:
        store = TripleStore.from_ntriples(graph_entry["path"], strict=manifest.config.get("strict", True))
    except Exception as exc:
        problems.append(f"graph unparseable: {exc}")
        return problems

    diag_by_target: dict[str, dict] = {}
    with open(rec_entry["path"], encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append(f"recommendations line {line_no}: bad JSON ({exc})")
                continue
            target = record.get("target", f"<line {line_no}>")
            diag_by_target[target] = record.get("diagnostics", {})
            for rec in record.get("recommendations", []):
                evidence = rec.get("evidence", [])
                if not evidence:
                    problems.append(f"{target} -> {rec.get('iri')}: recommendation without evidence")
                for ev in evidence:
                    for witness in ev.get("witnesses", []):
                        if not _witness_in_store(store, witness):
                            problems.append(
                                f"{target} -> {rec.get('iri')}: witness not in graph: {witness}"
                            )

    for row in manifest.per_target:
        if row.get("error") is not None:
            continue
        diag = diag_by_target.get(row["target"])
        if diag is None:
            problems.append(f"{row['target']}: in manifest but absent from recommendations file")
            continue
        for key in ("raw_k", "gated", "connected"):
            if diag.get(key) != row[key]:
                problems.append(
                    f"{row['target']}: diagnostic {key} disagrees between report and manifest"
                )
    return problems


def check_recommendation_soundness(
    store: TripleStore, recommendations: Iterable[Recommendation]
) -> bool:
    """In-memory variant: every evidence item of every recommendation verifies."""
    return all(
        evidence_is_sound(store, ev) for rec in recommendations for ev in rec.evidence
    )
