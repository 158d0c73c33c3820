"""Knowledge-graph embedding models: ComplEx (primary) and TransE (baseline).

Entities and relations are embedded as dense real vectors. ComplEx rows have
width 2*dim and store the real half followed by the imaginary half; its score
is Re(sum_k h_k * r_k * conj(t_k)). TransE rows have width dim and score
-||h + r - t||_1. Training uses negative sampling with analytic gradients and
sparse per-row optimizer updates; evaluation is filtered link-prediction
ranking with pessimistic tie handling.

Checkpoint format (little-endian): magic `KGE2`, model kind byte (1=ComplEx,
2=TransE), u32 dim, u64 n_entities, u64 n_relations, row-major f64 entity and
relation matrices, then a u64 byte length followed by a UTF-8 JSON object
{"entities": [...], "relations": [...]} holding each row's term in N-Triples
syntax, in row order. Rows are addressed by term content rather than by
store-internal ids, so a checkpoint stays valid for any store that contains
the same terms, regardless of interning order. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from kgrec.rdf_store import StoreError, TermId, TripleStore, parse_term

COMPLEX = "complex"
TRANSE = "transe"

CHECKPOINT_MAGIC = b"KGE2"
_KIND_BYTES = {COMPLEX: 1, TRANSE: 2}
_BYTE_KINDS = {v: k for k, v in _KIND_BYTES.items()}

_ADAGRAD_EPS = 1e-10
# Stage offsets applied to the top-level seed so initialization and sampling
# draw from decoupled streams.
TRAIN_STREAM_OFFSET = 1


class KgeError(ValueError):
    """Invalid configuration, unknown terms, or malformed checkpoints."""


class TrainingDivergedError(KgeError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"training diverged (non-finite loss or parameters) at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class CheckpointError(KgeError):
    """Unreadable or corrupt checkpoint file."""


@dataclass(frozen=True)
class TrainConfig:
    model: str = COMPLEX
    dim: int = 200
    lr: float = 0.01
    batch_size: int = 128
    epochs: int = 10
    negatives_per_positive: int = 16
    margin: float = 1.0
    optimizer: str = "adagrad"
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.model not in (COMPLEX, TRANSE):
            raise KgeError(f"unknown model kind {self.model!r}")
        if self.dim < 1:
            raise KgeError("dim must be >= 1")
        if self.lr <= 0:
            raise KgeError("lr must be positive")
        if self.batch_size < 1:
            raise KgeError("batch_size must be >= 1")
        if self.epochs < 0:
            raise KgeError("epochs must be >= 0")
        if self.negatives_per_positive < 1:
            raise KgeError("negatives_per_positive must be >= 1")
        if self.margin < 0:
            raise KgeError("margin must be non-negative")
        if self.optimizer not in ("sgd", "adagrad"):
            raise KgeError(f"unknown optimizer {self.optimizer!r}")
        if self.l2 < 0:
            raise KgeError("l2 must be non-negative")

    @property
    def width(self) -> int:
        return 2 * self.dim if self.model == COMPLEX else self.dim


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    wall_time_s: float


@dataclass
class EmbeddingModel:
    """Trained (or freshly initialized) embedding matrices plus id mappings."""

    config: TrainConfig
    entity_params: np.ndarray
    relation_params: np.ndarray
    entity_ids: np.ndarray
    relation_ids: np.ndarray
    entity_index: dict[TermId, int] = field(default_factory=dict, repr=False)
    relation_index: dict[TermId, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.entity_index:
            self.entity_index = {int(t): i for i, t in enumerate(self.entity_ids)}
        if not self.relation_index:
            self.relation_index = {int(t): i for i, t in enumerate(self.relation_ids)}
        if len(self.entity_index) != len(self.entity_ids):
            raise KgeError("duplicate entity ids")
        if len(self.relation_index) != len(self.relation_ids):
            raise KgeError("duplicate relation ids")

    @property
    def kind(self) -> str:
        return self.config.model

    @property
    def n_entities(self) -> int:
        return self.entity_params.shape[0]

    @property
    def n_relations(self) -> int:
        return self.relation_params.shape[0]

    def entity_row(self, entity: TermId) -> int:
        row = self.entity_index.get(int(entity))
        if row is None:
            raise KgeError(f"unknown entity id {entity}")
        return row

    def relation_row(self, relation: TermId) -> int:
        row = self.relation_index.get(int(relation))
        if row is None:
            raise KgeError(f"unknown relation id {relation}")
        return row

    def score(self, h: TermId, r: TermId, t: TermId) -> float:
        hr = self.entity_params[self.entity_row(h)]
        rr = self.relation_params[self.relation_row(r)]
        tr = self.entity_params[self.entity_row(t)]
        if self.kind == COMPLEX:
            return score_complex(self, hr, rr, tr)
        return score_transe(self, hr, rr, tr)


def _as_id_array(spec: int | Sequence[int] | np.ndarray, what: str) -> np.ndarray:
    if isinstance(spec, (int, np.integer)):
        if spec < 1:
            raise KgeError(f"number of {what} must be positive")
        return np.arange(int(spec), dtype=np.uint64)
    arr = np.asarray(list(spec), dtype=np.uint64)
    if arr.size < 1:
        raise KgeError(f"number of {what} must be positive")
    return arr


def init_model(
    config: TrainConfig,
    entities: int | Sequence[TermId] = 1,
    relations: int | Sequence[TermId] = 1,
) -> EmbeddingModel:
    """Create a model with parameters uniform in [-b, b], b = 6/sqrt(dim).

    `entities`/`relations` are either counts (rows map to ids 0..n-1) or
    explicit term-id sequences. Deterministic under config.seed.
    """
    ent_ids = _as_id_array(entities, "entities")
    rel_ids = _as_id_array(relations, "relations")
    bound = 6.0 / np.sqrt(config.dim)
    rng = np.random.default_rng(config.seed)
    entity_params = rng.uniform(-bound, bound, size=(ent_ids.size, config.width))
    relation_params = rng.uniform(-bound, bound, size=(rel_ids.size, config.width))
    return EmbeddingModel(config, entity_params, relation_params, ent_ids, rel_ids)


# -- scoring ---------------------------------------------------------------


def _split(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = rows.shape[-1] // 2
    return rows[..., :d], rows[..., d:]


def score_complex(model: EmbeddingModel | None, h: np.ndarray, r: np.ndarray, t: np.ndarray) -> float:
    """Re(sum_k h_k * r_k * conj(t_k)) over rows laid out as [real | imag]."""
    return float(_complex_scores(np.asarray(h), np.asarray(r), np.asarray(t)))


def score_transe(model: EmbeddingModel | None, h: np.ndarray, r: np.ndarray, t: np.ndarray) -> float:
    """Negative L1 translation distance -||h + r - t||_1 (higher is better)."""
    return float(_transe_scores(np.asarray(h), np.asarray(r), np.asarray(t)))


def _complex_scores(h: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
    h_re, h_im = _split(h)
    r_re, r_im = _split(r)
    t_re, t_im = _split(t)
    return (
        h_re * r_re * t_re
        + h_im * r_re * t_im
        + h_re * r_im * t_im
        - h_im * r_im * t_re
    ).sum(axis=-1)


def _transe_scores(h: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
    return -np.abs(h + r - t).sum(axis=-1)


def _score_rows(kind: str, h: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
    return _complex_scores(h, r, t) if kind == COMPLEX else _transe_scores(h, r, t)


def score_all_tails(model: EmbeddingModel, h_row: int, r_row: int) -> np.ndarray:
    """Scores of (h, r, e) for every entity e, as one matrix-vector product."""
    e = model.entity_params
    if model.kind == COMPLEX:
        h_re, h_im = _split(model.entity_params[h_row])
        r_re, r_im = _split(model.relation_params[r_row])
        u = np.concatenate([h_re * r_re - h_im * r_im, h_im * r_re + h_re * r_im])
        return e @ u
    x = model.entity_params[h_row] + model.relation_params[r_row]
    return -np.abs(x[None, :] - e).sum(axis=1)


def score_all_heads(model: EmbeddingModel, r_row: int, t_row: int) -> np.ndarray:
    """Scores of (e, r, t) for every entity e."""
    e = model.entity_params
    if model.kind == COMPLEX:
        r_re, r_im = _split(model.relation_params[r_row])
        t_re, t_im = _split(model.entity_params[t_row])
        u = np.concatenate([r_re * t_re + r_im * t_im, r_re * t_im - r_im * t_re])
        return e @ u
    x = model.entity_params[t_row] - model.relation_params[r_row]
    return -np.abs(e - x).sum(axis=1)


def entity_vector(model: EmbeddingModel, entity: TermId) -> np.ndarray:
    """Copy of the entity's parameter row (ComplEx: [real | imag], width 2*dim)."""
    return model.entity_params[model.entity_row(entity)].copy()


# -- loss and analytic gradients --------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _complex_partials(h, r, t):
    """Partial derivatives of the ComplEx score w.r.t. each input row.

    Writes each half directly into preallocated outputs; the arithmetic is
    the textbook product rule applied to Re(<h, r, conj(t)>).
    """
    h_re, h_im = _split(h)
    r_re, r_im = _split(r)
    t_re, t_im = _split(t)
    dh = np.empty_like(h)
    dr = np.empty_like(h)
    dt = np.empty_like(h)
    tmp = np.empty(h_re.shape)

    def fill(out, a, b, c, d, sign):
        half = out.shape[-1] // 2
        lo, hi = out[..., :half], out[..., half:]
        np.multiply(a, c, out=lo)
        np.multiply(b, d, out=tmp)
        if sign > 0:
            lo += tmp
        else:
            lo -= tmp
        np.multiply(a, d, out=hi)
        np.multiply(b, c, out=tmp)
        if sign > 0:
            hi -= tmp
        else:
            hi += tmp

    # dh = [r_re*t_re + r_im*t_im | r_re*t_im - r_im*t_re]
    fill(dh, r_re, r_im, t_re, t_im, +1)
    # dr = [h_re*t_re + h_im*t_im | h_re*t_im - h_im*t_re]
    fill(dr, h_re, h_im, t_re, t_im, +1)
    # dt = [h_re*r_re - h_im*r_im | h_im*r_re + h_re*r_im]
    fill(dt, h_re, h_im, r_re, r_im, -1)
    return dh, dr, dt


def batch_loss(
    entity_params: np.ndarray,
    relation_params: np.ndarray,
    pos: np.ndarray,
    neg: np.ndarray,
    kind: str,
    margin: float = 1.0,
) -> float:
    """Mean loss of one batch. `pos` is (B,3) rows, `neg` is (B,N,3) rows."""
    h, r, t = entity_params[pos[:, 0]], relation_params[pos[:, 1]], entity_params[pos[:, 2]]
    hn, rn, tn = entity_params[neg[..., 0]], relation_params[neg[..., 1]], entity_params[neg[..., 2]]
    s_pos = _score_rows(kind, h, r, t)
    s_neg = _score_rows(kind, hn, rn, tn)
    if kind == COMPLEX:
        return float(_softplus(-s_pos).mean() + _softplus(s_neg).mean())
    return float(np.maximum(0.0, margin + s_neg - s_pos[:, None]).mean())


def batch_gradients(
    entity_params: np.ndarray,
    relation_params: np.ndarray,
    pos: np.ndarray,
    neg: np.ndarray,
    kind: str,
    margin: float = 1.0,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Loss plus analytic gradients, aggregated per touched row.

    Returns (loss, entity_rows, entity_grads, relation_rows, relation_grads)
    where the row arrays are unique indices and the grad arrays their summed
    gradients. Matches `batch_loss` exactly (verified by finite differences).
    """
    b, n = neg.shape[0], neg.shape[1]
    h, r, t = entity_params[pos[:, 0]], relation_params[pos[:, 1]], entity_params[pos[:, 2]]
    hn, rn, tn = entity_params[neg[..., 0]], relation_params[neg[..., 1]], entity_params[neg[..., 2]]

    if kind == COMPLEX:
        # The score is bilinear in t, so s = dt . t; reusing the partials for
        # scoring halves the large-array passes per batch.
        dh, dr, dt = _complex_partials(h, r, t)
        dhn, drn, dtn = _complex_partials(hn, rn, tn)
        s_pos = np.einsum("ij,ij->i", dt, t)
        s_neg = np.einsum("ijk,ijk->ij", dtn, tn)
        loss = float(_softplus(-s_pos).mean() + _softplus(s_neg).mean())
        w_pos = -_sigmoid(-s_pos) / b
        w_neg = _sigmoid(s_neg) / (b * n)
        for part in (dh, dr, dt):
            part *= w_pos[:, None]
        for part in (dhn, drn, dtn):
            part *= w_neg[..., None]
        gh, gr, gt, ghn, grn, gtn = dh, dr, dt, dhn, drn, dtn
    else:
        diff_pos = h + r - t
        diff_neg = hn + rn - tn
        s_pos = -np.abs(diff_pos).sum(axis=-1)
        s_neg = -np.abs(diff_neg).sum(axis=-1)
        hinge = margin + s_neg - s_pos[:, None]
        active = hinge > 0
        loss = float(np.maximum(0.0, hinge).mean())
        # d(loss)/d(s_neg) = active/(B*N); d(loss)/d(s_pos) = -row_active/(B*N).
        w_neg = active / (b * n)
        w_pos = -active.sum(axis=1) / (b * n)
        gt = np.sign(diff_pos)
        gt *= w_pos[:, None]
        gh = gr = -gt
        gtn = np.sign(diff_neg)
        gtn *= w_neg[..., None]
        ghn = grn = -gtn

    width = entity_params.shape[1]
    ent_rows = np.concatenate([pos[:, 0], pos[:, 2], neg[..., 0].ravel(), neg[..., 2].ravel()])
    ent_grads = np.concatenate([gh, gt, ghn.reshape(-1, width), gtn.reshape(-1, width)])
    rel_rows = np.concatenate([pos[:, 1], neg[..., 1].ravel()])
    rel_grads = np.concatenate([gr, grn.reshape(-1, width)])
    er, eg = _aggregate(ent_rows, ent_grads)
    rr, rg = _aggregate(rel_rows, rel_grads)
    return loss, er, eg, rr, rg


def _aggregate(rows: np.ndarray, grads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inverse = np.unique(rows, return_inverse=True)
    # Segment sum as a sparse selection matrix applied to the gradient block:
    # row u of the CSR matrix picks out the occurrences of uniq[u] in their
    # original order, so addition order matches a sequential scatter-add.
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=uniq.size)
    indptr = np.zeros(uniq.size + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    sel = sparse.csr_matrix(
        (np.ones(rows.size), order, indptr), shape=(uniq.size, rows.size)
    )
    return uniq, sel @ grads


# -- training ----------------------------------------------------------------


def _map_triples(model: EmbeddingModel, triples: Iterable[tuple[int, int, int]]) -> np.ndarray:
    rows = []
    for s, p, o in triples:
        rows.append((model.entity_row(s), model.relation_row(p), model.entity_row(o)))
    return np.asarray(rows, dtype=np.int64).reshape(-1, 3)


def _sample_negatives(
    batch_pos: np.ndarray,
    rng: np.random.Generator,
    n_entities: int,
    n_neg: int,
    known: set[tuple[int, int, int]],
) -> np.ndarray:
    """Corrupt head or tail per negative; redraw collisions with known truths."""
    b = batch_pos.shape[0]
    h = batch_pos[:, 0:1]
    r = np.broadcast_to(batch_pos[:, 1:2], (b, n_neg))
    t = batch_pos[:, 2:3]
    side = rng.integers(0, 2, size=(b, n_neg))
    repl = rng.integers(0, n_entities, size=(b, n_neg))
    nh = np.where(side == 0, repl, h)
    nt = np.where(side == 0, t, repl)
    for _ in range(100):
        flat = zip(nh.ravel().tolist(), r.ravel().tolist(), nt.ravel().tolist())
        bad = np.fromiter((x in known for x in flat), dtype=bool, count=b * n_neg).reshape(b, n_neg)
        if not bad.any():
            break
        where = np.nonzero(bad)
        draw = rng.integers(0, n_entities, size=where[0].size)
        head_side = side[where] == 0
        nh[where] = np.where(head_side, draw, nh[where])
        nt[where] = np.where(head_side, nt[where], draw)
    return np.stack([nh, r, nt], axis=-1)


def train(
    model: EmbeddingModel,
    train_triples: Sequence[tuple[TermId, TermId, TermId]],
    config: TrainConfig | None = None,
) -> list[EpochStats]:
    """Train in place and return the per-epoch loss trace.

    Triples are (subject, predicate, object) term ids, all of which must be
    known to the model. Negative sampling draws from a stream derived from
    config.seed + TRAIN_STREAM_OFFSET so it is decoupled from initialization;
    batches run strictly sequentially, so training is deterministic.
    """
    cfg = config or model.config
    if cfg.model != model.kind or cfg.dim != model.config.dim:
        raise KgeError("config model/dim does not match the model being trained")
    pos_all = _map_triples(model, train_triples)
    if pos_all.shape[0] == 0:
        raise KgeError("training set is empty")
    known = {(int(a), int(b), int(c)) for a, b, c in pos_all}
    rng = np.random.default_rng(cfg.seed + TRAIN_STREAM_OFFSET)
    n = pos_all.shape[0]

    use_adagrad = cfg.optimizer == "adagrad"
    if use_adagrad:
        acc_e = np.zeros_like(model.entity_params)
        acc_r = np.zeros_like(model.relation_params)

    def apply(params, acc, rows, grads):
        if cfg.l2 > 0:
            grads = grads + 2.0 * cfg.l2 * params[rows]
        if use_adagrad:
            acc_rows = acc[rows]
            acc_rows += grads * grads
            acc[rows] = acc_rows
            np.sqrt(acc_rows, out=acc_rows)
            acc_rows += _ADAGRAD_EPS
            update = cfg.lr * grads
            update /= acc_rows
            params[rows] -= update
        else:
            params[rows] -= cfg.lr * grads

    trace: list[EpochStats] = []
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        perm = rng.permutation(n)
        total = 0.0
        for batch_no, start in enumerate(range(0, n, cfg.batch_size)):
            batch = pos_all[perm[start : start + cfg.batch_size]]
            neg = _sample_negatives(batch, rng, model.n_entities, cfg.negatives_per_positive, known)
            # Overflow on a diverging run is reported via the finiteness checks
            # below rather than as numpy warnings.
            with np.errstate(all="ignore"):
                loss, er, eg, rr, rg = batch_gradients(
                    model.entity_params, model.relation_params, batch, neg, cfg.model, cfg.margin
                )
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_no)
            apply(model.entity_params, acc_e if use_adagrad else None, er, eg)
            apply(model.relation_params, acc_r if use_adagrad else None, rr, rg)
            if not (np.isfinite(model.entity_params[er]).all() and np.isfinite(model.relation_params[rr]).all()):
                raise TrainingDivergedError(epoch, batch_no)
            total += loss * batch.shape[0]
        trace.append(EpochStats(epoch, total / n, time.perf_counter() - t0))
    return trace


def write_loss_trace(trace: Sequence[EpochStats], path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_loss,wall_time_s\n")
        for row in trace:
            fh.write(f"{row.epoch},{row.mean_loss!r},{row.wall_time_s!r}\n")


# -- evaluation ---------------------------------------------------------------


@dataclass
class RankingReport:
    mrr: float
    hits1: float
    hits3: float
    hits10: float
    per_query_ranks: list[int]
    mode: str
    wall_time_s: float

    def __post_init__(self):
        if not (0.0 <= self.hits1 <= self.hits3 <= self.hits10 <= 1.0):
            raise KgeError("hits@k must be nested within [0, 1]")
        if self.per_query_ranks:
            ranks = np.asarray(self.per_query_ranks, dtype=np.float64)
            if (ranks < 1).any():
                raise KgeError("ranks must be positive")
            if abs(self.mrr - float((1.0 / ranks).mean())) > 1e-12:
                raise KgeError("mrr inconsistent with per_query_ranks")


def report_from_ranks(ranks: Sequence[int], mode: str = "filtered", wall_time_s: float = 0.0) -> RankingReport:
    arr = np.asarray(list(ranks), dtype=np.float64)
    if arr.size == 0:
        raise KgeError("cannot aggregate an empty rank list")
    return RankingReport(
        mrr=float((1.0 / arr).mean()),
        hits1=float((arr <= 1).mean()),
        hits3=float((arr <= 3).mean()),
        hits10=float((arr <= 10).mean()),
        per_query_ranks=[int(x) for x in arr],
        mode=mode,
        wall_time_s=wall_time_s,
    )


def evaluate_ranking(
    model: EmbeddingModel,
    eval_triples: Sequence[tuple[TermId, TermId, TermId]],
    known_triples: Iterable[tuple[TermId, TermId, TermId]] | None = None,
    mode: str = "filtered",
) -> RankingReport:
    """Filtered (or raw) link-prediction ranking over both directions.

    For each eval triple the true tail is ranked among all entities by score,
    then the true head symmetrically; per_query_ranks holds [tail, head] pairs
    in eval order. Filtered mode removes other known-true corruptions before
    ranking. Ties are pessimistic: rank = 1 + |{e != true : score(e) >=
    score(true)}|.
    """
    if mode not in ("filtered", "raw"):
        raise KgeError(f"unknown evaluation mode {mode!r}")
    t0 = time.perf_counter()
    rows = _map_triples(model, eval_triples)
    if rows.shape[0] == 0:
        raise KgeError("evaluation set is empty")

    tails_of: dict[tuple[int, int], set[int]] = {}
    heads_of: dict[tuple[int, int], set[int]] = {}
    if mode == "filtered":
        if known_triples is None:
            raise KgeError("filtered mode requires known_triples")
        for s, p, o in known_triples:
            try:
                hr, rr_, tr = model.entity_row(s), model.relation_row(p), model.entity_row(o)
            except KgeError:
                continue  # e.g. literal-object triples: not rankable, not competitors
            tails_of.setdefault((hr, rr_), set()).add(tr)
            heads_of.setdefault((rr_, tr), set()).add(hr)

    ranks: list[int] = []
    for h, r, t in rows:
        scores = score_all_tails(model, h, r)
        if mode == "filtered":
            others = tails_of.get((h, r), set()) - {int(t)}
            if others:
                scores = scores.copy()
                scores[sorted(others)] = -np.inf
        ranks.append(int(np.count_nonzero(scores >= scores[t])))

        scores = score_all_heads(model, r, t)
        if mode == "filtered":
            others = heads_of.get((r, t), set()) - {int(h)}
            if others:
                scores = scores.copy()
                scores[sorted(others)] = -np.inf
        ranks.append(int(np.count_nonzero(scores >= scores[h])))

    return report_from_ranks(ranks, mode=mode, wall_time_s=time.perf_counter() - t0)


# -- checkpoints ---------------------------------------------------------------


def save_checkpoint(model: EmbeddingModel, path: str | Path, store: TripleStore):
    """Write the model to `path`, naming each row by its term in the store.

    The store must be the one whose term ids the model was built with; it
    supplies the N-Triples spelling of every entity and relation so the file
    is independent of how any particular store happened to number its terms.
    """
    terms = {
        "entities": [store.resolve(int(t)).n3() for t in model.entity_ids],
        "relations": [store.resolve(int(t)).n3() for t in model.relation_ids],
    }
    terms_blob = json.dumps(terms, ensure_ascii=False).encode("utf-8")
    header = struct.pack(
        "<4sBIQQ",
        CHECKPOINT_MAGIC,
        _KIND_BYTES[model.kind],
        model.config.dim,
        model.n_entities,
        model.n_relations,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(model.entity_params, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.relation_params, dtype="<f8").tobytes())
        fh.write(struct.pack("<Q", len(terms_blob)))
        fh.write(terms_blob)


def _resolve_terms(encoded: list[str], store: TripleStore, what: str, path) -> np.ndarray:
    ids = np.empty(len(encoded), dtype=np.uint64)
    missing = []
    for i, text in enumerate(encoded):
        try:
            term = parse_term(text)
        except StoreError as exc:
            raise CheckpointError(f"unreadable {what} term in {path}: {text!r} ({exc})") from exc
        tid = store.lookup(term)
        if tid is None:
            missing.append(text)
        else:
            ids[i] = tid
    if missing:
        shown = ", ".join(missing[:3])
        raise CheckpointError(
            f"checkpoint {path} names {len(missing)} {what} term(s) not present "
            f"in the graph (first: {shown})"
        )
    return ids


def load_checkpoint(path: str | Path, store: TripleStore) -> EmbeddingModel:
    """Load a checkpoint, mapping its rows onto the given store's term ids.

    Every term named in the file must exist in the store; a graph that has
    lost (or never contained) a term fails loudly instead of silently pairing
    rows with the wrong entities.
    """
    blob = Path(path).read_bytes()
    head_size = struct.calcsize("<4sBIQQ")
    if len(blob) < head_size:
        raise CheckpointError(f"truncated checkpoint {path}")
    magic, kind_byte, dim, n_e, n_r = struct.unpack_from("<4sBIQQ", blob, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad magic in {path}: {magic!r}")
    kind = _BYTE_KINDS.get(kind_byte)
    if kind is None or dim < 1:
        raise CheckpointError(f"corrupt checkpoint header in {path}")
    width = 2 * dim if kind == COMPLEX else dim
    fixed = head_size + 8 * (n_e * width + n_r * width) + 8
    if len(blob) < fixed:
        raise CheckpointError(f"truncated checkpoint {path}: expected at least {fixed} bytes, found {len(blob)}")

    offset = head_size

    def take(count: int) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).copy()
        offset += count * 8
        return arr

    entity_params = take(n_e * width).reshape(n_e, width)
    relation_params = take(n_r * width).reshape(n_r, width)
    (terms_len,) = struct.unpack_from("<Q", blob, offset)
    offset += 8
    if len(blob) != fixed + terms_len:
        raise CheckpointError(f"truncated checkpoint {path}: expected {fixed + terms_len} bytes, found {len(blob)}")
    try:
        terms = json.loads(blob[offset : offset + terms_len].decode("utf-8"))
        entity_terms = terms["entities"]
        relation_terms = terms["relations"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupt term table in {path}: {exc}") from exc
    if len(entity_terms) != n_e or len(relation_terms) != n_r:
        raise CheckpointError(f"corrupt term table in {path}: row counts disagree with header")

    entity_ids = _resolve_terms(entity_terms, store, "entity", path)
    relation_ids = _resolve_terms(relation_terms, store, "relation", path)
    config = TrainConfig(model=kind, dim=dim)
    return EmbeddingModel(config, entity_params, relation_params, entity_ids, relation_ids)
