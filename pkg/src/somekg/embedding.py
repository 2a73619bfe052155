"""Translation embeddings with compositional max-margin training.

A triple (h, r, t) is scored by -||x_h + w_r - x_t||^2 and a multi-step query
by translating the source through the summed relation vectors. Training runs
mini-batch AdaGrad on the hinge objective

    J = sum_q sum_{t' in N(q)} [margin - (score(q, t) - score(q, t'))]_+

with filtered uniform negatives, per-example gradient clipping against a
running median, and entity vectors projected back onto the unit ball after
every batch. Relation vectors are unconstrained.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    SamplingError,
    TrainingError,
    UnknownEntityError,
    UnknownRelationError,
)
from .kg import KnowledgeGraph, PathQuery, Vocab, answer_set

ADAGRAD_EPS = 1e-8
CLIP_WINDOW = 1000

MODE_SINGLE = "single-edge"
MODE_COMPOSITIONAL = "compositional"
_MODE_ALIASES = {
    "single": MODE_SINGLE,
    "single-edge": MODE_SINGLE,
    "comp": MODE_COMPOSITIONAL,
    "compositional": MODE_COMPOSITIONAL,
}


def canonical_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ConfigurationError(f"unknown training mode {mode!r}") from None


@dataclass
class TrainConfig:
    dim: int = 50
    margin: float = 1.0
    batch_size: int = 100
    step_size: float = 0.05
    negatives_per_example: int = 10
    init_variance: float = 0.25
    clip_factor: float = 3.0
    epochs: int = 50
    seed: int = 0
    mode: str = MODE_COMPOSITIONAL

    def __post_init__(self):
        self.mode = canonical_mode(self.mode)
        for name in ("dim", "margin", "batch_size", "step_size",
                     "negatives_per_example", "init_variance", "clip_factor", "epochs"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0.001 <= self.step_size <= 0.1:
            raise ConfigurationError(
                f"step_size must lie in [0.001, 0.1], got {self.step_size}"
            )


class EmbeddingModel:
    """Entity vectors (unit-ball constrained) and relation translation vectors."""

    def __init__(
        self,
        dim: int,
        entity_names: Sequence[str],
        relation_names: Sequence[str],
        entity_vecs: np.ndarray,
        relation_vecs: np.ndarray,
    ):
        self.dim = dim
        self.entities = Vocab(entity_names)
        self.relations = Vocab(relation_names)
        self.entity_vecs = np.asarray(entity_vecs, dtype=np.float64)
        self.relation_vecs = np.asarray(relation_vecs, dtype=np.float64)
        if self.entity_vecs.shape != (len(self.entities), dim):
            raise ConfigurationError("entity vector shape does not match vocabulary")
        if self.relation_vecs.shape != (len(self.relations), dim):
            raise ConfigurationError("relation vector shape does not match vocabulary")

    def entity_index(self, name: str) -> int:
        idx = self.entities.index(name)
        if idx is None:
            raise UnknownEntityError(f"unknown entity {name!r}")
        return idx

    def relation_index(self, name: str) -> int:
        idx = self.relations.index(name)
        if idx is None:
            raise UnknownRelationError(f"unknown relation {name!r}")
        return idx

    def entity_vec(self, name: str) -> np.ndarray:
        return self.entity_vecs[self.entity_index(name)]

    def copy(self) -> "EmbeddingModel":
        return EmbeddingModel(
            self.dim,
            self.entities.names(),
            self.relations.names(),
            self.entity_vecs.copy(),
            self.relation_vecs.copy(),
        )

    def max_entity_norm(self) -> float:
        return float(np.linalg.norm(self.entity_vecs, axis=1).max())


def project_unit_ball(vectors: np.ndarray) -> None:
    """In-place projection: rows with L2 norm above 1 are rescaled onto the sphere."""
    norms = np.linalg.norm(vectors, axis=1)
    over = norms > 1.0
    if np.any(over):
        vectors[over] /= norms[over, None]


def init_model(graph: KnowledgeGraph, config: TrainConfig) -> EmbeddingModel:
    """Fresh parameters: i.i.d. Gaussian draws of the configured variance,
    entity vectors projected onto the unit ball afterwards."""
    if graph.num_entities == 0 or graph.num_relations == 0:
        raise ConfigurationError("graph vocabularies must be non-empty")
    rng = np.random.default_rng(config.seed)
    std = float(np.sqrt(config.init_variance))
    entity_vecs = rng.normal(0.0, std, size=(graph.num_entities, config.dim))
    relation_vecs = rng.normal(0.0, std, size=(graph.num_relations, config.dim))
    project_unit_ball(entity_vecs)
    return EmbeddingModel(
        config.dim, graph.entities.names(), graph.relations.names(),
        entity_vecs, relation_vecs,
    )


# -- scoring ----------------------------------------------------------------

def score_triple(model: EmbeddingModel, head: str, relation: str, tail: str) -> float:
    """-||x_h + w_r - x_t||^2; always <= 0."""
    diff = (
        model.entity_vecs[model.entity_index(head)]
        + model.relation_vecs[model.relation_index(relation)]
        - model.entity_vecs[model.entity_index(tail)]
    )
    return float(-diff @ diff)


def traverse(model: EmbeddingModel, vector: np.ndarray, relation: str) -> np.ndarray:
    """Translate a point by one relation: v + w_r."""
    return np.asarray(vector, dtype=np.float64) + model.relation_vecs[model.relation_index(relation)]


def membership_score(model: EmbeddingModel, vector: np.ndarray, tail: str) -> float:
    """-||v - x_t||^2: how strongly point v claims entity t."""
    diff = np.asarray(vector, dtype=np.float64) - model.entity_vecs[model.entity_index(tail)]
    return float(-diff @ diff)


def translated_source(model: EmbeddingModel, source: str, relations: Iterable[str]) -> np.ndarray:
    vec = model.entity_vecs[model.entity_index(source)].copy()
    for rel in relations:
        vec += model.relation_vecs[model.relation_index(rel)]
    return vec


def score_path(
    model: EmbeddingModel, source: str, relations: Sequence[str], tail: str
) -> float:
    """-||x_s + sum_i w_ri - x_t||^2; reduces to score_triple for one relation."""
    if not relations:
        raise ConfigurationError("relation sequence must be non-empty")
    return membership_score(model, translated_source(model, source, relations), tail)


def score_path_all(
    model: EmbeddingModel, source: str, relations: Sequence[str]
) -> np.ndarray:
    """Path score against every entity at once (vector of length n_entities)."""
    if not relations:
        raise ConfigurationError("relation sequence must be non-empty")
    z = translated_source(model, source, relations)
    diff = z[None, :] - model.entity_vecs
    return -np.einsum("nd,nd->n", diff, diff)


def hinge_loss(
    model: EmbeddingModel, query: PathQuery, negative: str, margin: float = 1.0
) -> float:
    """[margin - (score(q, t) - score(q, t'))]_+ for the query's gold answer t."""
    pos = score_path(model, query.source, query.relations, query.answer)
    neg = score_path(model, query.source, query.relations, negative)
    return max(0.0, margin - (pos - neg))


def analogy_query(
    model: EmbeddingModel,
    plus: Sequence[str],
    minus: Sequence[str],
    k: int,
) -> list[tuple[str, float]]:
    """Entities nearest to sum(x_plus) - sum(x_minus), excluding the query entities.

    Returns (name, euclidean distance) pairs, ties broken by vocabulary index.
    """
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    exclude = {model.entity_index(e) for e in list(plus) + list(minus)}
    v = np.zeros(model.dim)
    for e in plus:
        v += model.entity_vecs[model.entity_index(e)]
    for e in minus:
        v -= model.entity_vecs[model.entity_index(e)]
    diff = model.entity_vecs - v[None, :]
    dist = np.sqrt(np.einsum("nd,nd->n", diff, diff))
    order = np.argsort(dist, kind="stable")  # stable sort => ties by index
    out: list[tuple[str, float]] = []
    for idx in order:
        if int(idx) in exclude:
            continue
        out.append((model.entities.name(int(idx)), float(dist[idx])))
        if len(out) == k:
            break
    return out


# -- negative sampling --------------------------------------------------------

def negative_candidates(graph: KnowledgeGraph, query: PathQuery) -> np.ndarray:
    """Sorted entity indices outside the train answer set of the query."""
    answers = {graph.entity_index(a) for a in answer_set(graph, query.source, query.relations)}
    return np.array(
        [i for i in range(graph.num_entities) if i not in answers], dtype=np.int64
    )

def sample_negatives(
    graph: KnowledgeGraph, query: PathQuery, k: int, seed: int
) -> list[str]:
    """k entities drawn uniformly (without replacement) from outside the answer set."""
    cands = negative_candidates(graph, query)
    if len(cands) < k:
        raise SamplingError(
            f"only {len(cands)} candidate negatives available, need {k}"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(cands, size=k, replace=False)
    return [graph.entities.name(int(i)) for i in picked]


# -- gradient clipping state ---------------------------------------------------

class GradientClipState:
    """Sliding window of recent gradient norms with an exact running median."""

    def __init__(self, window: int = CLIP_WINDOW):
        self._capacity = window
        self._queue: deque[float] = deque()
        self._sorted: list[float] = []

    def observe(self, norm: float) -> None:
        if len(self._queue) == self._capacity:
            old = self._queue.popleft()
            del self._sorted[bisect.bisect_left(self._sorted, old)]
        self._queue.append(norm)
        bisect.insort(self._sorted, norm)

    @property
    def median(self) -> float:
        n = len(self._sorted)
        if n == 0:
            return 0.0
        mid = n // 2
        if n % 2 == 1:
            return self._sorted[mid]
        return 0.5 * (self._sorted[mid - 1] + self._sorted[mid])

    def scale_for(self, norm: float, clip_factor: float) -> float:
        """Multiplier bringing `norm` down to the median when it exceeds
        clip_factor times the median; 1.0 otherwise."""
        med = self.median
        if med > 0.0 and norm > clip_factor * med:
            return med / norm
        return 1.0

    def __len__(self) -> int:
        return len(self._queue)


# -- training -------------------------------------------------------------------

@dataclass
class _IndexedQuery:
    source: int
    relations: tuple[int, ...]
    answer: int
    candidates: np.ndarray  # negative candidate entity indices


_NO_CANDIDATES = np.empty(0, dtype=np.int64)


def _index_queries(
    graph: KnowledgeGraph, queries: Sequence[PathQuery], k: int | None
) -> list[_IndexedQuery]:
    """Resolve names to indices; with k set, also gather >= k negative candidates."""
    cand_cache: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
    indexed = []
    for q in queries:
        s = graph.entity_index(q.source)
        rels = tuple(graph.relation_index(r) for r in q.relations)
        t = graph.entity_index(q.answer)
        if k is None:
            indexed.append(_IndexedQuery(s, rels, t, _NO_CANDIDATES))
            continue
        key = (s, rels)
        cands = cand_cache.get(key)
        if cands is None:
            cands = negative_candidates(graph, q)
            cand_cache[key] = cands
        if len(cands) < k:
            raise SamplingError(
                f"query {q.source}/{'/'.join(q.relations)} has only "
                f"{len(cands)} candidate negatives, need {k}"
            )
        indexed.append(_IndexedQuery(s, rels, t, cands))
    return indexed


def _rel_sums(model: EmbeddingModel, queries: Sequence[_IndexedQuery], rows: np.ndarray) -> np.ndarray:
    out = np.zeros((len(rows), model.dim))
    for i, pos in enumerate(rows):
        for r in queries[pos].relations:
            out[i] += model.relation_vecs[r]
    return out


def _batch_losses(
    model: EmbeddingModel,
    queries: Sequence[_IndexedQuery],
    rows: np.ndarray,
    negatives: np.ndarray,
    margin: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hinge losses (B, k) plus the residual vectors u (B, d) and u_neg (B, k, d)."""
    src = np.array([queries[p].source for p in rows])
    tgt = np.array([queries[p].answer for p in rows])
    z = model.entity_vecs[src] + _rel_sums(model, queries, rows)
    u = z - model.entity_vecs[tgt]
    u_neg = z[:, None, :] - model.entity_vecs[negatives]
    losses = margin + np.einsum("bd,bd->b", u, u)[:, None] - np.einsum(
        "bkd,bkd->bk", u_neg, u_neg
    )
    return np.maximum(losses, 0.0), u, u_neg


def evaluation_negatives(
    graph: KnowledgeGraph, queries: Sequence[PathQuery], config: TrainConfig
) -> np.ndarray:
    """Fixed negatives used for the reported loss trace: (N, k) entity indices.

    Deterministic in config.seed, independent of the training RNG stream so the
    trace can be recomputed after the fact.
    """
    indexed = _index_queries(graph, queries, config.negatives_per_example)
    rng = np.random.default_rng([config.seed, 0x10557])
    k = config.negatives_per_example
    out = np.empty((len(indexed), k), dtype=np.int64)
    for i, iq in enumerate(indexed):
        out[i] = rng.choice(iq.candidates, size=k, replace=False)
    return out


def _dataset_loss_indexed(
    model: EmbeddingModel,
    indexed: Sequence[_IndexedQuery],
    negatives: np.ndarray,
    margin: float,
) -> float:
    total = 0.0
    for start in range(0, len(indexed), 512):
        rows = np.arange(start, min(start + 512, len(indexed)))
        losses, _, _ = _batch_losses(model, indexed, rows, negatives[rows], margin)
        total += float(losses.sum())
    return total


def dataset_loss(
    model: EmbeddingModel,
    graph: KnowledgeGraph,
    queries: Sequence[PathQuery],
    negatives: np.ndarray,
    margin: float = 1.0,
) -> float:
    """J(theta): total hinge loss of `queries` against the given negatives."""
    return _dataset_loss_indexed(model, _index_queries(graph, queries, None), negatives, margin)


def dataset_loss_and_gradient(
    model: EmbeddingModel,
    graph: KnowledgeGraph,
    queries: Sequence[PathQuery],
    negatives: np.ndarray,
    margin: float = 1.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """J(theta) with its exact (unclipped) gradient wrt all parameters.

    Returns (loss, d/d entity_vecs, d/d relation_vecs). Used for gradient
    verification; the trainer applies the same per-example math plus clipping.
    """
    indexed = _index_queries(graph, queries, None)
    rows = np.arange(len(indexed))
    losses, u, u_neg = _batch_losses(model, indexed, rows, negatives, margin)
    viol = losses > 0.0
    grad_e = np.zeros_like(model.entity_vecs)
    grad_r = np.zeros_like(model.relation_vecs)
    m = viol.sum(axis=1)
    for i, iq in enumerate(indexed):
        if m[i] == 0:
            continue
        g_source = 2.0 * (
            model.entity_vecs[negatives[i][viol[i]]].sum(axis=0)
            - m[i] * model.entity_vecs[iq.answer]
        )
        grad_e[iq.source] += g_source
        for r in iq.relations:
            grad_r[r] += g_source
        grad_e[iq.answer] += -2.0 * m[i] * u[i]
        for j in np.flatnonzero(viol[i]):
            grad_e[negatives[i, j]] += 2.0 * u_neg[i, j]
    return float(losses.sum()), grad_e, grad_r


def train(
    model: EmbeddingModel,
    train_queries: Sequence[PathQuery],
    graph: KnowledgeGraph,
    config: TrainConfig,
) -> tuple[EmbeddingModel, list[float]]:
    """Mini-batch AdaGrad on the hinge objective; mutates and returns `model`.

    Single-edge mode trains on the length-1 queries only. Per example, the
    gradient norm feeds the clip window and the gradient is rescaled to the
    window median whenever it exceeds clip_factor times that median. Entity
    vectors are re-projected onto the unit ball after every batch. The loss
    trace holds J(theta) at each epoch end over fixed evaluation negatives.
    """
    if config.mode == MODE_SINGLE:
        queries = [q for q in train_queries if len(q.relations) == 1]
    else:
        queries = list(train_queries)
    if not queries:
        raise ConfigurationError("no training queries after mode filtering")

    k = config.negatives_per_example
    indexed = _index_queries(graph, queries, k)
    eval_negs = evaluation_negatives(graph, queries, config)

    rng = np.random.default_rng(config.seed)
    clip = GradientClipState(CLIP_WINDOW)
    accum_e = np.zeros_like(model.entity_vecs)
    accum_r = np.zeros_like(model.relation_vecs)
    trace: list[float] = []

    for _epoch in range(config.epochs):
        perm = rng.permutation(len(indexed))
        for start in range(0, len(perm), config.batch_size):
            rows = perm[start : start + config.batch_size]
            negatives = np.empty((len(rows), k), dtype=np.int64)
            for i, pos in enumerate(rows):
                negatives[i] = rng.choice(indexed[pos].candidates, size=k, replace=False)
            _batch_step(model, indexed, rows, negatives, config, clip, accum_e, accum_r)
            project_unit_ball(model.entity_vecs)
        epoch_loss = _dataset_loss_indexed(model, indexed, eval_negs, config.margin)
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"non-finite loss {epoch_loss} at epoch {_epoch}")
        trace.append(epoch_loss)
    return model, trace


def _batch_step(
    model: EmbeddingModel,
    indexed: Sequence[_IndexedQuery],
    rows: np.ndarray,
    negatives: np.ndarray,
    config: TrainConfig,
    clip: GradientClipState,
    accum_e: np.ndarray,
    accum_r: np.ndarray,
) -> None:
    losses, u, u_neg = _batch_losses(model, indexed, rows, negatives, config.margin)
    viol = losses > 0.0
    m = viol.sum(axis=1)
    if not np.any(m):
        return

    grad_e = np.zeros_like(model.entity_vecs)
    grad_r = np.zeros_like(model.relation_vecs)
    for i, pos in enumerate(rows):
        if m[i] == 0:
            continue
        iq = indexed[pos]
        g_source = 2.0 * (
            model.entity_vecs[negatives[i][viol[i]]].sum(axis=0)
            - m[i] * model.entity_vecs[iq.answer]
        )
        # per-example gradient assembled parameter-wise so that collisions
        # (self-loops, source drawn as a negative, repeated relations) sum
        slots: dict[tuple[str, int], np.ndarray] = {}

        def _accumulate(kind: str, idx: int, vec: np.ndarray) -> None:
            key = (kind, idx)
            if key in slots:
                slots[key] = slots[key] + vec
            else:
                slots[key] = vec

        _accumulate("e", iq.source, g_source)
        for r in iq.relations:
            _accumulate("r", r, g_source)
        _accumulate("e", iq.answer, -2.0 * m[i] * u[i])
        for j in np.flatnonzero(viol[i]):
            _accumulate("e", int(negatives[i, j]), 2.0 * u_neg[i, j])

        norm = float(np.sqrt(sum(float(v @ v) for v in slots.values())))
        clip.observe(norm)
        scale = clip.scale_for(norm, config.clip_factor)
        for (kind, idx), vec in slots.items():
            if kind == "e":
                grad_e[idx] += scale * vec
            else:
                grad_r[idx] += scale * vec

    accum_e += grad_e * grad_e
    accum_r += grad_r * grad_r
    model.entity_vecs -= config.step_size * grad_e / (np.sqrt(accum_e) + ADAGRAD_EPS)
    model.relation_vecs -= config.step_size * grad_r / (np.sqrt(accum_r) + ADAGRAD_EPS)
