"""Ranking and classification evaluation of embedding models.

Ranking follows the filtered protocol: alternative correct answers (taken from
the train-plus-test answer set) are removed from the candidate pool before the
gold answer is ranked, and exact score ties rank the gold answer worst.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .embedding import EmbeddingModel, score_path, score_path_all, sample_negatives
from .errors import CalibrationError, EvaluationError
from .kg import KnowledgeGraph, PathQuery, answer_set


@dataclass
class EvalReport:
    hits_at_10: float
    classification_accuracy: float
    per_relation: dict[str, tuple[float, float]]  # relation -> (hits@10, accuracy)
    query_count: int

    def table(self) -> str:
        """Aligned two-column summary in the usual @10 / Class layout."""
        lines = [f"{'relation':<24}{'@10':>8}{'Class':>8}"]
        for rel, (hits, acc) in sorted(self.per_relation.items()):
            lines.append(f"{rel:<24}{hits:>8.1f}{acc:>8.1f}")
        lines.append(
            f"{'ALL':<24}{self.hits_at_10:>8.1f}{self.classification_accuracy:>8.1f}"
        )
        return "\n".join(lines)


def rank_answer(
    model: EmbeddingModel,
    query: PathQuery,
    answer: str,
    candidates: Sequence[str],
    exclude: frozenset[str] | set[str] = frozenset(),
) -> int:
    """1-based rank of `answer` among `candidates` under descending path score.

    Entities in `exclude` (other correct answers) are removed first; exact ties
    are resolved pessimistically, ranking the gold answer after its peers.
    """
    if answer not in candidates:
        raise EvaluationError(f"gold answer {answer!r} missing from candidates")
    kept = [c for c in candidates if c == answer or c not in exclude]
    if not kept:
        raise EvaluationError("no candidates left after filtering")
    scores = np.array(
        [score_path(model, query.source, query.relations, c) for c in kept]
    )
    gold = kept.index(answer)
    higher = int(np.sum(scores > scores[gold]))
    tied = int(np.sum(scores == scores[gold])) - 1
    return 1 + higher + tied


def _ranks_all_entities(
    model: EmbeddingModel,
    queries: Sequence[PathQuery],
    filter_graph: KnowledgeGraph,
) -> np.ndarray:
    """Filtered pessimistic rank per query, candidates = the whole vocabulary."""
    answer_cache: dict[tuple[str, tuple[str, ...]], set[str]] = {}
    ranks = np.empty(len(queries), dtype=np.int64)
    for i, q in enumerate(queries):
        key = (q.source, q.relations)
        correct = answer_cache.get(key)
        if correct is None:
            correct = answer_set(filter_graph, q.source, q.relations)
            answer_cache[key] = correct
        scores = score_path_all(model, q.source, q.relations)
        gold_idx = model.entity_index(q.answer)
        gold_score = scores[gold_idx]
        keep = np.ones(len(scores), dtype=bool)
        for other in correct:
            if other != q.answer:
                idx = model.entities.index(other)
                if idx is not None:
                    keep[idx] = False
        higher = int(np.sum((scores > gold_score) & keep))
        tied = int(np.sum((scores == gold_score) & keep)) - 1
        ranks[i] = 1 + higher + tied
    return ranks


def hits_at_k(
    model: EmbeddingModel,
    queries: Sequence[PathQuery],
    filter_graph: KnowledgeGraph,
    k: int = 10,
) -> float:
    """Percentage of queries whose gold answer ranks within the top k.

    `filter_graph` supplies the answer sets used to drop alternative correct
    answers (pass the train-plus-test graph for the filtered protocol).
    """
    if k < 1:
        raise EvaluationError("k must be >= 1")
    if not queries:
        raise EvaluationError("empty query set")
    ranks = _ranks_all_entities(model, queries, filter_graph)
    return float(np.mean(ranks <= k) * 100.0)


def corrupt_answers(
    queries: Sequence[PathQuery], graph: KnowledgeGraph, seed: int
) -> list[PathQuery]:
    """One negative per positive: the answer replaced by a non-answer entity."""
    out = []
    for i, q in enumerate(queries):
        neg = sample_negatives(graph, q, 1, seed=hash((seed, i)) & 0x7FFFFFFF)[0]
        out.append(PathQuery(q.source, q.relations, neg))
    return out


def classify(
    model: EmbeddingModel,
    positives: Sequence[PathQuery],
    negatives: Sequence[PathQuery],
    thresholds: Mapping[str, float],
) -> float:
    """Balanced accuracy of thresholded scores, in percent.

    A query counts as predicted-positive iff its path score is >= the
    threshold of its first relation.
    """
    if not positives or not negatives:
        raise EvaluationError("need at least one positive and one negative")

    def _predict(q: PathQuery) -> bool:
        rel = q.relations[0]
        if rel not in thresholds:
            raise EvaluationError(f"no threshold for relation {rel!r}")
        return score_path(model, q.source, q.relations, q.answer) >= thresholds[rel]

    tpr = float(np.mean([_predict(q) for q in positives]))
    tnr = float(np.mean([not _predict(q) for q in negatives]))
    return 50.0 * (tpr + tnr)


def _best_threshold(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """Threshold maximizing plain accuracy; midpoint of the first optimal interval.

    Accuracy of threshold th counts pos >= th and neg < th as correct. Candidate
    intervals are bounded by the sorted distinct scores, extended by one unit on
    both sides.
    """
    values = np.unique(np.concatenate([pos_scores, neg_scores]))
    edges = np.concatenate([[values[0] - 2.0], values, [values[-1] + 2.0]])
    best_acc = -1.0
    best_mid = 0.0
    total = len(pos_scores) + len(neg_scores)
    for lo, hi in zip(edges[:-1], edges[1:]):
        # any threshold in (lo, hi] behaves like hi
        th = hi
        acc = (np.sum(pos_scores >= th) + np.sum(neg_scores < th)) / total
        if acc > best_acc:
            best_acc = acc
            best_mid = 0.5 * (lo + hi)
    return float(best_mid)


def calibrate_thresholds(
    model: EmbeddingModel,
    dev_positives: Sequence[PathQuery],
    dev_negatives: Sequence[PathQuery],
) -> dict[str, float]:
    """Per-relation score thresholds maximizing dev accuracy."""
    pos_by_rel: dict[str, list[float]] = {}
    neg_by_rel: dict[str, list[float]] = {}
    for q in dev_positives:
        pos_by_rel.setdefault(q.relations[0], []).append(
            score_path(model, q.source, q.relations, q.answer)
        )
    for q in dev_negatives:
        neg_by_rel.setdefault(q.relations[0], []).append(
            score_path(model, q.source, q.relations, q.answer)
        )
    missing = set(pos_by_rel) ^ set(neg_by_rel)
    if missing:
        raise CalibrationError(
            f"relations lacking both dev positives and negatives: {sorted(missing)}"
        )
    return {
        rel: _best_threshold(np.array(pos_by_rel[rel]), np.array(neg_by_rel[rel]))
        for rel in pos_by_rel
    }


def evaluate_model(
    model: EmbeddingModel,
    queries: Sequence[PathQuery],
    filter_graph: KnowledgeGraph,
    train_graph: KnowledgeGraph,
    seed: int = 0,
    k: int = 10,
) -> EvalReport:
    """Full report: filtered hits@k plus thresholded classification accuracy.

    Classification negatives are answer-corrupted copies of the positives; the
    first half of each relation's queries calibrates thresholds, the second
    half is scored. Percentages are rounded to one decimal.
    """
    if not queries:
        raise EvaluationError("empty query set")
    ranks = _ranks_all_entities(model, queries, filter_graph)
    negatives = corrupt_answers(queries, train_graph, seed)

    by_rel: dict[str, list[int]] = {}
    for i, q in enumerate(queries):
        by_rel.setdefault(q.relations[0], []).append(i)

    dev_idx: list[int] = []
    test_idx: list[int] = []
    for rel, idxs in by_rel.items():
        half = max(1, len(idxs) // 2)
        dev_idx.extend(idxs[:half])
        test_idx.extend(idxs[half:] if len(idxs) > 1 else idxs[:half])

    thresholds = calibrate_thresholds(
        model,
        [queries[i] for i in dev_idx],
        [negatives[i] for i in dev_idx],
    )
    accuracy = classify(
        model,
        [queries[i] for i in test_idx],
        [negatives[i] for i in test_idx],
        thresholds,
    )

    per_relation: dict[str, tuple[float, float]] = {}
    for rel, idxs in by_rel.items():
        rel_hits = float(np.mean(ranks[idxs] <= k) * 100.0)
        rel_test = [i for i in test_idx if queries[i].relations[0] == rel]
        rel_acc = classify(
            model,
            [queries[i] for i in rel_test],
            [negatives[i] for i in rel_test],
            thresholds,
        )
        per_relation[rel] = (round(rel_hits, 1), round(rel_acc, 1))

    return EvalReport(
        hits_at_10=round(float(np.mean(ranks <= k) * 100.0), 1),
        classification_accuracy=round(accuracy, 1),
        per_relation=per_relation,
        query_count=len(queries),
    )
