"""Compound-gene interaction prediction from paired fingerprints.

Positives are all compound-gene pairs sharing at least one relation; negatives
are uniformly drawn non-interacting pairs. Each pair becomes a 2-channel input
tensor (channel 0 the compound fingerprint, channel 1 the gene fingerprint),
average-pooled down to the classifier's input size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cnn import CnnModel, accuracy, build_some_cnn, predict, train_cnn
from .embedding import EmbeddingModel
from .errors import ConfigurationError, DatasetError, ShapeError
from .fingerprint import BandThresholds, Fingerprint, entity_fingerprint_matrix
from .kg import KnowledgeGraph
from .som import SomGrid


@dataclass(frozen=True)
class WindowSpec:
    height: int
    width: int
    step_row: int = 1
    step_col: int = 1

    def __post_init__(self):
        if min(self.height, self.width) < 1 or min(self.step_row, self.step_col) < 1:
            raise ConfigurationError("window dims and steps must be positive")


@dataclass
class SomePair:
    compound: str
    gene: str
    label: int
    tensor: np.ndarray  # (2, h, w) float64 band values


@dataclass
class SomeCnnConfig:
    epochs: int = 150
    step_size: float = 0.05
    batch_size: int = 20
    activation: str = "tanh"
    num_classes: int = 2


def extract_windows(fp: Fingerprint, window: WindowSpec) -> list[np.ndarray]:
    """All windows at stride steps, wrapping toroidally at the map edges.

    Yields ceil(H/step_row) * ceil(W/step_col) float arrays of the window size.
    """
    if window.height > fp.height or window.width > fp.width:
        raise ShapeError(
            f"window {window.height}x{window.width} larger than map "
            f"{fp.height}x{fp.width}"
        )
    cells = fp.cells.astype(np.float64)
    rows = np.arange(window.height)
    cols = np.arange(window.width)
    out = []
    for r0 in range(0, fp.height, window.step_row):
        row_idx = (r0 + rows) % fp.height
        for c0 in range(0, fp.width, window.step_col):
            col_idx = (c0 + cols) % fp.width
            out.append(cells[np.ix_(row_idx, col_idx)])
    return out


def average_pool_to(cells: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Adaptive average pooling onto (target_h, target_w) bins.

    Bin edges are floor(i * size / target), so the bins tile the source exactly
    and constant maps are preserved.
    """
    src = np.asarray(cells, dtype=np.float64)
    h, w = src.shape
    th, tw = target
    if th > h or tw > w:
        raise ShapeError(f"cannot pool {h}x{w} up to {th}x{tw}")
    row_edges = [h * i // th for i in range(th + 1)]
    col_edges = [w * j // tw for j in range(tw + 1)]
    out = np.empty((th, tw))
    for i in range(th):
        for j in range(tw):
            out[i, j] = src[
                row_edges[i] : row_edges[i + 1], col_edges[j] : col_edges[j + 1]
            ].mean()
    return out


def interaction_pairs(
    graph: KnowledgeGraph, compounds: Sequence[str], genes: Sequence[str]
) -> list[tuple[str, str]]:
    """All (compound, gene) pairs adjacent through any relation, sorted."""
    compound_set = set(compounds)
    gene_set = set(genes)
    pairs = set()
    for tr in graph.triples():
        if tr.head in compound_set and tr.tail in gene_set:
            pairs.add((tr.head, tr.tail))
        elif tr.tail in compound_set and tr.head in gene_set:
            pairs.add((tr.tail, tr.head))
    return sorted(pairs)


def _partitions(
    graph: KnowledgeGraph,
    compounds: Sequence[str] | None,
    genes: Sequence[str] | None,
) -> tuple[list[str], list[str]]:
    if compounds is not None and genes is not None:
        return list(compounds), list(genes)
    if not graph.bipartite:
        raise DatasetError(
            "graph head/tail partitions overlap; pass compounds and genes explicitly"
        )
    return graph.head_entities(), graph.tail_entities()


def build_some_dataset(
    graph: KnowledgeGraph,
    model: EmbeddingModel,
    chem_grid: SomGrid,
    gene_grid: SomGrid,
    thresholds: BandThresholds,
    neg_ratio: float = 1.0,
    downsample: tuple[int, int] | None = None,
    seed: int = 0,
    compounds: Sequence[str] | None = None,
    genes: Sequence[str] | None = None,
) -> list[SomePair]:
    """Labeled pair tensors for interaction prediction; deterministic given seed.

    Negative pairs never occur as graph edges; their count is
    round(neg_ratio * positives). Channel maps are band values pooled to
    `downsample` when given (the two grids must share dimensions).
    """
    if (chem_grid.height, chem_grid.width) != (gene_grid.height, gene_grid.width):
        raise ShapeError("compound and gene grids must have equal dimensions")
    chems, gene_names = _partitions(graph, compounds, genes)
    positives = interaction_pairs(graph, chems, gene_names)
    if not positives:
        raise DatasetError("graph holds no compound-gene interaction")

    n_neg = int(round(neg_ratio * len(positives)))
    total_pairs = len(chems) * len(gene_names)
    if total_pairs - len(positives) < n_neg:
        raise DatasetError(
            f"only {total_pairs - len(positives)} non-interacting pairs available, "
            f"need {n_neg}"
        )
    rng = np.random.default_rng(seed)
    edge_set = set(positives)
    negatives: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    while len(negatives) < n_neg:
        c = chems[int(rng.integers(len(chems)))]
        g = gene_names[int(rng.integers(len(gene_names)))]
        pair = (c, g)
        if pair in edge_set or pair in seen:
            continue
        seen.add(pair)
        negatives.append(pair)

    chem_bands = entity_fingerprint_matrix(
        chem_grid, np.stack([model.entity_vec(c) for c in chems]), thresholds
    ).reshape(len(chems), chem_grid.height, chem_grid.width)
    gene_bands = entity_fingerprint_matrix(
        gene_grid, np.stack([model.entity_vec(g) for g in gene_names]), thresholds
    ).reshape(len(gene_names), gene_grid.height, gene_grid.width)
    chem_pos = {name: i for i, name in enumerate(chems)}
    gene_pos = {name: i for i, name in enumerate(gene_names)}

    def _tensor(c: str, g: str) -> np.ndarray:
        cmap = chem_bands[chem_pos[c]].astype(np.float64)
        gmap = gene_bands[gene_pos[g]].astype(np.float64)
        if downsample is not None:
            cmap = average_pool_to(cmap, downsample)
            gmap = average_pool_to(gmap, downsample)
        return np.stack([cmap, gmap])

    dataset = [SomePair(c, g, 1, _tensor(c, g)) for c, g in positives]
    dataset += [SomePair(c, g, 0, _tensor(c, g)) for c, g in negatives]
    return dataset


def run_some(
    dataset: Sequence[SomePair],
    cnn_config: SomeCnnConfig | None = None,
    split_fractions: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> tuple[CnnModel, dict]:
    """Split, train the paired-fingerprint classifier, and report accuracies.

    The report carries train/validation/test accuracy, test confusion counts
    per class, and the training loss trace.
    """
    if len(dataset) < 10:
        raise DatasetError(f"need at least 10 pairs, got {len(dataset)}")
    if abs(sum(split_fractions) - 1.0) > 1e-9:
        raise ConfigurationError("split fractions must sum to 1")
    config = cnn_config or SomeCnnConfig()

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    n_train = int(round(split_fractions[0] * len(dataset)))
    n_val = int(round(split_fractions[1] * len(dataset)))
    train_idx = order[:n_train]
    val_idx = order[n_train : n_train + n_val]
    test_idx = order[n_train + n_val :]
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise DatasetError("split produced an empty train or test partition")

    x = np.stack([dataset[i].tensor for i in order])
    y = np.array([dataset[i].label for i in order], dtype=np.int64)
    x_train, y_train = x[: len(train_idx)], y[: len(train_idx)]
    x_val, y_val = (
        x[len(train_idx) : len(train_idx) + len(val_idx)],
        y[len(train_idx) : len(train_idx) + len(val_idx)],
    )
    x_test, y_test = x[len(train_idx) + len(val_idx) :], y[len(train_idx) + len(val_idx) :]
    if len(set(y_train.tolist())) < 2:
        raise DatasetError("training split holds a single class")

    input_shape = x.shape[1:]
    model = build_some_cnn(
        input_shape, num_classes=config.num_classes,
        activation=config.activation, seed=seed,
    )
    model, trace = train_cnn(
        model, x_train, y_train,
        epochs=config.epochs, step_size=config.step_size,
        batch_size=config.batch_size, seed=seed,
    )

    preds = predict(model, x_test).argmax(axis=1)
    confusion: dict[str, int] = {}
    for true, pred in zip(y_test, preds):
        key = f"true{int(true)}_pred{int(pred)}"
        confusion[key] = confusion.get(key, 0) + 1

    report = {
        "train_accuracy": accuracy(model, x_train, y_train),
        "validation_accuracy": accuracy(model, x_val, y_val) if len(x_val) else None,
        "test_accuracy": float(np.mean(preds == y_test)),
        "confusion": confusion,
        "loss_trace": trace,
        "sizes": {"train": len(x_train), "validation": len(x_val), "test": len(x_test)},
    }
    return model, report
