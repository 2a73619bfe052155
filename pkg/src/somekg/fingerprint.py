"""Quantized 2-D semantic fingerprints over a trained map.

A fingerprint holds one band per cell: band 2 ("red") for codevector distances
below band2_max, band 1 ("green") for distances up to band1_max, band 0 for
everything farther. Set fingerprints take the minimum distance over the member
vectors, i.e. the union of the members' activations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DiagnosticError, ShapeError
from .kg import KnowledgeGraph
from .som import CellAssignment, SomGrid, sq_distance_matrix

PERMUTATION_ROUNDS = 20


@dataclass(frozen=True)
class BandThresholds:
    band2_max: float = 0.1  # "red": distance below this
    band1_max: float = 0.2  # "green": distance in [band2_max, band1_max)

    def __post_init__(self):
        if not 0.0 < self.band2_max < self.band1_max:
            raise ConfigurationError(
                f"need 0 < band2_max < band1_max, got {self.band2_max}, {self.band1_max}"
            )


@dataclass
class Fingerprint:
    width: int
    height: int
    cells: np.ndarray  # (height, width) uint8 bands in {0, 1, 2}
    subject: str = ""

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.uint8)
        if self.cells.shape != (self.height, self.width):
            raise ShapeError(
                f"cells shape {self.cells.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if self.cells.max(initial=0) > 2:
            raise ShapeError("band values must be 0, 1, or 2")

    def copy(self, subject: str | None = None) -> "Fingerprint":
        return Fingerprint(
            self.width, self.height, self.cells.copy(),
            self.subject if subject is None else subject,
        )


@dataclass
class InteractionProfile:
    gene: str
    counts: np.ndarray  # per-cluster distinct interacting compounds


def quantize_bands(distances: np.ndarray, thresholds: BandThresholds) -> np.ndarray:
    """Distance array -> uint8 band array (same shape)."""
    d = np.asarray(distances, dtype=np.float64)
    return np.where(d < thresholds.band2_max, 2, np.where(d < thresholds.band1_max, 1, 0)).astype(np.uint8)


def _cell_distances(grid: SomGrid, vector: np.ndarray) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (grid.dim,):
        raise ShapeError(f"expected vector of dim {grid.dim}, got shape {v.shape}")
    diff = grid.codevectors - v[None, :]
    return np.sqrt(np.einsum("nd,nd->n", diff, diff)).reshape(grid.height, grid.width)


def entity_fingerprint(
    grid: SomGrid, vector: np.ndarray, thresholds: BandThresholds, subject: str = ""
) -> Fingerprint:
    """Quantized distances of one embedding to every codevector."""
    bands = quantize_bands(_cell_distances(grid, vector), thresholds)
    return Fingerprint(grid.width, grid.height, bands, subject)


def set_fingerprint(
    grid: SomGrid,
    vectors: Sequence[np.ndarray] | np.ndarray,
    thresholds: BandThresholds,
    subject: str = "",
) -> Fingerprint:
    """Fingerprint of an entity set: per cell the minimum member distance.

    An empty set yields the all-zero fingerprint.
    """
    vecs = np.asarray(vectors, dtype=np.float64)
    if vecs.size == 0:
        return Fingerprint(
            grid.width, grid.height,
            np.zeros((grid.height, grid.width), dtype=np.uint8), subject,
        )
    dists = np.stack([_cell_distances(grid, v) for v in vecs]).min(axis=0)
    return Fingerprint(grid.width, grid.height, quantize_bands(dists, thresholds), subject)


def fingerprint_similarity(a: Fingerprint, b: Fingerprint) -> float:
    """Band-weighted Jaccard: sum of cellwise min bands over sum of max bands.

    Ranges over [0, 1] and equals 1 exactly when the fingerprints are identical
    (two all-zero fingerprints are identical, hence 1).
    """
    if (a.width, a.height) != (b.width, b.height):
        raise ShapeError("fingerprint dimensions differ")
    mins = np.minimum(a.cells, b.cells).sum(dtype=np.int64)
    maxs = np.maximum(a.cells, b.cells).sum(dtype=np.int64)
    if maxs == 0:
        return 1.0
    return float(mins / maxs)


def interaction_profile(
    graph: KnowledgeGraph,
    gene: str,
    labels: np.ndarray,
    assignment: CellAssignment,
    grid_width: int,
) -> InteractionProfile:
    """Distinct interacting compounds of `gene`, counted per codevector cluster.

    Compounds outside the assignment (not mapped onto the grid) are skipped,
    so the counts may sum to less than the gene's full partner count.
    """
    labels = np.asarray(labels)
    k = int(labels.max()) + 1 if labels.size else 0
    counts = np.zeros(k, dtype=np.int64)
    for compound in graph.neighbors(gene):
        cell = assignment.cells.get(compound)
        if cell is None:
            continue
        counts[labels[cell[0] * grid_width + cell[1]]] += 1
    return InteractionProfile(gene, counts)


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union


def _mean_pairwise_similarity(
    cells: Sequence[Sequence[str]], neighbor_sets: Mapping[str, set[str]]
) -> float:
    total = 0.0
    pairs = 0
    for members in cells:
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                total += _jaccard(neighbor_sets[members[i]], neighbor_sets[members[j]])
                pairs += 1
    if pairs == 0:
        raise DiagnosticError("no cell holds two or more chemicals")
    return total / pairs


def semantic_ratio(
    graph: KnowledgeGraph,
    assignment: CellAssignment,
    seed: int = 0,
    permutations: int = PERMUTATION_ROUNDS,
) -> tuple[float, float, float]:
    """Within-cell gene-set coherence against a size-preserving random baseline.

    Observed: the pair-count-weighted mean Jaccard similarity of the
    gene-neighbor sets of chemicals sharing a cell. Baseline: the same statistic
    after randomly permuting the chemicals across cells (cell sizes preserved),
    averaged over `permutations` seeded rounds. Returns (observed, baseline,
    observed / baseline).
    """
    cells = [sorted(members) for _, members in sorted(assignment.members.items())]
    chems = [name for members in cells for name in members]
    neighbor_sets = {name: graph.neighbors(name) for name in chems}
    observed = _mean_pairwise_similarity(cells, neighbor_sets)

    rng = np.random.default_rng(seed)
    sizes = [len(members) for members in cells]
    baseline_total = 0.0
    for _ in range(permutations):
        shuffled = [chems[i] for i in rng.permutation(len(chems))]
        permuted: list[list[str]] = []
        pos = 0
        for size in sizes:
            permuted.append(shuffled[pos : pos + size])
            pos += size
        baseline_total += _mean_pairwise_similarity(permuted, neighbor_sets)
    baseline = baseline_total / permutations
    ratio = observed / baseline if baseline > 0 else float("inf")
    return observed, baseline, ratio


def entity_fingerprint_matrix(
    grid: SomGrid, vectors: np.ndarray, thresholds: BandThresholds
) -> np.ndarray:
    """Bands for many embeddings at once: (n, height*width) uint8."""
    d = np.sqrt(sq_distance_matrix(grid, vectors))
    return np.where(d < thresholds.band2_max, 2, np.where(d < thresholds.band1_max, 1, 0)).astype(np.uint8)


def rank_by_similarity(
    fp: Fingerprint,
    names: Sequence[str],
    band_matrix: np.ndarray,
    k: int,
) -> list[tuple[str, float]]:
    """Top-k names whose band rows are most similar to `fp`, ties by list order."""
    flat = fp.cells.reshape(-1).astype(np.int64)
    mins = np.minimum(band_matrix, flat[None, :]).sum(axis=1)
    maxs = np.maximum(band_matrix, flat[None, :]).sum(axis=1)
    with np.errstate(invalid="ignore"):
        sims = np.where(maxs == 0, 1.0, mins / np.maximum(maxs, 1))
    order = np.argsort(-sims, kind="stable")
    return [(names[int(i)], float(sims[i])) for i in order[:k]]


def what_if_toggle(
    fp: Fingerprint,
    edits: Sequence[tuple[tuple[int, int], int]],
    grid: SomGrid,
    entity_names: Sequence[str],
    entity_vectors: np.ndarray,
    k: int,
    thresholds: BandThresholds,
) -> tuple[Fingerprint, list[tuple[str, float]]]:
    """Apply (cell, band) edits and rank entities by similarity to the result.

    Edits outside the grid or with bands not in {0, 1, 2} are rejected. Ties in
    similarity fall back to vocabulary order.
    """
    edited = fp.copy()
    for (row, col), band in edits:
        if band not in (0, 1, 2):
            raise ConfigurationError(f"band must be 0, 1, or 2, got {band}")
        if not (0 <= row < fp.height and 0 <= col < fp.width):
            raise ConfigurationError(f"cell ({row}, {col}) outside fingerprint")
        edited.cells[row, col] = band
    matrix = entity_fingerprint_matrix(grid, entity_vectors, thresholds)
    return edited, rank_by_similarity(edited, entity_names, matrix, k)


def auto_thresholds(grid: SomGrid, vectors: np.ndarray, percentile: float = 10.0) -> BandThresholds:
    """Data-driven bands: band1_max at the given percentile of all
    entity-to-codevector distances, band2_max at half of it."""
    d = np.sqrt(sq_distance_matrix(grid, vectors))
    band1 = float(np.percentile(d, percentile))
    if band1 <= 0.0:
        band1 = 1e-6
    return BandThresholds(band2_max=band1 / 2.0, band1_max=band1)


def fingerprint_to_ppm(fp: Fingerprint) -> str:
    """Plain-text pixmap: band 0 white, band 1 green, band 2 red."""
    colors = {0: "255 255 255", 1: "0 200 0", 2: "220 0 0"}
    lines = ["P3", f"{fp.width} {fp.height}", "255"]
    for row in fp.cells:
        lines.append(" ".join(colors[int(b)] for b in row))
    return "\n".join(lines) + "\n"


def quality_to_pgm(quality: np.ndarray) -> str:
    """Plain-text graymap of node quality; undefined (NaN) cells render white.

    Defined values are scaled linearly so the best (smallest) distance is black.
    """
    q = np.asarray(quality, dtype=np.float64)
    height, width = q.shape
    defined = q[~np.isnan(q)]
    out = np.full(q.shape, 255, dtype=np.int64)
    if defined.size:
        lo, hi = float(defined.min()), float(defined.max())
        span = hi - lo if hi > lo else 1.0
        scaled = ((q - lo) / span * 254.0)
        mask = ~np.isnan(q)
        out[mask] = scaled[mask].astype(np.int64)
    lines = ["P2", f"{width} {height}", "255"]
    for row in out:
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
