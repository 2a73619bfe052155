"""Self-organizing map over embedding vectors on a rectangular toroidal lattice.

Training runs in two phases: an ordering phase (default 10,000 single-vector
updates) during which the neighborhood radius shrinks linearly from half the
larger grid side to 1, and a fine adjustment phase (default 5,000 updates) at
radius 1. The learning rate is 0.5 * (1 - n/N) with n the global update index
and N the total update count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.cluster import KMeans

from .errors import ConfigurationError, GridIndexError, ShapeError, TrainingError

Cell = tuple[int, int]


@dataclass
class SomGrid:
    """Codevector lattice; codevectors are row-major (height * width, dim)."""

    width: int
    height: int
    dim: int
    codevectors: np.ndarray
    toroidal: bool = True

    def __post_init__(self):
        self.codevectors = np.asarray(self.codevectors, dtype=np.float64)
        if self.codevectors.shape != (self.height * self.width, self.dim):
            raise ShapeError(
                f"expected {(self.height * self.width, self.dim)} codevectors, "
                f"got {self.codevectors.shape}"
            )

    def cell_index(self, cell: Cell) -> int:
        row, col = cell
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise GridIndexError(f"cell {cell} outside {self.height}x{self.width} grid")
        return row * self.width + col

    def codevector(self, cell: Cell) -> np.ndarray:
        return self.codevectors[self.cell_index(cell)]


@dataclass
class SomTrainConfig:
    ordering_updates: int = 10_000
    fine_updates: int = 5_000
    ordering_radius: tuple[float | None, float] = (None, 1.0)  # None: max(w, h)/2
    fine_radius: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.ordering_updates <= 0 or self.fine_updates < 0:
            raise ConfigurationError("update counts must be positive")
        start, end = self.ordering_radius
        if (start is not None and start <= 0) or end <= 0 or self.fine_radius <= 0:
            raise ConfigurationError("radii must be positive")


@dataclass
class CellAssignment:
    """Entity -> BMU cell map together with its reverse image."""

    cells: dict[str, Cell]
    members: dict[Cell, set[str]]

    @classmethod
    def from_cells(cls, cells: Mapping[str, Cell]) -> "CellAssignment":
        members: dict[Cell, set[str]] = {}
        for name, cell in cells.items():
            members.setdefault(cell, set()).add(name)
        return cls(dict(cells), members)


def learning_rate(n: int, total: int) -> float:
    """0.5 * (1 - n/N) for global update index n of N total updates."""
    return 0.5 * (1.0 - n / total)


def grid_distance(grid: SomGrid, a: Cell, b: Cell) -> float:
    """Euclidean cell distance; toroidal grids wrap per axis."""
    grid.cell_index(a)
    grid.cell_index(b)
    dr = abs(a[0] - b[0])
    dc = abs(a[1] - b[1])
    if grid.toroidal:
        dr = min(dr, grid.height - dr)
        dc = min(dc, grid.width - dc)
    return float(np.hypot(dr, dc))


def bmu(grid: SomGrid, vector: np.ndarray) -> Cell:
    """Cell whose codevector is nearest `vector`; ties take the smallest
    row-major index."""
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (grid.dim,):
        raise ShapeError(f"expected vector of dim {grid.dim}, got shape {v.shape}")
    diff = grid.codevectors - v[None, :]
    idx = int(np.argmin(np.einsum("nd,nd->n", diff, diff)))
    return divmod(idx, grid.width)


def sq_distance_matrix(grid: SomGrid, vectors: np.ndarray) -> np.ndarray:
    """Squared distances (n_vectors, n_cells), chunked to bound memory.

    Uses the same differencing arithmetic as `bmu`, so results are
    bit-identical to per-vector scans.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if vecs.shape[1] != grid.dim:
        raise ShapeError(f"expected dim {grid.dim}, got {vecs.shape[1]}")
    out = np.empty((len(vecs), grid.height * grid.width))
    for start in range(0, len(vecs), 32):
        chunk = vecs[start : start + 32]
        diff = grid.codevectors[None, :, :] - chunk[:, None, :]
        out[start : start + 32] = np.einsum("vnd,vnd->vn", diff, diff)
    return out


def bmu_many(grid: SomGrid, vectors: np.ndarray) -> np.ndarray:
    """Row-major BMU index per input row."""
    return np.argmin(sq_distance_matrix(grid, vectors), axis=1)


def _wrapped_sq_table(height: int, width: int, toroidal: bool) -> np.ndarray:
    """Squared cell distance from the origin to every offset, shape (height, width)."""
    rows = np.arange(height)
    cols = np.arange(width)
    if toroidal:
        rows = np.minimum(rows, height - rows)
        cols = np.minimum(cols, width - cols)
    return (rows[:, None] ** 2 + cols[None, :] ** 2).astype(np.float64)


def train_som(
    vectors: np.ndarray,
    width: int,
    height: int,
    config: SomTrainConfig | None = None,
    toroidal: bool = True,
) -> SomGrid:
    """Two-phase sequential SOM training; deterministic given config.seed.

    Codevectors start uniformly distributed inside the data's per-dimension
    bounding box. Each update draws one training vector, finds its BMU, and
    moves every cell toward the vector with weight
    lr(n, N) * exp(-grid_dist(bmu, cell)^2 / (2 sigma^2)).
    """
    config = config or SomTrainConfig()
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2 or len(data) == 0:
        raise TrainingError("training vectors must be a non-empty 2-D array")
    dim = data.shape[1]
    rng = np.random.default_rng(config.seed)

    lo = data.min(axis=0)
    hi = data.max(axis=0)
    code = rng.uniform(lo, hi, size=(height * width, dim)).reshape(height, width, dim)

    sigma_start = config.ordering_radius[0]
    if sigma_start is None:
        sigma_start = max(width, height) / 2.0
    sigma_end = config.ordering_radius[1]

    total = config.ordering_updates + config.fine_updates
    base_sq = _wrapped_sq_table(height, width, toroidal)

    for n in range(total):
        if n < config.ordering_updates:
            frac = n / config.ordering_updates
            sigma = sigma_start + (sigma_end - sigma_start) * frac
        else:
            sigma = config.fine_radius
        lr = learning_rate(n, total)

        v = data[int(rng.integers(len(data)))]
        flat = code.reshape(-1, dim)
        diff = flat - v[None, :]
        win = int(np.argmin(np.einsum("nd,nd->n", diff, diff)))
        wr, wc = divmod(win, width)

        if toroidal:
            neigh_sq = np.roll(np.roll(base_sq, wr, axis=0), wc, axis=1)
        else:
            dr = np.abs(np.arange(height) - wr)
            dc = np.abs(np.arange(width) - wc)
            neigh_sq = dr[:, None] ** 2 + dc[None, :] ** 2
        h = lr * np.exp(-neigh_sq / (2.0 * sigma * sigma))
        code += h[:, :, None] * (v[None, None, :] - code)

    return SomGrid(width, height, dim, code.reshape(-1, dim), toroidal=toroidal)


def quantization_error(grid: SomGrid, vectors: np.ndarray) -> float:
    """Mean distance of each vector to its BMU codevector."""
    vecs = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if vecs.size == 0:
        raise ShapeError("need at least one vector")
    winners = bmu_many(grid, vecs)
    return float(np.linalg.norm(vecs - grid.codevectors[winners], axis=1).mean())


def node_quality(grid: SomGrid, vectors: np.ndarray) -> np.ndarray:
    """Per-cell mean distance of the vectors mapped to it, shape (height, width).

    Cells with no assigned vector hold NaN and are excluded from aggregates.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    winners = bmu_many(grid, vecs)
    dists = np.linalg.norm(vecs - grid.codevectors[winners], axis=1)
    sums = np.zeros(grid.height * grid.width)
    counts = np.zeros(grid.height * grid.width)
    np.add.at(sums, winners, dists)
    np.add.at(counts, winners, 1.0)
    with np.errstate(invalid="ignore"):
        quality = sums / counts
    quality[counts == 0] = np.nan
    return quality.reshape(grid.height, grid.width)


def assign_cells(grid: SomGrid, names: Sequence[str], vectors: np.ndarray) -> CellAssignment:
    """Map each named vector onto its BMU cell."""
    winners = bmu_many(grid, vectors)
    cells = {
        name: divmod(int(w), grid.width) for name, w in zip(names, winners)
    }
    return CellAssignment.from_cells(cells)


def cluster_codevectors(grid: SomGrid, k: int, seed: int = 0) -> np.ndarray:
    """K-means labels (0..k-1) over the codevectors, row-major (height*width,)."""
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if k > grid.height * grid.width:
        raise ConfigurationError("k cannot exceed the number of cells")
    if k == 1:
        return np.zeros(grid.height * grid.width, dtype=np.int64)
    km = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=100, random_state=seed)
    return km.fit_predict(grid.codevectors).astype(np.int64)
