"""Read-only HTTP API over loaded checkpoints.

All state is loaded once at startup and never mutated, so any number of
requests can run concurrently; what-if edits live entirely in the request.
Responses are exact mirrors of the corresponding library calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import checkpoint
from .cnn import CnnModel
from .embedding import EmbeddingModel, analogy_query, score_path_all
from .errors import SomekgError, UnknownEntityError, UnknownRelationError
from .fingerprint import (
    BandThresholds,
    Fingerprint,
    auto_thresholds,
    entity_fingerprint,
    entity_fingerprint_matrix,
    rank_by_similarity,
    set_fingerprint,
)
from .kg import KnowledgeGraph
from .pipeline import average_pool_to
from .som import SomGrid, cluster_codevectors, node_quality

TOP_K_CAP = 100


@dataclass
class SessionState:
    """Everything the endpoints read; immutable after startup."""

    graph: KnowledgeGraph
    model: EmbeddingModel
    grid: SomGrid
    gene_grid: Optional[SomGrid]
    cnn: Optional[CnnModel]
    thresholds: BandThresholds
    labels: np.ndarray
    quality: np.ndarray
    band_matrix: np.ndarray = field(repr=False)
    downsample: Optional[tuple[int, int]] = None

    @classmethod
    def load(
        cls,
        graph_path: str,
        embed_path: str,
        som_path: str,
        gene_som_path: str | None = None,
        cnn_path: str | None = None,
        clusters: int = 5,
        band2: float = 0.1,
        band1: float = 0.2,
        auto: bool = False,
        percentile: float = 10.0,
        seed: int = 0,
        down_height: int | None = None,
        down_width: int | None = None,
    ) -> "SessionState":
        graph = checkpoint.load(graph_path, expected_kind="graph")
        model = checkpoint.load(embed_path, expected_kind="embedding")
        grid, stored_labels = checkpoint.load(som_path, expected_kind="som")
        gene_grid = None
        if gene_som_path:
            gene_grid, _ = checkpoint.load(gene_som_path, expected_kind="som")
        cnn = checkpoint.load(cnn_path, expected_kind="cnn") if cnn_path else None
        if auto:
            thresholds = auto_thresholds(grid, model.entity_vecs, percentile=percentile)
        else:
            thresholds = BandThresholds(band2_max=band2, band1_max=band1)
        labels = (
            stored_labels
            if stored_labels is not None
            else cluster_codevectors(grid, clusters, seed=seed)
        )
        quality = node_quality(grid, model.entity_vecs)
        band_matrix = entity_fingerprint_matrix(grid, model.entity_vecs, thresholds)
        downsample = (down_height, down_width) if down_height and down_width else None
        if cnn is not None:
            # the classifier knows its own input size; pool to it exactly
            target = (cnn.input_shape[1], cnn.input_shape[2])
            downsample = None if target == (grid.height, grid.width) else target
        return cls(
            graph=graph, model=model, grid=grid, gene_grid=gene_grid, cnn=cnn,
            thresholds=thresholds, labels=np.asarray(labels), quality=quality,
            band_matrix=band_matrix, downsample=downsample,
        )


class SetBody(BaseModel):
    entities: list[str]


class PathBody(BaseModel):
    source: str
    relations: list[str]
    k: int = 10


class AnalogyBody(BaseModel):
    plus: list[str]
    minus: list[str] = []
    k: int = 10


class EditBody(BaseModel):
    row: int
    col: int
    band: int


class WhatIfBody(BaseModel):
    fingerprint: list[list[int]]
    edits: list[EditBody] = []
    k: int = 10


class PredictBody(BaseModel):
    compound: str
    gene: str


def _fp_payload(fp: Fingerprint) -> dict:
    return {
        "width": fp.width,
        "height": fp.height,
        "subject": fp.subject,
        "cells": fp.cells.astype(int).tolist(),
    }


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(
    state: SessionState,
    cors_origin: str | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="somekg explorer", version="0.1.0")

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed request body: {exc.errors()[:1]}")

    @app.exception_handler(SomekgError)
    async def domain_error(request: Request, exc: SomekgError):
        if isinstance(exc, (UnknownEntityError, UnknownRelationError)):
            return _error(404, str(exc))
        return _error(400, str(exc))

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "entities": len(state.model.entities),
            "relations": len(state.model.relations),
            "grid": [state.grid.height, state.grid.width],
            "predict_available": state.cnn is not None and state.gene_grid is not None,
        }

    @app.get("/entities")
    def entities(prefix: str = "", limit: int = 50):
        limit = max(1, min(limit, 1000))
        names = [n for n in state.model.entities.names() if n.startswith(prefix)]
        return {"entities": names[:limit], "total": len(names)}

    @app.get("/relations")
    def relations():
        return {"relations": state.model.relations.names()}

    @app.get("/fingerprint/{entity}")
    def fingerprint_of(entity: str):
        fp = entity_fingerprint(
            state.grid, state.model.entity_vec(entity), state.thresholds, subject=entity
        )
        return {
            "fingerprint": _fp_payload(fp),
            "thresholds": {
                "band2_max": state.thresholds.band2_max,
                "band1_max": state.thresholds.band1_max,
            },
        }

    @app.post("/fingerprint/set")
    def fingerprint_of_set(body: SetBody):
        vecs = (
            np.stack([state.model.entity_vec(e) for e in body.entities])
            if body.entities
            else np.empty((0, state.model.dim))
        )
        fp = set_fingerprint(
            state.grid, vecs, state.thresholds, subject=",".join(body.entities)
        )
        return {"fingerprint": _fp_payload(fp), "members": len(body.entities)}

    @app.post("/query/path")
    def query_path(body: PathBody):
        k = max(1, min(body.k, TOP_K_CAP))
        scores = score_path_all(state.model, body.source, body.relations)
        order = np.argsort(-scores, kind="stable")[:k]
        return {
            "source": body.source,
            "relations": body.relations,
            "results": [
                {"entity": state.model.entities.name(int(i)), "score": float(scores[i])}
                for i in order
            ],
        }

    @app.post("/query/analogy")
    def query_analogy(body: AnalogyBody):
        k = max(1, min(body.k, TOP_K_CAP))
        ranked = analogy_query(state.model, body.plus, body.minus, k)
        return {
            "results": [{"entity": name, "distance": dist} for name, dist in ranked]
        }

    @app.post("/whatif")
    def whatif(body: WhatIfBody):
        k = max(1, min(body.k, TOP_K_CAP))
        cells = np.asarray(body.fingerprint, dtype=np.int64)
        if cells.shape != (state.grid.height, state.grid.width):
            return _error(
                400,
                f"fingerprint shape {cells.shape} does not match grid "
                f"{state.grid.height}x{state.grid.width}",
            )
        if cells.min(initial=0) < 0 or cells.max(initial=0) > 2:
            return _error(400, "fingerprint bands must be 0, 1, or 2")
        fp = Fingerprint(state.grid.width, state.grid.height, cells.astype(np.uint8))
        for edit in body.edits:
            if edit.band not in (0, 1, 2):
                return _error(400, f"band must be 0, 1, or 2, got {edit.band}")
            if not (0 <= edit.row < fp.height and 0 <= edit.col < fp.width):
                return _error(400, f"cell ({edit.row}, {edit.col}) outside grid")
            fp.cells[edit.row, edit.col] = edit.band
        ranked = rank_by_similarity(
            fp, state.model.entities.names(), state.band_matrix, k
        )
        return {
            "fingerprint": _fp_payload(fp),
            "results": [{"entity": name, "similarity": sim} for name, sim in ranked],
        }

    @app.get("/som/meta")
    def som_meta():
        quality = state.quality
        return {
            "width": state.grid.width,
            "height": state.grid.height,
            "toroidal": state.grid.toroidal,
            "clusters": state.labels.reshape(state.grid.height, state.grid.width).tolist(),
            "node_quality": [
                [None if np.isnan(v) else float(v) for v in row] for row in quality
            ],
        }

    @app.post("/predict")
    def predict_pair(body: PredictBody):
        if state.cnn is None or state.gene_grid is None:
            return _error(409, "no classifier loaded; start the service with --cnn and --gene-som")
        from .cnn import predict as cnn_predict

        cmap = entity_fingerprint(
            state.grid, state.model.entity_vec(body.compound), state.thresholds
        ).cells.astype(np.float64)
        gmap = entity_fingerprint(
            state.gene_grid, state.model.entity_vec(body.gene), state.thresholds
        ).cells.astype(np.float64)
        if state.downsample:
            cmap = average_pool_to(cmap, state.downsample)
            gmap = average_pool_to(gmap, state.downsample)
        tensor = np.stack([cmap, gmap])[None]
        probs = cnn_predict(state.cnn, tensor)[0]
        return {
            "compound": body.compound,
            "gene": body.gene,
            "probabilities": probs.tolist(),
            "interacting": float(probs[1]) if len(probs) > 1 else None,
        }

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
