"""Structured-text (JSON) persistence for graphs, models, grids, and datasets.

Documents are human-inspectable and numerically exact: floats are serialized
with shortest round-trip precision, so load(save(x)) reproduces x bit for bit.
Writes go through a temporary file and an atomic rename.
"""

from __future__ import annotations

import json
import os
from typing import Any, Sequence

import numpy as np

from .cnn import CnnModel, LayerSpec
from .embedding import EmbeddingModel
from .errors import CheckpointError
from .fingerprint import Fingerprint
from .kg import KnowledgeGraph, PathQuery
from .pipeline import SomePair
from .som import SomGrid

FORMAT = "somekg"
VERSION = 1


def _envelope(kind: str, payload: dict, metadata: dict | None) -> dict:
    doc = {"format": FORMAT, "version": VERSION, "kind": kind}
    if metadata:
        doc["metadata"] = metadata
    doc.update(payload)
    return doc


def _write(path: str, doc: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def _read(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise CheckpointError(
            f"{path} has version {doc.get('version')}, expected {VERSION}"
        )
    return doc


def _require(doc: dict, *keys: str) -> None:
    for key in keys:
        if key not in doc:
            raise CheckpointError(f"checkpoint missing field {key!r}")


def _finite_array(values: Any, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise CheckpointError(f"{name} contains non-finite values")
    return arr


# -- graph ---------------------------------------------------------------------

def graph_to_doc(graph: KnowledgeGraph, metadata: dict | None = None) -> dict:
    return _envelope(
        "graph",
        {
            "entities": graph.entities.names(),
            "relations": graph.relations.names(),
            "triples": [list(t) for t in graph.index_triples()],
        },
        metadata,
    )


def graph_from_doc(doc: dict) -> KnowledgeGraph:
    _require(doc, "entities", "relations", "triples")
    entities = doc["entities"]
    relations = doc["relations"]
    graph = KnowledgeGraph()
    for name in entities:
        graph.entities.add(name)
    for name in relations:
        graph.relations.add(name)
    for item in doc["triples"]:
        h, r, t = item
        if not (0 <= h < len(entities) and 0 <= r < len(relations) and 0 <= t < len(entities)):
            raise CheckpointError(f"triple {item} references unknown vocabulary index")
        graph.add(entities[h], relations[r], entities[t])
    return graph


# -- embedding model -------------------------------------------------------------

def embedding_to_doc(model: EmbeddingModel, metadata: dict | None = None) -> dict:
    return _envelope(
        "embedding",
        {
            "dim": model.dim,
            "entities": model.entities.names(),
            "relations": model.relations.names(),
            "entity_vecs": model.entity_vecs.tolist(),
            "relation_vecs": model.relation_vecs.tolist(),
        },
        metadata,
    )


def embedding_from_doc(doc: dict) -> EmbeddingModel:
    _require(doc, "dim", "entities", "relations", "entity_vecs", "relation_vecs")
    entity_vecs = _finite_array(doc["entity_vecs"], "entity_vecs")
    relation_vecs = _finite_array(doc["relation_vecs"], "relation_vecs")
    norms = np.linalg.norm(entity_vecs, axis=1)
    if norms.size and norms.max() > 1.0 + 1e-9:
        raise CheckpointError(f"entity vector norm {norms.max():.6f} violates unit ball")
    try:
        return EmbeddingModel(
            int(doc["dim"]), doc["entities"], doc["relations"], entity_vecs, relation_vecs
        )
    except Exception as exc:
        raise CheckpointError(f"invalid embedding checkpoint: {exc}") from None


# -- SOM grid --------------------------------------------------------------------

def som_to_doc(
    grid: SomGrid, labels: np.ndarray | None = None, metadata: dict | None = None
) -> dict:
    payload = {
        "width": grid.width,
        "height": grid.height,
        "dim": grid.dim,
        "toroidal": grid.toroidal,
        "codevectors": grid.codevectors.tolist(),
    }
    if labels is not None:
        payload["labels"] = np.asarray(labels, dtype=np.int64).tolist()
    return _envelope("som", payload, metadata)


def som_from_doc(doc: dict) -> tuple[SomGrid, np.ndarray | None]:
    _require(doc, "width", "height", "dim", "codevectors")
    code = _finite_array(doc["codevectors"], "codevectors")
    try:
        grid = SomGrid(
            int(doc["width"]), int(doc["height"]), int(doc["dim"]),
            code, bool(doc.get("toroidal", True)),
        )
    except Exception as exc:
        raise CheckpointError(f"invalid som checkpoint: {exc}") from None
    labels = doc.get("labels")
    return grid, (np.asarray(labels, dtype=np.int64) if labels is not None else None)


# -- CNN -------------------------------------------------------------------------

def cnn_to_doc(model: CnnModel, metadata: dict | None = None) -> dict:
    layers = []
    for layer in model.layers:
        spec = layer.spec
        layers.append(
            {
                "kind": spec.kind,
                "filters": spec.filters,
                "kernel": list(spec.kernel) if spec.kernel else None,
                "activation": spec.activation,
                "pool": list(spec.pool) if spec.pool else None,
                "units": spec.units,
                "rate": spec.rate,
                "params": [p.tolist() for p in layer.parameters()],
            }
        )
    return _envelope(
        "cnn", {"input_shape": list(model.input_shape), "layers": layers}, metadata
    )


def cnn_from_doc(doc: dict) -> CnnModel:
    _require(doc, "input_shape", "layers")
    specs = []
    for item in doc["layers"]:
        specs.append(
            LayerSpec(
                kind=item["kind"],
                filters=item.get("filters"),
                kernel=tuple(item["kernel"]) if item.get("kernel") else None,
                activation=item.get("activation"),
                pool=tuple(item["pool"]) if item.get("pool") else None,
                units=item.get("units"),
                rate=item.get("rate"),
            )
        )
    try:
        model = CnnModel(tuple(doc["input_shape"]), specs, seed=0)
    except Exception as exc:
        raise CheckpointError(f"invalid cnn checkpoint: {exc}") from None
    for layer, item in zip(model.layers, doc["layers"]):
        params = layer.parameters()
        stored = item.get("params", [])
        if len(params) != len(stored):
            raise CheckpointError(
                f"layer {item['kind']} expects {len(params)} parameter tensors, "
                f"got {len(stored)}"
            )
        for param, values in zip(params, stored):
            arr = _finite_array(values, f"{item['kind']} parameters")
            if arr.shape != param.shape:
                raise CheckpointError(
                    f"parameter shape {arr.shape} != expected {param.shape}"
                )
            param[...] = arr
    return model


# -- path queries ------------------------------------------------------------------

def queries_to_doc(queries: Sequence[PathQuery], metadata: dict | None = None) -> dict:
    return _envelope(
        "queries",
        {"queries": [[q.source, list(q.relations), q.answer] for q in queries]},
        metadata,
    )


def queries_from_doc(doc: dict) -> list[PathQuery]:
    _require(doc, "queries")
    out = []
    for item in doc["queries"]:
        source, relations, answer = item
        out.append(PathQuery(source, tuple(relations), answer))
    return out


# -- fingerprints ----------------------------------------------------------------

def fingerprint_to_doc(fp: Fingerprint, metadata: dict | None = None) -> dict:
    return _envelope(
        "fingerprint",
        {
            "width": fp.width,
            "height": fp.height,
            "subject": fp.subject,
            "cells": fp.cells.astype(int).tolist(),
        },
        metadata,
    )


def fingerprint_from_doc(doc: dict) -> Fingerprint:
    _require(doc, "width", "height", "cells")
    try:
        return Fingerprint(
            int(doc["width"]), int(doc["height"]),
            np.asarray(doc["cells"], dtype=np.uint8), doc.get("subject", ""),
        )
    except Exception as exc:
        raise CheckpointError(f"invalid fingerprint document: {exc}") from None


# -- SOME dataset --------------------------------------------------------------------

def dataset_to_doc(dataset: Sequence[SomePair], metadata: dict | None = None) -> dict:
    if not dataset:
        raise CheckpointError("refusing to save an empty dataset")
    shape = dataset[0].tensor.shape
    return _envelope(
        "some-dataset",
        {
            "tensor_shape": list(shape),
            "pairs": [
                {
                    "compound": p.compound,
                    "gene": p.gene,
                    "label": p.label,
                    "tensor": p.tensor.tolist(),
                }
                for p in dataset
            ],
        },
        metadata,
    )


def dataset_from_doc(doc: dict) -> list[SomePair]:
    _require(doc, "tensor_shape", "pairs")
    shape = tuple(doc["tensor_shape"])
    out = []
    for item in doc["pairs"]:
        tensor = _finite_array(item["tensor"], "pair tensor")
        if tensor.shape != shape:
            raise CheckpointError(f"pair tensor shape {tensor.shape} != {shape}")
        label = int(item["label"])
        out.append(SomePair(item["compound"], item["gene"], label, tensor))
    return out


def pairs_to_tsv(dataset: Sequence[SomePair]) -> str:
    """Triple-file dialect: compound TAB gene TAB label, one pair per line."""
    return "".join(f"{p.compound}\t{p.gene}\t{p.label}\n" for p in dataset)


# -- dispatch ---------------------------------------------------------------------

_SAVERS = {
    KnowledgeGraph: ("graph", graph_to_doc),
    EmbeddingModel: ("embedding", embedding_to_doc),
    SomGrid: ("som", som_to_doc),
    CnnModel: ("cnn", cnn_to_doc),
}

_LOADERS = {
    "graph": graph_from_doc,
    "embedding": embedding_from_doc,
    "som": som_from_doc,
    "cnn": cnn_from_doc,
    "queries": queries_from_doc,
    "fingerprint": fingerprint_from_doc,
    "some-dataset": dataset_from_doc,
}


def save(path: str, obj: Any, metadata: dict | None = None, **kwargs) -> None:
    """Serialize a graph, embedding model, SOM grid, or CNN to `path`."""
    for cls, (_kind, encoder) in _SAVERS.items():
        if isinstance(obj, cls):
            _write(path, encoder(obj, metadata=metadata, **kwargs))
            return
    raise CheckpointError(f"no checkpoint encoder for {type(obj).__name__}")


def save_doc(path: str, doc: dict) -> None:
    _write(path, doc)


def load(path: str, expected_kind: str | None = None) -> Any:
    """Load any checkpoint; raises CheckpointError on corruption or a kind
    mismatch, never returning a partial object."""
    doc = _read(path)
    kind = doc.get("kind")
    if expected_kind is not None and kind != expected_kind:
        raise CheckpointError(
            f"{path} holds a {kind!r} checkpoint, expected {expected_kind!r}"
        )
    loader = _LOADERS.get(kind)
    if loader is None:
        raise CheckpointError(f"unknown checkpoint kind {kind!r}")
    return loader(doc)
