"""Command-line driver for the workbench.

Every subcommand prints a single machine-readable JSON summary line on success
and exits 0; usage errors exit 2, runtime failures exit 1. A --config file of
key=value lines supplies flag defaults (explicit flags win).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import checkpoint
from .embedding import (
    TrainConfig,
    analogy_query,
    init_model,
    train,
)
from .errors import ConfigurationError, SomekgError
from .evaluation import evaluate_model
from .fingerprint import (
    BandThresholds,
    auto_thresholds,
    entity_fingerprint,
    fingerprint_to_ppm,
    quality_to_pgm,
    semantic_ratio,
    set_fingerprint,
)
from .kg import (
    KnowledgeGraph,
    PathQuery,
    SplitSpec,
    generate_synthetic_kg,
    ingest_file,
    filter_relations,
    sample_path_queries,
    split,
)
from .pipeline import SomeCnnConfig, build_some_dataset, run_some
from .som import (
    SomTrainConfig,
    assign_cells,
    cluster_codevectors,
    node_quality,
    train_som,
)

PROG = "somekg"


def _emit(summary: dict) -> None:
    print(json.dumps(summary))


def _edge_queries(graph: KnowledgeGraph) -> list[PathQuery]:
    return [PathQuery(t.head, (t.relation,), t.tail) for t in graph.triples()]


def _partition_names(graph: KnowledgeGraph | None, model, partition: str, prefix: str | None):
    """Entities whose embeddings feed a SOM / assignment."""
    if prefix:
        return [n for n in model.entities.names() if n.startswith(prefix)]
    if graph is not None and partition in ("heads", "tails") and graph.bipartite:
        return graph.head_entities() if partition == "heads" else graph.tail_entities()
    if graph is not None and partition == "heads":
        # non-bipartite fallback: the conventional synthetic naming
        guess = [n for n in model.entities.names() if n.startswith("chem")]
        if guess:
            return guess
    if graph is not None and partition == "tails":
        guess = [n for n in model.entities.names() if n.startswith("gene")]
        if guess:
            return guess
    return model.entities.names()


def _thresholds_from_args(args, grid=None, vectors=None) -> BandThresholds:
    if getattr(args, "auto_thresholds", False):
        if grid is None or vectors is None:
            raise ConfigurationError("--auto-thresholds needs a grid and embeddings")
        return auto_thresholds(grid, vectors, percentile=args.threshold_percentile)
    return BandThresholds(band2_max=args.band2, band1_max=args.band1)


def _load_partition_vectors(args, model, graph, partition_default):
    names = _partition_names(graph, model, getattr(args, "partition", partition_default),
                             getattr(args, "prefix", None))
    if not names:
        raise ConfigurationError("partition selects no entities")
    vecs = np.stack([model.entity_vec(n) for n in names])
    return names, vecs


# -- handlers -------------------------------------------------------------------

def cmd_ingest(args) -> dict:
    graph = KnowledgeGraph()
    for path in args.inputs:
        graph = ingest_file(path, graph)
    if args.min_relation_facts > 1:
        graph = filter_relations(graph, args.min_relation_facts)
    checkpoint.save(args.out, graph, metadata={"command": "ingest"})
    return {
        "command": "ingest",
        "entities": graph.num_entities,
        "relations": graph.num_relations,
        "triples": graph.num_triples,
        "out": args.out,
    }


def cmd_synth(args) -> dict:
    graph = generate_synthetic_kg(
        args.blocks, args.chems_per_block, args.genes_per_block,
        relations=args.relations, noise=args.noise, seed=args.seed,
    )
    checkpoint.save(args.out, graph, metadata={"command": "synth", "seed": args.seed})
    return {
        "command": "synth",
        "entities": graph.num_entities,
        "relations": graph.num_relations,
        "triples": graph.num_triples,
        "out": args.out,
    }


def cmd_split(args) -> dict:
    graph = checkpoint.load(args.graph, expected_kind="graph")
    train_graph, test = split(graph, SplitSpec(args.fraction, args.seed))
    checkpoint.save(args.train_out, train_graph, metadata={"command": "split", "seed": args.seed})
    with open(args.test_out, "w", encoding="utf-8") as fh:
        for t in test:
            fh.write(f"{t.head}\t{t.relation}\t{t.tail}\n")
    return {
        "command": "split",
        "train_triples": train_graph.num_triples,
        "test_triples": len(test),
        "train_out": args.train_out,
        "test_out": args.test_out,
    }


def cmd_sample_paths(args) -> dict:
    graph = checkpoint.load(args.graph, expected_kind="graph")
    queries = sample_path_queries(graph, args.count, args.l_max, args.seed)
    checkpoint.save_doc(
        args.out,
        checkpoint.queries_to_doc(queries, metadata={"command": "sample-paths", "seed": args.seed}),
    )
    lengths: dict[str, int] = {}
    for q in queries:
        key = str(len(q.relations))
        lengths[key] = lengths.get(key, 0) + 1
    return {"command": "sample-paths", "queries": len(queries), "by_length": lengths, "out": args.out}


def cmd_train_embed(args) -> dict:
    graph = checkpoint.load(args.graph, expected_kind="graph")
    if args.queries:
        queries = checkpoint.load(args.queries, expected_kind="queries")
    else:
        queries = _edge_queries(graph)
    config = TrainConfig(
        dim=args.dim, margin=args.margin, batch_size=args.batch_size,
        step_size=args.step_size, negatives_per_example=args.negatives,
        init_variance=args.init_variance, clip_factor=args.clip_factor,
        epochs=args.epochs, seed=args.seed, mode=args.mode,
    )
    model = init_model(graph, config)
    model, trace = train(model, queries, graph, config)
    checkpoint.save(
        args.out, model,
        metadata={"command": "train-embed", "config": asdict(config)},
    )
    return {
        "command": "train-embed",
        "mode": config.mode,
        "epochs": config.epochs,
        "initial_loss": trace[0],
        "final_loss": trace[-1],
        "out": args.out,
    }


def cmd_eval_embed(args) -> dict:
    train_graph = checkpoint.load(args.graph, expected_kind="graph")
    filter_graph = checkpoint.load(args.graph, expected_kind="graph")
    test_queries: list[PathQuery] = []
    if args.test_triples:
        test_graph = KnowledgeGraph()
        for name in train_graph.entities.names():
            test_graph.entities.add(name)
        for name in train_graph.relations.names():
            test_graph.relations.add(name)
        test_graph = ingest_file(args.test_triples, test_graph)
        for t in test_graph.triples():
            filter_graph.add(t.head, t.relation, t.tail)
            test_queries.append(PathQuery(t.head, (t.relation,), t.tail))
    if args.queries:
        test_queries.extend(checkpoint.load(args.queries, expected_kind="queries"))
    if not test_queries:
        raise ConfigurationError("need --test-triples and/or --queries")

    rows = {}
    for item in args.model:
        name, _, path = item.partition("=")
        if not path:
            raise ConfigurationError("--model expects NAME=PATH")
        model = checkpoint.load(path, expected_kind="embedding")
        report = evaluate_model(model, test_queries, filter_graph, train_graph,
                                seed=args.seed, k=args.k)
        rows[name] = report

    header = f"{'Path query task':<20}{'@10':>8}{'Class':>8}"
    print(header)
    for name, report in rows.items():
        print(f"{name:<20}{report.hits_at_10:>8.1f}{report.classification_accuracy:>8.1f}")
    return {
        "command": "eval-embed",
        "queries": len(test_queries),
        "results": {
            name: {
                "hits_at_10": report.hits_at_10,
                "classification_accuracy": report.classification_accuracy,
            }
            for name, report in rows.items()
        },
    }


def _train_som_common(args, partition_default: str) -> dict:
    model = checkpoint.load(args.embed, expected_kind="embedding")
    graph = checkpoint.load(args.graph, expected_kind="graph") if args.graph else None
    names, vecs = _load_partition_vectors(args, model, graph, partition_default)
    config = SomTrainConfig(
        ordering_updates=args.ordering_updates, fine_updates=args.fine_updates,
        seed=args.seed,
    )
    grid = train_som(vecs, args.width, args.height, config)
    labels = cluster_codevectors(grid, args.clusters, seed=args.seed) if args.clusters else None
    checkpoint.save(
        args.out, grid, labels=labels,
        metadata={
            "command": "train-som",
            "config": asdict(config),
            "entities": len(names),
            "partition": getattr(args, "partition", partition_default),
        },
    )
    if args.quality_pgm:
        quality = node_quality(grid, vecs)
        with open(args.quality_pgm, "w", encoding="utf-8") as fh:
            fh.write(quality_to_pgm(quality))
    from .som import quantization_error

    return {
        "command": "train-som",
        "entities": len(names),
        "width": args.width,
        "height": args.height,
        "quantization_error": quantization_error(grid, vecs),
        "clusters": args.clusters,
        "out": args.out,
    }


def cmd_train_som(args) -> dict:
    return _train_som_common(args, "heads")


def cmd_train_som_genes(args) -> dict:
    return _train_som_common(args, "tails")


def cmd_fingerprint(args) -> dict:
    model = checkpoint.load(args.embed, expected_kind="embedding")
    grid, _labels = checkpoint.load(args.som, expected_kind="som")
    th = _thresholds_from_args(args, grid, model.entity_vecs)
    if args.set:
        names = [n.strip() for n in args.set.split(",") if n.strip()]
        vecs = np.stack([model.entity_vec(n) for n in names]) if names else np.empty((0, model.dim))
        fp = set_fingerprint(grid, vecs, th, subject=args.set)
    elif args.entity:
        fp = entity_fingerprint(grid, model.entity_vec(args.entity), th, subject=args.entity)
    else:
        raise ConfigurationError("need --entity or --set")
    checkpoint.save_doc(
        args.out,
        checkpoint.fingerprint_to_doc(
            fp,
            metadata={
                "command": "fingerprint",
                "band2_max": th.band2_max,
                "band1_max": th.band1_max,
            },
        ),
    )
    if args.ppm:
        with open(args.ppm, "w", encoding="utf-8") as fh:
            fh.write(fingerprint_to_ppm(fp))
    bands, counts = np.unique(fp.cells, return_counts=True)
    return {
        "command": "fingerprint",
        "subject": fp.subject,
        "band_counts": {int(b): int(c) for b, c in zip(bands, counts)},
        "thresholds": {"band2_max": th.band2_max, "band1_max": th.band1_max},
        "out": args.out,
    }


def cmd_semantic_ratio(args) -> dict:
    graph = checkpoint.load(args.graph, expected_kind="graph")
    model = checkpoint.load(args.embed, expected_kind="embedding")
    grid, _ = checkpoint.load(args.som, expected_kind="som")
    names, vecs = _load_partition_vectors(args, model, graph, "heads")
    assignment = assign_cells(grid, names, vecs)
    observed, baseline, ratio = semantic_ratio(
        graph, assignment, seed=args.seed, permutations=args.permutations
    )
    return {
        "command": "semantic-ratio",
        "observed": observed,
        "baseline": baseline,
        "ratio": ratio,
        "chemicals": len(names),
    }


def cmd_build_some(args) -> dict:
    graph = checkpoint.load(args.graph, expected_kind="graph")
    model = checkpoint.load(args.embed, expected_kind="embedding")
    chem_grid, _ = checkpoint.load(args.chem_som, expected_kind="som")
    gene_grid, _ = checkpoint.load(args.gene_som, expected_kind="som")
    compounds = _partition_names(graph, model, "heads", args.chem_prefix)
    genes = _partition_names(graph, model, "tails", args.gene_prefix)
    chem_vecs = np.stack([model.entity_vec(c) for c in compounds])
    th = _thresholds_from_args(args, chem_grid, chem_vecs)
    downsample = (args.down_height, args.down_width) if args.down_height else None
    dataset = build_some_dataset(
        graph, model, chem_grid, gene_grid, th,
        neg_ratio=args.neg_ratio, downsample=downsample, seed=args.seed,
        compounds=compounds, genes=genes,
    )
    checkpoint.save_doc(
        args.out,
        checkpoint.dataset_to_doc(
            dataset,
            metadata={
                "command": "build-some",
                "seed": args.seed,
                "band2_max": th.band2_max,
                "band1_max": th.band1_max,
            },
        ),
    )
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write(checkpoint.pairs_to_tsv(dataset))
    positives = sum(1 for p in dataset if p.label == 1)
    return {
        "command": "build-some",
        "pairs": len(dataset),
        "positives": positives,
        "negatives": len(dataset) - positives,
        "tensor_shape": list(dataset[0].tensor.shape),
        "out": args.out,
    }


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigurationError("--split expects three comma-separated fractions")
    return parts[0], parts[1], parts[2]


def cmd_train_some(args) -> dict:
    dataset = checkpoint.load(args.dataset, expected_kind="some-dataset")
    config = SomeCnnConfig(
        epochs=args.epochs, step_size=args.step_size,
        batch_size=args.batch_size, activation=args.activation,
    )
    model, report = run_some(dataset, config, _parse_fractions(args.split), seed=args.seed)
    checkpoint.save(args.out, model, metadata={"command": "train-some", "seed": args.seed})
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=1)
    return {
        "command": "train-some",
        "train_accuracy": report["train_accuracy"],
        "test_accuracy": report["test_accuracy"],
        "pairs": len(dataset),
        "out": args.out,
    }


def cmd_eval_some(args) -> dict:
    from .cnn import predict

    dataset = checkpoint.load(args.dataset, expected_kind="some-dataset")
    model = checkpoint.load(args.cnn, expected_kind="cnn")
    x = np.stack([p.tensor for p in dataset])
    y = np.array([p.label for p in dataset])
    preds = predict(model, x).argmax(axis=1)
    confusion: dict[str, int] = {}
    for true, pred in zip(y, preds):
        key = f"true{int(true)}_pred{int(pred)}"
        confusion[key] = confusion.get(key, 0) + 1
    return {
        "command": "eval-some",
        "pairs": len(dataset),
        "accuracy": float(np.mean(preds == y)),
        "confusion": confusion,
    }


def cmd_analogy(args) -> dict:
    model = checkpoint.load(args.embed, expected_kind="embedding")
    plus = [n.strip() for n in args.plus.split(",") if n.strip()]
    minus = [n.strip() for n in args.minus.split(",") if n.strip()] if args.minus else []
    ranked = analogy_query(model, plus, minus, args.k)
    return {
        "command": "analogy",
        "plus": plus,
        "minus": minus,
        "results": [{"entity": name, "distance": dist} for name, dist in ranked],
    }


def cmd_serve(args) -> dict:
    import uvicorn

    from .service import SessionState, create_app

    state = SessionState.load(
        graph_path=args.graph,
        embed_path=args.embed,
        som_path=args.som,
        gene_som_path=args.gene_som,
        cnn_path=args.cnn,
        clusters=args.clusters,
        band2=args.band2,
        band1=args.band1,
        auto=args.auto_thresholds,
        percentile=args.threshold_percentile,
        seed=args.seed,
        down_height=args.down_height,
        down_width=args.down_width,
    )
    app = create_app(state, cors_origin=args.cors_origin, ui_dir=args.ui)
    print(json.dumps({"command": "serve", "host": args.host, "port": args.port,
                      "entities": len(state.model.entities)}))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return {"command": "serve", "stopped": True}


# -- parser ------------------------------------------------------------------------

def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="random seed")
    sub.add_argument("--config", type=str, default=None,
                     help="key=value file supplying flag defaults")


def _threshold_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--band2", type=float, default=0.1, help="red band upper distance")
    sub.add_argument("--band1", type=float, default=0.2, help="green band upper distance")
    sub.add_argument("--auto-thresholds", action="store_true",
                     help="calibrate bands from the distance distribution")
    sub.add_argument("--threshold-percentile", type=float, default=10.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG, description="knowledge-graph embedding workbench"
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("ingest", help="load tab-separated triples into a graph snapshot")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--min-relation-facts", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = subs.add_parser("synth", help="generate a planted-block bipartite graph")
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--chems-per-block", type=int, default=25)
    p.add_argument("--genes-per-block", type=int, default=20)
    p.add_argument("--relations", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("split", help="train/test split of a graph snapshot")
    p.add_argument("--graph", required=True)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    _common(p)
    p.set_defaults(func=cmd_split)

    p = subs.add_parser("sample-paths", help="random-walk path queries plus all edges")
    p.add_argument("--graph", required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--l-max", type=int, default=3)
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_sample_paths)

    p = subs.add_parser("train-embed", help="train translation embeddings")
    p.add_argument("--graph", required=True)
    p.add_argument("--queries", default=None)
    p.add_argument("--mode", default="compositional",
                   choices=["single", "single-edge", "comp", "compositional"])
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--init-variance", type=float, default=0.25)
    p.add_argument("--clip-factor", type=float, default=3.0)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_train_embed)

    p = subs.add_parser("eval-embed", help="hits@k and classification report")
    p.add_argument("--graph", required=True, help="train graph snapshot")
    p.add_argument("--test-triples", default=None, help="held-out triples (TSV)")
    p.add_argument("--queries", default=None, help="held-out path queries")
    p.add_argument("--model", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--k", type=int, default=10)
    _common(p)
    p.set_defaults(func=cmd_eval_embed)

    for name, handler in (("train-som", cmd_train_som), ("train-som-genes", cmd_train_som_genes)):
        p = subs.add_parser(name, help=f"{name}: train a toroidal map over embeddings")
        p.add_argument("--embed", required=True)
        p.add_argument("--graph", default=None)
        p.add_argument("--partition", default=None, choices=["heads", "tails", "all"])
        p.add_argument("--prefix", default=None, help="entity name prefix filter")
        p.add_argument("--width", type=int, default=50)
        p.add_argument("--height", type=int, default=50)
        p.add_argument("--ordering-updates", type=int, default=10_000)
        p.add_argument("--fine-updates", type=int, default=5_000)
        p.add_argument("--clusters", type=int, default=5)
        p.add_argument("--quality-pgm", default=None)
        p.add_argument("--out", required=True)
        _common(p)
        p.set_defaults(func=handler)

    p = subs.add_parser("fingerprint", help="quantized fingerprint of an entity or set")
    p.add_argument("--embed", required=True)
    p.add_argument("--som", required=True)
    p.add_argument("--entity", default=None)
    p.add_argument("--set", default=None, help="comma-separated entity names")
    p.add_argument("--ppm", default=None, help="also write a 3-color raster")
    p.add_argument("--out", required=True)
    _threshold_flags(p)
    _common(p)
    p.set_defaults(func=cmd_fingerprint)

    p = subs.add_parser("semantic-ratio", help="within-cell coherence vs permutation baseline")
    p.add_argument("--graph", required=True)
    p.add_argument("--embed", required=True)
    p.add_argument("--som", required=True)
    p.add_argument("--partition", default=None, choices=["heads", "tails", "all"])
    p.add_argument("--prefix", default=None)
    p.add_argument("--permutations", type=int, default=20)
    _common(p)
    p.set_defaults(func=cmd_semantic_ratio)

    p = subs.add_parser("build-some", help="paired-fingerprint dataset construction")
    p.add_argument("--graph", required=True)
    p.add_argument("--embed", required=True)
    p.add_argument("--chem-som", required=True)
    p.add_argument("--gene-som", required=True)
    p.add_argument("--neg-ratio", type=float, default=1.0)
    p.add_argument("--down-height", type=int, default=24)
    p.add_argument("--down-width", type=int, default=24)
    p.add_argument("--chem-prefix", default=None)
    p.add_argument("--gene-prefix", default=None)
    p.add_argument("--tsv", default=None, help="also write compound/gene/label lines")
    p.add_argument("--out", required=True)
    _threshold_flags(p)
    _common(p)
    p.set_defaults(func=cmd_build_some)

    p = subs.add_parser("train-some", help="train the paired-fingerprint classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=20)
    p.add_argument("--activation", default="tanh", choices=["tanh", "relu"])
    p.add_argument("--split", default="0.7,0.1,0.2")
    p.add_argument("--report", default=None)
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_train_some)

    p = subs.add_parser("eval-some", help="evaluate a stored classifier on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--cnn", required=True)
    _common(p)
    p.set_defaults(func=cmd_eval_some)

    p = subs.add_parser("analogy", help="vector-arithmetic nearest entities")
    p.add_argument("--embed", required=True)
    p.add_argument("--plus", required=True, help="comma-separated entity names")
    p.add_argument("--minus", default="", help="comma-separated entity names")
    p.add_argument("--k", type=int, default=10)
    _common(p)
    p.set_defaults(func=cmd_analogy)

    p = subs.add_parser("serve", help="read-only HTTP explorer over checkpoints")
    p.add_argument("--graph", required=True)
    p.add_argument("--embed", required=True)
    p.add_argument("--som", required=True)
    p.add_argument("--gene-som", default=None)
    p.add_argument("--cnn", default=None)
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cors-origin", default=None)
    p.add_argument("--ui", default=None, help="static frontend directory to serve at /ui")
    p.add_argument("--down-height", type=int, default=24)
    p.add_argument("--down-width", type=int, default=24)
    _threshold_flags(p)
    _common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand `--config FILE` into flags inserted before the user's own flags."""
    if "--config" not in argv:
        return argv
    pos = argv.index("--config")
    if pos + 1 >= len(argv):
        return argv
    path = argv[pos + 1]
    injected: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            flag = "--" + key.strip().replace("_", "-")
            injected.extend([flag, value.strip()])
    # user flags come later and therefore win
    return argv[:1] + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-") and "--config" in argv:
        try:
            argv = _apply_config_file(argv)
        except OSError as exc:
            print(json.dumps({"error": f"cannot read config: {exc}"}), file=sys.stderr)
            return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        summary = args.func(args)
    except SomekgError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    _emit(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
