import numpy as np
import pytest

from somekg import checkpoint
from somekg.embedding import TrainConfig, init_model, train
from somekg.kg import generate_synthetic_kg, sample_path_queries, synthetic_partitions
from somekg.pipeline import SomeCnnConfig, build_some_dataset, run_some
from somekg.fingerprint import auto_thresholds
from somekg.som import SomTrainConfig, cluster_codevectors, train_som


@pytest.fixture(scope="session")
def workbench(tmp_path_factory):
    """A small trained stack saved as checkpoints, shared by service tests."""
    root = tmp_path_factory.mktemp("workbench")
    graph = generate_synthetic_kg(2, 6, 5, relations=4, noise=0.0, seed=21)
    chems, genes = synthetic_partitions(graph)

    cfg = TrainConfig(dim=8, epochs=8, batch_size=20, negatives_per_example=4,
                      step_size=0.1, seed=22)
    model = init_model(graph, cfg)
    queries = sample_path_queries(graph, 120, 2, seed=23)
    train(model, queries, graph, cfg)

    chem_vecs = np.stack([model.entity_vec(c) for c in chems])
    gene_vecs = np.stack([model.entity_vec(g) for g in genes])
    som_cfg = SomTrainConfig(ordering_updates=400, fine_updates=200, seed=24)
    chem_grid = train_som(chem_vecs, 8, 8, som_cfg)
    gene_grid = train_som(gene_vecs, 8, 8, som_cfg)
    th = auto_thresholds(chem_grid, model.entity_vecs, percentile=15.0)

    dataset = build_some_dataset(graph, model, chem_grid, gene_grid, th,
                                 neg_ratio=1.0, downsample=None, seed=25,
                                 compounds=chems, genes=genes)
    cnn, _report = run_some(dataset, SomeCnnConfig(epochs=3, step_size=0.05, batch_size=12),
                            seed=26)

    paths = {
        "graph": str(root / "graph.json"),
        "embed": str(root / "embed.json"),
        "som": str(root / "som.json"),
        "gene_som": str(root / "gene_som.json"),
        "cnn": str(root / "cnn.json"),
    }
    checkpoint.save(paths["graph"], graph)
    checkpoint.save(paths["embed"], model)
    labels = cluster_codevectors(chem_grid, 3, seed=27)
    checkpoint.save(paths["som"], chem_grid, labels=labels)
    checkpoint.save(paths["gene_som"], gene_grid)
    checkpoint.save(paths["cnn"], cnn)
    return {
        "paths": paths,
        "graph": graph,
        "model": model,
        "chem_grid": chem_grid,
        "gene_grid": gene_grid,
        "thresholds": th,
        "chems": chems,
        "genes": genes,
    }
