import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from somekg.errors import ConfigurationError, DiagnosticError, ShapeError
from somekg.fingerprint import (
    BandThresholds,
    Fingerprint,
    auto_thresholds,
    entity_fingerprint,
    entity_fingerprint_matrix,
    fingerprint_similarity,
    fingerprint_to_ppm,
    interaction_profile,
    quality_to_pgm,
    quantize_bands,
    semantic_ratio,
    set_fingerprint,
    what_if_toggle,
)
from somekg.kg import KnowledgeGraph, generate_synthetic_kg, synthetic_partitions
from somekg.som import CellAssignment, SomGrid

TH = BandThresholds()  # 0.1 / 0.2


def line_grid(distances):
    """1-D codevectors at the given offsets, so a zero vector sits at exactly
    those distances."""
    code = np.array([[float(d)] for d in distances])
    return SomGrid(len(distances), 1, 1, code)


# -- quantization ------------------------------------------------------------------

def test_band_thresholds_validation():
    with pytest.raises(ConfigurationError):
        BandThresholds(band2_max=0.3, band1_max=0.2)
    with pytest.raises(ConfigurationError):
        BandThresholds(band2_max=0.0, band1_max=0.2)


@pytest.mark.parametrize(
    "dist,band",
    [(0.05, 2), (0.15, 1), (0.5, 0), (0.0, 2), (0.1, 1), (0.2, 0), (0.19999, 1)],
)
def test_quantize_band_values(dist, band):
    assert quantize_bands(np.array([dist]), TH)[0] == band


def test_quantization_monotone():
    dists = np.linspace(0.0, 0.5, 201)
    bands = quantize_bands(dists, TH).astype(int)
    assert all(b1 >= b2 for b1, b2 in zip(bands, bands[1:]))


def test_entity_fingerprint_bands():
    grid = line_grid([0.05, 0.15, 0.5])
    fp = entity_fingerprint(grid, np.array([0.0]), TH)
    assert fp.cells.tolist() == [[2, 1, 0]]


def test_entity_fingerprint_all_zero_when_far():
    grid = line_grid([0.7, 0.9])
    fp = entity_fingerprint(grid, np.array([0.0]), TH)
    assert fp.cells.sum() == 0


def test_entity_fingerprint_shape_error():
    grid = line_grid([0.1])
    with pytest.raises(ShapeError):
        entity_fingerprint(grid, np.array([0.0, 0.0]), TH)


# -- set fingerprints -----------------------------------------------------------------

def test_set_fingerprint_singleton_equals_entity():
    grid = line_grid([0.05, 0.15, 0.3])
    v = np.array([0.01])
    a = entity_fingerprint(grid, v, TH)
    b = set_fingerprint(grid, [v], TH)
    assert np.array_equal(a.cells, b.cells)


def test_set_fingerprint_empty_is_all_zero():
    grid = line_grid([0.05, 0.15])
    fp = set_fingerprint(grid, [], TH)
    assert fp.cells.sum() == 0


def test_set_fingerprint_is_cellwise_max_of_members():
    grid = line_grid([0.0, 0.25, 0.5])
    v1 = np.array([0.05])   # close to cell 0
    v2 = np.array([0.45])   # close to cell 2
    joint = set_fingerprint(grid, [v1, v2], TH)
    a = entity_fingerprint(grid, v1, TH)
    b = entity_fingerprint(grid, v2, TH)
    assert np.array_equal(joint.cells, np.maximum(a.cells, b.cells))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_union_dominates_parts(seed):
    rng = np.random.default_rng(seed)
    grid = SomGrid(4, 4, 3, rng.normal(size=(16, 3)))
    th = BandThresholds(band2_max=0.8, band1_max=1.6)
    s1 = rng.normal(size=(2, 3))
    s2 = rng.normal(size=(3, 3))
    union = set_fingerprint(grid, np.vstack([s1, s2]), th)
    for part in (s1, s2):
        fp = set_fingerprint(grid, part, th)
        assert np.all(union.cells >= fp.cells)


# -- similarity ------------------------------------------------------------------------

def make_fp(cells):
    arr = np.asarray(cells, dtype=np.uint8)
    return Fingerprint(arr.shape[1], arr.shape[0], arr)


def test_similarity_identical():
    fp = make_fp([[2, 1], [0, 1]])
    assert fingerprint_similarity(fp, fp.copy()) == 1.0


def test_similarity_disjoint():
    a = make_fp([[2, 0], [0, 0]])
    b = make_fp([[0, 0], [0, 1]])
    assert fingerprint_similarity(a, b) == 0.0


def test_similarity_hand_case():
    a = make_fp([[2, 1, 0]])
    b = make_fp([[1, 1, 2]])
    # min bands: 1 + 1 + 0 = 2; max bands: 2 + 1 + 2 = 5
    assert fingerprint_similarity(a, b) == pytest.approx(2 / 5)


def test_similarity_both_empty_is_identical():
    a = make_fp([[0, 0]])
    b = make_fp([[0, 0]])
    assert fingerprint_similarity(a, b) == 1.0


def test_similarity_shape_mismatch():
    with pytest.raises(ShapeError):
        fingerprint_similarity(make_fp([[1]]), make_fp([[1, 0]]))


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(0, 2), min_size=6, max_size=6),
    st.lists(st.integers(0, 2), min_size=6, max_size=6),
)
def test_similarity_symmetric_and_one_iff_identical(cells_a, cells_b):
    a = make_fp(np.array(cells_a).reshape(2, 3))
    b = make_fp(np.array(cells_b).reshape(2, 3))
    assert fingerprint_similarity(a, b) == fingerprint_similarity(b, a)
    sim = fingerprint_similarity(a, b)
    assert 0.0 <= sim <= 1.0
    assert (sim == 1.0) == np.array_equal(a.cells, b.cells)


# -- interaction profiles ------------------------------------------------------------------

def block_assignment(graph):
    """Chemicals of block k pinned to cell (0, k)."""
    chems, _ = synthetic_partitions(graph)
    return CellAssignment.from_cells({c: (0, int(c[4])) for c in chems})


def test_interaction_profile_counts():
    g = generate_synthetic_kg(3, 4, 3, relations=2, noise=0.0, seed=0)
    assignment = block_assignment(g)
    labels = np.arange(3, dtype=np.int64)  # 3x1 grid, one cluster per cell
    profile = interaction_profile(g, "gene1_0", labels, assignment, grid_width=3)
    # block-1 genes interact only with block-1 chemicals
    assert profile.counts[1] == 4
    assert profile.counts[0] == 0 and profile.counts[2] == 0


def test_interaction_profile_five_cluster_shape():
    # the usual reporting layout: one count per codevector cluster, k = 5
    g = generate_synthetic_kg(5, 3, 2, relations=2, noise=0.0, seed=7)
    chems, _ = synthetic_partitions(g)
    assignment = CellAssignment.from_cells({c: (0, int(c[4])) for c in chems})
    labels = np.arange(5, dtype=np.int64)
    profile = interaction_profile(g, "gene2_0", labels, assignment, grid_width=5)
    assert profile.counts.shape == (5,)
    assert profile.counts.sum() <= len(g.neighbors("gene2_0"))


def test_interaction_profile_no_partners():
    g = KnowledgeGraph()
    g.add("chem0_0", "r", "gene0_0")
    g.add("chem0_1", "r", "gene0_1")
    assignment = CellAssignment.from_cells({"chem0_0": (0, 0), "chem0_1": (0, 1)})
    labels = np.array([0, 1])
    profile = interaction_profile(g, "gene0_1", labels, assignment, grid_width=2)
    assert profile.counts.tolist() == [0, 1]


# -- semantic ratio ---------------------------------------------------------------------------

def test_semantic_ratio_identical_gene_sets():
    g = KnowledgeGraph()
    for c in ("c1", "c2", "c3", "c4"):
        for gene in ("g1", "g2"):
            g.add(c, "r", gene)
    assignment = CellAssignment.from_cells(
        {"c1": (0, 0), "c2": (0, 0), "c3": (0, 1), "c4": (0, 1)}
    )
    observed, baseline, ratio = semantic_ratio(g, assignment, seed=0)
    assert observed == 1.0
    assert ratio == pytest.approx(1.0)


def test_semantic_ratio_planted_blocks():
    g = generate_synthetic_kg(4, 6, 5, relations=2, noise=0.0, seed=1)
    assignment = block_assignment(g)
    observed, baseline, ratio = semantic_ratio(g, assignment, seed=2)
    assert observed == pytest.approx(1.0)  # complete in-block bipartite graph
    assert ratio > 2.0
    assert ratio == pytest.approx(4.0, rel=0.35)  # roughly the block count


def test_semantic_ratio_random_assignment_is_null():
    g = generate_synthetic_kg(4, 6, 5, relations=2, noise=0.0, seed=3)
    chems, _ = synthetic_partitions(g)
    rng = np.random.default_rng(4)
    cells = {c: (0, int(rng.integers(6))) for c in chems}
    observed, baseline, ratio = semantic_ratio(g, CellAssignment.from_cells(cells), seed=5)
    assert 0.8 <= ratio <= 1.2


def test_semantic_ratio_requires_multichemical_cell():
    g = KnowledgeGraph()
    g.add("c1", "r", "g1")
    with pytest.raises(DiagnosticError):
        semantic_ratio(g, CellAssignment.from_cells({"c1": (0, 0)}), seed=0)


# -- what-if edits -----------------------------------------------------------------------------

def toy_model_and_grid(seed=0):
    rng = np.random.default_rng(seed)
    names = [f"e{i}" for i in range(12)]
    vecs = rng.normal(size=(12, 3))
    grid = SomGrid(4, 4, 3, rng.normal(size=(16, 3)))
    th = BandThresholds(band2_max=1.0, band1_max=2.0)
    return names, vecs, grid, th


def test_what_if_identity_edit_ranks_subject_first():
    names, vecs, grid, th = toy_model_and_grid()
    fp = entity_fingerprint(grid, vecs[4], th, subject="e4")
    edited, ranked = what_if_toggle(fp, [], grid, names, vecs, k=3, thresholds=th)
    assert np.array_equal(edited.cells, fp.cells)
    assert ranked[0][0] == "e4"
    assert ranked[0][1] == 1.0


def test_what_if_single_edit_matches_brute_force():
    names, vecs, grid, th = toy_model_and_grid(seed=1)
    fp = entity_fingerprint(grid, vecs[0], th)
    edited, ranked = what_if_toggle(fp, [((2, 2), 2)], grid, names, vecs, k=12, thresholds=th)
    assert edited.cells[2, 2] == 2
    sims = []
    for i, name in enumerate(names):
        other = entity_fingerprint(grid, vecs[i], th)
        sims.append((-fingerprint_similarity(edited, other), i, name))
    expected = [name for _, _, name in sorted(sims)]
    assert [name for name, _ in ranked] == expected


def test_what_if_rejects_bad_band():
    names, vecs, grid, th = toy_model_and_grid()
    fp = entity_fingerprint(grid, vecs[0], th)
    with pytest.raises(ConfigurationError):
        what_if_toggle(fp, [((0, 0), 3)], grid, names, vecs, k=1, thresholds=th)
    with pytest.raises(ConfigurationError):
        what_if_toggle(fp, [((9, 0), 1)], grid, names, vecs, k=1, thresholds=th)


def test_what_if_zeroed_fingerprint_falls_back_to_vocab_order():
    names, vecs, grid, th = toy_model_and_grid(seed=2)
    fp = entity_fingerprint(grid, vecs[0], th)
    edits = [((r, c), 0) for r in range(4) for c in range(4)]
    edited, ranked = what_if_toggle(fp, edits, grid, names, vecs, k=4, thresholds=th)
    assert edited.cells.sum() == 0
    matrix = entity_fingerprint_matrix(grid, vecs, th)
    assert matrix.sum() > 0  # entities do activate cells
    nonzero_rows = matrix.sum(axis=1) > 0
    if nonzero_rows.all():
        # similarity 0 with every entity: ranking degrades to vocabulary order
        assert [name for name, _ in ranked] == names[:4]
        assert all(sim == 0.0 for _, sim in ranked)


# -- auto thresholds and rasters -------------------------------------------------------------------

def test_auto_thresholds_percentile():
    rng = np.random.default_rng(6)
    grid = SomGrid(5, 5, 4, rng.normal(size=(25, 4)))
    vecs = rng.normal(size=(30, 4))
    th = auto_thresholds(grid, vecs, percentile=10.0)
    matrix = entity_fingerprint_matrix(grid, vecs, th)
    active = (matrix > 0).mean()
    assert 0.05 <= active <= 0.15  # ~10% of cells activate by construction
    assert th.band2_max == pytest.approx(th.band1_max / 2)


def test_fingerprint_ppm_format():
    fp = make_fp([[0, 1], [2, 0]])
    text = fingerprint_to_ppm(fp)
    lines = text.strip().split("\n")
    assert lines[0] == "P3"
    assert lines[1] == "2 2"
    assert "220 0 0" in text and "0 200 0" in text


def test_quality_pgm_format():
    quality = np.array([[0.0, np.nan], [1.0, 0.5]])
    text = quality_to_pgm(quality)
    lines = text.strip().split("\n")
    assert lines[0] == "P2"
    assert lines[1] == "2 2"
    rows = [list(map(int, line.split())) for line in lines[3:]]
    assert rows[0][1] == 255  # NaN renders white
    assert rows[0][0] == 0  # best quality renders black
