import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from somekg.errors import ConfigurationError, ParseError, SamplingError
from somekg.kg import (
    KnowledgeGraph,
    PathQuery,
    SplitSpec,
    Triple,
    answer_set,
    generate_synthetic_kg,
    ingest_triples,
    sample_path_queries,
    sample_walks,
    split,
    synthetic_partitions,
)


def chain_graph():
    g = KnowledgeGraph()
    g.add("a", "r", "b")
    g.add("b", "s", "c")
    return g


@st.composite
def random_graphs(draw):
    n_entities = draw(st.integers(3, 12))
    n_relations = draw(st.integers(1, 4))
    n_triples = draw(st.integers(2, 30))
    g = KnowledgeGraph()
    for _ in range(n_triples):
        h = draw(st.integers(0, n_entities - 1))
        r = draw(st.integers(0, n_relations - 1))
        t = draw(st.integers(0, n_entities - 1))
        g.add(f"e{h}", f"r{r}", f"e{t}")
    return g


# -- ingestion ----------------------------------------------------------------

def test_ingest_minimal():
    g = ingest_triples(["a\tr\tb"])
    assert g.num_entities == 2
    assert g.num_relations == 1
    assert g.num_triples == 1


def test_ingest_dedup():
    g = ingest_triples(["a\tr\tb", "a\tr\tc", "a\tr\tb"])
    assert g.num_triples == 2


def test_ingest_skips_comments_and_blank_lines():
    g = ingest_triples(["# header", "", "a\tr\tb", "   "])
    assert g.num_triples == 1


def test_ingest_wrong_field_count():
    with pytest.raises(ParseError) as exc:
        ingest_triples(["a\tr\tb", "a\tb"])
    assert exc.value.line == 2


def test_ingest_empty_field():
    with pytest.raises(ParseError):
        ingest_triples(["a\t\tb"])


def test_ingest_extends_existing_graph():
    g = ingest_triples(["a\tr\tb"])
    g = ingest_triples(["b\ts\tc"], g)
    assert g.num_triples == 2
    assert g.entities.index("a") == 0  # first-seen order preserved


def test_index_consistency_after_ingests():
    g = ingest_triples(["a\tr\tb", "b\ts\tc", "a\tr\tc"])
    rebuilt_forward = {}
    rebuilt_incident = {}
    for h, r, t in g.index_triples():
        rebuilt_forward.setdefault((h, r), set()).add(t)
        rebuilt_incident.setdefault(h, set()).add(r)
    assert rebuilt_forward == g._forward
    assert rebuilt_incident == g._incident


# -- split ---------------------------------------------------------------------

def ten_triple_graph():
    g = KnowledgeGraph()
    for i in range(5):
        g.add(f"a{i}", "r", f"b{i}")
        g.add(f"b{i}", "r", f"a{i}")
    return g


def test_split_sizes():
    train, test = split(ten_triple_graph(), SplitSpec(0.2, seed=7))
    assert train.num_triples == 8
    assert len(test) == 2
    test_set = {(t.head, t.relation, t.tail) for t in test}
    for tr in train.triples():
        assert (tr.head, tr.relation, tr.tail) not in test_set


def test_split_deterministic():
    a = split(ten_triple_graph(), SplitSpec(0.2, seed=7))
    b = split(ten_triple_graph(), SplitSpec(0.2, seed=7))
    assert [t for t in a[1]] == [t for t in b[1]]
    assert a[0].index_triples() == b[0].index_triples()


def test_split_bad_fraction():
    with pytest.raises(ConfigurationError):
        SplitSpec(1.5, seed=0)


def test_split_singleton_entity_forced_into_train():
    g = KnowledgeGraph()
    g.add("lonely", "r", "hub")
    for i in range(9):
        g.add("hub", "r", f"x{i}")
        g.add(f"x{i}", "r", "hub")
    # "lonely" appears in exactly one triple: that triple can never be test
    for seed in range(30):
        _, test = split(g, SplitSpec(0.3, seed=seed))
        assert all(t.head != "lonely" for t in test)


@settings(max_examples=40, deadline=None)
@given(random_graphs(), st.integers(0, 2**32 - 1))
def test_split_embeddable_and_disjoint(graph, seed):
    train, test = split(graph, SplitSpec(0.25, seed=seed))
    train_entities = set()
    train_relations = set()
    for tr in train.triples():
        train_entities.update([tr.head, tr.tail])
        train_relations.add(tr.relation)
    for tr in test:
        assert tr.head in train_entities
        assert tr.tail in train_entities
        assert tr.relation in train_relations
    assert train.num_triples + len(test) == graph.num_triples


# -- answer sets -----------------------------------------------------------------

def test_answer_set_chain():
    g = chain_graph()
    assert answer_set(g, "a", ["r"]) == {"b"}
    assert answer_set(g, "a", ["r", "s"]) == {"c"}


def test_answer_set_identity_path():
    g = chain_graph()
    assert answer_set(g, "a", []) == {"a"}


def test_answer_set_unrealizable_path_is_empty():
    g = chain_graph()
    assert answer_set(g, "a", ["s"]) == set()


def _bfs_oracle(graph, source, relations):
    frontier = {source}
    for rel in relations:
        nxt = set()
        for tr in graph.triples():
            if tr.relation == rel and tr.head in frontier:
                nxt.add(tr.tail)
        frontier = nxt
    return frontier


def test_answer_set_matches_bfs_oracle():
    rng = np.random.default_rng(5)
    g = KnowledgeGraph()
    for _ in range(150):
        g.add(f"e{rng.integers(50)}", f"r{rng.integers(2)}", f"e{rng.integers(50)}")
    names = g.entities.names()
    for _ in range(50):
        source = names[rng.integers(len(names))]
        rels = [f"r{rng.integers(2)}" for _ in range(2)]
        assert answer_set(g, source, rels) == _bfs_oracle(g, source, rels)


# -- path-query sampling -----------------------------------------------------------

def test_sample_path_queries_single_possible_walk():
    g = chain_graph()
    queries = sample_path_queries(g, count=1, l_max=2, seed=3)
    sampled = [q for q in queries if len(q.relations) == 2]
    assert sampled == [PathQuery("a", ("r", "s"), "c")]


def test_sample_path_queries_appends_all_edges():
    g = chain_graph()
    queries = sample_path_queries(g, count=1, l_max=2, seed=3)
    singles = {(q.source, q.relations[0], q.answer) for q in queries if len(q.relations) == 1}
    assert singles == {("a", "r", "b"), ("b", "s", "c")}


def test_sample_path_queries_deterministic():
    g = generate_synthetic_kg(2, 5, 5, relations=4, noise=0.0, seed=1)
    a = sample_path_queries(g, 50, 3, seed=9)
    b = sample_path_queries(g, 50, 3, seed=9)
    assert a == b


def test_sampled_walks_never_length_one():
    g = generate_synthetic_kg(2, 5, 5, relations=4, noise=0.0, seed=1)
    queries = sample_path_queries(g, 200, 3, seed=9)
    sampled = queries[:200]
    assert all(2 <= len(q.relations) <= 3 for q in sampled)


def test_sampler_answers_are_reachable():
    g = generate_synthetic_kg(3, 4, 4, relations=4, noise=0.1, seed=2)
    for q in sample_path_queries(g, 100, 3, seed=4):
        assert q.answer in answer_set(g, q.source, q.relations)


def test_sampler_dead_end_graph_errors():
    g = KnowledgeGraph()
    g.add("a", "r", "b")  # b has no outgoing edge, so length-2 walks are impossible
    with pytest.raises(SamplingError):
        sample_path_queries(g, 1, 2, seed=0)


def test_relation_choice_uniform_on_star():
    g = KnowledgeGraph()
    for i in range(3):
        g.add("hub", f"r{i}", f"leaf{i}")
    walks = sample_walks(g, 10_000, lengths=(1,), seed=11)
    counts = {f"r{i}": 0 for i in range(3)}
    for q in walks:
        counts[q.relations[0]] += 1
    expected = 10_000 / 3
    sigma = np.sqrt(10_000 * (1 / 3) * (2 / 3))
    for rel, count in counts.items():
        assert abs(count - expected) < 3 * sigma, (rel, count)


# -- synthetic generator --------------------------------------------------------------

def _cross_block_fraction(graph):
    cross = 0
    for tr in graph.triples():
        blocks = {name[4] for name in (tr.head, tr.tail)}
        if len(blocks) > 1:
            cross += 1
    return cross / graph.num_triples


def test_synthetic_noiseless_has_no_cross_block_edges():
    g = generate_synthetic_kg(2, 6, 6, relations=3, noise=0.0, seed=0)
    assert _cross_block_fraction(g) == 0.0


def test_synthetic_single_block_is_plain_bipartite():
    g = generate_synthetic_kg(1, 8, 8, relations=2, noise=0.0, seed=0)
    chems, genes = synthetic_partitions(g)
    assert len(chems) == 8 and len(genes) == 8
    for tr in g.triples():
        assert {tr.head[:4], tr.tail[:4]} == {"chem", "gene"}


def test_synthetic_noise_fraction():
    g = generate_synthetic_kg(4, 20, 20, relations=4, noise=0.1, seed=3)
    n = g.num_triples
    frac = _cross_block_fraction(g)
    # binomial CI: 4 sigma around p = 0.1 over ~1600 edges
    sigma = np.sqrt(0.1 * 0.9 / n)
    assert abs(frac - 0.1) < 4 * sigma


def test_synthetic_deterministic():
    a = generate_synthetic_kg(3, 5, 4, relations=4, noise=0.2, seed=12)
    b = generate_synthetic_kg(3, 5, 4, relations=4, noise=0.2, seed=12)
    assert a.index_triples() == b.index_triples()
    assert a.entities.names() == b.entities.names()


def test_synthetic_supports_multi_step_walks():
    g = generate_synthetic_kg(2, 6, 6, relations=4, noise=0.0, seed=5)
    queries = sample_walks(g, 20, lengths=(2, 3), seed=6)
    assert len(queries) == 20


def test_synthetic_rejects_bad_noise():
    with pytest.raises(ConfigurationError):
        generate_synthetic_kg(2, 3, 3, relations=2, noise=1.0, seed=0)
