"""Multi-relational graph storage, ingestion, splitting, and walk sampling.

Entities and relations are opaque strings in input files and dense integer
indices internally. A graph is mutable while being built (single writer) and
treated as immutable afterwards, so any number of readers may share it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    ConfigurationError,
    ParseError,
    SamplingError,
    UnknownEntityError,
    UnknownRelationError,
)

MAX_WALK_RESTARTS = 100


class Vocab:
    """Ordered name <-> dense index mapping. Indices are 0..n-1 in first-seen order."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        idx = self._index.get(name)
        if idx is None:
            idx = len(self._names)
            self._names.append(name)
            self._index[name] = idx
        return idx

    def index(self, name: str) -> int | None:
        return self._index.get(name)

    def name(self, idx: int) -> str:
        return self._names[idx]

    def names(self) -> list[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._index


@dataclass(frozen=True)
class Triple:
    """One directed fact. Self-loops (head == tail) are permitted."""

    head: str
    relation: str
    tail: str


@dataclass(frozen=True)
class PathQuery:
    """A source entity plus a non-empty relation sequence and its gold answer."""

    source: str
    relations: tuple[str, ...]
    answer: str

    def __post_init__(self):
        if not self.relations:
            raise ConfigurationError("path query needs at least one relation")


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigurationError(
                f"test_fraction must lie in (0, 1), got {self.test_fraction}"
            )


class KnowledgeGraph:
    """Deduplicated triple set with vocabularies and traversal indices.

    forward index maps (head, relation) to the set of tails; the incident
    index maps an entity to the relations usable from it (outgoing only:
    relations are traversed head -> tail, never reversed implicitly).
    """

    def __init__(self):
        self.entities = Vocab()
        self.relations = Vocab()
        self._triples: list[tuple[int, int, int]] = []
        self._triple_set: set[tuple[int, int, int]] = set()
        self._forward: dict[tuple[int, int], set[int]] = {}
        self._incident: dict[int, set[int]] = {}

    # -- construction ------------------------------------------------------

    def add(self, head: str, relation: str, tail: str) -> bool:
        """Add one triple; returns False if it was already present."""
        h = self.entities.add(head)
        r = self.relations.add(relation)
        t = self.entities.add(tail)
        key = (h, r, t)
        if key in self._triple_set:
            return False
        self._triple_set.add(key)
        self._triples.append(key)
        self._forward.setdefault((h, r), set()).add(t)
        self._incident.setdefault(h, set()).add(r)
        return True

    def add_triple(self, triple: Triple) -> bool:
        return self.add(triple.head, triple.relation, triple.tail)

    # -- basic accessors ----------------------------------------------------

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    @property
    def num_triples(self) -> int:
        return len(self._triples)

    def triples(self) -> Iterator[Triple]:
        for h, r, t in self._triples:
            yield Triple(self.entities.name(h), self.relations.name(r), self.entities.name(t))

    def index_triples(self) -> list[tuple[int, int, int]]:
        return list(self._triples)

    def has_triple(self, head: str, relation: str, tail: str) -> bool:
        h = self.entities.index(head)
        r = self.relations.index(relation)
        t = self.entities.index(tail)
        if h is None or r is None or t is None:
            return False
        return (h, r, t) in self._triple_set

    @property
    def bipartite(self) -> bool:
        """True when the head and tail role partitions are disjoint."""
        heads = {h for h, _, _ in self._triples}
        tails = {t for _, _, t in self._triples}
        return len(self._triples) > 0 and not (heads & tails)

    def head_entities(self) -> list[str]:
        idxs = sorted({h for h, _, _ in self._triples})
        return [self.entities.name(i) for i in idxs]

    def tail_entities(self) -> list[str]:
        idxs = sorted({t for _, _, t in self._triples})
        return [self.entities.name(i) for i in idxs]

    def entity_index(self, name: str) -> int:
        idx = self.entities.index(name)
        if idx is None:
            raise UnknownEntityError(f"unknown entity {name!r}")
        return idx

    def relation_index(self, name: str) -> int:
        idx = self.relations.index(name)
        if idx is None:
            raise UnknownRelationError(f"unknown relation {name!r}")
        return idx

    # -- traversal ----------------------------------------------------------

    def tails_of(self, head_idx: int, rel_idx: int) -> set[int]:
        return self._forward.get((head_idx, rel_idx), set())

    def outgoing_relations(self, entity_idx: int) -> set[int]:
        return self._incident.get(entity_idx, set())

    def neighbors(self, name: str) -> set[str]:
        """Entities adjacent to `name` through any relation, in either direction."""
        idx = self.entity_index(name)
        out = set()
        for h, _, t in self._triples:
            if h == idx:
                out.add(t)
            if t == idx:
                out.add(h)
        out.discard(idx)
        return {self.entities.name(i) for i in out}

    def neighbor_index(self) -> dict[int, set[int]]:
        """Adjacency over entity indices, ignoring direction and relation type."""
        adj: dict[int, set[int]] = {}
        for h, _, t in self._triples:
            adj.setdefault(h, set()).add(t)
            adj.setdefault(t, set()).add(h)
        return adj


def ingest_triples(lines: Iterable[str], graph: KnowledgeGraph | None = None) -> KnowledgeGraph:
    """Parse head<TAB>relation<TAB>tail lines into `graph` (extended in place).

    Lines starting with '#' and blank lines are skipped; trailing whitespace is
    stripped. Raises ParseError (with the 1-based line number) on a wrong field
    count or an empty field.
    """
    if graph is None:
        graph = KnowledgeGraph()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", lineno)
        head, relation, tail = fields
        if not head or not relation or not tail:
            raise ParseError("empty field in triple", lineno)
        graph.add(head, relation, tail)
    return graph


def ingest_file(path: str, graph: KnowledgeGraph | None = None) -> KnowledgeGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest_triples(fh, graph)


def filter_relations(graph: KnowledgeGraph, min_facts: int) -> KnowledgeGraph:
    """Drop all triples of relations with fewer than `min_facts` occurrences."""
    counts: dict[str, int] = {}
    for tr in graph.triples():
        counts[tr.relation] = counts.get(tr.relation, 0) + 1
    kept = KnowledgeGraph()
    for tr in graph.triples():
        if counts[tr.relation] >= min_facts:
            kept.add_triple(tr)
    return kept


def split(graph: KnowledgeGraph, spec: SplitSpec) -> tuple[KnowledgeGraph, list[Triple]]:
    """Deterministic train/test split of triples.

    Every test triple's head, relation, and tail must also occur somewhere in
    the train remainder, so all test symbols stay embeddable; triples that
    would orphan a symbol are forced into train. Test size hits the requested
    fraction within +-1 when enough eligible triples exist.
    """
    n = graph.num_triples
    if n == 0:
        raise ConfigurationError("cannot split an empty graph")
    target = int(round(n * spec.test_fraction))
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)

    triples = graph.index_triples()
    ent_count: dict[int, int] = {}
    rel_count: dict[int, int] = {}
    for h, r, t in triples:
        ent_count[h] = ent_count.get(h, 0) + 1
        rel_count[r] = rel_count.get(r, 0) + 1
        ent_count[t] = ent_count.get(t, 0) + 1

    test_positions: set[int] = set()
    for pos in order:
        if len(test_positions) >= target:
            break
        h, r, t = triples[pos]
        # moving this triple to test must leave every symbol with >= 1 train occurrence;
        # a self-loop consumes two occurrences of the same entity
        needed = 3 if h == t else 2
        if ent_count[h] < needed or ent_count[t] < 2 or rel_count[r] < 2:
            continue
        test_positions.add(int(pos))
        ent_count[h] -= 1
        ent_count[t] -= 1
        rel_count[r] -= 1

    train = KnowledgeGraph()
    # keep the original vocabularies (and hence indices) intact
    for name in graph.entities.names():
        train.entities.add(name)
    for name in graph.relations.names():
        train.relations.add(name)
    test: list[Triple] = []
    for pos, (h, r, t) in enumerate(triples):
        tr = Triple(graph.entities.name(h), graph.relations.name(r), graph.entities.name(t))
        if pos in test_positions:
            test.append(tr)
        else:
            train.add_triple(tr)
    return train, test


def answer_set(graph: KnowledgeGraph, source: str, relations: Iterable[str]) -> set[str]:
    """Exact set of entities reachable from `source` via the relation sequence.

    An empty relation sequence yields {source}.
    """
    frontier = {graph.entity_index(source)}
    for rel in relations:
        r = graph.relation_index(rel)
        nxt: set[int] = set()
        for e in frontier:
            nxt |= graph.tails_of(e, r)
        frontier = nxt
        if not frontier:
            break
    return {graph.entities.name(i) for i in frontier}


def _walk_once(
    graph: KnowledgeGraph, length: int, rng: np.random.Generator
) -> tuple[int, list[int], int] | None:
    """One random walk attempt; None if it dead-ends."""
    current = int(rng.integers(graph.num_entities))
    start = current
    rels: list[int] = []
    for _ in range(length):
        incident = sorted(graph.outgoing_relations(current))
        if not incident:
            return None
        rel = incident[int(rng.integers(len(incident)))]
        reachable = sorted(graph.tails_of(current, rel))
        current = reachable[int(rng.integers(len(reachable)))]
        rels.append(rel)
    return start, rels, current


def sample_walks(
    graph: KnowledgeGraph,
    count: int,
    lengths: tuple[int, ...],
    seed: int,
) -> list[PathQuery]:
    """`count` random-walk queries with lengths drawn uniformly from `lengths`.

    Each walk: uniform start entity, then per step a uniform outgoing relation
    followed by a uniform entity reachable via it. Dead-end walks are restarted
    up to MAX_WALK_RESTARTS times before raising SamplingError.
    """
    if not any(graph.outgoing_relations(e) for e in range(graph.num_entities)):
        raise SamplingError("graph has no entity with an outgoing edge")
    rng = np.random.default_rng(seed)
    queries: list[PathQuery] = []
    for _ in range(count):
        for _attempt in range(MAX_WALK_RESTARTS):
            length = int(lengths[int(rng.integers(len(lengths)))])
            walk = _walk_once(graph, length, rng)
            if walk is not None:
                break
        else:
            raise SamplingError(
                f"no complete walk found after {MAX_WALK_RESTARTS} restarts"
            )
        start, rels, end = walk
        queries.append(
            PathQuery(
                graph.entities.name(start),
                tuple(graph.relations.name(r) for r in rels),
                graph.entities.name(end),
            )
        )
    return queries


def sample_path_queries(
    train: KnowledgeGraph, count: int, l_max: int, seed: int
) -> list[PathQuery]:
    """Training-set generation: `count` sampled walks plus every train edge.

    Path lengths are drawn uniformly from {1..l_max} with length-1 draws
    rejected and redrawn; the full edge set is then appended as length-1
    queries, so single-edge facts are always covered.
    """
    if l_max < 2:
        raise ConfigurationError(f"l_max must be >= 2, got {l_max}")
    if not any(train.outgoing_relations(e) for e in range(train.num_entities)):
        raise SamplingError("graph has no entity with an outgoing edge")
    rng = np.random.default_rng(seed)
    queries: list[PathQuery] = []
    for _ in range(count):
        for _attempt in range(MAX_WALK_RESTARTS):
            length = 1
            while length == 1:
                length = int(rng.integers(1, l_max + 1))
            walk = _walk_once(train, length, rng)
            if walk is not None:
                break
        else:
            raise SamplingError(
                f"no complete walk found after {MAX_WALK_RESTARTS} restarts"
            )
        start, rels, end = walk
        queries.append(
            PathQuery(
                train.entities.name(start),
                tuple(train.relations.name(r) for r in rels),
                train.entities.name(end),
            )
        )
    for tr in train.triples():
        queries.append(PathQuery(tr.head, (tr.relation,), tr.tail))
    return queries


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the planted-block bipartite generator."""

    blocks: int
    chems_per_block: int
    genes_per_block: int
    relations: int
    noise: float
    seed: int

    def __post_init__(self):
        if min(self.blocks, self.chems_per_block, self.genes_per_block, self.relations) < 1:
            raise ConfigurationError("all synthetic counts must be positive")
        if not 0.0 <= self.noise < 1.0:
            raise ConfigurationError(f"noise must lie in [0, 1), got {self.noise}")


def generate_synthetic_kg(
    blocks: int,
    chems_per_block: int,
    genes_per_block: int,
    relations: int = 4,
    noise: float = 0.0,
    seed: int = 0,
) -> KnowledgeGraph:
    """Planted-structure bipartite graph between chemicals and genes.

    Block k's chemicals connect to block k's genes through a uniformly chosen
    relation per pair; a `noise` fraction of edges is rewired to a gene in a
    different block. Relation types alternate orientation (even indices run
    chemical -> gene, odd gene -> chemical) so that multi-step walks remain
    realizable without implicit inverses. Entity names are chem<k>_<i> and
    gene<k>_<j>.
    """
    spec = SyntheticSpec(blocks, chems_per_block, genes_per_block, relations, noise, seed)
    rng = np.random.default_rng(spec.seed)
    graph = KnowledgeGraph()
    chems = [
        [f"chem{k}_{i}" for i in range(chems_per_block)] for k in range(blocks)
    ]
    genes = [
        [f"gene{k}_{j}" for j in range(genes_per_block)] for k in range(blocks)
    ]
    rel_names = [f"r{i}" for i in range(relations)]
    for k in range(blocks):
        for chem in chems[k]:
            for gene in genes[k]:
                rel = int(rng.integers(relations))
                partner = gene
                if blocks > 1 and noise > 0.0 and rng.random() < noise:
                    other = int(rng.integers(blocks - 1))
                    if other >= k:
                        other += 1
                    partner = genes[other][int(rng.integers(genes_per_block))]
                if rel % 2 == 0:
                    graph.add(chem, rel_names[rel], partner)
                else:
                    graph.add(partner, rel_names[rel], chem)
    return graph


def synthetic_partitions(graph: KnowledgeGraph) -> tuple[list[str], list[str]]:
    """Chemical and gene entity lists for graphs from generate_synthetic_kg."""
    names = graph.entities.names()
    return (
        [n for n in names if n.startswith("chem")],
        [n for n in names if n.startswith("gene")],
    )
