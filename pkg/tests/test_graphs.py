import numpy as np
import pytest

from cermix.graphs import (
    Graph,
    GraphFormatError,
    GraphPopulation,
    frechet_mean,
    hamming,
    index_pair,
    n_pairs,
    pair_index,
    read_population,
    write_population,
)


def random_population(n_nodes, n, rng):
    m = n_pairs(n_nodes)
    return GraphPopulation(
        n_nodes, [Graph(n_nodes, rng.integers(0, 2, m).astype(np.uint8)) for _ in range(n)]
    )


def test_pair_index_roundtrip():
    n = 17
    seen = set()
    for v in range(n):
        for u in range(v):
            idx = pair_index(u, v)
            assert pair_index(v, u) == idx
            assert index_pair(idx) == (u, v)
            seen.add(idx)
    assert seen == set(range(n_pairs(n)))


def test_pair_index_order():
    # lower-triangular row-major: (1,0), (2,0), (2,1), (3,0), ...
    assert [index_pair(i) for i in range(6)] == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]


def test_graph_construction_and_adjacency():
    rng = np.random.default_rng(0)
    for n in (2, 3, 5, 9):
        bits = rng.integers(0, 2, n_pairs(n)).astype(np.uint8)
        g = Graph(n, bits)
        adj = g.to_adjacency()
        assert np.array_equal(adj, adj.T)
        assert np.all(np.diag(adj) == 0)
        g2 = Graph.from_adjacency(adj)
        assert g == g2 and hash(g) == hash(g2)
        for v in range(n):
            for u in range(v):
                assert g.has_edge(u, v) == bool(adj[u, v])


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(1, np.zeros(0, dtype=np.uint8))
    with pytest.raises(ValueError):
        Graph(3, np.zeros(2, dtype=np.uint8))
    with pytest.raises(ValueError):
        Graph(3, np.array([0, 1, 2], dtype=np.uint8))
    with pytest.raises(ValueError):
        Graph.from_adjacency(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        Graph.from_adjacency(np.eye(3, dtype=int))


def test_graph_immutable():
    g = Graph.empty(4)
    with pytest.raises(ValueError):
        g.edges[0] = 1


def test_hamming_metric_axioms():
    rng = np.random.default_rng(1)
    pop = random_population(4, 12, rng)
    for g1 in pop.graphs:
        assert hamming(g1, g1) == 0
        for g2 in pop.graphs:
            assert hamming(g1, g2) == hamming(g2, g1)
            assert (hamming(g1, g2) == 0) == (g1 == g2)
            for g3 in pop.graphs:
                assert hamming(g1, g3) <= hamming(g1, g2) + hamming(g2, g3)


def test_frechet_mean_minimizes_total_distance():
    import itertools

    rng = np.random.default_rng(2)
    for trial in range(5):
        pop = random_population(4, 5, rng)
        mean = frechet_mean(pop)
        best = min(
            sum(int(np.count_nonzero(np.array(bits, dtype=np.uint8) != g.edges)) for g in pop.graphs)
            for bits in itertools.product((0, 1), repeat=n_pairs(4))
        )
        got = sum(hamming(mean, g) for g in pop.graphs)
        assert got == best


def test_frechet_tie_rule():
    g1 = Graph(3, np.array([1, 0, 1], dtype=np.uint8))
    g2 = Graph(3, np.array([0, 0, 1], dtype=np.uint8))
    pop = GraphPopulation(3, [g1, g2])
    assert frechet_mean(pop).edges[0] == 1
    assert frechet_mean(pop, tie_rule="absent").edges[0] == 0


@pytest.mark.parametrize("fmt", ["adjacency-text", "edge-list"])
def test_io_roundtrip(tmp_path, fmt):
    rng = np.random.default_rng(3)
    pop = random_population(6, 7, rng)
    path = tmp_path / "pop.txt"
    write_population(pop, path, fmt)
    back = read_population(path, fmt)
    assert len(back) == len(pop)
    assert all(a == b for a, b in zip(pop.graphs, back.graphs))


def test_adjacency_text_error_reporting(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1 0\n1 0 1\n0 1 2\n")
    with pytest.raises(GraphFormatError, match="line 3"):
        read_population(path, "adjacency-text")
    path.write_text("0 1\n0 0\n")
    with pytest.raises(GraphFormatError, match="asymmetric"):
        read_population(path, "adjacency-text")
    path.write_text("\n\n")
    with pytest.raises(GraphFormatError, match="no graphs"):
        read_population(path, "adjacency-text")


def test_edge_list_error_reporting(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("graph 1 n=4\n1 1\n")
    with pytest.raises(GraphFormatError, match="self-loop"):
        read_population(path, "edge-list")
    path.write_text("graph 1 n=4\n1 9\n")
    with pytest.raises(GraphFormatError, match="out of range"):
        read_population(path, "edge-list")
    path.write_text("1 2\n")
    with pytest.raises(GraphFormatError, match="before any graph header"):
        read_population(path, "edge-list")
    path.write_text("graph 1 n=4\nfoo bar baz\n")
    with pytest.raises(GraphFormatError):
        read_population(path, "edge-list")


def test_population_validation():
    with pytest.raises(ValueError):
        GraphPopulation(3, [])
    with pytest.raises(ValueError):
        GraphPopulation(3, [Graph.empty(4)])


def test_edge_matrix_cache():
    rng = np.random.default_rng(4)
    pop = random_population(5, 3, rng)
    m1 = pop.edge_matrix()
    assert m1.shape == (3, n_pairs(5))
    assert m1 is pop.edge_matrix()
    assert np.array_equal(m1[1], pop[1].edges)
