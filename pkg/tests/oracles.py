"""Independent brute-force oracles used across the test suite.

Everything here is deliberately naive: exhaustive enumeration over all
2^M candidate modes, adaptive quadrature over the scale, and explicit
sums over all set partitions.  No code under test is reused beyond basic
data containers.
"""

import itertools
import math
from collections import Counter

import numpy as np
from scipy.integrate import quad

from cermix.graphs import Graph, GraphPopulation


def all_graphs(n_nodes):
    """Every labeled graph on n_nodes (generator)."""
    m = n_nodes * (n_nodes - 1) // 2
    for bits in itertools.product((0, 1), repeat=m):
        yield Graph(n_nodes, np.array(bits, dtype=np.uint8))


def mode_distance_histogram(pop: GraphPopulation, g0: Graph) -> Counter:
    """Exhaustive count of candidate modes at each total Hamming distance
    to the cluster members plus g0."""
    rows = pop.edge_matrix() if pop is not None else np.zeros((0, g0.m), dtype=np.uint8)
    hist = Counter()
    for g in all_graphs(g0.n_nodes):
        d = int(np.count_nonzero(rows != g.edges[None, :])) + int(
            np.count_nonzero(g0.edges != g.edges)
        )
        hist[d] += 1
    return hist


def _ibeta_quad(q, a, b):
    val, _err = quad(lambda t: t ** (a - 1.0) * (1.0 - t) ** (b - 1.0), 0.0, q,
                     epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def _mode_integrals(pop, g0, h, weight=None):
    """Per-mode integrals of prod_l psi(G_l; mode, alpha) dP0, optionally
    times an extra alpha-dependent factor ``weight(alpha, mode_bits)``."""
    rows = pop.edge_matrix() if pop is not None else np.zeros((0, g0.m), dtype=np.uint8)
    n1 = rows.shape[0] + 1
    m = g0.m
    denom = _ibeta_quad(0.5, h.a, h.b)
    out = []
    for g in all_graphs(g0.n_nodes):
        d = int(np.count_nonzero(rows != g.edges[None, :])) + int(
            np.count_nonzero(g0.edges != g.edges)
        )
        if weight is None:
            f = lambda al: al ** (h.a - 1 + d) * (1 - al) ** (h.b - 1 + n1 * m - d)
        else:
            f = lambda al: al ** (h.a - 1 + d) * (1 - al) ** (h.b - 1 + n1 * m - d) * weight(
                al, g.edges
            )
        out.append((g, quad(f, 0.0, 0.5, epsabs=1e-16, epsrel=1e-13, limit=200)[0] / denom))
    return out


def cluster_marginal(pop, g0, h) -> float:
    """Marginal probability of a cluster by enumeration + quadrature."""
    return sum(v for _g, v in _mode_integrals(pop, g0, h))


def predictive_edge_probs(pop, g0, h) -> np.ndarray:
    """Per-pair probability that the next cluster draw contains the edge."""
    den = cluster_marginal(pop, g0, h)
    num = np.zeros(g0.m)
    for e in range(g0.m):
        w = lambda al, bits, e=e: (1 - al) if bits[e] else al
        num[e] = sum(v for _g, v in _mode_integrals(pop, g0, h, weight=w))
    return num / den


def predictive_count_pmf(pop, g0, h, m_new) -> np.ndarray:
    """(M, m_new+1) pmf of how many of the next m_new draws contain each edge."""
    den = cluster_marginal(pop, g0, h)
    out = np.zeros((g0.m, m_new + 1))
    for e in range(g0.m):
        for hits in range(m_new + 1):
            def w(al, bits, e=e, hits=hits):
                p = (1 - al) if bits[e] else al
                return math.comb(m_new, hits) * p ** hits * (1 - p) ** (m_new - hits)
            out[e, hits] = sum(v for _g, v in _mode_integrals(pop, g0, h, weight=w)) / den
    return out


def mode_edge_probs(pop, g0, h) -> np.ndarray:
    """Per-pair posterior probability that the mode contains the edge."""
    den = cluster_marginal(pop, g0, h)
    num = np.zeros(g0.m)
    for g, v in _mode_integrals(pop, g0, h):
        num += g.edges * v
    return num / den


def set_partitions(items):
    """All set partitions of a list (restricted-growth enumeration)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i, block in enumerate(smaller):
            yield smaller[:i] + [[first] + block] + smaller[i + 1:]
        yield [[first]] + smaller


def partition_posterior(data: GraphPopulation, h) -> dict:
    """Exact posterior over set partitions of the observations.

    Prior: DP exchangeable partition probabilities, c^K * prod (n_k - 1)!;
    likelihood: product of per-cluster marginals by enumeration+quadrature.
    """
    scores = {}
    for part in set_partitions(range(len(data))):
        val = 1.0
        for block in part:
            sub = GraphPopulation(data.n_nodes, [data[i] for i in block])
            val *= h.c * math.factorial(len(block) - 1) * cluster_marginal(sub, h.g0, h)
        key = tuple(tuple(sorted(b)) for b in sorted(part, key=min))
        scores[key] = val
    total = sum(scores.values())
    return {k: v / total for k, v in scores.items()}


def co_clustering_from_posterior(posterior: dict, n: int) -> np.ndarray:
    """Exact co-clustering probabilities implied by a partition posterior."""
    mat = np.zeros((n, n))
    for part, p in posterior.items():
        for block in part:
            for i in block:
                for j in block:
                    mat[i, j] += p
    return mat


def best_partition_by_expected_vi(draws: np.ndarray, n_items: int):
    """Exhaustive minimizer of the mean VI distance to the draws (n small)."""
    from cermix.partition import expected_vi

    best, best_val = None, np.inf
    for part in set_partitions(range(n_items)):
        labels = np.empty(n_items, dtype=np.int64)
        for k, block in enumerate(part):
            for i in block:
                labels[i] = k
        val = expected_vi(labels, draws)
        if val < best_val - 1e-12:
            best, best_val = labels, val
    return best, best_val
