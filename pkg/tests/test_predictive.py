import itertools
import math

import numpy as np
import pytest

from cermix.cer import CerAtom, Hyperparams, cer_log_pmf
from cermix.graphs import Graph, GraphPopulation, n_pairs
from cermix.predictive import (
    ClusterPredictive,
    PosteriorDensity,
    log_marginal_likelihood,
    log_prior_pmf,
    posterior_predictive_sample,
    predictive_edge_count_pmf,
    predictive_edge_prob,
    prior_edge_expectation,
    prior_predictive_sample,
)
from cermix.sampler import ChainConfig, run_chain
from oracles import (
    all_graphs,
    cluster_marginal,
    mode_edge_probs,
    predictive_count_pmf,
    predictive_edge_probs,
)


def make_cluster(seed, n_nodes=3, n_k=2):
    rng = np.random.default_rng(seed)
    m = n_pairs(n_nodes)
    g0 = Graph(n_nodes, rng.integers(0, 2, m).astype(np.uint8))
    pop = (
        GraphPopulation(n_nodes, [Graph(n_nodes, rng.integers(0, 2, m).astype(np.uint8))
                                  for _ in range(n_k)])
        if n_k else None
    )
    h = Hyperparams(rng.uniform(0.5, 3), rng.uniform(0.5, 3), 1.0, g0)
    return pop, h


@pytest.mark.parametrize("n_k", [0, 1, 2, 3])
def test_marginal_likelihood_vs_oracle(n_k):
    for seed in range(3):
        pop, h = make_cluster(seed * 10 + n_k, n_k=n_k)
        got = math.exp(log_marginal_likelihood(pop, h))
        if n_k == 0:
            assert got == 1.0
        else:
            assert got == pytest.approx(cluster_marginal(pop, h.g0, h), rel=1e-9)


@pytest.mark.parametrize("n_k", [0, 1, 2, 3])
def test_edge_probabilities_vs_oracle(n_k):
    pop, h = make_cluster(100 + n_k, n_k=n_k)
    got = predictive_edge_prob(pop, h)
    want = predictive_edge_probs(pop, h.g0, h)
    assert np.abs(got - want).max() < 1e-9
    assert np.all((got > 0) & (got < 1))


@pytest.mark.parametrize("m_new", [1, 2, 3])
def test_edge_count_pmf_vs_oracle(m_new):
    pop, h = make_cluster(200 + m_new, n_k=2)
    got = predictive_edge_count_pmf(pop, h, m_new)
    want = predictive_count_pmf(pop, h.g0, h, m_new)
    assert np.abs(got - want).max() < 1e-9
    assert np.allclose(got.sum(axis=1), 1.0, atol=1e-10)


def test_edge_count_pmf_m1_consistency():
    pop, h = make_cluster(7, n_k=3)
    cp = ClusterPredictive(pop, h)
    assert np.allclose(cp.edge_count_pmf(1)[:, 1], cp.edge_probabilities(), atol=1e-12)


@pytest.mark.parametrize("n_k", [1, 2, 3])
def test_mode_edge_probabilities_vs_oracle(n_k):
    pop, h = make_cluster(300 + n_k, n_k=n_k)
    cp = ClusterPredictive(pop, h)
    got = cp.mode_edge_probabilities()
    want = mode_edge_probs(pop, h.g0, h)
    assert np.abs(got - want).max() < 1e-9


def test_mode_point_estimate_thresholds():
    pop, h = make_cluster(8, n_k=3)
    cp = ClusterPredictive(pop, h)
    est = cp.mode_point_estimate()
    assert np.array_equal(est.edges, (cp.mode_edge_probabilities() >= 0.5).astype(np.uint8))


def test_prior_edge_expectation_uniform_case():
    # a = b = 1: scale uniform on (0, 1/2); a pair present in g0 keeps its
    # edge with probability 2/3, an absent pair gains one with 1/3
    g0 = Graph(3, np.array([1, 0, 1], dtype=np.uint8))
    h = Hyperparams(1.0, 1.0, 1.0, g0)
    p = prior_edge_expectation(h)
    assert p[0] == pytest.approx(2 / 3, abs=1e-12)
    assert p[1] == pytest.approx(1 / 3, abs=1e-12)
    # consistency with the empty-cluster predictive
    assert np.abs(p - predictive_edge_prob(None, h)).max() < 1e-10


def test_prior_pmf_normalizes():
    _, h = make_cluster(9)
    total = sum(math.exp(log_prior_pmf(g, h)) for g in all_graphs(3))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_posterior_density_normalizes_and_is_positive():
    rng = np.random.default_rng(10)
    data = GraphPopulation(3, [Graph(3, rng.integers(0, 2, 3).astype(np.uint8)) for _ in range(4)])
    h = Hyperparams(1.0, 1.0, 1.0, data[0])
    trace = run_chain(data, h, ChainConfig(n_iter=200, burn_in=50), seed=1)
    dens = PosteriorDensity(trace, h)
    vals = [math.exp(dens.log_pmf(g)) for g in all_graphs(3)]
    assert min(vals) > 0
    assert sum(vals) == pytest.approx(1.0, abs=1e-10)


def test_posterior_density_single_atom_limit():
    # one retained iteration, one cluster, tiny concentration: the density
    # collapses onto the CER kernel of that atom
    rng = np.random.default_rng(11)
    data = GraphPopulation(3, [Graph(3, rng.integers(0, 2, 3).astype(np.uint8)) for _ in range(4)])
    h = Hyperparams(1.0, 1.0, 1e-9, data[0])
    trace = run_chain(data, h, ChainConfig(n_iter=51, burn_in=50), seed=2)
    assert len(trace) == 1
    if len(trace.atoms[0]) == 1:
        atom = trace.atoms[0][0]
        dens = PosteriorDensity(trace, h)
        for g in all_graphs(3):
            assert dens.log_pmf(g) == pytest.approx(cer_log_pmf(g, atom), abs=1e-6)


def test_prior_predictive_sample_edge_rates():
    g0 = Graph(3, np.array([1, 0, 1], dtype=np.uint8))
    h = Hyperparams(1.0, 1.0, 1.0, g0)
    rng = np.random.default_rng(12)
    draws = np.stack([prior_predictive_sample(h, rng).edges for _ in range(6000)])
    want = prior_edge_expectation(h)
    assert np.abs(draws.mean(axis=0) - want).max() < 0.02


def test_posterior_predictive_sample_shapes():
    rng = np.random.default_rng(13)
    data = GraphPopulation(4, [Graph(4, rng.integers(0, 2, 6).astype(np.uint8)) for _ in range(5)])
    h = Hyperparams(1.0, 1.0, 1.0, data[0])
    trace = run_chain(data, h, ChainConfig(n_iter=100, burn_in=20), seed=3)
    draws = posterior_predictive_sample(trace, h, rng, n_draws=25)
    assert len(draws) == 25 and draws.n_nodes == 4
