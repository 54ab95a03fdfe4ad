"""Closed-form predictive laws and density evaluation.

All quantities here integrate the (mode, scale) atom of a cluster out
analytically.  The common ingredients are the exact reshuffling weight
vector of the cluster and, for per-edge laws, its leave-one-out variant
obtained by dividing out the factor of the pair in question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cer import Hyperparams, base_measure_sample, cer_sample
from .graphs import Graph, GraphPopulation, hamming
from .sampler import PosteriorTrace
from .special import log_incomplete_beta, logsumexp
from .weights import (
    EdgeCountTable,
    WeightVector,
    build_edge_counts,
    leave_one_out_weights,
    single_obs_weights,
    weight_vector,
)


def _log_b_half(a: float, b: float) -> float:
    return log_incomplete_beta(0.5, a, b)


def _full_log_terms(table: EdgeCountTable, wv: WeightVector, h: Hyperparams) -> np.ndarray:
    n1 = table.n_k + 1
    r = np.arange(table.span + 1)
    a_r = h.a + table.d_star + r
    b_r = h.b + n1 * table.m - table.d_star - r
    log_b = np.array([_log_b_half(float(ar), float(br)) for ar, br in zip(a_r, b_r)])
    return wv.log_w + log_b


def log_marginal_likelihood(cluster: GraphPopulation | None, h: Hyperparams) -> float:
    """Log marginal probability of a cluster of graphs under one shared atom.

    The atom is integrated out against the base measure; an empty cluster
    has marginal probability one.
    """
    if cluster is None or len(cluster) == 0:
        return 0.0
    table = build_edge_counts(cluster, h.g0)
    wv = weight_vector(table)
    return float(logsumexp(_full_log_terms(table, wv, h)) - _log_b_half(h.a, h.b))


@dataclass
class _LooTerms:
    """Leave-one-out weight vector of one folded count class."""

    t_star: int
    log_w: np.ndarray


class ClusterPredictive:
    """Per-pair predictive laws for the next graph drawn from one cluster.

    ``cluster`` may be None (or empty), in which case the laws are the
    prior-predictive ones determined by (a, b, g0) alone.
    """

    def __init__(self, cluster: GraphPopulation | None, h: Hyperparams):
        self.h = h
        self.table = build_edge_counts(cluster if cluster is not None and len(cluster) else None, h.g0)
        self.wv = weight_vector(self.table)
        self.log_norm = logsumexp(_full_log_terms(self.table, self.wv, h))
        self._loo: dict[int, _LooTerms] = {}

    @property
    def n1(self) -> int:
        return self.table.n_k + 1

    def _loo_for(self, count: int) -> _LooTerms:
        lo = min(count, self.n1 - count)
        terms = self._loo.get(lo)
        if terms is None:
            loo = leave_one_out_weights(self.table, self.wv, count)
            terms = _LooTerms(loo.d_star, loo.log_w)
            self._loo[lo] = terms
        return terms

    def edge_probabilities(self) -> np.ndarray:
        """P(edge present in the next graph), one value per node pair."""
        h, n1, m = self.h, self.n1, self.table.m
        by_count = {}
        for count in np.unique(self.table.counts):
            count = int(count)
            loo = self._loo_for(count)
            r = np.arange(len(loo.log_w), dtype=float)
            s = count + loo.t_star + r
            s_c = (n1 - count) + loo.t_star + r
            log_b1 = np.array([_log_b_half(h.a + si + 1.0, h.b + n1 * m - si) for si in s])
            log_b2 = np.array([_log_b_half(h.a + si, h.b + n1 * m - si + 1.0) for si in s_c])
            log_num = logsumexp(loo.log_w + np.logaddexp(log_b1, log_b2))
            by_count[count] = math.exp(log_num - self.log_norm)
        return np.array([by_count[int(c)] for c in self.table.counts])

    def edge_count_pmf(self, m_new: int) -> np.ndarray:
        """(M, m_new+1) array: pmf of the number of the next ``m_new`` graphs
        containing each edge."""
        h, n1, m = self.h, self.n1, self.table.m
        by_count = {}
        for count in np.unique(self.table.counts):
            count = int(count)
            loo = self._loo_for(count)
            r = np.arange(len(loo.log_w), dtype=float)
            s = count + loo.t_star + r
            s_c = (n1 - count) + loo.t_star + r
            pmf = np.empty(m_new + 1)
            for hits in range(m_new + 1):
                log_b1 = np.array(
                    [_log_b_half(h.a + si + hits, h.b + n1 * m - si + m_new - hits) for si in s]
                )
                log_b2 = np.array(
                    [_log_b_half(h.a + sci + m_new - hits, h.b + n1 * m - sci + hits) for sci in s_c]
                )
                log_num = logsumexp(loo.log_w + np.logaddexp(log_b1, log_b2))
                pmf[hits] = math.comb(m_new, hits) * math.exp(log_num - self.log_norm)
            by_count[count] = pmf
        return np.stack([by_count[int(c)] for c in self.table.counts])

    def mode_edge_probabilities(self) -> np.ndarray:
        """Posterior P(mode edge present), one value per node pair."""
        h, n1, m = self.h, self.n1, self.table.m
        by_count = {}
        for count in np.unique(self.table.counts):
            count = int(count)
            loo = self._loo_for(count)
            r = np.arange(len(loo.log_w), dtype=float)
            a_m = h.a + (n1 - count) + loo.t_star + r
            b_m = h.b + n1 * (m - 1) + count - loo.t_star - r
            log_b = np.array([_log_b_half(float(am), float(bm)) for am, bm in zip(a_m, b_m)])
            by_count[count] = math.exp(logsumexp(loo.log_w + log_b) - self.log_norm)
        return np.array([by_count[int(c)] for c in self.table.counts])

    def mode_point_estimate(self) -> Graph:
        """Marginal-threshold mode estimate: edge kept iff its posterior
        probability of belonging to the mode is at least one half."""
        p = self.mode_edge_probabilities()
        return Graph(self.h.g0.n_nodes, (p >= 0.5).astype(np.uint8))


def predictive_edge_prob(cluster: GraphPopulation | None, h: Hyperparams) -> np.ndarray:
    return ClusterPredictive(cluster, h).edge_probabilities()


def predictive_edge_count_pmf(cluster: GraphPopulation | None, h: Hyperparams, m_new: int) -> np.ndarray:
    return ClusterPredictive(cluster, h).edge_count_pmf(m_new)


def posterior_mode_edge_prob(cluster: GraphPopulation | None, h: Hyperparams) -> np.ndarray:
    return ClusterPredictive(cluster, h).mode_edge_probabilities()


def prior_edge_expectation(h: Hyperparams) -> np.ndarray:
    """Closed-form P(edge present) for a fresh graph, one value per pair."""
    log_den = _log_b_half(h.a, h.b)
    out = np.empty(h.g0.m)
    for bit in (0, 1):
        log_p = np.logaddexp(
            _log_b_half(h.a + 1.0 + bit, h.b + 1.0 - bit),
            _log_b_half(h.a + 1.0 - bit, h.b + 1.0 + bit),
        ) - log_den
        out[h.g0.edges == bit] = math.exp(log_p)
    return out


# ---------------------------------------------------------------------------
# Whole-graph prior marginal and the posterior mean density.
# ---------------------------------------------------------------------------


def log_prior_pmf(g: Graph, h: Hyperparams, _cache: dict | None = None) -> float:
    """Log prior marginal pmf of a single graph (atom integrated out)."""
    d = hamming(g, h.g0)
    if _cache is not None and d in _cache:
        return _cache[d]
    m = g.m
    wv = single_obs_weights(d, m)
    r = np.arange(m - d + 1)
    a_r = h.a + 2 * r + d
    b_r = h.b + 2 * m - 2 * r - d
    log_b = np.array([_log_b_half(float(ar), float(br)) for ar, br in zip(a_r, b_r)])
    val = float(logsumexp(wv.log_w + log_b) - _log_b_half(h.a, h.b))
    if _cache is not None:
        _cache[d] = val
    return val


class PosteriorDensity:
    """Posterior mean pmf over graphs implied by a retained trace.

    f(G) = c/(c+n) * prior marginal + average over retained iterations of
    sum_k n_k/(c+n) * CER(G; atom_k).
    """

    def __init__(self, trace: PosteriorTrace, h: Hyperparams):
        self.h = h
        self.n = trace.n_obs
        self._prior_cache: dict[int, float] = {}
        self.log_new_weight = math.log(h.c) - math.log(h.c + self.n)
        modes, log_w, log_alpha, log_1m = [], [], [], []
        n_iter = len(trace)
        for t in range(n_iter):
            sizes = np.bincount(trace.assignments[t], minlength=len(trace.atoms[t]))
            for k, atom in enumerate(trace.atoms[t]):
                modes.append(atom.mode.edges)
                log_w.append(math.log(sizes[k]) - math.log(h.c + self.n) - math.log(n_iter))
                log_alpha.append(math.log(atom.alpha))
                log_1m.append(math.log1p(-atom.alpha))
        self.modes = np.stack(modes)
        self.log_w = np.array(log_w)
        self.log_alpha = np.array(log_alpha)
        self.log_1m = np.array(log_1m)
        self.m = self.modes.shape[1]

    def log_pmf(self, g: Graph) -> float:
        d = np.count_nonzero(self.modes != g.edges[None, :], axis=1)
        log_atoms = self.log_w + d * self.log_alpha + (self.m - d) * self.log_1m
        log_prior = self.log_new_weight + log_prior_pmf(g, self.h, self._prior_cache)
        return float(logsumexp(np.append(log_atoms, log_prior)))


# ---------------------------------------------------------------------------
# Sampling from the predictive laws.
# ---------------------------------------------------------------------------


def prior_predictive_sample(h: Hyperparams, rng: np.random.Generator) -> Graph:
    """Draw one graph from the prior marginal: atom from the base measure,
    then a CER variate around it."""
    return cer_sample(base_measure_sample(h, rng), rng)


def posterior_predictive_sample(
    trace: PosteriorTrace, h: Hyperparams, rng: np.random.Generator, n_draws: int = 1
) -> GraphPopulation:
    """Draw graphs from the posterior predictive implied by a trace.

    Each draw picks a retained iteration uniformly, then reuses an existing
    cluster atom with probability n_k/(c+n) or a fresh base-measure atom
    otherwise.
    """
    n = trace.n_obs
    graphs = []
    for _ in range(n_draws):
        t = int(rng.integers(len(trace)))
        sizes = np.bincount(trace.assignments[t], minlength=len(trace.atoms[t]))
        u = rng.random() * (h.c + n)
        if u < h.c:
            atom = base_measure_sample(h, rng)
        else:
            k = int(np.searchsorted(np.cumsum(sizes), u - h.c, side="right"))
            k = min(k, len(sizes) - 1)
            atom = trace.atoms[t][k]
        graphs.append(cer_sample(atom, rng))
    return GraphPopulation(trace.n_nodes, graphs)
