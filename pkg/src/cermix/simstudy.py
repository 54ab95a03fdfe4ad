"""Synthetic mixture-of-CER benchmarks and distance-to-truth evaluation.

The canonical benchmark is a four-component mixture with equal weights
whose centroids cover qualitatively different topologies (scale-free,
small-world, stochastic block model, Erdős–Rényi) and whose scales follow
named scenarios.  Fitted density estimates are scored against the truth
by importance-sampling approximations of the KL and L1 divergences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cer import CerAtom, Hyperparams, cer_log_pmf, cer_sample
from .graphs import Graph, GraphPopulation, n_pairs, pair_index
from .predictive import PosteriorDensity
from .sampler import PosteriorTrace
from .special import logsumexp

# Scales of the four components under each named scenario.
SCENARIO_SCALES = {
    "low": (0.25, 0.25, 0.25, 0.25),
    "medium-low": (0.30, 0.30, 0.30, 0.30),
    "medium": (0.35, 0.35, 0.35, 0.35),
    "high": (0.40, 0.40, 0.40, 0.40),
    "mixed": (0.25, 0.35, 0.30, 0.40),
}


# ---------------------------------------------------------------------------
# Centroid generators.
# ---------------------------------------------------------------------------


def scale_free_centroid(
    n_nodes: int, rng: np.random.Generator, exponent: float = 2.0, density: float = 0.2
) -> Graph:
    """Heavy-tailed centroid from the static power-law model.

    Node weights w_i ∝ (i+1)^(-1/(exponent-1)); exactly round(density*M)
    pairs are drawn without replacement with probability proportional to
    w_i * w_j, so the edge density is hit exactly.
    """
    if exponent <= 1.0:
        raise ValueError("power-law exponent must exceed 1")
    m = n_pairs(n_nodes)
    target = int(round(density * m))
    xi = 1.0 / (exponent - 1.0)
    w = (np.arange(1, n_nodes + 1, dtype=float)) ** (-xi)
    pair_w = np.array([w[u] * w[v] for v in range(n_nodes) for u in range(v)])
    chosen = rng.choice(m, size=target, replace=False, p=pair_w / pair_w.sum())
    bits = np.zeros(m, dtype=np.uint8)
    bits[chosen] = 1
    return Graph(n_nodes, bits)


def small_world_centroid(
    n_nodes: int, rng: np.random.Generator, degree: int = 10, rewire_p: float = 0.2
) -> Graph:
    """Watts-Strogatz ring lattice with random rewiring."""
    import networkx as nx

    if degree >= n_nodes:
        raise ValueError(f"lattice degree {degree} needs more than {n_nodes} nodes")
    G = nx.watts_strogatz_graph(n_nodes, degree, rewire_p, seed=int(rng.integers(2**31)))
    bits = np.zeros(n_pairs(n_nodes), dtype=np.uint8)
    for u, v in G.edges():
        bits[pair_index(u, v)] = 1
    return Graph(n_nodes, bits)


def sbm_centroid(
    n_nodes: int, rng: np.random.Generator, p_within: float = 0.9, p_between: float = 0.1
) -> Graph:
    """Two equal blocks with dense within-block and sparse between-block edges."""
    half = n_nodes // 2
    block = np.array([0] * half + [1] * (n_nodes - half))
    bits = np.zeros(n_pairs(n_nodes), dtype=np.uint8)
    for v in range(n_nodes):
        for u in range(v):
            p = p_within if block[u] == block[v] else p_between
            bits[pair_index(u, v)] = rng.random() < p
    return Graph(n_nodes, bits)


def er_centroid(n_nodes: int, rng: np.random.Generator, p: float = 0.3) -> Graph:
    """Erdős–Rényi centroid with inclusion probability p."""
    return Graph(n_nodes, (rng.random(n_pairs(n_nodes)) < p).astype(np.uint8))


def gen_centroids(n_nodes: int, seed: int | None = 0) -> list[Graph]:
    """The four benchmark centroids (scale-free, small-world, SBM, ER).

    Requires n_nodes >= 12 so the degree-10 ring lattice fits; for smaller
    graphs call the per-structure generators with adjusted parameters.
    """
    if n_nodes < 12:
        raise ValueError("need n_nodes >= 12 for the default degree-10 lattice")
    rng = np.random.default_rng(seed)
    return [
        scale_free_centroid(n_nodes, rng),
        small_world_centroid(n_nodes, rng),
        sbm_centroid(n_nodes, rng),
        er_centroid(n_nodes, rng),
    ]


# ---------------------------------------------------------------------------
# The ground-truth mixture.
# ---------------------------------------------------------------------------


@dataclass
class MixtureTruth:
    """Equal-weight four-component CER mixture used as simulation truth."""

    centroids: list[Graph]
    scales: tuple[float, ...]

    def __post_init__(self):
        if len(self.centroids) != 4 or len(self.scales) != 4:
            raise ValueError("the benchmark truth has exactly four components")
        n = self.centroids[0].n_nodes
        for g in self.centroids:
            if g.n_nodes != n:
                raise ValueError("centroids must share the node count")
        for s in self.scales:
            if not (0.0 < s < 0.5):
                raise ValueError(f"scale {s} outside (0, 1/2)")

    @property
    def n_nodes(self) -> int:
        return self.centroids[0].n_nodes

    def atoms(self) -> list[CerAtom]:
        return [CerAtom(g, s) for g, s in zip(self.centroids, self.scales)]

    def log_pmf(self, g: Graph) -> float:
        comps = [cer_log_pmf(g, atom) for atom in self.atoms()]
        return float(logsumexp(np.array(comps)) + math.log(0.25))

    @classmethod
    def from_scenario(cls, scenario: str, n_nodes: int, seed: int | None = 0) -> "MixtureTruth":
        if scenario not in SCENARIO_SCALES:
            raise ValueError(f"unknown scenario {scenario!r}; options {sorted(SCENARIO_SCALES)}")
        return cls(gen_centroids(n_nodes, seed), SCENARIO_SCALES[scenario])


def sample_truth(
    truth: MixtureTruth, n: int, rng: np.random.Generator
) -> tuple[GraphPopulation, np.ndarray]:
    """Draw n graphs from the truth; returns the data and true component labels."""
    labels = rng.integers(0, 4, size=n)
    atoms = truth.atoms()
    graphs = [cer_sample(atoms[k], rng) for k in labels]
    return GraphPopulation(truth.n_nodes, graphs), labels


# ---------------------------------------------------------------------------
# Density evaluation and divergences.
# ---------------------------------------------------------------------------


def posterior_mean_pmf(trace: PosteriorTrace, h: Hyperparams):
    """Evaluator G -> posterior mean pmf value implied by a retained trace."""
    density = PosteriorDensity(trace, h)

    def evaluate(g: Graph) -> float:
        return math.exp(density.log_pmf(g))

    evaluate.log_pmf = density.log_pmf
    return evaluate


def is_divergence(
    truth: MixtureTruth,
    f_hat,
    rng: np.random.Generator,
    L: int = 2000,
    kind: str = "kl",
) -> float:
    """Importance-sampling divergence between the truth and a density estimate.

    ``kl``: mean of log(p*(G)/f(G)); ``l1``: mean of |p*(G)-f(G)|/p*(G),
    both over L draws G iid from the truth p*.
    """
    if kind not in ("kl", "l1"):
        raise ValueError(f"kind must be 'kl' or 'l1', got {kind!r}")
    if L < 1:
        raise ValueError("L must be at least 1")
    log_f = getattr(f_hat, "log_pmf", None)
    total = 0.0
    for _ in range(L):
        g, _lab = sample_truth(truth, 1, rng)
        g = g[0]
        log_p = truth.log_pmf(g)
        log_q = log_f(g) if log_f is not None else math.log(f_hat(g))
        if not math.isfinite(log_q):
            raise ValueError("density estimate assigns zero mass to a sampled graph")
        if kind == "kl":
            total += log_p - log_q
        else:
            total += abs(math.exp(log_p) - math.exp(log_q)) / math.exp(log_p)
    return total / L
