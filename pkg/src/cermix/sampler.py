"""Marginal Gibbs sampler for the DP mixture of CER kernels.

One iteration performs a generalized Polya-urn update for every
observation (reassign to an existing cluster proportionally to its size
times the kernel, or open a new cluster proportionally to the
concentration times the prior marginal of the observation), followed by a
reshuffling step that redraws every cluster's (mode, scale) atom from its
conditional given the cluster members.

The reshuffling step comes in two variants: ``exact`` samples the scale
from its marginal conditional, a truncated-Beta mixture whose weights
require the exact combinatorial weight vector; ``fast`` replaces that
marginal with the full conditional given the current mode, a single
truncated Beta, which targets the same distribution as a two-block scan.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .cer import CerAtom, Hyperparams
from .graphs import Graph, GraphPopulation, frechet_mean, hamming
from .special import TBetaParams, log_incomplete_beta, logsumexp, sample_log_weights, tbeta_sample
from .weights import (
    EdgeCountTable,
    WeightVector,
    build_edge_counts,
    edge_counts_from_counts,
    single_obs_weights,
    weight_vector,
)

# Auto reshuffle policy: exact weight vectors are affordable for small
# clusters on small graphs, otherwise the fast variant is used.
_EXACT_MAX_CLUSTER = 8
_EXACT_MAX_PAIRS = 200


@dataclass
class NewAtomTable:
    """Iteration-invariant quantities for opening a cluster at one observation."""

    d: int                    # Hamming distance between the observation and g0
    log_marginal: float       # log of the prior marginal pmf of the observation
    log_pi0: float            # log c + log_marginal
    log_phi: np.ndarray       # normalized mixture log-weights over r
    a_r: np.ndarray
    b_r: np.ndarray
    bern_exponent: np.ndarray  # per-edge exponent 2*(g0_bit + g_bit - 1)


def new_atom_table(g: Graph, g0: Graph, h: Hyperparams) -> NewAtomTable:
    """Precompute the single-observation posterior over fresh atoms."""
    d = hamming(g, g0)
    m = g.m
    wv = single_obs_weights(d, m)
    r = np.arange(m - d + 1)
    a_r = h.a + 2 * r + d
    b_r = h.b + 2 * m - 2 * r - d
    log_b = np.array([log_incomplete_beta(0.5, float(ar), float(br)) for ar, br in zip(a_r, b_r)])
    log_terms = wv.log_w + log_b
    log_norm = logsumexp(log_terms)
    log_marginal = log_norm - log_incomplete_beta(0.5, h.a, h.b)
    exponent = 2 * (g0.edges.astype(np.int64) + g.edges.astype(np.int64) - 1)
    return NewAtomTable(
        d=d,
        log_marginal=log_marginal,
        log_pi0=float(np.log(h.c) + log_marginal),
        log_phi=log_terms - log_norm,
        a_r=a_r.astype(float),
        b_r=b_r.astype(float),
        bern_exponent=exponent,
    )


def sample_new_atom(table: NewAtomTable, n_nodes: int, rng: np.random.Generator) -> CerAtom:
    """Draw (mode, alpha) for a freshly opened cluster at one observation."""
    r = sample_log_weights(table.log_phi, rng)
    alpha = tbeta_sample(TBetaParams(0.5, float(table.a_r[r]), float(table.b_r[r])), rng)
    rho = alpha / (1.0 - alpha)
    p = 1.0 / (1.0 + rho ** table.bern_exponent)
    bits = (rng.random(p.shape[0]) < p).astype(np.uint8)
    return CerAtom(Graph(n_nodes, bits), alpha)


def _mode_bits_given_alpha(table: EdgeCountTable, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Sample the mode edge bits given alpha; one Bernoulli parameter per count class."""
    n1 = table.n_k + 1
    rho = alpha / (1.0 - alpha)
    counts_present = np.flatnonzero(table.histogram)
    p_by_count = np.zeros(n1 + 1)
    for hcount in counts_present:
        p_by_count[hcount] = 1.0 / (1.0 + rho ** (2.0 * (hcount - n1 / 2.0)))
    p = p_by_count[table.counts]
    return (rng.random(table.m) < p).astype(np.uint8)


@dataclass
class ClusterLaw:
    """Cached exact conditional of a cluster atom given its members."""

    table: EdgeCountTable
    wv: WeightVector
    log_phi: np.ndarray
    a_r: np.ndarray
    b_r: np.ndarray
    log_marginal: float


def cluster_law(table: EdgeCountTable, h: Hyperparams) -> ClusterLaw:
    """Truncated-Beta mixture for the scale of a cluster atom, plus marginal."""
    wv = weight_vector(table)
    n1 = table.n_k + 1
    r = np.arange(table.span + 1)
    a_r = h.a + table.d_star + r.astype(float)
    b_r = h.b + n1 * table.m - table.d_star - r.astype(float)
    log_b = np.array([log_incomplete_beta(0.5, float(ar), float(br)) for ar, br in zip(a_r, b_r)])
    log_terms = wv.log_w + log_b
    log_norm = logsumexp(log_terms)
    log_marginal = log_norm - log_incomplete_beta(0.5, h.a, h.b)
    return ClusterLaw(table, wv, log_terms - log_norm, a_r, b_r, log_marginal)


def sample_cluster_atom_exact(law: ClusterLaw, n_nodes: int, rng: np.random.Generator) -> CerAtom:
    """Reshuffle one cluster atom from its exact conditional."""
    r = sample_log_weights(law.log_phi, rng)
    alpha = tbeta_sample(TBetaParams(0.5, float(law.a_r[r]), float(law.b_r[r])), rng)
    bits = _mode_bits_given_alpha(law.table, alpha, rng)
    return CerAtom(Graph(n_nodes, bits), alpha)


def sample_cluster_atom_fast(
    table: EdgeCountTable,
    total_distance: int,
    h: Hyperparams,
    n_nodes: int,
    rng: np.random.Generator,
) -> CerAtom:
    """Two-block reshuffle: alpha from its full conditional given the current
    mode (``total_distance`` is the summed Hamming distance of members plus g0
    to that mode), then a fresh mode given alpha."""
    n1 = table.n_k + 1
    alpha = tbeta_sample(
        TBetaParams(0.5, h.a + total_distance, h.b + n1 * table.m - total_distance), rng
    )
    bits = _mode_bits_given_alpha(table, alpha, rng)
    return CerAtom(Graph(n_nodes, bits), alpha)


@dataclass
class ClusterState:
    """Partition of the observations plus one atom per cluster."""

    assignments: np.ndarray        # cluster id per observation, 0-based contiguous
    atoms: list[CerAtom]

    def __post_init__(self):
        self.assignments = np.asarray(self.assignments, dtype=np.int64)
        self._check()

    def _check(self):
        k = len(self.atoms)
        if k == 0 or self.assignments.min() < 0 or self.assignments.max() >= k:
            raise ValueError("assignments out of range for the atom list")
        if len(np.unique(self.assignments)) != k:
            raise ValueError("every atom must be referenced by at least one observation")

    @property
    def n_clusters(self) -> int:
        return len(self.atoms)

    def sizes(self) -> np.ndarray:
        # a label of -1 marks an observation mid-reassignment; ignore it
        z = self.assignments
        return np.bincount(z[z >= 0], minlength=self.n_clusters)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == k)

    def copy(self) -> "ClusterState":
        return ClusterState(self.assignments.copy(), list(self.atoms))


@dataclass
class ChainConfig:
    """Settings of one Gibbs run; defaults follow the usual 1200/200 schedule."""

    n_iter: int = 1200
    burn_in: int = 200
    thin: int = 1
    reshuffle: str = "auto"      # exact | fast | auto
    scan: str = "fixed"          # fixed | random

    def __post_init__(self):
        if not (self.n_iter > self.burn_in >= 0):
            raise ValueError("need n_iter > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.reshuffle not in ("exact", "fast", "auto"):
            raise ValueError(f"unknown reshuffle mode {self.reshuffle!r}")
        if self.scan not in ("fixed", "random"):
            raise ValueError(f"unknown scan order {self.scan!r}")


@dataclass
class PosteriorTrace:
    """Retained post-burn-in snapshots of the sampler state."""

    n_nodes: int
    n_obs: int
    assignments: np.ndarray            # (T, n) cluster labels, 0-based
    atoms: list[list[CerAtom]]         # per retained iteration, one atom per cluster
    seed: int | None = None
    hyperparams: Hyperparams | None = None
    iteration_ids: np.ndarray | None = None

    def __len__(self) -> int:
        return self.assignments.shape[0]

    def n_clusters(self) -> np.ndarray:
        return np.array([len(a) for a in self.atoms])

    def co_clustering(self) -> np.ndarray:
        """(n, n) matrix of posterior co-assignment frequencies."""
        z = self.assignments
        return (z[:, :, None] == z[:, None, :]).mean(axis=0)

    def save(self, trace_path, atoms_path) -> None:
        with open(trace_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "K"] + [f"z{i + 1}" for i in range(self.n_obs)])
            its = self.iteration_ids if self.iteration_ids is not None else np.arange(len(self))
            for t in range(len(self)):
                writer.writerow(
                    [int(its[t]), len(self.atoms[t])] + [int(z) + 1 for z in self.assignments[t]]
                )
        with open(atoms_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# n_nodes={self.n_nodes}\n")
            writer = csv.writer(fh)
            writer.writerow(["iteration", "cluster", "alpha", "mode_hex"])
            its = self.iteration_ids if self.iteration_ids is not None else np.arange(len(self))
            for t, atom_list in enumerate(self.atoms):
                for k, atom in enumerate(atom_list):
                    mode_hex = np.packbits(atom.mode.edges).tobytes().hex()
                    writer.writerow([int(its[t]), k + 1, repr(atom.alpha), mode_hex])

    @classmethod
    def load(cls, trace_path, atoms_path) -> "PosteriorTrace":
        with open(trace_path, "r", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            n_obs = len(header) - 2
            rows = [row for row in reader if row]
        its = np.array([int(r[0]) for r in rows])
        assignments = np.array([[int(z) - 1 for z in r[2:]] for r in rows], dtype=np.int64)
        with open(atoms_path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
            if not first.startswith("# n_nodes="):
                raise ValueError("atoms file missing '# n_nodes=' header")
            n_nodes = int(first.split("=", 1)[1])
            reader = csv.reader(fh)
            next(reader)  # column header
            m = n_nodes * (n_nodes - 1) // 2
            by_iter: dict[int, list[CerAtom]] = {}
            for row in reader:
                if not row:
                    continue
                it, _k, alpha, mode_hex = int(row[0]), int(row[1]), float(row[2]), row[3]
                bits = np.unpackbits(np.frombuffer(bytes.fromhex(mode_hex), dtype=np.uint8))[:m]
                by_iter.setdefault(it, []).append(CerAtom(Graph(n_nodes, bits.astype(np.uint8)), alpha))
        atoms = [by_iter[int(it)] for it in its]
        return cls(n_nodes, n_obs, assignments, atoms, iteration_ids=its)


class GibbsSampler:
    """Stateful driver for one chain over a fixed dataset and hyperparameters."""

    def __init__(self, data: GraphPopulation, h: Hyperparams, rng: np.random.Generator,
                 reshuffle: str = "auto"):
        if data.n_nodes != h.g0.n_nodes:
            raise ValueError("data and g0 node counts differ")
        self.data = data
        self.h = h
        self.rng = rng
        self.reshuffle_mode = reshuffle
        self.n = len(data)
        self.m = data[0].m
        self.rows = data.edge_matrix()
        # Iteration-invariant per-observation quantities (g0 is fixed).
        self.atom_tables = [new_atom_table(g, h.g0, h) for g in data.graphs]
        self._law_cache: dict[tuple, ClusterLaw] = {}

    # -- urn step ----------------------------------------------------------

    def urn_log_probs(self, l: int, state: ClusterState) -> np.ndarray:
        """Unnormalized log allocation probabilities for observation l, with the
        observation already removed from the state; last entry is 'new cluster'."""
        sizes = state.sizes()
        row = self.rows[l]
        out = np.empty(state.n_clusters + 1)
        for k, atom in enumerate(state.atoms):
            d = int(np.count_nonzero(row != atom.mode.edges))
            out[k] = np.log(sizes[k]) + d * np.log(atom.alpha) + (self.m - d) * np.log1p(-atom.alpha)
        out[-1] = self.atom_tables[l].log_pi0
        return out

    def _remove_obs(self, l: int, state: ClusterState) -> ClusterState:
        k_old = int(state.assignments[l])
        state.assignments[l] = -1
        if not np.any(state.assignments == k_old):
            del state.atoms[k_old]
            state.assignments[state.assignments > k_old] -= 1
        return state

    def urn_update(self, l: int, state: ClusterState) -> ClusterState:
        """Reassign observation l by the generalized Polya urn."""
        state = self._remove_obs(l, state)
        if state.n_clusters == 0 or len(state.atoms) == 0:
            choice = 0
            log_probs = None
        else:
            log_probs = self.urn_log_probs(l, state)
            choice = sample_log_weights(log_probs, self.rng)
        if log_probs is None or choice == len(state.atoms):
            atom = sample_new_atom(self.atom_tables[l], self.data.n_nodes, self.rng)
            state.atoms.append(atom)
            state.assignments[l] = len(state.atoms) - 1
        else:
            state.assignments[l] = choice
        return state

    # -- reshuffling -------------------------------------------------------

    def _cluster_table(self, members: np.ndarray) -> EdgeCountTable:
        counts = self.rows[members].sum(axis=0, dtype=np.int64) + self.h.g0.edges
        return edge_counts_from_counts(len(members), counts)

    def _cluster_law(self, members: np.ndarray) -> ClusterLaw:
        key = tuple(sorted(int(i) for i in members))
        law = self._law_cache.get(key)
        if law is None:
            law = cluster_law(self._cluster_table(members), self.h)
            # each law can hold thousands of multi-kilobyte integers, so the
            # cache is kept small to bound the resident set of long chains
            if len(self._law_cache) > 500:
                self._law_cache.clear()
            self._law_cache[key] = law
        return law

    def reshuffle_cluster(self, k: int, state: ClusterState) -> CerAtom:
        members = state.members(k)
        n_k = len(members)
        mode = self.reshuffle_mode
        if mode == "auto":
            mode = "exact" if (n_k <= _EXACT_MAX_CLUSTER and self.m <= _EXACT_MAX_PAIRS) else "fast"
        if mode == "exact":
            law = self._cluster_law(members)
            atom = sample_cluster_atom_exact(law, self.data.n_nodes, self.rng)
        else:
            table = self._cluster_table(members)
            cur = state.atoms[k].mode.edges
            total = int(np.count_nonzero(self.rows[members] != cur[None, :]))
            total += int(np.count_nonzero(self.h.g0.edges != cur))
            atom = sample_cluster_atom_fast(table, total, self.h, self.data.n_nodes, self.rng)
        state.atoms[k] = atom
        return atom

    # -- driver ------------------------------------------------------------

    def initial_state(self) -> ClusterState:
        pooled = new_atom_table(frechet_mean(self.data), self.h.g0, self.h)
        atom = sample_new_atom(pooled, self.data.n_nodes, self.rng)
        return ClusterState(np.zeros(self.n, dtype=np.int64), [atom])

    def run(self, config: ChainConfig) -> PosteriorTrace:
        state = self.initial_state()
        kept_z = []
        kept_atoms = []
        kept_its = []
        for it in range(config.n_iter):
            order = (
                self.rng.permutation(self.n) if config.scan == "random" else range(self.n)
            )
            for l in order:
                self.urn_update(int(l), state)
            for k in range(state.n_clusters):
                self.reshuffle_cluster(k, state)
            if it >= config.burn_in and (it - config.burn_in) % config.thin == 0:
                kept_z.append(state.assignments.copy())
                kept_atoms.append(list(state.atoms))
                kept_its.append(it)
        return PosteriorTrace(
            n_nodes=self.data.n_nodes,
            n_obs=self.n,
            assignments=np.array(kept_z, dtype=np.int64),
            atoms=kept_atoms,
            hyperparams=self.h,
            iteration_ids=np.array(kept_its),
        )


def run_chain(
    data: GraphPopulation,
    h: Hyperparams,
    config: ChainConfig | None = None,
    seed: int | None = 0,
) -> PosteriorTrace:
    """Run one Gibbs chain and return the retained trace."""
    config = config or ChainConfig()
    rng = np.random.default_rng(seed)
    sampler = GibbsSampler(data, h, rng, reshuffle=config.reshuffle)
    trace = sampler.run(config)
    trace.seed = seed
    return trace


def posterior_alpha_mean(
    cluster: GraphPopulation,
    h: Hyperparams,
    rng: np.random.Generator,
    n_sweeps: int = 200,
) -> float:
    """Posterior mean of a cluster's scale via two-block conditional sweeps."""
    table = build_edge_counts(cluster, h.g0)
    n1 = table.n_k + 1
    mode_bits = (2 * table.counts >= n1).astype(np.uint8)
    rows = cluster.edge_matrix()
    draws = []
    for sweep in range(n_sweeps):
        total = int(np.count_nonzero(rows != mode_bits[None, :]))
        total += int(np.count_nonzero(h.g0.edges != mode_bits))
        alpha = tbeta_sample(TBetaParams(0.5, h.a + total, h.b + n1 * table.m - total), rng)
        mode_bits = _mode_bits_given_alpha(table, alpha, rng)
        if sweep >= n_sweeps // 2:
            draws.append(alpha)
    return float(np.mean(draws))
