"""Dirichlet-process mixtures of Centered Erdős–Rényi kernels for
clustering, density estimation, and prediction over populations of
labeled binary graphs."""

from .cer import CerAtom, Hyperparams, cer_log_pmf, cer_sample, load_hyperparams
from .consensus import (
    NodeBlocking,
    block_nodes_balanced,
    block_nodes_random,
    consensus_fit,
    n_sub_diagnostic,
    restrict_population,
)
from .graphs import (
    Graph,
    GraphFormatError,
    GraphPopulation,
    frechet_mean,
    hamming,
    read_population,
    write_population,
)
from .partition import clustering_metrics, expected_vi, minimize_evi, network_summaries, vi_distance
from .predictive import (
    ClusterPredictive,
    PosteriorDensity,
    log_marginal_likelihood,
    posterior_mode_edge_prob,
    posterior_predictive_sample,
    predictive_edge_count_pmf,
    predictive_edge_prob,
    prior_edge_expectation,
    prior_predictive_sample,
)
from .sampler import ChainConfig, GibbsSampler, PosteriorTrace, run_chain
from .simstudy import MixtureTruth, gen_centroids, is_divergence, posterior_mean_pmf, sample_truth
from .special import NumericalError, TBetaParams, log_incomplete_beta, tbeta_sample
from .weights import build_edge_counts, leave_one_out_weights, weight_vector

__version__ = "0.1.0"

__all__ = [
    "CerAtom",
    "ChainConfig",
    "ClusterPredictive",
    "Graph",
    "GraphFormatError",
    "GraphPopulation",
    "GibbsSampler",
    "Hyperparams",
    "MixtureTruth",
    "NodeBlocking",
    "NumericalError",
    "PosteriorDensity",
    "PosteriorTrace",
    "TBetaParams",
    "block_nodes_balanced",
    "block_nodes_random",
    "build_edge_counts",
    "cer_log_pmf",
    "cer_sample",
    "clustering_metrics",
    "consensus_fit",
    "expected_vi",
    "frechet_mean",
    "gen_centroids",
    "hamming",
    "is_divergence",
    "leave_one_out_weights",
    "load_hyperparams",
    "log_incomplete_beta",
    "log_marginal_likelihood",
    "minimize_evi",
    "n_sub_diagnostic",
    "network_summaries",
    "posterior_mean_pmf",
    "posterior_mode_edge_prob",
    "posterior_predictive_sample",
    "predictive_edge_count_pmf",
    "predictive_edge_prob",
    "prior_edge_expectation",
    "prior_predictive_sample",
    "read_population",
    "restrict_population",
    "run_chain",
    "sample_truth",
    "tbeta_sample",
    "vi_distance",
    "weight_vector",
    "write_population",
]
