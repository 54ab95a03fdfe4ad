"""Centered Erdos-Renyi kernel and the base measure over (mode, scale) atoms.

The CER distribution over graphs on a fixed node set has pmf
alpha^d * (1-alpha)^(M-d), where d is the Hamming distance to the mode
graph.  Scales are restricted to (0, 1/2) so that the distribution is
unimodal at the mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, GraphPopulation, frechet_mean, hamming, read_population
from .special import TBetaParams, tbeta_sample


@dataclass(frozen=True)
class CerAtom:
    """Mode graph plus scale-of-variation parameter in (0, 1/2)."""

    mode: Graph
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5):
            raise ValueError(f"alpha={self.alpha} not in (0, 1/2)")


@dataclass(frozen=True)
class Hyperparams:
    """Base-measure shapes (a, b), DP concentration c, and prior mode g0."""

    a: float
    b: float
    c: float
    g0: Graph

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0 or self.c <= 0:
            raise ValueError("a, b, c must all be positive")


def cer_log_pmf(g: Graph, atom: CerAtom) -> float:
    """Log pmf of the CER distribution at graph ``g``."""
    d = hamming(g, atom.mode)
    m = g.m
    return d * np.log(atom.alpha) + (m - d) * np.log1p(-atom.alpha)


def cer_log_pmf_at_distance(d: int, m: int, alpha: float) -> float:
    """Log CER pmf as a function of the Hamming distance to the mode."""
    return d * np.log(alpha) + (m - d) * np.log1p(-alpha)


def cer_sample(atom: CerAtom, rng: np.random.Generator) -> Graph:
    """Draw a graph by flipping each mode edge bit independently w.p. alpha."""
    flips = rng.random(atom.mode.m) < atom.alpha
    return Graph(atom.mode.n_nodes, np.bitwise_xor(atom.mode.edges, flips.astype(np.uint8)))


def base_measure_sample(h: Hyperparams, rng: np.random.Generator) -> CerAtom:
    """Draw an atom from the base measure: alpha ~ TBeta(1/2; a, b), mode ~ CER(g0, alpha)."""
    alpha = tbeta_sample(TBetaParams(0.5, h.a, h.b), rng)
    mode = cer_sample(CerAtom(h.g0, alpha), rng)
    return CerAtom(mode, alpha)


def load_hyperparams(path, data: GraphPopulation | None = None) -> Hyperparams:
    """Read hyperparameters from a JSON or key=value config file.

    Recognized keys: a, b, c, g0.  ``g0`` is either a path to a single-graph
    adjacency-text file or the string "empirical", which sets g0 to the
    Frechet mean of ``data`` (empirical Bayes).
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError:
        cfg = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {line!r}: expected key=value")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return hyperparams_from_dict(cfg, data)


def hyperparams_from_dict(cfg: dict, data: GraphPopulation | None = None) -> Hyperparams:
    missing = {"a", "b", "c", "g0"} - set(cfg)
    if missing:
        raise ValueError(f"config missing keys: {sorted(missing)}")
    g0_spec = cfg["g0"]
    if g0_spec == "empirical":
        if data is None:
            raise ValueError("g0='empirical' requires a dataset")
        g0 = frechet_mean(data)
    elif isinstance(g0_spec, Graph):
        g0 = g0_spec
    else:
        g0 = read_population(g0_spec, "adjacency-text")[0]
    return Hyperparams(a=float(cfg["a"]), b=float(cfg["b"]), c=float(cfg["c"]), g0=g0)
