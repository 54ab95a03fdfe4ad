"""Exact combinatorial weights of the cluster-label reshuffling step.

For a cluster with members D and prior mode g0, write n_ij for the number
of graphs among the members plus g0 that contain the edge {i, j}.  A
candidate mode graph picks, per edge, either the minority or the majority
side, contributing min(n_ij, n+1-n_ij) or max(n_ij, n+1-n_ij) to its total
Hamming distance from the cluster.  The number of candidate modes at each
total distance is therefore the coefficient vector of a product of
two-term polynomials, one per edge, which collapses to one binomial
convolution per edge-frequency class.  Coefficients are kept as exact
Python integers and only converted to logs at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph, GraphPopulation


@dataclass
class EdgeCountTable:
    """Per-cluster edge counts (prior mode included) and derived summaries."""

    n_k: int                 # number of member graphs (g0 excluded)
    m: int                   # number of node pairs M
    counts: np.ndarray       # per-edge counts n_ij, each in 0..n_k+1
    histogram: np.ndarray    # m_h = #pairs with count h, h = 0..n_k+1
    d_star: int              # sum of per-edge minority sides
    big_d_star: int          # sum of per-edge majority sides

    @property
    def span(self) -> int:
        """Length of the feasible distance range D* - d*."""
        return self.big_d_star - self.d_star

    def folded_classes(self) -> list[tuple[int, int, int]]:
        """(lo, hi, multiplicity) per folded frequency class with lo = min(h, n+1-h)."""
        n1 = self.n_k + 1
        classes = []
        for lo in range(n1 // 2 + 1):
            hi = n1 - lo
            if lo == hi:
                mult = int(self.histogram[lo])
            else:
                mult = int(self.histogram[lo]) + (int(self.histogram[hi]) if hi <= n1 else 0)
            if mult > 0:
                classes.append((lo, hi, mult))
        return classes


@dataclass
class WeightVector:
    """Log reshuffling weights log w_r for r = 0..D*-d* plus exact integers."""

    d_star: int
    big_d_star: int
    log_w: np.ndarray
    coeffs: list = field(repr=False)  # exact big-int coefficients


def build_edge_counts(cluster: GraphPopulation | None, g0: Graph) -> EdgeCountTable:
    """Edge-count table for a cluster of graphs with the prior mode counted in.

    ``cluster`` may be None for the empty cluster (only g0 contributes).
    """
    if cluster is None:
        counts = g0.edges.astype(np.int64)
        n_k = 0
    else:
        if cluster.n_nodes != g0.n_nodes:
            raise ValueError("cluster and prior mode must share the node count")
        counts = cluster.edge_matrix().sum(axis=0, dtype=np.int64) + g0.edges
        n_k = len(cluster)
    return edge_counts_from_counts(n_k, counts)


def edge_counts_from_counts(n_k: int, counts: np.ndarray) -> EdgeCountTable:
    """Build a table directly from per-edge counts (g0 already included)."""
    counts = np.asarray(counts, dtype=np.int64)
    n1 = n_k + 1
    if counts.min(initial=0) < 0 or counts.max(initial=0) > n1:
        raise ValueError(f"per-edge counts must lie in 0..{n1}")
    m = counts.shape[0]
    histogram = np.bincount(counts, minlength=n1 + 1)
    mins = np.minimum(counts, n1 - counts)
    d_star = int(mins.sum())
    big_d_star = n1 * m - d_star
    return EdgeCountTable(
        n_k=n_k, m=m, counts=counts, histogram=histogram, d_star=d_star, big_d_star=big_d_star
    )


def _convolve_trunc(p: list, step: int, binoms: list, limit: int) -> list:
    """Multiply coefficient list p by sum_s binoms[s] * x^(s*step), truncated."""
    out = [0] * min(limit, len(p) + step * (len(binoms) - 1))
    for s, c in enumerate(binoms):
        off = s * step
        if off >= len(out):
            break
        top = min(len(p), len(out) - off)
        for i in range(top):
            out[off + i] += c * p[i]
    return out


def _class_polynomials(table: EdgeCountTable) -> list[tuple[int, list]]:
    """(exponent step, coefficient list) per folded class, relative to d*."""
    polys = []
    for lo, hi, mult in table.folded_classes():
        if lo == hi:
            # middle class of an odd cluster size: both sides contribute equally
            polys.append((0, [1 << mult]))
        else:
            step = hi - lo
            polys.append((step, [math.comb(mult, s) for s in range(mult + 1)]))
    return polys


def weight_vector(table: EdgeCountTable) -> WeightVector:
    """Exact distance-count weights via polynomial convolution.

    Entry r counts the candidate modes whose total Hamming distance to the
    cluster (prior mode included) equals d* + r.  The vector is symmetric
    about its midpoint, so only the lower half is convolved and the rest
    is mirrored.
    """
    span = table.span
    half = span // 2 + 1
    coeffs = [1]
    for step, binoms in _class_polynomials(table):
        if step == 0:
            coeffs = [binoms[0] * c for c in coeffs]
        else:
            coeffs = _convolve_trunc(coeffs, step, binoms, half)
    full = [0] * (span + 1)
    for r in range(len(coeffs)):
        full[r] = coeffs[r]
        full[span - r] = coeffs[r]
    log_w = np.array([math.log(c) if c > 0 else -math.inf for c in full])
    return WeightVector(table.d_star, table.big_d_star, log_w, full)


def single_obs_weights(d_l: int, m: int) -> WeightVector:
    """Weights for a single-observation cluster: w_r = 2^d * C(M-d, r)."""
    if not (0 <= d_l <= m):
        raise ValueError(f"distance {d_l} not in 0..{m}")
    coeffs = [(1 << d_l) * math.comb(m - d_l, r) for r in range(m - d_l + 1)]
    log_w = np.array([math.log(c) for c in coeffs])
    return WeightVector(d_l, 2 * m - d_l, log_w, coeffs)


def leave_one_out_weights(table: EdgeCountTable, full: WeightVector, count: int) -> WeightVector:
    """Weights over all node pairs except one carrying per-edge count ``count``.

    Obtained by exact division of the full generating function by that
    pair's two-term factor.  The result is indexed from
    t* = d* - min(count, n+1-count).
    """
    n1 = table.n_k + 1
    lo = min(count, n1 - count)
    hi = n1 - lo
    p = full.coeffs
    if lo == hi:
        q = [c >> 1 for c in p]
        if any((c & 1) for c in p):
            raise ValueError("full weight polynomial is not divisible by the middle-class factor")
    else:
        g = hi - lo
        q = [0] * (len(p) - g)
        for i in range(len(q)):
            q[i] = p[i] - (q[i - g] if i >= g else 0)
        # trailing identities p[i] == q[i - g] for i >= len(q) hold by symmetry
    t_star = table.d_star - lo
    big_t_star = table.big_d_star - hi
    log_w = np.array([math.log(c) if c > 0 else -math.inf for c in q])
    return WeightVector(t_star, big_t_star, log_w, q)


def feasible_r_mask(table: EdgeCountTable) -> np.ndarray:
    """Necessary-feasibility mask from the gcd divisibility condition.

    Entry r is False when the linear Diophantine system that defines the
    weight at distance d* + r provably has no solution; the corresponding
    weight is zero.
    """
    n_k = table.n_k
    n1 = n_k + 1
    half = n_k // 2
    e = [n1 - 2 * h for h in range(half + 1)]
    g = 0
    for val in e:
        g = math.gcd(g, val)
    hist = table.histogram
    folded = [int(hist[h]) + (int(hist[n1 - h]) if h != n1 - h else 0) for h in range(half + 1)]
    base = sum(h * folded[h] for h in range(half + 1))
    if n_k % 2 == 1:
        base += (half + 1) * int(hist[half + 1])
    span = table.span
    mask = np.ones(span + 1, dtype=bool)
    if g > 1:
        for r in range(span + 1):
            if (r + table.d_star - base) % g != 0:
                mask[r] = False
    return mask
