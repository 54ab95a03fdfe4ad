"""Command-line interface.

Subcommands: fit | cluster | predict | simulate | consensus | metrics.
Every command is deterministic given its flags and ``--seed``, writes
UTF-8 CSV/JSON outputs into ``--out``, and records a ``manifest.json``
that echoes the full invocation.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cer import Hyperparams, hyperparams_from_dict, load_hyperparams
from .consensus import consensus_fit, n_sub_diagnostic
from .graphs import (
    GraphFormatError,
    GraphPopulation,
    index_pair,
    read_population,
    write_population,
)
from .partition import clustering_metrics, minimize_evi, network_summaries
from .predictive import ClusterPredictive, posterior_predictive_sample
from .sampler import ChainConfig, PosteriorTrace, run_chain
from .simstudy import SCENARIO_SCALES, MixtureTruth, sample_truth
from .special import NumericalError

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write_manifest(out: Path, args: argparse.Namespace, started: float) -> None:
    payload = {
        "tool": "cermix",
        "version": __version__,
        "command": args.command,
        "arguments": {k: v for k, v in vars(args).items() if k != "command"},
        "elapsed_seconds": round(time.time() - started, 3),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def _load_hyperparams(args, data: GraphPopulation | None) -> Hyperparams:
    if args.config:
        return load_hyperparams(args.config, data)
    return hyperparams_from_dict({"a": args.a, "b": args.b, "c": args.c, "g0": args.g0}, data)


def _read_labels(path) -> np.ndarray:
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            labels.append(int(line.split(",")[-1]))
    if not labels:
        raise ValueError(f"no labels found in {path}")
    return np.array(labels, dtype=np.int64)


def _write_labels(path, labels: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for z in labels:
            fh.write(f"{int(z)}\n")


def _chain_config(args) -> ChainConfig:
    return ChainConfig(
        n_iter=args.iters,
        burn_in=args.burn_in,
        thin=args.thin,
        reshuffle=args.reshuffle,
        scan=getattr(args, "scan", "fixed"),
    )


def _add_data_flags(p):
    p.add_argument("--data", required=True, help="graph population file")
    p.add_argument("--format", default="adjacency-text", choices=("adjacency-text", "edge-list"))


def _add_hyper_flags(p):
    p.add_argument("--config", help="hyperparameter file (JSON or key=value)")
    p.add_argument("--a", type=float, default=1.0, help="first shape of the scale prior")
    p.add_argument("--b", type=float, default=1.0, help="second shape of the scale prior")
    p.add_argument("--c", type=float, default=1.0, help="concentration parameter")
    p.add_argument(
        "--g0", default="empirical",
        help="prior mode: 'empirical' (Fréchet mean of the data) or a graph file",
    )


def _add_chain_flags(p):
    p.add_argument("--iters", type=int, default=1200)
    p.add_argument("--burn-in", type=int, default=200, dest="burn_in")
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--reshuffle", default="auto", choices=("exact", "fast", "auto"))
    p.add_argument("--scan", default="fixed", choices=("fixed", "random"))


def build_parser() -> _Parser:
    parser = _Parser(prog="cermix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cermix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="run one Gibbs chain and write the trace")
    _add_data_flags(p)
    _add_hyper_flags(p)
    _add_chain_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("cluster", help="point-estimate partition from a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--atoms", required=True)
    p.add_argument("--truth", help="optional reference labels, one per line")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="per-cluster predictive tables and samples")
    _add_data_flags(p)
    _add_hyper_flags(p)
    p.add_argument("--trace", required=True)
    p.add_argument("--atoms", required=True)
    p.add_argument("--m", type=int, default=1, help="horizon for the edge-count pmf")
    p.add_argument("--samples", type=int, default=0, help="posterior predictive graph draws")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic benchmark dataset")
    p.add_argument("--scenario", required=True, choices=sorted(SCENARIO_SCALES))
    p.add_argument("--n-nodes", type=int, required=True, dest="n_nodes")
    p.add_argument("--n", type=int, required=True, help="number of graphs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("consensus", help="blocked consensus fit for large node counts")
    _add_data_flags(p)
    _add_hyper_flags(p)
    _add_chain_flags(p)
    p.add_argument("--n-sub", type=int, required=True, dest="n_sub")
    p.add_argument("--blocking", default="random", choices=("spatial", "random"))
    p.add_argument("--coords", help="per-node 'x y z' coordinate file (spatial blocking)")
    p.add_argument("--n-sub-grid", dest="n_sub_grid",
                   help="comma-separated grid for the block-size diagnostic")
    p.add_argument("--truth", help="reference labels for the diagnostic metrics")
    p.add_argument("--workers", type=int, default=-1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("metrics", help="clustering metrics and network summaries")
    p.add_argument("--labels", required=True)
    p.add_argument("--truth")
    p.add_argument("--data")
    p.add_argument("--format", default="adjacency-text", choices=("adjacency-text", "edge-list"))
    p.add_argument("--out", required=True)

    return parser


# ---------------------------------------------------------------------------
# Command bodies.
# ---------------------------------------------------------------------------


def cmd_fit(args, out: Path) -> None:
    data = read_population(args.data, args.format)
    h = _load_hyperparams(args, data)
    trace = run_chain(data, h, _chain_config(args), seed=args.seed)
    trace.save(out / "trace.csv", out / "atoms.csv")
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "n_obs": trace.n_obs,
                "n_nodes": trace.n_nodes,
                "retained_iterations": len(trace),
                "mean_clusters": float(trace.n_clusters().mean()),
            },
            fh, indent=2,
        )
        fh.write("\n")


def cmd_cluster(args, out: Path) -> None:
    trace = PosteriorTrace.load(args.trace, args.atoms)
    labels = minimize_evi(trace.assignments, seed=args.seed)
    _write_labels(out / "partition.csv", labels)
    if args.truth:
        truth = _read_labels(args.truth)
        with open(out / "metrics.json", "w", encoding="utf-8") as fh:
            json.dump(clustering_metrics(labels, truth), fh, indent=2)
            fh.write("\n")


def cmd_predict(args, out: Path) -> None:
    data = read_population(args.data, args.format)
    h = _load_hyperparams(args, data)
    trace = PosteriorTrace.load(args.trace, args.atoms)
    if trace.n_obs != len(data):
        raise ValueError("trace and data disagree on the number of graphs")
    rng = np.random.default_rng(args.seed)
    labels = minimize_evi(trace.assignments, seed=args.seed)
    _write_labels(out / "partition.csv", labels)

    with open(out / "edge_predictions.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["cluster", "node_u", "node_v", "p_edge", "p_mode"]
        header += [f"p_count_{j}" for j in range(args.m + 1)]
        writer.writerow(header)
        for k in range(int(labels.max()) + 1):
            members = np.flatnonzero(labels == k)
            sub = GraphPopulation(data.n_nodes, [data[i] for i in members])
            cp = ClusterPredictive(sub, h)
            p_edge = cp.edge_probabilities()
            p_mode = cp.mode_edge_probabilities()
            pmf = cp.edge_count_pmf(args.m)
            for idx in range(data[0].m):
                u, v = index_pair(idx)
                writer.writerow(
                    [k + 1, u + 1, v + 1, repr(float(p_edge[idx])), repr(float(p_mode[idx]))]
                    + [repr(float(x)) for x in pmf[idx]]
                )

    if args.samples > 0:
        draws = posterior_predictive_sample(trace, h, rng, n_draws=args.samples)
        write_population(draws, out / "predictive_samples.txt", args.format)
        with open(out / "predictive_checks.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["source", "graph", "density", "transitivity",
                            "average_clustering", "average_path_length"])
            for src, pop in (("observed", data), ("predictive", draws)):
                for i, g in enumerate(pop.graphs, start=1):
                    s = network_summaries(g)
                    writer.writerow([src, i, s["density"], s["transitivity"],
                                    s["average_clustering"], s["average_path_length"]])


def cmd_simulate(args, out: Path) -> None:
    truth = MixtureTruth.from_scenario(args.scenario, args.n_nodes, seed=args.seed)
    rng = np.random.default_rng(args.seed + 1)
    data, labels = sample_truth(truth, args.n, rng)
    write_population(data, out / "data.txt", "adjacency-text")
    write_population(
        GraphPopulation(args.n_nodes, truth.centroids), out / "centroids.txt", "adjacency-text"
    )
    _write_labels(out / "labels.csv", labels)
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump({"scenario": args.scenario, "scales": list(truth.scales)}, fh, indent=2)
        fh.write("\n")


def cmd_consensus(args, out: Path) -> None:
    data = read_population(args.data, args.format)
    coords = None
    if args.blocking == "spatial":
        if not args.coords:
            raise ValueError("--blocking spatial requires --coords")
        coords = np.loadtxt(args.coords, ndmin=2)
        if coords.shape[0] != data.n_nodes:
            raise ValueError("coordinate rows must match the node count")
    h = _load_hyperparams(args, data)
    result = consensus_fit(
        data, h, args.n_sub, _chain_config(args), seed=args.seed,
        coords=coords, n_jobs=args.workers,
    )
    _write_labels(out / "partition.csv", result.labels)
    with open(out / "blocking.csv", "w", encoding="utf-8") as fh:
        fh.write("node,block\n")
        for i, b in enumerate(result.blocking.block_ids, start=1):
            fh.write(f"{i},{int(b) + 1}\n")
    if args.n_sub_grid:
        grid = [int(x) for x in args.n_sub_grid.split(",")]
        reference = _read_labels(args.truth) if args.truth else None
        rows = n_sub_diagnostic(
            data, grid, reference=reference, config=_chain_config(args),
            seed=args.seed, coords=coords,
        )
        with open(out / "n_sub_diagnostic.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)


def cmd_metrics(args, out: Path) -> None:
    labels = _read_labels(args.labels)
    payload = {}
    if args.truth:
        payload["clustering"] = clustering_metrics(labels, _read_labels(args.truth))
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if args.data:
        data = read_population(args.data, args.format)
        with open(out / "network_summaries.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["graph", "density", "transitivity",
                            "average_clustering", "average_path_length"])
            for i, g in enumerate(data.graphs, start=1):
                s = network_summaries(g)
                writer.writerow([i, s["density"], s["transitivity"],
                                s["average_clustering"], s["average_path_length"]])


_COMMANDS = {
    "fit": cmd_fit,
    "cluster": cmd_cluster,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "consensus": cmd_consensus,
    "metrics": cmd_metrics,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](args, out)
        _write_manifest(out, args, started)
    except (GraphFormatError, FileNotFoundError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cermix: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"cermix: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
