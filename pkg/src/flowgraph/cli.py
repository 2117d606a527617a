"""Command-line pipeline orchestration.

Subcommands cover the two phases end to end:

    synth     write a seeded synthetic flow CSV
    graph     flow CSV -> per-snapshot behaviour graph files
    cluster   graph files -> clustered (super-node) graph files + assignment CSVs
    train     clustered graphs -> model file + loss trace + test-split metrics
    report    population series + clustering-effects table
    run-all   graph, cluster, train, report in order

Stages communicate through the documented on-disk text formats, so any
stage can be re-run or inspected in isolation. Options come from an
optional JSON config file (--config) overridden by command-line flags.
The FLOWGRAPH_LOG environment variable sets the log level.

Layout under --out-dir:

    flows.csv                         (synth)
    graphs/snapshot_XXXXX.txt         (graph)
    clusters/<tag>/snapshot_XXXXX.txt (cluster; tag like dbscan_eps0.2)
    assignments/<tag>/snapshot_XXXXX.csv
    model.txt, loss_trace.csv, metrics.csv (train)
    reports/<dataset>_<algorithm>_<eps>.csv, <dataset>_effects.csv (report)
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import behavior_graph, report, spectral_gcn, synth
from .density_cluster import ClusterParams, cluster_snapshot, write_assignment_csv, write_clustered_text, read_clustered_text
from .errors import FlowgraphError, NonPositiveParameter, NonPositiveWidth
from .flow_model import parse_flows, write_flows
from .temporal import dissect

log = logging.getLogger("flowgraph")

_VARIANT_BY_FLAG = {"gcn": spectral_gcn.VARIANT_RENORMALIZED,
                    "cheb": spectral_gcn.VARIANT_CHEBYSHEV}
_DEFAULT_K = {"gcn": 1, "cheb": 3}


@dataclass
class PipelineConfig:
    input: str | None = None
    schema: str = "synthetic"
    on_malformed: str = "abort"
    out_dir: str = "out"
    dataset: str | None = None  # defaults to the input file stem
    width: float = 600.0
    algorithm: str = "dbscan"
    eps: float = 0.5
    min_pts: int = 2
    min_cluster_size: int = 5
    variant: str = "gcn"  # gcn = first-order renormalized, cheb = chebyshev
    k: int | None = None  # defaults per variant (gcn: 1, cheb: 3)
    hidden: int = 16
    learning_rate: float = 0.01
    epochs: int = 200
    train_fraction: float = 0.7
    weighted_adjacency: bool = False
    seed: int = 0
    jobs: int = 1
    synth: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.width <= 0:
            raise NonPositiveWidth(f"snapshot width must be > 0, got {self.width}")
        if self.jobs < 1:
            raise NonPositiveParameter(f"jobs must be >= 1, got {self.jobs}")
        if self.variant not in _VARIANT_BY_FLAG:
            raise ValueError(f"variant must be one of {sorted(_VARIANT_BY_FLAG)}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")

    @property
    def dataset_name(self) -> str:
        if self.dataset:
            return self.dataset
        if self.input:
            return Path(self.input).stem
        return "synthetic"

    def cluster_params(self) -> ClusterParams:
        if self.algorithm in ("dbscan", "optics") and self.eps <= 0:
            raise NonPositiveParameter(f"eps must be > 0, got {self.eps}")
        if self.min_pts <= 0:
            raise NonPositiveParameter(f"min_pts must be > 0, got {self.min_pts}")
        return ClusterParams(algorithm=self.algorithm, eps=self.eps,
                             min_pts=self.min_pts,
                             min_cluster_size=self.min_cluster_size)

    def train_config(self) -> spectral_gcn.TrainConfig:
        k = self.k if self.k is not None else _DEFAULT_K[self.variant]
        return spectral_gcn.TrainConfig(
            variant=_VARIANT_BY_FLAG[self.variant], k=k, hidden=self.hidden,
            learning_rate=self.learning_rate, epochs=self.epochs,
            seed=self.seed, weighted_adjacency=self.weighted_adjacency)

    def synth_config(self) -> synth.SynthConfig:
        kwargs = dict(self.synth)
        kwargs.setdefault("seed", self.seed)
        return synth.SynthConfig(**kwargs)


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults <- JSON config file <- explicit command-line flags."""
    values: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        known = {f.name for f in dataclasses.fields(PipelineConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in ("input", "schema", "on_malformed", "out_dir", "width",
                 "algorithm", "eps", "min_pts", "min_cluster_size",
                 "variant", "k", "seed", "jobs"):
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return PipelineConfig(**values)


def _out(config: PipelineConfig, *parts: str) -> Path:
    path = Path(config.out_dir).joinpath(*parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _require_input(config: PipelineConfig) -> str:
    if not config.input:
        raise ValueError("no input file; pass --input or set it in the config")
    return config.input


def cmd_synth(config: PipelineConfig) -> Path:
    records = synth.generate(config.synth_config())
    path = _out(config, "flows.csv")
    write_flows(path, records)
    log.info("synth: %d flows -> %s", len(records), path)
    return path


def _build_graph_task(item):
    snapshot, flows, path = item
    graph = behavior_graph.build_graph(flows, snapshot=snapshot)
    behavior_graph.write_graph_text(path, graph)
    return path


def cmd_graph(config: PipelineConfig) -> list[Path]:
    result = parse_flows(_require_input(config), schema=config.schema,
                         on_malformed=config.on_malformed)
    if result.skipped_rows:
        log.warning("graph: skipped %d malformed rows", result.skipped_rows)
    buckets = dissect(result.records, config.width)
    tasks = [(snapshot, flows, _out(config, "graphs", f"snapshot_{snapshot.index:05d}.txt"))
             for snapshot, flows in buckets.items()]
    paths = _run_tasks(_build_graph_task, tasks, config.jobs)
    log.info("graph: %d snapshots -> %s", len(paths), Path(config.out_dir) / "graphs")
    return paths


def _graph_files(config: PipelineConfig) -> list[Path]:
    files = sorted(Path(config.out_dir).glob("graphs/snapshot_*.txt"))
    if not files:
        raise FileNotFoundError(
            f"no graph files under {config.out_dir}/graphs; run the graph stage first")
    return files


def _cluster_task(item):
    graph_path, params, clustered_path, assignment_path = item
    graph = behavior_graph.read_graph_text(graph_path)
    cluster_result, clustered = cluster_snapshot(graph, params)
    write_clustered_text(clustered_path, clustered)
    write_assignment_csv(assignment_path, cluster_result)
    return clustered_path


def cmd_cluster(config: PipelineConfig) -> list[Path]:
    params = config.cluster_params()
    tag = params.tag()
    tasks = []
    for graph_path in _graph_files(config):
        stem = graph_path.stem
        tasks.append((graph_path, params,
                      _out(config, "clusters", tag, f"{stem}.txt"),
                      _out(config, "assignments", tag, f"{stem}.csv")))
    paths = _run_tasks(_cluster_task, tasks, config.jobs)
    log.info("cluster: %d snapshots -> %s", len(paths),
             Path(config.out_dir) / "clusters" / tag)
    return paths


def _clustered_files(config: PipelineConfig, tag: str) -> list[Path]:
    files = sorted(Path(config.out_dir).glob(f"clusters/{tag}/snapshot_*.txt"))
    if not files:
        raise FileNotFoundError(
            f"no clustered graphs under {config.out_dir}/clusters/{tag}; "
            "run the cluster stage first")
    return files


def _temporal_split(graphs, train_fraction: float):
    ordered = sorted(graphs, key=lambda g: g.snapshot.index)
    cut = int(len(ordered) * train_fraction)
    train = [g for g in ordered[:cut] if g.n_nodes > 0]
    test = [g for g in ordered[cut:] if g.n_nodes > 0]
    return train, test


def cmd_train(config: PipelineConfig) -> Path:
    tag = config.cluster_params().tag()
    graphs = [read_clustered_text(p) for p in _clustered_files(config, tag)]
    train_graphs, test_graphs = _temporal_split(graphs, config.train_fraction)
    if not train_graphs:
        raise ValueError("temporal split left no non-empty training snapshots")
    model, losses = spectral_gcn.train(train_graphs, config.train_config())
    model_path = _out(config, "model.txt")
    spectral_gcn.save_model(model_path, model)
    spectral_gcn.write_loss_trace_csv(_out(config, "loss_trace.csv"), losses)

    metrics_path = _out(config, "metrics.csv")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        fh.write("snapshot,accuracy,precision_normal,precision_attack,"
                 "recall_normal,recall_attack,balanced_accuracy,n_nodes\n")
        for g in test_graphs:
            m = spectral_gcn.evaluate(model, [g],
                                      weighted=config.weighted_adjacency)
            fh.write(f"{g.snapshot.index},{m.accuracy!r},{m.precision[0]!r},"
                     f"{m.precision[1]!r},{m.recall[0]!r},{m.recall[1]!r},"
                     f"{m.balanced_accuracy!r},{m.n_nodes}\n")
        if test_graphs:
            m = spectral_gcn.evaluate(model, test_graphs,
                                      weighted=config.weighted_adjacency)
            fh.write(f"union,{m.accuracy!r},{m.precision[0]!r},{m.precision[1]!r},"
                     f"{m.recall[0]!r},{m.recall[1]!r},{m.balanced_accuracy!r},"
                     f"{m.n_nodes}\n")
        else:
            log.warning("train: temporal split left no test snapshots")
    log.info("train: %d train / %d test snapshots, final loss %s -> %s",
             len(train_graphs), len(test_graphs),
             losses[-1] if losses else "n/a", model_path)
    return model_path


def _tag_to_method_eps(tag: str) -> tuple[str, float | None]:
    if "_eps" in tag:
        method, eps_text = tag.split("_eps", 1)
        return method, float(eps_text)
    return tag, None


def cmd_report(config: PipelineConfig) -> list[Path]:
    params = config.cluster_params()
    tag = params.tag()
    graphs = [behavior_graph.read_graph_text(p) for p in _graph_files(config)]
    clustered = [read_clustered_text(p) for p in _clustered_files(config, tag)]
    rows = report.population_series(graphs, clustered)
    eps = None if config.algorithm == "hdbscan" else config.eps
    series_path = _out(config, "reports",
                       report.run_filename(config.dataset_name, config.algorithm, eps))
    report.write_population_csv(series_path, rows)

    runs = []
    for tag_dir in sorted(Path(config.out_dir).glob("clusters/*")):
        method, run_eps = _tag_to_method_eps(tag_dir.name)
        run_graphs = [read_clustered_text(p)
                      for p in sorted(tag_dir.glob("snapshot_*.txt"))]
        runs.append((method, run_eps, run_graphs))
    effects_path = _out(config, "reports", f"{config.dataset_name}_effects.csv")
    report.write_effects_csv(effects_path, report.clustering_effects_table(runs))
    log.info("report: %s, %s", series_path, effects_path)
    return [series_path, effects_path]


def cmd_run_all(config: PipelineConfig) -> None:
    cmd_graph(config)
    cmd_cluster(config)
    cmd_train(config)
    cmd_report(config)


def _run_tasks(task, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [task(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, items))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowgraph",
        description="Behavioural entity graphs from flow captures: "
                    "snapshot graphs, density clustering, spectral GCN.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--input", help="flow CSV path")
    common.add_argument("--schema", choices=["synthetic", "unsw15"])
    common.add_argument("--malformed", dest="on_malformed", choices=["abort", "skip"],
                        help="whether a malformed CSV row aborts or is skipped")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--width", type=float, help="snapshot width in seconds")
    common.add_argument("--algorithm", choices=["dbscan", "optics", "hdbscan"])
    common.add_argument("--eps", type=float)
    common.add_argument("--min-pts", dest="min_pts", type=int)
    common.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    common.add_argument("--variant", choices=["gcn", "cheb"])
    common.add_argument("--k", type=int, help="chebyshev polynomial order")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="parallel snapshot workers")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("synth", "generate a labeled synthetic flow CSV"),
            ("graph", "build per-snapshot behaviour graphs from a flow CSV"),
            ("cluster", "cluster normal nodes and aggregate super-nodes"),
            ("train", "train the node classifier on clustered graphs"),
            ("report", "emit population series and clustering-effects table"),
            ("run-all", "graph, cluster, train and report in sequence")):
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "graph": cmd_graph,
    "cluster": cmd_cluster,
    "train": cmd_train,
    "report": cmd_report,
    "run-all": cmd_run_all,
}


def main(argv: list[str] | None = None) -> int:
    level = getattr(logging, os.environ.get("FLOWGRAPH_LOG", "WARNING").upper(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args)
        _COMMANDS[args.command](config)
    except (FlowgraphError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"flowgraph {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
