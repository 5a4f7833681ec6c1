"""Command-line pipeline driver.

Five subcommands cover the pipeline: ``metrics`` scores nodes, ``split``
cuts benchmark subsets, ``analyze`` reports shift diagnostics,
``train-eval`` fits and evaluates the baseline, ``report`` aggregates
per-seed results. Stages compose through the output directory: each
command materializes any missing upstream artifact with the same code
path a fused run uses, so staged and fused invocations write
byte-identical trees.

Settings come from defaults, then an optional TOML file, then flags,
later sources winning. Every artifact embeds a hash of the resolved
configuration, and nothing in the outputs depends on wall clock, worker
count, or host thread settings.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from dataclasses import dataclass, replace
from typing import Optional

from threadpoolctl import threadpool_limits

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from graphshift import __version__
from graphshift.analysis import DEFAULT_MAX_PAIRS, build_shift_report
from graphshift.evaluation import aggregate_reports, build_report, EvalReport, write_aggregate_csv
from graphshift.graph import (
    Graph,
    GraphFormatError,
    NodeFeatures,
    NodeLabels,
    largest_connected_component,
    load_edge_list,
    load_features,
    load_labels,
)
from graphshift.metrics import (
    PageRankConfig,
    read_sigma_scores,
    SHIFT_TYPES,
    sigma_scores,
    write_sigma_scores,
)
from graphshift.model import (
    normalize_rows,
    propagate_features,
    PropagationConfig,
    TrainConfig,
    train,
)
from graphshift.splits import (
    generate_split,
    read_split,
    SplitConfig,
    write_split,
    write_split_csv,
)

DEFAULT_OUTPUT_ENV = "GRAPHSHIFT_OUTPUT_ROOT"


class ConfigError(ValueError):
    """Invalid configuration or input data; maps to exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one pipeline run."""

    edges_path: str
    features_path: Optional[str]
    labels_path: Optional[str]
    use_lcc: bool
    shifts: tuple
    seeds: tuple
    output_dir: str
    workers: int
    pagerank: PageRankConfig
    split: SplitConfig
    propagation: PropagationConfig
    train: TrainConfig
    analysis_max_pairs: int
    analysis_seed: int

    def deterministic_dict(self) -> dict:
        """Everything that can influence artifact bytes.

        ``output_dir`` and ``workers`` only steer where and how fast the
        run happens, never what it produces, so they stay out of the
        hashed identity.
        """
        return {
            "edges_path": self.edges_path,
            "features_path": self.features_path,
            "labels_path": self.labels_path,
            "use_lcc": self.use_lcc,
            "shifts": list(self.shifts),
            "seeds": list(self.seeds),
            "pagerank": {
                "alpha": self.pagerank.alpha,
                "tolerance": self.pagerank.tolerance,
                "max_iterations": self.pagerank.max_iterations,
            },
            "split": self.split.to_dict(),
            "propagation": self.propagation.to_dict(),
            "train": self.train.to_dict(),
            "analysis": {
                "max_pairs": self.analysis_max_pairs,
                "seed": self.analysis_seed,
            },
        }

    def config_hash(self) -> str:
        canonical = json.dumps(
            self.deterministic_dict(), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None


def _pick(flag_value, toml_section: dict, key: str, default):
    """Resolution order: CLI flag, then TOML, then default."""
    if flag_value is not None:
        return flag_value
    if key in toml_section:
        return toml_section[key]
    return default


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, TOML file, and flags; validate fail-fast."""
    toml = _read_toml(args.config) if args.config else {}
    dataset = toml.get("dataset", {})
    run = toml.get("run", {})
    pagerank_t = toml.get("pagerank", {})
    split_t = toml.get("split", {})
    propagation_t = toml.get("propagation", {})
    train_t = toml.get("train", {})
    analysis_t = toml.get("analysis", {})

    edges_path = _pick(args.edges, dataset, "edges", None)
    if edges_path is None:
        raise ConfigError("an edge list is required (--edges or [dataset].edges)")
    features_path = _pick(args.features, dataset, "features", None)
    labels_path = _pick(args.labels, dataset, "labels", None)
    use_lcc = bool(_pick(args.lcc or None, dataset, "use_lcc", False))

    shifts = _pick(args.shift or None, run, "shifts", ["all"])
    if isinstance(shifts, str):
        shifts = [shifts]
    if "all" in shifts:
        shifts = list(SHIFT_TYPES)
    unknown = [s for s in shifts if s not in SHIFT_TYPES]
    if unknown:
        raise ConfigError(f"unknown shift type(s): {', '.join(unknown)}")
    shifts = tuple(dict.fromkeys(shifts))  # dedupe, keep order

    seeds = _pick(args.seeds, run, "seeds", [0])
    if isinstance(seeds, str):
        try:
            seeds = [int(s) for s in seeds.split(",") if s.strip() != ""]
        except ValueError:
            raise ConfigError(f"seeds must be integers, got {seeds!r}") from None
    if not seeds:
        raise ConfigError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    seeds = tuple(int(s) for s in seeds)

    output_dir = _pick(
        args.output_dir,
        run,
        "output_dir",
        os.environ.get(DEFAULT_OUTPUT_ENV, "graphshift_out"),
    )
    workers = int(_pick(args.workers, run, "workers", 1))
    if workers < 1:
        raise ConfigError("workers must be at least 1")

    try:
        pagerank = PageRankConfig(
            alpha=float(_pick(args.alpha, pagerank_t, "alpha", 0.15)),
            tolerance=float(_pick(args.tolerance, pagerank_t, "tolerance", 1e-10)),
            max_iterations=int(
                _pick(args.max_iterations, pagerank_t, "max_iterations", 1000)
            ),
        )
        id_fraction = _pick(args.id_fraction, split_t, "id_fraction", None)
        if id_fraction is not None:
            split = SplitConfig.from_id_fraction(float(id_fraction))
        else:
            base = SplitConfig()
            split = SplitConfig(
                train_fraction=float(split_t.get("train_fraction", base.train_fraction)),
                valid_in_fraction=float(
                    split_t.get("valid_in_fraction", base.valid_in_fraction)
                ),
                test_in_fraction=float(
                    split_t.get("test_in_fraction", base.test_in_fraction)
                ),
                valid_out_fraction=float(
                    split_t.get("valid_out_fraction", base.valid_out_fraction)
                ),
                test_out_fraction=float(
                    split_t.get("test_out_fraction", base.test_out_fraction)
                ),
            )
        propagation = PropagationConfig(
            num_steps=int(_pick(args.num_steps, propagation_t, "num_steps", 2))
        )
        train_cfg = TrainConfig(
            learning_rate=float(
                _pick(args.learning_rate, train_t, "learning_rate", 3e-4)
            ),
            weight_decay=float(_pick(args.weight_decay, train_t, "weight_decay", 1e-5)),
            max_epochs=int(_pick(args.max_epochs, train_t, "max_epochs", 1000)),
            patience=int(_pick(args.patience, train_t, "patience", 100)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    analysis_max_pairs = int(
        _pick(args.max_pairs, analysis_t, "max_pairs", DEFAULT_MAX_PAIRS)
    )
    if analysis_max_pairs < 1:
        raise ConfigError("max_pairs must be positive")
    analysis_seed = int(_pick(args.analysis_seed, analysis_t, "seed", 0))

    return RunConfig(
        edges_path=str(edges_path),
        features_path=str(features_path) if features_path is not None else None,
        labels_path=str(labels_path) if labels_path is not None else None,
        use_lcc=use_lcc,
        shifts=shifts,
        seeds=seeds,
        output_dir=str(output_dir),
        workers=workers,
        pagerank=pagerank,
        split=split,
        propagation=propagation,
        train=train_cfg,
        analysis_max_pairs=analysis_max_pairs,
        analysis_seed=analysis_seed,
    )


class _Pipeline:
    """Shared state for one invocation: dataset, paths, config hash."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.hash = config.config_hash()
        self.out = config.output_dir
        self._graph = None
        self._features = None
        self._labels = None
        self._prepared = None

    # ---- dataset loading ------------------------------------------------

    def graph(self) -> Graph:
        if self._graph is None:
            self._raw_graph = load_edge_list(self.config.edges_path)
            graph = self._raw_graph
            mapping = None
            if self.config.use_lcc:
                graph, mapping = largest_connected_component(graph)
            self._graph = graph
            self._lcc_mapping = mapping
            if mapping is not None:
                self._write_lcc_mapping(mapping)
        return self._graph

    def features(self) -> NodeFeatures:
        if self._features is None:
            if self.config.features_path is None:
                raise ConfigError("this command needs node features (--features)")
            graph = self.graph()
            raw_graph_features = load_features(
                self.config.features_path, self._raw_graph_for_io()
            )
            self._features = self._restrict(raw_graph_features.matrix, NodeFeatures)
        return self._features

    def labels(self) -> NodeLabels:
        if self._labels is None:
            if self.config.labels_path is None:
                raise ConfigError("this command needs node labels (--labels)")
            raw = load_labels(self.config.labels_path, self._raw_graph_for_io())
            if self.config.use_lcc:
                kept = self._lcc_mapping >= 0
                labels = raw.labels[kept]
            else:
                labels = raw.labels
            self._labels = NodeLabels(labels=labels, num_classes=int(labels.max()) + 1)
        return self._labels

    def _raw_graph_for_io(self) -> Graph:
        # feature/label files always address the on-disk id space
        self.graph()
        return self._raw_graph

    def _restrict(self, matrix, wrapper):
        if self.config.use_lcc:
            matrix = matrix[self._lcc_mapping >= 0]
        return wrapper(matrix=matrix)

    def _write_lcc_mapping(self, mapping) -> None:
        os.makedirs(self.out, exist_ok=True)
        path = os.path.join(self.out, "lcc_mapping.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# config_hash={self.hash}\n")
            for old_id, new_id in enumerate(mapping):
                fh.write(f"{old_id},{new_id}\n")

    # ---- artifact paths -------------------------------------------------

    def metrics_csv(self, shift: str) -> str:
        return os.path.join(self.out, "metrics", f"{shift}.csv")

    def split_json(self, shift: str, seed: int) -> str:
        return os.path.join(self.out, "splits", shift, f"seed_{seed}.json")

    def analysis_json(self, shift: str, seed: int) -> str:
        return os.path.join(self.out, "analysis", shift, f"seed_{seed}.report.json")

    def model_json(self, shift: str, seed: int) -> str:
        return os.path.join(self.out, "eval", shift, f"seed_{seed}.model.json")

    def eval_json(self, shift: str, seed: int) -> str:
        return os.path.join(self.out, "eval", shift, f"seed_{seed}.report.json")

    # ---- stage logic, each materializing missing prerequisites ----------

    def write_run_config(self) -> None:
        os.makedirs(self.out, exist_ok=True)
        payload = {
            "config": self.config.deterministic_dict(),
            "config_hash": self.hash,
            "toolkit_version": __version__,
        }
        with open(os.path.join(self.out, "run_config.json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def ensure_metrics(self, shift: str):
        path = self.metrics_csv(shift)
        if os.path.exists(path):
            return read_sigma_scores(path)
        scores = sigma_scores(self.graph(), shift, self.config.pagerank)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        write_sigma_scores(scores, path, config_hash=self.hash)
        return scores

    def ensure_split(self, shift: str, seed: int):
        path = self.split_json(shift, seed)
        if os.path.exists(path):
            return read_split(path, expected_num_nodes=self.graph().num_nodes)
        scores = self.ensure_metrics(shift)
        assignment = generate_split(scores, replace(self.config.split, seed=seed))
        os.makedirs(os.path.dirname(path), exist_ok=True)
        write_split(assignment, path, config_hash=self.hash)
        write_split_csv(assignment, path[: -len(".json")] + ".csv", config_hash=self.hash)
        return assignment

    def run_analysis(self, shift: str, seed: int) -> None:
        assignment = self.ensure_split(shift, seed)
        report = build_shift_report(
            self.graph(),
            self.labels(),
            assignment,
            max_pairs=self.config.analysis_max_pairs,
            seed=self.config.analysis_seed,
        )
        path = self.analysis_json(shift, seed)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        report.write_json(path, config_hash=self.hash)

    def prepared_features(self) -> NodeFeatures:
        if self._prepared is None:
            normalized = normalize_rows(self.features())
            self._prepared = propagate_features(
                self.graph(), normalized, self.config.propagation
            )
        return self._prepared

    def run_train_eval(self, shift: str, seed: int) -> None:
        assignment = self.ensure_split(shift, seed)
        features = self.prepared_features()
        model = train(
            features,
            self.labels(),
            assignment,
            replace(self.config.train, seed=seed),
        )
        model_path = self.model_json(shift, seed)
        os.makedirs(os.path.dirname(model_path), exist_ok=True)
        model.save(model_path, config_hash=self.hash)
        report = build_report(model, features, self.labels(), assignment)
        report.write_json(self.eval_json(shift, seed), config_hash=self.hash)

    def run_report(self) -> str:
        eval_root = os.path.join(self.out, "eval")
        paths = []
        if os.path.isdir(eval_root):
            for shift in sorted(os.listdir(eval_root)):
                shift_dir = os.path.join(eval_root, shift)
                for name in sorted(os.listdir(shift_dir)):
                    if name.endswith(".report.json"):
                        paths.append(os.path.join(shift_dir, name))
        if not paths:
            raise ConfigError(f"no evaluation reports under {eval_root}")
        reports = [EvalReport.read_json(p) for p in paths]
        rows = aggregate_reports(reports)
        out_path = os.path.join(self.out, "aggregate.csv")
        write_aggregate_csv(rows, out_path, config_hash=self.hash)
        return out_path

    def map_runs(self, fn) -> None:
        """Run fn(shift, seed) over the run grid, optionally in parallel.

        Tasks only write run-scoped files, so scheduling order cannot
        change any artifact. Prerequisites shared across tasks (dataset,
        metrics, splits) are materialized sequentially first.
        """
        jobs = [(shift, seed) for shift in self.config.shifts for seed in self.config.seeds]
        for shift, seed in jobs:
            self.ensure_split(shift, seed)
        if self.config.workers == 1 or len(jobs) == 1:
            for shift, seed in jobs:
                fn(shift, seed)
            return
        with concurrent.futures.ThreadPoolExecutor(self.config.workers) as pool:
            futures = [pool.submit(fn, shift, seed) for shift, seed in jobs]
            for future in futures:
                future.result()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="graphshift",
        description="Structure-based distribution-shift benchmarks for node classification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("-c", "--config", help="TOML settings file; flags override it")
        p.add_argument("--edges", help="edge-list file (u v per line)")
        p.add_argument("--features", help="node feature CSV")
        p.add_argument("--labels", help="node label CSV")
        p.add_argument(
            "--lcc",
            action="store_true",
            default=False,
            help="restrict the dataset to its largest connected component",
        )
        p.add_argument(
            "-o",
            "--output-dir",
            help=f"artifact directory (default ${DEFAULT_OUTPUT_ENV} or ./graphshift_out)",
        )
        p.add_argument(
            "--shift",
            action="append",
            choices=list(SHIFT_TYPES) + ["all"],
            help="shift type; repeatable (default all)",
        )
        p.add_argument("--seeds", help="comma-separated split/model seeds (default 0)")
        p.add_argument("--workers", type=int, help="parallel (shift, seed) runs (default 1)")
        p.add_argument("--alpha", type=float, help="restart probability (default 0.15)")
        p.add_argument("--tolerance", type=float, help="power-iteration L1 tolerance")
        p.add_argument("--max-iterations", type=int, help="power-iteration cap")
        p.add_argument("--id-fraction", type=float, help="in-distribution share of nodes")
        p.add_argument("--num-steps", type=int, help="feature propagation steps (default 2)")
        p.add_argument("--learning-rate", type=float, help="gradient-descent step size")
        p.add_argument("--weight-decay", type=float, help="L2 penalty on weights")
        p.add_argument("--max-epochs", type=int, help="training epoch cap")
        p.add_argument("--patience", type=int, help="early-stopping patience")
        p.add_argument("--max-pairs", type=int, help="distance-histogram pair budget")
        p.add_argument("--analysis-seed", type=int, help="distance-sampling seed")

    for name, help_text in (
        ("metrics", "compute per-node sigma scores for each shift type"),
        ("split", "generate five-way benchmark splits from sigma scores"),
        ("analyze", "report class balance, degree, and distance contrasts"),
        ("train-eval", "train the baseline classifier and evaluate the shift"),
        ("report", "aggregate per-seed evaluation reports into a CSV table"),
    ):
        add_common(sub.add_parser(name, help=help_text))
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        config = resolve_config(args)
        # one global cap keeps numeric results independent of host BLAS
        # thread settings, whatever the worker count
        threadpool_limits(limits=1)
        pipeline = _Pipeline(config)
        pipeline.write_run_config()
        if args.command == "metrics":
            for shift in config.shifts:
                pipeline.ensure_metrics(shift)
                print(f"metrics: {pipeline.metrics_csv(shift)}")
        elif args.command == "split":
            for shift in config.shifts:
                for seed in config.seeds:
                    pipeline.ensure_split(shift, seed)
                    print(f"split: {pipeline.split_json(shift, seed)}")
        elif args.command == "analyze":
            pipeline.labels()  # shared read-only input for workers
            pipeline.map_runs(pipeline.run_analysis)
            for shift in config.shifts:
                for seed in config.seeds:
                    print(f"analysis: {pipeline.analysis_json(shift, seed)}")
        elif args.command == "train-eval":
            pipeline.prepared_features()  # shared read-only input for workers
            pipeline.labels()
            pipeline.map_runs(pipeline.run_train_eval)
            for shift in config.shifts:
                for seed in config.seeds:
                    print(f"eval: {pipeline.eval_json(shift, seed)}")
        elif args.command == "report":
            print(f"aggregate: {pipeline.run_report()}")
        return 0
    except (ConfigError, GraphFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # process boundary: ConvergenceError, IO, ...
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
