"""Benchmark orchestration: run methods over a noise grid and render tables.

A grid cell is one (method, noise level, seed) triple.  Operators are built
once per experiment and shared read-only across cells; the feature-propagation
step of the hgnn-proposed method does not depend on labels, so it also runs
once.  Each cell's seed drives both the noise injection and, for the neural
methods, the parameter initialization.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import hypergraph as hg
from .datasets import (ImageDataset, load_idx_dataset, load_usps_dataset,
                       stratified_subsample, synthetic_blobs)
from .labels import accuracy, decode_predictions, encode_labels, inject_noise
from .network import TrainConfig, predict, train
from .pca import pca_fit, pca_transform
from .propagation import PropagationConfig, propagate_features, propagate_labels

METHODS = ("graph-ssl", "hypergraph-ssl", "gcn", "hgnn", "hgnn-proposed")

DEFAULT_PCA_DIMS = {"mnist": 50, "usps": 50, "fashion": 300, "synthetic": None}

DATA_DIR_ENV = "HGSSL_DATA_DIR"
WORKERS_ENV = "HGSSL_WORKERS"

_IDX_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}
_USPS_FILES = {"train_path": "zip.train", "test_path": "zip.test"}

CSV_HEADER = "dataset,method,noise_level,seed,accuracy,wall_time_s,pca"


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 300
    classes: int = 3
    dim: int = 10
    spread: float = 0.1
    seed: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    paths: dict = field(default_factory=dict)
    methods: tuple = METHODS
    noise_levels: tuple = (0.0, 0.15, 0.30, 0.45)
    seeds: tuple = (0, 1, 2)
    pca_dims: Optional[int] = None
    k: int = 5
    alpha: float = 0.99
    normalization: str = "sym"
    include_centroid: bool = True
    train: TrainConfig = TrainConfig()
    solver_tol: float = 1e-6
    solver_max_iter: int = 1000
    subsample_size: Optional[int] = None
    subsample_seed: int = 0
    synthetic: Optional[SyntheticSpec] = None

    def __post_init__(self):
        if self.dataset not in DEFAULT_PCA_DIMS:
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if not self.methods or not self.seeds:
            raise ValueError("need at least one method and one seed")
        for method in self.methods:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r}")
        for level in self.noise_levels:
            if not (0.0 <= level < 1.0):
                raise ValueError(f"noise level {level} outside [0, 1)")
        if self.normalization not in ("sym", "rw"):
            raise ValueError(f"normalization must be 'sym' or 'rw', got {self.normalization!r}")


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    method: str
    noise_level: float
    seed: int
    accuracy: float
    wall_time_seconds: float
    pca_used: bool


@dataclass(frozen=True)
class CellFailure:
    method: str
    noise_level: float
    seed: int
    error: str


@dataclass
class ExperimentReport:
    rows: list
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def default_data_dir():
    return os.environ.get(DATA_DIR_ENV, "data")


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def resolve_dataset_paths(name, explicit, data_dir=None):
    """Explicit config paths win; otherwise use canonical names under data_dir/<name>/."""
    base = Path(data_dir if data_dir is not None else default_data_dir()) / name
    canonical = _USPS_FILES if name == "usps" else _IDX_FILES
    resolved = {}
    for key, filename in canonical.items():
        resolved[key] = explicit.get(key, str(base / filename))
    return resolved


def load_dataset(cfg: ExperimentConfig, data_dir=None) -> ImageDataset:
    if cfg.dataset == "synthetic":
        spec = cfg.synthetic if cfg.synthetic is not None else SyntheticSpec()
        return synthetic_blobs(spec.n, spec.classes, spec.dim, spec.spread, spec.seed)
    paths = resolve_dataset_paths(cfg.dataset, cfg.paths, data_dir)
    if cfg.dataset == "usps":
        return load_usps_dataset(paths["train_path"], paths["test_path"])
    return load_idx_dataset(paths["train_images"], paths["train_labels"],
                            paths["test_images"], paths["test_labels"])


@dataclass
class PreparedExperiment:
    config: ExperimentConfig
    dataset: ImageDataset
    features: np.ndarray
    operators: dict
    propagated: Optional[np.ndarray]
    pca_used: bool


def _operator_names(cfg: ExperimentConfig):
    needed = set()
    for method in cfg.methods:
        if method == "graph-ssl":
            needed.add("graph")
        elif method == "gcn":
            needed.add("gcn")
        elif method == "hypergraph-ssl" or method == "hgnn-proposed":
            needed.add("hg_sym")
        elif method == "hgnn":
            needed.add("hg_" + cfg.normalization)
    return needed


def operator_cache_path(ops_dir, cfg: ExperimentConfig, op_name: str) -> Path:
    pca = "raw" if cfg.pca_dims is None else f"pca{cfg.pca_dims}"
    sub = "" if cfg.subsample_size is None else f"_sub{cfg.subsample_size}s{cfg.subsample_seed}"
    centroid = "" if cfg.include_centroid else "_nocentroid"
    return Path(ops_dir) / f"{cfg.dataset}_{pca}_k{cfg.k}{sub}{centroid}_{op_name}.hgop"


def build_operators(cfg: ExperimentConfig, X: np.ndarray, ops_dir=None) -> dict:
    """Build (or load from cache) every operator the configured methods need."""
    needed = _operator_names(cfg)
    operators = {}
    pending = set()
    for name in needed:
        path = operator_cache_path(ops_dir, cfg, name) if ops_dir is not None else None
        if path is not None and path.exists():
            operators[name] = hg.load_operator(path)
        else:
            pending.add(name)

    if pending:
        knn = hg.knn_indices(X, cfg.k)
        if pending & {"hg_sym", "hg_rw"}:
            hgraph = hg.build_knn_hypergraph(X, cfg.k, knn=knn,
                                             include_centroid=cfg.include_centroid)
            if "hg_sym" in pending:
                operators["hg_sym"] = hg.hypergraph_operator(hgraph, "sym")
            if "hg_rw" in pending:
                operators["hg_rw"] = hg.hypergraph_operator(hgraph, "rw")
        if "graph" in pending:
            operators["graph"] = hg.build_knn_graph(X, cfg.k, knn=knn)
        if "gcn" in pending:
            operators["gcn"] = hg.gcn_operator(X, cfg.k, knn=knn)
        if ops_dir is not None:
            Path(ops_dir).mkdir(parents=True, exist_ok=True)
            for name in pending:
                hg.save_operator(operator_cache_path(ops_dir, cfg, name), operators[name])
    return operators


def prepare_features(cfg: ExperimentConfig, data_dir=None):
    """Load, optionally subsample, and optionally PCA-reduce the dataset."""
    dataset = load_dataset(cfg, data_dir)
    if cfg.subsample_size is not None:
        dataset = stratified_subsample(dataset, cfg.subsample_size, cfg.subsample_seed)
    X = dataset.features
    pca_used = cfg.pca_dims is not None
    if pca_used:
        model = pca_fit(X, cfg.pca_dims)
        X = pca_transform(model, X)
    return dataset, X, pca_used


def prepare_experiment(cfg: ExperimentConfig, data_dir=None,
                       ops_dir=None) -> PreparedExperiment:
    dataset, X, pca_used = prepare_features(cfg, data_dir)
    operators = build_operators(cfg, X, ops_dir)
    propagated = None
    if "hgnn-proposed" in cfg.methods:
        prop_cfg = PropagationConfig(cfg.alpha, cfg.solver_tol, cfg.solver_max_iter)
        propagated = propagate_features(operators["hg_sym"], X, prop_cfg)
    return PreparedExperiment(config=cfg, dataset=dataset, features=X,
                              operators=operators, propagated=propagated,
                              pca_used=pca_used)


def run_cell(prepared: PreparedExperiment, method: str, level: float, seed: int,
             split=None) -> ResultRow:
    """Run one (method, noise level, seed) cell and score it on the test split."""
    cfg = prepared.config
    dataset = prepared.dataset
    start = time.perf_counter()
    if split is None:
        split = inject_noise(dataset, level, seed)

    if method in ("graph-ssl", "hypergraph-ssl"):
        Y = encode_labels(split, dataset.train_indices, dataset.num_classes, "pm1")
        op = prepared.operators["graph" if method == "graph-ssl" else "hg_sym"]
        prop_cfg = PropagationConfig(cfg.alpha, cfg.solver_tol, cfg.solver_max_iter)
        scores = propagate_labels(op, Y, prop_cfg)
        pred = decode_predictions(scores)
    else:
        Y = encode_labels(split, dataset.train_indices, dataset.num_classes, "onehot")
        train_cfg = replace(cfg.train, seed=seed)
        if method == "gcn":
            op, X = prepared.operators["gcn"], prepared.features
        elif method == "hgnn":
            op, X = prepared.operators["hg_" + cfg.normalization], prepared.features
        elif method == "hgnn-proposed":
            op, X = prepared.operators["hg_sym"], prepared.propagated
        else:
            raise ValueError(f"unknown method {method!r}")
        params = train(op, X, Y, dataset.train_indices, train_cfg)
        pred = predict(op, X, params)

    acc = accuracy(pred, split.clean_labels, dataset.test_indices)
    return ResultRow(dataset=cfg.dataset, method=method, noise_level=float(level),
                     seed=int(seed), accuracy=acc,
                     wall_time_seconds=time.perf_counter() - start,
                     pca_used=prepared.pca_used)


def run_experiment(cfg: ExperimentConfig, data_dir=None, workers=None,
                   ops_dir=None) -> ExperimentReport:
    """Run the whole grid; failed cells are reported, the rest still run."""
    prepared = prepare_experiment(cfg, data_dir, ops_dir)
    if workers is None:
        workers = default_workers()
    splits = {(level, seed): inject_noise(prepared.dataset, level, seed)
              for level in cfg.noise_levels for seed in cfg.seeds}
    cells = [(method, level, seed)
             for method in cfg.methods
             for level in cfg.noise_levels
             for seed in cfg.seeds]

    def execute(cell):
        method, level, seed = cell
        return run_cell(prepared, method, level, seed, split=splits[(level, seed)])

    rows, failures = [], []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(execute, cell) for cell in cells]
            outcomes = [(cell, future) for cell, future in zip(cells, futures)]
            for (method, level, seed), future in outcomes:
                try:
                    rows.append(future.result())
                except Exception as exc:
                    failures.append(CellFailure(method, float(level), int(seed),
                                                f"{type(exc).__name__}: {exc}"))
    else:
        for method, level, seed in cells:
            try:
                rows.append(execute((method, level, seed)))
            except Exception as exc:
                failures.append(CellFailure(method, float(level), int(seed),
                                            f"{type(exc).__name__}: {exc}"))
    return ExperimentReport(rows=rows, failures=failures)


def median_grid(rows):
    """Seed-median accuracy per (method, noise_level), preserving method order."""
    methods, levels = [], []
    buckets = {}
    for row in rows:
        key = (row.method, row.noise_level)
        buckets.setdefault(key, []).append(row.accuracy)
        if row.method not in methods:
            methods.append(row.method)
        if row.noise_level not in levels:
            levels.append(row.noise_level)
    levels.sort()
    grid = {key: float(np.median(values)) for key, values in buckets.items()}
    return methods, levels, grid


def emit_table(rows, format: str = "csv") -> str:
    """Render result rows as a per-row CSV or an aligned seed-median text grid."""
    if not rows:
        raise ValueError("no rows to emit")
    if format == "csv":
        lines = [CSV_HEADER]
        for row in rows:
            lines.append(
                f"{row.dataset},{row.method},{row.noise_level!r},{row.seed},"
                f"{row.accuracy!r},{row.wall_time_seconds!r},"
                f"{'true' if row.pca_used else 'false'}")
        return "\n".join(lines) + "\n"
    if format == "text":
        methods, levels, grid = median_grid(rows)
        name_width = max(len("method"), max(len(m) for m in methods))
        header = "method".ljust(name_width) + "".join(
            f"{f'{level * 100:g}%':>9}" for level in levels)
        lines = [header]
        for method in methods:
            cells = []
            for level in levels:
                value = grid.get((method, level))
                cells.append(f"{value * 100:9.2f}" if value is not None else f"{'-':>9}")
            lines.append(method.ljust(name_width) + "".join(cells))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {format!r}")


def parse_results_csv(text) -> list:
    """Inverse of ``emit_table(..., 'csv')``."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or unexpected CSV header")
    rows = []
    for line in lines[1:]:
        dataset, method, level, seed, acc, wall, pca = line.split(",")
        rows.append(ResultRow(dataset=dataset, method=method,
                              noise_level=float(level), seed=int(seed),
                              accuracy=float(acc), wall_time_seconds=float(wall),
                              pca_used=pca == "true"))
    return rows
