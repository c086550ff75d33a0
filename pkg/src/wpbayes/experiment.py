"""Experiment runner: half-split evaluation, run directories and result rows.

A run directory holds ``manifest.txt`` (sorted ``key=value`` lines, no
timestamps), the learned hypothesis files and a ``trace.tsv``.  Result rows
are tab-separated ``dataset method seed train test``.
"""
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import batch, online
from .batch import BatchConfig
from .online import OnlineConfig
from .data import load_dataset, split_halves
from .losses import margin_risk, zero_one_risk
from .models import ModelSpec, init_weights, load_hypothesis, save_hypothesis

BATCH_ALGORITHMS = ("alg1", "erm", "l2")
ONLINE_ALGORITHMS = ("alg2", "ogd")
ROW_HEADER = ("dataset", "method", "seed", "train", "test")


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str
    algorithm: str
    model: str = "linear"
    width: int = 600
    depth: int = 2
    seeds: tuple = (0,)
    batch: BatchConfig = field(default_factory=BatchConfig)
    online: OnlineConfig = field(default_factory=OnlineConfig)
    weight_decay: float = 0.0
    out: str = None
    jobs: int = 1

    def __post_init__(self):
        if self.algorithm not in BATCH_ALGORITHMS + ONLINE_ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.model not in ("linear", "nn"):
            raise ValueError(f"unknown model {self.model!r}")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    def model_spec(self, data):
        if self.model == "linear":
            return ModelSpec.linear(data.dim, data.num_classes)
        return ModelSpec.mlp(data.dim, data.num_classes, self.width, self.depth)

    @property
    def method(self):
        if self.algorithm == "alg1":
            return f"alg1({self.batch.epsilon})"
        if self.algorithm == "l2":
            return f"l2({self.weight_decay!r})"
        return self.algorithm


def load_data(path):
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"dataset file {path} not found; create it with `wpbayes ingest ... --out {path}`")
    return load_dataset(path)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def write_manifest(path, entries):
    with open(path, "w") as f:
        for k in sorted(entries):
            f.write(f"{k}={_fmt(entries[k])}\n")


def read_manifest(path):
    out = {}
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if line:
                k, _, v = line.partition("=")
                out[k] = v
    return out


def _config_entries(cfg, spec, data, seed):
    e = {"algorithm": cfg.algorithm, "method": cfg.method, "dataset": data.name,
         "dataset_path": os.path.abspath(cfg.data_path), "dataset_digest": data.digest(),
         "model": cfg.model, "input_dim": spec.input_dim, "num_classes": spec.num_classes,
         "hidden_width": spec.hidden_width, "hidden_depth": spec.hidden_depth, "seed": seed}
    sub = cfg.batch if cfg.algorithm in BATCH_ALGORITHMS else cfg.online
    for k, v in asdict(sub).items():
        if k == "loss":
            e["eta"], e["normalization"] = v["eta"], v["normalization"]
        elif k != "seed":
            e[k] = v
    if cfg.algorithm == "l2":
        e["weight_decay"] = cfg.weight_decay
    return e


def _risks(spec, w, data, loss):
    return (zero_one_risk(spec, w, data.features, data.labels),
            margin_risk(spec, w, data.features, data.labels, loss))


def run_batch(cfg, data, seed, out_dir=None):
    train, held = split_halves(data, seed)
    spec = cfg.model_spec(data)
    bcfg = BatchConfig(**{**asdict(cfg.batch), "loss": cfg.batch.loss, "seed": seed})
    entries = _config_entries(cfg, spec, data, seed)
    entries["m"] = len(train)
    entries["eval_max_norm"] = held.max_norm
    priors = None
    if cfg.algorithm == "alg1":
        m = len(train)
        partition = batch.make_partition(m, bcfg.num_priors(m), seed)
        priors = batch.train_priors(train, partition, spec, bcfg)
        h, trace = batch.train_posterior(train, priors, spec, bcfg)
        entries["K"] = partition.K
        entries["partition_sizes"] = partition.sizes
        entries["epsilon_value"] = bcfg.resolve_epsilon(m)
        entries["prior_steps"] = [p["steps"] for p in priors.provenance]
    elif cfg.algorithm == "erm":
        h, trace = batch.minimize(train, spec, bcfg)
    else:
        wd = cfg.weight_decay
        pen = None if wd == 0 else (lambda w: (wd * float(w @ w), 2.0 * wd * w))
        h, trace = batch.minimize(train, spec, bcfg, pen)
    entries["iterations"] = trace.iterations
    entries["best_epoch"] = trace.best_epoch
    entries["train_zero_one"], entries["train_margin"] = _risks(spec, h.params, train, bcfg.loss)
    entries["test_zero_one"], entries["test_margin"] = _risks(spec, h.params, held, bcfg.loss)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        save_hypothesis(os.path.join(out_dir, "posterior.bin"), h)
        if priors is not None:
            for i, p in enumerate(priors.priors):
                save_hypothesis(os.path.join(out_dir, f"prior_{i}.bin"), p)
        with open(os.path.join(out_dir, "trace.tsv"), "w") as f:
            f.write("epoch\tobjective\n")
            for i, v in enumerate(trace.objective):
                f.write(f"{i}\t{float(v)!r}\n")
        write_manifest(os.path.join(out_dir, "manifest.txt"), entries)
    return entries, h, priors


def run_online(cfg, data, seed, out_dir=None):
    stream, held = split_halves(data, seed)
    spec = cfg.model_spec(data)
    ocfg = OnlineConfig(**{**asdict(cfg.online), "loss": cfg.online.loss, "seed": seed})
    train_fn = online.online_train if cfg.algorithm == "alg2" else online.ogd_train
    trace = train_fn(stream, spec, ocfg, held)
    entries = _config_entries(cfg, spec, data, seed)
    entries["m"] = len(stream)
    entries["eval_max_norm"] = held.max_norm
    entries["train_zero_one"] = trace.train_cumulative
    entries["test_zero_one"] = trace.eval_cumulative
    entries["path_length"] = trace.path_length
    entries["max_step"] = float(trace.step_distances.max())
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        save_hypothesis(os.path.join(out_dir, "final.bin"), trace.final)
        trace.write_tsv(os.path.join(out_dir, "trace.tsv"))
        write_manifest(os.path.join(out_dir, "manifest.txt"), entries)
    return entries, trace


def _run_cell(args):
    cfg, seed = args
    data = load_data(cfg.data_path)
    out_dir = os.path.join(cfg.out, f"seed-{seed}") if cfg.out else None
    if cfg.algorithm in BATCH_ALGORITHMS:
        entries = run_batch(cfg, data, seed, out_dir)[0]
    else:
        entries = run_online(cfg, data, seed, out_dir)[0]
    return (data.name, cfg.method, seed, entries["train_zero_one"], entries["test_zero_one"])


def run_experiment(cfg):
    """One row per seed, in seed order; writes ``rows.tsv`` under ``cfg.out``."""
    cells = [(cfg, s) for s in cfg.seeds]
    if cfg.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: r[2])
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        write_rows(os.path.join(cfg.out, "rows.tsv"), rows)
    return rows


def write_rows(path, rows):
    with open(path, "w") as f:
        f.write("\t".join(ROW_HEADER) + "\n")
        for r in rows:
            f.write("\t".join(_fmt(v) for v in r) + "\n")


def read_rows(path):
    rows = []
    with open(path) as f:
        header = f.readline().rstrip("\n").split("\t")
        if tuple(header) != ROW_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, line in enumerate(f, 2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(ROW_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(ROW_HEADER)} fields")
            rows.append((parts[0], parts[1], int(parts[2]), float(parts[3]), float(parts[4])))
    return rows


def report(rows):
    """Median (train, test) per dataset and method, one dataset per line.

    Methods become column pairs in first-appearance order; ``best`` names the
    method with the lowest median test value (ties listed with ``|``).
    """
    methods, datasets = [], []
    cells = {}
    for ds, method, _, tr, te in rows:
        if method not in methods:
            methods.append(method)
        if ds not in datasets:
            datasets.append(ds)
        cells.setdefault((ds, method), []).append((tr, te))
    header = ["dataset"]
    for mth in methods:
        header += [f"{mth}:train", f"{mth}:test"]
    header.append("best")
    lines = ["\t".join(header)]
    for ds in datasets:
        out = [ds]
        medians = {}
        for mth in methods:
            vals = cells.get((ds, mth))
            if vals:
                tr = statistics.median(v[0] for v in vals)
                te = statistics.median(v[1] for v in vals)
                medians[mth] = te
                out += [f"{tr:.3f}", f"{te:.3f}"]
            else:
                out += ["-", "-"]
        low = min(medians.values())
        out.append("|".join(m for m in methods if m in medians and medians[m] == low))
        lines.append("\t".join(out))
    return "\n".join(lines) + "\n"


def initial_hypothesis_params(manifest):
    """Data-free initial point of a run, rebuilt from its manifest."""
    spec = ModelSpec("linear" if manifest["model"] == "linear" else "mlp",
                     int(manifest["input_dim"]), int(manifest["num_classes"]),
                     int(manifest["hidden_width"]), int(manifest["hidden_depth"]))
    zero = manifest.get("zero_linear_init") == "True"
    return spec, init_weights(spec, int(manifest["seed"]), zero)


def median(values):
    values = [v for v in values if not math.isnan(v)]
    return statistics.median(values) if values else math.nan


__all__ = ["ExperimentConfig", "run_experiment", "run_batch", "run_online", "report",
           "read_rows", "write_rows", "read_manifest", "write_manifest", "load_data",
           "load_hypothesis", "initial_hypothesis_params", "median"]
