"""Command line entry point: ``wpbayes <subcommand> ...``.

Training options can also come from a ``key=value`` file passed with
``--config``; keys are option names with dashes or underscores.  Explicit
flags override the file.
"""
import argparse
import logging
import math
import os
import sys

import numpy as np

from . import bounds, ot
from .batch import BatchConfig, PriorSet, make_partition
from .data import load_csv, load_idx, save_dataset, split_halves
from .experiment import (ExperimentConfig, initial_hypothesis_params, load_data, read_manifest,
                         read_rows, report, run_experiment)
from .losses import LipschitzConstant, LossConfig
from .models import load_hypothesis
from .online import OnlineConfig


def _epsilon(value):
    if value in ("inv_m", "inv_sqrt_m"):
        return value
    v = float(value)
    if v < 0:
        raise argparse.ArgumentTypeError("epsilon must be non-negative")
    return v


def _bool(value):
    if isinstance(value, bool):
        return value
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {value!r}")


def _seeds(value):
    return tuple(int(s) for s in str(value).split(",") if s.strip())


# name: (type, default, help); shared by flags and config files
COMMON = {
    "data": (str, None, "ingested dataset (.npz)"),
    "model": (str, "linear", "linear or nn"),
    "width": (int, 600, "hidden width of the nn model"),
    "depth": (int, 2, "hidden depth of the nn model"),
    "seed": (_seeds, (0,), "seed, or comma-separated seeds"),
    "eta": (float, 1.0, "margin loss scale"),
    "normalization": (str, "classes", "classes or classes_minus_one"),
    "alpha": (float, 10000.0, "COCOB alpha"),
    "zero-linear-init": (_bool, False, "start linear models at zero"),
    "jobs": (int, 1, "worker processes across seeds"),
    "out": (str, None, "output directory"),
}
BATCH_OPTS = {
    "algorithm": (str, "alg1", "alg1, erm or l2"),
    "epsilon": (_epsilon, "inv_sqrt_m", "inv_m, inv_sqrt_m or a number"),
    "k-alpha": (float, 0.2, "K = max(1, round(k_alpha * sqrt(m)))"),
    "batch-size": (int, 100, "mini-batch size"),
    "min-iterations": (int, 20000, "minimum number of optimizer steps"),
    "weight-decay": (float, 0.0, "L2 weight for the l2 algorithm"),
    "final-iterate": (_bool, False, "return the last iterate instead of the best"),
}
ONLINE_OPTS = {
    "algorithm": (str, "alg2", "alg2 or ogd"),
    "inner-steps": (int, 10, "optimizer steps per example"),
    "barrier-t": (float, 100.0, "log-barrier slope t"),
    "barrier": (_bool, True, "use the log-barrier term (off gives plain COCOB steps)"),
    "radius": (float, 1.0, "step-size constraint radius"),
    "plain-distance": (_bool, False, "add the plain distance term to the objective"),
    "reset-optimizer": (_bool, True, "fresh optimizer state for every example"),
    "eval-subsample": (int, 2000, "eval points used for per-step risks"),
}


def _add_options(parser, table):
    for name, (typ, _, help_) in table.items():
        if typ is _bool:
            parser.add_argument(f"--{name}", nargs="?", const=True, type=_bool, default=None,
                                help=help_)
        else:
            parser.add_argument(f"--{name}", type=typ, default=None, help=help_)
    parser.add_argument("--config", help="key=value file with the options above")


def read_config(path, table):
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("_", "-")
            if not sep or key not in table:
                raise ValueError(f"{path}:{lineno}: unknown option {key!r}")
            values[key] = table[key][0](value.strip())
    return values


def resolve(args, table):
    """Defaults, then config file, then explicit flags."""
    opts = {k: v[1] for k, v in table.items()}
    if args.config:
        opts.update(read_config(args.config, table))
    for k in table:
        v = getattr(args, k.replace("-", "_"))
        if v is not None:
            opts[k] = v
    if not opts["data"]:
        raise SystemExit("error: --data is required (flag or config file)")
    return opts


def _loss(opts):
    return LossConfig(opts["eta"], opts["normalization"])


def _experiment(opts, table_kind):
    common = dict(data_path=opts["data"], algorithm=opts["algorithm"], model=opts["model"],
                  width=opts["width"], depth=opts["depth"], seeds=opts["seed"],
                  out=opts["out"], jobs=opts["jobs"])
    if table_kind == "batch":
        bcfg = BatchConfig(epsilon=opts["epsilon"], k_alpha=opts["k-alpha"],
                           batch_size=opts["batch-size"], min_iterations=opts["min-iterations"],
                           loss=_loss(opts), alpha=opts["alpha"],
                           final_iterate=opts["final-iterate"],
                           zero_linear_init=opts["zero-linear-init"])
        return ExperimentConfig(batch=bcfg, weight_decay=opts["weight-decay"], **common)
    ocfg = OnlineConfig(inner_steps=opts["inner-steps"], barrier_t=opts["barrier-t"],
                        radius=opts["radius"], use_barrier=opts["barrier"],
                        include_plain_distance=opts["plain-distance"],
                        loss=_loss(opts), alpha=opts["alpha"],
                        reset_optimizer=opts["reset-optimizer"],
                        eval_subsample=opts["eval-subsample"],
                        zero_linear_init=opts["zero-linear-init"])
    return ExperimentConfig(online=ocfg, **common)


def _print_rows(rows):
    print("dataset\tmethod\tseed\ttrain\ttest")
    for r in rows:
        print(f"{r[0]}\t{r[1]}\t{r[2]}\t{r[3]:.4f}\t{r[4]:.4f}")


def cmd_ingest(args):
    if args.csv:
        if not args.schema:
            raise SystemExit("error: --csv needs --schema")
        data = load_csv(args.csv, args.schema, args.name, skip_header=args.skip_header)
    elif args.idx:
        data = load_idx(args.idx[0], args.idx[1], name=args.name or "idx")
    else:
        raise SystemExit("error: give --csv FILE --schema FILE or --idx IMAGES LABELS")
    save_dataset(args.out, data)
    print(f"{data.name}: m={len(data)} d={data.dim} classes={data.num_classes} "
          f"max_norm={data.max_norm:.6f} -> {args.out}")


def cmd_train_batch(args):
    opts = resolve(args, {**COMMON, **BATCH_OPTS})
    _print_rows(run_experiment(_experiment(opts, "batch")))


def cmd_train_online(args):
    opts = resolve(args, {**COMMON, **ONLINE_OPTS})
    _print_rows(run_experiment(_experiment(opts, "online")))


def _lipschitz_for(choice, manifest):
    eta = float(manifest["eta"])
    if choice in ("lemma", "lemma-sqrt2"):
        if manifest["model"] != "linear":
            raise SystemExit("error: the lemma constant covers linear models only; "
                             "pass --lipschitz <value> for networks")
        return LipschitzConstant((math.sqrt(2.0) if choice == "lemma-sqrt2" else 2.0) * eta,
                                 "lemma")
    return LipschitzConstant(float(choice), "user")


def _print_certificate(cert):
    print(f"# {cert.theorem}  delta={cert.delta!r}  L={cert.lipschitz.value!r} "
          f"({cert.lipschitz.provenance})  m={cert.m}  K={cert.K}")
    for note in cert.notes:
        print(f"# note: {note}")
    print("component\tformula\tvalue")
    for name, formula, value in cert.table():
        print(f"{name}\t{formula}\t{value:.6g}")


def cmd_certify(args):
    run = args.run
    manifest = read_manifest(os.path.join(run, "manifest.txt"))
    L = _lipschitz_for(args.lipschitz, manifest)
    m = int(manifest["m"])
    algorithm = manifest["algorithm"]
    certs = []
    if algorithm in ("alg2", "ogd"):
        with open(os.path.join(run, "trace.tsv")) as f:
            f.readline()
            path = [float(line.split("\t")[3]) for line in f if line.strip()]
        certs.append(bounds.bound_online_nonneg(path, L, m, args.delta))
    else:
        h = load_hypothesis(os.path.join(run, "posterior.bin"))
        if algorithm == "alg1":
            sizes = [int(s) for s in manifest["partition_sizes"].split(",")]
            priors = [load_hypothesis(os.path.join(run, f"prior_{i}.bin"))
                      for i in range(len(sizes))]
            terms = [(s, float(np.linalg.norm(h.params - p.params)))
                     for s, p in zip(sizes, priors)]
        else:
            # baselines are certified against their data-free initial point
            _, w0 = initial_hypothesis_params(manifest)
            terms = [(m, float(np.linalg.norm(h.params - w0)))]
        K = len(terms)
        certs.append(bounds.bound_batch_nonneg(terms, L, m, K, args.delta))
        certs.append(bounds.bound_batch_tight(terms, L, m, K, args.delta))
        if algorithm == "alg1" and args.heavy:
            certs.append(_heavy_certificate(manifest, priors, terms, L, m, args.delta))
    for i, cert in enumerate(certs):
        cert.check()
        if i:
            print()
        _print_certificate(cert)
    emp = float(manifest["train_zero_one"])
    print()
    print(f"# train zero_one risk {emp:.6f}; risk bound (nonneg) "
          f"{emp + certs[0].total:.6f}")


def _heavy_certificate(manifest, priors, terms, L, m, delta):
    data = load_data(manifest["dataset_path"])
    seed = int(manifest["seed"])
    train, held = split_halves(data, seed)
    partition = make_partition(m, len(terms), seed)
    cfg = LossConfig(float(manifest["eta"]), manifest["normalization"])
    pset = PriorSet(priors, partition, [])
    variances = bounds.estimate_variances(pset, train, held, cfg)
    lambdas = bounds.optimal_lambdas(len(terms), delta, variances)
    return bounds.bound_batch_heavy(terms, L, m, len(terms), delta, lambdas, variances)


def cmd_emd(args):
    def load(path):
        if path.endswith(".bin"):
            return ot.DiscreteMeasure.dirac(load_hypothesis(path).params)
        return ot.read_measure(path)
    mu, nu = load(args.first), load(args.second)
    print(repr(ot.w1_exact(mu, nu)))


def cmd_report(args):
    rows = []
    for path in args.rows:
        rows.extend(read_rows(path))
    sys.stdout.write(report(rows))


def build_parser():
    ap = argparse.ArgumentParser(prog="wpbayes")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a CSV or IDX dataset to .npz")
    p.add_argument("--csv")
    p.add_argument("--schema")
    p.add_argument("--skip-header", action="store_true")
    p.add_argument("--idx", nargs=2, metavar=("IMAGES", "LABELS"))
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-batch", help="alg1, erm or l2 on the half split")
    _add_options(p, {**COMMON, **BATCH_OPTS})
    p.set_defaults(func=cmd_train_batch)

    p = sub.add_parser("train-online", help="alg2 or ogd over the training half")
    _add_options(p, {**COMMON, **ONLINE_OPTS})
    p.set_defaults(func=cmd_train_online)

    p = sub.add_parser("certify", help="itemised bound for a run directory")
    p.add_argument("run")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--lipschitz", default="lemma",
                   help="lemma, lemma-sqrt2 or a user-supplied value")
    p.add_argument("--heavy", action="store_true",
                   help="also print the variance-based certificate (held-out plug-ins)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("emd", help="W1 between two measure files or two hypothesis files")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_emd)

    p = sub.add_parser("report", help="median table from rows.tsv files")
    p.add_argument("rows", nargs="*")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
