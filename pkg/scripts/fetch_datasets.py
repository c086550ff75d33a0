"""Rebuild the files under data/ from dataset copies published on PyPI.

UCI data come from the KEEL mirror bundled in the ``keel-ds`` wheel:
mushroom (rows with missing values already removed upstream), tic-tac-toe
and pen-based digits.  Multi-class yeast is not shipped directly; its ten
labels are recovered from KEEL's one-vs-rest and subset derivatives by
matching feature tuples, then checked against the UCI class counts.

A 5000-example MNIST subsample comes from the ``mlxtend`` wheel and is
written out in IDX format.

Usage: python scripts/fetch_datasets.py [--out data]
"""
import argparse
import collections
import gzip
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from wpbayes.data import write_idx  # noqa: E402

KEEL = "keel-ds==0.2.5"
MLXTEND = "mlxtend==0.24.0"


def fetch_wheel(req, workdir):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q", req,
                    "-d", str(workdir)], check=True)
    name = req.split("==")[0].replace("-", "_")
    return zipfile.ZipFile(next(Path(workdir).glob(f"{name}-*.whl")))


def keel_rows(wheel, kind, name):
    text = wheel.read(f"keel_ds/data/{kind}/raw/{name}.dat").decode()
    return [[v.strip() for v in line.split(",")] for line in text.strip().splitlines()]


def write_csv(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(",".join(r) + "\n")


def write_schema(path, roles):
    with open(path, "w") as f:
        for i, role in enumerate(roles):
            f.write(f"{i}:{role}\n")


def yeast_rows(wheel):
    # Files differ in number formatting and row order, so rows are matched by
    # their numeric feature tuple.  Rows sharing a tuple are interchangeable;
    # only the multiset of labels per tuple matters.
    def load(name):
        out = []
        for r in keel_rows(wheel, "imbalanced", name):
            out.append((tuple(round(float(v), 4) for v in r[:-1]), r[-1]))
        return out

    base = load("yeast1")
    slots = collections.defaultdict(list)
    for i, (key, _) in enumerate(base):
        slots[key].append(i)
    labels = [None] * len(base)

    def assign(key, cls, count):
        idx = slots[key]
        have = sum(labels[i] == cls for i in idx)
        for i in idx:
            if have >= count:
                break
            if labels[i] is None:
                labels[i] = cls
                have += 1
        if have < count:
            raise RuntimeError(f"cannot place {count} x {cls} for {key}")

    def evidence(name, neg_cls, pos_cls):
        counts = collections.Counter(load(name))
        for (key, tag), n in sorted(counts.items()):
            cls = pos_cls if tag == "positive" else neg_cls
            if cls is not None:
                assign(key, cls, n)

    for name, cls in [("yeast1", "NUC"), ("yeast3", "ME3"), ("yeast4", "ME2"),
                      ("yeast5", "ME1"), ("yeast6", "EXC")]:
        evidence(name, None, cls)
    evidence("yeast-1-2-8-9_vs_7", None, "VAC")
    evidence("yeast-2_vs_8", "CYT", "POX")
    evidence("yeast-2_vs_4", "CYT", "ME2")
    for i, c in enumerate(labels):
        if c is None:
            labels[i] = "ERL" if base[i][0][4] == 1.0 else "MIT"
    counts = collections.Counter(labels)
    expected = {"CYT": 463, "NUC": 429, "MIT": 244, "ME3": 163, "ME2": 51, "ME1": 44,
                "EXC": 35, "VAC": 30, "POX": 20, "ERL": 5}
    if dict(counts) != expected:
        raise RuntimeError(f"yeast reconstruction mismatch: {dict(counts)}")
    raw = keel_rows(wheel, "imbalanced", "yeast1")
    return [r[:-1] + [c] for r, c in zip(raw, labels)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        keel = fetch_wheel(KEEL, tmp)
        mushroom = keel_rows(keel, "balanced", "mushroom")
        write_csv(out / "mushrooms.csv", mushroom)
        write_schema(out / "mushrooms.schema", ["categorical"] * 22 + ["label"])

        ttt = keel_rows(keel, "balanced", "tic-tac-toe")
        write_csv(out / "tictactoe.csv", ttt)
        write_schema(out / "tictactoe.schema", ["categorical"] * 9 + ["label"])

        pen = keel_rows(keel, "balanced", "penbased")
        write_csv(out / "pendigits.csv", pen)
        write_schema(out / "pendigits.schema", ["numeric"] * 16 + ["label"])

        yeast = yeast_rows(keel)
        write_csv(out / "yeast.csv", yeast)
        write_schema(out / "yeast.schema", ["numeric"] * 8 + ["label"])

        mlx = fetch_wheel(MLXTEND, tmp)
        raw = gzip.decompress(mlx.read("mlxtend/data/data/mnist_5k.csv.gz"))
        table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
        images = table[:, :-1].reshape(-1, 28, 28).astype(np.uint8)
        labels = table[:, -1].astype(np.uint8)
        mnist = out / "mnist5k"
        mnist.mkdir(exist_ok=True)
        write_idx(mnist / "images-idx3-ubyte.gz", images)
        write_idx(mnist / "labels-idx1-ubyte.gz", labels)

    for p in sorted(out.rglob("*")):
        if p.is_file():
            print(f"{p.relative_to(out)}\t{p.stat().st_size}")


if __name__ == "__main__":
    main()
