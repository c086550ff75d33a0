"""Dataset ingestion: UCI-style CSV files and MNIST IDX files.

CSV schema files are line oriented, one ``column_index:role`` entry per line
with role one of ``label``, ``numeric``, ``categorical`` or ``ignore``.
Columns absent from the schema are ignored.  Empty cells and ``?``/``NA``
count as missing and drop the row.

Numeric columns are min-max scaled to [0, 1], categorical columns are
one-hot encoded (categories in first-appearance order), then every row is
divided by ``max(1, largest row norm)`` so all inputs lie in the unit ball.
"""
import csv
import gzip
import hashlib
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

MISSING = {"", "?", "NA", "na", "nan", "NaN"}
ROLES = {"label", "numeric", "categorical", "ignore"}


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    name: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError("features must be (m, d) with one label per row")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if y.size and (y.min() < 0 or y.max() >= self.num_classes):
            raise ValueError(f"labels must lie in 0..{self.num_classes - 1}")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    @property
    def max_norm(self):
        if len(self) == 0:
            return 0.0
        return float(np.linalg.norm(self.features, axis=1).max())

    def subset(self, idx, name=None):
        idx = np.asarray(idx)
        if idx.dtype != bool:
            idx = idx.astype(np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.num_classes,
                       name or self.name, dict(self.provenance))

    def with_features(self, X):
        return Dataset(X, self.labels, self.num_classes, self.name, dict(self.provenance))

    def digest(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype="<i8").tobytes())
        h.update(str(self.num_classes).encode())
        return h.hexdigest()


def unit_ball_scale(features):
    if len(features) == 0:
        return 1.0
    return max(1.0, float(np.linalg.norm(features, axis=1).max()))


def normalize_unit_ball(features, scale=None):
    """Divide rows by ``scale`` (default: max(1, largest row norm))."""
    features = np.asarray(features, dtype=np.float64)
    if scale is None:
        scale = unit_ball_scale(features)
    return features / scale


def split_halves(data, seed):
    """Seeded half split; the first floor(m/2) permuted rows train.

    The unit-ball scale is fitted on the train half and reused for the eval
    half, so eval rows may exceed norm 1 slightly.
    """
    m = len(data)
    perm = np.random.default_rng(seed).permutation(m)
    cut = m // 2
    train, held = data.subset(perm[:cut]), data.subset(perm[cut:])
    scale = unit_ball_scale(train.features)
    return (train.with_features(normalize_unit_ball(train.features, scale)),
            held.with_features(normalize_unit_ball(held.features, scale)))


def read_schema(path):
    schema = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            col, _, role = line.partition(":")
            role = role.strip()
            if role not in ROLES:
                raise ValueError(f"{path}:{lineno}: unknown role {role!r}")
            schema[int(col)] = role
    return schema


def load_csv(path, schema, name=None, skip_header=False):
    """Load a CSV file into a unit-ball normalised Dataset.

    ``schema`` maps column index to role, or is the path of a schema file.
    """
    if not isinstance(schema, dict):
        schema = read_schema(schema)
    label_cols = [c for c, r in schema.items() if r == "label"]
    if len(label_cols) != 1:
        raise ValueError("schema must mark exactly one label column")
    label_col = label_cols[0]
    used = sorted(c for c, r in schema.items() if r in ("numeric", "categorical"))

    rows = []
    dropped = 0
    with open(path, newline="") as f:
        reader = csv.reader(f, skipinitialspace=True)
        if skip_header:
            next(reader, None)
        for rec in reader:
            if not rec:
                continue
            rec = [v.strip() for v in rec]
            if any(rec[c] in MISSING for c in used + [label_col]):
                dropped += 1
                continue
            rows.append(rec)
    if dropped:
        log.info("%s: dropped %d rows with missing values", path, dropped)
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two usable rows")

    label_codes = {}
    labels = np.array([label_codes.setdefault(r[label_col], len(label_codes)) for r in rows])
    blocks = []
    for c in used:
        col = [r[c] for r in rows]
        if schema[c] == "numeric":
            v = np.array(col, dtype=np.float64)
            lo, hi = v.min(), v.max()
            blocks.append(((v - lo) / (hi - lo) if hi > lo else np.zeros_like(v))[:, None])
        else:
            cats = {}
            codes = np.array([cats.setdefault(v, len(cats)) for v in col])
            blocks.append(np.eye(len(cats))[codes])
    X = np.hstack(blocks) if blocks else np.zeros((len(rows), 0))
    X = normalize_unit_ball(X)
    provenance = {"source": str(path), "rows_dropped": dropped,
                  "preprocessing": "minmax+onehot+unitball",
                  "label_order": list(label_codes)}
    return Dataset(X, labels, len(label_codes), name or str(path), provenance)


IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_bytes(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:2] == b"\x1f\x8b":
        blob = gzip.decompress(blob)
    return blob


def read_idx(path, expected_magic=None):
    """Raw array from an IDX file (unsigned-byte payloads; gzip accepted)."""
    blob = _read_bytes(path)
    if len(blob) < 4:
        raise ValueError(f"{path}: truncated header at offset 0")
    (magic,) = struct.unpack_from(">I", blob, 0)
    if expected_magic is not None and magic != expected_magic:
        raise ValueError(f"{path}: bad magic 0x{magic:08x} at offset 0, "
                         f"expected 0x{expected_magic:08x}")
    if magic >> 8 != 0x08:
        raise ValueError(f"{path}: unsupported IDX type 0x{magic:08x} at offset 0")
    ndim = magic & 0xFF
    if len(blob) < 4 + 4 * ndim:
        raise ValueError(f"{path}: truncated dimension fields at offset 4")
    dims = struct.unpack_from(f">{ndim}I", blob, 4)
    start = 4 + 4 * ndim
    count = int(np.prod(dims))
    if len(blob) < start + count:
        raise ValueError(f"{path}: truncated payload at offset {len(blob)}, "
                         f"expected {start + count} bytes")
    return np.frombuffer(blob, dtype=np.uint8, count=count, offset=start).reshape(dims)


def write_idx(path, array):
    """Write a uint8 array as an IDX file (gzip if the path ends in .gz)."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(">I", 0x0800 | array.ndim) + struct.pack(f">{array.ndim}I", *array.shape)
    blob = header + array.tobytes()
    if str(path).endswith(".gz"):
        blob = gzip.compress(blob, mtime=0)
    with open(path, "wb") as f:
        f.write(blob)


def load_idx(images_path, labels_path, num_classes=None, name="idx"):
    images = read_idx(images_path, IMAGE_MAGIC)
    labels = read_idx(labels_path, LABEL_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise ValueError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    X = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    X = normalize_unit_ball(X)
    y = labels.astype(np.int64)
    k = num_classes or int(y.max()) + 1
    provenance = {"source": str(images_path), "preprocessing": "scale255+unitball"}
    return Dataset(X, y, max(k, 2), name, provenance)


def save_dataset(path, data):
    np.savez(path, features=data.features, labels=data.labels,
             num_classes=data.num_classes, name=data.name)


def load_dataset(path):
    with np.load(path, allow_pickle=False) as z:
        return Dataset(z["features"], z["labels"], int(z["num_classes"]), str(z["name"]),
                       {"source": str(path)})
