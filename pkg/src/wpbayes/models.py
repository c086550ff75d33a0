"""Linear and leaky-ReLU fully connected models over a flat parameter vector.

Parameter layout (stable, relied upon by distances and optimizer state):
layers are stored from input to output; each layer contributes its weight
matrix in row-major order (shape ``(out, in)``) followed by its bias.  A
linear model is the single layer ``(W, b)`` with ``W`` of shape
``(num_classes, input_dim)``.

Initialisation draws weights from a ``numpy.random.Generator`` backed by
PCG64 seeded with the integer seed; Gaussian variates come from numpy's
ziggurat sampler (``standard_normal``).  Samples are scaled by ``sigma``
and clamped to ``[-2 sigma, 2 sigma]``.
"""
import struct
from dataclasses import dataclass

import numpy as np

LINEAR = "linear"
MLP = "mlp"

INIT_SIGMA = 0.04
HIDDEN_BIAS = 0.1


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    input_dim: int
    num_classes: int
    hidden_width: int = 0
    hidden_depth: int = 0
    leak: float = 0.01

    def __post_init__(self):
        if self.kind not in (LINEAR, MLP):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if self.kind == MLP and (self.hidden_width < 1 or self.hidden_depth < 1):
            raise ValueError("mlp needs positive hidden_width and hidden_depth")

    @classmethod
    def linear(cls, input_dim, num_classes):
        return cls(LINEAR, input_dim, num_classes)

    @classmethod
    def mlp(cls, input_dim, num_classes, width=600, depth=2):
        return cls(MLP, input_dim, num_classes, width, depth)

    def layer_shapes(self):
        """(out, in) shape of every layer, input side first."""
        if self.kind == LINEAR:
            return [(self.num_classes, self.input_dim)]
        shapes = [(self.hidden_width, self.input_dim)]
        shapes += [(self.hidden_width, self.hidden_width)] * (self.hidden_depth - 1)
        shapes.append((self.num_classes, self.hidden_width))
        return shapes

    @property
    def num_params(self):
        return sum(o * i + o for o, i in self.layer_shapes())


@dataclass(frozen=True, eq=False)
class Hypothesis:
    """A model together with its parameters; the Dirac predictor at ``params``."""

    spec: ModelSpec
    params: np.ndarray

    def __post_init__(self):
        params = np.asarray(self.params, dtype=np.float64)
        if params.ndim != 1 or params.size != self.spec.num_params:
            raise ValueError(
                f"expected {self.spec.num_params} parameters, got shape {params.shape}")
        if not np.all(np.isfinite(params)):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "params", params)

    def __call__(self, x):
        return forward(self, x)


def unpack(spec, w):
    """Views ``[(W, b), ...]`` into the flat vector ``w``, input layer first."""
    layers = []
    pos = 0
    for out, inp in spec.layer_shapes():
        W = w[pos:pos + out * inp].reshape(out, inp)
        pos += out * inp
        b = w[pos:pos + out]
        pos += out
        layers.append((W, b))
    return layers


def init_weights(spec, seed, zero_linear=False):
    """Initial parameter vector: clipped N(0, 0.04^2) weights, hidden biases
    0.1, output bias 0.  ``zero_linear`` returns the all-zero vector for
    linear models instead."""
    w = np.zeros(spec.num_params)
    if spec.kind == LINEAR and zero_linear:
        return w
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = unpack(spec, w)
    for k, (W, b) in enumerate(layers):
        sample = rng.standard_normal(W.size) * INIT_SIGMA
        W[...] = np.clip(sample, -2 * INIT_SIGMA, 2 * INIT_SIGMA).reshape(W.shape)
        if k < len(layers) - 1:
            b[...] = HIDDEN_BIAS
    return w


def leaky_relu(a, leak=0.01):
    return np.where(a > 0, a, leak * a)


def scores(spec, w, X):
    """Score matrix of shape (n, num_classes) for inputs X of shape (n, d)."""
    H = X
    layers = unpack(spec, w)
    for W, b in layers[:-1]:
        H = leaky_relu(H @ W.T + b, spec.leak)
    W, b = layers[-1]
    return H @ W.T + b


def forward(h, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != h.spec.input_dim or x.ndim > 2:
        raise ValueError(f"input has shape {x.shape}, expected (..., {h.spec.input_dim})")
    if x.ndim == 1:
        return scores(h.spec, h.params, x[None, :])[0]
    return scores(h.spec, h.params, x)


def param_distance(w, w2):
    """Euclidean distance between parameter vectors, i.e. W1 between Diracs."""
    w = np.asarray(w, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    if w.shape != w2.shape:
        raise ValueError(f"dimension mismatch: {w.shape} vs {w2.shape}")
    return float(np.linalg.norm(w - w2))


# Hypothesis file: 8-byte magic, then little-endian header fields
#   u32 version, u32 kind (0 linear, 1 mlp), u32 input_dim, u32 num_classes,
#   u32 hidden_width, u32 hidden_depth, f64 leak, u64 num_params
# followed by num_params little-endian float64 values.
_MAGIC = b"WPBHYP\x00\x01"
_HEADER = struct.Struct("<6IdQ")
_KINDS = {LINEAR: 0, MLP: 1}


def save_hypothesis(path, h):
    spec = h.spec
    header = _HEADER.pack(1, _KINDS[spec.kind], spec.input_dim, spec.num_classes,
                          spec.hidden_width, spec.hidden_depth, spec.leak, spec.num_params)
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(header)
        f.write(h.params.astype("<f8").tobytes())


def load_hypothesis(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != _MAGIC:
        raise ValueError(f"{path}: not a hypothesis file")
    version, kind, d, k, width, depth, leak, n = _HEADER.unpack_from(blob, 8)
    if version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    kind_name = {v: name for name, v in _KINDS.items()}[kind]
    spec = ModelSpec(kind_name, d, k, width, depth, leak)
    start = 8 + _HEADER.size
    params = np.frombuffer(blob, dtype="<f8", count=n, offset=start)
    if params.size != spec.num_params or len(blob) != start + 8 * n:
        raise ValueError(f"{path}: truncated or inconsistent parameter block")
    return Hypothesis(spec, params.astype(np.float64))
