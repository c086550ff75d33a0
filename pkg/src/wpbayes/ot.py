"""Order-1 Wasserstein distance between finite discrete measures.

Measure file format (text, whitespace separated)::

    n dim
    weight x_1 ... x_dim        # n rows
"""
import itertools
from dataclasses import dataclass

import numpy as np
from scipy import optimize, sparse

MAX_SUPPORT = 256


def euclidean(a, b):
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.float64)
        if support.ndim == 1:
            support = support[:, None]
        weights = np.asarray(self.weights, dtype=np.float64)
        if support.shape[0] == 0:
            raise ValueError("support must be non-empty")
        if weights.shape != (support.shape[0],):
            raise ValueError("one weight per support point is required")
        if np.any(np.isnan(support)) or np.any(np.isnan(weights)):
            raise ValueError("NaN in measure")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def dirac(cls, point):
        return cls(np.asarray(point, dtype=np.float64)[None, :], [1.0])

    @classmethod
    def uniform(cls, points):
        points = np.asarray(points, dtype=np.float64)
        n = points.shape[0]
        return cls(points, np.full(n, 1.0 / n))

    def __len__(self):
        return self.support.shape[0]


def cost_matrix(mu, nu, metric=None):
    if metric is None:
        diff = mu.support[:, None, :] - nu.support[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=-1))
    return np.array([[metric(a, b) for b in nu.support] for a in mu.support])


def transport_plan(mu, nu, metric=None):
    """Optimal coupling and its cost, from the transportation linear program."""
    n, k = len(mu), len(nu)
    if n > MAX_SUPPORT or k > MAX_SUPPORT:
        raise ValueError(f"support sizes ({n}, {k}) exceed the limit {MAX_SUPPORT}")
    C = cost_matrix(mu, nu, metric)
    if n == 1 or k == 1:
        plan = np.outer(mu.weights, nu.weights)
        return plan, float((plan * C).sum())
    rows = sparse.kron(sparse.eye(n), np.ones((1, k)))
    cols = sparse.kron(np.ones((1, n)), sparse.eye(k))
    A_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([mu.weights, nu.weights])
    res = optimize.linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                           method="highs-ds",
                           options={"primal_feasibility_tolerance": 1e-10,
                                    "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = np.maximum(res.x.reshape(n, k), 0.0)
    return plan, float((plan * C).sum())


def w1_exact(mu, nu, metric=None):
    """Exact W1 between ``mu`` and ``nu`` (Euclidean ground cost by default)."""
    if len(mu) == 1 and len(nu) == 1:
        return euclidean(mu.support[0], nu.support[0]) if metric is None \
            else float(metric(mu.support[0], nu.support[0]))
    return transport_plan(mu, nu, metric)[1]


def w1_dirac(w, w2):
    """W1 between two Dirac masses: the ground distance of their locations."""
    return euclidean(w, w2)


def w1_brute_force(mu, nu, metric=None):
    """Minimum over all permutation couplings; valid for equal-size uniform
    measures, where an optimal coupling is a permutation."""
    n = len(mu)
    if len(nu) != n:
        raise ValueError("brute force needs equal support sizes")
    if n > 6:
        raise ValueError("brute force limited to n <= 6")
    for m in (mu, nu):
        if np.any(np.abs(m.weights - 1.0 / n) > 1e-12):
            raise ValueError("brute force needs uniform weights")
    metric = metric or euclidean
    C = [[metric(a, b) for b in nu.support] for a in mu.support]
    best = min(sum(C[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    return best / n


def w1_line(mu, nu):
    """W1 on the real line as the area between the two CDFs."""
    if mu.support.shape[1] != 1 or nu.support.shape[1] != 1:
        raise ValueError("w1_line needs one-dimensional supports")
    xs = np.concatenate([mu.support[:, 0], nu.support[:, 0]])
    ws = np.concatenate([mu.weights, -nu.weights])
    order = np.argsort(xs, kind="stable")
    xs, ws = xs[order], ws[order]
    cdf_gap = np.cumsum(ws)[:-1]
    return float(np.sum(np.abs(cdf_gap) * np.diff(xs)))


def read_measure(path):
    with open(path) as f:
        lines = [ln.split() for ln in f if ln.strip() and not ln.lstrip().startswith("#")]
    n, dim = int(lines[0][0]), int(lines[0][1])
    rows = np.array(lines[1:], dtype=np.float64)
    if rows.shape != (n, dim + 1):
        raise ValueError(f"{path}: expected {n} rows of {dim + 1} values, got {rows.shape}")
    return DiscreteMeasure(rows[:, 1:], rows[:, 0])


def write_measure(path, measure):
    n, dim = measure.support.shape
    with open(path, "w") as f:
        f.write(f"{n} {dim}\n")
        for w, x in zip(measure.weights, measure.support):
            f.write(" ".join(repr(float(v)) for v in (w, *x)) + "\n")
