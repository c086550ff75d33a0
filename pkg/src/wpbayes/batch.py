"""Batch learning with Wasserstein-regularised objectives.

Priors are trained on mini-batches with their own data block removed, then
the posterior minimises

    R_U(w) + epsilon * sum_i (|S_i| / m) * ||w - w_i||

over mini-batches ``U``.  ERM and weight decay share the same loop.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cocob import cocob_init, cocob_step
from .losses import LossConfig, margin_risk, risk_and_grad
from .models import Hypothesis, init_weights

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Partition:
    sets: tuple
    m: int

    def __post_init__(self):
        seen = np.concatenate(self.sets) if self.sets else np.array([], dtype=int)
        if seen.size != self.m or not np.array_equal(np.sort(seen), np.arange(self.m)):
            raise ValueError("sets must be disjoint and cover 0..m-1")

    @property
    def K(self):
        return len(self.sets)

    @property
    def sizes(self):
        return [len(s) for s in self.sets]

    def membership(self):
        """Array mapping each example index to the block that holds it."""
        owner = np.empty(self.m, dtype=np.int64)
        for i, s in enumerate(self.sets):
            owner[s] = i
        return owner


def make_partition(m, K, seed):
    """Uniformly random balanced partition of range(m) into K blocks."""
    if not 1 <= K <= m:
        raise ValueError(f"need 1 <= K <= m, got K={K}, m={m}")
    perm = np.random.default_rng([seed, 1]).permutation(m)
    return Partition(tuple(np.sort(b) for b in np.array_split(perm, K)), m)


@dataclass(frozen=True)
class BatchConfig:
    epsilon: object = "inv_sqrt_m"
    k_alpha: float = 0.2
    batch_size: int = 100
    min_iterations: int = 20000
    loss: LossConfig = field(default_factory=LossConfig)
    seed: int = 0
    alpha: float = 10000.0
    final_iterate: bool = False
    zero_linear_init: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.k_alpha < 0:
            raise ValueError("k_alpha must be non-negative")

    def resolve_epsilon(self, m):
        return resolve_epsilon(self.epsilon, m)

    def num_priors(self, m):
        """K = max(1, round(k_alpha * sqrt(m))), at most m."""
        return int(min(m, max(1, math.floor(self.k_alpha * math.sqrt(m) + 0.5))))

    def epochs(self, m):
        per_epoch = math.ceil(m / self.batch_size)
        return max(1, math.ceil(self.min_iterations / per_epoch))


def resolve_epsilon(epsilon, m):
    if epsilon == "inv_m":
        return 1.0 / m
    if epsilon == "inv_sqrt_m":
        return 1.0 / math.sqrt(m)
    value = float(epsilon)
    if value < 0:
        raise ValueError("epsilon must be non-negative")
    return value


def minibatches(m, cfg, stream):
    """Seeded epoch-wise shuffled mini-batches; depends only on (m, cfg, stream)."""
    rng = np.random.default_rng([cfg.seed, stream])
    for _ in range(cfg.epochs(m)):
        perm = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            yield perm[start:start + cfg.batch_size]


_PRIOR_STREAM = 11
_POSTERIOR_STREAM = 12


@dataclass(frozen=True, eq=False)
class PriorSet:
    priors: list
    partition: Partition
    provenance: list  # per prior: excluded block, steps taken, steps skipped


def train_priors(data, partition, spec, cfg):
    """Train one prior per block; prior i never sees an example of block i."""
    if partition.m != len(data):
        raise ValueError("partition size does not match the data")
    X, y = data.features, data.labels
    owner = partition.membership()
    w0 = init_weights(spec, cfg.seed, cfg.zero_linear_init)
    states = [cocob_init(w0, cfg.alpha) for _ in range(partition.K)]
    steps = [0] * partition.K
    skipped = [0] * partition.K
    for U in minibatches(len(data), cfg, _PRIOR_STREAM):
        for i in range(partition.K):
            Ui = U[owner[U] != i]
            if Ui.size == 0:
                skipped[i] += 1
                continue
            _, g = risk_and_grad(spec, states[i].w, X[Ui], y[Ui], cfg.loss)
            states[i] = cocob_step(states[i], g)
            steps[i] += 1
    for i in range(partition.K):
        if skipped[i]:
            log.info("prior %d: skipped %d empty mini-batches", i, skipped[i])
    priors = [Hypothesis(spec, s.w) for s in states]
    provenance = [{"excluded_block": i, "steps": steps[i], "skipped": skipped[i]}
                  for i in range(partition.K)]
    return PriorSet(priors, partition, provenance)


def wasserstein_penalty(w, prior_params, weights, epsilon):
    """Value and gradient of epsilon * sum_i weights_i * ||w - w_i||.

    The subgradient of a term at w == w_i is taken as zero."""
    value = 0.0
    grad = np.zeros_like(w)
    for wi, a in zip(prior_params, weights):
        diff = w - wi
        dist = float(np.linalg.norm(diff))
        value += a * dist
        if dist > 0:
            grad += (a / dist) * diff
    return epsilon * value, epsilon * grad


@dataclass
class TrainTrace:
    objective: list  # full training objective at init and after every epoch
    best_epoch: int
    iterations: int

    def running_min(self):
        return np.minimum.accumulate(np.asarray(self.objective))


def minimize(data, spec, cfg, penalty=None):
    """Mini-batch COCOB on R_U(w) + penalty(w); returns the best-objective
    epoch iterate (or the last one with ``cfg.final_iterate``)."""
    X, y = data.features, data.labels
    m = len(data)
    state = cocob_init(init_weights(spec, cfg.seed, cfg.zero_linear_init), cfg.alpha)

    def objective(w):
        value = margin_risk(spec, w, X, y, cfg.loss)
        if penalty is not None:
            value += penalty(w)[0]
        return value

    trace = [objective(state.w)]
    best_w, best = state.w, trace[0]
    per_epoch = math.ceil(m / cfg.batch_size)
    iterations = 0
    for U in minibatches(m, cfg, _POSTERIOR_STREAM):
        _, g = risk_and_grad(spec, state.w, X[U], y[U], cfg.loss)
        if penalty is not None:
            g = g + penalty(state.w)[1]
        state = cocob_step(state, g)
        iterations += 1
        if iterations % per_epoch == 0:
            trace.append(objective(state.w))
            if trace[-1] < best:
                best_w, best = state.w, trace[-1]
    final = state.w if cfg.final_iterate else best_w
    best_epoch = len(trace) - 1 if cfg.final_iterate else int(np.argmin(trace))
    return Hypothesis(spec, final), TrainTrace(trace, best_epoch, iterations)


def train_posterior(data, priors, spec, cfg):
    m = len(data)
    eps = cfg.resolve_epsilon(m)
    if eps == 0:
        return minimize(data, spec, cfg)
    params = [p.params for p in priors.priors]
    weights = [s / m for s in priors.partition.sizes]
    return minimize(data, spec, cfg,
                     lambda w: wasserstein_penalty(w, params, weights, eps))


def erm_train(data, spec, cfg):
    return minimize(data, spec, cfg)[0]


def l2_train(data, spec, cfg, weight_decay):
    if weight_decay == 0:
        return erm_train(data, spec, cfg)
    return minimize(data, spec, cfg,
                     lambda w: (weight_decay * float(w @ w), 2.0 * weight_decay * w))[0]


def alg1_train(data, spec, cfg):
    """Full batch pipeline: partition, priors, posterior."""
    m = len(data)
    partition = make_partition(m, cfg.num_priors(m), cfg.seed)
    priors = train_priors(data, partition, spec, cfg)
    h, trace = train_posterior(data, priors, spec, cfg)
    return h, priors, trace
