"""Online learning with a soft step-size constraint.

For each incoming example ``z_i`` the learner runs a few COCOB steps from
the previous hypothesis on

    loss(w, z_i) + B(||w - w_prev|| - radius)

where ``B`` is the log-barrier extension below.  OGD is the same loop with
one inner step and no barrier.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .cocob import cocob_init, cocob_step
from .losses import LossConfig, margin_losses, risk_and_grad, zero_one_losses
from .models import Hypothesis, init_weights, scores


def log_barrier(a, t):
    """Log-barrier extension: -(1/t) ln(-a) for a <= -1/t^2, linear beyond."""
    if not t > 0:
        raise ValueError("t must be positive")
    if a <= -1.0 / t ** 2:
        return -math.log(-a) / t
    return t * a - math.log(1.0 / t ** 2) / t + 1.0 / t


def log_barrier_grad(a, t):
    if not t > 0:
        raise ValueError("t must be positive")
    if a <= -1.0 / t ** 2:
        return -1.0 / (t * a)
    return t


@dataclass(frozen=True)
class OnlineConfig:
    inner_steps: int = 10
    barrier_t: float = 100.0
    radius: float = 1.0
    use_barrier: bool = True
    include_plain_distance: bool = False
    loss: LossConfig = field(default_factory=LossConfig)
    seed: int = 0
    alpha: float = 10000.0
    reset_optimizer: bool = True
    eval_subsample: int = 2000
    zero_linear_init: bool = False

    def __post_init__(self):
        if self.inner_steps < 1:
            raise ValueError("inner_steps must be at least 1")
        if not self.barrier_t > 0:
            raise ValueError("barrier_t must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")


def ogd_config(cfg):
    """The OGD baseline for ``cfg``: one inner step, no barrier, no distance term."""
    return OnlineConfig(inner_steps=1, barrier_t=cfg.barrier_t, radius=cfg.radius,
                        use_barrier=False, include_plain_distance=False, loss=cfg.loss,
                        seed=cfg.seed, alpha=cfg.alpha, reset_optimizer=cfg.reset_optimizer,
                        eval_subsample=cfg.eval_subsample,
                        zero_linear_init=cfg.zero_linear_init)


def _distance_grad(w, w_prev, cfg):
    diff = w - w_prev
    d = float(np.linalg.norm(diff))
    if d == 0:
        return None
    coef = 0.0
    if cfg.use_barrier:
        coef += log_barrier_grad(d - cfg.radius, cfg.barrier_t)
    if cfg.include_plain_distance:
        coef += 1.0
    return (coef / d) * diff if coef else None


def online_step(w_prev, loss_grad, cfg, state=None):
    """Run ``cfg.inner_steps`` COCOB steps from ``w_prev``.

    ``loss_grad(w)`` returns the loss gradient at ``w``.  ``state`` carries
    optimizer state between examples when resets are disabled; the updated
    state is returned alongside the new point.
    """
    w_prev = np.asarray(w_prev, dtype=np.float64)
    if state is None or cfg.reset_optimizer:
        state = cocob_init(w_prev, cfg.alpha)
    for _ in range(cfg.inner_steps):
        g = loss_grad(state.w)
        dg = _distance_grad(state.w, w_prev, cfg)
        if dg is not None:
            g = g + dg
        state = cocob_step(state, g)
    return state.w, state


@dataclass
class OnlineTrace:
    hypotheses: list  # w_1..w_m as flat arrays (empty unless kept)
    surrogate: np.ndarray  # loss of w_{i-1} on z_i
    zero_one: np.ndarray  # 0/1 loss of w_{i-1} on z_i
    surrogate_post: np.ndarray  # loss of w_i on z_i
    step_distances: np.ndarray  # ||w_i - w_{i-1}||
    eval_risks: np.ndarray  # 0/1 risk of w_i on the eval sample (NaN without one)
    final: Hypothesis
    initial: np.ndarray

    @property
    def path_length(self):
        return float(self.step_distances.sum())

    @property
    def train_cumulative(self):
        """C_S: average prediction 0/1 loss over the stream."""
        return float(self.zero_one.mean())

    @property
    def eval_cumulative(self):
        """C_mu estimate: average of the per-step eval risks."""
        return float(self.eval_risks.mean())

    def write_tsv(self, path):
        n = len(self.surrogate)
        cum_s = np.cumsum(self.zero_one) / np.arange(1, n + 1)
        cum_mu = np.cumsum(self.eval_risks) / np.arange(1, n + 1)
        with open(path, "w") as f:
            f.write("step\tsurrogate\tzero_one\tstep_distance\tcum_train\tcum_eval\n")
            for i in range(n):
                f.write(f"{i + 1}\t{float(self.surrogate[i])!r}\t{int(self.zero_one[i])}\t"
                        f"{float(self.step_distances[i])!r}\t{float(cum_s[i])!r}\t"
                        f"{float(cum_mu[i])!r}\n")


def online_train(stream, spec, cfg, eval_data=None, keep_hypotheses=False):
    """Process ``stream`` in order, one update per example."""
    if len(stream) == 0:
        raise ValueError("stream must be non-empty")
    X, y = stream.features, stream.labels
    n = len(stream)
    w = init_weights(spec, cfg.seed, cfg.zero_linear_init)
    w0 = w.copy()
    state = None

    if eval_data is not None:
        ne = len(eval_data)
        rng = np.random.default_rng([cfg.seed, 21])
        sub = np.sort(rng.choice(ne, size=min(cfg.eval_subsample, ne), replace=False))
        Xe, ye = eval_data.features[sub], eval_data.labels[sub]

    sur = np.empty(n)
    zo = np.empty(n)
    post = np.empty(n)
    dist = np.empty(n)
    evals = np.full(n, np.nan)
    kept = []
    for i in range(n):
        x, yi = X[i:i + 1], y[i:i + 1]
        s = scores(spec, w, x)
        sur[i] = margin_losses(s, yi, cfg.loss)[0]
        zo[i] = zero_one_losses(s, yi)[0]
        w_new, state = online_step(
            w, lambda v: risk_and_grad(spec, v, x, yi, cfg.loss)[1], cfg, state)
        dist[i] = float(np.linalg.norm(w_new - w))
        w = w_new
        post[i] = margin_losses(scores(spec, w, x), yi, cfg.loss)[0]
        if eval_data is not None:
            if i == n - 1:
                Xe, ye = eval_data.features, eval_data.labels
            evals[i] = zero_one_losses(scores(spec, w, Xe), ye).mean()
        if keep_hypotheses:
            kept.append(w.copy())
    return OnlineTrace(kept, sur, zo, post, dist, evals, Hypothesis(spec, w), w0)


def ogd_train(stream, spec, cfg, eval_data=None, keep_hypotheses=False):
    return online_train(stream, spec, ogd_config(cfg), eval_data, keep_hypotheses)
