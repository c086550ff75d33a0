"""COCOB-Backprop: per-coordinate coin-betting optimizer without a learning rate.

For every coordinate, with ``g`` the incoming gradient:

    L <- max(L, |g|)                      running max scale
    G <- G + |g|                          sum of absolute gradients
    R <- max(R - (w - w1) * g, 0)         reward, clipped at zero
    theta <- theta + g                    sum of gradients
    w <- w1 - theta / (L * max(G + L, alpha * L)) * (L + R)

``L`` starts at a small floor so the first division is defined.
(Orabona & Tommasi, "Training Deep Networks without Learning Rates Through
Coin Betting", 2017, Algorithm 2.)
"""
from dataclasses import dataclass, replace

import numpy as np

SCALE_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class CocobState:
    w1: np.ndarray
    w: np.ndarray
    scale: np.ndarray
    grad_abs_sum: np.ndarray
    reward: np.ndarray
    grad_sum: np.ndarray
    alpha: float


def cocob_init(w0, alpha=10000.0):
    w0 = np.array(w0, dtype=np.float64)
    if not np.all(np.isfinite(w0)):
        raise ValueError("initial point must be finite")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    zeros = np.zeros_like(w0)
    return CocobState(w1=w0, w=w0.copy(), scale=np.full_like(w0, SCALE_FLOOR),
                      grad_abs_sum=zeros, reward=zeros.copy(), grad_sum=zeros.copy(),
                      alpha=float(alpha))


def cocob_step(state, grad):
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.w.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match {state.w.shape}")
    if not np.all(np.isfinite(grad)):
        raise ValueError("gradient must be finite")
    # Same operation order as the formulas above; buffers are reused to keep
    # large models cheap.
    abs_g = np.abs(grad)
    scale = np.maximum(state.scale, abs_g)
    grad_abs_sum = np.add(state.grad_abs_sum, abs_g, out=abs_g)
    reward = np.subtract(state.w, state.w1)
    reward *= grad
    np.subtract(state.reward, reward, out=reward)
    np.maximum(reward, 0.0, out=reward)
    grad_sum = state.grad_sum + grad
    denom = np.add(grad_abs_sum, scale)
    np.maximum(denom, state.alpha * scale, out=denom)
    denom *= scale
    w = np.divide(grad_sum, denom, out=denom)
    w *= scale + reward
    np.subtract(state.w1, w, out=w)
    return replace(state, w=w, scale=scale, grad_abs_sum=grad_abs_sum,
                   reward=reward, grad_sum=grad_sum)
