"""Multi-class margin (hinge) loss, 0/1 loss, and hand-derived gradients.

Subgradient conventions at kinks: a hinge term whose argument is exactly 0
contributes no gradient; leaky-ReLU at exactly 0 uses the ``leak`` slope.
"""
from dataclasses import dataclass

import numpy as np

from .models import LINEAR, unpack, scores

OVER_CLASSES = "classes"
OVER_CLASSES_MINUS_ONE = "classes_minus_one"


@dataclass(frozen=True)
class LossConfig:
    eta: float = 1.0
    normalization: str = OVER_CLASSES

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.normalization not in (OVER_CLASSES, OVER_CLASSES_MINUS_ONE):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    def denominator(self, num_classes):
        if self.normalization == OVER_CLASSES:
            return num_classes
        return num_classes - 1


def _check_labels(y, num_classes):
    y = np.asarray(y)
    if np.any(y < 0) or np.any(y >= num_classes):
        raise ValueError(f"labels must lie in 0..{num_classes - 1}")
    return y


def _hinge(S, y, eta):
    """Hinge arguments 1 - eta (s_y - s_y') with the true-class column zeroed."""
    n = S.shape[0]
    rows = np.arange(n)
    M = 1.0 - eta * (S[rows, y][:, None] - S)
    M[rows, y] = 0.0
    return M


def margin_losses(S, y, cfg):
    """Per-example margin loss for a score matrix S of shape (n, |Y|)."""
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    y = _check_labels(np.atleast_1d(y), S.shape[1])
    M = _hinge(S, y, cfg.eta)
    return np.maximum(M, 0.0).sum(axis=1) / cfg.denominator(S.shape[1])


def margin_loss(scores_, y, cfg):
    return float(margin_losses(np.asarray(scores_)[None, :], [y], cfg)[0])


def zero_one_losses(S, y):
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    y = _check_labels(np.atleast_1d(y), S.shape[1])
    rows = np.arange(S.shape[0])
    others = S.copy()
    others[rows, y] = -np.inf
    return (S[rows, y] - others.max(axis=1) <= 0).astype(np.float64)


def zero_one_loss(scores_, y):
    return int(zero_one_losses(np.asarray(scores_)[None, :], [y])[0])


def zero_one_risk(spec, w, X, y):
    if len(y) == 0:
        return 0.0
    return float(zero_one_losses(scores(spec, w, X), y).mean())


def _score_grad(S, y, cfg):
    """Per-example losses and d(loss)/d(scores)."""
    c = cfg.denominator(S.shape[1])
    M = _hinge(S, y, cfg.eta)
    active = (M > 0).astype(np.float64)
    dS = active * (cfg.eta / c)
    dS[np.arange(S.shape[0]), y] = -dS.sum(axis=1)
    return np.maximum(M, 0.0).sum(axis=1) / c, dS


def risk_and_grad(spec, w, X, y, cfg):
    """Mean margin loss over (X, y) and its gradient w.r.t. the flat ``w``."""
    X = np.atleast_2d(X)
    y = _check_labels(np.atleast_1d(y), spec.num_classes)
    n = X.shape[0]
    layers = unpack(spec, w)
    acts = [X]
    pre = []
    H = X
    for W, b in layers[:-1]:
        A = H @ W.T + b
        pre.append(A)
        H = np.where(A > 0, A, spec.leak * A)
        acts.append(H)
    W, b = layers[-1]
    S = H @ W.T + b
    losses, dS = _score_grad(S, y, cfg)
    dS /= n

    grad = np.zeros_like(w)
    glayers = unpack(spec, grad)
    gW, gb = glayers[-1]
    gW[...] = dS.T @ acts[-1]
    gb[...] = dS.sum(axis=0)
    dH = dS @ W
    for k in range(len(layers) - 2, -1, -1):
        A = pre[k]
        dA = dH * np.where(A > 0, 1.0, spec.leak)
        gW, gb = glayers[k]
        gW[...] = dA.T @ acts[k]
        gb[...] = dA.sum(axis=0)
        if k > 0:
            dH = dA @ layers[k][0]
    return float(losses.mean()), grad


def margin_risk(spec, w, X, y, cfg):
    if len(y) == 0:
        return 0.0
    return float(margin_losses(scores(spec, w, X), y, cfg).mean())


def loss_value_grad(h, z, cfg):
    """Loss of hypothesis ``h`` at one example ``z = (x, y)`` and its gradient."""
    x, y = z
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (h.spec.input_dim,):
        raise ValueError(f"input has shape {x.shape}, expected ({h.spec.input_dim},)")
    return risk_and_grad(h.spec, h.params, x[None, :], [y], cfg)


@dataclass(frozen=True)
class LipschitzConstant:
    value: float
    provenance: str  # "lemma", "user" or "empirical"

    def __float__(self):
        return self.value

    @property
    def is_proof(self):
        return self.provenance in ("lemma", "user")


def lipschitz_constant(spec, cfg, mode="lemma", *, sqrt2=False, pairs=None, X=None, y=None):
    """Lipschitz constant of the loss w.r.t. the parameter vector.

    ``mode="lemma"`` (linear models, inputs in the unit ball) returns the
    proved constant 2*eta, or sqrt(2)*eta with ``sqrt2=True``.
    ``mode="empirical"`` returns the largest observed ratio
    |l(w,z) - l(w',z)| / ||w - w'|| over ``pairs`` of parameter vectors and
    the examples ``(X, y)``; this is a lower estimate, not a certified bound.
    """
    if mode == "lemma":
        if spec.kind != LINEAR:
            raise ValueError("the lemma constant only covers linear models")
        return LipschitzConstant((np.sqrt(2.0) if sqrt2 else 2.0) * cfg.eta, "lemma")
    if mode != "empirical":
        raise ValueError(f"unknown mode {mode!r}")
    if pairs is None or X is None or y is None:
        raise ValueError("empirical mode needs pairs, X and y")
    best = None
    for w, w2 in pairs:
        dist = np.linalg.norm(np.asarray(w) - np.asarray(w2))
        if dist == 0:
            continue
        diff = np.abs(margin_losses(scores(spec, w, X), y, cfg)
                      - margin_losses(scores(spec, w2, X), y, cfg))
        ratio = float(diff.max()) / dist
        best = ratio if best is None else max(best, ratio)
    if best is None:
        raise ValueError("no pair with positive distance")
    return LipschitzConstant(best, "empirical")
