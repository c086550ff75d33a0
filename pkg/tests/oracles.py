"""Independent reference implementations used only by the tests.

These avoid numpy where practical so they share no code path with the
package.
"""
import itertools
import math


def cocob_1d(grads, w0=0.0, alpha=10000.0, floor=1e-8):
    """Scalar COCOB-Backprop trajectory; returns the iterate after each step."""
    L, G, R, theta, w = floor, 0.0, 0.0, 0.0, w0
    out = []
    for g in grads:
        L = max(L, abs(g))
        G = G + abs(g)
        R = max(R - (w - w0) * g, 0.0)
        theta = theta + g
        w = w0 - theta / (L * max(G + L, alpha * L)) * (L + R)
        out.append(w)
    return out


def cocob_1d_stream(grad_fn, steps, w0=0.0, alpha=10000.0, floor=1e-8):
    L, G, R, theta, w = floor, 0.0, 0.0, 0.0, w0
    for _ in range(steps):
        g = grad_fn(w)
        L = max(L, abs(g))
        G = G + abs(g)
        R = max(R - (w - w0) * g, 0.0)
        theta = theta + g
        w = w0 - theta / (L * max(G + L, alpha * L)) * (L + R)
    return w


def margin_loss(scores, y, eta, denom):
    total = 0.0
    for k, s in enumerate(scores):
        if k != y:
            total += max(0.0, 1.0 - eta * (scores[y] - s))
    return total / denom


def zero_one(scores, y):
    best_other = max(s for k, s in enumerate(scores) if k != y)
    return 1 if scores[y] - best_other <= 0 else 0


def linear_scores(W, b, x):
    return [sum(wij * xj for wij, xj in zip(row, x)) + bi for row, bi in zip(W, b)]


def mlp_scores(layers, x, leak=0.01):
    h = list(x)
    for W, b in layers[:-1]:
        a = linear_scores(W, b, h)
        h = [v if v > 0 else leak * v for v in a]
    W, b = layers[-1]
    return linear_scores(W, b, h)


def euclid(a, b):
    return math.sqrt(sum((u - v) ** 2 for u, v in zip(a, b)))


def w1_permutations(xs, ys):
    """W1 between uniform measures on equal-size point lists, by enumeration."""
    n = len(xs)
    best = math.inf
    for p in itertools.permutations(range(n)):
        best = min(best, sum(euclid(xs[i], ys[p[i]]) for i in range(n)))
    return best / n


def central_difference(f, w, i, h=1e-6):
    wp = list(w)
    wm = list(w)
    wp[i] += h
    wm[i] -= h
    return (f(wp) - f(wm)) / (2 * h)


def grid_argmin(f, lo, hi, n):
    best_x, best = lo, f(lo)
    for k in range(1, n + 1):
        x = lo + (hi - lo) * k / n
        v = f(x)
        if v < best:
            best_x, best = x, v
    return best_x
