import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import separable_toy
from wpbayes.data import Dataset
from wpbayes.losses import LossConfig
from wpbayes.models import ModelSpec
from wpbayes.online import (OnlineConfig, log_barrier, log_barrier_grad, ogd_train, online_step,
                            online_train)


def test_barrier_values():
    assert log_barrier(-1.0, 1.0) == 0.0
    assert log_barrier(-1e-4, 100.0) == pytest.approx(0.02 * math.log(100), abs=1e-15)
    assert log_barrier(0.0, 100.0) == pytest.approx(0.10210340371976183, abs=1e-15)
    with pytest.raises(ValueError):
        log_barrier(-1.0, 0.0)


@pytest.mark.parametrize("t", [1.0, 10.0, 100.0])
def test_barrier_junction_smooth(t):
    a = -1.0 / t ** 2
    inner = -math.log(-a) / t
    outer = t * a - math.log(1.0 / t ** 2) / t + 1.0 / t
    assert abs(inner - outer) <= 1e-12
    assert abs(log_barrier(a, t) - outer) <= 1e-12
    assert abs(-1.0 / (t * a) - t) <= 1e-12
    assert abs(log_barrier_grad(a, t) - log_barrier_grad(a + 1e-15, t)) <= 1e-12 * t


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.sampled_from([1.0, 10.0, 100.0]))
def test_barrier_convex_nondecreasing(a, b, t):
    lo, hi = min(a, b), max(a, b)
    assert math.isfinite(log_barrier(lo, t))
    assert log_barrier(lo, t) <= log_barrier(hi, t) + 1e-12
    mid = log_barrier((lo + hi) / 2, t)
    assert mid <= (log_barrier(lo, t) + log_barrier(hi, t)) / 2 + 1e-9
    assert log_barrier_grad(lo, t) <= log_barrier_grad(hi, t) + 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        OnlineConfig(inner_steps=0)
    with pytest.raises(ValueError):
        OnlineConfig(barrier_t=0)
    with pytest.raises(ValueError):
        OnlineConfig(radius=-1)


def test_stationary_example_does_not_move():
    spec = ModelSpec.linear(2, 2)
    w = np.array([5.0, 0.0, -5.0, 0.0, 0.0, 0.0])
    from wpbayes.losses import risk_and_grad
    x, y = np.array([[1.0, 0.0]]), [0]
    new, _ = online_step(w, lambda v: risk_and_grad(spec, v, x, y, LossConfig())[1],
                         OnlineConfig())
    assert np.linalg.norm(new - w) <= 1e-6


def test_single_step_zero_gradient_unchanged(rng):
    w = rng.normal(size=4)
    new, _ = online_step(w, lambda v: np.zeros(4), OnlineConfig(inner_steps=1))
    assert np.array_equal(new, w)


@pytest.mark.parametrize("steps,alpha", [(10, 10000.0), (200, 1.0), (2000, 1.0)])
def test_adversarial_step_respects_soft_constraint(steps, alpha):
    t = 100.0
    cfg = OnlineConfig(inner_steps=steps, barrier_t=t, alpha=alpha)
    new, _ = online_step(np.zeros(1), lambda v: np.array([-10.0]), cfg)
    # the inner objective -10 w + B(|w| - 1), minimised on a dense grid
    target = oracles.grid_argmin(lambda v: -10 * v + log_barrier(abs(v) - 1, t), -2.0, 2.0, 400000)
    assert abs(target - (1 - 1 / (10 * t))) <= 2e-5
    assert target <= 1 + 10 / t
    assert abs(new[0]) <= 1 + 10 / t


def test_ogd_is_degenerate_alg2_bitwise():
    data = separable_toy(80, seed=1)
    spec = ModelSpec.linear(data.dim, 2)
    cfg = OnlineConfig(seed=3)
    a = ogd_train(data, spec, cfg, keep_hypotheses=True)
    b = online_train(data, spec, OnlineConfig(inner_steps=1, use_barrier=False, seed=3),
                     keep_hypotheses=True)
    assert np.array_equal(a.final.params, b.final.params)
    assert np.array_equal(a.surrogate, b.surrogate)


def test_path_length_bookkeeping():
    data = separable_toy(60, seed=2)
    spec = ModelSpec.mlp(data.dim, 2, 5, 1)
    tr = online_train(data, spec, OnlineConfig(), keep_hypotheses=True)
    ws = [tr.initial] + tr.hypotheses
    recomputed = sum(math.sqrt(sum((a - b) ** 2 for a, b in zip(u, v)))
                     for u, v in zip(ws[1:], ws[:-1]))
    assert abs(tr.path_length - recomputed) <= 1e-12
    assert len(tr.hypotheses) == len(tr.surrogate) == len(tr.step_distances) == 60


def test_repeated_example_loss_nonincreasing():
    X = np.tile([[0.6, -0.3]], (300, 1))
    data = Dataset(X, np.zeros(300, dtype=int), 2)
    spec = ModelSpec.linear(2, 2)
    tr = online_train(data, spec, OnlineConfig())
    first = int(np.argmax(tr.zero_one == 0))
    assert tr.zero_one[first] == 0
    assert np.all(np.diff(tr.surrogate[first:]) <= 1e-15)


def test_constraint_on_toy_with_aggressive_optimizer():
    data = separable_toy(200, seed=3)
    spec = ModelSpec.linear(data.dim, 2)
    cfg = OnlineConfig(alpha=1.0, inner_steps=30)
    tr = online_train(data, spec, cfg)
    assert tr.step_distances.max() <= 1 + 10 / cfg.barrier_t + 1e-6
    free = online_train(data, spec, OnlineConfig(alpha=1.0, inner_steps=30, use_barrier=False))
    assert free.path_length > tr.path_length


def test_plain_distance_term_changes_steps():
    data = separable_toy(40, seed=4)
    spec = ModelSpec.linear(data.dim, 2)
    a = online_train(data, spec, OnlineConfig(alpha=1.0))
    b = online_train(data, spec, OnlineConfig(alpha=1.0, include_plain_distance=True))
    assert not np.array_equal(a.final.params, b.final.params)


def test_eval_estimates_and_tsv(tmp_path):
    data = separable_toy(100, seed=5)
    spec = ModelSpec.linear(data.dim, 2)
    train, held = data.subset(np.arange(50)), data.subset(np.arange(50, 100))
    tr = online_train(train, spec, OnlineConfig(eval_subsample=10), held)
    assert np.all((tr.eval_risks >= 0) & (tr.eval_risks <= 1))
    assert 0 <= tr.eval_cumulative <= 1 and 0 <= tr.train_cumulative <= 1
    p = tmp_path / "trace.tsv"
    tr.write_tsv(p)
    lines = p.read_text().splitlines()
    assert lines[0].split("\t") == ["step", "surrogate", "zero_one", "step_distance",
                                    "cum_train", "cum_eval"]
    assert len(lines) == 51
    dists = [float(l.split("\t")[3]) for l in lines[1:]]
    assert dists == tr.step_distances.tolist()


def test_online_deterministic():
    data = separable_toy(50, seed=6)
    spec = ModelSpec.linear(data.dim, 2)
    a = online_train(data, spec, OnlineConfig(seed=2))
    b = online_train(data, spec, OnlineConfig(seed=2))
    assert np.array_equal(a.final.params, b.final.params)


def test_empty_stream_rejected():
    spec = ModelSpec.linear(2, 2)
    with pytest.raises(ValueError):
        online_train(Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int), 2), spec, OnlineConfig())
