import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from wpbayes.cocob import SCALE_FLOOR, cocob_init, cocob_step

# Iterates of the scalar update from w1 = 0, alpha = 10000, gradient -1 at
# every step; produced by the pure-Python oracle before the build and frozen.
CONSTANT_TABLE = [
    0.0001,
    0.00020002,
    0.000300090006,
    0.00040024004400240003,
    0.0005005001750250012,
    0.0006009005101350164,
    0.0007014712255146137,
    0.0008022425775685417,
    0.000903244918084421,
    0.0010045087094563301,
]

# w1 = 0.3, alpha = 10, mixed-sign gradients (exercises reward clipping).
MIXED_GRADS = [-1.0, -0.5, 2.0, -3.0, 0.0, 1.5, -0.25, -0.25, 4.0, -1.0]
MIXED_TABLE = [
    0.4,
    0.4575,
    0.27499999999999997,
    0.3833333333333333,
    0.3833333333333333,
    0.3333333333333333,
    0.3417824074074074,
    0.3503129822530864,
    0.2375,
    0.2625,
]


def _run(w0, grads, alpha):
    s = cocob_init(np.array([w0]), alpha)
    out = []
    for g in grads:
        s = cocob_step(s, np.array([g]))
        out.append(float(s.w[0]))
    return out


def test_constant_gradient_table_bitwise():
    assert _run(0.0, [-1.0] * 10, 10000.0) == CONSTANT_TABLE


def test_mixed_gradient_table_bitwise():
    assert _run(0.3, MIXED_GRADS, 10.0) == MIXED_TABLE


def test_tables_agree_with_oracle():
    assert oracles.cocob_1d([-1.0] * 10) == CONSTANT_TABLE
    assert oracles.cocob_1d(MIXED_GRADS, w0=0.3, alpha=10.0) == MIXED_TABLE


def test_constant_gradient_strictly_increasing():
    assert all(b > a for a, b in zip([0.0] + CONSTANT_TABLE, CONSTANT_TABLE))


def test_fresh_state():
    s = cocob_init(np.zeros(3), 10000)
    assert s.w.tolist() == [0, 0, 0]
    assert np.all(s.grad_abs_sum == 0) and np.all(s.reward == 0) and np.all(s.grad_sum == 0)
    assert np.all(s.scale == SCALE_FLOOR)
    t = cocob_init(np.zeros(3), 10000)
    for f in ("w1", "w", "scale", "grad_abs_sum", "reward", "grad_sum"):
        assert np.array_equal(getattr(s, f), getattr(t, f))


def test_zero_gradient_keeps_point(rng):
    w0 = rng.normal(size=5)
    s = cocob_step(cocob_init(w0), np.zeros(5))
    assert np.array_equal(s.w, w0)


def test_untouched_coordinates_stay(rng):
    s = cocob_init(rng.normal(size=4))
    for _ in range(20):
        g = rng.normal(size=4)
        g[2] = 0.0
        s = cocob_step(s, g)
    assert s.w[2] == s.w1[2]


def test_step_validation():
    s = cocob_init(np.zeros(3))
    with pytest.raises(ValueError):
        cocob_step(s, np.zeros(2))
    with pytest.raises(ValueError):
        cocob_step(s, np.array([0.0, np.inf, 0.0]))
    with pytest.raises(ValueError):
        cocob_init([np.nan])
    with pytest.raises(ValueError):
        cocob_init([0.0], alpha=0)


def test_step_does_not_mutate_input_state(rng):
    s = cocob_init(rng.normal(size=6))
    s1 = cocob_step(s, rng.normal(size=6))
    snapshot = {f: getattr(s1, f).copy() for f in ("w", "scale", "grad_abs_sum", "reward", "grad_sum")}
    cocob_step(s1, rng.normal(size=6))
    for f, v in snapshot.items():
        assert np.array_equal(getattr(s1, f), v)


def test_vector_matches_scalar_oracle(rng):
    grads = rng.normal(size=(40, 3)) * rng.exponential(size=(40, 1))
    w0 = rng.normal(size=3)
    s = cocob_init(w0, 50.0)
    traj = []
    for g in grads:
        s = cocob_step(s, g)
        traj.append(s.w.copy())
    for j in range(3):
        want = oracles.cocob_1d(list(grads[:, j]), w0=float(w0[j]), alpha=50.0)
        assert [float(t[j]) for t in traj] == want


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=30),
       st.floats(0.01, 100))
def test_accumulators_monotone_and_nonnegative(grads, c):
    s = cocob_init(np.zeros(1), 100.0)
    prev_L, prev_G = s.scale.copy(), s.grad_abs_sum.copy()
    for g in grads:
        s = cocob_step(s, np.array([g * c]))
        assert s.scale[0] >= prev_L[0] and s.grad_abs_sum[0] >= prev_G[0]
        assert s.reward[0] >= 0
        prev_L, prev_G = s.scale.copy(), s.grad_abs_sum.copy()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False).filter(lambda v: abs(v) > 1e-3),
                min_size=1, max_size=25),
       st.floats(0.1, 50))
def test_scale_free_sign_pattern(grads, c):
    a = cocob_init(np.zeros(1), 10.0)
    b = cocob_init(np.zeros(1), 10.0)
    for g in grads:
        a = cocob_step(a, np.array([g]))
        b = cocob_step(b, np.array([g * c]))
        assert np.sign(a.w[0]) == np.sign(b.w[0])


def test_deterministic(rng):
    grads = rng.normal(size=(30, 8))
    runs = []
    for _ in range(2):
        s = cocob_init(np.ones(8))
        for g in grads:
            s = cocob_step(s, g)
        runs.append(s.w)
    assert np.array_equal(runs[0], runs[1])
