# COCOB on scalar problems: no learning rate to tune.
import numpy as np

from wpbayes.cocob import cocob_init, cocob_step

# constant negative gradient: the iterate grows, slowly at first
s = cocob_init(np.zeros(1), alpha=10000.0)
for t in range(1, 11):
    s = cocob_step(s, np.array([-1.0]))
    print(t, float(s.w[0]))

# |w - 5|: the iterate reaches 5 quickly, then keeps oscillating around it
s = cocob_init(np.zeros(1), alpha=10000.0)
path = []
for _ in range(10_000):
    s = cocob_step(s, np.sign(s.w - 5.0))
    path.append(float(s.w[0]))
path = np.array(path)
print("last iterate", path[-1])
print("mean of last 1000", path[-1000:].mean())
print("range of last 1000", path[-1000:].min(), path[-1000:].max())

# a quadratic in 3 dimensions
target = np.array([1.0, -2.0, 0.5])
s = cocob_init(np.zeros(3), alpha=100.0)
for _ in range(2000):
    s = cocob_step(s, s.w - target)
print("quadratic", s.w)
