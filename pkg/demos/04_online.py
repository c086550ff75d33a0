# Online learning with a soft step constraint versus plain OGD.
import numpy as np

from wpbayes.bounds import online_certificate
from wpbayes.data import Dataset, split_halves
from wpbayes.models import ModelSpec
from wpbayes.online import OnlineConfig, log_barrier, ogd_train, online_train

# the barrier: log branch left of -1/t^2, linear continuation to the right
for a in (-1.0, -0.1, -1e-4, 0.0, 0.5):
    print(a, log_barrier(a, 100.0))

rng = np.random.default_rng(1)
m, d, k = 1500, 5, 3
centers = rng.normal(size=(k, d))
y = rng.integers(0, k, size=m)
X = centers[y] + 0.8 * rng.normal(size=(m, d))
data = Dataset(X / np.linalg.norm(X, axis=1).max(), y, k, "blobs")
stream, held = split_halves(data, 0)
spec = ModelSpec.linear(d, k)

cfg = OnlineConfig(eval_subsample=300)
for name, fn in (("alg2", online_train), ("ogd", ogd_train)):
    tr = fn(stream, spec, cfg, held)
    print(name, "C_S %.3f  C_mu %.3f  path %.4f  max step %.2e" % (
        tr.train_cumulative, tr.eval_cumulative, tr.path_length, tr.step_distances.max()))

tr = online_train(stream, spec, cfg)
cert = online_certificate(tr, 2.0, 0.05)
for row in cert.table():
    print("%-14s %-40s %.4f" % row)
