# Data-dependent priors on a toy problem, then the penalised posterior.
import numpy as np

from wpbayes.batch import BatchConfig, alg1_train, erm_train
from wpbayes.bounds import batch_wasserstein_terms, bound_batch_nonneg, bound_batch_tight
from wpbayes.data import Dataset, split_halves
from wpbayes.losses import zero_one_risk
from wpbayes.models import ModelSpec

rng = np.random.default_rng(0)
m, d = 600, 6
X = rng.normal(size=(m, d))
w_true = rng.normal(size=d)
y = (X @ w_true + 0.3 * rng.normal(size=m) > 0).astype(int)
data = Dataset(X / np.linalg.norm(X, axis=1).max(), y, 2, "noisy-linear")
train, test = split_halves(data, 0)
spec = ModelSpec.linear(d, 2)

cfg = BatchConfig(min_iterations=3000)
h, priors, trace = alg1_train(train, spec, cfg)
e = erm_train(train, spec, cfg)
print("K", priors.partition.K, "sizes", priors.partition.sizes)
print("alg1 train/test", zero_one_risk(spec, h.params, train.features, train.labels),
      zero_one_risk(spec, h.params, test.features, test.labels))
print("erm  train/test", zero_one_risk(spec, e.params, train.features, train.labels),
      zero_one_risk(spec, e.params, test.features, test.labels))

# objective per epoch, best epoch is what gets returned
print("objective", np.round(trace.objective[:5], 4), "...", "best epoch", trace.best_epoch)

terms = batch_wasserstein_terms(h, priors)
for cert in (bound_batch_nonneg(terms, 2.0, len(train), priors.partition.K, 0.05),
             bound_batch_tight(terms, 2.0, len(train), priors.partition.K, 0.05)):
    print()
    for row in cert.table():
        print("%-14s %-40s %.4f" % row)
