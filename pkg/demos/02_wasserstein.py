# Exact W1 between small discrete measures.
import numpy as np

from wpbayes import ot

rng = np.random.default_rng(0)

# Diracs: W1 is just the distance between the two points
a, b = rng.normal(size=(2, 4))
print(ot.w1_exact(ot.DiscreteMeasure.dirac(a), ot.DiscreteMeasure.dirac(b)), np.linalg.norm(a - b))

# uniform measures in R^3, LP against brute force over permutations
xs, ys = rng.normal(size=(2, 5, 3))
mu, nu = ot.DiscreteMeasure.uniform(xs), ot.DiscreteMeasure.uniform(ys)
print("lp", ot.w1_exact(mu, nu), "brute", ot.w1_brute_force(mu, nu))

plan, cost = ot.transport_plan(mu, nu)
print(np.round(plan, 3))
print("cost", cost, "marginals", plan.sum(1), plan.sum(0))

# on the line the CDF formula agrees
p = ot.DiscreteMeasure(np.array([[0.0], [1.0], [3.0]]), np.array([0.2, 0.5, 0.3]))
q = ot.DiscreteMeasure(np.array([[0.5], [2.0]]), np.array([0.6, 0.4]))
print("line", ot.w1_line(p, q), "lp", ot.w1_exact(p, q))
