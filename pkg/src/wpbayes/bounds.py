"""Generalisation-gap certificates with Wasserstein complexity terms.

Every certificate keeps its itemised components so the total can be
recomputed.  Batch bounds take ``terms``, a list of ``(|S_i|, W_i)`` pairs
whose sizes sum to ``m``; online bounds take the list of per-step
Wasserstein terms (for Dirac chain priors, consecutive parameter
distances).

Names of the certified quantities:

    batch_nonneg   sum_i 2|S_i| L W_i / m + sum_i sqrt(2 |S_i| ln(K/delta) / m^2)
    batch_tight    same W term,             sum_i sqrt(|S_i| ln(K/delta) / (2 m^2))
    batch_heavy    same W term + (1/m) sum_i [ln(K/delta)/lam_i + lam_i/2 (Vhat_i + V_i)]
    online_nonneg  (2L/m) sum_i W_i + sqrt(2 ln(1/delta) / m)
    online_heavy   2L sum_i W_i + lam/2 sum_i (Vhat_i + V_i) + ln(1/delta)/lam
                   (bounds the cumulative gap, not its average)
    finite_h       L sqrt(2 ln(4|H|^2/delta) / m) W + 2 sqrt(ln(2/delta) / m)
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .losses import LipschitzConstant, margin_losses
from .models import scores

BATCH_NONNEG = "BatchNonNeg"
BATCH_TIGHT = "BatchTight"
BATCH_HEAVY = "BatchHeavy"
ONLINE_NONNEG = "OnlineNonNeg"
ONLINE_HEAVY = "OnlineHeavy"
FINITE_H = "FiniteH"


@dataclass(frozen=True)
class Component:
    name: str
    formula: str
    value: float


@dataclass(frozen=True)
class BoundCertificate:
    theorem: str
    delta: float
    lipschitz: LipschitzConstant
    m: int
    K: int
    wasserstein_terms: tuple
    components: tuple
    lambdas: tuple = ()
    variance_terms: tuple = ()
    notes: tuple = ()

    @property
    def total(self):
        return math.fsum(c.value for c in self.components)

    @property
    def statistical_term(self):
        return math.fsum(c.value for c in self.components if c.name != "wasserstein")

    def recompute(self):
        """Total rebuilt from the stored inputs via the defining formula."""
        L = self.lipschitz
        if self.theorem == BATCH_NONNEG:
            return bound_batch_nonneg(self.wasserstein_terms, L, self.m, self.K, self.delta).total
        if self.theorem == BATCH_TIGHT:
            return bound_batch_tight(self.wasserstein_terms, L, self.m, self.K, self.delta).total
        if self.theorem == BATCH_HEAVY:
            return bound_batch_heavy(self.wasserstein_terms, L, self.m, self.K, self.delta,
                                     self.lambdas, self.variance_terms).total
        if self.theorem == ONLINE_NONNEG:
            return bound_online_nonneg(self.wasserstein_terms, L, self.m, self.delta).total
        if self.theorem == ONLINE_HEAVY:
            return bound_online_heavy(self.wasserstein_terms, L, self.delta, self.lambdas[0],
                                      self.variance_terms).total
        if self.theorem == FINITE_H:
            card, w = self.wasserstein_terms
            return bound_finite_h(card, L, w, self.m, self.delta).total
        raise ValueError(f"unknown theorem {self.theorem!r}")

    def check(self, tol=1e-12):
        if not math.isfinite(self.total):
            raise ValueError("certificate total is not finite")
        if abs(self.recompute() - self.total) > tol:
            raise ValueError("certificate total does not match its components")
        return True

    def table(self):
        """Rows of (component, formula, value) ending with the total."""
        rows = [(c.name, c.formula, c.value) for c in self.components]
        rows.append(("total", self.theorem, self.total))
        return rows


def _lipschitz(L):
    if isinstance(L, LipschitzConstant):
        value = L.value
    else:
        L = LipschitzConstant(float(L), "user")
        value = L.value
    if not value > 0 or not math.isfinite(value):
        raise ValueError("Lipschitz constant must be positive and finite")
    return L


def _check_delta(delta):
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")


def _check_terms(terms, m, K):
    terms = tuple((int(s), float(w)) for s, w in terms)
    if len(terms) != K:
        raise ValueError(f"expected {K} terms, got {len(terms)}")
    if sum(s for s, _ in terms) != m:
        raise ValueError("set sizes must sum to m")
    if any(s < 0 for s, _ in terms):
        raise ValueError("set sizes must be non-negative")
    if any(not w >= 0 for _, w in terms):
        raise ValueError("Wasserstein terms must be non-negative")
    return terms


def _wasserstein_component(terms, L, m):
    value = math.fsum(2.0 * s * L.value * w / m for s, w in terms)
    return Component("wasserstein", "sum 2|S_i| L W_i / m", value)


def bound_batch_nonneg(terms, L, m, K, delta):
    L = _lipschitz(L)
    _check_delta(delta)
    terms = _check_terms(terms, m, K)
    log_term = math.log(K / delta)
    stat = math.fsum(math.sqrt(2.0 * s * log_term / m ** 2) for s, _ in terms)
    comps = (_wasserstein_component(terms, L, m),
             Component("statistical", "sum sqrt(2 |S_i| ln(K/delta) / m^2)", stat))
    return BoundCertificate(BATCH_NONNEG, delta, L, m, K, terms, comps)


def bound_batch_tight(terms, L, m, K, delta, loss_in_unit_interval=True):
    if not loss_in_unit_interval:
        raise ValueError("the tight variant requires a loss with values in [0, 1]")
    L = _lipschitz(L)
    _check_delta(delta)
    terms = _check_terms(terms, m, K)
    log_term = math.log(K / delta)
    stat = math.fsum(math.sqrt(s * log_term / (2.0 * m ** 2)) for s, _ in terms)
    comps = (_wasserstein_component(terms, L, m),
             Component("statistical", "sum sqrt(|S_i| ln(K/delta) / (2 m^2))", stat))
    return BoundCertificate(BATCH_TIGHT, delta, L, m, K, terms, comps,
                            notes=("assumes loss values in [0, 1]",))


def bound_batch_heavy(terms, L, m, K, delta, lambdas, variances):
    """``variances`` holds one (Vhat_i, V_i) pair per set."""
    L = _lipschitz(L)
    _check_delta(delta)
    terms = _check_terms(terms, m, K)
    lambdas = tuple(float(v) for v in lambdas)
    variances = tuple((float(a), float(b)) for a, b in variances)
    if len(lambdas) != K or len(variances) != K:
        raise ValueError("need one lambda and one variance pair per set")
    if any(not lam > 0 for lam in lambdas):
        raise ValueError("lambdas must be positive")
    if any(a < 0 or b < 0 for a, b in variances):
        raise ValueError("variances must be non-negative")
    log_term = math.log(K / delta)
    conf = math.fsum(log_term / lam for lam in lambdas) / m
    var = math.fsum(lam / 2.0 * (a + b) for lam, (a, b) in zip(lambdas, variances)) / m
    comps = (_wasserstein_component(terms, L, m),
             Component("confidence", "(1/m) sum ln(K/delta) / lambda_i", conf),
             Component("variance", "(1/m) sum lambda_i/2 (Vhat_i + V_i)", var))
    return BoundCertificate(BATCH_HEAVY, delta, L, m, K, terms, comps, lambdas, variances)


def optimal_lambdas(K, delta, variances, floor=1e-12):
    """lambda_i = sqrt(2 ln(K/delta) / (Vhat_i + V_i)), the minimiser of each bracket.

    A zero variance sum is floored at ``floor`` so lambda stays finite."""
    log_term = math.log(K / delta)
    return tuple(math.sqrt(2.0 * log_term / max(a + b, floor)) for a, b in variances)


def _check_path(path):
    path = tuple(float(w) for w in path)
    if any(not w >= 0 for w in path):
        raise ValueError("Wasserstein terms must be non-negative")
    return path


def bound_online_nonneg(path, L, m, delta):
    L = _lipschitz(L)
    _check_delta(delta)
    path = _check_path(path)
    if len(path) != m:
        raise ValueError(f"expected {m} path terms, got {len(path)}")
    comps = (Component("wasserstein", "(2L/m) sum W_i", 2.0 * L.value * math.fsum(path) / m),
             Component("statistical", "sqrt(2 ln(1/delta) / m)",
                       math.sqrt(2.0 * math.log(1.0 / delta) / m)))
    return BoundCertificate(ONLINE_NONNEG, delta, L, m, 1, path, comps)


def bound_online_heavy(path, L, delta, lam, variances):
    """Bound on the cumulative (unnormalised) gap; ``variances`` holds one
    (Vhat_i, V_i) pair per step."""
    L = _lipschitz(L)
    _check_delta(delta)
    path = _check_path(path)
    variances = tuple((float(a), float(b)) for a, b in variances)
    if len(variances) != len(path):
        raise ValueError("need one variance pair per step")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if any(a < 0 or b < 0 for a, b in variances):
        raise ValueError("variances must be non-negative")
    comps = (Component("wasserstein", "2L sum W_i", 2.0 * L.value * math.fsum(path)),
             Component("variance", "lambda/2 sum (Vhat_i + V_i)",
                       lam / 2.0 * math.fsum(a + b for a, b in variances)),
             Component("confidence", "ln(1/delta) / lambda", math.log(1.0 / delta) / lam))
    return BoundCertificate(ONLINE_HEAVY, delta, L, len(path), 1, path, comps, (float(lam),),
                            variances, notes=("bounds the cumulative gap, not the average",))


def bound_finite_h(card_h, L, W, m, delta):
    L = _lipschitz(L)
    _check_delta(delta)
    if card_h < 1:
        raise ValueError("hypothesis space must be non-empty")
    if not W >= 0:
        raise ValueError("Wasserstein term must be non-negative")
    coef = L.value * math.sqrt(2.0 * math.log(4.0 * card_h ** 2 / delta) / m)
    comps = (Component("wasserstein", "L sqrt(2 ln(4|H|^2/delta) / m) W", coef * W),
             Component("statistical", "2 sqrt(ln(2/delta) / m)",
                       2.0 * math.sqrt(math.log(2.0 / delta) / m)))
    return BoundCertificate(FINITE_H, delta, L, m, 1, (int(card_h), float(W)), comps)


def bound_batch_k1(W, L, m, delta):
    """Single-set instantiation: sqrt(2 ln(1/delta) / m) + 2 L W.

    An alternative statement of this case uses 2 sqrt(ln(1/delta) / m), which
    is looser; the value here is the direct instantiation."""
    return bound_batch_nonneg([(m, W)], L, m, 1, delta)


def bound_batch_sqrt_m(Ws, L, m, delta):
    """K = len(Ws) sets of near-equal size; with K = sqrt(m) this is
    (2L/sqrt(m)) sum W_i + sqrt(2 ln(sqrt(m)/delta) / sqrt(m))."""
    K = len(Ws)
    sizes = [len(b) for b in np.array_split(np.arange(m), K)]
    return bound_batch_nonneg(list(zip(sizes, Ws)), L, m, K, delta)


def online_certificate(trace, L, delta):
    """Online certificate from a trace; the chain priors make the Wasserstein
    terms the consecutive step distances."""
    return bound_online_nonneg(trace.step_distances, L, len(trace.step_distances), delta)


def batch_wasserstein_terms(posterior, priors):
    """(|S_i|, ||w - w_i||) pairs for a Dirac posterior and Dirac priors."""
    return [(s, float(np.linalg.norm(posterior.params - p.params)))
            for s, p in zip(priors.partition.sizes, priors.priors)]


@dataclass(frozen=True)
class MomentReport:
    estimates: tuple  # E[loss^2] per hypothesis
    counts: tuple
    max_value: float
    satisfied: bool
    provenance: str = field(default="held-out plug-in")


def _losses(h, data, cfg):
    return margin_losses(scores(h.spec, h.params, data.features), data.labels, cfg)


def estimate_moments(hypotheses, eval_data, cfg):
    """Plug-in second moments E[loss^2] of each (Dirac) hypothesis."""
    if len(eval_data) == 0:
        raise ValueError("eval data must be non-empty")
    if hasattr(hypotheses, "priors"):
        hypotheses = hypotheses.priors
    est = tuple(float(np.mean(_losses(h, eval_data, cfg) ** 2)) for h in hypotheses)
    top = max(est) if est else 0.0
    return MomentReport(est, (len(eval_data),) * len(est), top, top <= 1.0)


def estimate_variances(priors, train, eval_data, cfg):
    """Plug-in (Vhat_i, V_i) for each prior.

    The population risk inside Vhat is replaced by the held-out risk, and
    V_i = |S_i| times the held-out variance of the loss."""
    if len(eval_data) == 0:
        raise ValueError("eval data must be non-empty")
    out = []
    for h, idx in zip(priors.priors, priors.partition.sets):
        held = _losses(h, eval_data, cfg)
        mean = float(held.mean())
        own = _losses(h, train.subset(idx), cfg)
        vhat = float(np.sum((own - mean) ** 2))
        v = len(idx) * float(np.mean((held - mean) ** 2))
        out.append((vhat, v))
    return out
