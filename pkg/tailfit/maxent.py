# -*- coding: UTF-8 -*-
#!/usr/bin/env python
"""
Maximal-entropy size distributions.

The entropy -sum p ln p is maximized under normalization and up to three
expected costs: E[k], E[ln k] and E[ln^2 k]. The maximizer is

    p(k) = exp(-lambda_s k - lambda_1 ln k - lambda_2 ln^2 k) / Z

which contains the exponential, power-law and log-normal families as
corner cases. Multipliers are recovered from target moments on a finite
support by Newton iteration on the convex dual ln Z + sum lambda_i t_i.
"""

import math
from collections import OrderedDict, namedtuple

import numpy as np
from scipy import linalg, optimize, special

from tailfit.defaults import (
    CATEGORY_MIME, HESSIAN_COND_LIMIT, PROJECTION_MAX_ITER, PROJECTION_TOL, SEED,
    SOLVER_MAX_ITER, SOLVER_MAX_SUPPORT, SOLVER_TOL,
)
from tailfit.distributions import (
    ExponentialModel, LogNormalModel, PowerLawModel, TailModel, _Family, _GeneralShape,
    _log_tail_sum, check_bin, check_finite, log_lognormal_normalizer,
    log_powerlaw_normalizer, sample,
)
from tailfit.errors import ConvergenceError, DivergentSeriesError, DomainError, FeasibilityError
from tailfit.helpers import Logger
from tailfit.ingestion import EXTENSIONS
from tailfit.records import FileRecord

logger = Logger(__name__)

FEATURES = ("e_s", "e_log", "e_log2")
MULTIPLIERS = ("lambda_s", "lambda_1", "lambda_2")
NORMALIZATION_TOL = 1e-9
STATIONARITY_TOL = 1e-8


def features(ks):
    """Cost columns k, ln k, ln^2 k for every bin."""
    ks = np.asarray(ks, dtype=float)
    logk = np.log(ks)
    return np.column_stack([ks, logk, logk * logk])


class MaxEntModel(TailModel):
    """
    Three-term maximal-entropy pmf on [k_min, k_max] or [k_min, inf).

    On an infinite support the multipliers must give a convergent sum:
    lambda_s > 0, or lambda_s = 0 with lambda_2 > 0, or
    lambda_s = lambda_2 = 0 with lambda_1 > 1. Negative multipliers are
    fine on a finite support.
    """
    family = "maxent"

    def __init__(self, lambda_s, lambda_1, lambda_2, k_min, k_max=None, active=()):
        super(MaxEntModel, self).__init__(k_min, k_max)
        check_finite(lambda_s=lambda_s, lambda_1=lambda_1, lambda_2=lambda_2)
        self._lambda_s = float(lambda_s)
        self._lambda_1 = float(lambda_1)
        self._lambda_2 = float(lambda_2)
        self._shape = _Family(self._lambda_s, self._lambda_1, self._lambda_2)
        self._active = tuple(a for a in FEATURES if a in active)
        if self._k_max is None:
            self._check_convergence()
        self._log_z = self._log_normalizer(self._k_min)

    def _check_convergence(self):
        ls, l1, l2 = self._lambda_s, self._lambda_1, self._lambda_2
        if ls < 0.0:
            raise DivergentSeriesError("lambda_s must be >= 0 on an infinite support, got {}".format(ls))
        if l2 < 0.0:
            raise DivergentSeriesError("lambda_2 must be >= 0 on an infinite support, got {}".format(l2))
        if ls == 0.0 and l2 == 0.0 and l1 <= 1.0:
            raise DivergentSeriesError(
                "with lambda_s = lambda_2 = 0 the series converges only for lambda_1 > 1, got {}".format(l1))

    def _log_normalizer(self, k_lo):
        """log of the unnormalized mass on [k_lo, k_max]."""
        ls, l1, l2 = self._lambda_s, self._lambda_1, self._lambda_2
        if self._k_max is not None:
            return _log_tail_sum(self._shape, k_lo, self._k_max)
        if l1 == 0.0 and l2 == 0.0:
            return -ls * k_lo - math.log(-math.expm1(-ls))
        if ls == 0.0 and l2 == 0.0:
            return log_powerlaw_normalizer(l1, k_lo)
        if ls == 0.0:
            sigma, mu = self._lognormal_params()
            return log_lognormal_normalizer(mu, sigma, k_lo) + mu * mu / (2.0 * sigma * sigma)
        return _log_tail_sum(_GeneralShape(ls, l1, l2), k_lo)

    def _lognormal_params(self):
        s2 = 1.0 / (2.0 * self._lambda_2)
        return math.sqrt(s2), (1.0 - self._lambda_1) * s2

    @property
    def lambda_s(self):
        return self._lambda_s

    @property
    def lambda_1(self):
        return self._lambda_1

    @property
    def lambda_2(self):
        return self._lambda_2

    @property
    def active(self):
        """Constraint names the multipliers were solved for."""
        return self._active

    @property
    def multipliers(self):
        return np.array([self._lambda_s, self._lambda_1, self._lambda_2])

    def params(self):
        return OrderedDict(zip(MULTIPLIERS, (self._lambda_s, self._lambda_1, self._lambda_2)))

    def with_multipliers(self, lambda_s=None, lambda_1=None, lambda_2=None):
        return MaxEntModel(
            self._lambda_s if lambda_s is None else lambda_s,
            self._lambda_1 if lambda_1 is None else lambda_1,
            self._lambda_2 if lambda_2 is None else lambda_2,
            self._k_min, self._k_max, self._active,
        )

    def _log_weights(self, ks):
        return self._shape.log_terms(ks)

    def _log_tail_weight(self, k):
        return self._log_normalizer(k)

    def moments(self):
        """E[k], E[ln k], E[ln^2 k] over a finite support."""
        if self._k_max is None:
            raise DomainError("moments need a finite support")
        ks = np.arange(self._k_min, self._k_max + 1, dtype=float)
        p = np.exp(self.log_pmf(ks))
        return OrderedDict(zip(FEATURES, (p @ features(ks)).tolist()))


class MomentTargets(object):
    """
    Target expected costs. Only the ``active`` ones are imposed; a target
    given without an explicit ``active`` set is active.
    """

    def __init__(self, e_s=None, e_log=None, e_log2=None, active=None):
        values = {"e_s": e_s, "e_log": e_log, "e_log2": e_log2}
        if active is None:
            active = [name for name in FEATURES if values[name] is not None]
        unknown = set(active) - set(FEATURES)
        if unknown:
            raise DomainError("unknown constraints {}".format(sorted(unknown)))
        for name in active:
            if values[name] is None:
                raise DomainError("constraint {} is active but has no target".format(name))
            check_finite(**{name: values[name]})
        self._values = values
        self._active = tuple(name for name in FEATURES if name in active)

    def __repr__(self):
        return "<MomentTargets {}>".format(", ".join("{}={:.6g}".format(k, v) for k, v in self.items()))

    @classmethod
    def of(cls, pmf, support, active=FEATURES):
        """Exact moments of ``pmf`` given on every bin of ``support``."""
        ks = np.arange(support[0], support[1] + 1, dtype=float)
        e = np.asarray(pmf, dtype=float) @ features(ks)
        return cls(*e.tolist(), active=active)

    @property
    def active(self):
        return self._active

    @property
    def e_s(self):
        return self._values["e_s"]

    @property
    def e_log(self):
        return self._values["e_log"]

    @property
    def e_log2(self):
        return self._values["e_log2"]

    def index(self):
        return [FEATURES.index(name) for name in self._active]

    def vector(self):
        return np.array([self._values[name] for name in self._active], dtype=float)

    def items(self):
        return [(name, self._values[name]) for name in self._active]

    def as_dict(self):
        return OrderedDict(self.items())


def maxent_pmf(model, k):
    """exp(-lambda_s k - lambda_1 ln k - lambda_2 ln^2 k) / Z."""
    return model.pmf(k)


def shannon_entropy(p):
    """-sum p ln p in nats, with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    if p.size == 0 or not np.all(np.isfinite(p)) or p.min() < 0.0:
        raise DomainError("entropy needs finite non-negative probabilities")
    total = float(p.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise DomainError("probabilities sum to {!r}, not 1".format(total))
    return float(special.entr(p).sum())


def _check_support(support):
    k_min, k_max = support
    k_min = check_bin(k_min, "k_min")
    if k_max is None:
        raise DomainError("the solver needs a finite support")
    k_max = check_bin(k_max, "k_max")
    if k_max < k_min:
        raise DomainError("k_max {} below k_min {}".format(k_max, k_min))
    if k_max - k_min + 1 > SOLVER_MAX_SUPPORT:
        raise DomainError("support of {} bins exceeds {}".format(k_max - k_min + 1, SOLVER_MAX_SUPPORT))
    return k_min, k_max


def _check_feasible(targets, F):
    """Necessary conditions for a pmf with these moments to exist."""
    for j, (name, t) in zip(targets.index(), targets.items()):
        lo, hi = float(F[:, j].min()), float(F[:, j].max())
        if not lo < t < hi:
            raise FeasibilityError(
                "{}={:.10g} must lie strictly inside ({:.10g}, {:.10g})".format(name, t, lo, hi), bound=name)
    active = targets.active
    if "e_s" in active and "e_log" in active and not targets.e_log < math.log(targets.e_s):
        raise FeasibilityError("e_log must be below ln(e_s) (Jensen)", bound="e_log<ln(e_s)")
    if "e_log" in active and "e_log2" in active and not targets.e_log2 > targets.e_log ** 2:
        raise FeasibilityError("e_log2 must exceed e_log^2 (positive variance)", bound="e_log2>e_log^2")


def _scaled_state(theta, G):
    """Dual value, gradient and Hessian in centered, scaled coordinates."""
    lw = -G @ theta
    log_z = float(special.logsumexp(lw))
    p = np.exp(lw - log_z)
    mean = p @ G
    D = G - mean
    H = (D * p[:, None]).T @ D
    return log_z, -mean, H


def solve_lagrange(targets, support):
    """
    Multipliers of the maximal-entropy pmf on ``support`` whose active
    moments equal ``targets``.

    Newton iteration on the dual, started at zero multipliers. Features are
    centered at their targets and scaled to unit spread over the support, so
    the dual becomes ln sum exp(-theta . g(k)) with gradient -E[g] and
    Hessian Cov[g]. Steps use Armijo backtracking and Levenberg damping
    when the Hessian condition number exceeds HESSIAN_COND_LIMIT.
    """
    k_min, k_max = _check_support(support)
    if not isinstance(targets, MomentTargets):
        raise DomainError("targets must be MomentTargets")
    ks = np.arange(k_min, k_max + 1, dtype=float)
    F = features(ks)
    cols = targets.index()

    if k_min == k_max:
        for name, t in targets.items():
            value = float(F[0, FEATURES.index(name)])
            if abs(value - t) > SOLVER_TOL:
                raise FeasibilityError("{}={} but the only bin has {}".format(name, t, value), bound=name)
        return MaxEntModel(0.0, 0.0, 0.0, k_min, k_max, targets.active)
    if not cols:
        return MaxEntModel(0.0, 0.0, 0.0, k_min, k_max)
    _check_feasible(targets, F)

    t = targets.vector()
    scale = F[:, cols].std(axis=0)
    G = (F[:, cols] - t) / scale
    theta = np.zeros(len(cols))
    value, grad, H = _scaled_state(theta, G)
    residual = np.inf
    for iteration in range(1, SOLVER_MAX_ITER + 1):
        residual = float(np.max(np.abs(grad * scale)))
        logger.debug("Newton {}: residual {:.3e}".format(iteration, residual))
        if residual <= SOLVER_TOL:
            break
        eig = np.linalg.eigvalsh(H)
        damping = 0.0
        if eig[0] <= 0.0 or eig[-1] / eig[0] > HESSIAN_COND_LIMIT:
            damping = eig[-1] / HESSIAN_COND_LIMIT + max(0.0, -eig[0])
        step = -np.linalg.solve(H + damping * np.eye(len(cols)), grad)
        slope = float(grad @ step)
        t_step = 1.0
        for _ in range(60):
            candidate = theta + t_step * step
            new_value, new_grad, new_H = _scaled_state(candidate, G)
            if new_value <= value + 1e-4 * t_step * slope:
                break
            t_step *= 0.5
        else:
            # no descent left: at the floating point floor of the dual
            if residual <= SOLVER_TOL * max(1.0, float(np.max(np.abs(t)))):
                break
            raise ConvergenceError(
                "line search failed at residual {:.3e}".format(residual), residual=residual, iterations=iteration)
        theta, value, grad, H = candidate, new_value, new_grad, new_H
    else:
        residual = float(np.max(np.abs(grad * scale)))
        if residual > SOLVER_TOL:
            raise ConvergenceError(
                "no convergence in {} iterations, residual {:.3e}".format(SOLVER_MAX_ITER, residual),
                residual=residual, iterations=SOLVER_MAX_ITER)

    lambdas = np.zeros(3)
    lambdas[cols] = theta / scale
    logger.info("Solved {} on [{}, {}]: lambda = {}".format(
        ", ".join(targets.active), k_min, k_max, np.array2string(lambdas, precision=8)))
    return MaxEntModel(lambdas[0], lambdas[1], lambdas[2], k_min, k_max, targets.active)


def dual_objective(multipliers, targets, support):
    """
    ln Z(lambda) + sum lambda_i t_i over the active constraints, with
    ``multipliers`` given in the order of ``targets.active``.
    """
    k_min, k_max = _check_support(support)
    ks = np.arange(k_min, k_max + 1, dtype=float)
    F = features(ks)[:, targets.index()]
    lam = np.asarray(multipliers, dtype=float)
    if lam.shape != (len(targets.active),):
        raise DomainError("need {} multipliers, got {}".format(len(targets.active), lam.shape))
    return float(special.logsumexp(-F @ lam)) + float(lam @ targets.vector())


StationarityReport = namedtuple(
    "StationarityReport", ["trials", "max_first_order", "max_second_order", "stationary"])


def verify_stationarity(model, support=None, trials=100, seed=SEED):
    """
    Check that entropy is stationary at ``model`` along random directions
    that keep normalization and the model's active moments fixed: the
    first-order change |grad H . v| / |v| must vanish and the second-order
    change -sum v^2 / p must not be positive.
    """
    if support is None:
        support = (model.k_min, model.k_max)
    k_min, k_max = _check_support(support)
    ks = np.arange(k_min, k_max + 1, dtype=float)
    log_p = model.log_pmf(ks)
    if not np.all(np.isfinite(log_p)):
        raise DomainError("model has zero mass on part of the support")
    p = np.exp(log_p)
    J = np.column_stack([np.ones(len(ks)), features(ks)[:, [FEATURES.index(a) for a in model.active]]])
    basis = linalg.orth(J)
    if basis.shape[1] >= len(ks):
        return StationarityReport(trials, 0.0, 0.0, True)
    gradient = -(log_p + 1.0)
    rng = np.random.default_rng(seed)
    first, second = 0.0, -np.inf
    for _ in range(trials):
        v = rng.standard_normal(len(ks))
        v -= basis @ (basis.T @ v)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            continue
        v /= norm
        first = max(first, abs(float(gradient @ v)))
        second = max(second, -float(np.sum(v * v / p)))
    if not np.isfinite(second):
        second = 0.0
    stationary = first < STATIONARITY_TOL and second <= 0.0
    logger.debug("Stationarity over {} directions: first {:.3e}, second {:.3e}".format(trials, first, second))
    return StationarityReport(trials, first, second, stationary)


def _match_one(q, g):
    """Tilt q by exp(theta g) so that E[g] = 0; g changes sign on the support."""
    log_q = np.log(q)

    def mean(theta):
        lw = log_q + theta * g
        w = np.exp(lw - special.logsumexp(lw))
        return float(w @ g)

    lo, hi = -1.0, 1.0
    while mean(lo) > 0.0:
        lo *= 2.0
        if lo < -1e6:
            raise ConvergenceError("projection bracket not found", residual=mean(lo))
    while mean(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ConvergenceError("projection bracket not found", residual=mean(hi))
    theta = optimize.brentq(mean, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    lw = log_q + theta * g
    return np.exp(lw - special.logsumexp(lw))


def project_to_moments(p, support, targets, max_iter=PROJECTION_MAX_ITER, tol=PROJECTION_TOL):
    """
    Iterative proportional scaling of a strictly positive pmf onto the
    active moment constraints: each sweep exponentially tilts ``p`` to fit
    one constraint at a time until every residual is below ``tol``.
    """
    k_min, k_max = _check_support(support)
    ks = np.arange(k_min, k_max + 1, dtype=float)
    q = np.asarray(p, dtype=float)
    if q.shape != ks.shape or q.min() <= 0.0:
        raise DomainError("need a strictly positive pmf on every bin of the support")
    q = q / q.sum()
    F = features(ks)
    _check_feasible(targets, F)
    cols = targets.index()
    t = targets.vector()
    G = (F[:, cols] - t) / F[:, cols].std(axis=0)
    residual = np.inf
    for _ in range(max_iter):
        for j in range(len(cols)):
            q = _match_one(q, G[:, j])
        residual = float(np.max(np.abs(q @ F[:, cols] - t))) if cols else 0.0
        if residual < tol:
            return q
    raise ConvergenceError("projection residual {:.3e} after {} sweeps".format(residual, max_iter),
                           residual=residual, iterations=max_iter)


def from_tail_model(model):
    """Multipliers of a fitted tail model through the corner identities."""
    if isinstance(model, MaxEntModel):
        return model.with_multipliers()
    if isinstance(model, PowerLawModel):
        return MaxEntModel(0.0, model.alpha, 0.0, model.k_min, model.k_max)
    if isinstance(model, LogNormalModel):
        s2 = model.sigma ** 2
        return MaxEntModel(0.0, 1.0 - model.mu / s2, 0.5 / s2, model.k_min, model.k_max)
    if isinstance(model, ExponentialModel):
        return MaxEntModel(model.lam, 0.0, 0.0, model.k_min, model.k_max)
    raise DomainError("no maximal-entropy form for {!r}".format(model))


def _extension(mime):
    matches = sorted(ext for ext, m in EXTENSIONS.items() if m == mime)
    return matches[0] if matches else ""


def synthesize_corpus(model, n, seed, category="application", hosts=1):
    """
    ``n`` file records whose 1 KB bins are drawn from ``model``; sizes are
    (k - 1) * 1024 plus a uniform offset in [0, 1023]. Hosts are named
    synth-NNNNN.example. The same seed gives the same records.
    """
    if category not in CATEGORY_MIME:
        raise DomainError("unknown category {!r}, expected one of {}".format(category, sorted(CATEGORY_MIME)))
    if hosts < 1:
        raise DomainError("need at least one host, got {}".format(hosts))
    ks = sample(model, n, seed)
    rng = np.random.default_rng([seed, 1])
    offsets = rng.integers(0, 1024, size=len(ks))
    host_ids = rng.integers(0, hosts, size=len(ks))
    mime = CATEGORY_MIME[category]
    ext = _extension(mime)
    for i, (k, offset, host) in enumerate(zip(ks.tolist(), offsets.tolist(), host_ids.tolist())):
        yield FileRecord(
            "synth-{:05d}.example".format(host),
            "/{}/{:08d}{}".format(category, i, ext),
            mime,
            (k - 1) * 1024 + offset,
        )
