# -*- coding: UTF-8 -*-
#!/usr/bin/env python
"""
Two-step tail fitting.

For every candidate lower bound k_min the parameters of a family are
maximum likelihood estimates on the bins k >= k_min; the candidate whose
fitted complementary cumulative distribution is closest to the empirical
one (residual sum of squares over every integer bin in [k_min, k_max])
is selected.

Likelihoods are evaluated per observation (frequencies, not counts), so
multiplying a histogram by an integer changes no estimate.
"""

import math
import warnings
from collections import OrderedDict
from functools import partial

import numpy as np
from scipy import optimize

from tailfit.defaults import (
    ALPHA_BOUNDS, ALPHA_XATOL, FAMILIES, GRID_POINTS, KMIN_HI_KB, KMIN_LO_KB,
    LOGNORMAL_RESTARTS, LOGNORMAL_XATOL, MIN_TAIL_COUNT, MU_BOUNDS, SIGMA_BOUNDS,
)
from tailfit.distributions import (
    ExponentialModel, LogNormalModel, PowerLawModel, check_bin,
    log_lognormal_normalizer, log_powerlaw_normalizer, log_likelihood,
)
from tailfit.errors import (
    BoundaryWarning, DegenerateTailError, DomainError, EmptyTailError, NoFitError,
)
from tailfit.helpers import Logger
from tailfit.histogram import empirical_ccdf
from tailfit.workers import run_parallel

logger = Logger(__name__)

ALPHA_FLOOR = ALPHA_BOUNDS[0] + 1e-6
BOUNDARY_SLACK = 1e-5


class FitResult(object):

    def __init__(self, family, model, rss, tail_count, total, log_likelihood, k_max, flags=()):
        self._family = family
        self._model = model
        self._rss = float(rss)
        self._tail_count = int(tail_count)
        self._tail_fraction = tail_count / float(total) if total else 0.0
        self._log_likelihood = float(log_likelihood)
        self._k_max = k_max
        self._flags = tuple(flags)

    def __repr__(self):
        return "<FitResult {} k_min={} rss={:.4g}>".format(self._family, self.k_min, self._rss)

    @property
    def family(self):
        return self._family

    @property
    def model(self):
        return self._model

    @property
    def params(self):
        return self._model.params()

    @property
    def k_min(self):
        return self._model.k_min

    @property
    def k_max(self):
        return self._k_max

    @property
    def rss(self):
        return self._rss

    @property
    def tail_count(self):
        return self._tail_count

    @property
    def tail_fraction(self):
        return self._tail_fraction

    @property
    def log_likelihood(self):
        return self._log_likelihood

    @property
    def flags(self):
        return self._flags

    def as_dict(self):
        data = OrderedDict()
        data["family"] = self._family
        data.update(self.params)
        data["k_min"] = self.k_min
        data["k_max"] = self._k_max
        data["rss"] = self._rss
        data["tail_fraction"] = self._tail_fraction
        data["tail_count"] = self._tail_count
        data["log_likelihood"] = self._log_likelihood
        data["flags"] = list(self._flags)
        return data


class ComparisonReport(object):
    """Per-family best fits, the family with the smallest rss, and the rss ratio."""

    def __init__(self, fits, failures=None):
        self._fits = OrderedDict(fits)
        self._failures = OrderedDict(failures or {})
        ranked = sorted(self._fits.values(), key=lambda fit: (fit.rss, FAMILIES.index(fit.family)))
        self._selected = ranked[0].family if ranked else None
        self._rss_ratio = None
        if len(ranked) >= 2:
            second = ranked[1].rss
            self._rss_ratio = ranked[0].rss / second if second > 0 else 1.0

    @property
    def fits(self):
        return OrderedDict(self._fits)

    @property
    def failures(self):
        return OrderedDict(self._failures)

    @property
    def selected_family(self):
        return self._selected

    @property
    def selected(self):
        return self._fits.get(self._selected)

    @property
    def rss_ratio(self):
        return self._rss_ratio

    def as_dict(self):
        families = OrderedDict()
        for family in FAMILIES:
            if family in self._fits:
                families[family] = self._fits[family].as_dict()
            elif family in self._failures:
                error = self._failures[family]
                families[family] = OrderedDict([
                    ("error", str(error)),
                    ("causes", OrderedDict((str(k), m) for k, m in sorted(getattr(error, "causes", {}).items()))),
                ])
        data = OrderedDict()
        data["families"] = families
        data["selected_family"] = self._selected
        data["rss_ratio"] = self._rss_ratio
        return data


def kmin_grid(lo=KMIN_LO_KB, hi=KMIN_HI_KB, points=GRID_POINTS):
    """
    Logarithmically spaced integer k_min candidates in [lo, hi].

    >>> kmin_grid(1, 100, 5).tolist()
    [1, 3, 10, 32, 100]
    """
    lo, hi = check_bin(lo, "lo"), check_bin(hi, "hi")
    if hi < lo:
        raise DomainError("grid bounds out of order: {} > {}".format(lo, hi))
    if points < 1:
        raise DomainError("grid needs at least one point")
    grid = np.rint(np.logspace(math.log10(lo), math.log10(hi), int(points)))
    return np.unique(grid.astype(np.int64))


def _tail(hist, k_min, min_count=MIN_TAIL_COUNT):
    k_min = check_bin(k_min, "k_min")
    ks, ns = hist.tail(k_min)
    n_tail = int(ns.sum())
    if n_tail == 0:
        raise EmptyTailError("no counts at or above k_min={}".format(k_min))
    if n_tail < min_count:
        raise EmptyTailError("{} counts at or above k_min={}, need {}".format(n_tail, k_min, min_count))
    weights = ns / float(n_tail)
    return k_min, ks, weights


def _fit_powerlaw(hist, k_min, min_count=MIN_TAIL_COUNT):
    k_min, ks, weights = _tail(hist, k_min, min_count)
    if len(ks) < 2:
        raise DegenerateTailError("single distinct bin k={} above k_min, alpha unidentified".format(ks[0]))
    mean_log = float(np.dot(weights, np.log(ks)))

    def negative_ll(alpha):
        return alpha * mean_log + log_powerlaw_normalizer(alpha, k_min)

    res = optimize.minimize_scalar(
        negative_ll, bounds=(ALPHA_FLOOR, ALPHA_BOUNDS[1]), method="bounded",
        options={"xatol": ALPHA_XATOL},
    )
    alpha = float(res.x)
    flags = []
    if alpha - ALPHA_FLOOR < BOUNDARY_SLACK or ALPHA_BOUNDS[1] - alpha < BOUNDARY_SLACK:
        flags.append("alpha_at_boundary")
        logger.debug("alpha={:.6f} on the domain boundary at k_min={}".format(alpha, k_min))
    return PowerLawModel(alpha, k_min), flags


def fit_powerlaw_alpha(hist, k_min, min_count=MIN_TAIL_COUNT):
    """
    Maximum likelihood exponent of the discrete power law on k >= k_min,
    by bounded scalar maximization over alpha in (1, 6].
    """
    model, flags = _fit_powerlaw(hist, k_min, min_count)
    if flags:
        warnings.warn("alpha={} at the edge of (1, 6] for k_min={}".format(model.alpha, k_min), BoundaryWarning)
    return model.alpha


def _fit_lognormal(hist, k_min, min_count=MIN_TAIL_COUNT):
    k_min, ks, weights = _tail(hist, k_min, min_count)
    if len(ks) < 2:
        raise DegenerateTailError("all tail mass at k={}, sigma undefined".format(ks[0]))
    logk = np.log(ks)
    m1 = float(np.dot(weights, logk))
    m2 = float(np.dot(weights, logk * logk))
    bounds = [MU_BOUNDS, SIGMA_BOUNDS]

    def negative_ll(theta):
        mu, sigma = theta
        if sigma <= 0:
            return np.inf
        spread = (m2 - 2.0 * mu * m1 + mu * mu) / (2.0 * sigma * sigma)
        return m1 + spread + log_lognormal_normalizer(mu, sigma, k_min)

    x0 = np.array([
        np.clip(m1, *MU_BOUNDS),
        np.clip(math.sqrt(max(m2 - m1 * m1, 0.0)), *SIGMA_BOUNDS),
    ])
    options = {"xatol": LOGNORMAL_XATOL, "fatol": 1e-13, "maxiter": 4000}
    best = optimize.minimize(negative_ll, x0, method="Nelder-Mead", bounds=bounds, options=options)
    for _ in range(LOGNORMAL_RESTARTS):
        res = optimize.minimize(negative_ll, best.x, method="Nelder-Mead", bounds=bounds, options=options)
        moved = float(np.max(np.abs(res.x - best.x)))
        if res.fun <= best.fun:
            best = res
        if moved < 1e-6:
            break
    mu, sigma = (float(v) for v in best.x)
    flags = []
    if (mu - MU_BOUNDS[0] < BOUNDARY_SLACK or MU_BOUNDS[1] - mu < BOUNDARY_SLACK
            or sigma - SIGMA_BOUNDS[0] < BOUNDARY_SLACK or SIGMA_BOUNDS[1] - sigma < BOUNDARY_SLACK):
        flags.append("lognormal_at_boundary")
    return LogNormalModel(mu, sigma, k_min), flags


def fit_lognormal(hist, k_min, min_count=MIN_TAIL_COUNT):
    """
    Maximum likelihood (mu, sigma) of the truncated discrete log-normal on
    k >= k_min: Nelder-Mead from the mean and spread of ln k over the tail,
    restarted from its own optimum until the parameters stop moving.
    """
    model, flags = _fit_lognormal(hist, k_min, min_count)
    if flags:
        warnings.warn("(mu, sigma)=({}, {}) on the parameter box edge".format(model.mu, model.sigma), BoundaryWarning)
    return model.mu, model.sigma


def _fit_exponential(hist, k_min, min_count=MIN_TAIL_COUNT):
    k_min, ks, weights = _tail(hist, k_min, min_count)
    excess = float(np.dot(weights, ks - k_min))
    if excess <= 0.0:
        raise DegenerateTailError("tail mean equals k_min={}, zero variance".format(k_min))
    return ExponentialModel(math.log1p(1.0 / excess), k_min), []


def fit_exponential(hist, k_min, min_count=MIN_TAIL_COUNT):
    """
    Closed-form MLE of the shifted geometric tail: with m = E[k - k_min],
    e^-lambda = m / (1 + m).
    """
    return _fit_exponential(hist, k_min, min_count)[0].lam


FITTERS = {
    "powerlaw": _fit_powerlaw,
    "lognormal": _fit_lognormal,
    "exponential": _fit_exponential,
}


def rss(hist, model):
    """
    Residual sum of squares between the empirical CCDF, renormalized over
    k >= k_min, and the model CCDF, summed over every integer bin in
    [k_min, k_max_observed].
    """
    k_min = model.k_min
    k_max = hist.k_max_observed
    if k_max is None or k_max < k_min or hist.tail_total(k_min) == 0:
        raise EmptyTailError("no counts at or above k_min={}".format(k_min))
    emp = empirical_ccdf(hist, k_min, k_max)
    fitted = model.ccdf_range(k_min, k_max)
    return float(np.sum((emp - fitted) ** 2))


def fit_at(hist, family, k_min, min_count=MIN_TAIL_COUNT):
    """MLE of ``family`` at one k_min, scored by rss."""
    try:
        fitter = FITTERS[family]
    except KeyError:
        raise DomainError("unknown family {!r}, expected one of {}".format(family, FAMILIES))
    model, flags = fitter(hist, k_min, min_count)
    return FitResult(
        family, model,
        rss=rss(hist, model),
        tail_count=hist.tail_total(model.k_min),
        total=hist.total,
        log_likelihood=log_likelihood(model, hist),
        k_max=hist.k_max_observed,
        flags=flags,
    )


def scan_kmin(hist, family, grid=None, min_count=MIN_TAIL_COUNT, threads=None):
    """
    Fit ``family`` at every k_min of ``grid`` and keep the candidate of
    minimal rss, ties going to the smaller k_min. Candidates run on the
    worker pool; the merge does not depend on their order.
    """
    if family not in FITTERS:
        raise DomainError("unknown family {!r}, expected one of {}".format(family, FAMILIES))
    grid = kmin_grid() if grid is None else np.unique(np.asarray([check_bin(k, "k_min") for k in grid], dtype=np.int64))
    if not len(grid):
        raise DomainError("empty k_min grid")
    candidates = [int(k) for k in grid]
    results = run_parallel(partial(fit_at, hist, family, min_count=min_count), candidates, threads)
    best = None
    causes = OrderedDict()
    for k_min, result in zip(candidates, results):
        if not result["ok"]:
            causes[k_min] = result["message"]
            continue
        fit = result["data"]
        if best is None or (fit.rss, fit.k_min) < (best.rss, best.k_min):
            best = fit
    if best is None:
        raise NoFitError(family, causes)
    logger.info("{}: k_min={} rss={:.6g} {} ({} of {} candidates failed)".format(
        family, best.k_min, best.rss, best.params, len(causes), len(candidates)))
    return best


def compare_models(hist, grid=None, families=None, min_count=MIN_TAIL_COUNT, threads=None):
    """Scan every family and rank the best fits by rss."""
    fits = OrderedDict()
    failures = OrderedDict()
    for family in families or FAMILIES:
        try:
            fits[family] = scan_kmin(hist, family, grid, min_count=min_count, threads=threads)
        except NoFitError as e:
            logger.warning(str(e))
            failures[family] = e
    return ComparisonReport(fits, failures)


def loglog_quadratic(hist, k_lo=None, k_hi=None):
    """
    Least-squares fit of ln n_k = c + a ln k - b ln^2 k over occupied bins
    in [k_lo, k_hi]. A positive leading slope with b > 0 is the log-normal
    shape of time-bearing media; a negative slope with b near 0 is scale free.
    """
    ks, ns = hist.bins, hist.values
    keep = np.ones(len(ks), dtype=bool)
    if k_lo is not None:
        keep &= ks >= k_lo
    if k_hi is not None:
        keep &= ks <= k_hi
    ks, ns = ks[keep], ns[keep]
    if len(ks) < 3:
        raise DegenerateTailError("need at least 3 occupied bins for a quadratic log-log fit")
    x = np.log(ks.astype(float))
    y = np.log(ns.astype(float))
    p2, p1, p0 = np.polyfit(x, y, 2)
    a, b = float(p1), float(-p2)
    shape = "lognormal-like" if a > 0 and b > 0 else "powerlaw-like"
    return OrderedDict([
        ("a", a), ("b", b), ("c", float(p0)),
        ("k_lo", int(ks[0])), ("k_hi", int(ks[-1])),
        ("shape", shape),
    ])


def ccdf_rows(hist):
    """(k, Pr(K >= k)) at every occupied bin, over the whole histogram."""
    ks, ns = hist.bins, hist.values
    above = np.cumsum(ns[::-1])[::-1]
    total = float(hist.total)
    return [(int(k), float(a / total)) for k, a in zip(ks, above)]


def model_ccdf_rows(fit, hist):
    """
    (k, tail_fraction * F(k)) at the occupied bins k >= k_min, so the model
    overlays the whole-corpus empirical CCDF.
    """
    ks, _ = hist.tail(fit.k_min)
    if not len(ks):
        return []
    dense = fit.model.ccdf_range(fit.k_min, int(ks[-1]))
    values = fit.tail_fraction * dense[ks - fit.k_min]
    return [(int(k), float(v)) for k, v in zip(ks, values)]
