# -*- coding: UTF-8 -*-
#!/usr/bin/env python
"""
Discrete tail models on 1 KB bin indices.

Every model is normalized over k >= k_min (and k <= k_max when a finite
support is given). Normalizers are evaluated once, at construction, as a
direct partial sum up to a crossover index plus an Euler-Maclaurin tail
whose integral part has a closed form (power law, log-normal) or is done by
quadrature (general maximal-entropy parameters).
"""

import math
import operator

import numpy as np
from scipy import integrate, optimize, special

from tailfit.defaults import BIN_BYTES, NORMALIZER_RTOL
from tailfit.errors import DivergentSeriesError, DomainError, EmptyTailError
from tailfit.helpers import Logger

logger = Logger(__name__)

# first crossover candidate above k_min, doubled until the tail is smooth
CROSSOVER = 256
DIRECT_LIMIT = 2 ** 22
# ccdf uses the head sum within this distance of k_min, tail normalizers beyond
HEAD_WINDOW = 4096
SAMPLE_TABLE = 2 ** 20

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def bin_index(size_bytes):
    """
    Map a file size in bytes to its 1 KB bin, k = floor(size/1024) + 1.

    >>> bin_index(0), bin_index(1023), bin_index(1024)
    (1, 1, 2)
    """
    size_bytes = operator.index(size_bytes)
    if size_bytes < 0:
        raise DomainError("size_bytes must be non-negative, got {}".format(size_bytes))
    return size_bytes // BIN_BYTES + 1


def bin_indices(sizes):
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size and sizes.min() < 0:
        raise DomainError("size_bytes must be non-negative")
    return sizes // BIN_BYTES + 1


def check_bin(k, name="k"):
    try:
        k = operator.index(k)
    except TypeError:
        raise DomainError("{} must be an integer bin index, got {!r}".format(name, k))
    if k < 1:
        raise DomainError("{} must be >= 1, got {}".format(name, k))
    return k


def check_finite(**values):
    for name, value in values.items():
        if not isinstance(value, (int, float, np.integer, np.floating)) or not math.isfinite(value):
            raise DomainError("{} must be a finite real, got {!r}".format(name, value))


class _Family(object):
    """
    log g(x) = -lambda_s*x - lambda_1*ln x - lambda_2*ln^2 x + offset, the
    shape shared by every model here, with its x-derivatives for the
    Euler-Maclaurin corrections.
    """

    def __init__(self, lambda_s, lambda_1, lambda_2, offset=0.0):
        self.lambda_s = float(lambda_s)
        self.lambda_1 = float(lambda_1)
        self.lambda_2 = float(lambda_2)
        self.offset = float(offset)

    def log_terms(self, ks):
        ks = np.asarray(ks, dtype=float)
        logk = np.log(ks)
        return self.offset - self.lambda_s * ks - self.lambda_1 * logk - self.lambda_2 * logk * logk

    def log_term(self, x):
        logx = math.log(x)
        return self.offset - self.lambda_s * x - self.lambda_1 * logx - self.lambda_2 * logx * logx

    def derivatives(self, x):
        logx = math.log(x)
        a = self.lambda_1 + 2.0 * self.lambda_2 * logx
        h1 = -self.lambda_s - a / x
        h2 = (a - 2.0 * self.lambda_2) / x ** 2
        h3 = (-2.0 * self.lambda_1 + 6.0 * self.lambda_2 - 4.0 * self.lambda_2 * logx) / x ** 3
        return h1, h2, h3

    def log_integral(self, n):
        """log of the integral of g over [n, inf)."""
        raise NotImplementedError


class _PowerLawShape(_Family):

    def __init__(self, alpha):
        super(_PowerLawShape, self).__init__(0.0, alpha, 0.0)

    def log_integral(self, n):
        alpha = self.lambda_1
        return (1.0 - alpha) * math.log(n) - math.log(alpha - 1.0)


class _LogNormalShape(_Family):
    """(1/k)*exp(-(ln k - mu)^2 / (2 sigma^2)) written in the common form."""

    def __init__(self, mu, sigma):
        s2 = sigma * sigma
        super(_LogNormalShape, self).__init__(0.0, 1.0 - mu / s2, 0.5 / s2, -0.5 * mu * mu / s2)
        self.mu = mu
        self.sigma = sigma

    def log_terms(self, ks):
        logk = np.log(np.asarray(ks, dtype=float))
        return -logk - (logk - self.mu) ** 2 / (2.0 * self.sigma ** 2)

    def log_term(self, x):
        logx = math.log(x)
        return -logx - (logx - self.mu) ** 2 / (2.0 * self.sigma ** 2)

    def log_integral(self, n):
        z = (math.log(n) - self.mu) / self.sigma
        return math.log(self.sigma) + LOG_SQRT_2PI + special.log_ndtr(-z)


class _GeneralShape(_Family):

    def log_integral(self, n):
        # peak of g beyond n, if any, splits the quadrature
        peak = n
        h1 = self.derivatives(n)[0]
        if h1 > 0:
            hi = 2.0 * n
            while self.derivatives(hi)[0] > 0 and hi < 1e300:
                hi *= 2.0
            peak = optimize.brentq(lambda x: self.derivatives(x)[0], n, hi, xtol=1e-12 * hi)
        shift = max(self.log_term(n), self.log_term(peak))

        def g(x):
            return math.exp(self.log_term(x) - shift)

        total = 0.0
        if peak > n:
            total += integrate.quad(g, n, peak, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        total += integrate.quad(g, peak, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        if total <= 0.0:
            return -np.inf
        return math.log(total) + shift


def _log_tail_sum(shape, k_min, k_max=None, rtol=NORMALIZER_RTOL):
    """
    log of sum_{k=k_min}^{k_max or inf} g(k).

    Finite supports are summed directly. Infinite ones are summed directly
    up to a crossover n where g is smooth on the bin scale (|H'| <= 0.05,
    |H''| <= 1e-3) and the rest is the Euler-Maclaurin tail
    integral + g(n)/2 - g'(n)/12 + g'''(n)/720. The crossover search stops
    early when the remaining tail is below tolerance.
    """
    if k_max is not None:
        ks = np.arange(k_min, k_max + 1, dtype=float)
        return float(special.logsumexp(shape.log_terms(ks)))
    n = k_min + CROSSOVER
    while True:
        ks = np.arange(k_min, n, dtype=float)
        log_head = float(special.logsumexp(shape.log_terms(ks)))
        h1, h2, h3 = shape.derivatives(n)
        log_gn = shape.log_term(n)
        log_int = shape.log_integral(n)
        smooth = abs(h1) <= 0.05 and abs(h2) <= 1e-3
        negligible = max(log_gn, log_int) < log_head + math.log(rtol * 1e-3)
        if smooth or negligible or n - k_min >= DIRECT_LIMIT:
            break
        n = k_min + 2 * (n - k_min)
    if not smooth and not negligible:
        logger.debug("Tail crossover budget exhausted at n={} (h1={:.3g}, h2={:.3g})".format(n, h1, h2))
    correction = 0.5 - h1 / 12.0 + (h1 ** 3 + 3.0 * h1 * h2 + h3) / 720.0
    parts = [log_head, log_int]
    if correction > 0:
        parts.append(log_gn + math.log(correction))
    return float(special.logsumexp(parts))


def _check_alpha(alpha):
    check_finite(alpha=alpha)
    if alpha <= 1.0:
        raise DivergentSeriesError("power law needs alpha > 1 for sum k^-alpha to converge, got {}".format(alpha))


def _check_sigma(mu, sigma):
    check_finite(mu=mu, sigma=sigma)
    if sigma <= 0.0:
        raise DomainError("log-normal needs sigma > 0, got {}".format(sigma))


def log_powerlaw_normalizer(alpha, k_min):
    _check_alpha(alpha)
    k_min = check_bin(k_min, "k_min")
    return _log_tail_sum(_PowerLawShape(float(alpha)), k_min)


def powerlaw_normalizer(alpha, k_min):
    """Z = sum_{k >= k_min} k^-alpha, relative error <= 1e-10."""
    return math.exp(log_powerlaw_normalizer(alpha, k_min))


def log_lognormal_normalizer(mu, sigma, k_min):
    _check_sigma(mu, sigma)
    k_min = check_bin(k_min, "k_min")
    return _log_tail_sum(_LogNormalShape(float(mu), float(sigma)), k_min)


def lognormal_normalizer(mu, sigma, k_min):
    """Z = sum_{k >= k_min} (1/k) exp(-(ln k - mu)^2 / (2 sigma^2)), relative error <= 1e-10."""
    return math.exp(log_lognormal_normalizer(mu, sigma, k_min))


class TailModel(object):
    """
    Base class of the discrete tail models. Subclasses provide ``_log_weights``
    (unnormalized log pmf) and a cached ``log_z``; everything else derives
    from those two.
    """
    family = None

    def __init__(self, k_min, k_max=None):
        self._k_min = check_bin(k_min, "k_min")
        self._k_max = None
        if k_max is not None:
            self._k_max = check_bin(k_max, "k_max")
            if self._k_max < self._k_min:
                raise DomainError("k_max {} below k_min {}".format(self._k_max, self._k_min))
        self._log_z = None

    def __repr__(self):
        params = ", ".join("{}={:.6g}".format(k, v) for k, v in self.params().items())
        return "<{} {} k_min={}>".format(type(self).__name__, params, self.k_min)

    @property
    def k_min(self):
        return self._k_min

    @property
    def k_max(self):
        return self._k_max

    @property
    def log_z(self):
        return self._log_z

    @property
    def Z(self):
        return math.exp(self._log_z)

    def params(self):
        raise NotImplementedError

    def _log_weights(self, ks):
        raise NotImplementedError

    def _log_tail_weight(self, k):
        """log of the unnormalized mass at k' >= k, for k far above k_min."""
        raise NotImplementedError

    def log_pmf(self, ks):
        """Vectorized log pmf; no support checks, -inf above a finite k_max."""
        ks = np.asarray(ks, dtype=float)
        out = self._log_weights(ks) - self._log_z
        if self._k_max is not None:
            out = np.where(ks > self._k_max, -np.inf, out)
        return out

    def pmf(self, k):
        k = check_bin(k)
        if k < self._k_min:
            raise DomainError("k={} below k_min={}".format(k, self._k_min))
        if self._k_max is not None and k > self._k_max:
            return 0.0
        return float(np.exp(self.log_pmf(np.array([k]))[0]))

    def pmf_range(self, k_lo, k_hi):
        """pmf for every integer bin in [k_lo, k_hi]."""
        if k_hi < k_lo:
            return np.zeros(0)
        return np.exp(self.log_pmf(np.arange(k_lo, k_hi + 1, dtype=float)))

    def ccdf(self, k):
        """F(k) = Pr(K >= k)."""
        k = check_bin(k)
        if k < self._k_min:
            raise DomainError("k={} below k_min={}".format(k, self._k_min))
        if k == self._k_min:
            return 1.0
        if self._k_max is not None and k > self._k_max:
            return 0.0
        if k - self._k_min <= HEAD_WINDOW:
            return max(0.0, 1.0 - float(np.sum(self.pmf_range(self._k_min, k - 1))))
        return min(1.0, math.exp(self._log_tail_weight(k) - self._log_z))

    def ccdf_range(self, k_lo, k_hi):
        """F(k) for every integer bin in [k_lo, k_hi], monotone non-increasing."""
        if k_hi < k_lo:
            return np.zeros(0)
        start = self.ccdf(k_lo)
        steps = self.pmf_range(k_lo, k_hi - 1)
        out = np.empty(k_hi - k_lo + 1)
        out[0] = start
        out[1:] = start - np.cumsum(steps)
        return np.maximum(out, 0.0)

    def log_likelihood(self, hist):
        return log_likelihood(self, hist)

    def sample(self, n, seed):
        return sample(self, n, seed)

    def _invert_tail(self, u, lo):
        """Largest k >= lo with ccdf(k) >= u, given ccdf(lo) >= u."""
        hi = 2 * lo
        while self.ccdf(hi) >= u:
            lo, hi = hi, 2 * hi
            if self._k_max is not None and hi > self._k_max:
                hi = self._k_max + 1
                break
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.ccdf(mid) >= u:
                lo = mid
            else:
                hi = mid
        return lo


class PowerLawModel(TailModel):
    family = "powerlaw"

    def __init__(self, alpha, k_min):
        super(PowerLawModel, self).__init__(k_min)
        _check_alpha(alpha)
        self._alpha = float(alpha)
        self._log_z = log_powerlaw_normalizer(self._alpha, self._k_min)

    @property
    def alpha(self):
        return self._alpha

    def params(self):
        return {"alpha": self._alpha}

    def _log_weights(self, ks):
        return -self._alpha * np.log(ks)

    def _log_tail_weight(self, k):
        return log_powerlaw_normalizer(self._alpha, k)


class LogNormalModel(TailModel):
    family = "lognormal"

    def __init__(self, mu, sigma, k_min):
        super(LogNormalModel, self).__init__(k_min)
        _check_sigma(mu, sigma)
        self._mu = float(mu)
        self._sigma = float(sigma)
        self._log_z = log_lognormal_normalizer(self._mu, self._sigma, self._k_min)

    @property
    def mu(self):
        return self._mu

    @property
    def sigma(self):
        return self._sigma

    def params(self):
        return {"mu": self._mu, "sigma": self._sigma}

    def _log_weights(self, ks):
        logk = np.log(ks)
        return -logk - (logk - self._mu) ** 2 / (2.0 * self._sigma ** 2)

    def _log_tail_weight(self, k):
        return log_lognormal_normalizer(self._mu, self._sigma, k)


class ExponentialModel(TailModel):
    """Shifted geometric pmf (1 - e^-lambda) e^(-lambda (k - k_min)), normalized exactly."""
    family = "exponential"

    def __init__(self, lam, k_min):
        super(ExponentialModel, self).__init__(k_min)
        check_finite(lam=lam)
        if lam <= 0.0:
            raise DomainError("exponential needs lambda > 0, got {}".format(lam))
        self._lam = float(lam)
        self._log_mass = math.log(-math.expm1(-self._lam))
        # normalizer of e^(-lambda k) over k >= k_min
        self._log_z = -self._lam * self._k_min - self._log_mass

    @property
    def lam(self):
        return self._lam

    def params(self):
        return {"lambda": self._lam}

    def _log_weights(self, ks):
        return -self._lam * ks

    def log_pmf(self, ks):
        ks = np.asarray(ks, dtype=float)
        return self._log_mass - self._lam * (ks - self._k_min)

    def ccdf(self, k):
        k = check_bin(k)
        if k < self._k_min:
            raise DomainError("k={} below k_min={}".format(k, self._k_min))
        return math.exp(-self._lam * (k - self._k_min))

    def ccdf_range(self, k_lo, k_hi):
        if k_hi < k_lo:
            return np.zeros(0)
        return np.exp(-self._lam * (np.arange(k_lo, k_hi + 1, dtype=float) - self._k_min))


def pmf(model, k):
    return model.pmf(k)


def ccdf(model, k):
    return model.ccdf(k)


def log_likelihood(model, hist):
    """sum over bins k >= k_min of n_k * ln pmf(k)."""
    ks, ns = hist.tail(model.k_min)
    if ns.sum() == 0:
        raise EmptyTailError("no counts at or above k_min={}".format(model.k_min))
    return float(np.dot(ns.astype(float), model.log_pmf(ks)))


def sample(model, n, seed):
    """
    n i.i.d. bin indices by inverse-CCDF search: K is the largest k with
    ccdf(k) >= u for u uniform on (0, 1]. A table of the first SAMPLE_TABLE
    ccdf values is searched with np.searchsorted; the rare deeper draws
    fall back to a bracketing binary search on the scalar ccdf.
    """
    if not isinstance(model, TailModel):
        raise DomainError("not a tail model: {!r}".format(model))
    n = operator.index(n)
    if n < 0:
        raise DomainError("sample size must be >= 0, got {}".format(n))
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(n)
    table_hi = model.k_min + SAMPLE_TABLE - 1
    if model.k_max is not None:
        table_hi = min(table_hi, model.k_max)
    table = model.ccdf_range(model.k_min, table_hi)
    count = np.searchsorted(-table, -u, side="right")
    ks = model.k_min + count.astype(np.int64) - 1
    if model.k_max is None or table_hi < model.k_max:
        for i in np.flatnonzero(count == len(table)):
            ks[i] = model._invert_tail(u[i], table_hi)
    return ks
