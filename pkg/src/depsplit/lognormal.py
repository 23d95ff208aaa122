"""Lognormal account-balance distributions.

All functions broadcast over numpy arrays. ``mu`` and ``sigma`` are the mean
and standard deviation of ``log(s)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def norm_cdf(z):
    """Standard normal CDF; erfc keeps the lower tail accurate."""
    return 0.5 * erfc(-np.asarray(z, dtype=float) / _SQRT2)


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _log_pos(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), -np.inf)


@dataclass(frozen=True)
class Lognormal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def sample(self, eps):
        return sample(self.mu, self.sigma, eps)

    def cdf(self, x):
        return cdf(self.mu, self.sigma, x)

    def mean(self):
        return mean(self.mu, self.sigma)

    def partial_mean_below(self, limit):
        return partial_mean_below(self.mu, self.sigma, limit)

    def variance(self):
        return variance(self.mu, self.sigma)


def sample(mu, sigma, eps):
    """Reparameterized draw ``exp(mu + sigma * eps)`` for standard-normal ``eps``."""
    return np.exp(mu + sigma * eps)


def cdf(mu, sigma, x):
    """P(s <= x); zero for x <= 0."""
    return norm_cdf((_log_pos(x) - mu) / sigma)


def mean(mu, sigma):
    return np.exp(mu + 0.5 * sigma * sigma)


def variance(mu, sigma):
    s2 = sigma * sigma
    return np.expm1(s2) * np.exp(2.0 * mu + s2)


def partial_mean_below(mu, sigma, limit):
    """E[s * 1{s < limit}]."""
    return mean(mu, sigma) * norm_cdf((_log_pos(limit) - mu - sigma * sigma) / sigma)


def partial_second_moment_below(mu, sigma, limit):
    """E[s^2 * 1{s < limit}]."""
    s2 = sigma * sigma
    return np.exp(2.0 * mu + 2.0 * s2) * norm_cdf((_log_pos(limit) - mu - 2.0 * s2) / sigma)


# Derivatives with respect to (mu, sigma). Each returns (value, d/dmu, d/dsigma).

def mean_grad(mu, sigma):
    m = mean(mu, sigma)
    return m, m, sigma * m


def partial_mean_below_grad(mu, sigma, limit):
    log_l = _log_pos(limit)
    m = mean(mu, sigma)
    z = (log_l - mu - sigma * sigma) / sigma
    big_phi = norm_cdf(z)
    small_phi = norm_pdf(z)
    dz_dmu = -1.0 / sigma
    dz_dsigma = -(log_l - mu) / (sigma * sigma) - 1.0
    val = m * big_phi
    return val, val + m * small_phi * dz_dmu, sigma * val + m * small_phi * dz_dsigma


def cdf_grad(mu, sigma, x):
    z = (_log_pos(x) - mu) / sigma
    val = norm_cdf(z)
    d = norm_pdf(z)
    return val, -d / sigma, -d * z / sigma
