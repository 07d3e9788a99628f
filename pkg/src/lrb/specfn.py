"""Special functions used throughout the package.

Wraps the handful of classical functions every other module leans on
(normal CDF, modified Bessel K, Kummer's confluent hypergeometric M,
regularized incomplete beta, generalized inverse-Gaussian density) with
consistent domain checking and numerically stable evaluation paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError, NumericError

__all__ = [
    "Tolerance",
    "norm_cdf",
    "exp_mul_norm_cdf",
    "bessel_k",
    "bessel_k_ratio",
    "kummer_m",
    "reg_inc_beta",
    "gig_density",
    "gig_log_norm",
]

_SQRT2 = np.sqrt(2.0)
_HALF_LOG_PI_OVER_2 = 0.5 * np.log(np.pi / 2.0)


@dataclass(frozen=True)
class Tolerance:
    """Convergence targets for iterative evaluations."""

    rel: float = 1e-10
    abs: float = 1e-14
    max_iter: int = 500

    def __post_init__(self):
        if self.rel <= 0 or self.abs <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")


def norm_cdf(x):
    """Standard normal CDF, accurate in both tails."""
    return 0.5 * sp.erfc(-np.asarray(x, dtype=float) / _SQRT2)


def exp_mul_norm_cdf(a, x):
    """Stable evaluation of ``exp(a) * norm_cdf(x)``.

    Handles the case where ``a`` is large positive while ``x`` is large
    negative (common in bridge moment formulas) without overflowing:
    for x < 0,  e^a Phi(x) = 0.5 * erfcx(-x/sqrt(2)) * exp(a - x^2/2).
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    neg = x < 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.exp(a) * norm_cdf(x)
        stable = 0.5 * sp.erfcx(-np.where(neg, x, 0.0) / _SQRT2) * np.exp(
            a - 0.5 * np.where(neg, x, 0.0) ** 2
        )
    out = np.where(neg, stable, direct)
    if out.ndim == 0:
        return float(out)
    return out


def _bessel_k_half_odd(n: int, x, scaled: bool):
    # K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_j (n+j)!/(j!(n-j)!) (2x)^{-j},
    # summed in log space since the terms are all positive.
    x = np.asarray(x, dtype=float)
    j = np.arange(n + 1, dtype=float)
    log_coef = sp.gammaln(n + j + 1) - sp.gammaln(j + 1) - sp.gammaln(n - j + 1)
    with np.errstate(divide="ignore"):
        log_terms = log_coef[:, None] - j[:, None] * np.log(2.0 * x[None, :])
    log_sum = sp.logsumexp(log_terms, axis=0)
    log_k = _HALF_LOG_PI_OVER_2 - 0.5 * np.log(x) + log_sum
    if not scaled:
        log_k = log_k - x
    return np.exp(log_k)


def bessel_k(nu: float, x, *, scaled: bool = False):
    """Modified Bessel function of the second kind ``K_nu(x)`` for x > 0.

    ``scaled=True`` returns ``e^x K_nu(x)``.  Half-odd-integer orders use
    the exact finite Hankel sum (evaluated in log space); other orders
    defer to scipy.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0):
        raise DomainError("bessel_k requires x > 0")
    nu = abs(float(nu))  # K_{-nu} = K_{nu}
    half = nu - 0.5
    if half >= 0 and abs(half - round(half)) < 1e-12 and round(half) <= 400:
        flat = _bessel_k_half_odd(int(round(half)), np.atleast_1d(xa).ravel(), scaled)
        out = flat.reshape(np.atleast_1d(xa).shape)
    else:
        out = sp.kve(nu, xa) if scaled else sp.kv(nu, xa)
    if xa.ndim == 0:
        return float(np.asarray(out).reshape(()))
    return out


def bessel_k_ratio(nu: float, a, b):
    """``K_nu(a) / K_nu(b)`` without underflow, via the scaled function."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = bessel_k(nu, a, scaled=True) / bessel_k(nu, b, scaled=True) * np.exp(b - a)
    if out.ndim == 0:
        return float(out)
    return out


def kummer_m(a: float, b: float, z: float, tol: Tolerance = Tolerance()) -> float:
    """Kummer's confluent hypergeometric function M(a, b, z).

    Direct power series for z >= 0; for z < 0 the reflection
    M(a,b,z) = e^z M(b-a, b, -z) keeps the terms positive in the regimes
    this package needs (b > a > 0).  Raises NumericError with the partial
    sum if the series fails to settle within ``tol.max_iter`` terms.
    """
    a = float(a)
    b = float(b)
    z = float(z)
    if b <= 0 and b == int(b):
        raise DomainError(f"kummer_m pole: b = {b} is a non-positive integer")
    if z < 0.0:
        return float(np.exp(z)) * kummer_m(b - a, b, -z, tol)
    term = 1.0
    total = 1.0
    settled = 0
    for j in range(tol.max_iter):
        term *= (a + j) * z / ((b + j) * (j + 1))
        total += term
        if term == 0.0:  # terminating series (a a non-positive integer)
            return total
        if abs(term) <= tol.abs + tol.rel * abs(total):
            settled += 1
            if settled >= 3:
                return total
        else:
            settled = 0
    raise NumericError(
        "kummer_m series did not converge",
        diagnostics={
            "a": a, "b": b, "z": z,
            "partial_sum": total, "last_term": term, "terms": tol.max_iter,
        },
    )


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError("reg_inc_beta requires a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires x in [0, 1], got {x}")
    return float(sp.betainc(a, b, x))


def _gig_check_region(lam: float, delta: float, gamma_: float) -> None:
    if delta < 0 or gamma_ < 0:
        raise DomainError("gig parameters delta, gamma_ must be non-negative")
    if lam > 0:
        ok = gamma_ > 0
    elif lam == 0:
        ok = delta > 0 and gamma_ > 0
    else:
        ok = delta > 0
    if not ok:
        raise DomainError(
            f"gig parameter region violated: lam={lam}, delta={delta}, gamma_={gamma_}"
        )


def gig_log_norm(lam: float, delta: float, gamma_: float) -> float:
    """Log of the GIG normalizing constant (the density's prefactor part).

    Returns ``log C`` such that the density is
    ``C * x^(lam-1) * exp(-(delta^2/x + gamma_^2 x)/2)`` for x > 0.
    """
    _gig_check_region(lam, delta, gamma_)
    if delta == 0.0:  # gamma(lam, rate gamma_^2/2) limit
        return lam * np.log(gamma_ * gamma_ / 2.0) - sp.gammaln(lam)
    if gamma_ == 0.0:  # inverse-gamma limit, lam < 0
        return -lam * np.log(delta * delta / 2.0) - sp.gammaln(-lam)
    arg = gamma_ * delta
    log_k = np.log(sp.kve(lam, arg)) - arg
    return lam * np.log(gamma_ / delta) - np.log(2.0) - log_k


def gig_density(x, lam: float, delta: float, gamma_: float):
    """Generalized inverse-Gaussian density at ``x`` (0 outside x > 0).

    Parameter regions: lam > 0 needs gamma_ > 0 (delta may be 0, giving a
    gamma law); lam == 0 needs both positive; lam < 0 needs delta > 0
    (gamma_ may be 0, giving a reciprocal-gamma law).
    """
    log_c = gig_log_norm(lam, delta, gamma_)
    xa = np.asarray(x, dtype=float)
    pos = xa > 0.0
    xs = np.where(pos, xa, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        log_pdf = log_c + (lam - 1.0) * np.log(xs) - 0.5 * (
            delta * delta / xs + gamma_ * gamma_ * xs
        )
    out = np.where(pos, np.exp(log_pdf), 0.0)
    if xa.ndim == 0:
        return float(out)
    return out
