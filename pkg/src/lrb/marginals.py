"""Increment families: the marginal laws the bridges are built from.

Each family fixes a convolution semigroup ``{f_t}`` of increment densities
(or a pmf, for the counting family).  Everything downstream — bridge
kernels, conditioning, simulation — asks this module for density values,
so the evaluation paths here are written to stay accurate far into the
tails (log-space with scaled Bessel functions where needed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special as sp

from .errors import DomainError, UnsupportedRegimeError
from .specfn import exp_mul_norm_cdf, norm_cdf

__all__ = [
    "Brownian",
    "Gamma",
    "VG",
    "StableHalf",
    "CauchyF",
    "IG",
    "NIG",
    "PoissonF",
    "IncrementFamily",
    "increment_density",
    "increment_logpdf",
    "increment_cdf",
    "log_mgf",
    "poisson_pmf",
    "VgDerived",
    "vg_derive",
    "NigDerived",
    "nig_derive",
    "nig_recovery",
    "ig_moment",
]

_LOG_2PI = math.log(2.0 * math.pi)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


@dataclass(frozen=True)
class Brownian:
    """Brownian motion with drift ``theta`` and volatility ``sigma``."""

    theta: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        _require(self.sigma > 0, "Brownian: sigma must be positive")


@dataclass(frozen=True)
class Gamma:
    """Gamma subordinator normalized to unit mean rate (shape and rate both m)."""

    m: float

    def __post_init__(self):
        _require(self.m > 0, "Gamma: m must be positive")


@dataclass(frozen=True)
class VG:
    """Variance gamma: Brownian motion with drift subordinated by a gamma clock.

    ``m`` is the gamma clock's rate/shape parameter, ``theta`` the subordinated
    drift and ``sigma`` the subordinated volatility.
    """

    m: float
    theta: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        _require(self.m > 0, "VG: m must be positive")
        _require(self.sigma > 0, "VG: sigma must be positive")


@dataclass(frozen=True)
class StableHalf:
    """Stable-1/2 subordinator (one-sided, index 1/2) with scale ``c``."""

    c: float

    def __post_init__(self):
        _require(self.c > 0, "StableHalf: c must be positive")


@dataclass(frozen=True)
class CauchyF:
    """Cauchy process with scale ``c``."""

    c: float

    def __post_init__(self):
        _require(self.c > 0, "CauchyF: c must be positive")


@dataclass(frozen=True)
class IG:
    """Inverse-Gaussian subordinator: first passage of a drift-``gamma_`` BM to level ct."""

    c: float
    gamma_: float

    def __post_init__(self):
        _require(self.c > 0, "IG: c must be positive")
        _require(self.gamma_ > 0, "IG: gamma_ must be positive")


@dataclass(frozen=True)
class NIG:
    """Normal inverse-Gaussian: drifted BM subordinated by an IG clock.

    The clock is the IG subordinator with both parameters equal to ``c``
    (unit mean rate); ``theta`` and ``sigma`` are the drift and volatility
    of the subordinated Brownian motion.
    """

    c: float
    theta: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        _require(self.c > 0, "NIG: c must be positive")
        _require(self.sigma > 0, "NIG: sigma must be positive")


@dataclass(frozen=True)
class PoissonF:
    """Poisson counting process with jump intensity ``lambda_``."""

    lambda_: float

    def __post_init__(self):
        _require(self.lambda_ > 0, "PoissonF: lambda_ must be positive")


IncrementFamily = Union[Brownian, Gamma, VG, StableHalf, CauchyF, IG, NIG, PoissonF]


# ---------------------------------------------------------------------------
# densities


def _brownian_logpdf(fam: Brownian, t: float, x):
    v = fam.sigma * fam.sigma * t
    return -0.5 * (x - fam.theta * t) ** 2 / v - 0.5 * np.log(2.0 * np.pi * v)


def _gamma_logpdf(fam: Gamma, t: float, x):
    a = fam.m * t
    return a * np.log(fam.m) + (a - 1.0) * np.log(x) - fam.m * x - sp.gammaln(a)


def _vg_logpdf(fam: VG, t: float, x):
    # written in |x| so that squaring cannot underflow near the origin
    m, th, sg = fam.m, fam.theta, fam.sigma
    a = m * t
    s2 = sg * sg
    q = 2.0 * m * s2 + th * th
    ax = np.abs(x)
    arg = ax * np.sqrt(q) / s2
    log_k = np.log(sp.kve(a - 0.5, arg)) - arg
    return (
        0.5 * math.log(2.0 / math.pi)
        + a * np.log(m)
        + th * x / s2
        - np.log(sg)
        - sp.gammaln(a)
        + (a - 0.5) * np.log(ax)
        - (0.5 * a - 0.25) * np.log(q)
        + log_k
    )


def _vg_at_zero(fam: VG, t: float) -> float:
    a = fam.m * t
    if a <= 0.5:
        return np.inf
    ratio = 1.0 + fam.theta**2 / (2.0 * fam.m * fam.sigma**2)
    return (
        math.sqrt(fam.m / (2.0 * math.pi))
        / fam.sigma
        * ratio ** (0.5 - a)
        * math.exp(sp.gammaln(a - 0.5) - sp.gammaln(a))
    )


def _stable_half_logpdf(fam: StableHalf, t: float, x):
    ct = fam.c * t
    return np.log(ct) - 0.5 * _LOG_2PI - 1.5 * np.log(x) - 0.5 * ct * ct / x


def _ig_logpdf(fam: IG, t: float, x):
    # exponent written as -(ct/sqrt(x) - gamma sqrt(x))^2 / 2: never overflows
    ct = fam.c * t
    rt = np.sqrt(x)
    return (
        np.log(ct)
        - 0.5 * _LOG_2PI
        - 1.5 * np.log(x)
        - 0.5 * (ct / rt - fam.gamma_ * rt) ** 2
    )


def _nig_logpdf(fam: NIG, t: float, x):
    c, th, sg = fam.c, fam.theta, fam.sigma
    s2 = sg * sg
    q = c * c * s2 + th * th
    r2 = c * c * s2 * t * t + x * x
    arg = np.sqrt(q * r2) / s2
    log_k = np.log(sp.kve(1.0, arg)) - arg
    return (
        np.log(c * t / (sg * math.pi))
        + c * c * t
        + th * x / s2
        + 0.5 * (np.log(q) - np.log(r2))
        + log_k
    )


def increment_logpdf(fam: IncrementFamily, t: float, x):
    """Log-density of the time-``t`` increment at ``x``.

    ``-inf`` outside the support; ``+inf`` at the VG origin when the
    density genuinely diverges there (``m*t <= 1/2``).  Staying in log
    space keeps likelihood ratios well-defined far into the tails, where
    the densities themselves underflow.
    """
    if t <= 0.0:
        raise DomainError(f"increment densities need t > 0, got {t}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)

    if isinstance(fam, Brownian):
        out = _brownian_logpdf(fam, t, xa)
    elif isinstance(fam, CauchyF):
        ct = fam.c * t
        out = math.log(ct / math.pi) - np.log(xa * xa + ct * ct)
    elif isinstance(fam, (Gamma, StableHalf, IG)):
        pos = xa > 0.0
        xs = np.where(pos, xa, 1.0)
        if isinstance(fam, Gamma):
            lp = _gamma_logpdf(fam, t, xs)
        elif isinstance(fam, StableHalf):
            lp = _stable_half_logpdf(fam, t, xs)
        else:
            lp = _ig_logpdf(fam, t, xs)
        out = np.where(pos, lp, -np.inf)
    elif isinstance(fam, VG):
        nz = xa != 0.0
        xs = np.where(nz, xa, 1.0)
        with np.errstate(divide="ignore"):
            at_zero = np.log(_vg_at_zero(fam, t))
        out = np.where(nz, _vg_logpdf(fam, t, xs), at_zero)
    elif isinstance(fam, NIG):
        out = _nig_logpdf(fam, t, xa)
    elif isinstance(fam, PoissonF):
        raise DomainError("PoissonF has a pmf, not a density; use poisson_pmf")
    else:
        raise DomainError(f"unknown increment family: {fam!r}")

    if scalar:
        return float(out[0])
    return out


def increment_density(fam: IncrementFamily, t: float, x):
    """Density of the time-``t`` increment at ``x``.

    Points outside the support return 0; for the VG family at x = 0 the
    density is genuinely infinite when ``m*t <= 1/2`` and ``+inf`` is
    returned.  ``t`` must be positive.
    """
    lp = increment_logpdf(fam, t, x)
    with np.errstate(over="ignore"):
        out = np.exp(lp)
    if np.ndim(lp) == 0:
        return float(out)
    return out


def increment_cdf(fam: IncrementFamily, t: float, x):
    """Increment CDF for the families where it is available in closed form."""
    if t <= 0.0:
        raise DomainError(f"increment_cdf needs t > 0, got {t}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)

    if isinstance(fam, Brownian):
        out = norm_cdf((xa - fam.theta * t) / (fam.sigma * math.sqrt(t)))
    elif isinstance(fam, CauchyF):
        out = 0.5 + np.arctan(xa / (fam.c * t)) / math.pi
    elif isinstance(fam, StableHalf):
        pos = xa > 0.0
        xs = np.where(pos, xa, 1.0)
        out = np.where(pos, 2.0 * norm_cdf(-fam.c * t / np.sqrt(xs)), 0.0)
    elif isinstance(fam, Gamma):
        out = sp.gammainc(fam.m * t, fam.m * np.clip(xa, 0.0, None))
    elif isinstance(fam, IG):
        # first-passage CDF: Phi(g sqrt(x) - ct/sqrt(x)) + e^{2 g ct} Phi(-g sqrt(x) - ct/sqrt(x))
        pos = xa > 0.0
        xs = np.where(pos, xa, 1.0)
        rt = np.sqrt(xs)
        ct = fam.c * t
        g = fam.gamma_
        out = np.where(
            pos,
            norm_cdf(g * rt - ct / rt) + exp_mul_norm_cdf(2.0 * g * ct, -g * rt - ct / rt),
            0.0,
        )
    else:
        raise UnsupportedRegimeError(
            f"no closed-form increment CDF for {type(fam).__name__}"
        )
    if scalar:
        return float(out[0])
    return out


def log_mgf(fam: IncrementFamily, u: float) -> float:
    """Unit-time log moment generating function ``log E[exp(u X_1)]``.

    Raises DomainError when u lies outside the family's convergence strip,
    UnsupportedRegimeError when no MGF exists at all (Cauchy).
    """
    if isinstance(fam, Brownian):
        return fam.theta * u + 0.5 * (fam.sigma * u) ** 2
    if isinstance(fam, Gamma):
        _require(u < fam.m, f"Gamma MGF needs u < m = {fam.m}")
        return -fam.m * math.log1p(-u / fam.m)
    if isinstance(fam, VG):
        q = 1.0 - fam.theta * u / fam.m - fam.sigma**2 * u**2 / (2.0 * fam.m)
        _require(q > 0, "VG MGF: u outside convergence strip")
        return -fam.m * math.log(q)
    if isinstance(fam, StableHalf):
        _require(u <= 0, "StableHalf MGF only exists for u <= 0")
        return -fam.c * math.sqrt(-2.0 * u)
    if isinstance(fam, IG):
        disc = fam.gamma_**2 - 2.0 * u
        _require(disc >= 0, "IG MGF: u outside convergence strip")
        return -fam.c * (math.sqrt(disc) - fam.gamma_)
    if isinstance(fam, NIG):
        disc = fam.c**2 - fam.sigma**2 * u**2 - 2.0 * fam.theta * u
        _require(disc >= 0, "NIG MGF: u outside convergence strip")
        return fam.c**2 - fam.c * math.sqrt(disc)
    if isinstance(fam, PoissonF):
        return fam.lambda_ * math.expm1(u)
    raise UnsupportedRegimeError(f"no MGF for {type(fam).__name__}")


def poisson_pmf(lambda_: float, t: float, n) -> float:
    """``P[N_t = n]`` for a Poisson process with intensity ``lambda_``."""
    if lambda_ <= 0 or t <= 0:
        raise DomainError("poisson_pmf needs lambda_ > 0 and t > 0")
    na = np.asarray(n)
    lam = lambda_ * t
    with np.errstate(divide="ignore"):
        logp = np.where(na >= 0, na * math.log(lam) - lam - sp.gammaln(na + 1.0), -np.inf)
    valid = (na >= 0) & (na == np.floor(na))
    out = np.where(valid, np.exp(logp), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# derived parameter bundles


@dataclass(frozen=True)
class VgDerived:
    """Derived VG quantities: scaling factor, self-consistent scale, jump means."""

    k_factor: float
    rho: float
    mu_plus: float
    mu_minus: float


def vg_derive(m: float, theta: float, sigma: float = 1.0) -> VgDerived:
    """Derived constants for the VG family.

    ``k_factor`` scales the symmetric density into the asymmetric one:
    f^(m,theta,sigma)_t(x) = (1/sigma) e^(theta x / sigma^2) k^(1-2mt) f^(m)_t(k x / sigma)
    with k = sqrt(1 + theta^2/(2 m sigma^2)).  ``rho`` is the unique scale
    with rho = k_(m,theta,rho), i.e. the volatility for which the scaling
    relation maps the family onto itself.  ``mu_plus``/``mu_minus`` are the
    mean positive/negative jump sizes.
    """
    fam = VG(m=m, theta=theta, sigma=sigma)  # validates parameters
    k = math.sqrt(1.0 + theta**2 / (2.0 * m * sigma**2))
    rho = math.sqrt(0.5 * (1.0 + math.sqrt(1.0 + 2.0 * theta**2 / m)))
    # self-consistency to 1e-12: rho solves rho^4 - rho^2 - theta^2/(2m) = 0
    resid = abs(rho - math.sqrt(1.0 + theta**2 / (2.0 * m * rho**2)))
    if resid > 1e-12:
        raise DomainError(f"vg_derive: rho fixed point residual {resid}")
    root = math.sqrt(theta**2 + 2.0 * m * sigma**2)
    return VgDerived(
        k_factor=k,
        rho=rho,
        mu_plus=0.5 * (root + theta),
        mu_minus=0.5 * (root - theta),
    )


@dataclass(frozen=True)
class NigDerived:
    """Derived NIG quantities: density scaling factor and symmetric-family rate."""

    k_factor: float
    alpha: float


def nig_derive(c: float, theta: float, sigma: float = 1.0) -> NigDerived:
    """Scaling constants mapping the symmetric NIG family onto an asymmetric one.

    With k = sqrt(sqrt(theta^2 + c^2 sigma^2)/(c sigma)) and alpha = c k,
    f^(c,theta,sigma)_t(x) = (k/sigma) e^((c^2-alpha^2) t + theta x/sigma^2) f^(alpha)_t(k x/sigma),
    where f^(alpha) is the symmetric unit-volatility family with rate alpha.
    """
    NIG(c=c, theta=theta, sigma=sigma)
    k = math.sqrt(math.sqrt(theta**2 + (c * sigma) ** 2) / (c * sigma))
    return NigDerived(k_factor=k, alpha=c * k)


def nig_recovery(c: float, theta: float) -> NigDerived:
    """Parameters for which an exponential tilt of the symmetric family is NIG.

    Returns the unique (k, alpha) with alpha = c k and
    f^(c,theta,k)_t(x) = e^((c^2-alpha^2) t + theta x / k^2) f^(alpha)_t(x)
    for all t and x.  u = k^2 is the root >= 1 of c^2 u^3 - c^2 u = theta^2.
    """
    _require(c > 0, "nig_recovery: c must be positive")
    w = theta**2 / c**2
    # cubic u^3 - u - w = 0 has a single root u >= 1 for w >= 0
    roots = np.roots([1.0, 0.0, -1.0, -w])
    real = roots[np.abs(roots.imag) < 1e-9].real
    candidates = real[real >= 1.0 - 1e-12]
    if candidates.size == 0:
        raise DomainError("nig_recovery: no admissible root (should not happen)")
    u = float(np.max(candidates))
    # polish with Newton for full precision
    for _ in range(60):
        f = u**3 - u - w
        fp = 3.0 * u * u - 1.0
        step = f / fp
        u -= step
        if abs(step) < 1e-15 * max(1.0, u):
            break
    k = math.sqrt(u)
    return NigDerived(k_factor=k, alpha=c * k)


def ig_moment(c: float, gamma_: float, t: float, k: float) -> float:
    """k-th moment of the IG increment: (ct/gamma)^k K_(k-1/2)(g ct)/K_(1/2)(g ct)."""
    if c <= 0 or gamma_ <= 0 or t <= 0:
        raise DomainError("ig_moment needs positive c, gamma_, t")
    arg = gamma_ * c * t
    ratio = sp.kve(k - 0.5, arg) / sp.kve(0.5, arg)
    return float((c * t / gamma_) ** k * ratio)
