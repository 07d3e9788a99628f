"""Bridge laws: increment processes pinned to a terminal value.

The generic bridge density is assembled from the increment family; on top
of that this module carries the closed-form CDFs and partial moments that
exist for the stable-1/2 and Cauchy bridges (the work-horses of the
reserving and pricing layers), and exact samplers for the gamma and
Brownian bridges used by the path-space decompositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError, NumericError
from .marginals import (
    CauchyF,
    Gamma,
    IncrementFamily,
    PoissonF,
    StableHalf,
    increment_density,
)
from .specfn import exp_mul_norm_cdf, norm_cdf, reg_inc_beta

__all__ = [
    "BridgeLaw",
    "bridge_density",
    "stable_half_bridge_cdf",
    "stable_half_bridge_partial_moment",
    "stable_half_bridge_second_moment",
    "cauchy_bridge_cdf",
    "cauchy_bridge_moments",
    "gamma_bridge_sample",
    "gamma_bridge_transition_density",
    "brownian_bridge_sample",
    "poisson_bridge_jump_time_cdf",
    "sample_beta",
]


@dataclass(frozen=True)
class BridgeLaw:
    """An increment process on ``[0, T]`` pinned to the value ``z`` at ``T``."""

    family: IncrementFamily
    T: float
    z: float

    def __post_init__(self):
        if self.T <= 0:
            raise DomainError("BridgeLaw: T must be positive")
        if isinstance(self.family, PoissonF):
            if self.z < 0 or self.z != int(self.z):
                raise DomainError("BridgeLaw: Poisson terminal value must be a count")
        elif isinstance(self.family, (Gamma, StableHalf)) and self.z <= 0:
            raise DomainError("BridgeLaw: terminal value outside the family support")


def bridge_density(law: BridgeLaw, t: float, y):
    """Density of the bridge at time ``t`` evaluated at ``y``.

    ``f_t(y) f_{T-t}(z-y) / f_T(z)`` for 0 < t < T; outside the reachable
    set this is 0.
    """
    T, z = law.T, law.z
    if not 0.0 < t < T:
        raise DomainError(f"bridge_density needs 0 < t < T, got t={t}, T={T}")
    fz = increment_density(law.family, T, z)
    if fz <= 0.0 or not math.isfinite(fz):
        raise DomainError(
            f"terminal value z={z} is not attainable (f_T(z) = {fz})"
        )
    ya = np.asarray(y, dtype=float)
    out = (
        increment_density(law.family, t, ya)
        * increment_density(law.family, T - t, z - ya)
        / fz
    )
    if np.ndim(y) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# stable-1/2 bridge closed forms


def _check_span(t: float, T: float) -> None:
    if not 0.0 < t < T:
        raise DomainError(f"need 0 < t < T, got t={t}, T={T}")


def stable_half_bridge_cdf(c: float, t: float, T: float, y, z: float):
    """CDF of the stable-1/2 bridge to ``z`` at time ``t``, evaluated at ``y``."""
    _check_span(t, T)
    if c <= 0 or z <= 0:
        raise DomainError("stable_half_bridge_cdf needs c > 0 and z > 0")
    ya = np.asarray(y, dtype=float)
    inside = (ya > 0.0) & (ya < z)
    ys = np.where(inside, ya, 0.5 * z)
    x1 = c * (T * ys - t * z) / np.sqrt(ys * z * (z - ys))
    a = 2.0 * c * c * t * (T - t) / z
    x2 = -np.sqrt(x1 * x1 + 2.0 * a)
    val = norm_cdf(x1) + (1.0 - 2.0 * t / T) * exp_mul_norm_cdf(a, x2)
    out = np.where(ya <= 0.0, 0.0, np.where(ya >= z, 1.0, val))
    if np.ndim(y) == 0:
        return float(out)
    return out


def stable_half_bridge_partial_moment(c: float, t: float, T: float, y, z: float):
    """Lower partial first moment ``E[S_t 1{S_t <= y}]`` of the bridge to z."""
    _check_span(t, T)
    if c <= 0 or z <= 0:
        raise DomainError("stable_half_bridge_partial_moment needs c > 0 and z > 0")
    ya = np.asarray(y, dtype=float)
    inside = (ya > 0.0) & (ya < z)
    ys = np.where(inside, ya, 0.5 * z)
    x1 = c * (T * ys - t * z) / np.sqrt(ys * z * (z - ys))
    a = 2.0 * c * c * t * (T - t) / z
    x2 = -np.sqrt(x1 * x1 + 2.0 * a)
    val = (t / T) * z * (norm_cdf(x1) - exp_mul_norm_cdf(a, x2))
    out = np.where(ya <= 0.0, 0.0, np.where(ya >= z, (t / T) * z, val))
    if np.ndim(y) == 0:
        return float(out)
    return out


def stable_half_bridge_second_moment(c: float, t: float, T: float, z: float) -> float:
    """``E[S_t^2]`` for the stable-1/2 bridge to ``z``."""
    _check_span(t, T)
    if c <= 0 or z <= 0:
        raise DomainError("stable_half_bridge_second_moment needs c > 0 and z > 0")
    tail = c * (T - t) * math.sqrt(2.0 * math.pi / z) * exp_mul_norm_cdf(
        c * c * T * T / (2.0 * z), -c * T / math.sqrt(z)
    )
    return (t / T) * z * z * (1.0 - tail)


# ---------------------------------------------------------------------------
# Cauchy bridge closed forms


def cauchy_bridge_cdf(c: float, t: float, T: float, y, z: float):
    """CDF of the Cauchy bridge to ``z``, evaluated at ``y``."""
    _check_span(t, T)
    if c <= 0:
        raise DomainError("cauchy_bridge_cdf needs c > 0")
    ya = np.asarray(y, dtype=float)
    a = c * t
    b = c * (T - t)
    denom = math.pi * T * (c * c * (T - 2.0 * t) ** 2 + z * z)
    term1 = (T - t) * (c * c * T * (T - 2.0 * t) + z * z) * np.arctan(ya / a)
    term2 = t * (c * c * T * (T - 2.0 * t) - z * z) * np.arctan((z - ya) / b)
    term3 = a * (T - t) * z * (
        np.log(ya * ya + a * a) - np.log((z - ya) ** 2 + b * b)
    )
    out = 0.5 + (term1 + term2 + term3) / denom
    if np.ndim(y) == 0:
        return float(out)
    return out


def cauchy_bridge_moments(c: float, t: float, T: float, z: float) -> tuple[float, float]:
    """Mean and second moment of the Cauchy bridge to ``z`` at time ``t``."""
    _check_span(t, T)
    if c <= 0:
        raise DomainError("cauchy_bridge_moments needs c > 0")
    mean = (t / T) * z
    second = (t / T) * (z * z + c * c * T * (T - t))
    return mean, second


# ---------------------------------------------------------------------------
# samplers


def sample_beta(rng: np.random.Generator, a: float, b: float, size: int | None = None):
    """Beta(a, b) variates that stay correct for very small shape parameters.

    For a, b <= 1 uses the Johnk rejection method in log space, which keeps
    working where the two-gamma ratio degenerates to 0/0; otherwise the
    two-gamma route is safe (the larger shape keeps the denominator
    away from zero).
    """
    if a <= 0 or b <= 0:
        raise DomainError("sample_beta needs positive shapes")
    n = 1 if size is None else int(size)
    if a <= 1.0 and b <= 1.0:
        out = np.empty(n)
        todo = np.arange(n)
        for _ in range(1000):
            m = todo.size
            if m == 0:
                break
            x = np.log(rng.random(m)) / a
            y = np.log(rng.random(m)) / b
            s = np.logaddexp(x, y)
            ok = s <= 0.0
            out[todo[ok]] = np.exp(x[ok] - s[ok])
            todo = todo[~ok]
        else:
            raise NumericError(
                "beta sampler failed to fill", diagnostics={"remaining": todo.size}
            )
    else:
        g1 = rng.gamma(a, size=n)
        g2 = rng.gamma(b, size=n)
        out = g1 / (g1 + g2)
    if size is None:
        return float(out[0])
    return out


def gamma_bridge_sample(
    m: float, times, rng: np.random.Generator
) -> np.ndarray:
    """Sample a normalized gamma bridge on the given grid.

    The horizon is the last grid point; the bridge starts at 0, increases,
    and equals exactly 1 at the horizon.  Increments follow the sequential
    beta construction.
    """
    if m <= 0:
        raise DomainError("gamma_bridge_sample needs m > 0")
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size < 1:
        raise DomainError("times must be a non-empty 1-D grid")
    if np.any(np.diff(ts) <= 0) or ts[0] < 0:
        raise DomainError("times must be strictly increasing and non-negative")
    T = float(ts[-1])
    if T <= 0:
        raise DomainError("horizon (last grid point) must be positive")
    out = np.empty(ts.size)
    prev_t = 0.0
    prev_v = 0.0
    for i, t in enumerate(ts):
        if t == 0.0:
            out[i] = 0.0
            continue
        if t == T:
            out[i] = 1.0
            prev_t, prev_v = t, 1.0
            continue
        frac = sample_beta(rng, m * (t - prev_t), m * (T - t))
        prev_v = prev_v + (1.0 - prev_v) * frac
        prev_t = t
        out[i] = prev_v
    return out


def gamma_bridge_transition_density(
    m: float, s: float, t: float, T: float, x: float, y, z: float = 1.0
):
    """Transition density of the gamma bridge to ``z``: from (s, x) to (t, y).

    The relative increment (y - x)/(z - x) is Beta(m(t-s), m(T-t)).
    ``s = 0`` with ``x = 0`` gives the unconditional bridge density.
    """
    if m <= 0:
        raise DomainError("gamma_bridge_transition_density needs m > 0")
    if not 0.0 <= s < t < T:
        raise DomainError(f"need 0 <= s < t < T, got s={s}, t={t}, T={T}")
    if not 0.0 <= x < z:
        raise DomainError(f"current value x={x} outside [0, z={z})")
    ya = np.asarray(y, dtype=float)
    w = (ya - x) / (z - x)
    inside = (w > 0.0) & (w < 1.0)
    ws = np.where(inside, w, 0.5)
    a_par = m * (t - s)
    b_par = m * (T - t)
    log_pdf = (
        (a_par - 1.0) * np.log(ws)
        + (b_par - 1.0) * np.log1p(-ws)
        - sp.betaln(a_par, b_par)
    )
    out = np.where(inside, np.exp(log_pdf) / (z - x), 0.0)
    if np.ndim(y) == 0:
        return float(out)
    return out


def brownian_bridge_sample(times, rng: np.random.Generator) -> np.ndarray:
    """Standard Brownian bridge pinned to 0 at the last grid point.

    Sequential conditioning: exact joint law on any strictly increasing
    grid, with the terminal value exactly 0.
    """
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size < 1:
        raise DomainError("times must be a non-empty 1-D grid")
    if np.any(np.diff(ts) <= 0) or ts[0] < 0:
        raise DomainError("times must be strictly increasing and non-negative")
    T = float(ts[-1])
    if T <= 0:
        raise DomainError("horizon (last grid point) must be positive")
    out = np.empty(ts.size)
    prev_t = 0.0
    prev_v = 0.0
    for i, t in enumerate(ts):
        if t == 0.0:
            out[i] = 0.0
            continue
        if t == T:
            out[i] = 0.0
            prev_t, prev_v = t, 0.0
            continue
        shrink = (T - t) / (T - prev_t)
        var = (t - prev_t) * shrink
        prev_v = prev_v * shrink + math.sqrt(var) * rng.standard_normal()
        prev_t = t
        out[i] = prev_v
    return out


def poisson_bridge_jump_time_cdf(i: int, k: int, t: float, T: float) -> float:
    """``P[i-th jump time <= t]`` for a Poisson bridge with exactly k jumps on [0, T]."""
    if T <= 0:
        raise DomainError("poisson_bridge_jump_time_cdf needs T > 0")
    if i < 1 or k < 0 or i != int(i) or k != int(k):
        raise DomainError("jump index i >= 1 and count k >= 0 required")
    if i > k:
        return 0.0
    if t <= 0.0:
        return 0.0
    if t >= T:
        return 1.0
    return reg_inc_beta(float(i), float(k - i + 1), t / T)
