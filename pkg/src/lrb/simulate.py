"""Exact path samplers for the random-bridge processes.

Every sampler here draws the terminal value first and then fills in the
path with the exact conditional law — no Euler schemes, no discretization
error.  The heavy lifters are vectorized over paths; the public functions
return a single :class:`PathSample` by default and a ``(size, n_times)``
array when ``size`` is given.  Reproducibility comes from passing
explicit generators (see :class:`RngStream`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as ss

from .bridges import sample_beta
from .core import LrbSpec, TerminalLaw
from .errors import ConfigError, DomainError, NumericError, UnsupportedRegimeError
from .marginals import (
    VG,
    Brownian,
    CauchyF,
    Gamma,
    IG,
    NIG,
    PoissonF,
    StableHalf,
    nig_derive,
    vg_derive,
)

__all__ = [
    "PathSample",
    "RngStream",
    "sample_terminal",
    "sample_gig",
    "sample_stable_half_rb",
    "sample_vgrb",
    "sample_cauchy_rb",
    "sample_nigrb",
    "sample_brownian_rb",
    "sample_gamma_rb",
    "sample_prb",
    "sample_paths",
]


@dataclass(frozen=True)
class PathSample:
    """One sampled path: grid times, values, and provenance tags."""

    times: np.ndarray
    values: np.ndarray
    seed: int | None = None
    spec_id: str | None = None


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    ``(seed, stream)`` key a counter-based generator, so distinct stream
    indices give statistically independent generators and the same pair
    always reproduces the same draws — handy for carving one seed into
    independent chunks without coordination.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64 or not 0 <= int(self.stream) < 2**64:
            raise ConfigError("seed and stream must fit in an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# terminal draws


def _vectorize_cdf(cdf):
    def call(x):
        try:
            out = np.asarray(cdf(x), dtype=float)
        except (TypeError, ValueError):
            return np.array([float(cdf(v)) for v in np.atleast_1d(x)])
        if out.shape != np.shape(x):
            return np.array([float(cdf(v)) for v in np.atleast_1d(x)])
        return out

    return call


def _invert_cdf(cdf, u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Vectorized generalized-inverse of a CDF by bracketed bisection."""
    cdf = _vectorize_cdf(cdf)
    n = u.size
    lo_v = np.full(n, lo)
    hi_v = np.full(n, hi)
    if not math.isfinite(lo):
        lo_v = np.full(n, -1.0)
        for _ in range(200):
            mask = np.asarray(cdf(lo_v)) > u
            if not mask.any():
                break
            lo_v[mask] *= 2.0
        else:
            raise NumericError("could not bracket the lower quantile")
    if not math.isfinite(hi):
        hi_v = np.full(n, 1.0)
        for _ in range(200):
            mask = np.asarray(cdf(hi_v)) < u
            if not mask.any():
                break
            hi_v[mask] *= 2.0
        else:
            raise NumericError("could not bracket the upper quantile")
    for _ in range(80):
        mid = 0.5 * (lo_v + hi_v)
        high = np.asarray(cdf(mid)) >= u
        hi_v = np.where(high, mid, hi_v)
        lo_v = np.where(high, lo_v, mid)
    return hi_v


def sample_terminal(law: TerminalLaw, rng: np.random.Generator, size: int | None = None):
    """Draw from a terminal law.

    Atoms are sampled by inverse CDF on the weights.  The continuous part
    uses the law's registered ``sampler`` when present, falls back to
    numeric inversion of the law's ``cdf``, and raises ConfigError when
    neither is available.
    """
    n = 1 if size is None else int(size)
    atom_mass = law.atom_mass()
    out = np.empty(n)

    if law.density is None:
        u = rng.random(n)
        locs = np.array([z for z, _ in law.atoms])
        cum = np.cumsum([w for _, w in law.atoms])
        idx = np.searchsorted(cum, u * atom_mass, side="right")
        out = locs[np.minimum(idx, locs.size - 1)]
    elif law.sampler is not None:
        u = rng.random(n)
        is_atom = u < atom_mass
        if is_atom.any():
            locs = np.array([z for z, _ in law.atoms])
            cum = np.cumsum([w for _, w in law.atoms])
            idx = np.searchsorted(cum, u[is_atom], side="right")
            out[is_atom] = locs[np.minimum(idx, locs.size - 1)]
        k = int((~is_atom).sum())
        if k:
            out[~is_atom] = np.asarray(law.sampler(rng, k), dtype=float)
    elif law.cdf is not None:
        u = rng.random(n)
        lo, hi = law.support
        for z, _ in law.atoms:
            lo, hi = min(lo, z), max(hi, z)
        out = _invert_cdf(law.cdf, u, lo, hi)
    else:
        raise ConfigError(
            "terminal law has a density but neither a sampler nor a cdf; "
            "cannot draw from it"
        )
    if size is None:
        return float(out[0])
    return out


def sample_gig(
    rng: np.random.Generator, lam: float, delta, gamma_: float, size: int
) -> np.ndarray:
    """GIG(lam, delta, gamma_) draws, vectorized over ``delta``.

    ``delta = 0`` entries fall back to the gamma limit, which requires
    ``lam > 0``.
    """
    d = np.broadcast_to(np.asarray(delta, dtype=float), (size,)).copy()
    if np.any(d < 0):
        raise DomainError("sample_gig needs delta >= 0")
    out = np.empty(size)
    zero = d == 0.0
    if zero.any():
        if lam <= 0:
            raise UnsupportedRegimeError(
                "GIG with delta = 0 requires lam > 0 (gamma limit)"
            )
        out[zero] = rng.gamma(lam, scale=2.0 / gamma_**2, size=int(zero.sum()))
    pos = ~zero
    if pos.any():
        dp = d[pos]
        out[pos] = ss.geninvgauss.rvs(
            p=lam, b=dp * gamma_, scale=dp / gamma_, random_state=rng
        )
    return out


# ---------------------------------------------------------------------------
# vectorized building blocks


def _check_grid(times, T: float) -> np.ndarray:
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise DomainError("times must be a non-empty 1-D grid")
    if np.any(np.diff(ts) <= 0):
        raise DomainError("times must be strictly increasing")
    if ts[0] < 0 or ts[-1] > T + 1e-12:
        raise DomainError(f"times must lie in [0, T={T}]")
    return ts


def _stable_cdf_arrays(c, t, T, y, z):
    """Stable-1/2 bridge CDF with array-valued y and z (no domain checks)."""
    inside = (y > 0.0) & (y < z)
    ys = np.where(inside, y, 0.5 * z)
    x1 = c * (T * ys - t * z) / np.sqrt(ys * z * (z - ys))
    a = 2.0 * c * c * t * (T - t) / z
    x2 = -np.sqrt(x1 * x1 + 2.0 * a)
    from .specfn import exp_mul_norm_cdf, norm_cdf

    val = norm_cdf(x1) + (1.0 - 2.0 * t / T) * exp_mul_norm_cdf(a, x2)
    return np.where(y <= 0.0, 0.0, np.where(y >= z, 1.0, val))


def _stable_bridge_paths(
    c: float, times: np.ndarray, T: float, z: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Stable-1/2 bridge paths to per-path terminals ``z`` by CDF inversion."""
    n = z.size
    m = times.size
    out = np.empty((n, m))
    t_prev = 0.0
    xi = np.zeros(n)
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0.0
            continue
        if abs(t - T) <= 1e-12:
            out[:, j] = z
            xi = z.copy()
            t_prev = T
            continue
        u = rng.random(n)
        rem = z - xi
        done = rem <= 0.0
        span_T = T - t_prev
        span_t = t - t_prev
        lo = np.zeros(n)
        hi = np.where(done, 1.0, rem)
        safe_rem = np.where(done, 1.0, rem)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            f = _stable_cdf_arrays(c, span_t, span_T, mid, safe_rem)
            high = f >= u
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        step = np.where(done, 0.0, hi)
        xi = xi + step
        out[:, j] = xi
        t_prev = t
    return out


def _cauchy_cdf_arrays(c, t, T, y, z):
    a = c * t
    b = c * (T - t)
    denom = math.pi * T * (c * c * (T - 2.0 * t) ** 2 + z * z)
    term1 = (T - t) * (c * c * T * (T - 2.0 * t) + z * z) * np.arctan(y / a)
    term2 = t * (c * c * T * (T - 2.0 * t) - z * z) * np.arctan((z - y) / b)
    term3 = a * (T - t) * z * (np.log(y * y + a * a) - np.log((z - y) ** 2 + b * b))
    return 0.5 + (term1 + term2 + term3) / denom


def _cauchy_bridge_paths(
    c: float, times: np.ndarray, T: float, z: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    n = z.size
    out = np.empty((n, times.size))
    t_prev = 0.0
    xi = np.zeros(n)
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0.0
            continue
        if abs(t - T) <= 1e-12:
            out[:, j] = z
            xi = z.copy()
            t_prev = T
            continue
        u = rng.random(n)
        rem = z - xi
        span_T = T - t_prev
        span_t = t - t_prev
        lo = np.minimum(0.0, rem) - span_t * c
        hi = np.maximum(0.0, rem) + span_t * c
        for _ in range(200):
            need_lo = _cauchy_cdf_arrays(c, span_t, span_T, lo, rem) > u
            need_hi = _cauchy_cdf_arrays(c, span_t, span_T, hi, rem) < u
            if not (need_lo.any() or need_hi.any()):
                break
            width = hi - lo
            lo = np.where(need_lo, lo - width, lo)
            hi = np.where(need_hi, hi + width, hi)
        else:
            raise NumericError("could not bracket a Cauchy bridge quantile")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            f = _cauchy_cdf_arrays(c, span_t, span_T, mid, rem)
            high = f >= u
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        xi = xi + hi
        out[:, j] = xi
        t_prev = t
    return out


def _brownian_bridge_at(u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Standard Brownian bridge on [0, 1] at per-path nondecreasing times.

    ``u`` has shape (n_paths, n_times); the bridge is pinned to 0 at u = 1.
    """
    n, m = u.shape
    out = np.empty((n, m))
    prev_u = np.zeros(n)
    prev_v = np.zeros(n)
    for j in range(m):
        uj = u[:, j]
        denom = 1.0 - prev_u
        safe = denom > 0.0
        shrink = np.where(safe, (1.0 - uj) / np.where(safe, denom, 1.0), 0.0)
        var = np.clip((uj - prev_u) * shrink, 0.0, None)
        vj = prev_v * shrink + np.sqrt(var) * rng.standard_normal(n)
        vj = np.where(uj >= 1.0, 0.0, vj)
        out[:, j] = vj
        prev_u, prev_v = uj, vj
    return out


def _gamma_bridge_paths(
    m_par: float, times: np.ndarray, T: float, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Normalized gamma bridge (0 at 0, exactly 1 at T) at the given times."""
    out = np.empty((n, times.size))
    t_prev = 0.0
    v = np.zeros(n)
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0.0
            continue
        if abs(t - T) <= 1e-12:
            out[:, j] = 1.0
            v = np.ones(n)
            t_prev = T
            continue
        frac = sample_beta(rng, m_par * (t - t_prev), m_par * (T - t), size=n)
        v = v + (1.0 - v) * frac
        out[:, j] = v
        t_prev = t
    return out


# ---------------------------------------------------------------------------
# family samplers (batch cores)


def _terminal_batch(spec: LrbSpec, rng, n: int) -> np.ndarray:
    return np.asarray(sample_terminal(spec.nu, rng, size=n), dtype=float)


def _stable_lrb_paths(spec, times, rng, n):
    c = spec.family.c
    z = _terminal_batch(spec, rng, n)
    return _stable_bridge_paths(c, times, spec.T, z, rng)


def _cauchy_lrb_paths(spec, times, rng, n):
    fam: CauchyF = spec.family
    c, T = fam.c, spec.T
    z = _terminal_batch(spec, rng, n)
    # conditioned on the endpoint, the subordinator's terminal value is the
    # reciprocal of an Exp((z^2 + c^2 T^2)/2) variable
    s_T = 0.5 * (z * z + c * c * T * T) / rng.exponential(1.0, n)
    s_path = _stable_bridge_paths(c, times, T, s_T, rng)
    r = np.clip(s_path / s_T[:, None], 0.0, 1.0)
    beta = _brownian_bridge_at(r, rng)
    out = r * z[:, None] + np.sqrt(s_T)[:, None] * beta
    _pin_endpoints(out, times, T, z)
    return out


def _nig_lrb_paths(spec, times, rng, n):
    fam: NIG = spec.family
    d = nig_derive(fam.c, fam.theta, fam.sigma)
    alpha, k = d.alpha, d.k_factor
    scale = fam.sigma / k
    T = spec.T
    z = _terminal_batch(spec, rng, n)
    zp = z / scale
    x_T = sample_gig(rng, -1.0, np.sqrt(alpha**2 * T**2 + zp * zp), alpha, n)
    x_path = _stable_bridge_paths(alpha, times, T, x_T, rng)
    r = np.clip(x_path / x_T[:, None], 0.0, 1.0)
    beta = _brownian_bridge_at(r, rng)
    out = (r * zp[:, None] + np.sqrt(x_T)[:, None] * beta) * scale
    _pin_endpoints(out, times, T, z)
    return out


def _vg_lrb_paths(spec, times, rng, n, method="I"):
    fam: VG = spec.family
    d = vg_derive(fam.m, fam.theta, fam.sigma)
    k = d.k_factor
    scale = fam.sigma / k
    m_par, T = fam.m, spec.T
    z = _terminal_batch(spec, rng, n)
    zp = z / scale

    gb1 = _gamma_bridge_paths(m_par, times, T, rng, n)
    if method == "I":
        lam = m_par * T - 0.5
        if np.any(zp == 0.0) and lam <= 0:
            raise UnsupportedRegimeError(
                "terminal value 0 with m T <= 1/2: the subordinated time has no"
                " sampleable conditional law"
            )
        sigma_T = sample_gig(rng, lam, np.abs(zp), math.sqrt(2.0 * m_par), n)
        beta = _brownian_bridge_at(gb1, rng)
        out = gb1 * zp[:, None] + np.sqrt(sigma_T)[:, None] * beta
    elif method == "II":
        mu = math.sqrt(m_par / 2.0)
        g = zp / mu
        y = _conditional_gamma_difference(rng, m_par * T, m_par, g)
        gb2 = _gamma_bridge_paths(m_par, times, T, rng, n)
        out = gb1 * zp[:, None] + mu * y[:, None] * (gb1 - gb2)
    else:
        raise ConfigError(f"unknown decomposition method {method!r}; use 'I' or 'II'")
    out = out * scale
    _pin_endpoints(out, times, T, z)
    return out


def _conditional_gamma_difference(
    rng: np.random.Generator, a: float, rate: float, g: np.ndarray
) -> np.ndarray:
    """Sample Y = G2 given G1 - G2 = g for iid Gamma(a, rate) pairs.

    Accept-reject with a Gamma(2a - 1, 2 rate) envelope.  The acceptance
    ratio is bounded by 1 only when a >= 1 (or g = 0); for 1/2 < a < 1 the
    conditional density has an unbounded spike and this scheme is invalid.
    """
    if 2.0 * a - 1.0 <= 0.0:
        raise UnsupportedRegimeError(
            f"conditional gamma difference needs shape a > 1/2, got a = {a}"
        )
    if a < 1.0 and np.any(g != 0.0):
        raise UnsupportedRegimeError(
            f"accept-reject for the gamma difference needs a >= 1 when the"
            f" conditioned difference is nonzero (a = {a})"
        )
    n = g.size
    out = np.empty(n)
    todo = np.arange(n)
    total_draws = 0
    while todo.size:
        k = todo.size
        total_draws += k
        if total_draws > 1_000_000:
            raise NumericError(
                "gamma-difference accept-reject exceeded its retry budget",
                diagnostics={"remaining": int(todo.size), "draws": total_draws},
            )
        w = rng.gamma(2.0 * a - 1.0, scale=1.0 / (2.0 * rate), size=k)
        gt = g[todo]
        u = rng.random(k)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(
                gt <= 0.0,
                np.where(w > -gt, (1.0 + gt / w) ** (a - 1.0), 0.0),
                np.where(w > gt, (1.0 - gt / w) ** (a - 1.0), 0.0),
            )
        accept = u < ratio
        vals = np.where(gt <= 0.0, w, w - gt)
        out[todo[accept]] = vals[accept]
        todo = todo[~accept]
    return out


def _brownian_lrb_paths(spec, times, rng, n):
    fam: Brownian = spec.family
    T = spec.T
    z = _terminal_batch(spec, rng, n)
    out = np.empty((n, times.size))
    t_prev = 0.0
    xi = np.zeros(n)
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0.0
            continue
        if abs(t - T) <= 1e-12:
            xi = z.copy()
            out[:, j] = xi
            t_prev = T
            continue
        span = T - t_prev
        mean = xi + (t - t_prev) / span * (z - xi)
        var = fam.sigma**2 * (t - t_prev) * (T - t) / span
        xi = mean + math.sqrt(var) * rng.standard_normal(n)
        out[:, j] = xi
        t_prev = t
    return out


def _gamma_lrb_paths(spec, times, rng, n):
    fam: Gamma = spec.family
    z = _terminal_batch(spec, rng, n)
    gb = _gamma_bridge_paths(fam.m, times, spec.T, rng, n)
    return gb * z[:, None]


def _poisson_lrb_paths(spec, times, rng, n):
    T = spec.T
    z = _terminal_batch(spec, rng, n).astype(np.int64)
    out = np.empty((n, times.size), dtype=np.int64)
    t_prev = 0.0
    cur = np.zeros(n, dtype=np.int64)
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0
            continue
        if abs(t - T) <= 1e-12:
            cur = z.copy()
            out[:, j] = cur
            t_prev = T
            continue
        p = (t - t_prev) / (T - t_prev)
        cur = cur + rng.binomial(z - cur, p)
        out[:, j] = cur
        t_prev = t
    return out.astype(float)


def _pin_endpoints(out, times, T, z):
    """Force exact values at pinned grid points (t = 0 and t = T)."""
    for j, t in enumerate(times):
        if t == 0.0:
            out[:, j] = 0.0
        elif abs(t - T) <= 1e-12:
            out[:, j] = z


# ---------------------------------------------------------------------------
# public samplers


def _wrap(times, paths, size, spec_id):
    if size is None:
        return PathSample(times=np.asarray(times, float), values=paths[0], spec_id=spec_id)
    return paths


def sample_stable_half_rb(
    spec: LrbSpec,
    rng: np.random.Generator,
    *,
    depth: int | None = None,
    times=None,
    size: int | None = None,
):
    """Sample a stable-1/2 random bridge path.

    ``depth`` builds the dyadic grid of ``2**depth`` intervals on [0, T]
    and fills it with the exact conditional-midpoint transform;
    ``times`` samples an arbitrary strictly increasing grid by sequential
    CDF inversion.  Exactly one of the two must be given.
    """
    if not isinstance(spec.family, (StableHalf, IG)):
        raise ConfigError("sample_stable_half_rb needs a StableHalf (or IG) family")
    c = spec.family.c
    T = spec.T
    n = 1 if size is None else int(size)
    if (depth is None) == (times is None):
        raise ConfigError("give exactly one of depth or times")
    if times is not None:
        ts = _check_grid(times, T)
        paths = _stable_lrb_paths(spec, ts, rng, n)
        return _wrap(ts, paths, size, "stable-half-rb")
    if depth < 0 or depth > 20:
        raise ConfigError("depth must be between 0 and 20")
    m = 2**depth
    ts = np.linspace(0.0, T, m + 1)
    z = _terminal_batch(spec, rng, n)
    vals = np.empty((n, m + 1))
    vals[:, 0] = 0.0
    vals[:, -1] = z
    gap = m
    while gap > 1:
        half = gap // 2
        for left in range(0, m, gap):
            right = left + gap
            mid = left + half
            y = vals[:, left]
            zr = vals[:, right]
            dt = ts[right] - ts[left]
            w = rng.standard_normal(n)
            diff = zr - y
            ok = diff > 0.0
            safe = np.where(ok, diff, 1.0)
            shift = 0.5 * safe * (1.0 + w / np.sqrt(c * c * dt * dt / safe + w * w))
            vals[:, mid] = np.where(ok, y + shift, y)
        gap = half
    return _wrap(ts, vals, size, "stable-half-rb")


def sample_vgrb(
    spec: LrbSpec,
    times,
    rng: np.random.Generator,
    *,
    method: str = "I",
    size: int | None = None,
):
    """Sample a variance-gamma random bridge on a grid.

    ``method='I'`` uses the time-changed-bridge decomposition (gamma
    bridge clock plus an independent Brownian bridge); ``method='II'``
    uses the difference of two gamma bridges.  Both are exact.
    """
    if not isinstance(spec.family, VG):
        raise ConfigError("sample_vgrb needs a VG family")
    ts = _check_grid(times, spec.T)
    n = 1 if size is None else int(size)
    paths = _vg_lrb_paths(spec, ts, rng, n, method=method)
    return _wrap(ts, paths, size, "vg-rb")


def sample_cauchy_rb(
    spec: LrbSpec, times, rng: np.random.Generator, *, size: int | None = None
):
    """Sample a Cauchy random bridge via its subordinated-bridge representation."""
    if not isinstance(spec.family, CauchyF):
        raise ConfigError("sample_cauchy_rb needs a CauchyF family")
    ts = _check_grid(times, spec.T)
    n = 1 if size is None else int(size)
    paths = _cauchy_lrb_paths(spec, ts, rng, n)
    return _wrap(ts, paths, size, "cauchy-rb")


def sample_nigrb(
    spec: LrbSpec, times, rng: np.random.Generator, *, size: int | None = None
):
    """Sample a normal inverse-Gaussian random bridge on a grid."""
    if not isinstance(spec.family, NIG):
        raise ConfigError("sample_nigrb needs an NIG family")
    ts = _check_grid(times, spec.T)
    n = 1 if size is None else int(size)
    paths = _nig_lrb_paths(spec, ts, rng, n)
    return _wrap(ts, paths, size, "nig-rb")


def sample_brownian_rb(
    spec: LrbSpec, times, rng: np.random.Generator, *, size: int | None = None
):
    """Sample a Brownian random bridge (gaussian conditional chain)."""
    if not isinstance(spec.family, Brownian):
        raise ConfigError("sample_brownian_rb needs a Brownian family")
    ts = _check_grid(times, spec.T)
    n = 1 if size is None else int(size)
    paths = _brownian_lrb_paths(spec, ts, rng, n)
    return _wrap(ts, paths, size, "brownian-rb")


def sample_gamma_rb(
    spec: LrbSpec, times, rng: np.random.Generator, *, size: int | None = None
):
    """Sample a gamma random bridge (terminal draw times a gamma bridge)."""
    if not isinstance(spec.family, Gamma):
        raise ConfigError("sample_gamma_rb needs a Gamma family")
    ts = _check_grid(times, spec.T)
    n = 1 if size is None else int(size)
    paths = _gamma_lrb_paths(spec, ts, rng, n)
    return _wrap(ts, paths, size, "gamma-rb")


def sample_prb(spec: LrbSpec, rng: np.random.Generator, *, size: int | None = None):
    """Sample Poisson random bridge jump times.

    Returns the ordered jump times of one path (or a list of arrays).
    Given the terminal count N, the jump times are the first N of N+1
    uniform spacings scaled to [0, T].
    """
    if not isinstance(spec.family, PoissonF):
        raise ConfigError("sample_prb needs a PoissonF family")
    n = 1 if size is None else int(size)
    counts = _terminal_batch(spec, rng, n).astype(np.int64)
    results = []
    for i in range(n):
        k = int(counts[i])
        e = rng.exponential(1.0, k + 1)
        csum = np.cumsum(e)
        results.append(spec.T * csum[:k] / csum[k])
    if size is None:
        return results[0]
    return results


_FAMILY_PATHS = {
    Brownian: _brownian_lrb_paths,
    Gamma: _gamma_lrb_paths,
    VG: _vg_lrb_paths,
    StableHalf: _stable_lrb_paths,
    IG: _stable_lrb_paths,
    CauchyF: _cauchy_lrb_paths,
    NIG: _nig_lrb_paths,
    PoissonF: _poisson_lrb_paths,
}


def sample_paths(
    spec: LrbSpec, times, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Vectorized paths for any family: shape ``(size, len(times))``.

    Applies the spec's time change (calendar -> operational) when present.
    """
    ts = np.asarray(times, dtype=float)
    if spec.time_change is not None:
        op = np.asarray([spec.time_change(t) for t in ts], dtype=float)
    else:
        op = ts
    op = _check_grid(op, spec.T)
    core = _FAMILY_PATHS.get(type(spec.family))
    if core is None:
        raise ConfigError(f"no path sampler for family {type(spec.family).__name__}")
    return core(spec, op, rng, int(size))
