"""Claims reserving on increasing random bridges.

Cumulative paid claims are modelled as a stable-1/2 random bridge whose
terminal pin is the unknown ultimate loss with a user prior.  Everything a
reserving desk asks of the model reduces to the conditional terminal law:
best-estimate ultimates and reserves, expected payments above a retention
(and hence reinsurance-layer recoveries), conditional value-at-risk of the
paid amount, and how the far right tail of the ultimate reweights as the
development comes in.  Closed forms are available for generalized
inverse-Gaussian priors, deterministic exposure clocks reshape the
development pattern without touching the law of the ultimate, and a
two-line model carves two dependent business lines out of one master
bridge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from ._quad import integrate
from .bridges import stable_half_bridge_cdf, stable_half_bridge_partial_moment
from .core import (
    ConditionedState,
    LrbSpec,
    TailHint,
    TerminalLaw,
    condition,
    conditional_mean,
    psi,
)
from .errors import ConfigError, DomainError, NumericError, UnsupportedRegimeError
from .marginals import StableHalf, ig_moment
from .simulate import sample_gig
from .specfn import exp_mul_norm_cdf, gig_density

__all__ = [
    "BestEstimate",
    "GigClosedForms",
    "ReinsuranceLayer",
    "ReserveModel",
    "TimeChange",
    "TwoLineModel",
    "TwoLineReport",
    "apply_time_change",
    "best_estimate",
    "claims_state",
    "cvar_exceedence",
    "expected_exceedence",
    "gig_closed_forms",
    "gig_terminal_law",
    "gpd_terminal_law",
    "layer_recovery",
    "tail_ratio",
    "two_line",
    "ultimate_quantile",
    "weibull_tau",
]


# ---------------------------------------------------------------------------
# model containers


@dataclass(frozen=True)
class ReserveModel:
    """Cumulative paid claims as a stable-1/2 random bridge.

    ``spec.family`` must be the stable-1/2 subordinator and ``spec.nu`` is
    the prior on the ultimate loss, supported on the positive half-line.  A
    tail-decay hint on the prior is mandatory: the tail diagnostics and the
    quadrature truncation both need to know the decay class.  An optional
    ``spec.time_change`` runs the development on a deterministic exposure
    clock; every operation below takes calendar times and maps them through
    the clock itself.
    """

    spec: LrbSpec

    def __post_init__(self):
        if not isinstance(self.spec.family, StableHalf):
            raise ConfigError("reserving needs the stable-1/2 increment family")
        nu = self.spec.nu
        if nu.tail is None:
            raise ConfigError("reserving priors need a tail-decay hint")
        if nu.density is not None and nu.support[0] < 0.0:
            raise ConfigError("the ultimate-loss prior must live on (0, inf)")

    @property
    def c(self) -> float:
        return self.spec.family.c

    @property
    def T(self) -> float:
        return self.spec.T


@dataclass(frozen=True)
class ReinsuranceLayer:
    """Excess-of-loss cover paying ``min((L - attachment)^+, limit)``.

    ``limit=math.inf`` means an unbounded layer.
    """

    attachment: float
    limit: float = math.inf

    def __post_init__(self):
        if not math.isfinite(self.attachment) or self.attachment < 0.0:
            raise ConfigError("layer attachment must be finite and >= 0")
        if not self.limit > 0.0:
            raise ConfigError("layer limit must be positive (math.inf if unbounded)")


class BestEstimate(NamedTuple):
    ultimate: float
    reserve: float
    variance: float


# ---------------------------------------------------------------------------
# shared plumbing


def _op_time(model: ReserveModel, t: float) -> float:
    clock = model.spec.time_change
    return float(t) if clock is None else float(clock(t))


def _condition_at(model: ReserveModel, s_op: float, xi_s: float) -> ConditionedState:
    return condition(model.spec, s_op, xi_s)


def _posterior_expect(law: TerminalLaw, g: Callable, extra_points=()) -> float:
    """``E[g(Z)]`` with extra quadrature break points for kinks of ``g``."""
    total = sum(w * g(z) for z, w in law.atoms)
    if law.density is not None:
        lo, hi = law.support
        pts = tuple(p for p in (*law.points, *extra_points) if lo < p < hi)
        val, _ = integrate(lambda z: g(z) * law.density(z), lo, hi, points=pts)
        total += val
    return total


def _mean_is_finite(hint: TailHint) -> bool:
    if hint.kind == "levy":
        return False
    if hint.kind == "power":
        return hint.param > 2.0
    return True


def _second_moment_is_finite(hint: TailHint) -> bool:
    if hint.kind == "levy":
        return False
    if hint.kind == "power":
        return hint.param > 3.0
    return True


# ---------------------------------------------------------------------------
# best estimates


def best_estimate(model: ReserveModel, s: float, xi_s: float) -> BestEstimate:
    """Best-estimate ultimate loss, reserve, and conditional variance.

    The ultimate is ``E[U_T | xi_s]`` under the conditional terminal law,
    the reserve is the ultimate net of what is already paid, and the
    variance is the posterior variance of the ultimate.  The declared tail
    class must have a finite mean; when it has no second moment the
    variance is reported as ``inf`` rather than left to a divergent
    quadrature.
    """
    hint = model.spec.nu.tail
    if not _mean_is_finite(hint):
        raise DomainError("the ultimate-loss prior has no finite mean")
    st = _condition_at(model, _op_time(model, s), xi_s)
    u = st.posterior.mean()
    if _second_moment_is_finite(hint):
        var = st.posterior.expect(lambda z: (z - u) ** 2)
    else:
        var = math.inf
    return BestEstimate(ultimate=u, reserve=u - xi_s, variance=var)


# ---------------------------------------------------------------------------
# exceedence and reinsurance


def expected_exceedence(
    model: ReserveModel, s: float, xi_s: float, t: float, K: float
) -> float:
    """``E[(xi_t - K)^+ | xi_s]``: expected paid amount above ``K`` at ``t``.

    For ``s < t < T`` this is a single integral over the conditional
    terminal law: conditionally on the ultimate ``z``, the paid amount at
    ``t`` is a stable-1/2 bridge pinned at ``z - xi_s``, whose lower
    partial moments are closed-form.  ``t = T`` reduces to the posterior
    expectation of ``(z - K)^+`` and ``t = s`` to the deterministic part.
    """
    so, to = _op_time(model, s), _op_time(model, t)
    T = model.T
    if not 0.0 <= so <= to <= T:
        raise DomainError(f"need 0 <= s <= t <= T on the clock, got ({so}, {to})")
    if to == so:
        return max(xi_s - K, 0.0)
    st = _condition_at(model, so, xi_s)
    post = st.posterior
    if to == T:
        return _posterior_expect(post, lambda z: max(z - K, 0.0), extra_points=(K,))
    m_t = conditional_mean(st, to)
    y = K - xi_s
    if y <= 0.0:
        # the paths only increase, so the shortfall below K is impossible
        return m_t - K
    c, ts, Ts = model.c, to - so, T - so

    def shortfall(z: float) -> float:
        zp = z - xi_s
        if zp <= 0.0:
            # degenerate pin: nothing more will be paid, shortfall is full
            return y
        f = stable_half_bridge_cdf(c, ts, Ts, y, zp)
        m = stable_half_bridge_partial_moment(c, ts, Ts, y, zp)
        return y * f - m

    return m_t - K + _posterior_expect(post, shortfall, extra_points=(K,))


def layer_recovery(
    model: ReserveModel,
    s: float,
    xi_s: float,
    layer: ReinsuranceLayer,
    *,
    t: float | None = None,
) -> float:
    """Expected recovery of an excess-of-loss layer on the time-``t`` paid amount.

    Defaults to the ultimate (``t = T``).  The layer pays the exceedence of
    the attachment capped at the limit, so its value is a difference of two
    exceedences.
    """
    t_eval = model.T if t is None else t
    low = expected_exceedence(model, s, xi_s, t_eval, layer.attachment)
    if not math.isfinite(layer.limit):
        return low
    high = expected_exceedence(model, s, xi_s, t_eval, layer.attachment + layer.limit)
    return low - high


def cvar_exceedence(
    model: ReserveModel, s: float, xi_s: float, t: float, theta: float
) -> float:
    """``E[xi_t | xi_t > theta, xi_s]``: mean paid amount on the bad tail.

    Raises ``DomainError`` when the exceedence probability vanishes (the
    threshold sits above everything the conditional law can reach).
    """
    so, to = _op_time(model, s), _op_time(model, t)
    T = model.T
    if not 0.0 <= so <= to <= T:
        raise DomainError(f"need 0 <= s <= t <= T on the clock, got ({so}, {to})")
    if to == so:
        if theta < xi_s:
            return xi_s
        raise DomainError("zero exceedence probability: the time-t value is known")
    st = _condition_at(model, so, xi_s)
    post = st.posterior
    if theta <= xi_s:
        # increasing paths exceed theta almost surely
        return conditional_mean(st, to)
    if to == T:
        prob = 1.0 - post.cdf_value(theta)
        if prob <= 1e-12:
            raise DomainError(f"zero exceedence probability above theta={theta}")
        num = _posterior_expect(
            post, lambda z: z if z > theta else 0.0, extra_points=(theta,)
        )
        return num / prob
    y = theta - xi_s
    c, ts, Ts = model.c, to - so, T - so

    def below_prob(z: float) -> float:
        zp = z - xi_s
        if zp <= 0.0:
            return 1.0
        return stable_half_bridge_cdf(c, ts, Ts, y, zp)

    def below_mean(z: float) -> float:
        zp = z - xi_s
        if zp <= 0.0:
            return 0.0
        return stable_half_bridge_partial_moment(c, ts, Ts, y, zp)

    prob = 1.0 - _posterior_expect(post, below_prob, extra_points=(theta,))
    if prob <= 1e-12:
        raise DomainError(f"zero exceedence probability above theta={theta}")
    frac = (to - so) / Ts
    numer = frac * (post.mean() - xi_s) - _posterior_expect(
        post, below_mean, extra_points=(theta,)
    )
    return xi_s + numer / prob


# ---------------------------------------------------------------------------
# tail diagnostics


def tail_ratio(model: ReserveModel, s: float, xi_s: float) -> float:
    """How the far right tail of the ultimate reweights after observing ``xi_s``.

    Returns ``psi_s * lim_L p(L)/p(L + xi_s)`` for the prior density ``p``,
    evaluated through the declared tail class: ``psi_s`` itself for power
    and thick (``levy``) tails, ``psi_s * exp(rate * xi_s)`` for an
    exponential tail, and ``inf`` for gaussian decay, where the
    conditional tail is strictly thinner than the prior one.  A finite
    value means catastrophes stay as likely, relatively, as they were at
    outset.
    """
    hint = model.spec.nu.tail
    so = _op_time(model, s)
    if so == 0.0:
        if xi_s != 0.0:
            raise DomainError("the development starts at 0; xi_s must be 0 at s = 0")
        psi_s = 1.0
    else:
        psi_s = psi(model.spec, so, xi_s)
        if psi_s == 0.0:
            raise DomainError(f"state (s={s}, xi_s={xi_s}) is unreachable")
    if hint.kind in ("levy", "power"):
        return psi_s
    if hint.kind == "exponential":
        return psi_s * math.exp(hint.param * xi_s)
    if hint.kind == "gaussian":
        return math.inf
    raise UnsupportedRegimeError(f"no tail limit known for class {hint.kind!r}")


# ---------------------------------------------------------------------------
# generalized inverse-Gaussian closed forms


def _ig_moments(c: float, gamma_: float, span: float, upto: int) -> list[float]:
    return [ig_moment(c, gamma_, span, j) for j in range(upto + 1)]


def _binomial_sum(order: int, xi: float, moments: list[float]) -> float:
    # sum_k C(order, k) xi^k m^(order-k); symmetric in the pairing direction
    return sum(
        math.comb(order, k) * xi**k * moments[order - k] for k in range(order + 1)
    )


@dataclass(frozen=True)
class GigClosedForms:
    """Closed-form conditional summaries for a GIG(n - 1/2) ultimate prior.

    Conditionally on the paid amount ``xi`` at time ``t``, the amount still
    to come is a mixture over ``k`` of GIG(k - 1/2, c(T - t), gamma_) laws
    with the binomial ``weights`` reported here; ``ultimate`` is the
    conditional mean of the terminal pin.
    """

    n: int
    c: float
    gamma_: float
    t: float
    T: float
    xi: float
    weights: tuple[float, ...]
    ultimate: float

    def moment(self, m: int) -> float:
        """``E[U_T^m | xi]`` as a ratio of binomial moment sums."""
        if m != int(m) or m < 0:
            raise ConfigError("moment order must be a non-negative integer")
        m = int(m)
        mom = _ig_moments(self.c, self.gamma_, self.T - self.t, self.n + m)
        return _binomial_sum(self.n + m, self.xi, mom) / _binomial_sum(
            self.n, self.xi, mom
        )

    def exp_moment(self, alpha: float) -> float:
        """``E[exp(alpha^2 U_T / 2) | xi]`` for ``0 < alpha < gamma_``.

        The exponential reweighting thins the GIG decay rate from
        ``gamma_`` to ``sqrt(gamma_^2 - alpha^2)``; at or beyond the decay
        rate the moment diverges and a ``DomainError`` is raised.
        """
        if not 0.0 < alpha < self.gamma_:
            raise DomainError("exp_moment needs 0 < alpha < gamma_")
        gbar = math.sqrt(self.gamma_**2 - alpha**2)
        span = self.T - self.t
        mom = _ig_moments(self.c, self.gamma_, span, self.n)
        mbar = _ig_moments(self.c, gbar, span, self.n)
        ratio = _binomial_sum(self.n, self.xi, mbar) / _binomial_sum(
            self.n, self.xi, mom
        )
        return ratio * math.exp(
            0.5 * alpha * alpha * self.xi + self.c * span * (self.gamma_ - gbar)
        )


def gig_closed_forms(
    n: int, c: float, gamma_: float, t: float, T: float, xi: float
) -> GigClosedForms:
    """Conditional mixture weights and moments for a GIG(n - 1/2, cT, gamma_) prior.

    Valid for integer ``n >= 0`` and ``0 <= t < T`` with ``xi > 0`` when
    ``t > 0`` (the paid amount of a stable-1/2 development is almost surely
    positive) and ``xi = 0`` at ``t = 0``.
    """
    if n != int(n) or n < 0:
        raise ConfigError("n must be a non-negative integer")
    n = int(n)
    if c <= 0.0 or gamma_ <= 0.0 or T <= 0.0:
        raise DomainError("gig_closed_forms needs positive c, gamma_, T")
    if not 0.0 <= t < T:
        raise DomainError(f"need 0 <= t < T, got t={t}, T={T}")
    if t == 0.0:
        if xi != 0.0:
            raise DomainError("xi must be 0 at t = 0")
    elif xi <= 0.0:
        raise DomainError("the paid amount xi must be positive for t > 0")
    mom = _ig_moments(c, gamma_, T - t, n + 1)
    denom = _binomial_sum(n, xi, mom)
    ultimate = _binomial_sum(n + 1, xi, mom) / denom
    weights = tuple(
        math.comb(n, k) * xi ** (n - k) * mom[k] / denom for k in range(n + 1)
    )
    return GigClosedForms(
        n=n,
        c=c,
        gamma_=gamma_,
        t=t,
        T=T,
        xi=xi,
        weights=weights,
        ultimate=float(ultimate),
    )


def gig_terminal_law(lam: float, delta: float, gamma_: float) -> TerminalLaw:
    """Generalized inverse-Gaussian prior as a terminal law.

    Carries the density, an exact sampler, and the tail hint the reserving
    engine requires: exponential with rate ``gamma_^2 / 2`` when
    ``gamma_ > 0``, else the reciprocal-gamma power tail ``1 - lam``.
    """
    if gamma_ > 0.0:
        tail = TailHint("exponential", 0.5 * gamma_ * gamma_)
    else:
        tail = TailHint("power", 1.0 - lam)

    def density(z, _l=lam, _d=delta, _g=gamma_):
        return gig_density(z, _l, _d, _g)

    def sampler(rng, size, _l=lam, _d=delta, _g=gamma_):
        return sample_gig(rng, _l, _d, _g, size)

    return TerminalLaw(
        density=density, support=(0.0, math.inf), tail=tail, sampler=sampler
    )


def gpd_terminal_law(
    threshold: float = 1.0, scale: float = 4.0, index: float = 5.0
) -> TerminalLaw:
    """Pareto-type prior ``p(z) ∝ (1 + (z - threshold)/scale)^(-index)``.

    A textbook heavy-tailed ultimate-loss prior: power tail of the given
    index, mean ``threshold + scale/(index - 2)`` when ``index > 2``.
    """
    if threshold < 0.0:
        raise ConfigError("gpd threshold must be >= 0")
    if scale <= 0.0 or index <= 1.0:
        raise ConfigError("gpd needs scale > 0 and index > 1")

    def density(z, _m=threshold, _s=scale, _a=index):
        za = np.asarray(z, dtype=float)
        out = np.where(
            za > _m, ((_a - 1.0) / _s) * (1.0 + (za - _m) / _s) ** -_a, 0.0
        )
        return float(out) if np.ndim(z) == 0 else out

    def cdf(x, _m=threshold, _s=scale, _a=index):
        if x <= _m:
            return 0.0
        return 1.0 - (1.0 + (x - _m) / _s) ** (1.0 - _a)

    def sampler(rng, size, _m=threshold, _s=scale, _a=index):
        u = rng.random(size)
        return _m + _s * (u ** (-1.0 / (_a - 1.0)) - 1.0)

    return TerminalLaw(
        density=density,
        support=(threshold, math.inf),
        tail=TailHint("power", index),
        sampler=sampler,
        cdf=cdf,
    )


# ---------------------------------------------------------------------------
# exposure clocks


def weibull_tau(a: float, b: float, T: float, t: float) -> float:
    """Weibull exposure clock ``T * (1 - e^(-(t/a)^b)) / (1 - e^(-(T/a)^b))``."""
    if a <= 0.0 or b <= 0.0 or T <= 0.0:
        raise DomainError("weibull_tau needs positive a, b, T")
    if not 0.0 <= t <= T:
        raise DomainError(f"need 0 <= t <= T, got t={t}")
    return T * math.expm1(-((t / a) ** b)) / math.expm1(-((T / a) ** b))


@dataclass(frozen=True)
class TimeChange:
    """Deterministic exposure clock: calendar time to operational time.

    ``tau(t) = T * int_0^t eps / int_0^T eps`` for an exposure rate
    ``eps >= 0``, so ``tau(0) = 0``, ``tau(T) = T`` and ``tau`` never
    decreases.  Build with ``TimeChange.weibull(a, b, T)`` (the classical
    decaying-exposure pattern; for ``b > 1`` the busiest calendar instant
    is ``t_star``) or ``TimeChange.tabulated(times, exposures)``, which
    interpolates a sampled rate linearly and integrates it exactly.
    """

    T: float
    a: float | None = None
    b: float | None = None
    times: tuple[float, ...] | None = None
    exposures: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.T <= 0.0:
            raise ConfigError("TimeChange: horizon T must be positive")
        weib = self.a is not None or self.b is not None
        tab = self.times is not None or self.exposures is not None
        if weib == tab:
            raise ConfigError("give either Weibull (a, b) or a tabulated exposure")
        if weib:
            if self.a is None or self.b is None:
                raise ConfigError("the Weibull clock needs both a and b")
            if self.a <= 0.0 or self.b <= 0.0:
                raise ConfigError("Weibull clock parameters must be positive")
            return
        if self.times is None or self.exposures is None:
            raise ConfigError("a tabulated clock needs both times and exposures")
        ts = tuple(float(x) for x in self.times)
        ex = tuple(float(x) for x in self.exposures)
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "exposures", ex)
        if len(ts) != len(ex) or len(ts) < 2:
            raise ConfigError("tabulated clock needs matching times/exposures, >= 2 rows")
        if ts[0] != 0.0 or ts[-1] != self.T:
            raise ConfigError("tabulated times must run from 0 to T")
        if any(u >= v for u, v in zip(ts, ts[1:])):
            raise ConfigError("tabulated times must be strictly increasing")
        if any(e < 0.0 for e in ex) or not any(e > 0.0 for e in ex):
            raise ConfigError("exposures must be >= 0 and not all zero")
        cum = [0.0]
        for (t0, t1), (e0, e1) in zip(zip(ts, ts[1:]), zip(ex, ex[1:])):
            cum.append(cum[-1] + 0.5 * (e0 + e1) * (t1 - t0))
        object.__setattr__(self, "_cum", tuple(cum))

    @classmethod
    def weibull(cls, a: float, b: float, T: float) -> "TimeChange":
        return cls(T=T, a=a, b=b)

    @classmethod
    def tabulated(cls, times, exposures) -> "TimeChange":
        times = tuple(float(x) for x in times)
        if not times:
            raise ConfigError("tabulated clock needs at least two rows")
        return cls(T=times[-1], times=times, exposures=tuple(exposures))

    @property
    def kind(self) -> str:
        return "weibull" if self.a is not None else "tabulated"

    @property
    def t_star(self) -> float | None:
        """Calendar instant of peak exposure (Weibull with b > 1 only)."""
        if self.kind == "weibull" and self.b > 1.0:
            return self.a * ((self.b - 1.0) / self.b) ** (1.0 / self.b)
        return None

    def __call__(self, t: float) -> float:
        if not 0.0 <= t <= self.T:
            raise DomainError(f"clock input outside [0, T]: {t}")
        if t == 0.0 or t == self.T:
            # pin the endpoints exactly; accumulated rounding must not push
            # the operational grid past the horizon
            return float(t)
        if self.kind == "weibull":
            return weibull_tau(self.a, self.b, self.T, t)
        ts, ex, cum = self.times, self.exposures, self._cum
        i = min(int(np.searchsorted(ts, t, side="right")) - 1, len(ts) - 2)
        i = max(i, 0)
        dt = t - ts[i]
        e_t = ex[i] + (ex[i + 1] - ex[i]) * dt / (ts[i + 1] - ts[i])
        val = cum[i] + 0.5 * (ex[i] + e_t) * dt
        return self.T * val / cum[-1]


def apply_time_change(model: ReserveModel, clock: TimeChange) -> ReserveModel:
    """The same reserving model run on the exposure clock.

    Every subsequent query at calendar time ``t`` is evaluated at
    operational time ``clock(t)``; the law of the ultimate is untouched.
    Replaces any clock already present.
    """
    if clock.T != model.spec.T:
        raise ConfigError(
            f"clock horizon {clock.T} does not match the model horizon {model.spec.T}"
        )
    return ReserveModel(spec=replace(model.spec, time_change=clock))


# ---------------------------------------------------------------------------
# two dependent lines from one master development


@dataclass(frozen=True)
class TwoLineModel:
    """Two dependent business lines carved from one master development.

    The master bridge runs on ``[0, T_star]``.  Line one is the master up
    to the common horizon ``T < T_star``; line two is the master's leftover
    development on ``[T, T_star]``, sped up to run on ``[0, T]`` and
    rescaled so its own growth parameter is ``c2``.  Sharing one source of
    information is what correlates the lines.
    """

    master: LrbSpec
    T: float
    c2: float

    def __post_init__(self):
        if not isinstance(self.master.family, StableHalf):
            raise ConfigError("the master development must be stable-1/2")
        if self.master.time_change is not None:
            raise ConfigError("put exposure clocks on the lines, not the master")
        if self.master.nu.tail is None:
            raise ConfigError("the master ultimate prior needs a tail-decay hint")
        if not 0.0 < self.T < self.master.T:
            raise ConfigError("need 0 < T < T_star")
        if self.c2 <= 0.0:
            raise ConfigError("c2 must be positive")

    @property
    def T_star(self) -> float:
        return self.master.T

    @property
    def c(self) -> float:
        return self.master.family.c

    @property
    def lambda_(self) -> float:
        return self.T_star / self.T - 1.0

    @property
    def k(self) -> float:
        return self.c2 / (self.c * self.lambda_)


@dataclass(frozen=True)
class TwoLineReport:
    """Conditional ultimates for both lines plus the prior dependence summary."""

    ultimate_one: float
    ultimate_two: float
    mean_one: float
    mean_two: float
    cross_moment: float | None
    correlation: float | None


def _joint_second_moment_kernel(c: float, T_star: float, z: float) -> float:
    # E[S_T (z - S_T) | S_Tstar = z] stripped of its (T/T_star)(T_star - T)
    # prefactor: the bridge second-moment defect at the pin z
    return (
        c
        * math.sqrt(2.0 * math.pi)
        * z**1.5
        * exp_mul_norm_cdf(c * c * T_star * T_star / (2.0 * z), -c * T_star / math.sqrt(z))
    )


def two_line(
    model2: TwoLineModel, t: float = 0.0, x1: float = 0.0, x2: float = 0.0
) -> TwoLineReport:
    """Best-estimate ultimates for both lines given their time-``t`` values.

    The two observed stretches of the master path can be swapped ahead of
    the unobserved ones without changing the law, so conditioning on
    ``(x1, x2)`` is conditioning the master at the single state
    ``((1 + lambda) t, x1 + x2 / k^2)`` — one one-dimensional integral for
    the posterior mean of the master ultimate, from which both line
    ultimates follow linearly.  The prior cross moment and correlation of
    the two ultimate losses are closed apart from one more integral; the
    correlation is ``None`` when the declared tail of the master prior has
    no second moment.
    """
    lam, k, c = model2.lambda_, model2.k, model2.c
    T, Ts = model2.T, model2.T_star
    if not 0.0 <= t < T:
        raise DomainError(f"need 0 <= t < T, got t={t}")
    if x1 < 0.0 or x2 < 0.0:
        raise DomainError("paid amounts cannot be negative")
    prior = model2.master.nu
    if not _mean_is_finite(prior.tail):
        raise DomainError("the master ultimate prior has no finite mean")

    v = x1 + x2 / (k * k)
    st = condition(model2.master, (1.0 + lam) * t, v)
    e_star = st.posterior.mean()
    D = Ts - (1.0 + lam) * t
    u1 = x1 + ((T - t) / D) * (e_star - v)
    u2 = x2 + k * k * ((Ts - T - lam * t) / D) * (e_star - v)

    mean_s = prior.mean()
    mean_one = (T / Ts) * mean_s
    mean_two = k * k * ((Ts - T) / Ts) * mean_s
    cross = corr = None
    if _second_moment_is_finite(prior.tail):
        second_s = prior.moment(2.0)
        a_int = _posterior_expect(
            prior, lambda z: _joint_second_moment_kernel(c, Ts, z)
        )
        cross = k * k * (T / Ts) * (Ts - T) * a_int
        var_one = (T / Ts) * second_s - (T / Ts) * (Ts - T) * a_int - mean_one**2
        var_two = (
            k**4 * ((Ts - T) / Ts) * second_s
            - k**4 * (T * (Ts - T) / Ts) * a_int
            - mean_two**2
        )
        corr = (cross - mean_one * mean_two) / math.sqrt(var_one * var_two)
    return TwoLineReport(
        ultimate_one=float(u1),
        ultimate_two=float(u2),
        mean_one=float(mean_one),
        mean_two=float(mean_two),
        cross_moment=cross if cross is None else float(cross),
        correlation=corr if corr is None else float(corr),
    )


# ---------------------------------------------------------------------------
# claims histories and quantiles


def claims_state(times, amounts) -> tuple[float, float]:
    """Reduce a paid-claims history to its latest ``(t, cumulative)`` point.

    The development is Markov given the current pair, so valuation needs
    only the most recent observation — but the whole history is validated
    first: both columns must be finite, non-negative, and strictly
    increasing.
    """
    ts = [float(x) for x in times]
    xs = [float(x) for x in amounts]
    if len(ts) != len(xs):
        raise ConfigError("claims history columns differ in length")
    if not ts:
        raise ConfigError("claims history is empty")
    for col, name in ((ts, "t"), (xs, "cumulative_paid")):
        if any(not math.isfinite(v) for v in col):
            raise ConfigError(f"claims history column {name!r} has a non-finite entry")
        if col[0] < 0.0:
            raise ConfigError(f"claims history column {name!r} must be non-negative")
        if any(u >= v for u, v in zip(col, col[1:])):
            raise ConfigError(f"claims history column {name!r} must strictly increase")
    return ts[-1], xs[-1]


def ultimate_quantile(model: ReserveModel, s: float, xi_s: float, q: float) -> float:
    """``q``-quantile of the ultimate loss given the time-``s`` observation.

    Bisects the conditional terminal CDF; the bracket grows geometrically
    until it straddles ``q``.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"need 0 < q < 1, got q={q}")
    st = _condition_at(model, _op_time(model, s), xi_s)
    post = st.posterior
    candidates = [z for z, _ in post.atoms]
    if post.density is not None:
        candidates.append(post.support[0])
    lo = min(candidates)
    if post.cdf_value(lo) >= q:
        return lo
    hi_cap = post.support[1] if post.density is not None else max(z for z, _ in post.atoms)
    step = max(1.0, abs(lo))
    hi = lo + step
    for _ in range(200):
        if hi >= hi_cap:
            hi = hi_cap
            break
        if post.cdf_value(hi) >= q:
            break
        step *= 2.0
        hi = lo + step
    else:
        raise NumericError(f"could not bracket the q={q} quantile")
    if not math.isfinite(hi):
        raise NumericError(f"could not bracket the q={q} quantile")
    return float(
        optimize.brentq(
            lambda x: post.cdf_value(x) - q, lo, hi, xtol=1e-12 * max(1.0, abs(hi))
        )
    )
