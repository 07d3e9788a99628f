"""Information-based pricing on random bridges.

The market filtration is generated by a random bridge whose terminal
value is the cash-flow determinant.  Prices are discounted conditional
expectations; the closed forms here are accelerations of — and are
tested against — the generic posterior machinery in :mod:`lrb.core`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy import special as sp
from scipy import stats as ss

from ._quad import integrate
from .core import (
    ConditionedState,
    LrbSpec,
    TerminalLaw,
    condition,
    is_increasing,
    marginal_density,
    transition_density,
)
from .errors import ConfigError, DomainError, NumericError, UnsupportedRegimeError
from .marginals import (
    NIG,
    VG,
    Brownian,
    CauchyF,
    Gamma,
    PoissonF,
    increment_density,
    nig_derive,
    vg_derive,
)
from .specfn import bessel_k, kummer_m, norm_cdf

__all__ = [
    "DiscountCurve",
    "BinaryPayoff",
    "BasketSpec",
    "EquityReport",
    "cashflow_price",
    "binary_bond_price",
    "call_on_bond",
    "cauchy_call_closed_form",
    "equity_model_check",
    "ntd_swap_value",
    "par_premium",
    "prb_posterior_pmf",
    "prb_transition_pmf",
    "prb_intensity",
    "next_jump_cdf",
    "cprb_char_fn",
    "negbinom_pmf",
    "negbinom_count_transition",
    "negbinom_terminal_transition",
    "negbinom_pgf",
    "negbinom_intensity",
    "logseries_pmf",
    "logseries_count_transition",
    "mixed_poisson_terminal_pmf",
    "mixed_poisson_count_transition",
    "mixed_poisson_intensity",
]


# ---------------------------------------------------------------------------
# discounting and payoffs


@dataclass(frozen=True)
class DiscountCurve:
    """Deterministic short rate, constant or piecewise constant.

    ``pieces`` is a tuple of (start_time, rate) pairs with start times
    strictly increasing from 0; each rate applies until the next start.
    ``P(s, t) = exp(-int_s^t r_u du)``.
    """

    rate: float | None = None
    pieces: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if (self.rate is None) == (self.pieces is None):
            raise ConfigError("give exactly one of rate or pieces")
        if self.rate is not None:
            if self.rate < 0:
                raise ConfigError("short rate must be nonnegative")
        else:
            pieces = tuple((float(a), float(b)) for a, b in self.pieces)
            object.__setattr__(self, "pieces", pieces)
            if not pieces or pieces[0][0] != 0.0:
                raise ConfigError("piecewise rates must start at t = 0")
            times = [a for a, _ in pieces]
            if any(u >= v for u, v in zip(times, times[1:])):
                raise ConfigError("piece start times must be strictly increasing")
            if any(b < 0 for _, b in pieces):
                raise ConfigError("short rate must be nonnegative")

    def integrated_rate(self, s: float, t: float) -> float:
        """``int_s^t r_u du`` for s <= t."""
        if t < s:
            raise DomainError(f"need s <= t, got s={s}, t={t}")
        if self.rate is not None:
            return self.rate * (t - s)
        total = 0.0
        pieces = self.pieces
        for idx, (start, r) in enumerate(pieces):
            end = pieces[idx + 1][0] if idx + 1 < len(pieces) else math.inf
            lo = max(s, start)
            hi = min(t, end)
            if hi > lo:
                total += r * (hi - lo)
        return total

    def discount(self, s: float, t: float) -> float:
        """Zero-coupon bond price ``P(s, t)``."""
        return math.exp(-self.integrated_rate(s, t))


@dataclass(frozen=True)
class BinaryPayoff:
    """Two-point cash flow: ``k0`` with probability ``p``, else ``k1``."""

    k0: float
    k1: float
    p: float

    def __post_init__(self):
        if not self.k0 < self.k1:
            raise ConfigError(f"need k0 < k1, got {self.k0}, {self.k1}")
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"need 0 < p < 1, got {self.p}")

    def terminal_law(self) -> TerminalLaw:
        return TerminalLaw(atoms=((self.k0, self.p), (self.k1, 1.0 - self.p)))

    def spec(self, family, T: float) -> LrbSpec:
        return LrbSpec(family=family, T=T, nu=self.terminal_law())


# ---------------------------------------------------------------------------
# generic single-cash-flow pricing


def _as_state(spec: LrbSpec, state) -> ConditionedState:
    if isinstance(state, ConditionedState):
        return state
    t, xi = state
    return condition(spec, float(t), float(xi))


def cashflow_price(spec: LrbSpec, state, curve: DiscountCurve, h) -> float:
    """Price of the time-T cash flow ``h(X_T)`` seen from ``state``.

    ``state`` is a ``(t, xi)`` pair or a ConditionedState.  The price is
    the discounted posterior expectation of ``h``.
    """
    st = _as_state(spec, state)
    value = st.posterior.expect(h)
    if not math.isfinite(value):
        raise NumericError(f"payoff expectation is not finite: {value!r}")
    return curve.discount(st.s, spec.T) * value


# ---------------------------------------------------------------------------
# binary bonds: closed forms


def _binary_atoms(spec: LrbSpec) -> tuple[float, float, float, float]:
    atoms = sorted(spec.nu.atoms)
    if spec.nu.density is not None or len(atoms) != 2:
        raise ConfigError("binary pricing needs a purely two-atom terminal law")
    (k0, w0), (k1, w1) = atoms
    return k0, w0, k1, w1


def _vg_shape_logpdf(m: float, t: float, x: float) -> float:
    """x-dependent part of the symmetric VG log density (constants dropped)."""
    nu = m * t - 0.5
    ax = abs(x)
    if ax == 0.0:
        if nu <= 0.0:
            return math.inf
        return math.log(0.5) + sp.gammaln(nu) + nu * math.log(2.0 / math.sqrt(2.0 * m))
    arg = math.sqrt(2.0 * m) * ax
    return nu * math.log(ax) + float(np.log(bessel_k(nu, arg, scaled=True))) - arg


def _nig_shape_logpdf(alpha: float, t: float, x: float) -> float:
    """x-dependent part of the symmetric NIG log density (constants dropped)."""
    root = math.hypot(alpha * t, x)
    arg = alpha * root
    return float(np.log(bessel_k(1.0, arg, scaled=True))) - arg - math.log(root)


def _binary_log_odds_closed(spec: LrbSpec, t: float, xi: float) -> float:
    """log(q1/q0) at (t, xi) using the family's printed closed form."""
    k0, w0, k1, w1 = _binary_atoms(spec)
    fam = spec.family
    T = spec.T
    base = math.log(w1 / w0)

    if isinstance(fam, Brownian):
        xi_star = t * (k0 + k1) / (2.0 * T)
        return base + (k1 - k0) * (xi - xi_star) / (fam.sigma**2 * (T - t))

    if isinstance(fam, CauchyF):
        c = fam.c
        b2 = (c * (T - t)) ** 2
        return (
            base
            + math.log(c * c * T * T + k1 * k1)
            - math.log(c * c * T * T + k0 * k0)
            + math.log(b2 + (k0 - xi) ** 2)
            - math.log(b2 + (k1 - xi) ** 2)
        )

    if isinstance(fam, VG):
        d = vg_derive(fam.m, fam.theta, fam.sigma)
        u = d.k_factor / fam.sigma
        if (k0 == 0.0 or k1 == 0.0) and fam.m * T <= 0.5:
            raise UnsupportedRegimeError(
                "VG binary closed form with a cash amount at 0 needs T > 1/(2m)"
            )
        g = _vg_shape_logpdf
        return (
            base
            + g(fam.m, T, u * k0)
            - g(fam.m, T, u * k1)
            + g(fam.m, T - t, u * (k1 - xi))
            - g(fam.m, T - t, u * (k0 - xi))
        )

    if isinstance(fam, NIG):
        d = nig_derive(fam.c, fam.theta, fam.sigma)
        u = d.k_factor / fam.sigma
        g = _nig_shape_logpdf
        return (
            base
            + g(d.alpha, T, u * k0)
            - g(d.alpha, T, u * k1)
            + g(d.alpha, T - t, u * (k1 - xi))
            - g(d.alpha, T - t, u * (k0 - xi))
        )

    raise UnsupportedRegimeError(
        f"no closed binary-bond form for family {type(fam).__name__}"
    )


_CLOSED_BINARY = (Brownian, CauchyF, VG, NIG)


def binary_bond_price(
    spec: LrbSpec, curve: DiscountCurve, t: float, xi: float, *, method: str = "auto"
) -> float:
    """Price of the two-point cash flow at state ``(t, xi)``.

    ``method='closed'`` uses the family's explicit odds formula,
    ``'generic'`` the posterior machinery; ``'auto'`` prefers closed
    where one exists.  The two agree to within roundoff.
    """
    k0, _, k1, _ = _binary_atoms(spec)
    if not 0.0 <= t < spec.T:
        raise DomainError(f"need 0 <= t < T, got t={t}")
    P = curve.discount(t, spec.T)
    if method == "auto":
        method = "closed" if isinstance(spec.family, _CLOSED_BINARY) else "generic"
    if method == "closed":
        log_odds = _binary_log_odds_closed(spec, t, xi)
        if math.isinf(log_odds):
            mean = k1 if log_odds > 0 else k0
        else:
            q1 = sp.expit(log_odds)
            mean = k0 * sp.expit(-log_odds) + k1 * q1
        return P * mean
    if method == "generic":
        st = condition(spec, t, xi)
        return P * sum(w * z for z, w in st.posterior.atoms)
    raise ConfigError(f"unknown method {method!r}; use auto, closed, or generic")


# ---------------------------------------------------------------------------
# calls on binary bonds


def _bridge_exceed_prob(
    spec: LrbSpec, s: float, t: float, xi_s: float, z: float, x_star: float
) -> float:
    """P[xi_t > x_star] for the bridge from (s, xi_s) pinned to z at T."""
    fam = spec.family
    span_t, span_T = t - s, spec.T - s
    if isinstance(fam, Brownian):
        mean = xi_s + span_t / span_T * (z - xi_s)
        var = fam.sigma**2 * span_t * (spec.T - t) / span_T
        return float(norm_cdf((mean - x_star) / math.sqrt(var)))
    if isinstance(fam, Gamma):
        if x_star <= xi_s:
            return 1.0
        if x_star >= z:
            return 0.0
        u = (x_star - xi_s) / (z - xi_s)
        return float(1.0 - sp.betainc(fam.m * span_t, fam.m * (spec.T - t), u))
    raise UnsupportedRegimeError(
        f"no closed bridge law for family {type(fam).__name__}"
    )


def _find_crossings(f, grid: np.ndarray) -> list[float]:
    """Roots of a scalar function between sign changes on a scan grid."""
    vals = np.array([f(x) for x in grid])
    roots = []
    sign = np.sign(vals)
    for i in range(len(grid) - 1):
        if sign[i] == 0.0:
            roots.append(float(grid[i]))
        elif sign[i] * sign[i + 1] < 0.0:
            roots.append(float(optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-13)))
    return roots


def _call_quadrature(
    spec: LrbSpec, curve: DiscountCurve, s: float, xi_s: float, t: float, K: float
) -> float:
    """Generic call pricer: quadrature of (bond value - K)+ against the
    transition density, with payoff kinks located by scanning."""
    k0, _, k1, _ = _binary_atoms(spec)
    T = spec.T
    P_st = curve.discount(s, t)
    P_tT = curve.discount(t, T)

    def bond_minus_k(x: float) -> float:
        try:
            return binary_bond_price(spec, curve, t, x, method="generic") - K
        except DomainError:
            return -K

    increasing = is_increasing(spec.family)
    if increasing:
        lo, hi = xi_s, k1
        scan = np.linspace(lo, hi, 1201)[1:-1]
    else:
        lo, hi = -math.inf, math.inf
        u = np.linspace(-1.55, 1.55, 1201)
        center = 0.5 * (k0 + k1)
        width = (k1 - k0) + abs(xi_s - center) + 1.0
        scan = center + width * np.tan(u)
    points = set(_find_crossings(bond_minus_k, scan))
    if increasing:
        points |= {k0, k1}
    points = sorted(x for x in points if lo < x < hi)

    def integrand(x: float) -> float:
        p = transition_density(spec, s, t, xi_s, x)
        if p == 0.0:
            return 0.0
        gain = bond_minus_k(x)
        return p * gain if gain > 0.0 else 0.0

    val, _ = integrate(integrand, lo, hi, points=tuple(points))
    return P_st * val


def call_on_bond(
    spec: LrbSpec,
    curve: DiscountCurve,
    s: float,
    xi_s: float,
    t: float,
    K: float,
    *,
    method: str = "auto",
) -> float:
    """European call, strike ``K``, exercise ``t``, on the binary bond.

    ``auto`` uses the Brownian/gamma exceedance sums and the Cauchy
    rational closed form where valid, and quadrature otherwise;
    ``'generic'`` forces quadrature.  The gamma fast path needs the bond
    value monotone in the state, which fails when ``m (T - t) < 1``.
    """
    k0, _, k1, _ = _binary_atoms(spec)
    T = spec.T
    if not 0.0 <= s < t < T:
        raise DomainError(f"need 0 <= s < t < T, got s={s}, t={t}, T={T}")
    if isinstance(spec.family, Gamma) and spec.family.m * (T - t) < 1.0:
        raise UnsupportedRegimeError(
            "gamma call: bond value is not monotone in the state when"
            f" m (T - t) = {spec.family.m * (T - t)} < 1"
        )
    st = condition(spec, s, xi_s)
    P_st = curve.discount(s, t)
    P_tT = curve.discount(t, T)
    P_sT = curve.discount(s, T)
    b_sT = P_sT * sum(w * z for z, w in st.posterior.atoms)
    if K <= P_tT * k0:
        return b_sT - P_st * K
    if K >= P_tT * k1:
        return 0.0

    if method == "auto" and isinstance(spec.family, CauchyF):
        return cauchy_call_closed_form(spec, curve, s, xi_s, t, K)
    if method == "auto" and isinstance(spec.family, (Brownian, Gamma)):
        x_star = _exercise_threshold(spec, curve, t, K)
        total = 0.0
        for z, w in st.posterior.atoms:
            prob = _bridge_exceed_prob(spec, s, t, xi_s, z, x_star)
            total += w * (P_tT * z - K) * prob
        return _clip_call(P_st * total, b_sT)
    return _clip_call(_call_quadrature(spec, curve, s, xi_s, t, K), b_sT)


def _clip_call(c: float, b_sT: float) -> float:
    return float(min(max(c, 0.0), b_sT))


def _exercise_threshold(spec: LrbSpec, curve: DiscountCurve, t: float, K: float) -> float:
    """The state above which the bond at ``t`` is worth more than ``K``."""
    k0, w0, k1, w1 = _binary_atoms(spec)
    T = spec.T
    P_tT = curve.discount(t, T)
    q1_star = (K / P_tT - k0) / (k1 - k0)
    if isinstance(spec.family, Brownian):
        xi_star = t * (k0 + k1) / (2.0 * T)
        return xi_star + (
            spec.family.sigma**2 * (T - t) / (k1 - k0)
        ) * (sp.logit(q1_star) - math.log(w1 / w0))
    if isinstance(spec.family, Gamma):
        def f(x: float) -> float:
            return binary_bond_price(spec, curve, t, x, method="generic") - K

        lo = 1e-12 * k1
        if f(lo) >= 0.0:
            return lo  # bond exceeds the strike on the whole reachable range
        return float(optimize.brentq(f, lo, k1 * (1.0 - 1e-14), xtol=1e-14))
    raise UnsupportedRegimeError(
        f"no exercise threshold for family {type(spec.family).__name__}"
    )


# ---------------------------------------------------------------------------
# Cauchy rational closed form


def _cauchy_lambda_coeffs(spec: LrbSpec, t: float):
    """Coefficients of bond value = P_tT (a0 + a1 x + a2 x^2) / (b0 + b1 x + b2 x^2)."""
    k0, p, k1, _ = _binary_atoms(spec)
    c, T = spec.family.c, spec.T
    A0 = c * c * T * T + k0 * k0
    A1 = c * c * T * T + k1 * k1
    b2s = (c * (T - t)) ** 2
    a0 = p * k0 * A0 * (b2s + k1 * k1) + (1.0 - p) * k1 * A1 * (b2s + k0 * k0)
    a2 = p * k0 * A0 + (1.0 - p) * k1 * A1
    b0 = p * A0 * (b2s + k1 * k1) + (1.0 - p) * A1 * (b2s + k0 * k0)
    b1 = -2.0 * (k1 * p * A0 + k0 * (1.0 - p) * A1)
    b2 = p * A0 + (1.0 - p) * A1
    a1 = -2.0 * k0 * k1 * b2
    return (a0, a1, a2), (b0, b1, b2)


def _positive_set(a: float, b: float, c: float, scale: float):
    """Intervals where ``a x^2 + b x + c > 0``."""
    if abs(a) <= 1e-14 * scale:
        if abs(b) <= 1e-14 * scale:
            return ((-math.inf, math.inf),) if c > 0.0 else ()
        root = -c / b
        return ((root, math.inf),) if b > 0.0 else ((-math.inf, root),)
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return ((-math.inf, math.inf),) if a > 0.0 else ()
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    r1, r2 = sorted((q / a, c / q if q != 0.0 else -b / a))
    if a > 0.0:
        return ((-math.inf, r1), (r2, math.inf))
    return ((r1, r2),)


def cauchy_call_closed_form(
    spec: LrbSpec, curve: DiscountCurve, s: float, xi_s: float, t: float, K: float
) -> float:
    """Call on a Cauchy binary bond via the rational bond-value form.

    The bond value in the state is a ratio of quadratics, so the exercise
    region is read off from one quadratic's roots and priced with the
    Cauchy bridge CDF — no quadrature.
    """
    from .bridges import cauchy_bridge_cdf

    if not isinstance(spec.family, CauchyF):
        raise ConfigError("cauchy_call_closed_form needs a CauchyF family")
    k0, _, k1, _ = _binary_atoms(spec)
    c, T = spec.family.c, spec.T
    if not 0.0 <= s < t < T:
        raise DomainError(f"need 0 <= s < t < T, got s={s}, t={t}, T={T}")
    P_st = curve.discount(s, t)
    P_tT = curve.discount(t, T)
    st = condition(spec, s, xi_s)
    b_sT = curve.discount(s, T) * sum(w * z for z, w in st.posterior.atoms)

    (a0, a1, a2), (b0, b1, b2) = _cauchy_lambda_coeffs(spec, t)
    kp = K / P_tT

    # extremes of the rational bond value over all states
    half_span = math.sqrt((k0 - k1) ** 2 + 4.0 * (c * (T - t)) ** 2)
    x_hi = 0.5 * (k0 + k1 + half_span)
    x_lo = 0.5 * (k0 + k1 - half_span)

    def rational(x: float) -> float:
        return (a0 + a1 * x + a2 * x * x) / (b0 + b1 * x + b2 * x * x)

    lam_max = max(rational(x_hi), rational(x_lo))
    lam_min = min(rational(x_hi), rational(x_lo))
    if kp >= lam_max:
        return 0.0
    if kp <= lam_min:
        return b_sT - P_st * K
    qa = a2 - kp * b2
    qb = a1 - kp * b1
    qc = a0 - kp * b0
    scale = abs(a2) + abs(kp) * abs(b2)
    exercise = _positive_set(qa, qb, qc, scale)

    def bridge_cdf(x: float, z: float) -> float:
        if x == -math.inf:
            return 0.0
        if x == math.inf:
            return 1.0
        return float(cauchy_bridge_cdf(c, t - s, T - s, x - xi_s, z - xi_s))

    total = 0.0
    for z, w in st.posterior.atoms:
        prob = sum(bridge_cdf(hi, z) - bridge_cdf(lo, z) for lo, hi in exercise)
        total += w * (P_tT * z - K) * prob
    return _clip_call(P_st * total, b_sT)


# ---------------------------------------------------------------------------
# equity-model recovery


@dataclass
class EquityReport:
    """Result of rebuilding an exponential-Levy stock model on a bridge."""

    kind: str
    spec: LrbSpec
    w: float
    scale: float
    s0: float
    r: float
    martingale_gap: float
    price_gap: float

    def price(self, t: float, xi: float) -> float:
        return self.s0 * math.exp(self.r * t + self.scale * xi + self.w * t)


def equity_model_check(
    kind: str,
    params: tuple[float, float, float],
    T: float,
    *,
    r: float = 0.0,
    s0: float = 1.0,
) -> EquityReport:
    """Recover an exponential-Levy stock model inside the bridge framework.

    For ``kind='vg'`` with parameters ``(m, theta, sigma)`` (or
    ``'nig'`` with ``(c, theta, sigma)``) the bridge with a symmetric
    family and a tilted-increment terminal law reproduces the Levy model:
    ``S_t = s0 exp(r t + scale xi_t + w t)``.  The report carries the
    numerically verified martingale and pricing identities.
    """
    kind = kind.lower()
    if kind == "vg":
        m, theta, sigma = params
        if theta + 0.5 * sigma * sigma >= m:
            raise DomainError(
                "VG equity model needs theta + sigma^2/2 < m for the unit"
                " exponential moment"
            )
        rho = math.sqrt(1.0 + theta * theta / (2.0 * m * sigma * sigma))
        theta_t = theta * rho / sigma
        family = VG(m=m)
        terminal_fam = VG(m=m, theta=theta_t, sigma=rho)
        w = m * math.log1p(-theta / m - sigma * sigma / (2.0 * m))
        scale = sigma / rho

        def sampler(rng, n):
            g = rng.gamma(m * T, 1.0 / m, size=n)
            return theta_t * g + rho * np.sqrt(g) * rng.standard_normal(n)

    elif kind == "nig":
        c, theta, sigma = params
        if c * c <= sigma * sigma + 2.0 * theta:
            raise DomainError(
                "NIG equity model needs c^2 > sigma^2 + 2 theta for the unit"
                " exponential moment"
            )
        # the terminal law NIG(c, theta_t, kp) is a pure exponential tilt
        # of the symmetric family NIG(c * kp) — kp is chosen so the
        # argument rescaling drops out
        kp = (1.0 + theta * theta / (c * c * sigma * sigma)) ** 0.25
        theta_t = theta * kp / sigma
        family = NIG(c=c * kp)
        terminal_fam = NIG(c=c, theta=theta_t, sigma=kp)
        w = c * math.sqrt(c * c - sigma * sigma - 2.0 * theta) - c * c
        scale = sigma / kp
        q = math.sqrt(c * c * kp * kp + theta_t * theta_t)

        def sampler(rng, n, _a=c * T * q / kp, _b=c * T * theta_t / kp, _s=c * kp * T):
            return ss.norminvgauss.rvs(_a, _b, scale=_s, random_state=rng, size=n)

    else:
        raise ConfigError(f"unknown equity model kind {kind!r}; use 'vg' or 'nig'")

    nu = TerminalLaw(
        density=lambda z: increment_density(terminal_fam, T, z),
        support=(-np.inf, np.inf),
        sampler=sampler,
        points=(0.0,),
    )
    spec = LrbSpec(family=family, T=T, nu=nu)
    curve = DiscountCurve(rate=r)

    # martingale identity: E[exp(scale * increment over dt)] e^{w dt} = 1
    def mart_integrand(x: float, dt: float) -> float:
        d = increment_density(terminal_fam, dt, x)
        if d <= 0.0:
            return 0.0
        # the exponent cap can only bind where the density is an exact
        # float zero, by the moment condition
        return math.exp(min(math.log(d) + scale * x, 700.0))

    mart_gap = 0.0
    for dt in (0.25 * T, 0.5 * T, T):
        val, _ = integrate(
            lambda x: mart_integrand(x, dt), -math.inf, math.inf, points=(0.0,)
        )
        mart_gap = max(mart_gap, abs(val * math.exp(w * dt) - 1.0))

    # pricing identity: discounted-expectation price equals the exponential model
    def h(x):
        # capped exponent: the cap can only bind where the posterior
        # density is an exact float zero, by the moment condition
        return s0 * math.exp(min(r * T + scale * x + w * T, 700.0))

    price_gap = 0.0
    t_mid = 0.5 * T
    sd = abs(scale) * math.sqrt(T) + 0.1
    for xi in (-sd, 0.0, sd):
        direct = s0 * math.exp(r * t_mid + scale * xi + w * t_mid)
        quoted = cashflow_price(spec, (t_mid, xi), curve, h)
        price_gap = max(price_gap, abs(quoted / direct - 1.0))

    return EquityReport(
        kind=kind,
        spec=spec,
        w=w,
        scale=scale,
        s0=s0,
        r=r,
        martingale_gap=mart_gap,
        price_gap=price_gap,
    )


# ---------------------------------------------------------------------------
# counting-bridge laws


def _pmf_vector(P) -> np.ndarray:
    vec = np.asarray(P, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise ConfigError("count pmf must be a 1-D vector over {0..K}")
    if np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-10:
        raise ConfigError("count pmf must be nonnegative and sum to 1")
    return vec


def prb_posterior_pmf(P, T: float, s: float, n_s: int) -> np.ndarray:
    """pmf of the terminal count given ``n_s`` jumps by time ``s``.

    ``P_s(k) ∝ k!/(k - n_s)! (1 - s/T)^k P(k)`` for ``k >= n_s``.
    """
    vec = _pmf_vector(P)
    if not 0.0 <= s < T:
        raise DomainError(f"need 0 <= s < T, got s={s}")
    if not 0 <= n_s < vec.size:
        raise DomainError(f"count {n_s} outside the pmf support")
    k = np.arange(vec.size)
    with np.errstate(divide="ignore"):
        logw = np.where(
            k >= n_s,
            sp.gammaln(k + 1.0) - sp.gammaln(k - n_s + 1.0) + k * math.log1p(-s / T),
            -np.inf,
        )
    w = np.where(vec > 0, np.exp(logw) * vec, 0.0)
    total = w.sum()
    if total <= 0.0:
        raise DomainError(f"state (s={s}, N={n_s}) is unreachable under this pmf")
    return w / total


def prb_transition_pmf(P, T: float, s: float, t: float, n_s: int) -> np.ndarray:
    """pmf of the count at ``t`` given ``n_s`` jumps by ``s`` (vector over j)."""
    vec = _pmf_vector(P)
    if not s < t:
        raise DomainError(f"need s < t, got s={s}, t={t}")
    post = prb_posterior_pmf(P, T, s, n_s)
    if abs(t - T) <= 1e-12:
        return post
    frac = (t - s) / (T - s)
    out = np.zeros(vec.size)
    for k in np.nonzero(post)[0]:
        j = np.arange(n_s, k + 1)
        out[j] += post[k] * ss.binom.pmf(j - n_s, k - n_s, frac)
    return out


def prb_intensity(spec: LrbSpec, s: float, n_s: int) -> float:
    """Jump intensity of the counting bridge at ``(s, n_s)``.

    ``(E[N_T | N_s] - N_s) / (T - s)``: the expected remaining jumps
    spread over the remaining time.
    """
    if not isinstance(spec.family, PoissonF):
        raise ConfigError("prb_intensity needs a PoissonF family")
    P = _atoms_to_pmf(spec.nu)
    post = prb_posterior_pmf(P, spec.T, s, n_s)
    mean = float(np.arange(post.size) @ post)
    return (mean - n_s) / (spec.T - s)


def _atoms_to_pmf(nu: TerminalLaw) -> np.ndarray:
    if nu.density is not None:
        raise ConfigError("counting laws must be purely atomic")
    kmax = int(max(z for z, _ in nu.atoms))
    vec = np.zeros(kmax + 1)
    for z, w in nu.atoms:
        vec[int(z)] = w
    return vec


def next_jump_cdf(spec: LrbSpec, s: float, n_s: int, t: float) -> float:
    """P[next jump <= t | n_s jumps by s] for the counting bridge."""
    if not isinstance(spec.family, PoissonF):
        raise ConfigError("next_jump_cdf needs a PoissonF family")
    T = spec.T
    if not s <= t <= T:
        raise DomainError(f"need s <= t <= T, got s={s}, t={t}")
    if t == s:
        return 0.0
    P = _atoms_to_pmf(spec.nu)
    post = prb_posterior_pmf(P, T, s, n_s)
    u = (T - t) / (T - s)
    k = np.arange(post.size)
    if u == 0.0:
        survival = float(post[n_s])
    else:
        survival = float(np.sum(post * u ** (k - n_s)))
    return 1.0 - survival


def cprb_char_fn(
    spec: LrbSpec,
    jump_cf,
    t: float,
    alpha: float,
    *,
    s: float = 0.0,
    n_s: int = 0,
    y_s: float = 0.0,
) -> complex:
    """Characteristic function of the compound counting bridge at ``t``.

    ``jump_cf(alpha)`` is the common characteristic function of the jump
    sizes; the unconditional value is the terminal pgf evaluated at the
    thinned argument, and conditioning on ``(s, n_s, y_s)`` rescales the
    remaining-jump pgf.
    """
    if not isinstance(spec.family, PoissonF):
        raise ConfigError("cprb_char_fn needs a PoissonF family")
    T = spec.T
    if not s <= t <= T:
        raise DomainError(f"need s <= t <= T, got s={s}, t={t}")
    chi = complex(jump_cf(alpha))
    P = _atoms_to_pmf(spec.nu)
    if s == 0.0 and n_s == 0:
        u = 1.0 - t / T + (t / T) * chi
        k = np.arange(P.size)
        return complex(np.sum(P * u**k))
    post = prb_posterior_pmf(P, T, s, n_s)
    u = (T - t) / (T - s) + ((t - s) / (T - s)) * chi
    k = np.arange(post.size)
    g = complex(np.sum(post * u**k))
    return np.exp(1j * alpha * y_s) * g / u**n_s


# closed count families -----------------------------------------------------


def negbinom_pmf(m: float, p: float, k) -> float:
    """``C(k+m-1, k) p^m (1-p)^k`` (number of failures form)."""
    if m <= 0 or not 0.0 < p < 1.0:
        raise DomainError("negbinom_pmf needs m > 0 and 0 < p < 1")
    ka = np.asarray(k, dtype=float)
    logc = sp.gammaln(ka + m) - sp.gammaln(ka + 1.0) - sp.gammaln(m)
    out = np.exp(logc + m * math.log(p) + ka * math.log1p(-p))
    return float(out) if out.ndim == 0 else out


def negbinom_count_transition(
    m: float, p: float, T: float, s: float, t: float, i: int, j
) -> float:
    """Closed transition pmf of the negative-binomial counting bridge."""
    if not 0.0 <= s < t <= T:
        raise DomainError(f"need 0 <= s < t <= T, got s={s}, t={t}")
    ja = np.asarray(j, dtype=float)
    A = p + (s / T) * (1.0 - p)
    B = p + (t / T) * (1.0 - p)
    step = ((t - s) / T) * (1.0 - p) / B
    with np.errstate(divide="ignore"):
        logc = sp.gammaln(ja + m) - sp.gammaln(ja - i + 1.0) - sp.gammaln(i + m)
        logp = logc + (i + m) * math.log(A / B) + (ja - i) * math.log(step)
    out = np.where(ja >= i, np.exp(logp), 0.0)
    return float(out) if out.ndim == 0 else out


def negbinom_terminal_transition(
    m: float, p: float, T: float, s: float, i: int, j
) -> float:
    """Closed pmf of the terminal count given ``i`` jumps by ``s``."""
    if not 0.0 <= s < T:
        raise DomainError(f"need 0 <= s < T, got s={s}")
    ja = np.asarray(j, dtype=float)
    A = p + (s / T) * (1.0 - p)
    with np.errstate(divide="ignore"):
        logc = sp.gammaln(ja + m) - sp.gammaln(ja - i + 1.0) - sp.gammaln(i + m)
        logp = logc + (i + m) * math.log(A) + (ja - i) * (
            math.log1p(-p) + math.log1p(-s / T)
        )
    out = np.where(ja >= i, np.exp(logp), 0.0)
    return float(out) if out.ndim == 0 else out


def negbinom_pgf(m: float, p: float, T: float, s: float, n_s: int, z) -> complex:
    """pgf of the terminal count given ``n_s`` jumps by ``s``."""
    A = p + (s / T) * (1.0 - p)
    z = complex(z) if np.iscomplexobj(np.asarray(z)) else float(z)
    return z**n_s * (A / (1.0 - (1.0 - p) * (1.0 - s / T) * z)) ** (m + n_s)


def negbinom_intensity(m: float, p: float, T: float, s: float, n_s: int) -> float:
    """Closed-form jump intensity ``(N_s + m)(1-p) / (p T + s (1-p))``."""
    return (n_s + m) * (1.0 - p) / (p * T + s * (1.0 - p))


def logseries_pmf(p: float, k) -> float:
    """``-(1/log p) (1-p)^k / k`` for k >= 1."""
    if not 0.0 < p < 1.0:
        raise DomainError("logseries_pmf needs 0 < p < 1")
    ka = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            ka >= 1, -np.exp(ka * math.log1p(-p)) / (ka * math.log(p)), 0.0
        )
    return float(out) if out.ndim == 0 else out


def logseries_count_transition(
    p: float, T: float, s: float, t: float, i: int, j
) -> float:
    """Transition pmf of the log-series counting bridge.

    For ``i >= 1`` this is the negative-binomial formula continued to
    ``m = 0``; ``i = 0`` keeps a logarithmic branch.
    """
    if not 0.0 <= s < t <= T:
        raise DomainError(f"need 0 <= s < t <= T, got s={s}, t={t}")
    ja = np.asarray(j, dtype=float)
    A = p + (s / T) * (1.0 - p)
    B = p + (t / T) * (1.0 - p)
    step = ((t - s) / T) * (1.0 - p) / B
    if i >= 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            logc = sp.gammaln(ja) - sp.gammaln(ja - i + 1.0) - sp.gammaln(float(i))
            logp = logc + i * math.log(A / B) + (ja - i) * math.log(step)
        out = np.where(ja >= i, np.exp(logp), 0.0)
        return float(out) if out.ndim == 0 else out
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            ja >= 1,
            -np.exp(ja * np.log(step)) / (ja * math.log(A)),
            math.log(B) / math.log(A),
        )
    return float(out) if out.ndim == 0 else out


def mixed_poisson_terminal_pmf(
    mixing, T: float, k: int, *, support=(0.0, np.inf), points=(), tol=None
) -> float:
    """``P[N_T = k]`` when the rate is randomized by ``mixing``."""
    if k < 0:
        return 0.0
    lo, hi = support

    def integrand(theta: float) -> float:
        if theta <= 0.0:
            return 0.0
        return math.exp(
            k * (math.log(theta) + math.log(T)) - theta * T - sp.gammaln(k + 1.0)
        ) * mixing(theta)

    val, _ = integrate(integrand, lo, hi, points=points or (max(k, 1) / T,), tol=tol)
    return val


def _mixing_moment(mixing, a: int, u: float, support, tol) -> float:
    lo, hi = support

    def integrand(theta: float) -> float:
        if theta <= 0.0:
            return 0.0
        return theta**a * math.exp(-theta * u) * mixing(theta)

    peak = a / u if u > 0 else 1.0
    val, _ = integrate(integrand, lo, hi, points=(peak,), tol=tol)
    return val


def mixed_poisson_count_transition(
    mixing, T: float, s: float, t: float, i: int, j: int, *, support=(0.0, np.inf), tol=None
) -> float:
    """Transition pmf of a mixed Poisson process (equals the matching PRB)."""
    if not 0.0 <= s < t:
        raise DomainError(f"need 0 <= s < t, got s={s}, t={t}")
    if j < i:
        return 0.0
    num = _mixing_moment(mixing, j, t, support, tol)
    den = _mixing_moment(mixing, i, s, support, tol)
    return (
        math.exp((j - i) * math.log(t - s) - sp.gammaln(j - i + 1.0)) * num / den
    )


def mixed_poisson_intensity(
    mixing, s: float, n_s: int, *, support=(0.0, np.inf), tol=None
) -> float:
    """Posterior mean rate ``E[Theta | N_s = n_s]``."""
    num = _mixing_moment(mixing, n_s + 1, s, support, tol)
    den = _mixing_moment(mixing, n_s, s, support, tol)
    return num / den


# ---------------------------------------------------------------------------
# nth-to-default swaps


@dataclass(frozen=True)
class BasketSpec:
    """An nth-to-default swap on a K-name basket.

    ``P`` is the pmf of the terminal default count on {0..K}; defaults
    arrive at the jump times of the counting bridge.  ``q`` is the
    premium rate, ``r`` the constant interest rate, ``R`` the recovery.
    """

    K: int
    P: tuple[float, ...]
    n: int
    q: float
    r: float
    R: float
    T: float

    def __post_init__(self):
        P = tuple(float(x) for x in self.P)
        object.__setattr__(self, "P", P)
        if self.K < 1 or len(P) != self.K + 1:
            raise ConfigError("P must have length K + 1 (counts 0..K)")
        if any(x < 0 for x in P) or abs(sum(P) - 1.0) > 1e-10:
            raise ConfigError("P must be a pmf")
        if not 1 <= self.n <= self.K:
            raise ConfigError(f"need 1 <= n <= K, got n={self.n}")
        if not 0.0 <= self.R <= 1.0:
            raise ConfigError(f"recovery must lie in [0, 1], got {self.R}")
        if self.T <= 0 or self.r < 0:
            raise ConfigError("need T > 0 and r >= 0")


def _kummer_m1z(a: float, b: float, z: float) -> float:
    """``(M(a, b, z) - 1)/z`` continued through z = 0.

    Small ``z`` uses the shifted series directly — the subtraction in the
    naive form loses all digits as z -> 0.
    """
    if abs(z) < 0.9:
        term = a / b
        total = term
        for j in range(1, 400):
            term *= z * (a + j) / ((b + j) * (j + 1.0))
            total += term
            if abs(term) <= 1e-17 * abs(total):
                return total
        raise NumericError("Kummer ratio series failed to converge")
    return (kummer_m(a, b, z) - 1.0) / z


def _expm1z(z: float) -> float:
    return math.expm1(z) / z if z != 0.0 else 1.0


def ntd_swap_value(b: BasketSpec, s: float = 0.0, n_s: int = 0) -> float:
    """Value of the swap flows given ``n_s`` defaults by time ``s``.

    Follows the source convention literally: the premium flow is the
    compounding stream ``e^{q u} du`` (not ``q du``) and both legs enter
    with positive sign, so the value is a present value of all contract
    flows discounted to time 0.  See ``par_premium`` for the netted
    convention used to solve for a break-even rate.
    """
    if not 0.0 <= s < b.T:
        raise DomainError(f"need 0 <= s < T, got s={s}")
    if not 0 <= n_s < b.n:
        raise DomainError(f"value formula needs N_s < n, got N_s={n_s}, n={b.n}")
    T = b.T
    post = prb_posterior_pmf(b.P, T, s, n_s)
    dr = b.q - b.r
    span = T - s

    premium = 0.0
    protection = 0.0
    survive = 0.0
    for k in range(n_s, b.K + 1):
        if post[k] == 0.0:
            continue
        if k < b.n:
            survive += post[k]
            continue
        a = b.n - n_s
        c = k - n_s + 1
        premium += post[k] * _kummer_m1z(a, c, dr * span)
        protection += post[k] * kummer_m(a, c, -b.r * span)
    premium = math.exp(dr * s) * span * (premium + survive * _expm1z(dr * span))
    protection = (1.0 - b.R) * math.exp(-b.r * s) * protection
    return premium + protection


def _ntd_legs(b: BasketSpec, q: float) -> tuple[float, float]:
    """(premium, protection) leg values at premium rate ``q``."""
    premium = ntd_swap_value(BasketSpec(K=b.K, P=b.P, n=b.n, q=q, r=b.r, R=1.0, T=b.T))
    full = ntd_swap_value(BasketSpec(K=b.K, P=b.P, n=b.n, q=q, r=b.r, R=b.R, T=b.T))
    return premium, full - premium


def par_premium(b: BasketSpec) -> float:
    """Premium rate making protection and premium legs equal in value.

    Under the literal flow convention the total contract value is a sum
    of two positive legs and never crosses zero, so the par rate solves
    the netted equation protection − premium(q) = 0 instead.  (A market
    annuity convention — flow ``q du`` — would give a different rate.)
    """
    premium_at_r, protection = _ntd_legs(b, b.r)
    if protection <= 0.0:
        raise NumericError(
            "protection leg is zero (R = 1 or no reachable default), so no"
            " premium rate balances the swap",
            diagnostics={"protection": protection},
        )

    def net(q: float) -> float:
        premium, _ = _ntd_legs(b, q)
        return protection - premium

    lo = hi = b.r
    width = max(1.0, abs(b.r))
    for _ in range(200):
        lo -= width
        if net(lo) > 0.0:
            break
        width *= 2.0
    else:
        raise NumericError("could not bracket the par premium from below")
    width = max(1.0, abs(b.r))
    for _ in range(200):
        hi += width
        if net(hi) < 0.0:
            break
        width *= 2.0
    else:
        raise NumericError("could not bracket the par premium from above")
    root = float(optimize.brentq(net, lo, hi, xtol=1e-13, rtol=1e-15))
    if abs(net(root)) > 1e-10 * max(1.0, protection):
        raise NumericError(
            "par premium root did not meet the value tolerance",
            diagnostics={"residual": net(root)},
        )
    return root
