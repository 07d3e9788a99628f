"""The random-bridge law itself: terminal laws, conditioning, transitions.

A process specification pins an increment family to a horizon ``T`` and a
terminal law ``nu``.  The finite-dimensional densities factor as increment
densities times the ratio ``psi_t(.; xi)``; everything observable —
posteriors, transitions, conditional means — is assembled from that ratio
here, by quadrature against the terminal law.  No closed forms are assumed
at this level; the closed-form modules are checked against this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._quad import integrate, quad_tol
from .errors import ConfigError, DomainError
from .marginals import (
    Gamma,
    IG,
    IncrementFamily,
    PoissonF,
    StableHalf,
    increment_density,
    increment_logpdf,
    poisson_pmf,
)

__all__ = [
    "TailHint",
    "TerminalLaw",
    "LrbSpec",
    "ConditionedState",
    "psi",
    "marginal_density",
    "transition_density",
    "condition",
    "conditional_mean",
    "rebase",
    "increment_joint_density",
]

_TAIL_KINDS = ("exponential", "power", "gaussian", "levy")
_NORMALIZATION_TOL = 1e-10


def is_increasing(fam: IncrementFamily) -> bool:
    """True for families whose paths are non-decreasing."""
    return isinstance(fam, (Gamma, StableHalf, IG, PoissonF))


@dataclass(frozen=True)
class TailHint:
    """Right-tail class of a terminal density, used for limit formulas.

    ``exponential`` decay ``e^(-param z)`` (param > 0), ``power`` decay
    ``z^(-param)`` (param > 1), ``gaussian`` decay ``e^(-b z^2)``, and
    ``levy`` for the ``z^(-3/2) e^(-d/z)`` shape.
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in _TAIL_KINDS:
            raise ConfigError(f"unknown tail kind {self.kind!r}; use one of {_TAIL_KINDS}")
        if self.kind == "exponential" and self.param <= 0:
            raise ConfigError("exponential tail needs a positive rate")
        if self.kind == "power" and self.param <= 1:
            raise ConfigError("power tail needs an exponent > 1")


@dataclass(frozen=True)
class TerminalLaw:
    """Law of the terminal value: point masses plus an optional density.

    ``atoms`` is a tuple of (location, weight) pairs; ``density`` a callable
    with ``support = (lo, hi)``; weights and the density integral must add
    to 1.  ``sampler(rng, n)`` (draws from the normalized continuous part)
    and ``cdf`` (CDF of the whole law) are optional conveniences used by
    the simulation layer; ``points`` marks awkward quadrature locations.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: Callable | None = None
    support: tuple[float, float] | None = None
    tail: TailHint | None = None
    sampler: Callable | None = None
    cdf: Callable | None = None
    points: tuple[float, ...] = ()

    def __post_init__(self):
        atoms = tuple((float(z), float(w)) for z, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms and self.density is None:
            raise ConfigError("terminal law needs atoms, a density, or both")
        for _, w in atoms:
            if w <= 0:
                raise ConfigError("atom weights must be positive")
        if len({z for z, _ in atoms}) != len(atoms):
            raise ConfigError("duplicate atom locations")
        w_sum = sum(w for _, w in atoms)
        if self.density is not None:
            if self.support is None:
                raise ConfigError("a density needs an explicit support interval")
            lo, hi = self.support
            if not lo < hi:
                raise ConfigError(f"empty support ({lo}, {hi})")
            cont, _ = integrate(self.density, lo, hi, points=self.points)
            total = w_sum + cont
        else:
            total = w_sum
        # permit the quadrature noise a conditioned law inherits from its
        # own normalizer while still catching genuinely unnormalized input
        if abs(total - 1.0) > max(_NORMALIZATION_TOL, 200.0 * quad_tol()):
            raise ConfigError(
                f"terminal law does not normalize: atoms + density integral = {total!r}"
            )

    # -- basic functionals ------------------------------------------------

    def atom_mass(self) -> float:
        return sum(w for _, w in self.atoms)

    def expect(self, g: Callable) -> float:
        """``E[g(Z)]`` under this law."""
        total = sum(w * g(z) for z, w in self.atoms)
        if self.density is not None:
            lo, hi = self.support
            val, _ = integrate(
                lambda z: g(z) * self.density(z), lo, hi, points=self.points
            )
            total += val
        return total

    def mean(self) -> float:
        return self.expect(lambda z: z)

    def moment(self, k: float) -> float:
        return self.expect(lambda z: z**k)

    def cdf_value(self, x: float) -> float:
        """``P[Z <= x]``; uses the user CDF when present, quadrature otherwise."""
        if self.cdf is not None:
            return float(self.cdf(x))
        total = sum(w for z, w in self.atoms if z <= x)
        if self.density is not None:
            lo, hi = self.support
            if x > lo:
                val, _ = integrate(
                    self.density, lo, min(x, hi), points=self.points
                )
                total += val
        return total

    def shifted(self, delta: float) -> "TerminalLaw":
        """The law of ``Z + delta`` (tail class is translation invariant)."""
        dens = self.density
        new_density = None if dens is None else (lambda z, _d=dens: _d(z - delta))
        new_cdf = None if self.cdf is None else (lambda x, _c=self.cdf: _c(x - delta))
        new_sampler = (
            None
            if self.sampler is None
            else (lambda rng, n, _s=self.sampler: _s(rng, n) + delta)
        )
        return TerminalLaw(
            atoms=tuple((z + delta, w) for z, w in self.atoms),
            density=new_density,
            support=None if self.support is None else (
                self.support[0] + delta, self.support[1] + delta
            ),
            tail=self.tail,
            sampler=new_sampler,
            cdf=new_cdf,
            points=tuple(p + delta for p in self.points),
        )


@dataclass(frozen=True)
class LrbSpec:
    """A random bridge: increment family, horizon, terminal law, optional clock.

    ``time_change`` (when present) maps calendar time to the operational
    time the bridge runs on; all functions in this module work in
    operational time and leave the clock to the callers that own it.
    """

    family: IncrementFamily
    T: float
    nu: TerminalLaw
    time_change: object | None = None

    def __post_init__(self):
        if self.T <= 0:
            raise ConfigError("LrbSpec: horizon T must be positive")
        if isinstance(self.family, PoissonF):
            if self.nu.density is not None:
                raise ConfigError("a counting family needs a purely atomic terminal law")
            for z, _ in self.nu.atoms:
                if z < 0 or z != int(z):
                    raise ConfigError("counting terminal values must be non-negative integers")
        else:
            if is_increasing(self.family):
                for z, _ in self.nu.atoms:
                    if z <= 0:
                        raise ConfigError("subordinator terminal values must be positive")
            for z, _ in self.nu.atoms:
                if increment_logpdf(self.family, self.T, z) == -np.inf:
                    raise ConfigError(
                        f"terminal atom at {z} is not attainable by the increment family"
                    )


@dataclass(frozen=True)
class ConditionedState:
    """The bridge seen from time ``s``: current value and terminal posterior."""

    spec: LrbSpec
    s: float
    xi_s: float
    posterior: TerminalLaw


# ---------------------------------------------------------------------------


def _family_ratio(fam: IncrementFamily, T: float, t: float, z, xi: float):
    """``f_(T-t)(z - xi) / f_T(z)``, assembled in log space.

    The ratio is 0 wherever the numerator density vanishes (the terminal
    point is unreachable from the current state), regardless of whether
    the denominator has underflowed; a vanishing denominator under a
    positive numerator is a genuine divergence and comes back as ``inf``.
    """
    if isinstance(fam, PoissonF):
        num = np.asarray(poisson_pmf(fam.lambda_, T - t, np.asarray(z) - xi))
        den = np.asarray(poisson_pmf(fam.lambda_, T, z))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = num / den
        out = np.where(num > 0.0, ratio, 0.0)
        if np.ndim(z) == 0:
            return float(out)
        return out
    lp_num = np.asarray(increment_logpdf(fam, T - t, np.asarray(z, dtype=float) - xi))
    lp_den = np.asarray(increment_logpdf(fam, T, z))
    reachable = lp_num > -np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.exp(np.where(reachable, lp_num - lp_den, -np.inf))
    out = np.where(reachable, ratio, 0.0)
    if np.ndim(z) == 0:
        return float(out)
    return out


def _check_time(t: float, T: float) -> None:
    if not 0.0 <= t < T:
        raise DomainError(f"time must satisfy 0 <= t < T, got t={t}, T={T}")


def psi(spec: LrbSpec, t: float, xi: float) -> float:
    """Total mass ``psi_t(R; xi)`` of the unnormalized terminal kernel.

    This is the likelihood ratio between the bridge seen at ``(t, xi)``
    and the unconditioned increment process.  It is 0 at states the
    terminal law cannot reach (including far-tail underflow); a
    non-finite value means the law puts mass where the increments
    cannot go, and raises.
    """
    _check_time(t, spec.T)
    if t == 0.0 and xi == 0.0:
        return 1.0
    law = spec.nu
    total = sum(
        w * _family_ratio(spec.family, spec.T, t, z, xi) for z, w in law.atoms
    )
    if law.density is not None:
        lo, hi = law.support
        if is_increasing(spec.family):
            lo = max(lo, xi)
        if lo < hi:

            def integrand(z):
                p = law.density(z)
                if p <= 0.0:
                    return 0.0
                return p * _family_ratio(spec.family, spec.T, t, z, xi)

            # the reverse-span density can be singular at z = xi, so
            # always split the quadrature there
            val, _ = integrate(integrand, lo, hi, points=(*law.points, xi))
            total += val
    if not math.isfinite(total) or total < 0.0:
        raise DomainError(
            f"psi is degenerate at (t={t}, xi={xi}): {total!r}; "
            "the terminal law carries mass the increment family cannot reach"
        )
    return float(total)


def marginal_density(spec: LrbSpec, t: float, x) -> float:
    """Density of the bridge value at time ``t``: ``f_t(x) psi_t(R; x)``."""
    _check_time(t, spec.T)
    if t == 0.0:
        raise DomainError("the time-0 value is the constant 0; no density")
    return increment_density(spec.family, t, x) * psi(spec, t, x)


def transition_density(spec: LrbSpec, s: float, t: float, x: float, y) -> float:
    """Transition density from ``(s, x)`` to ``(t, y)``.

    For ``t < T`` this is ``(psi_t(R; y)/psi_s(R; x)) f_(t-s)(y - x)``.
    ``t = T`` is allowed and returns the density of the continuous part
    of the terminal posterior (atoms carry extra point mass on top).
    """
    T = spec.T
    if not 0.0 <= s < t <= T:
        raise DomainError(f"need 0 <= s < t <= T, got s={s}, t={t}, T={T}")
    psi_s = psi(spec, s, x)
    if psi_s == 0.0:
        raise DomainError(f"state (s={s}, x={x}) is unreachable under the terminal law")
    if t < T:
        ya = np.asarray(y, dtype=float)
        scalar = ya.ndim == 0
        ya = np.atleast_1d(ya)
        out = np.array(
            [
                psi(spec, t, float(yi))
                * increment_density(spec.family, t - s, float(yi) - x)
                for yi in ya
            ]
        ) / psi_s
        return float(out[0]) if scalar else out
    # terminal time: continuous part of the posterior
    law = spec.nu
    if law.density is None:
        raise DomainError(
            "terminal law is purely atomic; the time-T transition has no density"
        )
    out = (
        law.density(np.asarray(y, dtype=float))
        * _family_ratio(spec.family, T, s, np.asarray(y, dtype=float), x)
        / psi_s
    )
    if np.ndim(y) == 0:
        return float(out)
    return out


def condition(spec: LrbSpec, s: float, xi_s: float) -> ConditionedState:
    """Observe the bridge at ``(s, xi_s)`` and return the updated state.

    The terminal posterior reweights the prior by the increment-density
    ratio; its quadrature break points gain ``xi_s`` because subordinator
    posteriors are supported only above the current value.
    """
    if s == 0.0:
        if xi_s != 0.0:
            raise DomainError("the bridge starts at 0; xi_s must be 0 at s = 0")
        return ConditionedState(spec=spec, s=0.0, xi_s=0.0, posterior=spec.nu)
    _check_time(s, spec.T)
    norm = psi(spec, s, xi_s)
    if norm == 0.0:
        raise DomainError(
            f"state (s={s}, xi_s={xi_s}) is unreachable under the terminal law"
        )
    law = spec.nu
    fam, T = spec.family, spec.T

    new_atoms = []
    for z, w in law.atoms:
        rw = w * _family_ratio(fam, T, s, z, xi_s) / norm
        if rw > 0.0:
            new_atoms.append((z, float(rw)))
    new_density = None
    new_support = None
    points = law.points
    if law.density is not None:
        prior_density = law.density

        def new_density(z, _p=prior_density, _n=norm):
            za = np.asarray(z, dtype=float)
            p = np.asarray(_p(za), dtype=float)
            with np.errstate(invalid="ignore"):
                out = np.where(p > 0.0, p * _family_ratio(fam, T, s, za, xi_s) / _n, 0.0)
            return float(out) if np.ndim(z) == 0 else out

        lo, hi = law.support
        if is_increasing(fam):
            lo = max(lo, xi_s)
            points = tuple(p for p in points if p > lo)
        else:
            # the reweighting factor can have an integrable singularity
            # at z = xi_s, so split posterior quadratures there
            points = (*points, xi_s)
        if not lo < hi:
            raise DomainError(
                f"no terminal mass above the observed value xi_s={xi_s}"
            )
        new_support = (lo, hi)
    posterior = TerminalLaw(
        atoms=tuple(new_atoms),
        density=new_density,
        support=new_support,
        tail=law.tail,
        points=points,
    )
    return ConditionedState(spec=spec, s=s, xi_s=xi_s, posterior=posterior)


def conditional_mean(state: ConditionedState, t: float) -> float:
    """``E[xi_t | F_s]``: linear interpolation between the state and the ultimate."""
    T = state.spec.T
    if not state.s <= t <= T:
        raise DomainError(f"need s <= t <= T, got s={state.s}, t={t}")
    if t == state.s:
        return state.xi_s
    ultimate = state.posterior.mean()
    return ((T - t) * state.xi_s + (t - state.s) * ultimate) / (T - state.s)


def rebase(state: ConditionedState) -> LrbSpec:
    """The bridge restarted at the current state.

    ``xi*_u = xi_(s+u) - xi_s`` is itself a random bridge on the horizon
    ``T - s`` whose terminal law is the posterior shifted by ``-xi_s``.
    """
    new_nu = state.posterior.shifted(-state.xi_s)
    return LrbSpec(
        family=state.spec.family,
        T=state.spec.T - state.s,
        nu=new_nu,
        time_change=None,
    )


def increment_joint_density(spec: LrbSpec, spans, increments) -> float:
    """Joint density of the bridge increments over consecutive spans.

    ``spans`` are positive lengths summing to at most ``T``; the value is
    ``prod_i f_(span_i)(y_i) * psi_(sum spans)(R; sum y_i)`` (for a full
    partition, the continuous part of the terminal ratio).  The result is
    invariant under jointly permuting spans and increments.
    """
    al = np.asarray(spans, dtype=float)
    ys = np.asarray(increments, dtype=float)
    if al.shape != ys.shape or al.ndim != 1 or al.size == 0:
        raise DomainError("spans and increments must be matching 1-D sequences")
    if np.any(al <= 0):
        raise DomainError("spans must be positive")
    total_span = float(al.sum())
    if total_span > spec.T + 1e-12:
        raise DomainError(f"spans sum to {total_span}, beyond the horizon {spec.T}")
    total_inc = float(ys.sum())
    prod = 1.0
    for a, y in zip(al, ys):
        prod *= increment_density(spec.family, float(a), float(y))
    if prod == 0.0:
        return 0.0
    if abs(total_span - spec.T) <= 1e-12:
        law = spec.nu
        if law.density is None:
            raise DomainError(
                "terminal law is purely atomic; a full partition has no joint density"
            )
        ratio = law.density(total_inc) / increment_density(
            spec.family, spec.T, total_inc
        )
        return prod * float(ratio)
    return prod * psi(spec, total_span, total_inc)
