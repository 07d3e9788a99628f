import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from lrb.errors import DomainError, UnsupportedRegimeError
from lrb.marginals import (
    VG,
    Brownian,
    CauchyF,
    Gamma,
    IG,
    NIG,
    PoissonF,
    StableHalf,
    ig_moment,
    increment_cdf,
    increment_density,
    log_mgf,
    nig_derive,
    nig_recovery,
    poisson_pmf,
    vg_derive,
)

ALL_CONTINUOUS = [
    Brownian(theta=0.4, sigma=1.3),
    Gamma(m=2.0),
    VG(m=1.5, theta=-0.3, sigma=0.8),
    StableHalf(c=1.2),
    CauchyF(c=0.7),
    IG(c=1.1, gamma_=2.0),
    NIG(c=1.3, theta=0.5, sigma=0.9),
]


@pytest.mark.parametrize("fam", ALL_CONTINUOUS, ids=lambda f: type(f).__name__)
@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_density_normalized(fam, t):
    total, _ = integrate.quad(
        lambda x: increment_density(fam, t, x), -np.inf, np.inf, limit=200
    )
    assert total == pytest.approx(1.0, abs=1e-7)


def test_brownian_matches_scipy():
    fam = Brownian(theta=-0.2, sigma=0.6)
    x = np.linspace(-3, 3, 21)
    ref = stats.norm.pdf(x, loc=-0.2 * 1.7, scale=0.6 * math.sqrt(1.7))
    np.testing.assert_allclose(increment_density(fam, 1.7, x), ref, rtol=1e-13)


def test_gamma_matches_scipy():
    fam = Gamma(m=3.0)
    x = np.linspace(0.01, 5, 30)
    ref = stats.gamma.pdf(x, a=3.0 * 0.8, scale=1 / 3.0)
    np.testing.assert_allclose(increment_density(fam, 0.8, x), ref, rtol=1e-12)


def test_stable_half_matches_scipy_levy():
    fam = StableHalf(c=1.5)
    t = 0.7
    x = np.array([0.1, 0.5, 2.0, 10.0])
    ref = stats.levy.pdf(x, scale=(1.5 * t) ** 2)
    np.testing.assert_allclose(increment_density(fam, t, x), ref, rtol=1e-12)


def test_cauchy_matches_scipy():
    fam = CauchyF(c=0.9)
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(
        increment_density(fam, 2.0, x), stats.cauchy.pdf(x, scale=1.8), rtol=1e-13
    )


def test_ig_matches_scipy_invgauss():
    c, g, t = 1.3, 0.8, 1.4
    fam = IG(c=c, gamma_=g)
    x = np.array([0.2, 1.0, 3.0, 8.0])
    # scipy invgauss with scale=s has mean mu*s and shape s
    s = (c * t) ** 2
    ref = stats.invgauss.pdf(x, mu=1.0 / (g * c * t), scale=s)
    np.testing.assert_allclose(increment_density(fam, t, x), ref, rtol=1e-11)


def test_vg_matches_subordination_integral():
    # VG density as a gamma-time mixture of Gaussians
    fam = VG(m=1.25, theta=0.6, sigma=1.1)
    t = 0.9

    def mixture(x):
        val, _ = integrate.quad(
            lambda u: stats.norm.pdf(x, loc=0.6 * u, scale=1.1 * math.sqrt(u))
            * stats.gamma.pdf(u, a=1.25 * t, scale=1 / 1.25),
            0,
            np.inf,
        )
        return val

    for x in [-2.0, -0.4, 0.3, 1.5, 4.0]:
        assert increment_density(fam, t, x) == pytest.approx(mixture(x), rel=1e-8)


def test_nig_matches_subordination_integral():
    fam = NIG(c=1.2, theta=-0.4, sigma=0.7)
    t = 1.3
    ig_clock = IG(c=1.2, gamma_=1.2)

    def mixture(x):
        val, _ = integrate.quad(
            lambda u: stats.norm.pdf(x, loc=-0.4 * u, scale=0.7 * math.sqrt(u))
            * increment_density(ig_clock, t, u),
            0,
            np.inf,
        )
        return val

    for x in [-3.0, -0.5, 0.0, 0.8, 2.5]:
        assert increment_density(fam, t, x) == pytest.approx(mixture(x), rel=1e-8)


def test_nig_matches_alternative_parametrization():
    # same law written with location-scale parameters
    # delta = sigma c t, beta = theta/sigma^2, alpha = sqrt(theta^2 + c^2 sigma^2)/sigma^2
    c, th, sg, t = 1.1, 0.6, 1.4, 0.8
    fam = NIG(c=c, theta=th, sigma=sg)
    delta = sg * c * t
    beta = th / sg**2
    alpha = math.sqrt(th**2 + (c * sg) ** 2) / sg**2
    gamma_bn = math.sqrt(alpha**2 - beta**2)
    x = np.array([-1.5, -0.2, 0.4, 2.0])
    from scipy.special import kv

    r = np.sqrt(delta**2 + x**2)
    ref = alpha * delta * kv(1, alpha * r) / (math.pi * r) * np.exp(
        delta * gamma_bn + beta * x
    )
    np.testing.assert_allclose(increment_density(fam, t, x), ref, rtol=1e-11)


def test_vg_at_zero_sentinel_and_value():
    # m t <= 1/2: infinite peak
    assert increment_density(VG(m=1.0), 0.4, 0.0) == np.inf
    assert increment_density(VG(m=1.0), 0.5, 0.0) == np.inf
    # m t > 1/2: finite closed form, checked against a symmetric-limit sequence
    fam = VG(m=1.0, theta=0.3, sigma=1.2)
    t = 1.7
    v0 = increment_density(fam, t, 0.0)
    v_near = increment_density(fam, t, 1e-9)
    assert v0 == pytest.approx(v_near, rel=1e-5)
    assert math.isfinite(v0)


def test_support_zeros():
    for fam in [Gamma(m=1.0), StableHalf(c=1.0), IG(c=1.0, gamma_=1.0)]:
        assert increment_density(fam, 1.0, -0.5) == 0.0
        assert increment_density(fam, 1.0, 0.0) == 0.0


def test_t_nonpositive_raises():
    for t in [0.0, -1.0]:
        with pytest.raises(DomainError):
            increment_density(Brownian(), t, 0.0)
        with pytest.raises(DomainError):
            increment_cdf(CauchyF(c=1.0), t, 0.0)


def test_poisson_density_redirects():
    with pytest.raises(DomainError):
        increment_density(PoissonF(lambda_=2.0), 1.0, 1.0)


def test_deep_tail_stability():
    # log-space evaluation: far-tail values are tiny but not 0/nan
    v = increment_density(VG(m=1.0, theta=0.0, sigma=1.0), 1.0, 200.0)
    assert 0.0 < v < 1e-80
    v = increment_density(NIG(c=1.0, theta=0.0, sigma=1.0), 1.0, 150.0)
    assert 0.0 < v < 1e-60
    v = increment_density(IG(c=1.0, gamma_=1.0), 1.0, 1e3)
    assert 0.0 < v < 1e-150


class TestIncrementCdf:
    @pytest.mark.parametrize(
        "fam,scipy_dist",
        [
            (Brownian(theta=0.3, sigma=1.1), lambda t: stats.norm(0.3 * t, 1.1 * math.sqrt(t))),
            (CauchyF(c=0.8), lambda t: stats.cauchy(scale=0.8 * t)),
            (StableHalf(c=1.4), lambda t: stats.levy(scale=(1.4 * t) ** 2)),
            (Gamma(m=2.5), lambda t: stats.gamma(a=2.5 * t, scale=1 / 2.5)),
        ],
        ids=["brownian", "cauchy", "stable", "gamma"],
    )
    def test_matches_scipy(self, fam, scipy_dist):
        t = 0.9
        x = np.linspace(-2, 6, 17)
        np.testing.assert_allclose(
            increment_cdf(fam, t, x), scipy_dist(t).cdf(x), rtol=1e-10, atol=1e-12
        )

    def test_ig_cdf(self):
        c, g, t = 1.3, 0.8, 1.4
        s = (c * t) ** 2
        x = np.array([0.3, 1.0, 4.0])
        ref = stats.invgauss.cdf(x, mu=1.0 / (g * c * t), scale=s)
        np.testing.assert_allclose(increment_cdf(IG(c=c, gamma_=g), t, x), ref, rtol=1e-9)

    def test_unsupported(self):
        with pytest.raises(UnsupportedRegimeError):
            increment_cdf(VG(m=1.0), 1.0, 0.0)


class TestLogMgf:
    @pytest.mark.parametrize(
        "fam,u",
        [
            (Brownian(theta=0.5, sigma=1.2), 0.7),
            (Gamma(m=2.0), 1.1),
            (VG(m=2.0, theta=0.4, sigma=0.9), 0.6),
            (StableHalf(c=1.0), -0.8),
            (IG(c=1.2, gamma_=1.5), 0.9),
            (NIG(c=1.4, theta=0.2, sigma=0.8), 0.5),
        ],
        ids=lambda v: type(v).__name__ if not isinstance(v, float) else str(v),
    )
    def test_against_quadrature(self, fam, u):
        t = 0.8

        def integrand(x):
            p = increment_density(fam, t, x)
            return p * math.exp(u * x) if p > 0.0 else 0.0

        val, _ = integrate.quad(integrand, -np.inf, np.inf, limit=300)
        assert math.log(val) == pytest.approx(t * log_mgf(fam, u), rel=1e-7)

    def test_poisson(self):
        fam = PoissonF(lambda_=3.0)
        u = 0.4
        t = 1.5
        val = sum(math.exp(u * n) * poisson_pmf(3.0, t, n) for n in range(200))
        assert math.log(val) == pytest.approx(t * log_mgf(fam, u), rel=1e-12)

    def test_outside_strip(self):
        with pytest.raises(DomainError):
            log_mgf(Gamma(m=1.0), 1.0)
        with pytest.raises(DomainError):
            log_mgf(StableHalf(c=1.0), 0.1)
        with pytest.raises(UnsupportedRegimeError):
            log_mgf(CauchyF(c=1.0), 0.5)


class TestPoissonPmf:
    def test_matches_scipy(self):
        lam, t = 2.3, 1.7
        n = np.arange(0, 25)
        np.testing.assert_allclose(
            poisson_pmf(lam, t, n), stats.poisson.pmf(n, lam * t), rtol=1e-12
        )

    def test_non_integers_and_negatives(self):
        assert poisson_pmf(1.0, 1.0, -1) == 0.0
        assert poisson_pmf(1.0, 1.0, 2.5) == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            poisson_pmf(0.0, 1.0, 0)
        with pytest.raises(DomainError):
            poisson_pmf(1.0, 0.0, 0)


class TestVgDerive:
    def test_known_fixed_point(self):
        d = vg_derive(2.0, 1.0, 1.0)
        assert d.rho**2 == pytest.approx((1 + math.sqrt(2)) / 2, rel=1e-14)

    def test_k_factor(self):
        d = vg_derive(1.5, 0.8, 1.2)
        assert d.k_factor == pytest.approx(
            math.sqrt(1 + 0.64 / (2 * 1.5 * 1.44)), rel=1e-14
        )

    def test_jump_means(self):
        m, th, sg = 1.5, 0.8, 1.2
        d = vg_derive(m, th, sg)
        assert d.mu_plus - d.mu_minus == pytest.approx(th, rel=1e-13)
        assert d.mu_plus * d.mu_minus == pytest.approx(m * sg**2 / 2, rel=1e-13)

    @pytest.mark.parametrize("sigma", [1.0, 0.7, 2.3])
    def test_scaling_identity(self, sigma):
        # f^(m,theta,sigma)_t(x) = (1/sigma) e^(theta x/sigma^2) k^(1-2mt) f^(m)_t(k x/sigma)
        m, th = 1.3, -0.6
        t = 0.85
        d = vg_derive(m, th, sigma)
        asym = VG(m=m, theta=th, sigma=sigma)
        symm = VG(m=m, theta=0.0, sigma=1.0)
        for x in [-2.0, -0.3, 0.4, 1.8]:
            lhs = increment_density(asym, t, x)
            rhs = (
                (1.0 / sigma)
                * math.exp(th * x / sigma**2)
                * d.k_factor ** (1.0 - 2.0 * m * t)
                * increment_density(symm, t, d.k_factor * x / sigma)
            )
            assert lhs == pytest.approx(rhs, rel=1e-11)

    def test_rho_is_self_consistent_scale(self):
        # at sigma = rho the k factor equals rho itself
        m, th = 1.1, 0.9
        rho = vg_derive(m, th, 1.0).rho
        assert vg_derive(m, th, rho).k_factor == pytest.approx(rho, rel=1e-13)


class TestNigDerive:
    def test_sigma_one_form(self):
        c, th = 1.2, 0.7
        d = nig_derive(c, th, 1.0)
        assert d.k_factor**2 == pytest.approx(math.sqrt(th**2 + c**2) / c, rel=1e-14)
        assert d.alpha == pytest.approx(c * d.k_factor, rel=1e-14)

    @pytest.mark.parametrize("sigma", [1.0, 0.6, 2.0])
    def test_scaling_identity(self, sigma):
        # f^(c,theta,sigma)_t(x) = (k/sigma) e^((c^2-a^2)t + theta x/sigma^2) f^(a)_t(k x/sigma)
        c, th = 1.0, 1.0
        t = 0.75
        d = nig_derive(c, th, sigma)
        asym = NIG(c=c, theta=th, sigma=sigma)
        symm = NIG(c=d.alpha, theta=0.0, sigma=1.0)
        for x in [-1.5, -0.2, 0.6, 2.2]:
            lhs = increment_density(asym, t, x)
            rhs = (
                (d.k_factor / sigma)
                * math.exp((c**2 - d.alpha**2) * t + th * x / sigma**2)
                * increment_density(symm, t, d.k_factor * x / sigma)
            )
            assert lhs == pytest.approx(rhs, rel=1e-11)


class TestNigRecovery:
    def test_cubic_root(self):
        c, th = 1.3, 0.9
        d = nig_recovery(c, th)
        u = d.k_factor**2
        assert c**2 * u**3 - c**2 * u == pytest.approx(th**2, rel=1e-12)
        assert u >= 1.0

    def test_symmetric_case(self):
        d = nig_recovery(2.0, 0.0)
        assert d.k_factor == pytest.approx(1.0, abs=1e-14)
        assert d.alpha == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.parametrize("theta", [0.0, 0.5, -1.2, 3.0])
    def test_tilt_identity(self, theta):
        # the whole point: the tilted symmetric density IS the asymmetric one
        c = 1.1
        d = nig_recovery(c, theta)
        k, a = d.k_factor, d.alpha
        asym = NIG(c=c, theta=theta, sigma=k)
        symm = NIG(c=a, theta=0.0, sigma=1.0)
        t = 1.4
        for x in [-2.0, -0.3, 0.5, 1.7]:
            lhs = increment_density(asym, t, x)
            rhs = math.exp((c**2 - a**2) * t + theta * x / k**2) * increment_density(
                symm, t, x
            )
            assert lhs == pytest.approx(rhs, rel=1e-11)


class TestIgMoment:
    def test_integer_moments(self):
        c, g, t = 1.2, 0.9, 1.1
        ct = c * t
        assert ig_moment(c, g, t, 1) == pytest.approx(ct / g, rel=1e-12)
        assert ig_moment(c, g, t, 2) == pytest.approx(ct / g**3 * (1 + g * ct), rel=1e-12)
        assert ig_moment(c, g, t, 3) == pytest.approx(
            ct / g**5 * (3 + 3 * g * ct + (g * ct) ** 2), rel=1e-12
        )
        assert ig_moment(c, g, t, 4) == pytest.approx(
            ct / g**7 * (15 + 15 * g * ct + 6 * (g * ct) ** 2 + (g * ct) ** 3), rel=1e-12
        )

    def test_against_quadrature(self):
        c, g, t = 0.8, 1.4, 0.6
        fam = IG(c=c, gamma_=g)
        for k in (0.5, 1.0, 2.5, -1.0):
            ref, _ = integrate.quad(
                lambda x: x**k * increment_density(fam, t, x), 0, np.inf
            )
            assert ig_moment(c, g, t, k) == pytest.approx(ref, rel=1e-8)

    def test_zeroth(self):
        assert ig_moment(1.0, 1.0, 1.0, 0) == pytest.approx(1.0, rel=1e-14)


@given(
    st.sampled_from(ALL_CONTINUOUS),
    st.floats(0.05, 4.0),
    st.floats(-10.0, 10.0),
)
@settings(max_examples=80)
def test_density_nonnegative(fam, t, x):
    assert increment_density(fam, t, x) >= 0.0


def test_parameter_validation():
    with pytest.raises(DomainError):
        Gamma(m=0.0)
    with pytest.raises(DomainError):
        Brownian(sigma=0.0)
    with pytest.raises(DomainError):
        StableHalf(c=-1.0)
    with pytest.raises(DomainError):
        IG(c=1.0, gamma_=0.0)
    with pytest.raises(DomainError):
        NIG(c=1.0, theta=0.0, sigma=-2.0)
    with pytest.raises(DomainError):
        PoissonF(lambda_=0.0)
