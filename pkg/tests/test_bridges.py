import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from lrb.bridges import (
    BridgeLaw,
    bridge_density,
    brownian_bridge_sample,
    cauchy_bridge_cdf,
    cauchy_bridge_moments,
    gamma_bridge_sample,
    gamma_bridge_transition_density,
    poisson_bridge_jump_time_cdf,
    sample_beta,
    stable_half_bridge_cdf,
    stable_half_bridge_partial_moment,
    stable_half_bridge_second_moment,
)
from lrb.errors import DomainError
from lrb.marginals import (
    VG,
    Brownian,
    CauchyF,
    Gamma,
    IG,
    NIG,
    StableHalf,
)

BRIDGE_CASES = [
    BridgeLaw(Brownian(theta=0.3, sigma=1.1), T=2.0, z=1.4),
    BridgeLaw(Gamma(m=2.0), T=1.5, z=2.2),
    BridgeLaw(VG(m=1.0, theta=0.2, sigma=0.9), T=2.0, z=-0.8),
    BridgeLaw(StableHalf(c=1.3), T=1.0, z=3.0),
    BridgeLaw(CauchyF(c=0.8), T=2.0, z=1.0),
    BridgeLaw(IG(c=1.1, gamma_=1.4), T=1.0, z=1.7),
    BridgeLaw(NIG(c=1.2, theta=-0.3, sigma=1.0), T=1.5, z=0.6),
]


@pytest.mark.parametrize("law", BRIDGE_CASES, ids=lambda l: type(l.family).__name__)
def test_bridge_density_normalized(law):
    t = 0.4 * law.T
    total, _ = integrate.quad(
        lambda y: bridge_density(law, t, y), -np.inf, np.inf, limit=300
    )
    assert total == pytest.approx(1.0, abs=1e-7)


def test_bridge_density_zero_outside_reachable_set():
    law = BridgeLaw(StableHalf(c=1.0), T=1.0, z=2.0)
    assert bridge_density(law, 0.5, -0.1) == 0.0
    assert bridge_density(law, 0.5, 0.0) == 0.0
    assert bridge_density(law, 0.5, 2.0) == 0.0
    assert bridge_density(law, 0.5, 2.5) == 0.0
    law = BridgeLaw(Gamma(m=1.0), T=1.0, z=1.0)
    assert bridge_density(law, 0.3, 1.2) == 0.0


def test_bridge_density_time_domain():
    law = BridgeLaw(Brownian(), T=1.0, z=0.0)
    for t in [0.0, 1.0, 1.5, -0.2]:
        with pytest.raises(DomainError):
            bridge_density(law, t, 0.0)


def test_bridge_unattainable_terminal():
    law = BridgeLaw(Brownian(), T=1.0, z=60.0)  # f_T(z) underflows to 0
    with pytest.raises(DomainError):
        bridge_density(law, 0.5, 0.0)


def test_stable_half_bridge_scaling_property():
    # density(t, T, y, z) = k^2 density(k t, k T, k^2 y, k^2 z) for any k > 0
    c, k = 1.2, 1.7
    law1 = BridgeLaw(StableHalf(c=c), T=2.0, z=3.0)
    law2 = BridgeLaw(StableHalf(c=c), T=k * 2.0, z=k**2 * 3.0)
    for (t, y) in [(0.5, 0.8), (1.1, 2.0), (1.9, 0.3)]:
        assert bridge_density(law1, t, y) == pytest.approx(
            k**2 * bridge_density(law2, k * t, k**2 * y), rel=1e-11
        )


class TestStableHalfClosedForms:
    C, T, Z = 1.4, 2.0, 2.5

    def law(self):
        return BridgeLaw(StableHalf(c=self.C), T=self.T, z=self.Z)

    @pytest.mark.parametrize("t", [0.3, 1.0, 1.7])
    @pytest.mark.parametrize("y", [0.2, 1.0, 2.3])
    def test_cdf_vs_quadrature(self, t, y):
        ref, _ = integrate.quad(
            lambda u: bridge_density(self.law(), t, u), 0, y, limit=200
        )
        assert stable_half_bridge_cdf(self.C, t, self.T, y, self.Z) == pytest.approx(
            ref, abs=1e-10
        )

    @pytest.mark.parametrize("t", [0.3, 1.0, 1.7])
    @pytest.mark.parametrize("y", [0.2, 1.0, 2.3])
    def test_partial_moment_vs_quadrature(self, t, y):
        ref, _ = integrate.quad(
            lambda u: u * bridge_density(self.law(), t, u), 0, y, limit=200
        )
        got = stable_half_bridge_partial_moment(self.C, t, self.T, y, self.Z)
        assert got == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("t", [0.3, 1.0, 1.7])
    def test_second_moment_vs_quadrature(self, t):
        ref, _ = integrate.quad(
            lambda u: u * u * bridge_density(self.law(), t, u), 0, self.Z, limit=200
        )
        got = stable_half_bridge_second_moment(self.C, t, self.T, self.Z)
        assert got == pytest.approx(ref, rel=1e-9)

    def test_cdf_boundaries(self):
        assert stable_half_bridge_cdf(self.C, 1.0, self.T, 0.0, self.Z) == 0.0
        assert stable_half_bridge_cdf(self.C, 1.0, self.T, -1.0, self.Z) == 0.0
        assert stable_half_bridge_cdf(self.C, 1.0, self.T, self.Z, self.Z) == 1.0
        assert stable_half_bridge_cdf(self.C, 1.0, self.T, 99.0, self.Z) == 1.0

    def test_partial_moment_boundaries(self):
        t = 0.8
        assert stable_half_bridge_partial_moment(self.C, t, self.T, 0.0, self.Z) == 0.0
        full = stable_half_bridge_partial_moment(self.C, t, self.T, self.Z, self.Z)
        assert full == pytest.approx((t / self.T) * self.Z, rel=1e-14)

    def test_mean_is_linear_in_time(self):
        # full partial moment equals E[S_t] = (t/T) z
        for t in [0.2, 1.3]:
            got = stable_half_bridge_partial_moment(self.C, t, self.T, self.Z, self.Z)
            assert got == pytest.approx(t / self.T * self.Z, rel=1e-12)

    def test_midpoint_variance_positive(self):
        m2 = stable_half_bridge_second_moment(self.C, 1.0, self.T, self.Z)
        mean = 0.5 * self.Z
        assert m2 - mean**2 > 0

    @given(
        st.floats(0.05, 1.95),
        st.floats(0.01, 2.49),
        st.floats(0.01, 2.49),
    )
    @settings(max_examples=60)
    def test_cdf_monotone(self, t, y1, y2):
        lo, hi = sorted((y1, y2))
        a = stable_half_bridge_cdf(self.C, t, self.T, lo, self.Z)
        b = stable_half_bridge_cdf(self.C, t, self.T, hi, self.Z)
        assert a <= b + 1e-12
        assert -1e-12 <= a <= 1.0 + 1e-12

    def test_extreme_arguments_stable(self):
        # tiny z: enormous exponential factors must not overflow
        v = stable_half_bridge_cdf(10.0, 1.0, 2.0, 0.005, 0.01)
        assert 0.0 <= v <= 1.0


class TestCauchyClosedForms:
    C, T, Z = 0.9, 2.0, 1.3

    def law(self):
        return BridgeLaw(CauchyF(c=self.C), T=self.T, z=self.Z)

    @pytest.mark.parametrize("t", [0.4, 1.0, 1.6])
    @pytest.mark.parametrize("y", [-2.0, 0.0, 0.9, 3.0])
    def test_cdf_vs_quadrature(self, t, y):
        ref, _ = integrate.quad(
            lambda u: bridge_density(self.law(), t, u), -np.inf, y, limit=300
        )
        assert cauchy_bridge_cdf(self.C, t, self.T, y, self.Z) == pytest.approx(
            ref, abs=1e-9
        )

    def test_cdf_limits(self):
        assert cauchy_bridge_cdf(self.C, 0.7, self.T, 1e9, self.Z) == pytest.approx(
            1.0, abs=1e-6
        )
        assert cauchy_bridge_cdf(self.C, 0.7, self.T, -1e9, self.Z) == pytest.approx(
            0.0, abs=1e-6
        )

    def test_half_time_symmetric_point(self):
        # at t = T/2 the bridge is symmetric about z/2
        v = cauchy_bridge_cdf(self.C, self.T / 2, self.T, self.Z / 2, self.Z)
        assert v == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("t", [0.4, 1.0, 1.6])
    def test_moments_vs_quadrature(self, t):
        mean, second = cauchy_bridge_moments(self.C, t, self.T, self.Z)
        ref_mean, _ = integrate.quad(
            lambda u: u * bridge_density(self.law(), t, u), -np.inf, np.inf, limit=400
        )
        ref_second, _ = integrate.quad(
            lambda u: u * u * bridge_density(self.law(), t, u),
            -np.inf,
            np.inf,
            limit=400,
        )
        assert mean == pytest.approx(ref_mean, abs=1e-8)
        assert second == pytest.approx(ref_second, rel=1e-7)

    @given(st.floats(0.05, 1.95), st.floats(-8.0, 8.0), st.floats(-8.0, 8.0))
    @settings(max_examples=60)
    def test_cdf_monotone(self, t, y1, y2):
        lo, hi = sorted((y1, y2))
        a = cauchy_bridge_cdf(self.C, t, self.T, lo, self.Z)
        b = cauchy_bridge_cdf(self.C, t, self.T, hi, self.Z)
        assert a <= b + 1e-12


class TestSampleBeta:
    def test_tiny_shapes_no_nan(self):
        rng = np.random.default_rng(7)
        v = sample_beta(rng, 1e-4, 1e-4, size=4000)
        assert np.all(np.isfinite(v))
        assert np.all((v >= 0) & (v <= 1))
        # both endpoints get hit at double precision, mean stays ~ a/(a+b) = 1/2
        assert abs(v.mean() - 0.5) < 0.05

    @pytest.mark.parametrize("a,b", [(0.3, 0.7), (2.0, 5.0), (0.5, 3.0), (0.9, 0.4)])
    def test_matches_beta_distribution(self, a, b):
        rng = np.random.default_rng(11)
        v = sample_beta(rng, a, b, size=20000)
        _, p = stats.kstest(v, stats.beta(a, b).cdf)
        assert p > 0.01

    def test_tiny_shape_tail_mass(self):
        # with a = 1e-3 most of the law sits below double precision; check the
        # tail split at a representable threshold instead of a raw KS test
        from scipy.special import betainc

        a, b, thresh = 1e-3, 0.9, 1e-100
        rng = np.random.default_rng(17)
        v = sample_beta(rng, a, b, size=40000)
        frac = np.mean(v <= thresh)
        assert frac == pytest.approx(betainc(a, b, thresh), abs=0.01)

    def test_scalar_mode(self):
        rng = np.random.default_rng(3)
        v = sample_beta(rng, 0.5, 0.5)
        assert isinstance(v, float) and 0 <= v <= 1

    def test_domain(self):
        rng = np.random.default_rng(0)
        with pytest.raises(DomainError):
            sample_beta(rng, 0.0, 1.0)


class TestGammaBridge:
    def test_terminal_exact_one_and_monotone(self):
        rng = np.random.default_rng(5)
        times = np.array([0.0, 0.2, 0.5, 0.9, 1.0])
        for _ in range(50):
            path = gamma_bridge_sample(0.7, times, rng)
            assert path[0] == 0.0
            assert path[-1] == 1.0
            assert np.all(np.diff(path) >= 0)

    def test_marginal_distribution(self):
        m, T, t = 1.4, 2.0, 0.6
        rng = np.random.default_rng(42)
        vals = np.array([gamma_bridge_sample(m, [t, T], rng)[0] for _ in range(8000)])
        _, p = stats.kstest(vals, stats.beta(m * t, m * (T - t)).cdf)
        assert p > 0.01

    def test_transition_density_normalized_and_mean(self):
        m, s, t, T, x, z = 1.2, 0.3, 0.8, 2.0, 0.25, 1.0
        total, _ = integrate.quad(
            lambda y: gamma_bridge_transition_density(m, s, t, T, x, y, z), x, z
        )
        assert total == pytest.approx(1.0, abs=1e-9)
        mean, _ = integrate.quad(
            lambda y: y * gamma_bridge_transition_density(m, s, t, T, x, y, z), x, z
        )
        expected = x + (z - x) * (t - s) / (T - s)
        assert mean == pytest.approx(expected, rel=1e-9)

    def test_transition_density_matches_generic_bridge(self):
        # from (0, 0): must agree with the generic gamma bridge density
        m, t, T, z = 2.0, 0.7, 1.5, 2.2
        law = BridgeLaw(Gamma(m=m), T=T, z=z)
        for y in [0.3, 1.0, 1.9]:
            assert gamma_bridge_transition_density(
                m, 0.0, t, T, 0.0, y, z
            ) == pytest.approx(bridge_density(law, t, y), rel=1e-10)

    def test_grid_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(DomainError):
            gamma_bridge_sample(1.0, [0.5, 0.2], rng)
        with pytest.raises(DomainError):
            gamma_bridge_sample(1.0, [-0.1, 0.5], rng)
        with pytest.raises(DomainError):
            gamma_bridge_sample(0.0, [0.5, 1.0], rng)


class TestBrownianBridge:
    def test_endpoints(self):
        rng = np.random.default_rng(9)
        path = brownian_bridge_sample([0.0, 0.25, 0.5, 0.75, 1.0], rng)
        assert path[0] == 0.0
        assert path[-1] == 0.0

    def test_marginal_distribution(self):
        T, t = 2.0, 0.8
        rng = np.random.default_rng(21)
        vals = np.array(
            [brownian_bridge_sample([t, T], rng)[0] for _ in range(8000)]
        )
        sd = math.sqrt(t * (T - t) / T)
        _, p = stats.kstest(vals, stats.norm(0.0, sd).cdf)
        assert p > 0.01

    def test_covariance(self):
        # cov(B_s, B_t) = min(s,t) - s t / T
        T, s, t = 1.0, 0.3, 0.7
        rng = np.random.default_rng(33)
        sample = np.array(
            [brownian_bridge_sample([s, t, T], rng)[:2] for _ in range(20000)]
        )
        emp = np.cov(sample.T)[0, 1]
        assert emp == pytest.approx(s - s * t / T, abs=0.01)


class TestPoissonJumpTimeCdf:
    def test_matches_binomial_tail(self):
        # i-th jump by time t  <=>  at least i of k uniforms land before t/T
        T = 2.0
        for k in [1, 3, 7]:
            for i in range(1, k + 1):
                for t in [0.3, 1.0, 1.7]:
                    expected = stats.binom.sf(i - 1, k, t / T)
                    assert poisson_bridge_jump_time_cdf(i, k, t, T) == pytest.approx(
                        expected, rel=1e-12
                    )

    def test_more_jumps_than_available(self):
        assert poisson_bridge_jump_time_cdf(4, 3, 0.5, 1.0) == 0.0
        assert poisson_bridge_jump_time_cdf(1, 0, 0.5, 1.0) == 0.0

    def test_clamps(self):
        assert poisson_bridge_jump_time_cdf(1, 2, 0.0, 1.0) == 0.0
        assert poisson_bridge_jump_time_cdf(1, 2, 1.0, 1.0) == 1.0
        assert poisson_bridge_jump_time_cdf(1, 2, 5.0, 1.0) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            poisson_bridge_jump_time_cdf(0, 2, 0.5, 1.0)
        with pytest.raises(DomainError):
            poisson_bridge_jump_time_cdf(1, 2, 0.5, 0.0)


def test_bridge_law_validation():
    with pytest.raises(DomainError):
        BridgeLaw(Brownian(), T=0.0, z=0.0)
    with pytest.raises(DomainError):
        BridgeLaw(StableHalf(c=1.0), T=1.0, z=-0.5)
    with pytest.raises(DomainError):
        BridgeLaw(Gamma(m=1.0), T=1.0, z=0.0)
