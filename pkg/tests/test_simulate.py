"""Distributional and determinism tests for the path samplers.

Every sampler is checked against an independent description of the same
law: closed-form bridge CDFs where we have them, quadrature of the
generic bridge density where we do not, and scipy distributions for the
auxiliary draws.  Seeds are fixed so the suite is reproducible.
"""

import numpy as np
import pytest
from scipy import stats as ss

from lrb.bridges import (
    BridgeLaw,
    bridge_density,
    cauchy_bridge_cdf,
    poisson_bridge_jump_time_cdf,
    stable_half_bridge_cdf,
)
from lrb.core import LrbSpec, TerminalLaw, psi
from lrb.errors import ConfigError, DomainError, UnsupportedRegimeError
from lrb.marginals import (
    NIG,
    VG,
    Brownian,
    CauchyF,
    Gamma,
    IG,
    PoissonF,
    StableHalf,
    log_mgf,
)
from lrb.simulate import (
    PathSample,
    RngStream,
    sample_brownian_rb,
    sample_cauchy_rb,
    sample_gamma_rb,
    sample_gig,
    sample_nigrb,
    sample_paths,
    sample_prb,
    sample_stable_half_rb,
    sample_terminal,
    sample_vgrb,
)
from lrb.simulate import _conditional_gamma_difference


def atom_law(*pairs):
    return TerminalLaw(atoms=tuple(pairs))


def numeric_bridge_cdf(family, T, z, t, lo, hi, n_grid=4001):
    """Tabulated CDF of the generic bridge marginal, for KS comparisons."""
    law = BridgeLaw(family=family, T=T, z=z)
    grid = np.linspace(lo, hi, n_grid)
    dens = np.asarray(bridge_density(law, t, grid), dtype=float)
    cdf = np.concatenate(([0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))))
    cdf /= cdf[-1]
    return lambda x: np.interp(x, grid, cdf, left=0.0, right=1.0)


def ks_pvalue(sample, cdf):
    return ss.ks_1samp(np.asarray(sample, dtype=float), cdf).pvalue


# ---------------------------------------------------------------------------
# streams and terminal draws


class TestRngStream:
    def test_same_key_reproduces(self):
        a = RngStream(12345, 7).generator().random(10)
        b = RngStream(12345, 7).generator().random(10)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(12345, 0).generator().random(10)
        b = RngStream(12345, 1).generator().random(10)
        assert not np.any(a == b)

    def test_key_range_checked(self):
        with pytest.raises(ConfigError):
            RngStream(-1)
        with pytest.raises(ConfigError):
            RngStream(0, 2**64)


class TestSampleTerminal:
    def test_atoms_only_frequencies(self):
        law = atom_law((1.0, 0.2), (2.0, 0.5), (5.0, 0.3))
        rng = RngStream(31).generator()
        draws = sample_terminal(law, rng, size=30_000)
        counts = [np.sum(draws == z) for z in (1.0, 2.0, 5.0)]
        p = ss.chisquare(counts, f_exp=np.array([0.2, 0.5, 0.3]) * 30_000).pvalue
        assert p > 0.01

    def test_scalar_draw(self):
        law = atom_law((4.0, 1.0))
        assert sample_terminal(law, RngStream(0).generator()) == 4.0

    def test_mixed_law_with_sampler(self):
        law = TerminalLaw(
            atoms=((3.0, 0.25),),
            density=lambda z: 0.75 * ss.norm.pdf(z),
            support=(-np.inf, np.inf),
            sampler=lambda rng, n: rng.standard_normal(n),
        )
        rng = RngStream(32).generator()
        draws = sample_terminal(law, rng, size=20_000)
        at_atom = draws == 3.0
        frac = at_atom.mean()
        assert abs(frac - 0.25) < 4 * np.sqrt(0.25 * 0.75 / 20_000)
        assert ks_pvalue(draws[~at_atom], ss.norm.cdf) > 0.01

    def test_cdf_inversion_route(self):
        law = TerminalLaw(
            atoms=((0.25, 0.4),),
            density=lambda z: 0.6 * np.exp(-z),
            support=(0.0, np.inf),
            cdf=lambda x: np.where(
                np.asarray(x) < 0.0,
                0.0,
                0.6 * (1.0 - np.exp(-np.clip(x, 0.0, None)))
                + 0.4 * (np.asarray(x) >= 0.25),
            ),
        )
        rng = RngStream(33).generator()
        draws = sample_terminal(law, rng, size=12_000)
        at_atom = np.abs(draws - 0.25) < 1e-9
        assert abs(at_atom.mean() - 0.4) < 4 * np.sqrt(0.4 * 0.6 / 12_000)
        assert ks_pvalue(draws[~at_atom], lambda x: 1.0 - np.exp(-x)) > 0.01

    def test_scalar_only_cdf_accepted(self):
        import math

        law = TerminalLaw(
            density=lambda z: np.exp(-z),
            support=(0.0, np.inf),
            cdf=lambda x: 1.0 - math.exp(-x) if x > 0 else 0.0,
        )
        draws = sample_terminal(law, RngStream(3).generator(), size=200)
        assert ks_pvalue(draws, lambda x: 1.0 - np.exp(-x)) > 0.01

    def test_no_sampler_no_cdf_rejected(self):
        law = TerminalLaw(density=ss.norm.pdf, support=(-np.inf, np.inf))
        with pytest.raises(ConfigError):
            sample_terminal(law, RngStream(0).generator(), size=5)


class TestSampleGig:
    def test_matches_scipy(self):
        rng = RngStream(34).generator()
        draws = sample_gig(rng, -1.0, 2.3, 1.1, 8_000)
        cdf = ss.geninvgauss(p=-1.0, b=2.3 * 1.1, scale=2.3 / 1.1).cdf
        assert ks_pvalue(draws, cdf) > 0.01

    def test_gamma_limit(self):
        rng = RngStream(35).generator()
        draws = sample_gig(rng, 1.5, 0.0, 2.0, 8_000)
        assert ks_pvalue(draws, ss.gamma(a=1.5, scale=0.5).cdf) > 0.01

    def test_gamma_limit_needs_positive_order(self):
        with pytest.raises(UnsupportedRegimeError):
            sample_gig(RngStream(0).generator(), -1.0, 0.0, 2.0, 4)

    def test_negative_delta_rejected(self):
        with pytest.raises(DomainError):
            sample_gig(RngStream(0).generator(), 1.0, -0.5, 2.0, 4)


# ---------------------------------------------------------------------------
# stable-1/2 random bridge


class TestStableHalfSampler:
    spec = LrbSpec(family=StableHalf(c=1.0), T=2.0, nu=atom_law((3.0, 1.0)))

    def test_dyadic_midpoint_marginal(self):
        rng = RngStream(36).generator()
        vals = sample_stable_half_rb(self.spec, rng, depth=2, size=15_000)
        assert vals.shape == (15_000, 5)
        # t = T/2 is the third dyadic point
        cdf = lambda y: stable_half_bridge_cdf(1.0, 1.0, 2.0, y, 3.0)
        assert ks_pvalue(vals[:, 2], cdf) > 0.01
        # quarter point exercises the second dyadic level
        cdf_q = lambda y: stable_half_bridge_cdf(1.0, 0.5, 2.0, y, 3.0)
        assert ks_pvalue(vals[:, 1], cdf_q) > 0.01

    def test_dyadic_paths_monotone_and_pinned(self):
        rng = RngStream(37).generator()
        vals = sample_stable_half_rb(self.spec, rng, depth=5, size=200)
        assert np.all(np.diff(vals, axis=1) >= 0)
        np.testing.assert_array_equal(vals[:, 0], 0.0)
        np.testing.assert_array_equal(vals[:, -1], 3.0)

    def test_grid_inversion_marginal(self):
        rng = RngStream(38).generator()
        vals = sample_stable_half_rb(
            self.spec, rng, times=[0.4, 1.3, 2.0], size=12_000
        )
        cdf = lambda y: stable_half_bridge_cdf(1.0, 1.3, 2.0, y, 3.0)
        assert ks_pvalue(vals[:, 1], cdf) > 0.01
        np.testing.assert_array_equal(vals[:, 2], 3.0)
        assert np.all(np.diff(vals, axis=1) >= 0)

    def test_grid_and_dyadic_agree(self):
        r1 = RngStream(39).generator()
        r2 = RngStream(40).generator()
        a = sample_stable_half_rb(self.spec, r1, depth=1, size=12_000)[:, 1]
        b = sample_stable_half_rb(self.spec, r2, times=[1.0], size=12_000)[:, 0]
        assert ss.ks_2samp(a, b).pvalue > 0.01

    def test_two_atom_mixture(self):
        spec = LrbSpec(
            family=StableHalf(c=1.0),
            T=2.0,
            nu=atom_law((1.5, 0.4), (4.0, 0.6)),
        )
        rng = RngStream(41).generator()
        vals = sample_stable_half_rb(spec, rng, times=[0.8, 2.0], size=12_000)
        mix = lambda y: 0.4 * stable_half_bridge_cdf(
            1.0, 0.8, 2.0, y, 1.5
        ) + 0.6 * stable_half_bridge_cdf(1.0, 0.8, 2.0, y, 4.0)
        assert ks_pvalue(vals[:, 0], mix) > 0.01
        frac = np.mean(vals[:, 1] == 4.0)
        assert abs(frac - 0.6) < 4 * np.sqrt(0.6 * 0.4 / 12_000)

    def test_single_path_wrapper(self):
        path = sample_stable_half_rb(self.spec, RngStream(5).generator(), depth=3)
        assert isinstance(path, PathSample)
        assert path.values.shape == path.times.shape == (9,)
        assert path.spec_id == "stable-half-rb"

    def test_depth_and_times_mutually_exclusive(self):
        rng = RngStream(0).generator()
        with pytest.raises(ConfigError):
            sample_stable_half_rb(self.spec, rng)
        with pytest.raises(ConfigError):
            sample_stable_half_rb(self.spec, rng, depth=2, times=[1.0])

    def test_ig_family_accepted(self):
        spec = LrbSpec(family=IG(c=1.0, gamma_=2.0), T=2.0, nu=atom_law((3.0, 1.0)))
        vals = sample_stable_half_rb(spec, RngStream(42).generator(), times=[1.3], size=12_000)
        # the bridge forgets gamma_: same law as the stable-1/2 bridge
        cdf = lambda y: stable_half_bridge_cdf(1.0, 1.3, 2.0, y, 3.0)
        assert ks_pvalue(vals[:, 0], cdf) > 0.01


# ---------------------------------------------------------------------------
# gaussian and gamma bridges (wrappers)


class TestBrownianGammaSamplers:
    def test_brownian_marginal_ignores_drift(self):
        spec = LrbSpec(
            family=Brownian(theta=0.7, sigma=1.3),
            T=2.0,
            nu=atom_law((1.0, 0.5), (-0.5, 0.5)),
        )
        rng = RngStream(43).generator()
        vals = sample_brownian_rb(spec, [0.6, 1.4, 2.0], rng, size=15_000)
        sd = 1.3 * np.sqrt(1.4 * (2.0 - 1.4) / 2.0)
        mix = lambda y: 0.5 * ss.norm.cdf(y, loc=1.0 * 0.7, scale=sd) + 0.5 * ss.norm.cdf(
            y, loc=-0.5 * 0.7, scale=sd
        )
        assert ks_pvalue(vals[:, 1], mix) > 0.01
        frac = np.mean(vals[:, 2] == 1.0)
        assert abs(frac - 0.5) < 4 * np.sqrt(0.25 / 15_000)

    def test_gamma_marginal_is_scaled_beta(self):
        spec = LrbSpec(family=Gamma(m=1.7), T=1.5, nu=atom_law((2.0, 1.0)))
        rng = RngStream(44).generator()
        vals = sample_gamma_rb(spec, [0.5, 1.5], rng, size=12_000)
        cdf = ss.beta(a=1.7 * 0.5, b=1.7 * 1.0).cdf
        assert ks_pvalue(vals[:, 0] / 2.0, cdf) > 0.01
        np.testing.assert_array_equal(vals[:, 1], 2.0)


# ---------------------------------------------------------------------------
# variance-gamma random bridge


class TestVgSampler:
    spec = LrbSpec(family=VG(m=2.0), T=1.5, nu=atom_law((0.8, 1.0)))

    def test_method_one_marginal(self):
        rng = RngStream(45).generator()
        vals = sample_vgrb(self.spec, [0.6, 1.5], rng, method="I", size=12_000)
        cdf = numeric_bridge_cdf(VG(m=2.0), 1.5, 0.8, 0.6, -6.0, 7.0)
        assert ks_pvalue(vals[:, 0], cdf) > 0.01
        np.testing.assert_allclose(vals[:, 1], 0.8)

    def test_method_two_marginal(self):
        rng = RngStream(46).generator()
        vals = sample_vgrb(self.spec, [0.6], rng, method="II", size=12_000)
        cdf = numeric_bridge_cdf(VG(m=2.0), 1.5, 0.8, 0.6, -6.0, 7.0)
        assert ks_pvalue(vals[:, 0], cdf) > 0.01

    def test_methods_agree(self):
        a = sample_vgrb(self.spec, [1.0], RngStream(47).generator(), method="I", size=10_000)
        b = sample_vgrb(self.spec, [1.0], RngStream(48).generator(), method="II", size=10_000)
        assert ss.ks_2samp(a[:, 0], b[:, 0]).pvalue > 0.01

    def test_asymmetric_family_scaling(self):
        fam = VG(m=2.0, theta=0.5, sigma=0.8)
        spec = LrbSpec(family=fam, T=1.5, nu=atom_law((0.6, 1.0)))
        rng = RngStream(49).generator()
        vals = sample_vgrb(spec, [0.6], rng, size=12_000)
        cdf = numeric_bridge_cdf(fam, 1.5, 0.6, 0.6, -5.0, 5.6)
        assert ks_pvalue(vals[:, 0], cdf) > 0.01

    def test_method_two_needs_unit_shape(self):
        spec = LrbSpec(family=VG(m=0.6), T=1.0, nu=atom_law((0.4, 1.0)))
        with pytest.raises(UnsupportedRegimeError):
            sample_vgrb(spec, [0.5], RngStream(0).generator(), method="II", size=4)

    def test_zero_terminal_needs_large_shape(self):
        spec = LrbSpec(family=VG(m=0.4), T=1.0, nu=atom_law((0.0, 1.0)))
        with pytest.raises(UnsupportedRegimeError):
            sample_vgrb(spec, [0.5], RngStream(0).generator(), method="I", size=4)

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            sample_vgrb(self.spec, [0.5], RngStream(0).generator(), method="III")


class TestConditionalGammaDifference:
    def _target_cdf(self, a, rate, g, lo, hi):
        grid = np.linspace(lo, hi, 4001)
        y = np.clip(grid, max(0.0, -g) + 1e-300, None)
        dens = np.where(
            grid > max(0.0, -g),
            (y * (y + g)) ** (a - 1.0) * np.exp(-rate * (g + 2.0 * y)),
            0.0,
        )
        cdf = np.concatenate(
            ([0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid)))
        )
        cdf /= cdf[-1]
        return lambda x: np.interp(x, grid, cdf, left=0.0, right=1.0)

    def test_positive_difference(self):
        rng = RngStream(50).generator()
        g = np.full(10_000, 0.7)
        draws = _conditional_gamma_difference(rng, 2.4, 1.3, g)
        assert ks_pvalue(draws, self._target_cdf(2.4, 1.3, 0.7, 0.0, 12.0)) > 0.01

    def test_negative_difference(self):
        rng = RngStream(51).generator()
        g = np.full(10_000, -0.9)
        draws = _conditional_gamma_difference(rng, 2.4, 1.3, g)
        assert np.all(draws > 0.9)
        assert ks_pvalue(draws, self._target_cdf(2.4, 1.3, -0.9, 0.9, 13.0)) > 0.01

    def test_small_shape_rejected_when_conditioned(self):
        with pytest.raises(UnsupportedRegimeError):
            _conditional_gamma_difference(
                RngStream(0).generator(), 0.8, 1.0, np.array([0.3])
            )

    def test_zero_difference_small_shape_ok(self):
        rng = RngStream(52).generator()
        draws = _conditional_gamma_difference(rng, 0.8, 1.0, np.zeros(8_000))
        # g = 0 collapses to a plain gamma in closed form
        assert ks_pvalue(draws, ss.gamma(a=2 * 0.8 - 1, scale=0.5).cdf) > 0.01


# ---------------------------------------------------------------------------
# Cauchy and NIG random bridges


class TestCauchySampler:
    def test_marginal_against_closed_cdf(self):
        spec = LrbSpec(family=CauchyF(c=0.8), T=2.0, nu=atom_law((-1.0, 0.5), (2.0, 0.5)))
        rng = RngStream(53).generator()
        vals = sample_cauchy_rb(spec, [0.7, 2.0], rng, size=12_000)
        mix = lambda y: 0.5 * cauchy_bridge_cdf(0.8, 0.7, 2.0, y, -1.0) + 0.5 * cauchy_bridge_cdf(
            0.8, 0.7, 2.0, y, 2.0
        )
        assert ks_pvalue(vals[:, 0], mix) > 0.01
        frac = np.mean(vals[:, 1] == 2.0)
        assert abs(frac - 0.5) < 4 * np.sqrt(0.25 / 12_000)

    def test_mean_interpolates(self):
        spec = LrbSpec(family=CauchyF(c=0.8), T=2.0, nu=atom_law((2.0, 1.0)))
        rng = RngStream(54).generator()
        vals = sample_cauchy_rb(spec, [0.5], rng, size=20_000)
        # bridge mean is (t/T) z despite the heavy increment tails
        se = vals[:, 0].std() / np.sqrt(20_000)
        assert abs(vals[:, 0].mean() - 0.5) < 4 * se


class TestNigSampler:
    def test_symmetric_marginal(self):
        fam = NIG(c=1.2)
        spec = LrbSpec(family=fam, T=1.8, nu=atom_law((0.9, 1.0)))
        rng = RngStream(55).generator()
        vals = sample_nigrb(spec, [0.9, 1.8], rng, size=12_000)
        cdf = numeric_bridge_cdf(fam, 1.8, 0.9, 0.9, -5.0, 5.9)
        assert ks_pvalue(vals[:, 0], cdf) > 0.01
        np.testing.assert_allclose(vals[:, 1], 0.9)

    def test_asymmetric_family_scaling(self):
        fam = NIG(c=1.2, theta=0.4, sigma=0.9)
        spec = LrbSpec(family=fam, T=1.8, nu=atom_law((0.7, 1.0)))
        rng = RngStream(56).generator()
        vals = sample_nigrb(spec, [0.8], rng, size=12_000)
        cdf = numeric_bridge_cdf(fam, 1.8, 0.7, 0.8, -5.0, 5.7)
        assert ks_pvalue(vals[:, 0], cdf) > 0.01


# ---------------------------------------------------------------------------
# Poisson random bridge


class TestPoissonSampler:
    def test_fixed_count_jump_times(self):
        spec = LrbSpec(family=PoissonF(lambda_=1.0), T=2.0, nu=atom_law((3.0, 1.0)))
        rng = RngStream(57).generator()
        jumps = sample_prb(spec, rng, size=8_000)
        assert all(j.shape == (3,) for j in jumps)
        first = np.array([j[0] for j in jumps])
        assert np.all((first > 0) & (first < 2.0))
        cdf = lambda t: np.array(
            [poisson_bridge_jump_time_cdf(1, 3, float(u), 2.0) for u in np.atleast_1d(t)]
        )
        assert ks_pvalue(first, cdf) > 0.01

    def test_counting_paths_are_binomial_thinning(self):
        spec = LrbSpec(family=PoissonF(lambda_=1.0), T=2.0, nu=atom_law((6.0, 1.0)))
        rng = RngStream(58).generator()
        vals = sample_paths(spec, [0.8, 2.0], rng, 15_000)
        counts = np.array([np.sum(vals[:, 0] == k) for k in range(7)])
        expected = ss.binom.pmf(np.arange(7), 6, 0.4) * 15_000
        assert ss.chisquare(counts, f_exp=expected).pvalue > 0.01
        np.testing.assert_array_equal(vals[:, 1], 6.0)

    def test_random_count(self):
        spec = LrbSpec(
            family=PoissonF(lambda_=1.0),
            T=2.0,
            nu=atom_law((0.0, 0.3), (2.0, 0.4), (5.0, 0.3)),
        )
        rng = RngStream(59).generator()
        jumps = sample_prb(spec, rng, size=10_000)
        lens = np.array([j.size for j in jumps])
        counts = [np.sum(lens == k) for k in (0, 2, 5)]
        assert ss.chisquare(counts, f_exp=np.array([0.3, 0.4, 0.3]) * 10_000).pvalue > 0.01

    def test_single_path(self):
        spec = LrbSpec(family=PoissonF(lambda_=1.0), T=2.0, nu=atom_law((4.0, 1.0)))
        jumps = sample_prb(spec, RngStream(7).generator())
        assert jumps.shape == (4,)
        assert np.all(np.diff(jumps) > 0)

    def test_family_guard(self):
        spec = LrbSpec(family=Gamma(m=1.0), T=1.0, nu=atom_law((1.0, 1.0)))
        with pytest.raises(ConfigError):
            sample_prb(spec, RngStream(0).generator())


# ---------------------------------------------------------------------------
# dispatcher, determinism, change of measure


class TestSamplePaths:
    def test_all_families_dispatch(self):
        specs = [
            LrbSpec(family=Brownian(), T=1.0, nu=atom_law((0.3, 1.0))),
            LrbSpec(family=Gamma(m=1.0), T=1.0, nu=atom_law((1.0, 1.0))),
            LrbSpec(family=VG(m=2.0), T=1.0, nu=atom_law((0.5, 1.0))),
            LrbSpec(family=StableHalf(c=1.0), T=1.0, nu=atom_law((1.0, 1.0))),
            LrbSpec(family=IG(c=1.0, gamma_=1.0), T=1.0, nu=atom_law((1.0, 1.0))),
            LrbSpec(family=CauchyF(c=1.0), T=1.0, nu=atom_law((0.5, 1.0))),
            LrbSpec(family=NIG(c=1.0), T=1.0, nu=atom_law((0.5, 1.0))),
            LrbSpec(family=PoissonF(lambda_=1.0), T=1.0, nu=atom_law((2.0, 1.0))),
        ]
        times = [0.25, 0.75, 1.0]
        for spec in specs:
            vals = sample_paths(spec, times, RngStream(60).generator(), 16)
            assert vals.shape == (16, 3)
            assert np.all(np.isfinite(vals))

    def test_seed_reproducibility(self):
        spec = LrbSpec(family=VG(m=2.0), T=1.0, nu=atom_law((0.5, 1.0)))
        a = sample_paths(spec, [0.3, 0.9], RngStream(61, 3).generator(), 32)
        b = sample_paths(spec, [0.3, 0.9], RngStream(61, 3).generator(), 32)
        np.testing.assert_array_equal(a, b)

    def test_time_change_remaps_grid(self):
        tau = lambda t: t * t / 2.0  # calendar [0, 2] -> operational [0, 2]
        base = LrbSpec(family=Gamma(m=1.5), T=2.0, nu=atom_law((1.0, 1.0)))
        clocked = LrbSpec(
            family=Gamma(m=1.5), T=2.0, nu=atom_law((1.0, 1.0)), time_change=tau
        )
        a = sample_paths(clocked, [1.0, 2.0], RngStream(62).generator(), 64)
        b = sample_paths(base, [0.5, 2.0], RngStream(62).generator(), 64)
        np.testing.assert_array_equal(a, b)

    def test_grid_validation(self):
        spec = LrbSpec(family=Brownian(), T=1.0, nu=atom_law((0.0, 1.0)))
        rng = RngStream(0).generator()
        with pytest.raises(DomainError):
            sample_paths(spec, [0.5, 0.5], rng, 4)
        with pytest.raises(DomainError):
            sample_paths(spec, [0.5, 1.5], rng, 4)
        with pytest.raises(DomainError):
            sample_paths(spec, [], rng, 4)


class TestChangeOfMeasure:
    def test_unit_inverse_mass_recovers_levy_laplace(self):
        # Weighting by 1/psi turns bridge expectations into plain increment
        # expectations: E[exp(-u xi_t) / psi_t] = exp(t log-MGF(-u)).
        spec = LrbSpec(
            family=StableHalf(c=1.0), T=2.0, nu=atom_law((1.0, 0.5), (3.0, 0.5))
        )
        t, u = 0.7, 0.9
        rng = RngStream(63).generator()
        vals = sample_stable_half_rb(spec, rng, times=[t], size=4_000)[:, 0]
        w = np.array([np.exp(-u * x) / psi(spec, t, x) for x in vals])
        target = np.exp(t * log_mgf(StableHalf(c=1.0), -u))
        se = w.std() / np.sqrt(w.size)
        assert abs(w.mean() - target) < 4 * se
