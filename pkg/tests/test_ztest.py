import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

import properties
from blockentropy import ImageGrid
from blockentropy.entropy import SampleMeanMoments, sample_mean_moments
from blockentropy.errors import ConfigError, DegenerateMomentsError, DomainError, InsufficientTilesError
from blockentropy.ztest import (
    BERRY_ESSEEN_C,
    DEFAULT_RHO_RATIO,
    Decision,
    TestConfig,
    critical_value,
    decide,
    inv_norm_cdf,
    norm_cdf,
    run_test,
    type1_upper_bound,
    z_statistic,
)
from reference_tables import ALPHAS, CRITICAL, GAMMA, K_VALUES
from synthetic import constant, uniform_tiles


def _erf_cdf(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _bisect_quantile(p):
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _erf_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


M100 = sample_mean_moments(256, 256, 100)


class TestQuantile:
    def test_median(self):
        assert inv_norm_cdf(0.5) == 0.0

    def test_one_percent(self):
        assert inv_norm_cdf(0.01) == pytest.approx(_bisect_quantile(0.01), abs=1e-12)
        assert inv_norm_cdf(0.01) == pytest.approx(-2.3263478740, abs=1e-9)

    @pytest.mark.parametrize("p", [1e-10, 1e-6, 0.001, 0.02425, 0.3, 0.7, 0.97575, 0.999, 1 - 1e-10])
    def test_against_independent_routes(self, p):
        z = inv_norm_cdf(p)
        assert z == pytest.approx(norm.ppf(p), abs=1e-9)
        if 1e-6 <= p <= 1 - 1e-6:
            assert z == pytest.approx(_bisect_quantile(p), abs=1e-9)

    def test_round_trip_thousand_points(self):
        rng = np.random.default_rng(20240101)
        for p in rng.uniform(0, 1, size=1000):
            assert _erf_cdf(inv_norm_cdf(p)) == pytest.approx(p, abs=1e-12)

    @given(st.floats(1e-10, 1 - 1e-10))
    def test_round_trip_property(self, p):
        assert abs(norm_cdf(inv_norm_cdf(p)) - p) <= 1e-12

    # below ~1e-6 the float 1 - p is no longer an exact complement
    @given(st.floats(1e-6, 0.5))
    def test_antisymmetry(self, p):
        assert inv_norm_cdf(p) == pytest.approx(-inv_norm_cdf(1 - p), abs=1e-9)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            inv_norm_cdf(p)

    def test_norm_cdf_tails(self):
        assert norm_cdf(0.0) == 0.5
        assert norm_cdf(-10) == pytest.approx(norm.cdf(-10), rel=1e-12)


class TestCriticalValue:
    def test_k100_alpha01(self):
        assert critical_value(M100, 0.01) == pytest.approx(7.1627674499, abs=1e-6)

    def test_k36_alpha05(self):
        assert critical_value(sample_mean_moments(256, 256, 36), 0.05) == pytest.approx(7.1605908805, abs=1e-6)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_full_rows(self, alpha):
        for k, expected in zip(K_VALUES, CRITICAL[alpha]):
            assert critical_value(sample_mean_moments(256, 256, k), alpha) == pytest.approx(expected, abs=1e-6)

    def test_half_alpha_is_mean(self):
        assert critical_value(M100, 0.5) == M100.mu

    def test_below_mean(self):
        for alpha in (0.2, 0.05, 0.001):
            assert critical_value(M100, alpha) < M100.mu

    @given(st.floats(1e-9, 0.999), st.floats(1e-9, 0.999))
    def test_strictly_decreasing_in_alpha(self, a, b):
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        assert critical_value(M100, lo) < critical_value(M100, hi)

    @pytest.mark.parametrize("alpha", [0, 1, -0.5, 2])
    def test_bad_alpha(self, alpha):
        with pytest.raises(DomainError):
            critical_value(M100, alpha)


class TestZAndDecision:
    def test_z_examples(self):
        assert z_statistic(M100.mu, M100) == 0.0
        assert z_statistic(M100.mu + M100.sigma, M100) == pytest.approx(1.0, abs=1e-12)
        assert z_statistic(7.1627674499, M100) == pytest.approx(-2.3263478740, abs=1e-6)

    def test_zero_sigma(self):
        with pytest.raises(DegenerateMomentsError):
            z_statistic(1.0, SampleMeanMoments(0.0, 0.0, 10, 1, 256))

    def test_decide_examples(self):
        h_c = 7.1627674499
        assert decide(h_c, h_c) is Decision.IDEALLY_ENCRYPTED
        assert decide(8.0, h_c) is Decision.IDEALLY_ENCRYPTED
        assert decide(7.16, h_c) is Decision.NOT_IDEALLY_ENCRYPTED
        assert str(Decision.NOT_IDEALLY_ENCRYPTED) == "NotIdeallyEncrypted"

    @given(st.floats(0.0, 8.0), st.floats(1e-6, 0.5))
    def test_single_flip(self, h_bar, alpha):
        h_c = critical_value(M100, alpha)
        sweep = sorted({h_bar, h_c, 0.0, 8.0, h_c + 1e-9, h_c - 1e-9})
        decisions = [decide(h, h_c) for h in sweep]
        flips = sum(1 for a, b in zip(decisions, decisions[1:]) if a != b)
        assert flips == 1
        assert decisions[0] is Decision.NOT_IDEALLY_ENCRYPTED
        assert decisions[-1] is Decision.IDEALLY_ENCRYPTED


class TestGammaBound:
    def test_examples(self):
        assert type1_upper_bound(100, 0.01) == pytest.approx(0.086544, abs=1e-12)
        assert round(type1_upper_bound(100, 0.01), 5) == 0.08654
        assert type1_upper_bound(36, 0.05) == pytest.approx(0.1775733333, abs=1e-9)

    def test_default_numerator(self):
        assert BERRY_ESSEEN_C * DEFAULT_RHO_RATIO == pytest.approx(0.76544, abs=1e-15)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_table_rows(self, alpha):
        for k, expected in zip(K_VALUES, GAMMA[alpha]):
            assert type1_upper_bound(k, alpha) == pytest.approx(expected, abs=5e-6)

    def test_large_k_limit(self):
        k = math.ceil(0.76544**2 / 1e-6)
        assert k == 585_899
        assert type1_upper_bound(k, 0.01) - 0.01 <= 1e-3
        assert type1_upper_bound(k - 1, 0.01) - 0.01 > 1e-3

    @given(st.integers(1, 10**12), st.floats(1e-9, 0.999), st.floats(1e-3, 100))
    def test_dominates_alpha(self, k, alpha, rho):
        assert type1_upper_bound(k, alpha, rho) > alpha

    def test_custom_rho(self):
        assert type1_upper_bound(100, 0.01, 1.0) == pytest.approx(0.04784 + 0.01)

    @pytest.mark.parametrize("args", [(0, 0.01), (10, 0.0), (10, 0.01, 0.0), (10, 0.01, -1)])
    def test_bad_arguments(self, args):
        with pytest.raises(DomainError):
            type1_upper_bound(*args)


class TestRunTest:
    def test_constant_image_rejected(self):
        rep = run_test(constant(256, 256, 128, 256), TestConfig(seed=7))
        assert rep.h_bar == 0.0
        assert rep.decision is Decision.NOT_IDEALLY_ENCRYPTED
        assert rep.rejected

    def test_maximal_tiles_accepted(self):
        rep = run_test(uniform_tiles(256, 256, 16, 256, seed=3), TestConfig(seed=1))
        assert rep.h_bar == pytest.approx(8.0, abs=1e-12)
        assert rep.h_bar > rep.h_c
        assert rep.decision is Decision.IDEALLY_ENCRYPTED

    def test_report_fields(self):
        cfg = TestConfig(seed=11)
        rep = run_test(uniform_tiles(256, 256, 16, 256, seed=0), cfg, image_id="x.pgm")
        assert rep.config is cfg
        assert rep.image == "x.pgm"
        assert rep.positions == tuple(sorted(rep.positions))
        assert rep.h_c == pytest.approx(7.1627674499, abs=1e-6)
        assert rep.gamma_bound == pytest.approx(0.086544)
        assert rep.mu == M100.mu and rep.sigma == M100.sigma

    def test_deterministic(self):
        img = ImageGrid(np.random.default_rng(1).integers(0, 256, size=(256, 256)), 256)
        a = run_test(img, TestConfig(seed=5))
        b = run_test(img, TestConfig(seed=5))
        assert a == b

    def test_level_mismatch(self):
        with pytest.raises(ConfigError):
            run_test(constant(64, 64, 0, 2), TestConfig())

    def test_too_few_tiles(self):
        with pytest.raises(InsufficientTilesError):
            run_test(constant(64, 64, 0, 256), TestConfig())

    def test_config_validation(self):
        for kwargs in [dict(alpha=0), dict(alpha=1), dict(k=0), dict(levels=1), dict(seed=-1), dict(rho_ratio=0)]:
            with pytest.raises(DomainError):
                TestConfig(**kwargs)

    def test_binary_image(self):
        img = ImageGrid(np.random.default_rng(2).integers(0, 2, size=(256, 256)), 2)
        rep = run_test(img, TestConfig(levels=2, seed=3))
        assert rep.mu == pytest.approx(0.9971767038, abs=1e-9)


@given(properties.seeds, st.integers(1, 6), st.integers(1, 6), st.floats(1e-4, 0.5), st.data())
def test_report_consistency(seed, br, bc, alpha, data):
    properties.check_report_consistency(seed, br, bc, alpha, data.draw)
