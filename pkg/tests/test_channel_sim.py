import math

import numpy as np
import pytest

from wdmt import (
    ChannelMatrix,
    DimensionMismatchError,
    EffectiveGains,
    OutOfRangeError,
    OutageEstimate,
    RankDeficientError,
    Scenario,
    TooManyUsersError,
    confidence_interval,
    dpc_gains,
    outage_probability,
    sample_channel,
    validate_gain_distribution,
    validate_weights,
    weighted_capacity,
    zf_gains,
)


def k1_outage_oracle(rho, r):
    """P(|h|^2 <= (rho^r - 1)/rho) for a scalar Rayleigh channel."""
    return 1.0 - math.exp(-((rho**r) - 1.0) / rho)


def projection_residual_sq(target, onto):
    """Independent least-squares oracle: squared norm of target minus its
    projection onto the row span of `onto` (empty span allowed)."""
    if onto.shape[0] == 0:
        return float(np.vdot(target, target).real)
    coef, *_ = np.linalg.lstsq(onto.T, target, rcond=None)
    resid = target - onto.T @ coef
    return float(np.vdot(resid, resid).real)


class TestSampleChannel:
    def test_same_seed_same_matrix(self):
        a = sample_channel(4, 2, 123)
        b = sample_channel(4, 2, 123)
        assert np.array_equal(a.h, b.h)

    def test_shape_and_convention(self):
        ch = sample_channel(5, 3, 0)
        assert ch.h.shape == (3, 5)
        assert ch.n_users == 3 and ch.n_tx == 5

    def test_entry_power_is_unit(self):
        ch = sample_channel(50_000, 2, 7)  # 1e5 entries
        assert abs(np.mean(np.abs(ch.h) ** 2) - 1.0) < 0.02

    def test_row_norm_mean_matches_antenna_count(self):
        rep = validate_gain_distribution(
            Scenario(kind="parallel-identical", weights=validate_weights((1.0,)), n_t=3),
            index=0,
            n_samples=1_000_000,
            seed=11,
        )
        assert abs(rep.mean - 3.0) < 0.01

    def test_entry_power_is_unit_exponential(self):
        # |entry|^2 of a scalar channel is Exp(1); KS below the 1% critical
        # value at 1e5 samples
        rep = validate_gain_distribution(
            Scenario(kind="parallel-identical", weights=validate_weights((1.0,)), n_t=1),
            index=0,
            n_samples=100_000,
            seed=13,
        )
        assert rep.ks_stat < 1.63 / math.sqrt(100_000)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            sample_channel(0, 2, 1)


class TestZfGains:
    def test_single_user_keeps_full_norm(self):
        ch = sample_channel(4, 1, 3)
        g = zf_gains(ch)
        assert g.gamma[0] == pytest.approx(np.vdot(ch.h[0], ch.h[0]).real, rel=1e-12)

    def test_orthogonal_rows_unchanged(self):
        h = np.zeros((2, 3), dtype=complex)
        h[0, 0] = 1 + 2j
        h[1, 1] = 3 - 1j
        g = zf_gains(ChannelMatrix(h))
        assert g.gamma == pytest.approx((5.0, 10.0), rel=1e-12)

    def test_matches_least_squares_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            k = int(rng.integers(1, 5))
            m = int(rng.integers(k, k + 3))
            ch = sample_channel(m, k, rng)
            g = zf_gains(ch)
            for i in range(k):
                others = np.delete(ch.h, i, axis=0)
                expected = projection_residual_sq(ch.h[i], others)
                assert abs(g.gamma[i] - expected) <= 1e-10 * max(expected, 1.0)

    def test_mean_gain_is_residual_dimension(self):
        # M=3, K=2 leaves one complex dimension free: Gamma(2,1), mean 2
        s = Scenario(kind="bc-zf", weights=validate_weights((0.5, 0.5)), m=3)
        for index in (0, 1):
            rep = validate_gain_distribution(s, index, 1_000_000, seed=19 + index)
            assert abs(rep.mean - 2.0) < 0.01

    def test_rank_deficient_detected(self):
        h = np.array([[1.0, 2.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]], dtype=complex)
        with pytest.raises(RankDeficientError):
            zf_gains(ChannelMatrix(h))

    def test_too_many_users(self):
        with pytest.raises(TooManyUsersError):
            zf_gains(sample_channel(2, 3, 5))


class TestDpcGains:
    def test_first_user_keeps_full_norm(self):
        ch = sample_channel(4, 3, 23)
        g = dpc_gains(ch, (1, 0, 2))
        assert g.gamma[1] == pytest.approx(np.vdot(ch.h[1], ch.h[1]).real, rel=1e-12)

    def test_orthogonal_square_system_unchanged(self):
        h = np.diag([1 + 1j, 2.0, 3j]).astype(complex)
        g = dpc_gains(ChannelMatrix(h), (0, 1, 2))
        assert g.gamma == pytest.approx((2.0, 4.0, 9.0), rel=1e-12)

    def test_matches_least_squares_oracle(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            k = int(rng.integers(1, 5))
            m = int(rng.integers(k, k + 3))
            ch = sample_channel(m, k, rng)
            order = tuple(rng.permutation(k))
            g = dpc_gains(ch, order)
            for pos, user in enumerate(order):
                prior = ch.h[list(order[:pos])]
                expected = projection_residual_sq(ch.h[user], prior)
                assert abs(g.gamma[user] - expected) <= 1e-10 * max(expected, 1.0)

    def test_mean_gains_shrink_along_encode_order(self):
        s = Scenario(kind="bc-dpc", weights=validate_weights((0.5, 0.5)), m=3)
        rep0 = validate_gain_distribution(s, 0, 1_000_000, seed=31)
        rep1 = validate_gain_distribution(s, 1, 1_000_000, seed=37)
        assert abs(rep0.mean - 3.0) < 0.015
        assert abs(rep1.mean - 2.0) < 0.01

    def test_bad_order_rejected(self):
        ch = sample_channel(3, 2, 41)
        with pytest.raises(ValueError):
            dpc_gains(ch, (0, 0))


class TestWeightedCapacity:
    def test_one_nat_identity(self):
        cap = weighted_capacity(
            EffectiveGains((1.0,)), validate_weights((1.0,)), math.e - 1.0
        )
        assert cap == pytest.approx(1.0, abs=1e-15)

    def test_zero_gains_zero_rate(self):
        cap = weighted_capacity(
            EffectiveGains((0.0, 0.0)), validate_weights((0.5, 0.5)), 10.0
        )
        assert cap == 0.0

    def test_uniform_pair_closed_form(self):
        cap = weighted_capacity(
            EffectiveGains((1.0, 1.0)), validate_weights((0.5, 0.5)), 10.0
        )
        assert cap == pytest.approx(2.0 * math.log(6.0), rel=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            weighted_capacity(EffectiveGains((1.0,)), validate_weights((0.5, 0.5)), 1.0)

    def test_bad_snr(self):
        with pytest.raises(OutOfRangeError):
            weighted_capacity(EffectiveGains((1.0,)), validate_weights((1.0,)), 0.0)


class TestOutageProbability:
    scalar = Scenario(kind="parallel-identical", weights=validate_weights((1.0,)), n_t=1)

    def test_matches_closed_form_oracle(self):
        est = outage_probability(self.scalar, r=0.5, rho=10.0, n_samples=1_000_000, seed=43)
        truth = k1_outage_oracle(10.0, 0.5)
        assert truth == pytest.approx(0.1945, abs=5e-4)
        assert est.ci_low <= truth <= est.ci_high

    def test_zero_rate_never_in_outage(self):
        est = outage_probability(self.scalar, r=0.0, rho=1e4, n_samples=100_000, seed=47)
        assert est.n_outages == 0
        assert est.p_hat == 0.0

    def test_deterministic_given_seed_and_shards(self):
        s = Scenario(kind="bc-dpc", weights=validate_weights((0.6, 0.4)), m=3)
        a = outage_probability(s, r=1.0, rho=100.0, n_samples=30_000, seed=53, shards=4)
        b = outage_probability(s, r=1.0, rho=100.0, n_samples=30_000, seed=53, shards=4)
        assert a == b

    def test_monotone_in_snr_and_rate(self):
        ests_rho = [
            outage_probability(self.scalar, r=0.5, rho=10.0**e, n_samples=100_000, seed=59)
            for e in (1, 2, 3)
        ]
        for lo, hi in zip(ests_rho[1:], ests_rho[:-1]):
            assert lo.p_hat <= hi.p_hat or lo.ci_low <= hi.ci_high
        ests_r = [
            outage_probability(self.scalar, r=r, rho=100.0, n_samples=100_000, seed=61)
            for r in (0.25, 0.5, 0.75)
        ]
        for lo, hi in zip(ests_r[:-1], ests_r[1:]):
            assert lo.p_hat <= hi.p_hat or lo.ci_low <= hi.ci_high

    def test_oracle_coverage_across_grid(self):
        # 95% intervals should cover the closed form at nearly all points
        covered = 0
        points = [(5 + 2 * i, 0.1 + 0.08 * j) for i in range(10) for j in range(10)]
        for idx, (db, r) in enumerate(points):
            rho = 10.0 ** (db / 10.0)
            est = outage_probability(
                self.scalar, r=r, rho=rho, n_samples=20_000, seed=1000 + idx
            )
            covered += est.ci_low <= k1_outage_oracle(rho, r) <= est.ci_high
        assert covered >= 93

    def test_r_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            outage_probability(self.scalar, r=1.5, rho=10.0, n_samples=10, seed=1)
        with pytest.raises(OutOfRangeError):
            outage_probability(self.scalar, r=0.5, rho=0.0, n_samples=10, seed=1)

    def test_parallel_different_runs(self):
        s = Scenario(
            kind="parallel-different",
            weights=validate_weights((2 / 3, 1 / 3)),
            profile=__import__("wdmt").AntennaProfile((2, 1)),
        )
        est = outage_probability(s, r=1.0, rho=100.0, n_samples=50_000, seed=67)
        assert 0.0 < est.p_hat < 1.0


class TestConfidenceInterval:
    def test_normal_regime(self):
        lo, hi = confidence_interval(500, 10_000)
        p = 0.05
        half = 1.959963984540054 * math.sqrt(p * (1 - p) / 10_000)
        assert lo == pytest.approx(p - half, rel=1e-9)
        assert hi == pytest.approx(p + half, rel=1e-9)

    def test_clopper_pearson_regime(self):
        lo, hi = confidence_interval(0, 1000)
        assert lo == 0.0
        assert hi == pytest.approx(1 - 0.025 ** (1 / 1000), rel=1e-6)
        lo, hi = confidence_interval(5, 1000)
        assert 0.0 < lo < 5 / 1000 < hi < 1.0

    def test_estimate_invariants(self):
        with pytest.raises(ValueError):
            OutageEstimate(rho=10.0, r=0.5, n_samples=100, n_outages=200,
                           ci_low=0.0, ci_high=1.0)
        with pytest.raises(ValueError):
            OutageEstimate(rho=10.0, r=0.5, n_samples=100, n_outages=50,
                           ci_low=0.9, ci_high=1.0)


class TestValidateGainDistribution:
    def test_scalar_channel_is_unit_exponential(self):
        s = Scenario(kind="parallel-identical", weights=validate_weights((1.0,)), n_t=1)
        rep = validate_gain_distribution(s, 0, 200_000, seed=71)
        assert rep.shape == 1
        assert rep.mean_rel_err < 0.01
        assert rep.var_rel_err < 0.03

    def test_index_out_of_range(self):
        s = Scenario(kind="bc-zf", weights=validate_weights((0.5, 0.5)), m=3)
        with pytest.raises(OutOfRangeError):
            validate_gain_distribution(s, 2, 1000, seed=1)
