import math

import numpy as np
import pytest

from wdmt import (
    AntennaProfile,
    LpInstance,
    TooLargeError,
    lp_greedy,
    lp_grid,
    lp_vertex,
    validate_weights,
)


def random_instance(rng, k_max=4, n_max=4):
    k = int(rng.integers(1, k_max + 1))
    profile = AntennaProfile(tuple(int(x) for x in rng.integers(1, n_max + 1, k)))
    raw = rng.random(k) + 0.02
    weights = validate_weights(tuple(raw / raw.sum()))
    return profile, weights


class TestLpInstance:
    def test_alpha_form_fields(self):
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 1)), validate_weights((0.5, 0.5)), 1.0
        )
        assert inst.costs == (2.0, 1.0)
        assert inst.weights == (0.5, 0.5)
        assert inst.bound == 0.5
        assert inst.upper == (1.0, 1.0)

    def test_x_form_fields(self):
        inst = LpInstance.x_form(
            AntennaProfile((2, 1)), validate_weights((0.5, 0.5)), 1.0
        )
        assert inst.costs == (1.0, 1.0)
        assert inst.weights == (0.25, 0.5)
        assert inst.upper == (2.0, 1.0)

    def test_rejects_nonpositive_coefficients(self):
        with pytest.raises(ValueError):
            LpInstance(costs=(1.0, 0.0), weights=(0.5, 0.5), bound=0.5, upper=(1.0, 1.0))

    def test_rejects_bad_bound(self):
        with pytest.raises(ValueError):
            LpInstance(costs=(1.0,), weights=(1.0,), bound=1.5, upper=(1.0,))


class TestLpVertex:
    def test_uniform_pair_midpoint(self):
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 2)), validate_weights((0.5, 0.5)), 1.0
        )
        assert lp_vertex(inst).d == pytest.approx(2.0, abs=1e-12)

    def test_asymmetric_pair_shuts_the_wide_channel(self):
        # four boundary patterns by hand: (0,0) infeasible, (1,0) d=2,
        # (0,1) d=1, (1,1) d=3; plus fractional candidates; optimum is (0,1)
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 1)), validate_weights((0.5, 0.5)), 1.0
        )
        sol = lp_vertex(inst)
        assert sol.d == pytest.approx(1.0, abs=1e-12)
        assert sol.alpha == pytest.approx((0.0, 1.0), abs=1e-12)

    def test_zero_bound_gives_zero_vector(self):
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 1)), validate_weights((0.5, 0.5)), 2.0
        )
        sol = lp_vertex(inst)
        assert sol.d == 0.0
        assert sol.alpha == (0.0, 0.0)

    def test_size_limit(self):
        k = 17
        with pytest.raises(TooLargeError):
            lp_vertex(
                LpInstance(
                    costs=(1.0,) * k,
                    weights=(1.0 / k,) * k,
                    bound=0.5,
                    upper=(1.0,) * k,
                )
            )

    def test_alpha_and_x_forms_agree(self):
        rng = np.random.default_rng(81)
        for _ in range(200):
            profile, weights = random_instance(rng)
            r = float(rng.uniform(0, len(profile)))
            a = lp_vertex(LpInstance.alpha_form(profile, weights, r))
            b = lp_vertex(LpInstance.x_form(profile, weights, r))
            assert abs(a.d - b.d) <= 1e-9

    def test_complementary_slackness(self):
        # either the rate inequality is tight or every exponent saturates at 1
        rng = np.random.default_rng(82)
        for _ in range(200):
            profile, weights = random_instance(rng)
            r = float(rng.uniform(0, len(profile)))
            inst = LpInstance.alpha_form(profile, weights, r)
            sol = lp_vertex(inst)
            slack = math.fsum(
                w * a for w, a in zip(inst.weights, sol.alpha)
            ) - inst.bound
            assert slack >= -1e-9
            assert slack <= 1e-9 or all(a == 1.0 for a in sol.alpha)

    def test_matches_greedy(self):
        rng = np.random.default_rng(83)
        for _ in range(300):
            profile, weights = random_instance(rng)
            k = len(profile)
            for r in np.linspace(0, k, 11):
                greedy = lp_greedy(profile, weights, float(r))
                vertex = lp_vertex(LpInstance.alpha_form(profile, weights, float(r)))
                assert abs(greedy.d - vertex.d) <= 1e-9


class TestLpGrid:
    def test_within_stated_bound_of_vertex(self):
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 1)), validate_weights((0.5, 0.5)), 1.0
        )
        value = lp_grid(inst, 200)
        assert 1.0 - 1e-9 <= value <= 1.0 + 2 * 2 / 200 + 1e-9

    def test_full_bound_is_exact(self):
        # bound 1 forces every lattice exponent to 1, so the value is the
        # total antenna count exactly
        inst = LpInstance.alpha_form(
            AntennaProfile((3, 2, 1)), validate_weights((0.5, 0.3, 0.2)), 0.0
        )
        assert lp_grid(inst, 100) == 6.0

    def test_uniform_pair_close_to_two(self):
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 2)), validate_weights((0.5, 0.5)), 1.0
        )
        assert abs(lp_grid(inst, 200) - 2.0) <= 0.02

    def test_size_and_resolution_limits(self):
        inst5 = LpInstance(
            costs=(1.0,) * 5,
            weights=(0.2,) * 5,
            bound=0.5,
            upper=(1.0,) * 5,
        )
        with pytest.raises(TooLargeError):
            lp_grid(inst5, 100)
        inst = LpInstance.alpha_form(
            AntennaProfile((2, 1)), validate_weights((0.5, 0.5)), 1.0
        )
        with pytest.raises(ValueError):
            lp_grid(inst, 49)

    def test_never_below_vertex_optimum(self):
        rng = np.random.default_rng(91)
        for _ in range(100):
            profile, weights = random_instance(rng)
            r = float(rng.uniform(0, len(profile)))
            inst = LpInstance.alpha_form(profile, weights, r)
            assert lp_grid(inst, 80) >= lp_vertex(inst).d - 1e-9

    def test_split_independence(self):
        # the lattice minimum must not depend on how dimensions are halved,
        # so reversing the coordinate order must give the same value
        rng = np.random.default_rng(92)
        for _ in range(50):
            profile, weights = random_instance(rng)
            r = float(rng.uniform(0, len(profile)))
            inst = LpInstance.alpha_form(profile, weights, r)
            flipped = LpInstance(
                costs=inst.costs[::-1],
                weights=inst.weights[::-1],
                bound=inst.bound,
                upper=inst.upper[::-1],
            )
            assert lp_grid(inst, 80) == pytest.approx(lp_grid(flipped, 80), abs=1e-12)
