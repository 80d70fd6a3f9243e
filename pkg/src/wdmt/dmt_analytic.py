"""Closed-form DMT curves for weighted parallel channels and for MISO
broadcast channels under zero-forcing and dirty-paper precoding.

The diversity exponent at multiplexing gain r solves the linear program

    minimize    sum_k n_k * alpha_k
    subject to  sum_k mu_k * alpha_k >= 1 - r/K,   0 <= alpha_k <= 1.

Its value as a function of r is piecewise linear; the functions below emit
the corner points directly and :func:`lp_greedy` returns the minimizing
exponent vector via the sequential clipping rule. Both are certified
against the independent solvers in :mod:`wdmt.lp_oracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    AntennaProfile,
    DimensionMismatchError,
    DmtCurve,
    OutOfRangeError,
    Scenario,
    TooManyUsersError,
    Weights,
    ordering,
    stable_desc_order,
    validate_weights,
)

__all__ = [
    "ExponentSolution",
    "dmt_identical",
    "dmt_different",
    "dmt_bc_zf",
    "dmt_bc_dpc",
    "eval_dmt",
    "lp_greedy",
    "optimal_weights",
    "curve_for_scenario",
]


@dataclass(frozen=True)
class ExponentSolution:
    """Optimal per-channel outage exponents alpha (in [0,1]) and the
    resulting diversity value d = sum_k n_k * alpha_k."""

    alpha: tuple[float, ...]
    d: float

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        if any(x < -1e-12 or x > 1.0 + 1e-12 for x in a):
            raise ValueError(f"exponents must lie in [0, 1], got {a}")
        a = tuple(min(1.0, max(0.0, x)) for x in a)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "d", float(self.d))


def _corner_rates(k: int, mu_desc) -> list[float]:
    """Corner abscissae r(i) = K * (sum of the i smallest ordered weights).

    Computing the tail sum instead of 1 minus the head sum makes r(0) = 0
    exact; r(K) = K is pinned exactly as its own case.
    """
    rates = [0.0]
    for i in range(1, k):
        rates.append(k * math.fsum(mu_desc[k - i :]))
    rates.append(float(k))
    return rates


def dmt_identical(k: int, n_t: int, weights: Weights) -> DmtCurve:
    """DMT of K parallel n_t x 1 MISO channels with the given weights.

    Corners: r(i) = K(1 - sum of the K-i largest weights), d(i) = n_t(K-i),
    for i = 0..K, with r(K) = K. Weights may be passed unordered; they are
    sorted descending internally.
    """
    if len(weights) != k:
        raise DimensionMismatchError(f"k = {k} but {len(weights)} weights given")
    if int(n_t) < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    n_t = int(n_t)
    mu_desc = sorted(weights.mu, reverse=True)
    rates = _corner_rates(k, mu_desc)
    corners = tuple((rates[i], float(n_t * (k - i))) for i in range(k + 1))
    return DmtCurve(corners)


def dmt_different(profile: AntennaProfile, weights: Weights) -> DmtCurve:
    """DMT of K parallel MISO channels with per-channel antenna counts.

    Channels are first sorted by weight-per-antenna (descending, stable);
    with ordered weights mu_hat and counts n_hat the corners are
    r(i) = K(1 - sum_{j<=K-i} mu_hat_j) and d(i) = sum_{j<=K-i} n_hat_j,
    with r(K) = K and d(K) = 0. A uniform profile reduces to
    :func:`dmt_identical`.
    """
    if len(weights) != len(profile):
        raise DimensionMismatchError(
            f"{len(weights)} weights vs {len(profile)} antenna counts"
        )
    k = len(profile)
    t = ordering(weights, profile)
    mu_hat = t.apply(weights.mu)
    n_hat = t.apply(profile.n)
    rates = _corner_rates(k, mu_hat)
    corners = tuple((rates[i], float(sum(n_hat[: k - i]))) for i in range(k + 1))
    return DmtCurve(corners)


def dmt_bc_zf(m: int, k: int, weights: Weights) -> DmtCurve:
    """DMT of an m-antenna broadcast channel with K single-antenna users
    under zero-forcing precoding.

    Nulling the other K-1 users leaves each user an effective
    (m - K + 1) x 1 channel, so the curve equals
    ``dmt_identical(k, m - k + 1, weights)``.
    """
    m = int(m)
    if len(weights) != k:
        raise DimensionMismatchError(f"k = {k} but {len(weights)} weights given")
    if k > m:
        raise TooManyUsersError(f"{k} users exceed {m} transmit antennas")
    return dmt_identical(k, m - k + 1, weights)


def dmt_bc_dpc(m: int, k: int, weights: Weights) -> DmtCurve:
    """DMT of an m-antenna broadcast channel with K single-antenna users
    under dirty-paper (successive) precoding.

    Users are indexed in decreasing-weight order (ties by ascending index);
    the user encoded j-th (1-based) sees an effective (m - j + 1) x 1
    channel, and the curve is ``dmt_different`` over that profile.
    """
    m = int(m)
    if len(weights) != k:
        raise DimensionMismatchError(f"k = {k} but {len(weights)} weights given")
    if k > m:
        raise TooManyUsersError(f"{k} users exceed {m} transmit antennas")
    order = stable_desc_order(weights.mu)
    profile = AntennaProfile(tuple(m - j for j in range(k)))
    mu_sorted = Weights(tuple(weights.mu[i] for i in order))
    return dmt_different(profile, mu_sorted)


def eval_dmt(curve: DmtCurve, r: float) -> float:
    """Diversity gain at multiplexing gain ``r`` (linear interpolation,
    exact at corners). Raises ``OutOfRangeError`` outside [0, K]."""
    return curve.evaluate(r)


def lp_greedy(profile: AntennaProfile, weights: Weights, r: float) -> ExponentSolution:
    """Minimizing exponent vector by greedy sequential clipping.

    In weight-per-antenna order, each channel absorbs as much of the rate
    constraint 1 - r/K as its box allows:

        x_hat_i = min[ (1 - r/K - sum_{j<i} mu_hat_j)^+ / mubar_hat_i , n_hat_i ]

    with alpha = x / n returned in the original channel indexing. The
    objective equals the curve value: ``eval_dmt(dmt_different(...), r)``.
    """
    if len(weights) != len(profile):
        raise DimensionMismatchError(
            f"{len(weights)} weights vs {len(profile)} antenna counts"
        )
    k = len(profile)
    if r < 0.0 or r > k:
        raise OutOfRangeError(f"r = {r} outside [0, {k}]")
    if r == 0.0:
        return ExponentSolution((1.0,) * k, float(profile.total_diversity()))
    t = ordering(weights, profile)
    mu_hat = t.apply(weights.mu)
    n_hat = t.apply(profile.n)
    bound = 1.0 - r / k
    x_hat = []
    consumed = 0.0  # sum of mu_hat over fully saturated channels
    for i in range(k):
        per_antenna = mu_hat[i] / n_hat[i]
        residual = bound - consumed
        x_hat.append(min(max(residual, 0.0) / per_antenna, float(n_hat[i])))
        consumed += mu_hat[i]
    alpha_hat = tuple(x / n for x, n in zip(x_hat, n_hat))
    alpha = t.inverse().apply(alpha_hat)
    return ExponentSolution(alpha, math.fsum(x_hat))


def optimal_weights(profile: AntennaProfile) -> Weights:
    """Weights proportional to antenna counts, mu_i = n_i / sum_j n_j.

    These maximize the DMT pointwise: the resulting curve is the straight
    line d(r) = d(0) (1 - r/K).
    """
    total = profile.total_diversity()
    return validate_weights(tuple(n / total for n in profile.n))


def curve_for_scenario(scenario: Scenario) -> DmtCurve:
    """Analytic DMT curve for any scenario kind."""
    k = scenario.k
    if scenario.kind == "parallel-identical":
        return dmt_identical(k, scenario.n_t, scenario.weights)
    if scenario.kind == "parallel-different":
        return dmt_different(scenario.profile, scenario.weights)
    if scenario.kind == "bc-zf":
        return dmt_bc_zf(scenario.m, k, scenario.weights)
    return dmt_bc_dpc(scenario.m, k, scenario.weights)
