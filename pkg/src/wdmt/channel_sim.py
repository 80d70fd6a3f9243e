"""Rayleigh channel sampling, precoder effective gains via null-space
projections, finite-SNR weighted sum capacity, and sharded Monte Carlo
outage estimation.

Conventions
-----------
* Channel entries are CN(0,1): real and imaginary parts independent
  N(0, 1/2), so |entry|^2 ~ Exp(1) and a squared row norm over m entries
  is Gamma(m, 1).
* Capacities are in nats; SNR ``rho`` is linear here (the CLI converts
  from dB exactly once).
* The finite-SNR capacity keeps the weights inside the logarithm,
  K * sum_i mu_i log(1 + mu_i rho gamma_i), so simulations test the
  asymptotic slope claims instead of assuming them.
* Monte Carlo runs are split into shards with independently derived
  deterministic substreams; shard counts combine by addition, so results
  are a pure function of (scenario, r, rho, n_samples, seed, shards) and
  never depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import (
    DimensionMismatchError,
    OutOfRangeError,
    RankDeficientError,
    Scenario,
    TooManyUsersError,
    Weights,
)

__all__ = [
    "ChannelMatrix",
    "EffectiveGains",
    "OutageEstimate",
    "GainDistributionReport",
    "sample_channel",
    "zf_gains",
    "dpc_gains",
    "weighted_capacity",
    "outage_probability",
    "validate_gain_distribution",
    "confidence_interval",
]

_CHUNK = 1 << 18
# Squared-norm ratio below which a projected row counts as linearly
# dependent on its projection set (a measure-zero event for CN(0,1) rows).
_RANK_EPS = 1e-24
_SQRT_HALF = 1.0 / math.sqrt(2.0)
_MIN_NORMAL_EVENTS = 20  # below this the normal CI is replaced by Clopper-Pearson
_Z_95 = float(stats.norm.ppf(0.975))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ChannelMatrix:
    """K x M complex fading realization; rows are the per-user channels."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 2 or h.size == 0:
            raise ValueError(f"expected a K x M matrix, got shape {h.shape}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_tx(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class EffectiveGains:
    """Nonnegative per-channel effective power gains."""

    gamma: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(x) for x in self.gamma)
        if any(x < 0.0 for x in g):
            raise ValueError(f"gains must be >= 0, got {g}")
        object.__setattr__(self, "gamma", g)

    def __len__(self) -> int:
        return len(self.gamma)


@dataclass(frozen=True)
class OutageEstimate:
    """Empirical outage probability at one (SNR, multiplexing gain) point."""

    rho: float
    r: float
    n_samples: int
    n_outages: int
    ci_low: float
    ci_high: float
    n_discarded: int = 0

    def __post_init__(self):
        if self.n_samples < 1 or not 0 <= self.n_outages <= self.n_samples:
            raise ValueError(
                f"bad counts: {self.n_outages} outages of {self.n_samples}"
            )
        if not self.ci_low - 1e-12 <= self.p_hat <= self.ci_high + 1e-12:
            raise ValueError("confidence interval does not cover the estimate")

    @property
    def p_hat(self) -> float:
        return self.n_outages / self.n_samples

    @property
    def rho_db(self) -> float:
        return 10.0 * math.log10(self.rho)


@dataclass(frozen=True)
class GainDistributionReport:
    """Empirical moments and KS distance of one gain against Gamma(shape, 1)."""

    index: int
    shape: int
    n_samples: int
    mean: float
    variance: float
    mean_rel_err: float
    var_rel_err: float
    ks_stat: float


def sample_channel(m: int, k: int, rng) -> ChannelMatrix:
    """Draw a K x M channel with i.i.d. CN(0,1) entries.

    ``rng`` may be an integer seed, a SeedSequence, or a Generator; the
    same generator state always yields the same matrix.
    """
    if m < 1 or k < 1:
        raise ValueError(f"need m >= 1 and k >= 1, got m={m}, k={k}")
    g = _as_rng(rng)
    h = (g.standard_normal((k, m)) + 1j * g.standard_normal((k, m))) * _SQRT_HALF
    return ChannelMatrix(h)


def _sample_rows(rng: np.random.Generator, n: int, k: int, m: int) -> np.ndarray:
    re = rng.standard_normal((n, k, m))
    im = rng.standard_normal((n, k, m))
    return (re + 1j * im) * _SQRT_HALF


def _sq_norm(v: np.ndarray) -> np.ndarray:
    return np.einsum("nm,nm->n", v.conj(), v).real


def _project_out(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Remove the components of each row of v along an orthonormal basis.

    Two passes for numerical re-orthogonalization.
    """
    for _ in range(2):
        for q in basis:
            coef = np.einsum("nm,nm->n", q.conj(), v)
            v = v - coef[:, None] * q
    return v


def _orthonormal_basis(rows: np.ndarray, indices) -> tuple[list[np.ndarray], np.ndarray]:
    """Batched Gram-Schmidt over the selected row indices.

    Returns the orthonormal basis vectors and a boolean mask of samples
    where some selected row was numerically dependent on its predecessors.
    """
    basis: list[np.ndarray] = []
    bad = np.zeros(rows.shape[0], dtype=bool)
    for j in indices:
        v = _project_out(rows[:, j, :].copy(), basis)
        norm_sq = _sq_norm(v)
        ref = _sq_norm(rows[:, j, :])
        tiny = norm_sq <= _RANK_EPS * ref
        bad |= tiny
        scale = np.sqrt(np.where(tiny, 1.0, norm_sq))
        basis.append(v / scale[:, None])
    return basis, bad


def _zf_gains_batch(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """gamma_i = squared norm of row i projected onto the orthogonal
    complement of all other rows. rows: (n, k, m) -> (gains (n, k), ok (n,))."""
    n, k, _ = rows.shape
    gains = np.empty((n, k))
    bad = np.zeros(n, dtype=bool)
    for i in range(k):
        basis, dep = _orthonormal_basis(rows, [j for j in range(k) if j != i])
        bad |= dep
        gains[:, i] = _sq_norm(_project_out(rows[:, i, :].copy(), basis))
    return gains, ~bad


def _dpc_gains_batch(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """gamma_i = squared norm of row i projected onto the orthogonal
    complement of rows 0..i-1 (successive encoding along the row order)."""
    n, k, _ = rows.shape
    gains = np.empty((n, k))
    basis: list[np.ndarray] = []
    bad = np.zeros(n, dtype=bool)
    for i in range(k):
        v = _project_out(rows[:, i, :].copy(), basis)
        norm_sq = _sq_norm(v)
        gains[:, i] = norm_sq
        if i < k - 1:  # last row's direction is never projected against
            ref = _sq_norm(rows[:, i, :])
            tiny = norm_sq <= _RANK_EPS * ref
            bad |= tiny
            scale = np.sqrt(np.where(tiny, 1.0, norm_sq))
            basis.append(v / scale[:, None])
    return gains, ~bad


def zf_gains(channel: ChannelMatrix) -> EffectiveGains:
    """Zero-forcing effective gains of one realization.

    gamma_i is the squared norm of the projection of row i onto the null
    space of the other K-1 rows, computed from a re-orthogonalized
    Gram-Schmidt basis of the interferers.

    Raises ``RankDeficientError`` if the interfering rows are numerically
    dependent and ``TooManyUsersError`` if K > M.
    """
    if channel.n_users > channel.n_tx:
        raise TooManyUsersError(
            f"{channel.n_users} users exceed {channel.n_tx} transmit antennas"
        )
    gains, ok = _zf_gains_batch(channel.h[None, :, :])
    if not ok[0]:
        raise RankDeficientError("interfering rows are numerically dependent")
    return EffectiveGains(tuple(gains[0]))


def dpc_gains(channel: ChannelMatrix, encode_order) -> EffectiveGains:
    """Dirty-paper effective gains of one realization under ``encode_order``.

    The user encoded first keeps its full squared row norm; each later user
    is projected onto the null space of all previously encoded rows. Gains
    are returned indexed by user (not by encode position).
    """
    if channel.n_users > channel.n_tx:
        raise TooManyUsersError(
            f"{channel.n_users} users exceed {channel.n_tx} transmit antennas"
        )
    order = tuple(int(i) for i in encode_order)
    if sorted(order) != list(range(channel.n_users)):
        raise ValueError(f"encode_order must permute 0..{channel.n_users - 1}")
    gains, ok = _dpc_gains_batch(channel.h[None, list(order), :])
    if not ok[0]:
        raise RankDeficientError("previously encoded rows are numerically dependent")
    gamma = [0.0] * channel.n_users
    for pos, user in enumerate(order):
        gamma[user] = float(gains[0, pos])
    return EffectiveGains(tuple(gamma))


def weighted_capacity(gains: EffectiveGains, weights: Weights, rho: float) -> float:
    """Weighted sum rate K * sum_i mu_i log(1 + mu_i rho gamma_i), in nats.

    Power is allocated proportionally to the weights, which is what places
    mu_i inside the logarithm; the leading K matches the outage definition
    used throughout (multiplexing gain ranges over [0, K]).
    """
    if len(gains) != len(weights):
        raise DimensionMismatchError(f"{len(gains)} gains vs {len(weights)} weights")
    if rho <= 0.0:
        raise OutOfRangeError(f"rho must be > 0, got {rho}")
    k = len(weights)
    return k * math.fsum(
        m * math.log1p(m * rho * g) for m, g in zip(weights.mu, gains.gamma)
    )


def _mu_columns(scenario: Scenario) -> np.ndarray:
    """Weights aligned with the gain columns (encode order for bc-dpc)."""
    mu = scenario.weights.mu
    return np.asarray([mu[i] for i in scenario.encode_order()])


def _chunk_gains(
    scenario: Scenario, rng: np.random.Generator, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n realizations and return (gains (n, k), valid mask (n,)).

    Gain columns follow ``scenario.encode_order()`` and pair with
    ``_mu_columns``.
    """
    k = scenario.k
    if scenario.kind == "parallel-identical":
        rows = _sample_rows(rng, n, k, scenario.n_t)
        gains = np.einsum("nkm,nkm->nk", rows.conj(), rows).real
        return gains, np.ones(n, dtype=bool)
    if scenario.kind == "parallel-different":
        gains = np.empty((n, k))
        for i, n_i in enumerate(scenario.profile.n):
            rows = _sample_rows(rng, n, 1, n_i)
            gains[:, i] = _sq_norm(rows[:, 0, :])
        return gains, np.ones(n, dtype=bool)
    rows = _sample_rows(rng, n, k, scenario.m)
    if scenario.kind == "bc-zf":
        return _zf_gains_batch(rows)
    return _dpc_gains_batch(rows[:, list(scenario.encode_order()), :])


def confidence_interval(
    n_outages: int, n_samples: int, level: float = 0.95
) -> tuple[float, float]:
    """Binomial CI for the outage probability.

    Normal approximation on the count; exact Clopper-Pearson whenever
    fewer than 20 outages were observed.
    """
    p = n_outages / n_samples
    if n_outages >= _MIN_NORMAL_EVENTS:
        z = _Z_95 if level == 0.95 else float(stats.norm.ppf(0.5 + level / 2))
        half = z * math.sqrt(p * (1.0 - p) / n_samples)
        return max(0.0, p - half), min(1.0, p + half)
    alpha = 1.0 - level
    low = 0.0
    if n_outages > 0:
        low = float(stats.beta.ppf(alpha / 2, n_outages, n_samples - n_outages + 1))
    high = 1.0
    if n_outages < n_samples:
        high = float(
            stats.beta.ppf(1 - alpha / 2, n_outages + 1, n_samples - n_outages)
        )
    return low, high


def outage_probability(
    scenario: Scenario,
    r: float,
    rho: float,
    n_samples: int,
    seed,
    shards: int = 1,
) -> OutageEstimate:
    """Monte Carlo estimate of P{weighted sum capacity <= r log rho}.

    The sample budget is split across ``shards`` deterministic substreams
    derived from ``seed``; outage counts are summed, so the estimate is a
    pure function of (scenario, r, rho, n_samples, seed, shards).
    Rank-deficient draws (probability zero) are discarded and counted in
    ``n_discarded``.
    """
    k = scenario.k
    if not 0.0 <= r <= k:
        raise OutOfRangeError(f"r = {r} outside [0, {k}]")
    if rho <= 0.0:
        raise OutOfRangeError(f"rho must be > 0, got {rho}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if shards < 1:
        raise ValueError(f"shards must be >= 1, got {shards}")

    threshold = r * math.log(rho)
    mu = _mu_columns(scenario)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    quota, extra = divmod(n_samples, shards)

    outages = used = discarded = 0
    for shard_index, child in enumerate(root.spawn(shards)):
        remaining = quota + (1 if shard_index < extra else 0)
        if remaining == 0:
            continue
        rng = np.random.default_rng(child)
        while remaining > 0:
            n = min(_CHUNK, remaining)
            remaining -= n
            gains, ok = _chunk_gains(scenario, rng, n)
            capacity = k * (mu * np.log1p(mu * rho * gains)).sum(axis=1)
            outages += int((capacity[ok] <= threshold).sum())
            used += int(ok.sum())
            discarded += n - int(ok.sum())

    if used == 0:
        raise RankDeficientError("all samples were rank deficient")
    ci_low, ci_high = confidence_interval(outages, used)
    return OutageEstimate(
        rho=float(rho),
        r=float(r),
        n_samples=used,
        n_outages=outages,
        ci_low=ci_low,
        ci_high=ci_high,
        n_discarded=discarded,
    )


def validate_gain_distribution(
    scenario: Scenario, index: int, n_samples: int, seed
) -> GainDistributionReport:
    """Compare one empirical gain against its Gamma(shape, 1) law.

    ``index`` selects the gain column in encode order (for bc-dpc, position
    0 is the first-encoded, largest-weight user). Reports relative errors
    of mean and variance plus the Kolmogorov-Smirnov distance.
    """
    if not 0 <= index < scenario.k:
        raise OutOfRangeError(f"index {index} outside 0..{scenario.k - 1}")
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    shape = scenario.gain_shapes()[index]
    rng = np.random.default_rng(
        seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    )
    parts = []
    remaining = n_samples
    while remaining > 0:
        n = min(_CHUNK, remaining)
        remaining -= n
        gains, ok = _chunk_gains(scenario, rng, n)
        parts.append(gains[ok, index])
    sample = np.concatenate(parts)
    mean = float(sample.mean())
    variance = float(sample.var())
    ks = float(stats.kstest(sample, stats.gamma(shape).cdf).statistic)
    return GainDistributionReport(
        index=index,
        shape=shape,
        n_samples=int(sample.size),
        mean=mean,
        variance=variance,
        mean_rel_err=abs(mean - shape) / shape,
        var_rel_err=abs(variance - shape) / shape,
        ks_stat=ks,
    )
