"""Core domain types for diversity-multiplexing tradeoff (DMT) analysis of
weighted parallel fading channels and MISO broadcast precoding.

All types are immutable and validated at construction; every operation is
pure, so values can be shared freely across threads and processes.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

__all__ = [
    "WEIGHT_SUM_TOL",
    "SCENARIO_KINDS",
    "DmtError",
    "NonPositiveWeightError",
    "BadSumError",
    "DimensionMismatchError",
    "TooManyUsersError",
    "OutOfRangeError",
    "RankDeficientError",
    "TooLargeError",
    "Weights",
    "AntennaProfile",
    "OrderingT",
    "DmtCurve",
    "Scenario",
    "validate_weights",
    "ordering",
]

# Acceptable deviation of a raw weight sum from 1 before rejection.
WEIGHT_SUM_TOL = 1e-9

SCENARIO_KINDS = ("parallel-identical", "parallel-different", "bc-zf", "bc-dpc")


class DmtError(Exception):
    """Base class for all domain errors raised by this package."""


class NonPositiveWeightError(DmtError):
    """A weight entry is zero or negative."""


class BadSumError(DmtError):
    """Weight entries do not sum to 1 within tolerance."""


class DimensionMismatchError(DmtError):
    """Lengths of weights / antenna profile / gain vectors disagree."""


class TooManyUsersError(DmtError):
    """Broadcast setup with more single-antenna users than transmit antennas."""


class OutOfRangeError(DmtError):
    """A bounded argument (multiplexing gain, SNR, index) is outside its range."""


class RankDeficientError(DmtError):
    """Channel rows are numerically linearly dependent (measure-zero event)."""


class TooLargeError(DmtError):
    """Problem size exceeds the enforced enumeration limit."""


@dataclass(frozen=True)
class Weights:
    """Positive per-channel (or per-user) weights summing to 1.

    Construction validates the invariants but does not renormalize; use
    :func:`validate_weights` to build from raw input.
    """

    mu: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(x) for x in self.mu))
        if len(self.mu) < 1:
            raise BadSumError("weight vector must have at least one entry")
        if any(x <= 0.0 for x in self.mu):
            raise NonPositiveWeightError(f"all weights must be > 0, got {self.mu}")
        total = math.fsum(self.mu)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise BadSumError(
                f"weights sum to {total!r}; expected 1 within {WEIGHT_SUM_TOL}"
            )

    @property
    def k(self) -> int:
        return len(self.mu)

    def __len__(self) -> int:
        return len(self.mu)

    def __iter__(self):
        return iter(self.mu)


def validate_weights(raw) -> Weights:
    """Validate a raw weight vector and renormalize its sum to exactly 1.0.

    Entries must be strictly positive and sum to 1 within ``WEIGHT_SUM_TOL``.
    After acceptance the vector is rescaled so the float sum lands exactly on
    1.0, which keeps downstream corner-point formulas drift-free and makes
    this function idempotent.

    Raises
    ------
    NonPositiveWeightError
        If any entry is <= 0.
    BadSumError
        If the vector is empty or its sum deviates from 1 beyond tolerance.
    """
    mu = tuple(float(x) for x in raw)
    if len(mu) < 1:
        raise BadSumError("weight vector must have at least one entry")
    if any(x <= 0.0 for x in mu):
        raise NonPositiveWeightError(f"all weights must be > 0, got {mu}")
    total = math.fsum(mu)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise BadSumError(
            f"weights sum to {total!r}; expected 1 within {WEIGHT_SUM_TOL}"
        )
    if total != 1.0:
        mu = tuple(x / total for x in mu)
        if math.fsum(mu) != 1.0 and len(mu) > 1:
            # Division can leave the sum an ulp off 1.0. Recompute the
            # smallest entry as the complement of the others; since that
            # entry is <= 0.5 the subtraction is exact and the new sum
            # rounds to exactly 1.0.
            j = min(range(len(mu)), key=lambda i: (mu[i], i))
            rest = math.fsum(mu[:j] + mu[j + 1 :])
            adjusted = 1.0 - rest
            if adjusted > 0.0:
                mu = mu[:j] + (adjusted,) + mu[j + 1 :]
    return Weights(mu)


@dataclass(frozen=True)
class AntennaProfile:
    """Transmit antenna count per parallel channel (all counts >= 1)."""

    n: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(x) for x in self.n)
        if len(counts) < 1:
            raise ValueError("antenna profile must have at least one channel")
        if any(c < 1 for c in counts) or any(x != c for x, c in zip(self.n, counts)):
            raise ValueError(f"antenna counts must be integers >= 1, got {self.n}")
        object.__setattr__(self, "n", counts)

    @property
    def k(self) -> int:
        return len(self.n)

    def total_diversity(self) -> int:
        """Sum of all antenna counts, the diversity available at zero rate."""
        return sum(self.n)

    @staticmethod
    def uniform(k: int, n_t: int) -> "AntennaProfile":
        return AntennaProfile((n_t,) * k)

    def __len__(self) -> int:
        return len(self.n)


@dataclass(frozen=True)
class OrderingT:
    """Stable permutation sorting channels by weight-per-antenna, descending.

    ``perm[j]`` is the original 0-based channel index placed at sorted
    position ``j``. Ties are broken by ascending original index.
    """

    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"not a permutation of 0..{len(perm) - 1}: {perm}")
        object.__setattr__(self, "perm", perm)

    @property
    def k(self) -> int:
        return len(self.perm)

    def apply(self, seq) -> tuple:
        """Reorder ``seq`` into sorted position: result[j] = seq[perm[j]]."""
        values = tuple(seq)
        if len(values) != len(self.perm):
            raise DimensionMismatchError(
                f"sequence of length {len(values)} vs permutation of {len(self.perm)}"
            )
        return tuple(values[p] for p in self.perm)

    def inverse(self) -> "OrderingT":
        inv = [0] * len(self.perm)
        for j, p in enumerate(self.perm):
            inv[p] = j
        return OrderingT(tuple(inv))


# Relative gap below which two sort keys count as tied. Exact rational ties
# (e.g. 0.6/3 vs 0.4/2) survive float rounding only to within a few ulps, so
# ties must be detected with slack or the stable tie-break never fires.
_TIE_RTOL = 1e-12


def stable_desc_order(values, tol: float = _TIE_RTOL) -> tuple[int, ...]:
    """Indices sorting ``values`` descending; near-ties by ascending index.

    Values within relative ``tol`` of the head of their run are grouped as
    tied and emitted in ascending original order.
    """
    vals = [float(v) for v in values]
    by_value = sorted(range(len(vals)), key=lambda i: (-vals[i], i))
    groups: list[list[int]] = []
    for i in by_value:
        if groups:
            head = vals[groups[-1][0]]
            if abs(vals[i] - head) <= tol * max(abs(vals[i]), abs(head)):
                groups[-1].append(i)
                continue
        groups.append([i])
    return tuple(i for group in groups for i in sorted(group))


def ordering(weights: Weights, profile: AntennaProfile) -> OrderingT:
    """Permutation sorting channels by mu_i / n_i in descending order.

    Stable: channels with equal weight-per-antenna (up to float noise) keep
    their relative order.

    Raises
    ------
    DimensionMismatchError
        If the weight and profile lengths differ.
    """
    if len(weights) != len(profile):
        raise DimensionMismatchError(
            f"{len(weights)} weights vs {len(profile)} antenna counts"
        )
    per_antenna = [m / n for m, n in zip(weights.mu, profile.n)]
    return OrderingT(stable_desc_order(per_antenna))


@dataclass(frozen=True)
class DmtCurve:
    """Piecewise-linear diversity-multiplexing tradeoff.

    ``corners`` are the breakpoints (r_i, d_i) with r strictly increasing
    from 0, d non-increasing, and d = 0 at the final corner. Collinear
    corners are retained on purpose: they carry the structural breakpoints
    of the generating formulas and keep corner counts deterministic.
    """

    corners: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(r), float(d)) for r, d in self.corners)
        if len(pts) < 2:
            raise ValueError("a DMT curve needs at least two corners")
        if pts[0][0] != 0.0:
            raise ValueError(f"first corner must be at r = 0, got {pts[0]}")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError(f"corner rates must be strictly increasing: {pts}")
        if any(b[1] > a[1] for a, b in zip(pts, pts[1:])):
            raise ValueError(f"corner diversities must be non-increasing: {pts}")
        if any(d < 0.0 for _, d in pts):
            raise ValueError(f"diversity values must be >= 0: {pts}")
        if pts[-1][1] != 0.0:
            raise ValueError(f"last corner must have d = 0, got {pts[-1]}")
        object.__setattr__(self, "corners", pts)

    @property
    def max_rate(self) -> float:
        """Largest supported multiplexing gain (r at the final corner)."""
        return self.corners[-1][0]

    @property
    def max_diversity(self) -> float:
        """Diversity at r = 0."""
        return self.corners[0][1]

    def evaluate(self, r: float) -> float:
        """Diversity at multiplexing gain ``r`` by linear interpolation.

        Exact at the corner abscissae. Raises ``OutOfRangeError`` outside
        [0, max_rate].
        """
        r = float(r)
        if r < 0.0 or r > self.max_rate:
            raise OutOfRangeError(f"r = {r} outside [0, {self.max_rate}]")
        rates = [c[0] for c in self.corners]
        i = bisect_right(rates, r) - 1
        r0, d0 = self.corners[i]
        if r == r0:
            return d0
        r1, d1 = self.corners[i + 1]
        t = (r - r0) / (r1 - r0)
        return d0 + t * (d1 - d0)


@dataclass(frozen=True)
class Scenario:
    """One analyzable configuration: channel layout plus weights.

    kinds
    -----
    parallel-identical
        K parallel MISO channels, ``n_t`` transmit antennas each.
    parallel-different
        K parallel MISO channels with per-channel counts from ``profile``.
    bc-zf / bc-dpc
        Broadcast channel, ``m`` transmit antennas, K single-antenna users,
        zero-forcing or dirty-paper precoding.
    """

    kind: str
    weights: Weights
    n_t: int | None = None
    profile: AntennaProfile | None = None
    m: int | None = None
    notes: str = ""

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        k = len(self.weights)
        if self.kind == "parallel-identical":
            if self.n_t is None or int(self.n_t) < 1:
                raise ValueError("parallel-identical requires n_t >= 1")
            object.__setattr__(self, "n_t", int(self.n_t))
        elif self.kind == "parallel-different":
            if self.profile is None:
                raise ValueError("parallel-different requires an antenna profile")
            if len(self.profile) != k:
                raise DimensionMismatchError(
                    f"{k} weights vs {len(self.profile)} antenna counts"
                )
        else:
            if self.m is None or int(self.m) < 1:
                raise ValueError(f"{self.kind} requires m >= 1")
            object.__setattr__(self, "m", int(self.m))
            if k > self.m:
                raise TooManyUsersError(
                    f"{k} single-antenna users exceed {self.m} transmit antennas"
                )

    @property
    def k(self) -> int:
        return len(self.weights)

    def encode_order(self) -> tuple[int, ...]:
        """Per-user processing order for gain computation.

        For bc-dpc this is decreasing weight (ties by ascending index), the
        order in which users are successively encoded. All other kinds use
        the natural order.
        """
        if self.kind == "bc-dpc":
            return stable_desc_order(self.weights.mu)
        return tuple(range(self.k))

    def gain_shapes(self) -> tuple[int, ...]:
        """Gamma shape parameter of each effective gain, in encode order.

        Effective gains are Gamma(shape, 1) distributed: shape ``n_t`` or
        ``n_i`` for parallel channels, ``m - k + 1`` for zero forcing, and
        ``m - j`` for the user encoded at position j (0-based) under DPC.
        """
        if self.kind == "parallel-identical":
            return (self.n_t,) * self.k
        if self.kind == "parallel-different":
            return self.profile.n
        if self.kind == "bc-zf":
            return (self.m - self.k + 1,) * self.k
        return tuple(self.m - j for j in range(self.k))
