"""Independent solvers for the outage-exponent linear program

    minimize    sum_i c_i z_i
    subject to  sum_i w_i z_i >= b,    0 <= z_i <= u_i

with all coefficients positive. These certify the greedy closed form and
the corner formulas in :mod:`wdmt.dmt_analytic` by two structurally
different routes: exact vertex enumeration (:func:`lp_vertex`) and an
exhaustive lattice search with a stated approximation bound
(:func:`lp_grid`). Two independent methods guard against a shared
indexing bug.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    AntennaProfile,
    DmtError,
    OutOfRangeError,
    TooLargeError,
    Weights,
)
from .dmt_analytic import ExponentSolution

__all__ = ["LpInstance", "lp_vertex", "lp_grid"]

_FEAS_EPS = 1e-12
_VERTEX_MAX_K = 16
_GRID_MAX_K = 4
_GRID_MIN_RES = 50


@dataclass(frozen=True)
class LpInstance:
    """One instance: objective costs, constraint weights, right-hand bound
    b = 1 - r/K, and per-coordinate upper box limits."""

    costs: tuple[float, ...]
    weights: tuple[float, ...]
    bound: float
    upper: tuple[float, ...]

    def __post_init__(self):
        costs = tuple(float(x) for x in self.costs)
        weights = tuple(float(x) for x in self.weights)
        upper = tuple(float(x) for x in self.upper)
        if not (len(costs) == len(weights) == len(upper)) or len(costs) < 1:
            raise ValueError("costs, weights, upper must share a length >= 1")
        if any(x <= 0.0 for x in costs + weights + upper):
            raise ValueError("all coefficients must be strictly positive")
        b = float(self.bound)
        if b < -_FEAS_EPS or b > 1.0 + _FEAS_EPS:
            raise ValueError(f"bound must lie in [0, 1], got {b}")
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "bound", b)

    @property
    def k(self) -> int:
        return len(self.costs)

    @classmethod
    def alpha_form(
        cls, profile: AntennaProfile, weights: Weights, r: float
    ) -> "LpInstance":
        """Exponent variables alpha_i in [0, 1]: costs n_i, weights mu_i."""
        k = len(profile)
        if r < 0.0 or r > k:
            raise OutOfRangeError(f"r = {r} outside [0, {k}]")
        return cls(
            costs=tuple(float(n) for n in profile.n),
            weights=weights.mu,
            bound=1.0 - r / k,
            upper=(1.0,) * k,
        )

    @classmethod
    def x_form(
        cls, profile: AntennaProfile, weights: Weights, r: float
    ) -> "LpInstance":
        """Substituted variables x_i = n_i alpha_i in [0, n_i]: unit costs,
        weights mu_i / n_i."""
        k = len(profile)
        if r < 0.0 or r > k:
            raise OutOfRangeError(f"r = {r} outside [0, {k}]")
        return cls(
            costs=(1.0,) * k,
            weights=tuple(m / n for m, n in zip(weights.mu, profile.n)),
            bound=1.0 - r / k,
            upper=tuple(float(n) for n in profile.n),
        )


def lp_vertex(instance: LpInstance) -> ExponentSolution:
    """Exact optimum by vertex enumeration.

    With one inequality plus a box, a minimizer exists at a point where
    every coordinate sits on a box bound except at most one, which
    saturates the inequality. All 2^K box patterns are enumerated, each
    combined with every choice of fractional coordinate: O(K 2^K)
    candidates, K <= 16 enforced.

    Returns the solution with ``alpha = z / u`` (so alpha is the exponent
    vector for both the alpha-form and x-form instances) and
    ``d = sum_i c_i z_i``.
    """
    k = instance.k
    if k > _VERTEX_MAX_K:
        raise TooLargeError(f"vertex enumeration limited to K <= {_VERTEX_MAX_K}")
    c = np.asarray(instance.costs)
    w = np.asarray(instance.weights)
    u = np.asarray(instance.upper)
    b = instance.bound

    masks = np.arange(1 << k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(float)  # (2^k, k)
    vertex_w = bits @ (w * u)
    vertex_c = bits @ (c * u)

    best_obj = np.inf
    best = None  # (mask_row, frac_index, frac_value)

    feasible = vertex_w >= b - _FEAS_EPS
    if feasible.any():
        i = int(np.flatnonzero(feasible)[np.argmin(vertex_c[feasible])])
        best_obj = float(vertex_c[i])
        best = (i, None, 0.0)

    for f in range(k):
        z_f = (b - vertex_w) / w[f]
        ok = (bits[:, f] == 0.0) & (z_f > _FEAS_EPS) & (z_f <= u[f] + _FEAS_EPS)
        if not ok.any():
            continue
        obj = vertex_c[ok] + c[f] * np.minimum(z_f[ok], u[f])
        j = int(np.argmin(obj))
        if obj[j] < best_obj:
            best_obj = float(obj[j])
            row = int(np.flatnonzero(ok)[j])
            best = (row, f, float(min(z_f[row], u[f])))

    if best is None:
        raise DmtError("no feasible vertex; bound exceeds the box capacity")

    row, f, z_frac = best
    z = bits[row] * u
    if f is not None:
        z[f] = z_frac
    return ExponentSolution(tuple(z / u), float(z @ c))


def lp_grid(instance: LpInstance, resolution: int) -> float:
    """Minimum objective over the lattice alpha_i in {0, 1/res, ..., 1}.

    The lattice restricts the feasible set, so the value upper-bounds the
    true optimum; rounding the true minimizer outward (up) stays feasible
    and costs at most sum_i c_i u_i / res <= K max_i(c_i u_i) / res, which
    bounds the gap. The lattice is split into two halves searched
    meet-in-the-middle; the minimum is identical to full enumeration and
    independent of the split.

    K <= 4 and resolution >= 50 enforced.
    """
    k = instance.k
    if k > _GRID_MAX_K:
        raise TooLargeError(f"grid search limited to K <= {_GRID_MAX_K}")
    resolution = int(resolution)
    if resolution < _GRID_MIN_RES:
        raise ValueError(f"resolution must be >= {_GRID_MIN_RES}, got {resolution}")

    w_a, c_a, w_b_sorted, best_tail = _grid_tables(
        instance.costs, instance.weights, instance.upper, resolution
    )
    needed = instance.bound - w_a - _FEAS_EPS
    pos = np.searchsorted(w_b_sorted, needed, side="left")
    ok = pos < w_b_sorted.size
    if not ok.any():
        raise DmtError("no feasible lattice point; bound exceeds the box capacity")
    return float(np.min(c_a[ok] + best_tail[pos[ok]]))


@lru_cache(maxsize=128)
def _grid_tables(costs, weights, upper, resolution):
    """Bound-independent half-lattice tables, cached so sweeps over the
    rate (which only moves the bound) pay the sort once per instance.
    Returned arrays are never mutated."""
    k = len(costs)
    levels = np.arange(resolution + 1) / resolution

    def table(indices):
        wsum = np.zeros(1)
        csum = np.zeros(1)
        for i in indices:
            z_i = upper[i] * levels
            wsum = (wsum[:, None] + (weights[i] * z_i)[None, :]).ravel()
            csum = (csum[:, None] + (costs[i] * z_i)[None, :]).ravel()
        return wsum, csum

    half = (k + 1) // 2
    w_a, c_a = table(range(half))
    w_b, c_b = table(range(half, k))
    order = np.argsort(w_b, kind="stable")
    w_b_sorted = w_b[order]
    # best_tail[j] = min cost among lattice points with weight >= w_b_sorted[j]
    best_tail = np.minimum.accumulate(c_b[order][::-1])[::-1]
    return w_a, c_a, w_b_sorted, best_tail
