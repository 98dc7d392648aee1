"""Generalized Holder seminorms: exact pair scans and net embeddings.

The exact seminorm of a sampled field f over a finite space M is

    max over distinct pairs of ||f(x) - f(y)|| / w(d(x,y) / diam(M)),

a finite maximum, invariant under rescaling the metric.  The embedded
variant replaces the pair sup with a sup over a chaining net's numbered
pair sequence, weighting position k by w(k^(-1/d)); the two are equivalent
up to explicit two-sided constants computed from the growth constants of w
and the net's dimension info:

    exact <= C_lower * embedded,      embedded <= C_upper * exact,

    C_lower = 3 * c_w * d_w / (d_w - 1),
    C_upper = c_w * (c * 3^(2d+1) / d * n2^4)^(log2(c_w) / d).

Both inequalities are deterministic statements about two finite maxima over
the same samples, so tests assert them exactly.  The constants must be fed
growth bounds that are valid on all of (0,1] (certified catalog bounds, not
grid estimates): an underestimated c_w or overestimated d_w would shrink
C_lower below its safe value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chaining import ChainingNet
from .errors import DomainError, MembershipError, NontrivialSpaceError, ParameterError
from .metric import DimensionInfo, MetricSpace
from .modulus import Modulus, eval_modulus, log_boosted, power

E_INV = math.exp(-1.0)


@dataclass
class SampledField:
    """Values of a function on a space's points; scalar or fixed-dim vector."""

    space: MetricSpace
    values: np.ndarray
    norm: str = "euclidean"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != self.space.n:
            raise DomainError(
                f"field has {len(self.values)} values for {self.space.n} points"
            )
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")
        if self.norm not in ("euclidean", "abs"):
            raise DomainError(f"unknown norm {self.norm!r}")

    def increment_norm(self, i, j) -> np.ndarray:
        """||f(i) - f(j)|| for index arrays i, j."""
        diff = self.values[i] - self.values[j]
        if diff.ndim == 1:
            return np.abs(diff)
        return np.sqrt((diff ** 2).sum(axis=-1))


@dataclass(frozen=True)
class SeminormResult:
    value: float
    witness: Optional[tuple[int, int]]
    weight: str


def _pair_data(field: SampledField):
    """(i, j, ||df||, d/diam) over distinct pairs i < j."""
    space = field.space
    if space.n < 2:
        raise NontrivialSpaceError("seminorm needs at least two points")
    dist = space.full_matrix()
    ii, jj = np.triu_indices(space.n, k=1)
    return ii, jj, field.increment_norm(ii, jj), dist[ii, jj] / space.diameter


def seminorm_exact(field: SampledField, w: Modulus) -> SeminormResult:
    """Full O(n^2) pair scan of ||df|| / w(d/diam)."""
    ii, jj, numer, ratio = _pair_data(field)
    vals = numer / eval_modulus(w, ratio)
    k = int(np.argmax(vals))
    return SeminormResult(
        value=float(vals[k]), witness=(int(ii[k]), int(jj[k])), weight=w.describe()
    )


def holder_seminorm_alpha(field: SampledField, alpha: float) -> float:
    """Unnormalized Holder sup: max ||df|| / d^alpha (includes the diam^-alpha
    normalization relative to the diameter-relative seminorm)."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must be in (0,1], got {alpha}")
    ii, jj, numer, ratio = _pair_data(field)
    dist = ratio * field.space.diameter
    return float((numer / dist ** alpha).max())


def seminorm_embedded(
    field: SampledField,
    net: ChainingNet,
    w: Modulus,
    d: Optional[float] = None,
) -> SeminormResult:
    """Sup over the net's numbered pair sequence of ||df|| / w(k^(-1/d)).

    Dummy padding pairs contribute zero and are skipped; the position
    numbers k still account for them.
    """
    if field.space is not net.space and field.space.n != net.space.n:
        raise MembershipError("field is not defined on the net's space")
    dd = net.dims.d if d is None else float(d)
    best, best_pair = 0.0, None
    for n in range(net.n_levels + 1):
        edges = net.edges[n]
        if len(edges) == 0:
            continue
        ks = float(net.theta[2 * n]) + np.arange(1, len(edges) + 1, dtype=float)
        weights = eval_modulus(w, ks ** (-1.0 / dd))
        numer = field.increment_norm(edges[:, 0], edges[:, 1])
        vals = numer / weights
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            best_pair = (int(edges[k, 0]), int(edges[k, 1]))
    return SeminormResult(value=best, witness=best_pair,
                          weight=f"{w.describe()} @ k^(-1/{dd:g})")


def embedding_constants(
    c_w: float, d_w: float, dims: DimensionInfo
) -> tuple[float, float]:
    """Two-sided equivalence constants (C_lower, C_upper) for the embedding.

    Requires 1 < d_w <= c_w; raises ParameterError otherwise.
    """
    if not d_w > 1.0:
        raise ParameterError(f"embedding needs d_w > 1, got {d_w}")
    if c_w < d_w:
        raise ParameterError("growth constants must satisfy d_w <= c_w")
    c_lower = 3.0 * c_w * d_w / (d_w - 1.0)
    inner = dims.c * 3.0 ** (2.0 * dims.d + 1.0) / dims.d * float(dims.n2) ** 4
    c_upper = c_w * inner ** (math.log2(c_w) / dims.d)
    return c_lower, c_upper


def _alpha_sweep_front(field: SampledField):
    """Pareto-reduced (numer, dist) pairs for sweeping max ||df||/d^alpha.

    Pairs sharing a distance collapse to their largest numerator, and a pair
    is dominated when another has >= numerator at <= distance; only the
    record-setting staircase survives, which keeps dense alpha grids cheap.
    """
    _, _, numer, ratio = _pair_data(field)
    dist = ratio * field.space.diameter
    keep = numer > 0.0
    numer, dist = numer[keep], dist[keep]
    if len(numer) == 0:
        return numer, dist
    uniq, inverse = np.unique(dist, return_inverse=True)
    best = np.zeros(len(uniq))
    np.maximum.at(best, inverse, numer)
    records = best >= np.maximum.accumulate(best)
    return best[records], uniq[records]


def log_blowup_equivalence(
    field: SampledField,
    alpha_star: float,
    gamma: float,
    beta: float,
    alpha_grid: int = 200,
) -> tuple[float, float, float]:
    """Three-term comparison between the log-boosted seminorm at exponent
    alpha_star and the blow-up rate of plain Holder seminorms below it.

    Returns (lhs, middle, rhs) with
      lhs    = (beta*gamma/e)^gamma * |f|_{C_w},
      middle = max over an alpha grid of
               (alpha_star - alpha)^gamma * diam^alpha * |f|_{C^alpha},
      rhs    = (alpha_star + beta*gamma/e)^gamma * |f|_{C_w},
    where w(x) = (1 - beta*log x)^gamma * x^alpha_star.  The grid
    under-approximates the continuum sup, so middle <= rhs exactly while
    lhs <= middle only up to a small grid tolerance.
    """
    if not 0.0 < alpha_star < 1.0:
        raise ParameterError("alpha_star must be in (0,1)")
    if gamma <= 0.0:
        raise ParameterError("gamma must be positive")
    if not 0.0 < beta < alpha_star / gamma:
        raise ParameterError(
            f"beta must lie in (0, {alpha_star / gamma:g}), got {beta}"
        )
    if alpha_grid < 50:
        raise ParameterError("alpha grid must have at least 50 points")
    w = log_boosted(beta, gamma, power(alpha_star))
    base = seminorm_exact(field, w).value
    lhs = (E_INV * beta * gamma) ** gamma * base
    rhs = (alpha_star + E_INV * beta * gamma) ** gamma * base

    numer, dist = _alpha_sweep_front(field)
    if len(numer) == 0:
        return 0.0, 0.0, 0.0
    alphas = (np.arange(alpha_grid) + 0.5) * alpha_star / alpha_grid
    # middle = max over grid alphas of (a* - a)^gamma * max(numer / dist^a);
    # each alpha is an upper-envelope query over lines in log space.
    log_n, log_d = np.log(numer), np.log(dist)
    middle = 0.0
    for a in alphas:
        peak = math.exp(float((log_n - a * log_d).max()))
        middle = max(middle, float((alpha_star - a) ** gamma * peak))
    return float(lhs), middle, float(rhs)
