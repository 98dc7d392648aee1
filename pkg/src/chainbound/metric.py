"""Finite metric spaces: covering numbers, dimension fits, doubling estimates.

A space is a finite point set with a distance oracle.  The two quantities a
chaining construction needs are

  * a Minkowski-type pair (d, c) such that the covering numbers obey
    N(eta) <= c * (diam/eta)^d at every probed radius, and
  * a doubling number n2: every ball of radius r is coverable by n2 balls
    of radius r/2.

Covers are produced by deterministic farthest-point traversal (ties broken
by lowest point id).  Greedy covers upper-bound the minimal ones, so every
constant derived from them is one-sided in the safe direction; dimension
info derived from greedy covers is labeled "greedy-certified".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    FitError,
    NontrivialSpaceError,
    ParseError,
    SizeError,
)

_MATRIX_CAP = 4096  # full n x n matrices above this are refused
_POINTCLOUD_HEADER = "# chainbound-pointcloud v1"
_DISTMATRIX_HEADER = "# chainbound-distmatrix v1"


@dataclass(frozen=True)
class DimensionInfo:
    """Covering-law exponent/constant and doubling number for a space.

    Satisfies N(eta) <= c*(diam/eta)^d on the probed radii and says each
    ball splits into at most n2 half-radius balls.  ``source`` records how
    the numbers were obtained (closed form vs. greedy fit vs. carried).
    """

    d: float
    c: float
    n2: int
    source: str = "unspecified"

    def __post_init__(self):
        if not self.d > 0.0:
            raise DomainError(f"dimension must be positive, got {self.d}")
        if self.c < 1.0:
            raise DomainError(f"covering constant must be >= 1, got {self.c}")
        if self.n2 < 1:
            raise DomainError(f"doubling number must be >= 1, got {self.n2}")


def euclidean_dims(ambient_dim: int) -> DimensionInfo:
    """Valid (d, c, n2) for any bounded subset of R^d with >= 2 points:
    covering constant (4d)^d and doubling number (3^4 d^2)^d."""
    d = int(ambient_dim)
    if d < 1:
        raise DomainError("ambient dimension must be >= 1")
    return DimensionInfo(
        d=float(d),
        c=float((4 * d) ** d),
        n2=int((81 * d * d) ** d),
        source="euclidean-closed-form",
    )


class MetricSpace:
    """Finite metric space over point ids 0..n-1.

    Construct via :func:`from_points`, :func:`from_distance_matrix` or
    :func:`space_time_grid`.  Distances may be backed by coordinates
    (euclidean / chebyshev / parabolic) or an explicit matrix; a ``scale``
    multiplier supports cheap rescaling.  Immutable after construction.
    """

    def __init__(self, *, coords=None, metric="euclidean", matrix=None, scale=1.0):
        if (coords is None) == (matrix is None):
            raise DomainError("provide exactly one of coords / matrix")
        self.metric = metric
        self.scale = float(scale)
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        if self.coords is not None and self.coords.ndim == 1:
            self.coords = self.coords[:, None]
        self.n = len(self.coords) if self.coords is not None else len(self._matrix)
        if self.n < 2:
            raise NontrivialSpaceError("a metric space needs at least two points")
        self._full = None
        self._diameter = None
        if self._matrix is not None:
            self._full = self._matrix * self.scale

    # -- distance access ---------------------------------------------------

    def row(self, i: int) -> np.ndarray:
        """Distances from point i to every point."""
        if self._full is not None:
            return self._full[i]
        return self._row_from_coords(np.array([i]))[0]

    def _row_from_coords(self, idx: np.ndarray) -> np.ndarray:
        a = self.coords[idx]
        if self.metric == "euclidean":
            d = np.sqrt(((a[:, None, :] - self.coords[None, :, :]) ** 2).sum(-1))
        elif self.metric == "chebyshev":
            d = np.abs(a[:, None, :] - self.coords[None, :, :]).max(-1)
        elif self.metric == "parabolic":
            from .pam import parabolic_metric

            d = parabolic_metric(
                a[:, None, :], self.coords[None, :, :]
            )
        else:
            raise DomainError(f"unknown metric {self.metric!r}")
        return d * self.scale

    def full_matrix(self) -> np.ndarray:
        if self._full is None:
            if self.n > _MATRIX_CAP:
                raise SizeError(
                    f"refusing to materialize a {self.n}x{self.n} distance matrix"
                )
            self._full = self._row_from_coords(np.arange(self.n))
            np.fill_diagonal(self._full, 0.0)
        return self._full

    def distance(self, i: int, j: int) -> float:
        if self._full is not None:
            return float(self._full[i, j])
        return float(self.row(i)[j])

    @property
    def diameter(self) -> float:
        """Exact max pairwise distance (row scan, O(n^2) time, O(n) memory)."""
        if self._diameter is None:
            if self._full is not None:
                dia = float(self._full.max())
            else:
                dia = 0.0
                block = 256
                for start in range(0, self.n, block):
                    idx = np.arange(start, min(start + block, self.n))
                    dia = max(dia, float(self._row_from_coords(idx).max()))
            if not dia > 0.0:
                raise NontrivialSpaceError("diameter is zero: points coincide")
            self._diameter = dia
        return self._diameter

    def min_pairwise(self) -> float:
        m = self.full_matrix().copy()
        np.fill_diagonal(m, np.inf)
        return float(m.min())


def from_points(coords, metric: str = "euclidean") -> MetricSpace:
    return MetricSpace(coords=coords, metric=metric)


def from_distance_matrix(
    matrix, validate: bool = True, seed: int = 0, max_triples: int = 100_000
) -> MetricSpace:
    """Explicit-table metric; validates axioms and samples triangle triples."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("distance matrix must be square")
    if validate:
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise DomainError("distance matrix is not symmetric")
        if np.any(np.diag(m) != 0.0):
            raise DomainError("distance matrix has nonzero diagonal")
        off = m + np.diag(np.full(len(m), np.inf))
        if np.any(off <= 0.0):
            raise DomainError("distinct points must have positive distance")
        n = len(m)
        rng = np.random.Generator(np.random.Philox(key=seed))
        n_triples = min(n ** 3, max_triples)
        ijk = rng.integers(0, n, size=(n_triples, 3))
        i, j, k = ijk.T
        if np.any(m[i, k] > m[i, j] + m[j, k] + 1e-12):
            raise DomainError("triangle inequality violated on sampled triples")
    return MetricSpace(matrix=m)


def space_time_grid(times, positions) -> MetricSpace:
    """Points (t, x) under the parabolic distance
    |t-s|^(1/2) + (1 - log(|x-y|)/2)*|x-y|."""
    tt, xx = np.meshgrid(np.asarray(times, float), np.asarray(positions, float),
                         indexing="ij")
    pts = np.column_stack([tt.ravel(), xx.ravel()])
    return MetricSpace(coords=pts, metric="parabolic")


def rescale(space: MetricSpace, lam: float) -> MetricSpace:
    """Multiply all distances by lam > 0; dimension info carries unchanged."""
    if lam <= 0.0:
        raise DomainError("rescale factor must be positive")
    if space.coords is not None:
        return MetricSpace(coords=space.coords, metric=space.metric,
                           scale=space.scale * lam)
    return MetricSpace(matrix=space._matrix, scale=space.scale * lam)


def restrict(space: MetricSpace, subset: Sequence[int]) -> MetricSpace:
    """Restrict to a point subset (>= 2 ids); ids renumber to 0..k-1."""
    idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=int)
    if len(idx) < 2:
        raise NontrivialSpaceError("restriction needs at least two points")
    if np.any(idx < 0) or np.any(idx >= space.n):
        raise DomainError("subset ids out of range")
    if space.coords is not None:
        return MetricSpace(coords=space.coords[idx], metric=space.metric,
                           scale=space.scale)
    return MetricSpace(matrix=space._matrix[np.ix_(idx, idx)], scale=space.scale)


def dims_after_rescale(dims: DimensionInfo) -> DimensionInfo:
    """Rescaling the metric preserves (d, c, n2)."""
    return replace(dims, source=dims.source + "+rescale")


def dims_after_restrict(dims: DimensionInfo, diam_ratio: float) -> DimensionInfo:
    """Subset rule: c -> c*(2*diam_ratio)^d and n2 -> n2^2, where
    diam_ratio = diam(M)/diam(A) >= 1."""
    if diam_ratio < 1.0:
        raise DomainError("diameter ratio must be >= 1")
    return DimensionInfo(
        d=dims.d,
        c=dims.c * (2.0 * diam_ratio) ** dims.d,
        n2=int(dims.n2) ** 2,
        source=dims.source + "+restrict",
    )


# -- covering numbers -------------------------------------------------------


def greedy_cover(space: MetricSpace, eta: float,
                 within: Optional[np.ndarray] = None) -> list[int]:
    """Farthest-point cover of ``within`` (default: all points) by open
    eta-balls centered at points of ``within``; deterministic tie-break by
    lowest id.  Returns the ordered center list."""
    if eta <= 0.0:
        raise DomainError("covering radius must be positive")
    ids = np.arange(space.n) if within is None else np.asarray(within, dtype=int)
    centers: list[int] = []
    mindist = np.full(len(ids), np.inf)
    while True:
        far = int(np.argmax(mindist))  # first max = lowest id (ids sorted)
        if mindist[far] < eta:
            break
        center = int(ids[far])
        centers.append(center)
        mindist = np.minimum(mindist, space.row(center)[ids])
    return centers


def covering_number(space: MetricSpace, eta: float, mode: str = "greedy") -> int:
    """Number of open eta-balls (centers in the space) needed to cover it.

    ``greedy`` upper-bounds the true minimum; ``exact`` (<= 24 points)
    returns the true minimum by branch and bound.
    """
    if mode == "greedy":
        return len(greedy_cover(space, eta))
    if mode != "exact":
        raise DomainError(f"unknown covering mode {mode!r}")
    if space.n > 24:
        raise SizeError("exact covering restricted to <= 24 points")
    n = space.n
    dist = space.full_matrix()
    ball = [int(sum(1 << j for j in range(n) if dist[i, j] < eta)) for i in range(n)]
    full = (1 << n) - 1
    best = len(greedy_cover(space, eta))

    def descend(uncovered: int, used: int):
        nonlocal best
        if uncovered == 0:
            best = min(best, used)
            return
        if used + 1 >= best:
            return
        low = (uncovered & -uncovered).bit_length() - 1  # lowest uncovered point
        for i in range(n):
            if ball[i] >> low & 1:
                descend(uncovered & ~ball[i], used + 1)

    descend(full, 0)
    return best


def doubling_estimate(
    space: MetricSpace,
    radii: Optional[Sequence[float]] = None,
    max_centers: int = 1024,
    seed: int = 0,
) -> int:
    """Sampled lower estimate of the doubling number: greedy half-radius
    cover of every sampled ball (all centers when n <= max_centers)."""
    dia = space.diameter
    if radii is None:
        radii = [dia / 2.0, dia / 8.0, dia / 32.0]
    if space.n <= max_centers:
        centers = np.arange(space.n)
    else:
        rng = np.random.Generator(np.random.Philox(key=seed))
        centers = np.sort(rng.choice(space.n, size=max_centers, replace=False))
    worst = 1
    for c in centers:
        drow = space.row(int(c))
        for r in radii:
            members = np.flatnonzero(drow < r)
            if len(members) > 1:
                worst = max(worst, len(greedy_cover(space, r / 2.0, members)))
    return worst


def fit_dimension(space: MetricSpace, levels: int = 6) -> DimensionInfo:
    """Greedy-certified covering-law fit at radii diam * 2^-k, k = 1..levels.

    The exponent is the upper envelope (max successive slope) so that the
    covering law holds at every probed level; the constant is the smallest
    one making it hold with that exponent.  Flat counts (no growth) fit any
    exponent, in which case d = 1 is reported.
    """
    if levels < 4:
        raise DomainError("dimension fit needs levels >= 4")
    dia = space.diameter
    counts = np.array(
        [covering_number(space, dia * 2.0 ** -k) for k in range(1, levels + 1)],
        dtype=float,
    )
    if np.all(counts <= 1):
        raise FitError("all points within every probed radius; nothing to fit")
    slopes = np.diff(np.log2(counts))
    d = float(slopes.max()) if slopes.max() > 0.0 else 1.0
    ks = np.arange(1, levels + 1)
    c = float(max(1.0, (counts / 2.0 ** (d * ks)).max()))
    n2 = doubling_estimate(space)
    return DimensionInfo(d=d, c=c, n2=n2, source="greedy-certified")


# -- file formats -----------------------------------------------------------


def load_point_cloud(path) -> MetricSpace:
    """Load a `# chainbound-pointcloud v1` CSV (one row per point)."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first.strip() != _POINTCLOUD_HEADER:
            raise ParseError(
                f"expected header {_POINTCLOUD_HEADER!r}, got {first!r}", line=1
            )
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split(",")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"non-numeric coordinate in {text!r}", line=lineno)
            if any(not math.isfinite(v) for v in vals):
                raise ParseError("non-finite coordinate", line=lineno)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(
                    f"expected {width} coordinates, got {len(vals)}", line=lineno
                )
            rows.append(vals)
    if len(rows) < 2:
        raise NontrivialSpaceError("point cloud has fewer than two points")
    return from_points(np.asarray(rows))


def save_point_cloud(path, coords) -> None:
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_POINTCLOUD_HEADER + "\n")
        for row in coords:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_distance_matrix(path) -> MetricSpace:
    """Load a `# chainbound-distmatrix v1` CSV distance table."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first.strip() != _DISTMATRIX_HEADER:
            raise ParseError(
                f"expected header {_DISTMATRIX_HEADER!r}, got {first!r}", line=1
            )
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                rows.append([float(p) for p in text.split(",")])
            except ValueError:
                raise ParseError(f"non-numeric entry in {text!r}", line=lineno)
    return from_distance_matrix(np.asarray(rows))
