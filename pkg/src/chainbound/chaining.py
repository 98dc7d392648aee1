"""Nested chaining nets, their edge levels, and telescoping decompositions.

Given a finite space (rescaled internally to diameter 1) and dimension info
(d, c, n2), the construction produces nested sets V_0 <= V_1 <= ... <= V_N
with, at every level n,

  * card(V_n) <= c * 3^d * 2^(d n),
  * every point within 2^-n of V_n,
  * distinct points of V_n at least (2/3) * 2^-n apart,

and edge sets E_n of point pairs in V_n at distance in (0, 3 * 2^-n], with
card(E_n) <= c * 3^d * n2^4 * 2^(d n).  Edges are laid out in a single
numbered sequence: level n's edges occupy positions (theta[2n], theta[2n+1]],
followed by dummy (x*, x*) padding so that theta[2n] >= 2^(d n).  That
numbering is what lets a single weight k -> w(k^(-1/d)) stand in for the
per-level weights w(2^-n) in the two-sided seminorm embedding.

The edge threshold is closed (d <= 3 * 2^-n) where the usual statement is
open; on exact dyadic data a chain hop can land exactly on the boundary
(hop length 2^-j + 2^-(j-1)), and the closed set keeps every hop inside its
level while the packing bound card <= n2^4 per point still applies
(separation (2/3)*2^-n = r/6 for the enclosing radius r = 4 * 2^-n).

Dummy padding counts grow like 2^(d n) and are therefore never materialized;
the pair sequence is stored implicitly as (edges, theta) and iterated lazily.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import DimsTooSmallError, DomainError, MembershipError, SizeError
from .metric import DimensionInfo, MetricSpace

_N_CAP = 60


def _card_bound(c: float, d: float, n: int) -> float:
    return c * 3.0 ** d * 2.0 ** (d * n)


def _edge_bound(c: float, d: float, n2: int, n: int) -> float:
    return c * 3.0 ** d * float(n2) ** 4 * 2.0 ** (d * n)


@dataclass
class ChainingNet:
    """A built net; immutable by convention after construction."""

    space: MetricSpace
    dims: DimensionInfo
    n_levels: int                       # deepest level N
    levels: list[np.ndarray]            # sorted id arrays V_0..V_N
    edges: list[np.ndarray]             # (m,2) sorted id pairs per level
    theta: list[int]                    # offsets, length 2N+3
    dummy: int
    phi: list[np.ndarray]               # phi[n][i] = nearest V_n id to i
    entry_level: np.ndarray             # first level containing each net point
    rdist: np.ndarray = field(repr=False)  # distances rescaled to diameter 1

    @property
    def net_points(self) -> np.ndarray:
        return self.levels[-1]

    def pair_count(self) -> int:
        """Length of the full numbered sequence including dummy padding."""
        return self.theta[-1]

    def iter_pairs(self) -> Iterator[tuple[int, int, int]]:
        """Yield (k, x_k, y_k) lazily, dummies included."""
        k = 0
        for n in range(self.n_levels + 1):
            for i, j in self.edges[n]:
                k += 1
                yield k, int(i), int(j)
            pad = self.theta[2 * n + 2] - self.theta[2 * n + 1]
            for _ in range(pad):
                k += 1
                yield k, self.dummy, self.dummy

    def level_of_position(self, k: int) -> int:
        for n in range(self.n_levels + 1):
            if self.theta[2 * n] < k <= self.theta[2 * n + 2]:
                return n
        raise MembershipError(f"position {k} outside the pair sequence")


def default_depth(space: MetricSpace) -> int:
    """Smallest N >= 1 with 2^-N <= (min pairwise distance)/diameter; at that
    depth the coverage radius forces V_N to contain every point."""
    minpair = space.min_pairwise() / space.diameter
    n = max(1, math.ceil(-math.log2(minpair) - 1e-12))
    return min(n, _N_CAP)


def build_net(space: MetricSpace, dims: DimensionInfo,
              n_levels: Optional[int] = None) -> ChainingNet:
    """Construct the nested net on ``space`` using ``dims``.

    Raises DimsTooSmallError (naming the level) if a greedy cover exceeds
    the cardinality the covering law allows; greedy covers are not minimal,
    so a generous covering constant is the caller's responsibility.
    """
    if space.n > 4096:
        raise SizeError("net construction capped at 4096 points")
    N = default_depth(space) if n_levels is None else int(n_levels)
    if N < 1:
        raise DomainError("net depth must be >= 1")
    rdist = space.full_matrix() / space.diameter
    n_pts = space.n
    d, c, n2 = dims.d, dims.c, dims.n2

    levels = [np.array([0], dtype=int)]
    v_mask = np.zeros(n_pts, dtype=bool)
    v_mask[0] = True
    dist_to_v = rdist[:, 0].copy()  # distance of each point to current V

    for n in range(1, N + 1):
        radius = (1.0 / 3.0) * 2.0 ** -n
        f_n = _greedy_cover_ids(rdist, radius)
        if len(f_n) > math.ceil(_card_bound(c, d, n) + 1e-9):
            raise DimsTooSmallError(level=n, count=len(f_n),
                                    bound=_card_bound(c, d, n))
        sep = (2.0 / 3.0) * 2.0 ** -n
        g_n = sorted(x for x in f_n if dist_to_v[x] >= sep)
        # Maximal separated subset of G_n, ascending id order.
        kept: list[int] = []
        dist_to_kept = np.full(n_pts, np.inf)
        for x in g_n:
            if dist_to_kept[x] >= sep:
                kept.append(x)
                np.minimum(dist_to_kept, rdist[x], out=dist_to_kept)
        # Residual repair: any point not covered at radius 2^-n by the old
        # or new centers joins the net itself.  Such a point is >= 2^-n from
        # everything kept, so separation survives.  (Unreachable with exact
        # arithmetic; guards against boundary-tie rounding.)
        cover_r = 2.0 ** -n
        while True:
            residual = np.flatnonzero(
                (dist_to_v >= cover_r) & (dist_to_kept >= cover_r)
            )
            if len(residual) == 0:
                break
            x = int(residual[0])
            kept.append(x)
            np.minimum(dist_to_kept, rdist[x], out=dist_to_kept)
        new_level = np.unique(np.concatenate([levels[-1], np.array(kept, int)]))
        levels.append(new_level.astype(int))
        for x in kept:
            v_mask[x] = True
            np.minimum(dist_to_v, rdist[:, x], out=dist_to_v)

    edges = []
    for n in range(N + 1):
        ids = levels[n]
        sub = rdist[np.ix_(ids, ids)]
        ii, jj = np.nonzero(np.triu((sub > 0.0) & (sub <= 3.0 * 2.0 ** -n), k=1))
        pairs = np.column_stack([ids[ii], ids[jj]])
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        edges.append(pairs[order].reshape(-1, 2))

    theta: list[int] = [0]
    for n in range(N + 1):
        m = len(edges[n])
        theta.append(theta[-1] + m)
        pad = max(math.ceil(2.0 ** (d * (n + 1)) - 1e-9) - m, 0)
        theta.append(theta[-1] + pad)

    phi = []
    for n in range(N + 1):
        ids = levels[n]
        nearest = np.argmin(rdist[:, ids], axis=1)  # first min = lowest id
        phi.append(ids[nearest].astype(int))

    entry = np.full(n_pts, -1, dtype=int)
    for n in range(N, -1, -1):
        entry[levels[n]] = n

    return ChainingNet(
        space=space, dims=dims, n_levels=N, levels=levels, edges=edges,
        theta=theta, dummy=int(levels[0][0]), phi=phi, entry_level=entry,
        rdist=rdist,
    )


def _greedy_cover_ids(rdist: np.ndarray, eta: float) -> list[int]:
    centers: list[int] = []
    mindist = np.full(len(rdist), np.inf)
    while True:
        far = int(np.argmax(mindist))
        if mindist[far] < eta:
            return centers
        centers.append(far)
        np.minimum(mindist, rdist[far], out=mindist)


def pair_sequence(net: ChainingNet, max_len: int = 10_000_000) -> list[tuple[int, int]]:
    """Materialize the numbered pair sequence, dummy pairs included.

    Dummy padding grows like 2^(d n); deep nets exceed any reasonable list,
    hence the guard.  Use ``net.iter_pairs()`` for streaming access.
    """
    total = net.pair_count()
    if total > max_len:
        raise SizeError(
            f"pair sequence has {total} entries (mostly dummies); "
            "raise max_len or iterate lazily"
        )
    return [(x, y) for _, x, y in net.iter_pairs()]


@dataclass(frozen=True)
class Chain:
    """Telescoping decomposition of f(x) - f(y) over net points.

    f(x) - f(y) = [f(root[0]) - f(root[1])]
                + sum over hops_x of f(a) - f(b)
                - sum over hops_y of f(a) - f(b)

    with hops (a, b) = (phi_j(z), phi_{j-1}(z)) for j from n0+1 up to the
    level where z enters the net.  The identity is pure index bookkeeping:
    consecutive hops share endpoints, so identical terms cancel exactly.
    """

    x: int
    y: int
    n0: int
    root: tuple[int, int]
    hops_x: tuple[tuple[int, int], ...]
    hops_y: tuple[tuple[int, int], ...]

    def connected(self) -> bool:
        for hops, z in ((self.hops_x, self.x), (self.hops_y, self.y)):
            prev = self.root[0] if z == self.x else self.root[1]
            for a, b in hops:
                if b != prev:
                    return False
                prev = a
            if prev != z:
                return False
        return True

    def telescoped_difference(self, values) -> float:
        v = np.asarray(values, dtype=float)
        total = v[self.root[0]] - v[self.root[1]]
        for a, b in self.hops_x:
            total += v[a] - v[b]
        for a, b in self.hops_y:
            total -= v[a] - v[b]
        return float(total)


def chain_decompose(net: ChainingNet, x: int, y: int) -> Chain:
    """Root pair plus two hop lists joining x and y through the levels."""
    for z in (x, y):
        if z < 0 or z >= net.space.n or net.entry_level[z] < 0:
            raise MembershipError(f"point {z} is not a net point")
    N = net.n_levels
    if x == y:
        p = int(net.phi[N][x])
        return Chain(x=x, y=y, n0=N, root=(p, p), hops_x=(), hops_y=())
    r = float(net.rdist[x, y])
    n0 = 0
    while n0 + 1 <= N and r < 2.0 ** -(n0 + 1):
        n0 += 1
    root = (int(net.phi[n0][x]), int(net.phi[n0][y]))
    hops_x = tuple(
        (int(net.phi[j][x]), int(net.phi[j - 1][x]))
        for j in range(n0 + 1, int(net.entry_level[x]) + 1)
    )
    hops_y = tuple(
        (int(net.phi[j][y]), int(net.phi[j - 1][y]))
        for j in range(n0 + 1, int(net.entry_level[y]) + 1)
    )
    return Chain(x=x, y=y, n0=n0, root=root, hops_x=hops_x, hops_y=hops_y)


@dataclass
class InvariantReport:
    entries: list[tuple[str, bool, str]]

    @property
    def all_passed(self) -> bool:
        return all(ok for _, ok, _ in self.entries)

    def failures(self) -> list[tuple[str, str]]:
        return [(name, detail) for name, ok, detail in self.entries if not ok]

    def __str__(self) -> str:
        return "\n".join(
            f"[{'pass' if ok else 'FAIL'}] {name}: {detail}"
            for name, ok, detail in self.entries
        )


def verify_net(net: ChainingNet) -> InvariantReport:
    """Exact full-scan check of every net invariant, with witnesses."""
    entries = []
    d, c, n2 = net.dims.d, net.dims.c, net.dims.n2
    N = net.n_levels
    rdist = net.rdist
    tol = 1e-12

    ok, detail = True, "V_n contained in V_n+1 at every level"
    for n in range(N):
        if not np.all(np.isin(net.levels[n], net.levels[n + 1])):
            ok, detail = False, f"level {n} not contained in level {n + 1}"
            break
    entries.append(("nesting", ok, detail))

    ok, detail = True, "card(V_n) within covering-law bound"
    for n in range(N + 1):
        bound = _card_bound(c, d, n)
        if len(net.levels[n]) > math.ceil(bound + 1e-9):
            ok, detail = False, (
                f"level {n}: card {len(net.levels[n])} > bound {bound:.6g}")
            break
    entries.append(("cardinality", ok, detail))

    ok, detail = True, "every point within 2^-n of V_n"
    for n in range(N + 1):
        gaps = rdist[:, net.levels[n]].min(axis=1)
        worst = int(np.argmax(gaps))
        if gaps[worst] > 2.0 ** -n * (1.0 + tol):
            ok, detail = False, (
                f"level {n}: point {worst} at distance {gaps[worst]:.6g} "
                f"> {2.0 ** -n:.6g}")
            break
    entries.append(("covering", ok, detail))

    ok, detail = True, "distinct V_n points separated by (2/3)*2^-n"
    for n in range(N + 1):
        ids = net.levels[n]
        sub = rdist[np.ix_(ids, ids)].copy()
        np.fill_diagonal(sub, np.inf)
        if len(ids) > 1 and sub.min() < (2.0 / 3.0) * 2.0 ** -n * (1.0 - tol):
            i, j = np.unravel_index(np.argmin(sub), sub.shape)
            ok, detail = False, (
                f"level {n}: points {ids[i]},{ids[j]} at {sub[i, j]:.6g} "
                f"< {(2.0 / 3.0) * 2.0 ** -n:.6g}")
            break
    entries.append(("separation", ok, detail))

    ok, detail = True, "E_n matches pairs of V_n within (0, 3*2^-n]"
    for n in range(N + 1):
        ids = net.levels[n]
        sub = rdist[np.ix_(ids, ids)]
        ii, jj = np.nonzero(np.triu((sub > 0.0) & (sub <= 3.0 * 2.0 ** -n), k=1))
        want = {(int(ids[a]), int(ids[b])) for a, b in zip(ii, jj)}
        have = {(int(a), int(b)) for a, b in net.edges[n]}
        if want != have:
            diff = (want ^ have) or {("?", "?")}
            ok, detail = False, f"level {n}: edge mismatch, e.g. {next(iter(diff))}"
            break
    entries.append(("edges-match", ok, detail))

    ok, detail = True, "card(E_n) within edge bound"
    for n in range(N + 1):
        bound = _edge_bound(c, d, n2, n)
        if len(net.edges[n]) > math.ceil(bound + 1e-9):
            ok, detail = False, (
                f"level {n}: {len(net.edges[n])} edges > bound {bound:.6g}")
            break
    entries.append(("edge-cardinality", ok, detail))

    ok, detail = True, "close-neighbor count per point within n2^4"
    for n in range(N + 1):
        ids = net.levels[n]
        sub = rdist[np.ix_(ids, ids)]
        close = (sub > 0.0) & (sub <= 3.0 * 2.0 ** -n)
        counts = close.sum(axis=1)
        worst = int(np.argmax(counts))
        if counts[worst] > n2 ** 4:
            ok, detail = False, (
                f"level {n}: point {ids[worst]} has {counts[worst]} close "
                f"neighbors > n2^4 = {n2 ** 4}")
            break
    entries.append(("packing", ok, detail))

    ok, detail = True, "theta offsets consistent with edges and padding"
    if net.theta[0] != 0 or len(net.theta) != 2 * N + 3:
        ok, detail = False, "theta has wrong shape or nonzero start"
    else:
        for n in range(N + 1):
            m = net.theta[2 * n + 1] - net.theta[2 * n]
            pad = net.theta[2 * n + 2] - net.theta[2 * n + 1]
            need = max(2.0 ** (d * (n + 1)) - len(net.edges[n]), 0.0)
            if m != len(net.edges[n]):
                ok, detail = False, f"level {n}: edge run {m} != card(E_n)"
                break
            if pad + 1e-9 < need:
                ok, detail = False, f"level {n}: padding {pad} < required {need:.6g}"
                break
    entries.append(("theta-runs", ok, detail))

    ok, detail = True, "2^(dn) <= theta(2n) <= c*3^(d+1)*n2^4*2^(dn)/d for n >= 1"
    for n in range(1, N + 1):
        lo = 2.0 ** (d * n)
        hi = c * 3.0 ** (d + 1) / d * float(n2) ** 4 * 2.0 ** (d * n)
        t = net.theta[2 * n]
        if t + 1e-9 < lo or t > hi * (1.0 + tol):
            ok, detail = False, (
                f"level {n}: theta(2n) = {t} outside [{lo:.6g}, {hi:.6g}]")
            break
    entries.append(("theta-telescoping", ok, detail))

    return InvariantReport(entries=entries)


# -- JSON cache -------------------------------------------------------------


def net_to_json(net: ChainingNet) -> dict:
    return {
        "format": "chainbound-net v1",
        "n_points": net.space.n,
        "diameter": net.space.diameter,
        "dims": {"d": net.dims.d, "c": net.dims.c, "n2": net.dims.n2,
                 "source": net.dims.source},
        "n_levels": net.n_levels,
        "levels": [lvl.tolist() for lvl in net.levels],
        "edges": [e.tolist() for e in net.edges],
        "theta": list(net.theta),
        "dummy": net.dummy,
    }


def net_from_json(space: MetricSpace, obj: dict) -> ChainingNet:
    """Rehydrate a cached net against its original space.

    levels/edges/theta come from the cache; nearest-point maps are
    recomputed (they are cheap and determined by the space).
    """
    if obj.get("format") != "chainbound-net v1":
        raise DomainError("not a chainbound net cache")
    if obj["n_points"] != space.n:
        raise DomainError("net cache does not match the space (point count)")
    dims = DimensionInfo(**obj["dims"])
    N = obj["n_levels"]
    levels = [np.asarray(l, dtype=int) for l in obj["levels"]]
    edges = [np.asarray(e, dtype=int).reshape(-1, 2) for e in obj["edges"]]
    rdist = space.full_matrix() / space.diameter
    phi = []
    for n in range(N + 1):
        ids = levels[n]
        phi.append(ids[np.argmin(rdist[:, ids], axis=1)].astype(int))
    entry = np.full(space.n, -1, dtype=int)
    for n in range(N, -1, -1):
        entry[levels[n]] = n
    return ChainingNet(
        space=space, dims=dims, n_levels=N, levels=levels, edges=edges,
        theta=[int(t) for t in obj["theta"]], dummy=int(obj["dummy"]),
        phi=phi, entry_level=entry, rdist=rdist,
    )


def save_net(path, net: ChainingNet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net_to_json(net), fh)


def load_net(path, space: MetricSpace) -> ChainingNet:
    with open(path, "r", encoding="utf-8") as fh:
        return net_from_json(space, json.load(fh))
