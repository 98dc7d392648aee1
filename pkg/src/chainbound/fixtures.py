"""Bundled point sets and random test fields used by tests and the CLI."""

from __future__ import annotations

import math

import numpy as np

from .holder import SampledField
from .metric import MetricSpace, euclidean_dims, from_points
from .stochastic import substream


def two_point_space() -> MetricSpace:
    return from_points(np.array([[0.0], [1.0]]))


def dyadic_grid_space(levels: int = 10) -> MetricSpace:
    """Uniform grid {k 2^-levels} on [0,1], 2^levels + 1 points."""
    n = 2 ** levels
    return from_points(np.arange(n + 1) / n)


def uniform_square_cloud(n: int = 500, seed: int = 7) -> MetricSpace:
    pts = substream(seed, 0).uniform(0.0, 1.0, size=(n, 2))
    return from_points(pts)


def sierpinski_sample(n: int = 200, seed: int = 11, burn_in: int = 50) -> MetricSpace:
    """Chaos-game sample of the Sierpinski triangle (corner midpoint maps)."""
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
    g = substream(seed, 0)
    pts = np.empty((n, 2))
    z = np.array([0.25, 0.25])
    for i in range(burn_in + n):
        z = 0.5 * (z + corners[g.integers(0, 3)])
        if i >= burn_in:
            pts[i - burn_in] = z
    return from_points(pts)


def standard_fixtures() -> dict:
    """The four named fixture spaces with their closed-form dimension info."""
    return {
        "two-point": (two_point_space(), euclidean_dims(1)),
        "dyadic-grid": (dyadic_grid_space(10), euclidean_dims(1)),
        "square-cloud": (uniform_square_cloud(500, seed=7), euclidean_dims(2)),
        "sierpinski": (sierpinski_sample(200, seed=11), euclidean_dims(2)),
    }


# -- test fields --------------------------------------------------------------


def lipschitz_field(space: MetricSpace, seed: int = 0) -> SampledField:
    """Random affine-plus-smooth field with bounded gradient."""
    g = substream(seed, 1)
    x = space.coords
    slope = g.normal(0.0, 1.0, size=x.shape[1])
    phase = g.uniform(0.0, 2.0 * math.pi)
    vals = x @ slope + 0.5 * np.sin(2.0 * math.pi * x.sum(axis=1) + phase)
    return SampledField(space=space, values=vals)


def sqrt_field(space: MetricSpace, seed: int = 0) -> SampledField:
    """Square root of the distance to a random anchor point: exactly
    1/2-Holder, with the constant attained at the anchor."""
    g = substream(seed, 2)
    anchor = int(g.integers(0, space.n))
    vals = np.sqrt(space.row(anchor))
    return SampledField(space=space, values=vals)


def brownian_field(space: MetricSpace, seed: int = 0) -> SampledField:
    """Rough Gaussian field.

    On 1-d spaces: a Brownian path indexed by the sorted coordinate.  On
    higher-dimensional spaces: a random cosine series with spectrum giving
    roughly 1/2-Holder samples.
    """
    g = substream(seed, 3)
    x = space.coords
    if x.shape[1] == 1:
        order = np.argsort(x[:, 0], kind="stable")
        gaps = np.diff(x[order, 0])
        steps = g.standard_normal(len(gaps)) * np.sqrt(np.maximum(gaps, 0.0))
        vals = np.empty(space.n)
        vals[order] = np.concatenate([[0.0], np.cumsum(steps)])
        return SampledField(space=space, values=vals)
    n_modes = 128
    freqs = g.normal(0.0, 8.0, size=(n_modes, x.shape[1]))
    amps = g.standard_normal(n_modes) / np.maximum(
        np.linalg.norm(freqs, axis=1), 1.0
    )
    phases = g.uniform(0.0, 2.0 * math.pi, n_modes)
    vals = np.cos(x @ freqs.T + phases) @ amps
    return SampledField(space=space, values=vals)


def field_catalog(space: MetricSpace, count: int, seed: int = 0) -> list[SampledField]:
    """``count`` fields cycling through the three families above."""
    makers = (lipschitz_field, sqrt_field, brownian_field)
    return [makers[i % 3](space, seed=seed + i) for i in range(count)]
