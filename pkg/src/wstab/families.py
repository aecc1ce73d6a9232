"""Generators for the concrete spaces used in examples, tests and scenarios."""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .metric import FiniteMetricSpace, validate_metric


def ngon(n: int, perimeter: float = 2 * math.pi) -> FiniteMetricSpace:
    """Vertices of a regular n-gon on a circle, with arc-length distances.

    Distances are the intrinsic circle metric restricted to the vertices, so
    the diameter is half the perimeter for even ``n``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    step = perimeter / n
    k = np.arange(n)
    gap = np.abs(k[:, None] - k[None, :])
    return validate_metric(step * np.minimum(gap, n - gap))


def two_point(distance: float) -> FiniteMetricSpace:
    return validate_metric([[0.0, distance], [distance, 0.0]])


def point() -> FiniteMetricSpace:
    return validate_metric([[0.0]])


def rotation(n: int, steps: int = 1) -> tuple[int, ...]:
    return tuple((i + steps) % n for i in range(n))


def reflection(n: int, axis: int = 0) -> tuple[int, ...]:
    return tuple((axis - i) % n for i in range(n))


def euclidean(points) -> FiniteMetricSpace:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    return validate_metric(np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1))


def random_euclidean(rng: np.random.Generator, n: int, dim: int = 2, scale: float = 1.0) -> FiniteMetricSpace:
    """``n`` uniform points in ``[0, scale]^dim``; resampled until well separated."""
    while True:
        p = rng.uniform(0.0, scale, size=(n, dim))
        d = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
        if n < 2 or d[np.triu_indices(n, 1)].min() > 1e-3 * scale:
            return validate_metric(d)


def metric_closure(d: np.ndarray) -> np.ndarray:
    """Shortest-path closure; repairs triangle violations by shrinking entries."""
    out = shortest_path(np.asarray(d, dtype=float), method="FW", directed=False)
    return np.minimum(out, out.T)


def perturb(space: FiniteMetricSpace, magnitude: float, rng: np.random.Generator) -> FiniteMetricSpace:
    """Multiply each distance by ``1 + u * magnitude`` with ``u ~ U[-1, 1]``, then close.

    ``magnitude`` must be below 1 so distinct points stay apart.
    """
    if not 0 <= magnitude < 1:
        raise ValueError("magnitude must lie in [0, 1)")
    n = space.n
    u = rng.uniform(-1.0, 1.0, size=(n, n))
    u = np.triu(u, 1)
    u = u + u.T
    return validate_metric(metric_closure(space.d * (1.0 + magnitude * u)), space.labels)
