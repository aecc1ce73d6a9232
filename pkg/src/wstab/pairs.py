"""Approximations of metric pairs: restricting to the subsets and gluing back.

A subset map ``g`` is a :class:`PointMap` between the subspaces
``pair_x.sub`` and ``pair_y.sub``, so it uses local indices; ``pair.subset``
translates them to global ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionFailed
from .gh import TAU_CERT, ApproxCertificate, PointMap, certify
from .metric import MetricPair, hausdorff_distance


@dataclass(frozen=True, eq=False)
class PairApprox:
    f: PointMap
    g: PointMap
    pair_x: MetricPair
    pair_y: MetricPair
    epsilon: float

    @property
    def closeness(self) -> float:
        return closeness(self.f, self.g, self.pair_x, self.pair_y)

    @property
    def valid(self) -> bool:
        eps = self.epsilon + TAU_CERT
        return (
            certify(self.f, self.epsilon).valid
            and certify(self.g, self.epsilon).valid
            and self.closeness <= eps
        )


def _check_pairs(f: PointMap, pair_x: MetricPair, pair_y: MetricPair) -> None:
    if not (f.source.same_as(pair_x.space) and f.target.same_as(pair_y.space)):
        raise ValueError("pairs do not sit on the spaces of f")


def global_image(g: PointMap, pair_y: MetricPair) -> tuple[int, ...]:
    return tuple(pair_y.subset[j] for j in g.image)


def closeness(f: PointMap, g: PointMap, pair_x: MetricPair, pair_y: MetricPair) -> float:
    """max over the subset of d_Y(f(a), g(a))."""
    fa = [f.image[a] for a in pair_x.subset]
    return float(pair_y.space.d[fa, list(global_image(g, pair_y))].max())


def subset_hausdorff(f: PointMap, pair_x: MetricPair, pair_y: MetricPair) -> float:
    """Hausdorff distance between f(A_X) and A_Y inside Y."""
    return hausdorff_distance(pair_y.space, [f.image[a] for a in pair_x.subset], pair_y.subset)


def derive_subset_approx(
    f: PointMap,
    pair_x: MetricPair,
    pair_y: MetricPair,
    epsilon: float,
    tol: float = TAU_CERT,
) -> tuple[PointMap, ApproxCertificate]:
    """Send each ``a`` in A_X to a point of A_Y nearest ``f(a)``.

    Given ``f`` certified at ``epsilon`` and ``f(A_X)`` within Hausdorff
    distance ``epsilon`` of A_Y, the result certifies at ``3 * epsilon`` and
    stays ``epsilon``-close to ``f``. Ties go to the lowest index.
    """
    _check_pairs(f, pair_x, pair_y)
    cert = certify(f, epsilon, tol)
    if not cert.valid:
        raise PreconditionFailed("NotCertified", cert.measured, epsilon)
    dh = subset_hausdorff(f, pair_x, pair_y)
    if dh > epsilon + tol:
        raise PreconditionFailed("HausdorffTooLarge", dh, epsilon)
    d_to_a = pair_y.space.d[np.ix_([f.image[a] for a in pair_x.subset], pair_y.subset)]
    g = PointMap(pair_x.sub, pair_y.sub, tuple(int(k) for k in d_to_a.argmin(axis=1)))
    return g, certify(g, 3 * epsilon, tol)


def glue_pair_approx(
    f: PointMap,
    g: PointMap,
    pair_x: MetricPair,
    pair_y: MetricPair,
    epsilon: float,
    tol: float = TAU_CERT,
) -> tuple[PointMap, ApproxCertificate]:
    """Use ``g`` on A_X and ``f`` elsewhere.

    With ``f``, ``g`` certified at ``epsilon`` and ``epsilon``-close, the glued
    map has distortion at most ``2 * epsilon``. Its defect can also reach
    ``2 * epsilon`` (a target point covered only through ``f(a)`` with
    ``a`` in A_X loses up to ``epsilon`` when ``f(a)`` is swapped for
    ``g(a)``), so the certificate is issued at ``2 * epsilon``.
    """
    _check_pairs(f, pair_x, pair_y)
    if not (g.source.same_as(pair_x.sub) and g.target.same_as(pair_y.sub)):
        raise ValueError("g must map pair_x.sub to pair_y.sub")
    for name, h in (("f", f), ("g", g)):
        c = certify(h, epsilon, tol)
        if not c.valid:
            raise PreconditionFailed(f"NotCertified({name})", c.measured, epsilon)
    close = closeness(f, g, pair_x, pair_y)
    if close > epsilon + tol:
        raise PreconditionFailed("NotClose", close, epsilon)
    image = list(f.image)
    for k, a in enumerate(pair_x.subset):
        image[a] = pair_y.subset[g.image[k]]
    xi = PointMap(f.source, f.target, tuple(image))
    return xi, certify(xi, 2 * epsilon, tol)
