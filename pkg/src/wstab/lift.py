"""Finite nets of the 2-Wasserstein space and the pushforward lift of maps."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import PreconditionFailed, TooLarge
from .gh import TAU_CERT, ApproxCertificate, PointMap, certify
from .metric import TAU_METRIC, FiniteMetricSpace, diameter, hausdorff_distance, validate_metric
from .transport import DiscreteMeasure, transport_cost

NET_CAP = 5000


def grid_counts(n: int, m: int) -> np.ndarray:
    """All length-``n`` nonnegative integer vectors summing to ``m``.

    Rows ``0..n-1`` are ``m`` times the unit vectors in point order; the
    remaining rows follow in descending lexicographic order.
    """
    rows = []
    for bars in combinations(range(m + n - 1), n - 1):
        edges = (-1,) + bars + (m + n - 1,)
        rows.append(tuple(edges[k + 1] - edges[k] - 1 for k in range(n)))
    rows.sort(reverse=True)
    diracs = [tuple(m if k == i else 0 for k in range(n)) for i in range(n)]
    rest = [r for r in rows if max(r) < m]
    return np.array(diracs + rest, dtype=np.int64).reshape(-1, n)


def net_size(n: int, m: int) -> int:
    return math.comb(m + n - 1, n - 1)


def w2_matrix(d: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Pairwise W2 distances between rows of ``weights`` over the metric ``d``."""
    k = weights.shape[0]
    out = np.zeros((k, k))
    d = np.asarray(d)
    for i in range(k):
        for j in range(i + 1, k):
            cost, _ = transport_cost(d, weights[i], weights[j], 2.0)
            out[i, j] = out[j, i] = math.sqrt(cost)
    return out


_CACHE: dict[tuple[str, int], np.ndarray] = {}
_CACHE_LOCK = threading.Lock()


def _cached_w2(space: FiniteMetricSpace, counts: np.ndarray, m: int) -> np.ndarray:
    key = (space.key, m)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is None:
        hit = w2_matrix(space.d, counts / m)
        hit.setflags(write=False)
        with _CACHE_LOCK:
            _CACHE.setdefault(key, hit)
    return hit


def clear_net_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def cached_net_matrices() -> list[tuple[str, int, np.ndarray]]:
    """Every W2 matrix built so far as ``(space key, m, matrix)``."""
    with _CACHE_LOCK:
        return [(key, m, mat) for (key, m), mat in _CACHE.items()]


@dataclass(frozen=True, eq=False)
class P2Net:
    """All measures on ``base`` with weights in ``{0, 1/m, ..., 1}``.

    ``counts[k]`` holds the integer weights of atom ``k`` (scaled by ``m``);
    the first ``base.n`` atoms are the Dirac deltas. ``net_metric`` is the
    atoms' pairwise W2 matrix, validated as a metric space.
    """

    base: FiniteMetricSpace
    m: int
    counts: np.ndarray
    net_metric: FiniteMetricSpace

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.m

    def atom(self, k: int) -> DiscreteMeasure:
        return DiscreteMeasure(self.base, self.counts[k] / self.m)

    @property
    def atoms(self) -> list[DiscreteMeasure]:
        return [self.atom(k) for k in range(self.size)]

    @cached_property
    def _lookup(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(v) for v in c): k for k, c in enumerate(self.counts)}

    def index_of(self, counts) -> int:
        return self._lookup[tuple(int(v) for v in counts)]

    def dirac_index(self, i: int) -> int:
        return int(i)

    def __repr__(self) -> str:
        return f"P2Net(base={self.base!r}, m={self.m}, size={self.size})"


def build_p2_net(space: FiniteMetricSpace, m: int, cap: int = NET_CAP, tol: float = TAU_METRIC) -> P2Net:
    if m < 1:
        raise ValueError("resolution m must be at least 1")
    size = net_size(space.n, m)
    if size > cap:
        raise TooLarge("P2 net", size, cap)
    counts = grid_counts(space.n, m)
    counts.setflags(write=False)
    d = _cached_w2(space, counts, m)
    return P2Net(space, m, counts, validate_metric(d, tol=tol))


@dataclass(frozen=True)
class NetDensity:
    value: float
    a_priori_bound: float


def net_density(
    space: FiniteMetricSpace,
    m: int,
    samples: int = 64,
    seed: int = 0,
    measures=None,
) -> NetDensity:
    """Estimate how far a measure can be from the nearest net atom.

    Samples ``samples`` measures from a flat Dirichlet distribution (or uses
    the given ``measures``) and returns the largest distance to the net,
    alongside the rounding bound ``diam * sqrt(n / (2m))``.
    """
    net = build_p2_net(space, m)
    if measures is None:
        rng = np.random.default_rng(seed)
        measures = rng.dirichlet(np.ones(space.n), size=samples)
    worst = 0.0
    for w in measures:
        w = np.asarray(getattr(w, "w", w), dtype=float)
        best = min(transport_cost(space.d, w, a, 2.0)[0] for a in net.weights)
        worst = max(worst, math.sqrt(best))
    return NetDensity(worst, diameter(space) * math.sqrt(space.n / (2 * m)))


def epsilon_tilde(epsilon: float, diam_target: float) -> float:
    """Approximation error of the lifted map for a base error ``epsilon``."""
    return 6 * epsilon + math.sqrt(epsilon * (2 * diam_target + epsilon))


def lift_counts(f: PointMap, counts: np.ndarray) -> np.ndarray:
    """Pushforward of integer weight rows; exact since grid measures stay on the grid."""
    out = np.zeros((counts.shape[0], f.target.n), dtype=np.int64)
    for i, j in enumerate(f.image):
        out[:, j] += counts[:, i]
    return out


@dataclass(frozen=True, eq=False)
class Lift:
    F: PointMap
    certificate: ApproxCertificate
    epsilon_tilde: float
    net_x: P2Net
    net_y: P2Net


def lift_map(f: PointMap, net_x: P2Net, net_y: P2Net) -> PointMap:
    if net_x.m != net_y.m or not (net_x.base.same_as(f.source) and net_y.base.same_as(f.target)):
        raise ValueError("nets must be built on the map's spaces at one resolution")
    image = [net_y.index_of(c) for c in lift_counts(f, net_x.counts)]
    return PointMap(net_x.net_metric, net_y.net_metric, tuple(image))


def lift_approximation(f: PointMap, epsilon: float, m: int, tol: float = TAU_CERT) -> Lift:
    """Push ``f`` forward to the resolution-``m`` nets.

    Raises PreconditionFailed("NotCertified") unless ``f`` certifies at
    ``epsilon``. The returned certificate is measured on the nets against
    ``epsilon_tilde``.
    """
    base = certify(f, epsilon, tol)
    if not base.valid:
        raise PreconditionFailed("NotCertified", base.measured, epsilon)
    net_x, net_y = build_p2_net(f.source, m), build_p2_net(f.target, m)
    F = lift_map(f, net_x, net_y)
    eps_t = epsilon_tilde(epsilon, diameter(f.target))
    return Lift(F, certify(F, eps_t, tol), eps_t, net_x, net_y)


def dirac_embedding_check(net: P2Net) -> float:
    """Largest gap between W2 of two Diracs and the base distance."""
    n = net.base.n
    return float(np.abs(net.net_metric.d[:n, :n] - net.base.d).max())


def lift_preserves_diracs_check(F: PointMap, net_x: P2Net, net_y: P2Net) -> float:
    """Hausdorff distance, inside the target net, between F(Diracs) and the Diracs."""
    imgs = [F.image[net_x.dirac_index(i)] for i in range(net_x.base.n)]
    return hausdorff_distance(net_y.net_metric, imgs, range(net_y.base.n))
