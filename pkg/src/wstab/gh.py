"""Gromov-Hausdorff approximations: measurement, certification and search.

An ``eps``-approximation here is a map with distortion at most ``eps`` whose
image is ``eps``-dense in the target. The GH distance is half the least
distortion of a correspondence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import TooLarge
from .metric import FiniteMetricSpace

TAU_CERT = 1e-7
GH_CAP = 5
MAP_SEARCH_CAP = 200_000


@dataclass(frozen=True, eq=False)
class PointMap:
    """A total map between the index sets of two spaces."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    image: tuple[int, ...]

    def __post_init__(self):
        img = tuple(int(j) for j in self.image)
        if len(img) != self.source.n:
            raise ValueError(f"map has {len(img)} images for {self.source.n} source points")
        if any(not 0 <= j < self.target.n for j in img):
            raise ValueError("image index outside the target")
        object.__setattr__(self, "image", img)

    @classmethod
    def identity(cls, space: FiniteMetricSpace) -> PointMap:
        return cls(space, space, tuple(range(space.n)))

    def __call__(self, i: int) -> int:
        return self.image[i]

    def then(self, other: PointMap) -> PointMap:
        """``other o self``."""
        if not self.target.same_as(other.source):
            raise ValueError("maps are not composable")
        return PointMap(self.source, other.target, tuple(other.image[j] for j in self.image))

    def __repr__(self) -> str:
        return f"PointMap({list(self.image)})"


@dataclass(frozen=True)
class ApproxCertificate:
    distortion: float
    defect: float
    epsilon_claimed: float
    valid: bool

    @property
    def measured(self) -> float:
        """The least epsilon this map certifies at."""
        return max(self.distortion, self.defect)


def _distortion(dx: np.ndarray, dy: np.ndarray, image: Sequence[int]) -> float:
    img = np.asarray(image)
    if img.size == 0:
        return 0.0
    return float(np.abs(dy[np.ix_(img, img)] - dx).max())


def _defect(dy: np.ndarray, image: Sequence[int]) -> float:
    return float(dy[:, np.asarray(image)].min(axis=1).max())


def distortion(f: PointMap) -> float:
    """Largest change of any pairwise distance under ``f``."""
    return _distortion(f.source.d, f.target.d, f.image)


def surjectivity_defect(f: PointMap) -> float:
    """How far the farthest target point is from the image of ``f``."""
    return _defect(f.target.d, f.image)


def certify(f: PointMap, epsilon: float, tol: float = TAU_CERT) -> ApproxCertificate:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    dis, dfc = distortion(f), surjectivity_defect(f)
    return ApproxCertificate(dis, dfc, float(epsilon), max(dis, dfc) <= epsilon + tol)


# -- correspondences ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Correspondence:
    """A relation whose projections onto both spaces are surjective."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    relation: frozenset[tuple[int, int]]

    def __post_init__(self):
        rel = frozenset((int(i), int(j)) for i, j in self.relation)
        object.__setattr__(self, "relation", rel)
        if {i for i, _ in rel} != set(range(self.source.n)):
            raise ValueError("relation misses a source point")
        if {j for _, j in rel} != set(range(self.target.n)):
            raise ValueError("relation misses a target point")

    def distortion(self) -> float:
        pairs = np.array(sorted(self.relation))
        i, j = pairs[:, 0], pairs[:, 1]
        return float(np.abs(self.source.d[np.ix_(i, i)] - self.target.d[np.ix_(j, j)]).max())


def correspondence_from_map(f: PointMap) -> Correspondence:
    """Graph of ``f`` plus, for each target point missed by ``f``, a pair with a
    source point whose image is nearest to it (lowest index on ties)."""
    rel = {(i, j) for i, j in enumerate(f.image)}
    hit = set(f.image)
    dy = f.target.d[:, np.asarray(f.image)]
    for y in range(f.target.n):
        if y not in hit:
            rel.add((int(np.argmin(dy[y])), y))
    return Correspondence(f.source, f.target, frozenset(rel))


def gh_upper_from_map(f: PointMap) -> float:
    """Upper bound on the GH distance witnessed by ``f``."""
    return 0.5 * correspondence_from_map(f).distortion()


def gh_lower_diameter(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    return 0.5 * abs(float(x.d.max()) - float(y.d.max()))


def gh_distance_bruteforce(x: FiniteMetricSpace, y: FiniteMetricSpace, cap: int = GH_CAP) -> float:
    """Exact GH distance by branch and bound over correspondences.

    Distortion only grows when pairs are added, so it is enough to search the
    relations made of a map ``phi: X -> Y`` plus one partner for each point of
    ``Y`` that ``phi`` misses; every correspondence contains one of these.
    """
    nx, ny = x.n, y.n
    if max(nx, ny) > cap:
        raise TooLarge("correspondence enumeration", max(nx, ny), cap)
    cost = np.abs(x.d[:, None, :, None] - y.d[None, :, None, :]).tolist()  # [i][j][i'][j']
    best = [max(float(x.d.max()), float(y.d.max()))]  # the full product relation
    chosen: list[tuple[int, int]] = []

    def gain(i: int, j: int, cur: float) -> float:
        row = cost[i][j]
        for a, b in chosen:
            c = row[a][b]
            if c > cur:
                cur = c
        return cur

    def cover(uncovered: list[int], k: int, cur: float) -> None:
        if k == len(uncovered):
            best[0] = cur
            return
        j = uncovered[k]
        for i in sorted(range(nx), key=lambda i: gain(i, j, cur)):
            nxt = gain(i, j, cur)
            if nxt >= best[0]:
                break
            chosen.append((i, j))
            cover(uncovered, k + 1, nxt)
            chosen.pop()

    def assign(i: int, cur: float, hit: tuple[int, ...]) -> None:
        if i == nx:
            cover([j for j in range(ny) if hit[j] == 0], 0, cur)
            return
        for j in sorted(range(ny), key=lambda j: gain(i, j, cur)):
            nxt = gain(i, j, cur)
            if nxt >= best[0]:
                break
            chosen.append((i, j))
            assign(i + 1, nxt, hit[:j] + (hit[j] + 1,) + hit[j + 1:])
            chosen.pop()

    assign(0, 0.0, (0,) * ny)
    return 0.5 * best[0]


# -- map search --------------------------------------------------------------


def _score_maps(dx: np.ndarray, dy: np.ndarray, maps: np.ndarray) -> np.ndarray:
    dis = np.abs(dy[maps[:, :, None], maps[:, None, :]] - dx[None]).max(axis=(1, 2))
    dfc = dy[:, maps].min(axis=2).max(axis=0)
    return np.maximum(dis, dfc)


def _exhaustive(x: FiniteMetricSpace, y: FiniteMetricSpace, chunk: int = 50_000) -> tuple[int, ...]:
    best_score, best_map = np.inf, None
    it = itertools.product(range(y.n), repeat=x.n)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        maps = np.array(block, dtype=np.intp).reshape(len(block), x.n)
        scores = _score_maps(x.d, y.d, maps)
        k = int(np.argmin(scores))
        if scores[k] < best_score:  # strict: the earlier chunk wins ties
            best_score, best_map = scores[k], tuple(int(v) for v in maps[k])
    return best_map


def _objective(dx, dy, img) -> tuple[float, float]:
    img = np.asarray(img)
    err = np.abs(dy[np.ix_(img, img)] - dx)
    return max(float(err.max()), _defect(dy, img)), float(err.sum())


def _local_search(dx, dy, start: Sequence[int], max_rounds: int = 200) -> tuple[int, ...]:
    img = list(start)
    obj = _objective(dx, dy, img)
    for _ in range(max_rounds):
        improved = False
        for i in range(len(img)):
            for j in range(dy.shape[0]):
                if j == img[i]:
                    continue
                trial = img[:i] + [j] + img[i + 1:]
                o = _objective(dx, dy, trial)
                if o < obj:
                    img, obj, improved = trial, o, True
        if not improved:
            break
    return tuple(img)


def _anchored_starts(dx, dy) -> list[tuple[int, ...]]:
    starts = []
    for y0 in range(dy.shape[0]):
        mismatch = np.abs(dx[0][:, None] - dy[y0][None, :])
        starts.append(tuple(int(v) for v in mismatch.argmin(axis=1)))
    return starts


def best_approx_search(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    mode: str = "auto",
    cap: int = MAP_SEARCH_CAP,
    candidates: Iterable[PointMap] = (),
) -> tuple[PointMap, ApproxCertificate]:
    """Find a map ``X -> Y`` with small ``max(distortion, defect)``.

    ``mode="exhaustive"`` scans all ``|Y|**|X|`` maps and returns the
    lexicographically first minimiser; it raises :class:`TooLarge` beyond
    ``cap``. ``mode="heuristic"`` runs single-point local search from
    anchored greedy starts and any supplied ``candidates``, so its
    certificate is an upper bound only. ``"auto"`` picks exhaustive when
    within the cap.
    """
    size = y.n ** x.n
    if mode == "auto":
        mode = "exhaustive" if size <= cap else "heuristic"
    if mode == "exhaustive":
        if size > cap:
            raise TooLarge("map enumeration", size, cap)
        image = _exhaustive(x, y)
    elif mode == "heuristic":
        starts = [tuple(c.image) for c in candidates] + _anchored_starts(x.d, y.d)
        results = [_local_search(x.d, y.d, s) for s in starts]
        image = min(results, key=lambda img: (_objective(x.d, y.d, img)[0], img))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    f = PointMap(x, y, image)
    cert = certify(f, 0.0)
    return f, certify(f, cert.measured)
