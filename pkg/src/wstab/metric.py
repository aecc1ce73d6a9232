"""Finite metric spaces, metric pairs and their isometry groups."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Asymmetry,
    EmptySubset,
    IndexOutOfRange,
    NegativeEntry,
    NonZeroDiagonal,
    NotIsometric,
    TooLarge,
    TriangleViolation,
    ZeroOffDiagonal,
)

TAU_METRIC = 1e-9
ISOMETRY_CAP = 10

Perm = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """An indexed point set with a distance matrix.

    Build instances through :func:`validate_metric`; the constructor itself
    trusts its input. The matrix is stored read-only.
    """

    d: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={self.n}, key={self.key[:10]})"

    @cached_property
    def key(self) -> str:
        """Content hash of the distance matrix."""
        return hashlib.sha256(np.ascontiguousarray(self.d).tobytes() + str(self.n).encode()).hexdigest()

    def same_as(self, other: FiniteMetricSpace) -> bool:
        return self is other or (self.n == other.n and np.array_equal(self.d, other.d))

    def check_index(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"index {i} outside 0..{self.n - 1}")
        return i

    def subspace(self, indices: Sequence[int]) -> FiniteMetricSpace:
        idx = [self.check_index(i) for i in indices]
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return FiniteMetricSpace(self.d[np.ix_(idx, idx)], labels)


def validate_metric(matrix, labels: Sequence[str] | None = None, tol: float = TAU_METRIC) -> FiniteMetricSpace:
    """Check the metric axioms on ``matrix`` and wrap it.

    Raises the :class:`~wstab.errors.MetricError` subclass for the first
    violated axiom, carrying the witnessing indices. Axioms are checked in the
    order diagonal, symmetry, sign, separation, triangle; within an axiom the
    lexicographically first witness is reported.
    """
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix has non-finite entries")
    n = d.shape[0]
    if labels is not None and len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} points")

    bad = np.flatnonzero(np.abs(np.diag(d)) > tol)
    if bad.size:
        i = int(bad[0])
        raise NonZeroDiagonal(i, value=d[i, i])

    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    hits = np.argwhere((np.abs(d - d.T) > tol) & upper)
    if hits.size:
        i, j = hits[0]
        raise Asymmetry(i, j, value=d[i, j] - d[j, i])

    hits = np.argwhere(d < -tol)
    if hits.size:
        i, j = hits[0]
        raise NegativeEntry(i, j, value=d[i, j])

    hits = np.argwhere((d <= tol) & upper)
    if hits.size:
        i, j = hits[0]
        raise ZeroOffDiagonal(i, j, value=d[i, j])

    # d[i, k] <= d[i, j] + d[j, k]; one slab per i keeps memory at n^2
    for i in range(n):
        slab = d[i, :, None] + d  # slab[j, k] = d[i, j] + d[j, k]
        hits = np.argwhere(d[i][None, :] > slab + tol)
        if hits.size:
            j, k = hits[0]
            raise TriangleViolation(i, j, k, value=d[i, k] - slab[j, k])

    return FiniteMetricSpace(d, None if labels is None else tuple(labels))


def diameter(space: FiniteMetricSpace) -> float:
    return float(space.d.max()) if space.n else 0.0


def _check_subset(space: FiniteMetricSpace, subset: Iterable[int]) -> list[int]:
    idx = [space.check_index(i) for i in subset]
    if not idx:
        raise EmptySubset("subset must be nonempty")
    return idx


def hausdorff_distance(space: FiniteMetricSpace, s: Iterable[int], t: Iterable[int]) -> float:
    """Hausdorff distance between two index sets of ``space``."""
    s, t = _check_subset(space, s), _check_subset(space, t)
    block = space.d[np.ix_(s, t)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


@dataclass(frozen=True, eq=False)
class MetricPair:
    """A space with a distinguished nonempty subset, stored as sorted unique indices."""

    space: FiniteMetricSpace
    subset: tuple[int, ...]

    def __post_init__(self):
        idx = sorted(set(_check_subset(self.space, self.subset)))
        object.__setattr__(self, "subset", tuple(idx))

    @cached_property
    def sub(self) -> FiniteMetricSpace:
        """The subset as a metric space in its own right (local indices)."""
        return self.space.subspace(self.subset)

    @cached_property
    def _position(self) -> dict[int, int]:
        return {a: k for k, a in enumerate(self.subset)}

    def position(self, i: int) -> int:
        """Local index of global point ``i``; raises KeyError if outside the subset."""
        return self._position[int(i)]

    def __contains__(self, i) -> bool:
        return int(i) in self._position


# -- isometry groups ---------------------------------------------------------


def compose(g: Perm, h: Perm) -> Perm:
    """``g o h``: apply ``h`` first."""
    return tuple(g[i] for i in h)


def invert(g: Perm) -> Perm:
    inv = [0] * len(g)
    for i, gi in enumerate(g):
        inv[gi] = i
    return tuple(inv)


def is_isometry(space: FiniteMetricSpace, perm: Sequence[int], tol: float = TAU_METRIC) -> bool:
    p = np.asarray(perm)
    if sorted(p.tolist()) != list(range(space.n)):
        return False
    return bool(np.all(np.abs(space.d[np.ix_(p, p)] - space.d) <= tol))


@dataclass(frozen=True, eq=False)
class IsometryGroup:
    """A finite group of distance-preserving permutations of a space.

    A permutation ``g`` is stored as a tuple with ``g[i]`` the image of ``i``.
    Elements are kept in lexicographic order, so the identity comes first.
    Construction verifies isometry, identity, closure and inverses.
    """

    space: FiniteMetricSpace
    elements: tuple[Perm, ...]
    tol: float = field(default=TAU_METRIC, repr=False)

    def __post_init__(self):
        elems = tuple(sorted({tuple(int(v) for v in g) for g in self.elements}))
        object.__setattr__(self, "elements", elems)
        n = self.space.n
        ident = tuple(range(n))
        if not elems or elems[0] != ident:
            raise ValueError("group must contain the identity permutation")
        for g in elems:
            if not is_isometry(self.space, g, self.tol):
                raise NotIsometric(f"{g} does not preserve distances")
        members = set(elems)
        for g in elems:
            if invert(g) not in members:
                raise ValueError(f"inverse of {g} missing")
            for h in elems:
                if compose(g, h) not in members:
                    raise ValueError(f"{g} o {h} missing; set is not closed")

    @classmethod
    def generated_by(cls, space: FiniteMetricSpace, generators: Iterable[Sequence[int]], tol: float = TAU_METRIC) -> IsometryGroup:
        gens = [tuple(int(v) for v in g) for g in generators]
        ident = tuple(range(space.n))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for g in frontier:
                for s in gens:
                    h = compose(s, g)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        return cls(space, tuple(seen), tol)

    @classmethod
    def trivial(cls, space: FiniteMetricSpace) -> IsometryGroup:
        return cls(space, (tuple(range(space.n)),))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.order

    @cached_property
    def _index(self) -> dict[Perm, int]:
        return {g: k for k, g in enumerate(self.elements)}

    def index(self, g: Sequence[int]) -> int:
        return self._index[tuple(g)]

    def product(self, a: int, b: int) -> int:
        """Index of ``elements[a] o elements[b]``."""
        return self._index[compose(self.elements[a], self.elements[b])]

    def inverse(self, a: int) -> int:
        return self._index[invert(self.elements[a])]

    def distance(self, a: int, b: int) -> float:
        return uniform_group_distance(self.space, self.elements[a], self.elements[b])

    def leaves_invariant(self, subset: Iterable[int]) -> tuple[int, ...] | None:
        """Return the first element not preserving ``subset``, or None."""
        s = set(int(i) for i in subset)
        for g in self.elements:
            if {g[i] for i in s} != s:
                return g
        return None


def enumerate_isometries(space: FiniteMetricSpace, cap: int = ISOMETRY_CAP, tol: float = TAU_METRIC) -> IsometryGroup:
    """All distance-preserving permutations of ``space``.

    The search is exhaustive over permutations, pruned as soon as a partial
    assignment breaks a distance.
    """
    n = space.n
    if n > cap:
        raise TooLarge("isometry enumeration", n, cap)
    d = space.d
    found: list[Perm] = []
    image = [-1] * n
    used = [False] * n

    def extend(i: int) -> None:
        if i == n:
            found.append(tuple(image))
            return
        for c in range(n):
            if used[c] or abs(d[c, c] - d[i, i]) > tol:
                continue
            if all(abs(d[image[j], c] - d[j, i]) <= tol for j in range(i)):
                image[i], used[c] = c, True
                extend(i + 1)
                used[c] = False
        image[i] = -1

    extend(0)
    return IsometryGroup(space, tuple(found), tol)


def uniform_group_distance(space: FiniteMetricSpace, g: Sequence[int], h: Sequence[int]) -> float:
    """Sup-distance between two maps of ``space``: max over points of d(g(i), h(i))."""
    if len(g) != space.n or len(h) != space.n:
        raise ValueError("permutations must act on the given space")
    if space.n == 0:
        return 0.0
    return float(space.d[np.asarray(g), np.asarray(h)].max())
