"""Discrete probability measures and exact optimal transport."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import linprog

from .errors import IndexOutOfRange, InvalidMeasure, MismatchedSpaces
from .metric import FiniteMetricSpace

# only the numpy backend is used; skip importing torch/jax/tf at load time
for _key in ("TENSORFLOW", "PYTORCH", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_key}", "1")
import ot  # noqa: E402

if TYPE_CHECKING:
    from .gh import PointMap

TAU_MASS = 1e-9
TAU_LP = 1e-9
MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability weights ``w`` on the points of ``space``."""

    space: FiniteMetricSpace
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (self.space.n,):
            raise InvalidMeasure(f"expected {self.space.n} weights, got {w.size}")
        if not np.all(np.isfinite(w)) or w.min(initial=0.0) < -TAU_MASS:
            raise InvalidMeasure("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > TAU_MASS:
            raise InvalidMeasure(f"weights sum to {w.sum():.12g}, not 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, space: FiniteMetricSpace) -> DiscreteMeasure:
        return cls(space, np.full(space.n, 1.0 / space.n))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.w > 0)

    def mix(self, other: DiscreteMeasure, t: float) -> DiscreteMeasure:
        """Convex combination ``(1 - t) * self + t * other``."""
        _same_space(self, other)
        return DiscreteMeasure(self.space, (1 - t) * self.w + t * other.w)

    def __repr__(self) -> str:
        return f"DiscreteMeasure({np.array2string(self.w, precision=4)})"


@dataclass(frozen=True, eq=False)
class Coupling:
    """A transport plan; rows are source points, columns target points."""

    pi: np.ndarray
    source: DiscreteMeasure
    target: DiscreteMeasure

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        if pi.shape != (self.source.space.n, self.target.space.n):
            raise ValueError(f"plan shape {pi.shape} does not match the measures")

    def marginal_error(self) -> float:
        return float(max(
            np.abs(self.pi.sum(axis=1) - self.source.w).max(),
            np.abs(self.pi.sum(axis=0) - self.target.w).max(),
        ))

    def is_feasible(self, tol: float = TAU_LP) -> bool:
        return self.pi.min() >= -tol and self.marginal_error() <= tol


def _same_space(mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    if not mu.space.same_as(nu.space):
        raise MismatchedSpaces("measures live on different spaces")


def _simplex_plan(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense LP fallback; HiGHS dual simplex returns a vertex of the polytope."""
    k, l = cost.shape
    rows = np.kron(np.eye(k), np.ones((1, l)))
    cols = np.kron(np.ones((1, k)), np.eye(l))
    a_eq = np.vstack([rows, cols[:-1]])
    b_eq = np.concatenate([a, b[:-1]])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return np.clip(res.x.reshape(k, l), 0.0, None)


def solve_transport(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Optimal plan for the balanced problem ``min <cost, pi>`` with marginals a, b.

    ``a`` and ``b`` must be strictly positive; zero-mass points are dropped by
    the callers before getting here.
    """
    a = a / a.sum()
    b = b / b.sum()
    if a.size == 1 or b.size == 1:
        return np.outer(a, b)
    plan, log = ot.emd(a, b, np.ascontiguousarray(cost), numItermax=MAX_ITER, log=True)
    if log["result_code"] != 1:
        plan = _simplex_plan(cost, a, b)
    return plan


def transport_cost(d: np.ndarray, a: np.ndarray, b: np.ndarray, p: float = 2.0) -> tuple[float, np.ndarray]:
    """Minimal ``sum pi * d**p`` between weight vectors on one space, with a full-size plan."""
    sa, sb = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    cost = d[np.ix_(sa, sb)] ** p
    sub = solve_transport(cost, a[sa], b[sb])
    plan = np.zeros((a.size, b.size))
    plan[np.ix_(sa, sb)] = sub
    return max(float((sub * cost).sum()), 0.0), plan


def wp_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0) -> tuple[float, Coupling]:
    """Exact p-Wasserstein distance and an optimal plan.

    Plans are not unique; callers must not rely on which optimal vertex comes back.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    _same_space(mu, nu)
    cost, plan = transport_cost(mu.space.d, mu.w, nu.w, p)
    return cost ** (1.0 / p), Coupling(plan, mu, nu)


def w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    return wp_distance(mu, nu, 2.0)[0]


def pushforward_weights(image, w: np.ndarray, n_target: int) -> np.ndarray:
    return np.bincount(np.asarray(image, dtype=int), weights=w, minlength=n_target)


def pushforward(f: PointMap, mu: DiscreteMeasure) -> DiscreteMeasure:
    """Image measure: the weight of ``j`` is the total weight of its preimage."""
    if not f.source.same_as(mu.space):
        raise MismatchedSpaces("map source differs from the measure's space")
    return DiscreteMeasure(f.target, pushforward_weights(f.image, mu.w, f.target.n))


def dirac(space: FiniteMetricSpace, i: int) -> DiscreteMeasure:
    if not 0 <= int(i) < space.n:
        raise IndexOutOfRange(f"index {i} outside 0..{space.n - 1}")
    w = np.zeros(space.n)
    w[int(i)] = 1.0
    return DiscreteMeasure(space, w)
