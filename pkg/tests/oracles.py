"""Independent reference computations, deliberately naive.

None of these call into the code paths they are used to check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def metric_axioms_hold(d, tol=1e-9) -> bool:
    n = len(d)
    for i in range(n):
        if abs(d[i][i]) > tol:
            return False
        for j in range(n):
            if abs(d[i][j] - d[j][i]) > tol or d[i][j] < -tol:
                return False
            if i != j and d[i][j] <= tol:
                return False
            for k in range(n):
                if d[i][k] > d[i][j] + d[j][k] + tol:
                    return False
    return True


def hausdorff(d, s, t) -> float:
    one = max(min(d[a][b] for b in t) for a in s)
    two = max(min(d[a][b] for a in s) for b in t)
    return max(one, two)


def isometries(d, tol=1e-9) -> set[tuple[int, ...]]:
    n = len(d)
    return {
        p for p in itertools.permutations(range(n))
        if all(abs(d[p[i]][p[j]] - d[i][j]) <= tol for i in range(n) for j in range(n))
    }


def w2_uniform_permutations(d, xs, ys) -> float:
    """W2 between uniform measures on equal-size supports, over Birkhoff vertices."""
    n = len(xs)
    best = min(sum(d[xs[i]][ys[p[i]]] ** 2 for i in range(n)) / n for p in itertools.permutations(range(n)))
    return math.sqrt(best)


def wp_linprog(d, a, b, p=2.0) -> float:
    """Transport LP over the full grid with scipy's interior-point-free HiGHS."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    a_eq = []
    rhs = []
    for i in range(n):
        row = np.zeros((n, n))
        row[i, :] = 1
        a_eq.append(row.ravel())
        rhs.append(a[i])
    for j in range(n):
        col = np.zeros((n, n))
        col[:, j] = 1
        a_eq.append(col.ravel())
        rhs.append(b[j])
    res = linprog((d ** p).ravel(), A_eq=np.array(a_eq), b_eq=np.array(rhs), bounds=(0, None), method="highs")
    assert res.status == 0
    return max(res.fun, 0.0) ** (1 / p)


def distortion(dx, dy, image) -> float:
    n = len(image)
    return max((abs(dy[image[i]][image[j]] - dx[i][j]) for i in range(n) for j in range(n)), default=0.0)


def defect(dy, image) -> float:
    return max(min(dy[y][v] for v in image) for y in range(len(dy)))


def gh_all_relations(dx, dy) -> float:
    """Half the least distortion over every relation with surjective projections."""
    nx, ny = len(dx), len(dy)
    grid = [(i, j) for i in range(nx) for j in range(ny)]
    best = math.inf
    for mask in range(1, 1 << len(grid)):
        rel = [grid[k] for k in range(len(grid)) if mask >> k & 1]
        if {i for i, _ in rel} != set(range(nx)) or {j for _, j in rel} != set(range(ny)):
            continue
        dis = max(abs(dx[i][a] - dy[j][b]) for i, j in rel for a, b in rel)
        best = min(best, dis)
    return best / 2


def best_map_loops(dx, dy):
    """Lexicographically first map minimising max(distortion, defect)."""
    best, arg = math.inf, None
    for image in itertools.product(range(len(dy)), repeat=len(dx)):
        s = max(distortion(dx, dy, image), defect(dy, image))
        if s < best:
            best, arg = s, image
    return arg, best


def simplex_grid(n, m):
    return {c for c in itertools.product(range(m + 1), repeat=n) if sum(c) == m}


def w2_two_point(distance, a, b) -> float:
    """Two-point space: moving |a - b| of mass across the single gap."""
    return distance * math.sqrt(abs(a - b))
