"""Scenario runner for convergent families of finite spaces.

Each family member ``X_i`` is compared with a fixed reference space standing
in for the limit. For every member the runner records GH bounds on the base
spaces and on their Wasserstein nets, the Dirac tracking error of the lifted
map and, when a group is configured, the equivariant deviations before and
after lifting. Every row also records whether the quantitative contracts held.

Notes on the families:

* ``ngon``: regular polygons with the arc-length (intrinsic circle) metric,
  so diameters tend to half the perimeter. The reference is a finer polygon.
* ``two_point``: two points at distance ``d_i``; the reference has ``limit``.
* ``random_perturbation``: a seeded random Euclidean base space whose
  distances are scaled by ``1 + u * magnitude_i`` (``u ~ U[-1, 1]``) and then
  closed under shortest paths; the unperturbed base is the reference.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from . import families
from .equivariant import EquivariantApprox, almost_inverse_check, certify_equivariant, lift_equivariant
from .errors import CapExceeded, IncompatibleGroup, TooLarge
from .gh import (
    GH_CAP,
    MAP_SEARCH_CAP,
    TAU_CERT,
    PointMap,
    best_approx_search,
    certify,
    gh_distance_bruteforce,
    gh_lower_diameter,
    gh_upper_from_map,
)
from .lift import NET_CAP, lift_approximation, lift_preserves_diracs_check, net_size
from .metric import FiniteMetricSpace, IsometryGroup

TAU_TREND = 1e-6
FAMILIES = ("ngon", "two_point", "random_perturbation")
CSV_COLUMNS = (
    "index", "n", "base_gh_lower", "base_gh_upper", "net_gh_upper",
    "dirac_hausdorff", "dev_theta", "dev_psi", "lift_eps_tilde",
)


@dataclass(frozen=True)
class ScenarioSpec:
    family: str
    indices: tuple[int, ...]
    m: int = 1
    perimeter: float = 2 * math.pi
    reference: int | None = None  # ngon: size of the reference polygon
    limit: float = 1.0  # two_point: reference distance
    distances: tuple[float, ...] | None = None  # two_point: d_i, default limit + 1/i
    seed: int | None = None  # random_perturbation
    points: int = 5
    magnitudes: tuple[float, ...] | None = None  # default 0.5 / i
    group: int | str | None = None  # cyclic order k, or "full"
    map_cap: int = MAP_SEARCH_CAP
    gh_cap: int = GH_CAP
    net_cap: int = NET_CAP
    tol: float = TAU_CERT
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        for name in ("distances", "magnitudes"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(float(x) for x in v))
                if len(v) != len(self.indices):
                    raise ValueError(f"{name} must align with indices")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if not self.indices or any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be nonempty and strictly increasing")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.family == "random_perturbation" and self.seed is None:
            raise ValueError("random_perturbation needs a seed")
        if self.family in ("two_point", "random_perturbation") and min(self.indices) < 1:
            raise ValueError("indices must be positive")
        if self.family == "ngon" and min(self.indices) < 1:
            raise ValueError("polygon sizes must be positive")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioSpec:
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @property
    def reference_size(self) -> int:
        return self.reference if self.reference is not None else 2 * max(self.indices)


@dataclass
class ScenarioRow:
    index: int
    n: int
    base_gh_lower: float
    base_gh_upper: float
    base_gh_exact: float | None
    base_epsilon: float
    base_defect: float
    net_gh_lower: float
    net_gh_upper: float
    net_distortion: float
    net_defect: float
    dirac_hausdorff: float
    lift_eps_tilde: float
    dev_theta: float | None = None
    dev_psi: float | None = None
    lifted_dev_theta: float | None = None
    lifted_dev_psi: float | None = None
    almost_inverse: tuple[float, float] | None = None
    contracts: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.contracts.values())


@dataclass
class ScenarioReport:
    spec: ScenarioSpec
    reference_n: int
    rows: list[ScenarioRow]
    co_decay: bool
    notes: tuple[str, ...] = ()

    @property
    def contracts_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> list[tuple[int, str]]:
        return [(r.index, k) for r in self.rows for k, v in r.contracts.items() if not v]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "spec": self.spec.to_dict(),
            "reference_n": self.reference_n,
            "co_decay": self.co_decay,
            "contracts_ok": self.contracts_ok,
            "notes": list(self.notes),
            "rows": [asdict(r) for r in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- family members ----------------------------------------------------------


def reference_space(spec: ScenarioSpec) -> FiniteMetricSpace:
    if spec.family == "ngon":
        return families.ngon(spec.reference_size, spec.perimeter)
    if spec.family == "two_point":
        return families.two_point(spec.limit)
    rng = np.random.default_rng(spec.seed)
    return families.random_euclidean(rng, spec.points)


def member(spec: ScenarioSpec, pos: int, ref: FiniteMetricSpace) -> tuple[FiniteMetricSpace, PointMap]:
    """The ``pos``-th family member and the natural map from it to the reference."""
    i = spec.indices[pos]
    if spec.family == "ngon":
        n, big = i, ref.n
        x = families.ngon(n, spec.perimeter)
        # nearest reference vertex to each polygon vertex, lowest index on ties
        image = tuple(int(math.floor(k * big / n + 0.5)) % big for k in range(n))
        return x, PointMap(x, ref, image)
    if spec.family == "two_point":
        d = spec.distances[pos] if spec.distances is not None else spec.limit + 1.0 / i
        x = families.two_point(d)
        return x, PointMap(x, ref, (0, 1))
    mag = spec.magnitudes[pos] if spec.magnitudes is not None else 0.5 / i
    rng = np.random.default_rng([spec.seed, i])
    x = families.perturb(ref, mag, rng)
    return x, PointMap(x, ref, tuple(range(ref.n)))


def _cyclic(space: FiniteMetricSpace, order: int) -> tuple[IsometryGroup, list[int]]:
    """Rotation group of the given order and the element index of each power."""
    n = space.n
    gen = families.rotation(n, n // order) if n > 1 else (0,)
    group = IsometryGroup.generated_by(space, [gen])
    powers = [group.index(families.rotation(n, (j * n // order) % n)) for j in range(order)]
    return group, powers


def group_data(spec: ScenarioSpec, f: PointMap) -> EquivariantApprox:
    """Groups on both sides with theta, psi sending generator to generator."""
    x, y = f.source, f.target
    k = spec.group
    if spec.family == "random_perturbation":
        if k not in (1, None):
            raise IncompatibleGroup("random perturbation families only carry the trivial group")
        k = 1
    if spec.family == "two_point" and k == "full":
        k = 2
    if k == "full":
        if spec.family != "ngon" or y.n % x.n:
            raise IncompatibleGroup(f"full rotation group needs {x.n} to divide {y.n}")
        gx, px = _cyclic(x, x.n)
        gy, py = _cyclic(y, y.n)
        theta = [0] * gx.order
        for s in range(x.n):
            theta[px[s]] = py[s * y.n // x.n]
        psi = [0] * gy.order
        for r in range(y.n):
            psi[py[r]] = px[((2 * r * x.n + y.n) // (2 * y.n)) % x.n]
    else:
        k = int(k)
        if k < 1 or x.n % k or y.n % k:
            raise IncompatibleGroup(f"cyclic order {k} must divide {x.n} and {y.n}")
        gx, px = _cyclic(x, k)
        gy, py = _cyclic(y, k)
        theta = [0] * gx.order
        psi = [0] * gy.order
        for j in range(k):
            theta[px[j]] = py[j]
            psi[py[j]] = px[j]
    e = EquivariantApprox(f, gx, gy, theta, psi, 0.0)
    rep = certify_equivariant(e)
    eps = max(rep.certificate.measured, rep.dev_theta, rep.dev_psi)
    return EquivariantApprox(f, gx, gy, theta, psi, eps)


# -- rows --------------------------------------------------------------------


def _choose_map(spec: ScenarioSpec, supplied: PointMap) -> PointMap:
    x, y = supplied.source, supplied.target
    mode = "exhaustive" if y.n ** x.n <= spec.map_cap else "heuristic"
    searched, cert = best_approx_search(x, y, mode=mode, cap=spec.map_cap, candidates=[supplied])
    if cert.measured < certify(supplied, 0.0).measured:
        return searched
    return supplied


def _row(spec: ScenarioSpec, pos: int, ref: FiniteMetricSpace, equivariant: bool) -> ScenarioRow:
    tol = spec.tol
    x, supplied = member(spec, pos, ref)
    index = spec.indices[pos]
    for space in (x, ref):
        size = net_size(space.n, spec.m)
        if size > spec.net_cap:
            raise CapExceeded(index, f"net of {space.n} points at m={spec.m} has {size} atoms > {spec.net_cap}")

    trivial = spec.group in (None, 1)
    eq = None
    if equivariant and not trivial:
        eq = group_data(spec, supplied)
        f = supplied
        eps = eq.epsilon
    else:
        f = _choose_map(spec, supplied)
        eps = certify(f, 0.0).measured
        if equivariant:
            eq = group_data(spec, f)
    base_cert = certify(f, eps, tol)

    upper = gh_upper_from_map(f)
    lower = gh_lower_diameter(x, ref)
    exact = None
    if max(x.n, ref.n) <= spec.gh_cap:
        exact = gh_distance_bruteforce(x, ref, spec.gh_cap)
        lower = max(lower, exact)

    lift = lift_approximation(f, eps, spec.m, tol)
    net_upper = gh_upper_from_map(lift.F)
    net_lower = gh_lower_diameter(lift.net_x.net_metric, lift.net_y.net_metric)
    try:
        net_lower = max(net_lower, gh_distance_bruteforce(lift.net_x.net_metric, lift.net_y.net_metric, spec.gh_cap))
    except TooLarge:
        pass
    dirac_h = lift_preserves_diracs_check(lift.F, lift.net_x, lift.net_y)

    row = ScenarioRow(
        index=index,
        n=x.n,
        base_gh_lower=lower,
        base_gh_upper=upper,
        base_gh_exact=exact,
        base_epsilon=eps,
        base_defect=base_cert.defect,
        net_gh_lower=net_lower,
        net_gh_upper=net_upper,
        net_distortion=lift.certificate.distortion,
        net_defect=lift.certificate.defect,
        dirac_hausdorff=dirac_h,
        lift_eps_tilde=lift.epsilon_tilde,
    )
    c = row.contracts
    c["base_lower_le_upper"] = lower <= upper + tol
    c["net_lower_le_upper"] = net_lower <= net_upper + tol
    c["base_gh_le_1.5eps"] = lower <= 1.5 * eps + tol
    c["net_distortion_le_eps_tilde"] = lift.certificate.distortion <= lift.epsilon_tilde + tol
    c["net_defect_le_eps_tilde"] = lift.certificate.defect <= lift.epsilon_tilde + tol
    c["dirac_hausdorff_le_defect"] = dirac_h <= base_cert.defect + tol

    if eq is not None:
        rep = certify_equivariant(eq, tol)
        _, lifted = lift_equivariant(eq, spec.m, tol)
        inv = almost_inverse_check(eq)
        row.dev_theta, row.dev_psi = rep.dev_theta, rep.dev_psi
        row.lifted_dev_theta, row.lifted_dev_psi = lifted.deviation_theta, lifted.deviation_psi
        row.almost_inverse = inv
        c["equivariant_certified"] = rep.valid
        c["lifted_deviation_le_eps"] = max(lifted.deviation_theta, lifted.deviation_psi) <= eq.epsilon + tol
        c["almost_inverse_le_4eps"] = max(inv) <= 4 * eq.epsilon + tol
    return row


def _non_increasing(values: Sequence[float], tol: float = TAU_TREND) -> bool:
    return all(b <= a + tol for a, b in zip(values, values[1:]))


def _run(spec: ScenarioSpec, equivariant: bool) -> ScenarioReport:
    ref = reference_space(spec)
    positions = range(len(spec.indices))
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            rows = list(pool.map(lambda p: _row(spec, p, ref, equivariant), positions))
    else:
        rows = [_row(spec, p, ref, equivariant) for p in positions]
    co_decay = _non_increasing([r.base_gh_upper for r in rows]) and _non_increasing([r.net_gh_upper for r in rows])
    notes = (
        "the limit space is a fixed reference member standing in for the continuum limit",
        "polygon families use the arc-length metric, not chordal distance",
        "net quantities are computed on finite grid nets of the Wasserstein space",
    )
    return ScenarioReport(spec, ref.n, rows, co_decay, notes)


def run_scenario(spec: ScenarioSpec) -> ScenarioReport:
    return _run(spec, equivariant=False)


def run_equivariant_scenario(spec: ScenarioSpec) -> ScenarioReport:
    if spec.group is None:
        raise IncompatibleGroup("an equivariant scenario needs a group")
    return _run(spec, equivariant=True)
