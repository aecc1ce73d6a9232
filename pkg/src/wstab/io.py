"""JSON encodings for spaces, measures, maps, pairs, groups and quadruples.

Any field that holds a space, pair or group may instead hold a string path to
a JSON file with that object; relative paths resolve against the directory of
the file doing the referencing.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .equivariant import EquivariantApprox, RelativeEquivariantApprox
from .gh import ApproxCertificate, PointMap
from .lift import P2Net
from .metric import FiniteMetricSpace, IsometryGroup, MetricPair, enumerate_isometries, validate_metric
from .transport import DiscreteMeasure


def read_json(source: str | Path) -> tuple[Any, Path]:
    """Load JSON from a path, or from stdin when ``source`` is ``"-"``."""
    if str(source) == "-":
        return json.load(sys.stdin), Path.cwd()
    path = Path(source)
    return json.loads(path.read_text(encoding="utf-8")), path.parent


def _deref(value, base: Path):
    if isinstance(value, str):
        path = Path(value)
        if not path.is_absolute():
            path = base / path
        data, _ = read_json(path)
        return data
    return value


def space_to_dict(space: FiniteMetricSpace) -> dict[str, Any]:
    out: dict[str, Any] = {"n": space.n, "d": space.d.tolist()}
    if space.labels is not None:
        out["labels"] = list(space.labels)
    return out


def space_from_dict(data, base: Path = Path(".")) -> FiniteMetricSpace:
    data = _deref(data, base)
    space = validate_metric(data["d"], data.get("labels"))
    if "n" in data and int(data["n"]) != space.n:
        raise ValueError(f"declared n={data['n']} but matrix has {space.n} rows")
    return space


def measure_from_dict(data, space: FiniteMetricSpace | None = None, base: Path = Path(".")) -> DiscreteMeasure:
    if space is None:
        space = space_from_dict(data["space"], base)
    return DiscreteMeasure(space, np.asarray(data["w"], dtype=float))


def measure_to_dict(mu: DiscreteMeasure, inline_space: bool = False) -> dict[str, Any]:
    out: dict[str, Any] = {"w": mu.w.tolist()}
    if inline_space:
        out["space"] = space_to_dict(mu.space)
    return out


def map_to_dict(f: PointMap) -> dict[str, Any]:
    return {"source": space_to_dict(f.source), "target": space_to_dict(f.target), "image": list(f.image)}


def map_from_dict(data, base: Path = Path(".")) -> PointMap:
    return PointMap(space_from_dict(data["source"], base), space_from_dict(data["target"], base), data["image"])


def pair_to_dict(pair: MetricPair) -> dict[str, Any]:
    return {"space": space_to_dict(pair.space), "subset": list(pair.subset)}


def pair_from_dict(data, base: Path = Path(".")) -> MetricPair:
    data = _deref(data, base)
    return MetricPair(space_from_dict(data["space"], base), tuple(data["subset"]))


def subset_map_to_dict(g: PointMap, pair_x: MetricPair, pair_y: MetricPair) -> dict[str, Any]:
    """Subset maps are written with global target indices, aligned with ``pair_x.subset``."""
    return {
        "pairx": pair_to_dict(pair_x),
        "pairy": pair_to_dict(pair_y),
        "image": [pair_y.subset[j] for j in g.image],
    }


def subset_map_from_dict(data, base: Path = Path(".")) -> tuple[PointMap, MetricPair, MetricPair]:
    px, py = pair_from_dict(data["pairx"], base), pair_from_dict(data["pairy"], base)
    local = [py.position(j) for j in data["image"]]
    return PointMap(px.sub, py.sub, local), px, py


def group_to_dict(group: IsometryGroup, inline_space: bool = True) -> dict[str, Any]:
    out: dict[str, Any] = {"elements": [list(g) for g in group.elements]}
    if inline_space:
        out["space"] = space_to_dict(group.space)
    return out


def group_from_dict(data, space: FiniteMetricSpace | None = None, base: Path = Path(".")) -> IsometryGroup:
    data = _deref(data, base)
    if space is None:
        space = space_from_dict(data["space"], base)
    return IsometryGroup(space, tuple(tuple(g) for g in data["elements"]))


def certificate_to_dict(cert: ApproxCertificate) -> dict[str, Any]:
    return {
        "distortion": cert.distortion,
        "defect": cert.defect,
        "epsilon_claimed": cert.epsilon_claimed,
        "valid": cert.valid,
    }


def net_to_dict(net: P2Net) -> dict[str, Any]:
    return {
        "base": space_to_dict(net.base),
        "m": net.m,
        "counts": net.counts.tolist(),
        "atoms": net.weights.tolist(),
        "w2": net.net_metric.d.tolist(),
    }


def _table(raw, size: int, name: str) -> tuple[int, ...]:
    if isinstance(raw, list):
        table = [int(v) for v in raw]
    else:
        table = [int(raw[str(k)]) for k in range(size)]
    if len(table) != size:
        raise ValueError(f"{name} must have one entry per group element")
    return tuple(table)


def quadruple_from_dict(data, base: Path = Path(".")) -> EquivariantApprox | RelativeEquivariantApprox:
    """Decode ``{"x", "y", "f", "theta", "psi", "eps"}`` plus optional groups and subsets.

    Missing ``gx``/``gy`` default to the full isometry groups. ``theta`` and
    ``psi`` map element indices (as strings or list positions) to element
    indices. With ``ax``, ``ay`` and ``fprime`` (global target indices aligned
    with ``ax``) present, a relative quadruple is returned.
    """
    x, y = space_from_dict(data["x"], base), space_from_dict(data["y"], base)
    f = PointMap(x, y, data["f"])
    gx = group_from_dict(data["gx"], x, base) if "gx" in data else enumerate_isometries(x)
    gy = group_from_dict(data["gy"], y, base) if "gy" in data else enumerate_isometries(y)
    theta = _table(data["theta"], gx.order, "theta")
    psi = _table(data["psi"], gy.order, "psi")
    e = EquivariantApprox(f, gx, gy, theta, psi, float(data["eps"]))
    if "fprime" not in data:
        return e
    px, py = MetricPair(x, tuple(data["ax"])), MetricPair(y, tuple(data["ay"]))
    fp = PointMap(px.sub, py.sub, [py.position(j) for j in data["fprime"]])
    return RelativeEquivariantApprox(e, px, py, fp)


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)
