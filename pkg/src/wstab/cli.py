"""Command-line entry point: ``wstab <command> ...``.

Every input file may be ``-`` to read from stdin. Commands that check a
contract exit with status 1 when it fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import io
from .equivariant import (
    EquivariantApprox,
    almost_inverse_check,
    certify_equivariant,
    certify_relative_equivariant,
    lift_equivariant,
    pushforward_group,
)
from .errors import WstabError
from .experiments import ScenarioSpec, run_equivariant_scenario, run_scenario
from .gh import (
    GH_CAP,
    MAP_SEARCH_CAP,
    best_approx_search,
    certify,
    gh_distance_bruteforce,
    gh_lower_diameter,
    gh_upper_from_map,
)
from .lift import build_p2_net, dirac_embedding_check, lift_approximation, lift_preserves_diracs_check
from .metric import diameter, enumerate_isometries
from .pairs import derive_subset_approx, glue_pair_approx, subset_hausdorff
from .transport import wp_distance


def _out(text: str, path: str | None = None) -> None:
    if path and path != "-":
        Path(path).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
    else:
        print(text)


def cmd_validate(args) -> int:
    data, base = io.read_json(args.space)
    space = io.space_from_dict(data, base)
    _out(io.dumps({"valid": True, "n": space.n, "diameter": diameter(space)}))
    return 0


def cmd_isometries(args) -> int:
    data, base = io.read_json(args.space)
    group = enumerate_isometries(io.space_from_dict(data, base), cap=args.cap)
    _out(io.dumps(io.group_to_dict(group)), args.out)
    return 0


def cmd_w2(args) -> int:
    sdata, sbase = io.read_json(args.space)
    space = io.space_from_dict(sdata, sbase)
    mdata, mbase = io.read_json(args.mu)
    ndata, nbase = io.read_json(args.nu)
    mu = io.measure_from_dict(mdata, space, mbase)
    nu = io.measure_from_dict(ndata, space, nbase)
    value, plan = wp_distance(mu, nu, args.p)
    print(repr(value))
    if args.plan:
        handle = sys.stdout if args.plan == "-" else open(args.plan, "w", newline="", encoding="utf-8")
        try:
            csv.writer(handle, lineterminator="\n").writerows(plan.pi.tolist())
        finally:
            if handle is not sys.stdout:
                handle.close()
    return 0


def cmd_gh(args) -> int:
    xd, xb = io.read_json(args.x)
    yd, yb = io.read_json(args.y)
    x, y = io.space_from_dict(xd, xb), io.space_from_dict(yd, yb)
    exact = args.exact or (not args.heuristic and max(x.n, y.n) <= args.cap)
    if exact:
        payload = {"mode": "exact", "gh_distance": gh_distance_bruteforce(x, y, args.cap)}
    else:
        mode = "heuristic" if args.heuristic else "auto"
        f, cert = best_approx_search(x, y, mode=mode, cap=args.map_cap)
        payload = {
            "mode": "bound",
            "gh_upper": gh_upper_from_map(f),
            "gh_lower": gh_lower_diameter(x, y),
            "map": list(f.image),
            "certificate": io.certificate_to_dict(cert),
        }
    _out(io.dumps(payload))
    return 0


def cmd_certify(args) -> int:
    data, base = io.read_json(args.map)
    cert = certify(io.map_from_dict(data, base), args.eps)
    _out(io.dumps(io.certificate_to_dict(cert)))
    return 0 if cert.valid else 1


def cmd_pair_derive(args) -> int:
    fd, fb = io.read_json(args.f)
    f = io.map_from_dict(fd, fb)
    pxd, pxb = io.read_json(args.pairx)
    pyd, pyb = io.read_json(args.pairy)
    px = io.pair_from_dict(pxd, pxb)
    py = io.pair_from_dict(pyd, pyb)
    g, cert = derive_subset_approx(f, px, py, args.eps)
    payload = {"g": io.subset_map_to_dict(g, px, py), "certificate": io.certificate_to_dict(cert)}
    _out(io.dumps(payload), args.out)
    return 0 if cert.valid else 1


def cmd_pair_glue(args) -> int:
    fd, fb = io.read_json(args.f)
    f = io.map_from_dict(fd, fb)
    gd, gb = io.read_json(args.g)
    g, px, py = io.subset_map_from_dict(gd.get("g", gd), gb)
    xi, cert = glue_pair_approx(f, g, px, py, args.eps)
    payload = {
        "xi": list(xi.image),
        "certificate": io.certificate_to_dict(cert),
        "subset_hausdorff": subset_hausdorff(xi, px, py),
    }
    _out(io.dumps(payload))
    return 0 if cert.valid else 1


def cmd_p2net(args) -> int:
    data, base = io.read_json(args.space)
    net = build_p2_net(io.space_from_dict(data, base), args.m)
    payload = io.net_to_dict(net)
    payload["dirac_embedding_error"] = dirac_embedding_check(net)
    _out(io.dumps(payload), args.out)
    return 0


def cmd_lift(args) -> int:
    data, base = io.read_json(args.f)
    lift = lift_approximation(io.map_from_dict(data, base), args.eps, args.m)
    payload = {
        "F": list(lift.F.image),
        "epsilon_tilde": lift.epsilon_tilde,
        "certificate": io.certificate_to_dict(lift.certificate),
        "dirac_hausdorff": lift_preserves_diracs_check(lift.F, lift.net_x, lift.net_y),
        "atoms_x": lift.net_x.weights.tolist(),
        "atoms_y": lift.net_y.weights.tolist(),
    }
    _out(io.dumps(payload), args.out)
    return 0 if lift.certificate.valid else 1


def cmd_pushforward_group(args) -> int:
    data, base = io.read_json(args.group)
    group = io.group_from_dict(data, base=base)
    net = build_p2_net(group.space, args.m)
    sharp = pushforward_group(group, net)
    payload = {"m": args.m, "atoms": net.weights.tolist(), "elements": [list(g) for g in sharp.elements]}
    _out(io.dumps(payload), args.out)
    return 0


def _equiv_payload(e: EquivariantApprox, rep) -> dict:
    inv = almost_inverse_check(e)
    return {
        "certificate": io.certificate_to_dict(rep.certificate),
        "dev_theta": rep.dev_theta,
        "dev_psi": rep.dev_psi,
        "almost_inverse": list(inv),
        "almost_inverse_ok": max(inv) <= 4 * e.epsilon + 1e-7,
        "valid": rep.valid,
    }


def cmd_equiv_certify(args) -> int:
    data, base = io.read_json(args.quad)
    q = io.quadruple_from_dict(data, base)
    if isinstance(q, EquivariantApprox):
        rep = certify_equivariant(q)
        _out(io.dumps(_equiv_payload(q, rep)))
        return 0 if rep.valid else 1
    rel = certify_relative_equivariant(q)
    payload = _equiv_payload(q.base, rel.equivariant)
    payload.update(
        subset_certificate=io.certificate_to_dict(rel.subset_certificate),
        closeness=rel.closeness,
        valid=rel.valid,
    )
    _out(io.dumps(payload))
    return 0 if rel.valid else 1


def cmd_equiv_lift(args) -> int:
    data, base = io.read_json(args.quad)
    q = io.quadruple_from_dict(data, base)
    e = q if isinstance(q, EquivariantApprox) else q.base
    lifted, rep = lift_equivariant(e, args.m)
    payload = {
        "F": list(lifted.f.image),
        "theta": list(lifted.theta),
        "psi": list(lifted.psi),
        "epsilon": rep.epsilon,
        "epsilon_tilde": rep.epsilon_tilde,
        "deviation_theta": rep.deviation_theta,
        "deviation_psi": rep.deviation_psi,
        "dirac_deviation_theta": rep.dirac_deviation_theta,
        "dirac_deviation_psi": rep.dirac_deviation_psi,
        "valid": rep.valid,
    }
    _out(io.dumps(payload), args.out)
    return 0 if rep.valid else 1


def cmd_experiment(args) -> int:
    data, _ = io.read_json(args.spec)
    spec = ScenarioSpec.from_dict(data)
    report = run_equivariant_scenario(spec) if spec.group is not None else run_scenario(spec)
    _out(report.to_csv().rstrip("\n"), args.out)
    if args.json:
        _out(report.to_json(), args.json)
    for index, name in report.failures():
        print(f"contract failed at index {index}: {name}", file=sys.stderr)
    return 0 if report.contracts_ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("validate", help="check the metric axioms")
    c.add_argument("--space", required=True)
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("isometries", help="enumerate the isometry group")
    c.add_argument("--space", required=True)
    c.add_argument("--cap", type=int, default=10)
    c.add_argument("--out")
    c.set_defaults(func=cmd_isometries)

    c = sub.add_parser("w2", help="Wasserstein distance between two measures")
    c.add_argument("--space", required=True)
    c.add_argument("--mu", required=True)
    c.add_argument("--nu", required=True)
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--plan", help="write the optimal plan as CSV ('-' for stdout)")
    c.set_defaults(func=cmd_w2)

    c = sub.add_parser("gh", help="GH distance (exact) or bounds (heuristic)")
    c.add_argument("--x", required=True)
    c.add_argument("--y", required=True)
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--heuristic", action="store_true")
    c.add_argument("--cap", type=int, default=GH_CAP)
    c.add_argument("--map-cap", type=int, default=MAP_SEARCH_CAP)
    c.set_defaults(func=cmd_gh)

    c = sub.add_parser("certify", help="certify a map as an eps-approximation")
    c.add_argument("--map", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.set_defaults(func=cmd_certify)

    c = sub.add_parser("pair-derive", help="subset approximation from a pair approximation")
    c.add_argument("--f", required=True)
    c.add_argument("--pairx", required=True)
    c.add_argument("--pairy", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_pair_derive)

    c = sub.add_parser("pair-glue", help="glue a total map and a subset map")
    c.add_argument("--f", required=True)
    c.add_argument("--g", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.set_defaults(func=cmd_pair_glue)

    c = sub.add_parser("p2net", help="build a Wasserstein net and its W2 matrix")
    c.add_argument("--space", required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_p2net)

    c = sub.add_parser("lift", help="push a certified map forward to the nets")
    c.add_argument("--f", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--out")
    c.set_defaults(func=cmd_lift)

    c = sub.add_parser("pushforward-group", help="induced action of a group on a net")
    c.add_argument("--group", required=True)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--out")
    c.set_defaults(func=cmd_pushforward_group)

    c = sub.add_parser("equiv-certify", help="certify a (relative) equivariant quadruple")
    c.add_argument("--quad", required=True)
    c.set_defaults(func=cmd_equiv_certify)

    c = sub.add_parser("equiv-lift", help="lift an equivariant quadruple to the nets")
    c.add_argument("--quad", required=True)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--out")
    c.set_defaults(func=cmd_equiv_lift)

    c = sub.add_parser("experiment", help="run a scenario and write the CSV report")
    c.add_argument("--spec", required=True)
    c.add_argument("--out", help="CSV path (stdout when omitted)")
    c.add_argument("--json", help="also write the full JSON report here")
    c.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WstabError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
