"""Equivariant approximations, pushforward groups and their lifts to nets.

Group maps ``theta: G_X -> G_Y`` and ``psi: G_Y -> G_X`` are lookup tables
of element indices into ``group.elements``. An ``eps``-equivariant
approximation is a map ``f`` certified at ``eps`` with

    d_Y(f(g x), theta(g)(f(x))) <= eps   for all g in G_X, x in X,
    d_Y(f(psi(l)(x)), l(f(x))) <= eps    for all l in G_Y, x in X.

No homomorphism property of ``theta`` or ``psi`` is assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotInvariant, NotIsometric, PreconditionFailed
from .gh import TAU_CERT, ApproxCertificate, PointMap, certify
from .lift import Lift, P2Net, lift_approximation, lift_counts
from .metric import IsometryGroup, MetricPair, uniform_group_distance
from .pairs import closeness


@dataclass(frozen=True, eq=False)
class EquivariantApprox:
    f: PointMap
    group_x: IsometryGroup
    group_y: IsometryGroup
    theta: tuple[int, ...]
    psi: tuple[int, ...]
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(int(k) for k in self.theta))
        object.__setattr__(self, "psi", tuple(int(k) for k in self.psi))
        if not (self.group_x.space.same_as(self.f.source) and self.group_y.space.same_as(self.f.target)):
            raise ValueError("groups must act on the source and target of f")
        if len(self.theta) != self.group_x.order or any(not 0 <= k < self.group_y.order for k in self.theta):
            raise ValueError("theta must send every element of G_X to an element of G_Y")
        if len(self.psi) != self.group_y.order or any(not 0 <= k < self.group_x.order for k in self.psi):
            raise ValueError("psi must send every element of G_Y to an element of G_X")


@dataclass(frozen=True, eq=False)
class RelativeEquivariantApprox:
    """An equivariant approximation plus a map ``f_prime: pair_x.sub -> pair_y.sub``."""

    base: EquivariantApprox
    pair_x: MetricPair
    pair_y: MetricPair
    f_prime: PointMap


@dataclass(frozen=True)
class EquivariantReport:
    certificate: ApproxCertificate
    dev_theta: float
    dev_psi: float
    valid: bool


@dataclass(frozen=True)
class RelativeReport:
    equivariant: EquivariantReport
    subset_certificate: ApproxCertificate
    closeness: float
    valid: bool


def _apply(f: PointMap, g: Sequence[int]) -> np.ndarray:
    """Image array of ``f o g``."""
    return np.asarray(f.image)[np.asarray(g)]


def theta_deviation(f: PointMap, gx: IsometryGroup, gy: IsometryGroup, theta: Sequence[int]) -> float:
    d = f.target.d
    fx = np.asarray(f.image)
    worst = 0.0
    for k, g in enumerate(gx.elements):
        lam = np.asarray(gy.elements[theta[k]])
        worst = max(worst, float(d[_apply(f, g), lam[fx]].max()))
    return worst


def psi_deviation(f: PointMap, gx: IsometryGroup, gy: IsometryGroup, psi: Sequence[int]) -> float:
    d = f.target.d
    fx = np.asarray(f.image)
    worst = 0.0
    for k, lam in enumerate(gy.elements):
        g = gx.elements[psi[k]]
        worst = max(worst, float(d[_apply(f, g), np.asarray(lam)[fx]].max()))
    return worst


def fit_group_maps(f: PointMap, gx: IsometryGroup, gy: IsometryGroup) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Choose ``theta`` and ``psi`` elementwise to minimise the deviations.

    Ties go to the lowest element index.
    """
    d = f.target.d
    fx = np.asarray(f.image)
    fg = np.array([_apply(f, g) for g in gx.elements])  # [k, x] = f(g_k x)
    lf = np.array([np.asarray(lam)[fx] for lam in gy.elements])  # [l, x] = lam_l(f x)
    dev = d[fg[:, None, :], lf[None, :, :]].max(axis=2)  # [k, l]
    theta = tuple(int(v) for v in dev.argmin(axis=1))
    psi = tuple(int(v) for v in dev.argmin(axis=0))
    return theta, psi


def certify_equivariant(e: EquivariantApprox, tol: float = TAU_CERT) -> EquivariantReport:
    cert = certify(e.f, e.epsilon, tol)
    dt = theta_deviation(e.f, e.group_x, e.group_y, e.theta)
    dp = psi_deviation(e.f, e.group_x, e.group_y, e.psi)
    ok = cert.valid and max(dt, dp) <= e.epsilon + tol
    return EquivariantReport(cert, dt, dp, ok)


def almost_inverse_check(e: EquivariantApprox) -> tuple[float, float]:
    """How far ``theta o psi`` and ``psi o theta`` are from the identities.

    Returns the largest uniform distance over G_Y, then over G_X. For an
    ``eps``-equivariant approximation both are at most ``4 * eps``.
    """
    gx, gy = e.group_x, e.group_y
    on_y = max(
        uniform_group_distance(gy.space, gy.elements[e.theta[e.psi[k]]], lam)
        for k, lam in enumerate(gy.elements)
    )
    on_x = max(
        uniform_group_distance(gx.space, gx.elements[e.psi[e.theta[k]]], g)
        for k, g in enumerate(gx.elements)
    )
    return on_y, on_x


def certify_relative_equivariant(r: RelativeEquivariantApprox, tol: float = TAU_CERT) -> RelativeReport:
    e = r.base
    for pair, group in ((r.pair_x, e.group_x), (r.pair_y, e.group_y)):
        if not pair.space.same_as(group.space):
            raise ValueError("pair and group live on different spaces")
        bad = group.leaves_invariant(pair.subset)
        if bad is not None:
            raise NotInvariant(pair.subset, bad)
    if not (r.f_prime.source.same_as(r.pair_x.sub) and r.f_prime.target.same_as(r.pair_y.sub)):
        raise ValueError("f_prime must map pair_x.sub to pair_y.sub")
    eq = certify_equivariant(e, tol)
    sub = certify(r.f_prime, e.epsilon, tol)
    close = closeness(e.f, r.f_prime, r.pair_x, r.pair_y)
    return RelativeReport(eq, sub, close, eq.valid and sub.valid and close <= e.epsilon + tol)


# -- pushforward to nets -----------------------------------------------------


def pushforward_perm(g: Sequence[int], net: P2Net) -> tuple[int, ...]:
    """The permutation of net atoms induced by ``g``."""
    f = PointMap(net.base, net.base, tuple(g))
    return tuple(net.index_of(c) for c in lift_counts(f, net.counts))


def pushforward_group(group: IsometryGroup, net: P2Net, tol: float = TAU_CERT) -> IsometryGroup:
    """The group of atom permutations ``mu -> g_# mu``, checked to preserve W2."""
    if not group.space.same_as(net.base):
        raise ValueError("group does not act on the net's base space")
    perms = [pushforward_perm(g, net) for g in group.elements]
    d = net.net_metric.d
    for g, p in zip(group.elements, perms):
        p = np.asarray(p)
        err = float(np.abs(d[np.ix_(p, p)] - d).max())
        if err > tol:
            raise NotIsometric(f"pushforward of {g} moves W2 by {err:.3g}")
    return IsometryGroup(net.net_metric, tuple(perms), tol)


def _transfer_table(table, src: IsometryGroup, dst: IsometryGroup, src_sharp, dst_sharp, net_src, net_dst):
    """Re-index ``table: src -> dst`` onto the pushforward groups."""
    out = [0] * src_sharp.order
    for k, g in enumerate(src.elements):
        out[src_sharp.index(pushforward_perm(g, net_src))] = dst_sharp.index(
            pushforward_perm(dst.elements[table[k]], net_dst)
        )
    return tuple(out)


@dataclass(frozen=True)
class LiftedEquivariantReport:
    """Deviations of the lifted quadruple, measured in W2 over all net atoms."""

    deviation_theta: float
    deviation_psi: float
    dirac_deviation_theta: float
    dirac_deviation_psi: float
    epsilon: float
    epsilon_tilde: float
    lifted: EquivariantReport
    valid: bool
    lift: Lift = field(repr=False, compare=False)


def lift_equivariant(
    e: EquivariantApprox, m: int, tol: float = TAU_CERT
) -> tuple[EquivariantApprox, LiftedEquivariantReport]:
    """Lift ``(f, theta, psi)`` to ``(f_#, theta_#, psi_#)`` on resolution-``m`` nets.

    ``theta_#(g_#) = theta(g)_#`` and likewise for ``psi``. The report holds
    ``max_{g, mu} W2(theta(g)_# f_# mu, f_# g_# mu)`` and its ``psi``
    analogue; each is bounded by the base deviation, hence by ``epsilon``.
    The lifted quadruple carries ``epsilon_tilde``.
    """
    base = certify_equivariant(e, tol)
    if not base.valid:
        raise PreconditionFailed("NotCertified", max(base.certificate.measured, base.dev_theta, base.dev_psi), e.epsilon)
    lift = lift_approximation(e.f, e.epsilon, m, tol)
    net_x, net_y = lift.net_x, lift.net_y
    gx_s = pushforward_group(e.group_x, net_x, tol)
    gy_s = pushforward_group(e.group_y, net_y, tol)
    theta_s = _transfer_table(e.theta, e.group_x, e.group_y, gx_s, gy_s, net_x, net_y)
    psi_s = _transfer_table(e.psi, e.group_y, e.group_x, gy_s, gx_s, net_y, net_x)
    lifted = EquivariantApprox(lift.F, gx_s, gy_s, theta_s, psi_s, lift.epsilon_tilde)

    F = np.asarray(lift.F.image)
    d = net_y.net_metric.d
    nx = net_x.base.n
    dev_t = np.zeros(gx_s.order)
    dirac_t = np.zeros(gx_s.order)
    for k, g in enumerate(gx_s.elements):
        lam = np.asarray(gy_s.elements[theta_s[k]])
        row = d[lam[F], F[np.asarray(g)]]
        dev_t[k], dirac_t[k] = row.max(), row[:nx].max()
    dev_p = np.zeros(gy_s.order)
    dirac_p = np.zeros(gy_s.order)
    for k, lam in enumerate(gy_s.elements):
        g = np.asarray(gx_s.elements[psi_s[k]])
        row = d[F[g], np.asarray(lam)[F]]
        dev_p[k], dirac_p[k] = row.max(), row[:nx].max()

    lifted_report = certify_equivariant(lifted, tol)
    worst = max(dev_t.max(), dev_p.max())
    report = LiftedEquivariantReport(
        float(dev_t.max()),
        float(dev_p.max()),
        float(dirac_t.max()),
        float(dirac_p.max()),
        e.epsilon,
        lift.epsilon_tilde,
        lifted_report,
        bool(worst <= e.epsilon + tol and lifted_report.valid),
        lift,
    )
    return lifted, report
