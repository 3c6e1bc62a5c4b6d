"""Classification of projecting configurations (Gamma, Sigma) in PG(4, q^5).

For a plane Gamma disjoint from Sigma and a generator sigma of the stabiliser
of Sigma, A = Gamma ^ Gamma^{sigma^4} and B = Gamma ^ Gamma^{sigma^3}.  Everything
else (the frame, the LP tests, lambda/mu, the coordinates of u_4 and the
normal forms) is computed from these two points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .gfield import FieldCtx, SingularMatrix, mat_inv, mat_vec, rank, solve
from .linpoly import (
    LinearizedPoly,
    LinearSet,
    apply_projectivity,
    diagonal_equivalence,
    linear_set_of_pair,
    linear_set_of_vectors,
    pair_scattered,
)
from .projgeom import (
    MOORE,
    RATIONAL,
    GeometryError,
    ProjSubspace,
    SubgeometryModel,
    VertexMeetsSigma,
    functional_poly,
    gamma_from_pair,
    joint_kernel,
    meet,
    model_convert,
    normalize,
    point_rank,
    projection_pair,
    rank2_witness,
    sigma_apply,
    sigma_point,
    sigma_vec,
    span,
)

CLASSES = ("InvalidVertex", "NonScattered", "Pseudoregulus", "LP_ConfigI", "LP_ConfigII", "NewCandidate")
LP_CLASSES = ("LP_ConfigI", "LP_ConfigII")


class ConfigError(Exception):
    pass


class DegenerateFrame(ConfigError):
    pass


class DegenerateBasis(ConfigError):
    pass


class RankNotFive(ConfigError):
    pass


class RankNotFour(ConfigError):
    pass


class InconsistentSystem(ConfigError):
    pass


class MZero(ConfigError):
    pass


@dataclass
class ConfigReport:
    F: FieldCtx = field(repr=False)
    gamma: ProjSubspace
    model: SubgeometryModel
    cls: str
    A: tuple | None = None
    B: tuple | None = None
    rkA: int | None = None
    rkB: int | None = None
    configI: bool = False
    configII: bool = False
    trigger: str | None = None  # which of A, B was a line (pseudoregulus)
    witness: tuple | None = None  # point of rank <= 2 when not scattered
    lam: int | None = None
    mu: int | None = None
    u4coords: tuple | None = None
    alpha_beta: tuple | None = None
    rk44: dict | None = None

    @property
    def is_lp(self) -> bool:
        return self.cls in LP_CLASSES

    def orbit_A(self):
        return [normalize(self.F, sigma_vec(self.F, self.model, self.A, i)) for i in range(5)]

    def orbit_B(self):
        return [normalize(self.F, sigma_vec(self.F, self.model, self.B, i)) for i in range(5)]

    def to_json(self) -> dict:
        F = self.F
        fv = lambda v: None if v is None else [F.fmt(x) for x in v]
        fe = lambda x: None if x is None else F.fmt(x)
        out = {
            "class": self.cls,
            "model": self.model.variant,
            "s": self.model.s,
            "gamma": self.gamma.fmt(),
            "A": fv(self.A),
            "B": fv(self.B),
            "rkA": self.rkA,
            "rkB": self.rkB,
        }
        if self.trigger:
            out["lineTrigger"] = self.trigger
        if self.witness is not None:
            out["witness"] = fv(self.witness)
        if self.lam is not None:
            out["lambda"], out["mu"] = fe(self.lam), fe(self.mu)
        if self.u4coords is not None:
            out["u4coords"] = fv(self.u4coords)
        if self.alpha_beta is not None:
            a, b, s = self.alpha_beta
            out["alphaBeta"] = [fe(a), fe(b), s]
        if self.rk44 is not None:
            out["rk44"] = {k: (fe(v) if isinstance(v, int) and k != "lambdaIsOne" else v) for k, v in self.rk44.items()}
        return out


# ---------------------------------------------------------------------------
# A, B and the classification


@dataclass(frozen=True)
class ABResult:
    A: ProjSubspace
    B: ProjSubspace

    @property
    def line(self) -> str | None:
        if self.A.dim >= 1:
            return "A"
        if self.B.dim >= 1:
            return "B"
        return None


def extract_AB(F: FieldCtx, gamma: ProjSubspace, model: SubgeometryModel = MOORE, check_sigma: bool = True) -> ABResult:
    if check_sigma:
        g, h = projection_pair(F, gamma, model)
        if joint_kernel(g, h):
            raise VertexMeetsSigma("the vertex meets Sigma")
    A = meet(F, gamma, sigma_apply(F, model, gamma, 4))
    B = meet(F, gamma, sigma_apply(F, model, gamma, 3))
    if A.dim < 0 or B.dim < 0:
        raise GeometryError("Gamma meets its conjugate in the empty set")
    return ABResult(A, B)


def _meets(F, X, Y, gamma) -> bool:
    return meet(F, span(F, X, Y), gamma).dim >= 0


def classify(
    F: FieldCtx,
    gamma: ProjSubspace,
    model: SubgeometryModel = MOORE,
    strict: bool = True,
    scattered: bool | None = None,
) -> ConfigReport:
    """Classify the projection of Sigma from the plane gamma.

    ``scattered=True`` skips the scatteredness test (callers that already know).
    With ``strict`` a vertex meeting Sigma raises instead of being reported.
    """
    if gamma.dim != 2:
        if strict:
            raise GeometryError(f"vertex must be a plane, got dimension {gamma.dim}")
        return ConfigReport(F, gamma, model, "InvalidVertex")
    g, h = projection_pair(F, gamma, model)
    if joint_kernel(g, h):
        if strict:
            raise VertexMeetsSigma("the vertex meets Sigma")
        return ConfigReport(F, gamma, model, "InvalidVertex")
    if scattered is None:
        scattered = pair_scattered(g, h).scattered
    if not scattered:
        return ConfigReport(F, gamma, model, "NonScattered", witness=rank2_witness(F, gamma, model))
    ab = extract_AB(F, gamma, model, check_sigma=False)
    if ab.line:
        return ConfigReport(F, gamma, model, "Pseudoregulus", trigger=ab.line)
    A, B = ab.A.point(), ab.B.point()
    rep = ConfigReport(F, gamma, model, "NewCandidate", A=A, B=B)
    rep.rkA, rep.rkB = point_rank(F, model, A), point_rank(F, model, B)
    Ao, Bo = rep.orbit_A(), rep.orbit_B()
    rep.configI = _meets(F, Ao[2], Ao[4], gamma)
    rep.configII = _meets(F, Bo[3], Bo[4], gamma)
    if rep.configI:
        rep.cls = "LP_ConfigI"
    elif rep.configII:
        rep.cls = "LP_ConfigII"
    if (rep.rkA == 5 or rep.rkB == 5) and not rep.is_lp and strict:
        raise InconsistentSystem("a point of rank five in a configuration that is not LP")
    return rep


# ---------------------------------------------------------------------------
# invariant battery


def ef_points(rep: ConfigReport):
    F = rep.F
    Ao, Bo = rep.orbit_A(), rep.orbit_B()
    E = meet(F, span(F, Ao[0], Bo[0]), span(F, Ao[1], Bo[2]))
    Fp = meet(F, span(F, Ao[0], Bo[2]), span(F, Ao[1], Bo[0]))
    return E, Fp


def ef_lp_test(rep: ConfigReport) -> bool:
    F = rep.F
    Ao, Bo = rep.orbit_A(), rep.orbit_B()
    E, Fp = ef_points(rep)
    if E.dim != 0 or Fp.dim != 0:
        raise DegenerateFrame("diagonal points of the frame are not points")
    return span(F, Ao[2], Ao[4]).contains(E.point()) or span(F, Bo[3], Bo[4]).contains(Fp.point())


def invariant_battery(rep: ConfigReport) -> list[tuple[str, bool]]:
    """Geometric facts that hold for every MSLS that is not of pseudoregulus type."""
    if rep.cls in ("InvalidVertex", "NonScattered", "Pseudoregulus"):
        raise ConfigError(f"no invariants for class {rep.cls}")
    F = rep.F
    Ao, Bo = rep.orbit_A(), rep.orbit_B()
    frame = [Ao[0], Ao[1], Bo[0], Bo[2]]
    out = [
        ("ten_distinct", len(set(Ao) | set(Bo)) == 10),
        ("not_collinear", rank(F, frame) >= 3),
        ("four_independent_A", all(rank(F, c) == 4 for c in combinations(Ao, 4))),
        ("four_independent_B", all(rank(F, c) == 4 for c in combinations(Bo, 4))),
        (
            "frame",
            all(rep.gamma.contains(P) for P in frame) and all(rank(F, c) == 3 for c in combinations(frame, 3)),
        ),
        ("rank_at_least_4", rep.rkA >= 4 and rep.rkB >= 4),
    ]
    try:
        ef = ef_lp_test(rep)
        out.append(("ef_agrees_with_lines", ef == rep.is_lp))
    except DegenerateFrame:
        out.append(("ef_agrees_with_lines", False))
    return out


def identity_battery(rep: ConfigReport) -> list[tuple[str, bool]]:
    """invariant_battery plus the lambda/mu residuals, the relation on e and the LP test through e."""
    out = invariant_battery(rep)
    try:
        lm = lambda_mu_extract(rep)
        out.append(("coordinate_identities_zero", lm.residuals_zero()))
        U = u4_coordinates(rep, lm)
        out.append(("rank5_relation_zero", U.relation_residual == 0))
        out.append(("lp_equation_agrees_with_lines", U.checks["lp_equation_matches_class"]))
    except (DegenerateFrame, DegenerateBasis, MZero):
        out.append(("lambda_mu_defined", False))
    return out


# ---------------------------------------------------------------------------
# lambda, mu and the coordinates of u_4


def _qm(F: FieldCtx, i: int) -> int:
    """q^i reduced modulo q^5 - 1."""
    return pow(F.q, i % 5, F.order)


def _fr(F, s):
    return lambda x, i: F.frob(x, (i * s) % 5)


@dataclass
class LambdaMu:
    u: tuple
    v: tuple
    lam: int
    mu: int
    residual1: tuple
    residual2: tuple
    renormalized: bool

    def residuals_zero(self) -> bool:
        return not any(self.residual1) and not any(self.residual2)


def eq1_coeffs(F, s, lam, mu):
    fr = _fr(F, s)
    M, m = F.mul, F.sub
    P = lambda *xs: F.prod(xs)
    a0 = m(1, P(fr(lam, 4), fr(mu, 2), mu))
    a1 = m(P(fr(mu, 4), fr(mu, 2), mu), lam)
    a2 = M(mu, m(1, P(fr(lam, 1), fr(mu, 4), fr(mu, 2))))
    a3 = M(mu, m(P(fr(mu, 4), fr(mu, 2), fr(mu, 1)), fr(lam, 2)))
    a4 = P(fr(mu, 2), mu, m(1, P(fr(lam, 3), fr(mu, 4), fr(mu, 1))))
    return a0, a1, a2, a3, a4


def eq2_coeffs(F, s, lam, mu):
    fr = _fr(F, s)
    M, m = F.mul, F.sub
    P = lambda *xs: F.prod(xs)
    b0 = m(1, P(fr(lam, 2), fr(lam, 1), lam, fr(mu, 3)))
    b1 = M(lam, m(1, P(fr(lam, 3), fr(lam, 2), fr(lam, 1), fr(mu, 4))))
    b2 = m(M(fr(lam, 1), lam), mu)
    b3 = M(lam, m(M(fr(lam, 2), fr(lam, 1)), fr(mu, 1)))
    b4 = P(fr(lam, 1), lam, m(M(fr(lam, 3), fr(lam, 2)), fr(mu, 2)))
    return b0, b1, b2, b3, b4


def _comb(F, coeffs, vecs):
    return tuple(F.sum(F.mul(c, v[k]) for c, v in zip(coeffs, vecs)) for k in range(5))


def lambda_mu_extract(rep: ConfigReport, renormalize: bool = True) -> LambdaMu:
    """Vectors u, v with A = <u>, B = <v> and v = u - lam u^sigma + mu v^{sigma^2}."""
    if rep.A is None:
        raise DegenerateFrame("no A, B points")
    F, model = rep.F, rep.model
    s = model.s
    u = normalize(F, rep.A)
    v0 = normalize(F, rep.B)
    su = sigma_vec(F, model, u, 1)
    sv = sigma_vec(F, model, v0, 2)
    cols = [u, su, sv]
    sol = solve(F, [[c[k] for c in cols] for k in range(5)], list(v0))
    if sol is None or 0 in sol:
        raise DegenerateFrame("B is not a combination of A, A_1, B_2 with nonzero coefficients")
    l, m_, n = sol
    il = F.inv(l)
    v = tuple(F.mul(il, x) for x in v0)
    lam = F.neg(F.mul(m_, il))
    mu = F.mul(n, F.pow(l, _qm(F, 2 * s) - 1))
    renorm = False
    if renormalize and F.norm(mu) == 1 and mu != 1:
        rho = F.root(mu, _qm(F, 2 * s) - 1)
        u = tuple(F.mul(rho, x) for x in u)
        v = tuple(F.mul(rho, x) for x in v)
        lam = F.mul(lam, F.pow(rho, 1 - _qm(F, s)))
        mu = F.mul(mu, F.pow(rho, 1 - _qm(F, 2 * s)))
        renorm = True
    us = [sigma_vec(F, model, u, i) for i in range(5)]
    vs = [sigma_vec(F, model, v, i) for i in range(5)]
    lhs1 = tuple(F.mul(F.sub(1, F.norm(mu)), x) for x in v)
    r1 = tuple(F.sub(a, b) for a, b in zip(lhs1, _comb(F, eq1_coeffs(F, s, lam, mu), us)))
    lhs2 = tuple(F.mul(F.sub(1, F.norm(lam)), x) for x in u)
    r2 = tuple(F.sub(a, b) for a, b in zip(lhs2, _comb(F, eq2_coeffs(F, s, lam, mu), vs)))
    rep.lam, rep.mu = lam, mu
    return LambdaMu(u, v, lam, mu, r1, r2, renorm)


@dataclass
class U4Coords:
    coords: tuple  # (a, b, c, d, e)
    basis: list  # columns u, u1, u2, u3, v4
    basis_inv: list
    relation_residual: int
    lp_eq: int
    checks: dict

    @property
    def e(self):
        return self.coords[4]


def u4_coordinates(rep: ConfigReport, lm: LambdaMu) -> U4Coords:
    F, model = rep.F, rep.model
    s = model.s
    fr = _fr(F, s)
    P = lambda *xs: F.prod(xs)
    us = [sigma_vec(F, model, lm.u, i) for i in range(5)]
    v4 = sigma_vec(F, model, lm.v, 4)
    cols = [us[0], us[1], us[2], us[3], v4]
    Bm = [[c[k] for c in cols] for k in range(5)]
    try:
        Binv = mat_inv(F, Bm)
    except SingularMatrix as exc:
        raise DegenerateBasis("u, u1, u2, u3, v4 are dependent") from exc
    a, b, c, d, e = coords = tuple(mat_vec(F, Binv, us[4]))
    lam, mu = lm.lam, lm.mu
    relation = F.sub(F.mul(F.sub(1, P(fr(mu, 4), fr(mu, 1), fr(lam, 3))), e), F.sub(1, F.norm(mu)))
    l2, m2 = fr(lam, 2), fr(mu, 2)
    lp_eq = F.mul(F.add(F.mul(l2, e), F.mul(m2, d)), F.sub(F.sub(1, F.mul(fr(lam, 3), d)), P(fr(lam, 3), l2, c)))
    checks = {"relation": relation == 0, "lp_equation_matches_class": (lp_eq == 0) == rep.is_lp}
    if F.sub(F.mul(lam, F.mul(fr(mu, 3), fr(mu, 1))), 1) != 0:
        imu = F.inv(F.mul(fr(mu, 4), fr(mu, 1)))  # mu^{-q^{4s}-q^s}
        mq = F.inv(fr(mu, 1))
        rhs = (
            F.sub(fr(mu, 3), F.mul(fr(lam, 4), imu)),
            F.sub(mq, F.mul(lam, fr(mu, 3))),
            F.sub(F.mul(fr(mu, 3), mu), F.mul(fr(lam, 1), mq)),
            F.sub(1, P(l2, fr(mu, 3), mu)),
            F.sub(P(fr(mu, 3), m2, mu), imu),
        )
        lead = F.sub(fr(lam, 3), imu)
        checks["u4_closed_form"] = all(F.mul(lead, x) == y for x, y in zip(coords, rhs))
    rep.u4coords = coords
    return U4Coords(coords, Bm, Binv, relation, lp_eq, checks)


def sigma_matrix(rep: ConfigReport, U: U4Coords, i: int):
    """M_i with sigma^i acting on B-coordinates as X -> M_i X^{q^{si}}."""
    F = rep.F
    imgs = [sigma_vec(F, rep.model, [U.basis[k][j] for k in range(5)], i) for j in range(5)]
    cols = [mat_vec(F, U.basis_inv, im) for im in imgs]
    return [[cols[j][k] for j in range(5)] for k in range(5)]


def _projected_set(rep: ConfigReport, U: U4Coords, lm: LambdaMu) -> tuple[LinearizedPoly, LinearizedPoly]:
    """Projection of Sigma onto x0 = x1 = x4 = 0 in B-coordinates."""
    F = rep.F
    fr = _fr(F, rep.model.s)
    m2, l2 = fr(lm.mu, 2), fr(lm.lam, 2)
    R = U.basis_inv
    row1 = [F.sub(F.mul(m2, R[2][j]), R[4][j]) for j in range(5)]
    row2 = [F.add(F.mul(m2, R[3][j]), F.mul(l2, R[4][j])) for j in range(5)]
    return functional_poly(F, row1, rep.model), functional_poly(F, row2, rep.model)


def alpha_beta_set(F: FieldCtx, alpha: int, beta: int, s: int) -> LinearSet:
    g = LinearizedPoly(F, tuple(1 if i == 0 else (F.neg(alpha) if i == (2 * s) % 5 else 0) for i in range(5)))
    hc = [0] * 5
    hc[s % 5] = 1
    hc[(2 * s) % 5] = F.neg(beta)
    return linear_set_of_pair(g, LinearizedPoly(F, tuple(hc)))


# ---------------------------------------------------------------------------
# rank five


@dataclass
class Rk5Result:
    branch: str  # "mu1" or "general"
    e: int
    alpha: int
    beta: int
    s: int
    checks: dict
    scale: int | None  # c with {(X, cY)} of the projection equal to the emitted set

    def ok(self) -> bool:
        return all(self.checks.values()) and self.scale is not None


def _with_rank5_A(rep: ConfigReport) -> ConfigReport:
    if rep.rkA == 5:
        return rep
    if rep.rkB == 5:
        # for tau = sigma^2, Gamma ^ Gamma^{tau^4} is B
        return classify(rep.F, rep.gamma, rep.model.with_s(2 * rep.model.s), scattered=True)
    raise RankNotFive(f"rkA={rep.rkA}, rkB={rep.rkB}")


def canonical_rk5(rep: ConfigReport) -> Rk5Result:
    rep = _with_rank5_A(rep)
    F = rep.F
    s = rep.model.s
    fr = _fr(F, s)
    P = lambda *xs: F.prod(xs)
    inv, sub, add, mul, neg = F.inv, F.sub, F.add, F.mul, F.neg
    lm = lambda_mu_extract(rep)
    U = u4_coordinates(rep, lm)
    lam, mu = lm.lam, lm.mu
    a, b, c, d, e = U.coords
    if e == 0:
        raise InconsistentSystem("rank five point with e = 0")
    checks = {"identities": lm.residuals_zero(), **U.checks}

    # closed-form sigma^3 and sigma^2 matrices against the computed ones
    l2, m2 = fr(lam, 2), fr(mu, 2)
    M3 = [[0, a, 1, 0, 0], [0, b, 0, 1, 0], [0, c, 0, 0, 1], [1, d, 0, 0, neg(l2)], [0, e, 0, 0, m2]]
    im4 = inv(fr(mu, 4))
    M2 = [
        [0, 0, a, 1, mul(im4, sub(fr(lam, 4), a))],
        [0, 0, b, 0, neg(mul(im4, b))],
        [1, 0, c, 0, neg(mul(im4, c))],
        [0, 1, d, 0, neg(mul(im4, d))],
        [0, 0, e, 0, mul(im4, sub(1, e))],
    ]
    checks["M3"] = sigma_matrix(rep, U, 3) == M3
    checks["M2"] = sigma_matrix(rep, U, 2) == M2

    # second columns of M2 M3^{q^{2s}} = I
    r = sub(fr(c, 2), mul(im4, fr(e, 2)))
    sigma_system = [
        add(add(mul(a, r), fr(d, 2)), P(fr(lam, 4), im4, fr(e, 2))),
        sub(mul(b, r), 1),
        add(mul(c, r), fr(a, 2)),
        add(mul(d, r), fr(b, 2)),
        add(mul(e, r), mul(im4, fr(e, 2))),
    ]
    checks["sigma_system"] = not any(sigma_system)
    pw = lambda x, k: F.pow(x, k)
    Q = lambda i: _qm(F, i * s)
    ea = P(inv(mul(m2, mu)), pw(e, 1 - Q(1)), sub(fr(e, 1), 1))
    eb = neg(mul(fr(mu, 4), pw(e, 1 - Q(2))))
    ec = P(inv(m2), pw(e, 1 - Q(3)), sub(fr(e, 3), 1))
    ed = neg(P(fr(mu, 4), fr(mu, 1), pw(e, 1 - Q(4))))
    checks["sigma_solution"] = (a, b, c, d) == (ea, eb, ec, ed)
    if not checks["sigma_system"] or not checks["sigma_solution"]:
        raise InconsistentSystem("the sigma^2 sigma^3 system is not satisfied")
    if e == 1:
        checks["e1_is_lp"] = rep.is_lp

    g, h = _projected_set(rep, U, lm)
    proj = linear_set_of_pair(g, h)
    if mu == 1:
        branch = "mu1"
        checks["lambda_is_1"] = lam == 1
        checks["abcd_mu1"] = (a, b, c, d) == (
            sub(e, pw(e, 1 - Q(1))),
            neg(pw(e, 1 - Q(2))),
            sub(e, pw(e, 1 - Q(3))),
            neg(pw(e, 1 - Q(4))),
        )
        checks["e_in_fq"] = F.in_fq(e)
        lpc = mul(sub(e, 1), sub(sub(sub(e, pw(e, 1 - Q(3))), pw(e, 1 - Q(4))), 1))
        checks["lp_condition_mu1"] = (lpc == 0) == rep.is_lp
        alpha, beta = 1, sub(1, e)
    else:
        branch = "general"
        Nmu = F.norm(mu)
        # system from M1 u_1^sigma = u_2
        b3 = fr(b, 3)
        ce = [
            add(mul(a, b3), fr(c, 3)),
            add(mul(b3, b), fr(d, 3)),
            sub(add(mul(b3, c), fr(e, 3)), 1),
            sub(add(fr(a, 3), mul(b3, d)), mul(l2, fr(e, 3))),
            add(mul(b3, e), mul(m2, fr(e, 3))),
        ]
        checks["e_system"] = not any(ce)
        m431 = P(fr(mu, 4), fr(mu, 3), fr(mu, 1))
        closed = (
            sub(mul(fr(lam, 4), e), mul(m431, pw(e, 1 - Q(1)))),
            neg(mul(fr(mu, 4), pw(e, 1 - Q(2)))),
            sub(P(fr(lam, 1), fr(mu, 4), e), P(m431, mu, pw(e, 1 - Q(3)))),
            neg(P(fr(mu, 4), fr(mu, 1), pw(e, 1 - Q(4)))),
        )
        checks["e_system_solution"] = (a, b, c, d) == closed
        den = sub(1, P(fr(lam, 3), fr(mu, 4), fr(mu, 1)))
        checks["e_formula"] = den != 0 and e == F.div(sub(1, Nmu), den)
        rho = F.div(mu, mul(fr(lam, 1), lam))
        checks["rho_in_fq"] = F.in_fq(rho)
        Nl = F.norm(lam)
        num = sub(1, P(F.pow(rho, 5), Nl, Nl))
        dd = sub(1, P(rho, rho, Nl))
        checks["e_via_rho"] = dd != 0 and e == F.div(num, dd) and F.in_fq(e)
        checks["abcd_general"] = (a, b, c, d) == (
            mul(inv(mul(m2, mu)), sub(e, 1)),
            neg(fr(mu, 4)),
            mul(inv(m2), sub(e, 1)),
            neg(mul(fr(mu, 4), fr(mu, 1))),
        )
        Ao, Bo = rep.orbit_A(), rep.orbit_B()
        checks["line_A3_B1_meets_gamma"] = meet(F, span(F, Ao[3], Bo[1]), rep.gamma).dim == 0
        alpha = inv(m2)
        bnum = sub(l2, P(fr(mu, 4), m2, fr(mu, 1)))
        bden = mul(m2, sub(P(l2, fr(mu, 3), mu), 1))
        beta = F.div(bnum, bden)
    emitted = alpha_beta_set(F, alpha, beta, s)
    scale = diagonal_equivalence(proj, emitted)
    rep.alpha_beta = (alpha, beta, s)
    return Rk5Result(branch, e, alpha, beta, s, checks, scale)


# ---------------------------------------------------------------------------
# rank four / four


def c3_normal_set(F: FieldCtx, eta: int) -> LinearSet:
    """{<(eta y + theta, y + y^{q^4})> : theta in F_q, Tr(y) = 0}."""
    ys = np.array([x for x in range(F.size) if F.tr(x) == 0], dtype=np.int64)
    X, Y = [], []
    ey = F.v_mul(ys, eta)
    yy = F.v_add(ys, F.v_frob(ys, 4))
    for th in F.fq:
        X.append(F.v_add(ey, th))
        Y.append(yy)
    X, Y = np.concatenate(X), np.concatenate(Y)
    zero = np.flatnonzero((X == 0) & (Y == 0))
    # the pair (0, 0) at theta = y = 0 is not a domain vector
    first0 = int(np.flatnonzero((X == 0) & (Y == 0))[0]) if len(zero) else None
    if first0 is not None:
        X, Y = np.delete(X, first0), np.delete(Y, first0)
    return linear_set_of_vectors(F, X, Y)


@dataclass
class Rk44Result:
    branch: str  # "C3" (lambda = 1) or "C4"
    w: int
    lam: int
    eta: int | None
    k: int | None
    checks: dict
    transform: tuple  # 2x2 matrix taking the projection onto the emitted set

    def ok(self) -> bool:
        return all(self.checks.values())


def rk44_extract(rep: ConfigReport, samples: int = 16, seed: int = 0) -> Rk44Result:
    if rep.rkA != 4 or rep.rkB != 4:
        raise RankNotFour(f"rkA={rep.rkA}, rkB={rep.rkB}")
    if rep.model.s != 1:
        rep = classify(rep.F, rep.gamma, rep.model.with_s(1), scattered=True)
        if rep.rkA != 4 or rep.rkB != 4:
            raise RankNotFour("ranks change with the generator")
    F = rep.F
    inv, sub, add, mul, neg, fr, pw = F.inv, F.sub, F.add, F.mul, F.neg, F.frob, F.pow
    P = lambda *xs: F.prod(xs)
    lm = lambda_mu_extract(rep)
    if lm.mu != 1:
        raise InconsistentSystem("N(mu) != 1 although e = 0")
    U = u4_coordinates(rep, lm)
    a, b, c, d, e = U.coords
    lam = lm.lam
    checks = {"identities": lm.residuals_zero(), "relation": U.checks["relation"], "e_zero": e == 0}
    if e != 0:
        raise RankNotFour("u_4 has a nonzero v_4 coordinate")
    qm = lambda i: _qm(F, i)
    checks["sigma_system_e0"] = (
        a == pw(b, qm(4) + qm(2) + 1)
        and c == pw(b, -qm(3))
        and d == neg(pw(b, qm(2) + 1))
        and F.norm(b) == F.minus_one
    )
    if lam == 1:
        w = F.root(neg(b), 1 - qm(3))
        if w is None:
            raise InconsistentSystem("no w with b = -w^{1-q^3}")
    else:
        w = sub(lam, 1)
    abcd = (
        neg(pw(w, qm(4) - qm(3))),
        neg(pw(w, 1 - qm(3))),
        neg(pw(w, qm(1) - qm(3))),
        neg(pw(w, qm(2) - qm(3))),
    )
    checks["abcd_from_w"] = (a, b, c, d) == abcd
    rk = sub(
        F.sum([P(pw(lam, qm(3) + qm(2) + qm(1) + 1), a), P(pw(lam, qm(3) + qm(2) + qm(1)), b), P(pw(lam, qm(3) + qm(2)), c), P(fr(lam, 3), d)]),
        1,
    )
    checks["abcd_rank_zero"] = rk == 0
    if lam == 1:
        checks["trace_w_zero"] = F.tr(w) == 0
    else:
        checks["norm_lambda_one"] = F.norm(lam) == 1
    M1 = [
        [0, 0, 0, abcd[0], 1],
        [1, 0, 0, abcd[1], neg(lam)],
        [0, 1, 0, abcd[2], 1],
        [0, 0, 1, abcd[3], neg(fr(lam, 2))],
        [0, 0, 0, 0, 1],
    ]
    checks["M1"] = sigma_matrix(rep, U, 1) == M1

    # Sigma vectors in B-coordinates (F_q-linear in u: a basis and a few samples suffice)
    rng = np.random.default_rng(seed)
    us = list(F.basis) + [int(x) for x in rng.integers(1, F.size, samples)]
    ok_x = True
    for u in us:
        X = mat_vec(F, U.basis_inv, sigma_point(F, rep.model, u))
        t, th = X[3], X[4]
        if not F.in_fq(th):
            ok_x = False
            break
        x0 = add(mul(neg(pw(w, qm(4) - qm(3))), fr(t, 1)), th)
        x1 = F.sum([neg(mul(pw(w, 1 - qm(4)), fr(t, 2))), neg(mul(pw(w, 1 - qm(3)), fr(t, 1))), mul(sub(1, lam), th)])
        x2 = F.sum(
            [
                neg(mul(pw(w, qm(1) - 1), fr(t, 3))),
                neg(mul(pw(w, qm(1) - qm(4)), fr(t, 2))),
                neg(mul(pw(w, qm(1) - qm(3)), fr(t, 1))),
                mul(sub(F.from_int(2), fr(lam, 1)), th),
            ]
        )
        x3 = sub(mul(fr(w, 2), F.tr(mul(inv(fr(w, 2)), t))), P(F.from_int(2), sub(1, fr(lam, 2)), th))
        if (X[0], X[1], X[2]) != (x0, x1, x2) or x3 != 0:
            ok_x = False
            break
    checks["sigma_coordinates"] = ok_x

    g, h = _projected_set(rep, U, lm)
    proj = linear_set_of_pair(g, h)
    swap = ((0, 1), (1, 0))
    eta = fr(w, 2)
    ie4 = inv(fr(eta, 4))
    if lam == 1:
        branch, k = "C3", None
        T = ((0, 1), (ie4, 0))  # swap, then scale the second entry by eta^{-q^4}
        emitted = c3_normal_set(F, eta)
        checks["eta_trace_zero"] = F.tr(eta) == 0
    else:
        branch, k = "C4", fr(lam, 2)
        checks["k_is_1_plus_eta"] = k == add(1, eta)
        checks["norm_k_one"] = F.norm(k) == 1
        Tp = ((0, ie4), (1, neg(add(mul(ie4, eta), ie4))))
        T = tuple(tuple(F.sum(mul(Tp[i][m], swap[m][j]) for m in range(2)) for j in range(2)) for i in range(2))
        emitted = linear_set_of_pair(LinearizedPoly.monomial(F, 0), c4_poly(F, k))
    checks["projection_matches_form"] = apply_projectivity(proj, T).points == emitted.points
    rep.rk44 = {"branch": branch, "w": w, "lambda": lam, "eta": eta, "k": k, "lambdaIsOne": lam == 1}
    return Rk44Result(branch, w, lam, eta if lam == 1 else None, k, checks, T)


def c4_poly(F: FieldCtx, k: int) -> LinearizedPoly:
    """k(x^q + x^{q^3}) + x^{q^2} + x^{q^4}."""
    return LinearizedPoly(F, (0, k, 1, k, 1))


# ---------------------------------------------------------------------------
# the rank-four/four description by U_{a,b}


@dataclass
class UabResult:
    M: tuple
    m_rank3: bool
    mn_dependent: bool
    gamma: ProjSubspace
    pair: tuple  # (g, h) as linearized polynomials of the rational coordinates
    linear_set: LinearSet | None


def _fq_rank(F: FieldCtx, elems) -> int:
    return rank(F, [F.coords(x) for x in elems])


def uab_projection(F: FieldCtx, avec: Sequence[int], bvec: Sequence[int], build_set: bool = True) -> UabResult:
    """Projection from M = [a_i^q - a_i] of the linear set of <a, b>_{F_q} + F_q^3."""
    m = tuple(sub_frob(F, x, 1) for x in avec)
    if not any(m):
        raise MZero("all a_i lie in F_q")
    n = tuple(sub_frob(F, x, 2) for x in bvec)
    m_rank3 = _fq_rank(F, m) == 3
    mn_dependent = rank(F, [list(m), list(n)]) == 1
    A = [0, *avec, 1]
    B = [1, *bvec, 0]
    G = [0, *m, 0]
    gamma = ProjSubspace.of(F, [A, B, G])
    m1, m2, m3 = m
    # (x0..x4) in F_q^5 -> [[m3,0,-m1],[m2,-m1,0]] (x0 b + x4 a + (x1,x2,x3))
    rows = []
    for coef in ((m3, 0, F.neg(m1)), (m2, F.neg(m1), 0)):
        r = [0] * 5
        r[0] = F.sum(F.mul(cf, bi) for cf, bi in zip(coef, bvec))
        r[4] = F.sum(F.mul(cf, ai) for cf, ai in zip(coef, avec))
        for i in range(3):
            r[1 + i] = coef[i]
        rows.append(r)
    g = functional_poly(F, rows[0], RATIONAL)
    h = functional_poly(F, rows[1], RATIONAL)
    ls = None
    if build_set and not (g.is_zero() and h.is_zero()):
        ls = linear_set_of_pair(g, h)
    return UabResult(m, m_rank3, mn_dependent, gamma, (g, h), ls)


def sub_frob(F: FieldCtx, x: int, i: int) -> int:
    return F.sub(F.frob(x, i), x)


# ---------------------------------------------------------------------------
# synthetic configurations (parameters -> plane)


def random_fq_matrix(F: FieldCtx, rng) -> list[list[int]]:
    fq = F.fq
    while True:
        R = [[fq[int(rng.integers(len(fq)))] for _ in range(5)] for _ in range(5)]
        if rank(F, R) == 5:
            return R


def conjugate_plane(F: FieldCtx, gamma: ProjSubspace, model: SubgeometryModel, R) -> ProjSubspace:
    """Image of gamma under the F_q-rational collineation R (a stabiliser element of Sigma)."""
    G = model_convert(F, gamma, model, "rational")
    G = ProjSubspace.of(F, [mat_vec(F, R, v) for v in G.basis])
    return model_convert(F, G, "rational", model)


def synthetic_rk5(F: FieldCtx, rng, model: SubgeometryModel | None = None):
    """An LP configuration x^{q^s} + delta x^{q^{5-s}}, moved by a random element of PGL(5,q).

    Returns (gamma, model, (s, delta)).
    """
    while True:
        d = int(rng.integers(1, F.size))
        if F.norm(d) != 1:
            break
    s = int(rng.integers(1, 5))
    c = [0] * 5
    c[s] = 1
    c[5 - s] = d
    G = gamma_from_pair(F, LinearizedPoly.identity(F), LinearizedPoly(F, tuple(c)))
    if model is None:
        model = SubgeometryModel(("moore", "rational")[int(rng.integers(2))], int(rng.integers(1, 5)))
    G = model_convert(F, G, "moore", model)
    return conjugate_plane(F, G, model, random_fq_matrix(F, rng)), model, (s, d)


def rk44_matrix(F: FieldCtx, w: int, lam: int):
    qm = lambda i: _qm(F, i)
    pw, neg = F.pow, F.neg
    return [
        [0, 0, 0, neg(pw(w, qm(4) - qm(3))), 1],
        [1, 0, 0, neg(pw(w, 1 - qm(3))), neg(lam)],
        [0, 1, 0, neg(pw(w, qm(1) - qm(3))), 1],
        [0, 0, 1, neg(pw(w, qm(2) - qm(3))), neg(F.frob(lam, 2))],
        [0, 0, 0, 0, 1],
    ]


def synthetic_rk44(F: FieldCtx, w: int, lam: int, rng):
    """Rational-model plane with the given rank-4/4 parameters (mu = 1, s = 1).

    tau(X) = M_1 X^q is the generator in B-coordinates; an F_q-basis of its fixed
    vectors gives the change to rational coordinates.
    """
    M1 = rk44_matrix(F, w, lam)
    tau = lambda X: mat_vec(F, M1, [F.frob(x, 1) for x in X])
    X = [int(rng.integers(F.size)) for _ in range(5)]
    Y = list(X)
    for _ in range(5):
        Y = tau(Y)
    if Y != X:
        raise InconsistentSystem("tau has not order five for these parameters")
    fixed = []
    while len(fixed) < 5:
        X = [int(rng.integers(F.size)) for _ in range(5)]
        acc, Y = list(X), list(X)
        for _ in range(4):
            Y = tau(Y)
            acc = [F.add(a, b) for a, b in zip(acc, Y)]
        if any(acc) and rank(F, fixed + [acc]) == len(fixed) + 1:
            fixed.append(acc)
    P = [[fixed[j][i] for j in range(5)] for i in range(5)]
    Pinv = mat_inv(F, P)
    v2 = [0, 0, 1, F.neg(F.frob(lam, 2)), 1]
    gens = [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], v2]
    return ProjSubspace.of(F, [mat_vec(F, Pinv, g) for g in gens]), RATIONAL


def random_rk44_params(F: FieldCtx, lam_is_one: bool, rng) -> tuple[int, int]:
    while True:
        if lam_is_one:
            w = int(rng.integers(1, F.size))
            if F.tr(w) == 0:
                return w, 1
        else:
            lam = int(rng.integers(1, F.size))
            if lam != 1 and F.norm(lam) == 1:
                return F.sub(lam, 1), lam
