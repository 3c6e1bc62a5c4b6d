"""Named families of linear sets of PG(1, q^5) and scatteredness criteria for them."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .gfield import FieldCtx, SingularMatrix, mat_inv
from .linpoly import (
    LinearizedPoly,
    LinearSet,
    ScatterResult,
    is_scattered,
    joint_kernel_dim,
    linear_set_of_pair,
    pair_scattered,
)


class BadParameters(ValueError):
    pass


class InvalidPair(ValueError):
    pass


class ZeroB(ValueError):
    pass


KINDS = ("Pseudoregulus", "LP", "AlphaBeta", "FormaE", "FormaK", "C3", "C4", "F1", "Gb")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    params: tuple = ()
    s: int = 1

    def to_json(self, F: FieldCtx) -> dict:
        return {"kind": self.kind, "params": [F.fmt(x) for x in self.params], "s": self.s}


def _mono(F: FieldCtx, terms: dict) -> LinearizedPoly:
    c = [0] * 5
    for i, a in terms.items():
        c[i % 5] = F.add(c[i % 5], a)
    return LinearizedPoly(F, tuple(c))


def _check_s(s: int):
    if gcd(s % 5, 5) != 1:
        raise BadParameters(f"s={s} is not coprime to 5")


def pair_of(F: FieldCtx, spec: FamilySpec) -> tuple[LinearizedPoly, LinearizedPoly]:
    """The pair (g, h) with the family's linear set {<(g(x), h(x))>}."""
    k, p, s = spec.kind, spec.params, spec.s
    x = LinearizedPoly.identity(F)
    neg = F.neg
    if k == "Pseudoregulus":
        _check_s(s)
        return x, _mono(F, {s: 1})
    if k == "LP":
        _check_s(s)
        (d,) = p
        if F.norm(d) in (0, 1):
            raise BadParameters("LP needs N(delta) not in {0, 1}")
        return x, _mono(F, {s: 1, 5 - s: d})
    if k in ("AlphaBeta", "FormaE", "FormaK"):
        _check_s(s)
        if k == "AlphaBeta":
            al, be = p
        elif k == "FormaE":
            (e,) = p
            if not F.in_fq(e):
                raise BadParameters("FormaE needs e in F_q")
            al, be = 1, F.sub(1, e)
        else:
            kk, d = p
            if kk == 0:
                raise BadParameters("FormaK needs k != 0")
            if d == 0 or not F.in_fq(d):
                raise BadParameters("FormaK needs delta in F_q*")
            al, be = formak_alpha_beta(F, kk, d, s)
        if al == 0 and be == 0:
            raise BadParameters("(alpha, beta) = (0, 0)")
        return _mono(F, {0: 1, 2 * s: neg(al)}), _mono(F, {s: 1, 2 * s: neg(be)})
    if k == "C3":
        eta, rho = p
        if eta == 0 or F.tr(eta) != 0:
            raise BadParameters("C3 needs eta != 0 with Tr(eta) = 0")
        if F.tr(rho) == 0:
            raise BadParameters("C3 needs Tr(rho) != 0")
        g = _mono(F, {1: eta, 0: neg(eta)}) + LinearizedPoly.trace(F, rho)
        return g, _mono(F, {1: 1, 4: neg(1)})
    if k == "C4":
        (kk,) = p
        if F.norm(kk) != 1:
            raise BadParameters("C4 needs N(k) = 1")
        return x, _mono(F, {1: kk, 3: kk, 2: 1, 4: 1})
    if k == "F1":
        (eta,) = p
        if eta == 0 or F.tr(eta) != 0:
            raise BadParameters("F1 needs eta != 0 with Tr(eta) = 0")
        ie = F.inv(eta)
        t = F.tr(ie)
        if t == 0:
            raise BadParameters("F1 needs Tr(1/eta) != 0")
        return x, f1_poly(F, eta)
    if k == "Gb":
        (b,) = p
        if b == 0:
            raise ZeroB("b must be nonzero")
        return x, _mono(F, {2: 1, 4: b})
    raise BadParameters(f"unknown family {k!r}")


def f1_poly(F: FieldCtx, eta: int) -> LinearizedPoly:
    """Tr(1/eta) x^{q^4} - (eta^{-q^4} + 1/eta) Tr(x)."""
    ie = F.inv(eta)
    c = F.neg(F.add(F.frob(ie, 4), ie))
    return _mono(F, {4: F.tr(ie)}) + LinearizedPoly.trace(F, 1).scale(c)


def formak_alpha_beta(F: FieldCtx, k: int, delta: int, s: int) -> tuple[int, int]:
    return F.inv(k), F.mul(delta, F.mul(F.frob(k, 4 * s), F.frob(k, 2 * s)))


def construct(F: FieldCtx, spec: FamilySpec) -> LinearSet:
    g, h = pair_of(F, spec)
    return linear_set_of_pair(g, h)


def family_scattered(F: FieldCtx, spec: FamilySpec) -> ScatterResult:
    g, h = pair_of(F, spec)
    return pair_scattered(g, h)


# ---------------------------------------------------------------------------
# pairs and single polynomials


def inverse_poly(g: LinearizedPoly) -> LinearizedPoly:
    """Compositional inverse of an invertible linearized polynomial (Dickson matrix inverse)."""
    try:
        Dinv = mat_inv(g.F, g.dickson_matrix())
    except SingularMatrix as exc:
        raise BadParameters("map is not invertible") from exc
    return LinearizedPoly(g.F, tuple(Dinv[0]))


def pair_to_poly(g: LinearizedPoly, h: LinearizedPoly) -> tuple[LinearizedPoly, bool]:
    """f with L_f equal to the pair's set, and whether the components were swapped."""
    try:
        return h.compose(inverse_poly(g)), False
    except BadParameters:
        return g.compose(inverse_poly(h)), True


# ---------------------------------------------------------------------------
# the (alpha, beta) criteria


def norm_fiber(F: FieldCtx, c: int) -> np.ndarray:
    """Codes of all x with N(x) = c (c nonzero)."""
    lc = F.log(c)
    if lc % F.theta:
        raise ValueError("not an element of F_q*")
    k0 = lc // F.theta  # N(g^k) = w^k
    return np.arange(k0, F.order, F.q - 1, dtype=np.int64) + 1


@dataclass(frozen=True)
class ABPredicates:
    rank_lt5: bool
    pseudoregulus: bool
    criterion_applies: bool  # beta != 0
    scattered_by_criterion: bool
    criterion_witness: int | None
    ratio_in_fq: bool  # the necessary condition alpha^{q^s}/beta^{q^s+1} in F_q for MSLS

    def to_json(self, F: FieldCtx) -> dict:
        return {
            "rankLT5": self.rank_lt5,
            "pseudoregulus": self.pseudoregulus,
            "criterionApplies": self.criterion_applies,
            "scatteredByCriterion": self.scattered_by_criterion,
            "witness": None if self.criterion_witness is None else F.fmt(self.criterion_witness),
        }


def ab_criterion_values(F: FieldCtx, alpha: int, beta: int, s: int, us: np.ndarray) -> np.ndarray:
    """b^{q^3s+q^s+1}u^{q^s} - b^{q^s+1}u^{q^2s+q^s+1}(1-au)^{q^3s} + b^{q^3s}(1-au)^{q^s+1}."""
    fr = lambda x, i: F.v_frob(x, (i * s) % 5)
    f1 = lambda x, i: F.frob(x, (i * s) % 5)
    one = np.ones_like(us)
    w = F.v_sub(one, F.v_mul(us, alpha))
    t1 = F.v_mul(fr(us, 1), F.prod([f1(beta, 3), f1(beta, 1), beta]))
    t2 = F.v_mul(F.v_mul(F.v_mul(fr(us, 2), fr(us, 1)), us), F.mul(f1(beta, 1), beta))
    t2 = F.v_mul(t2, fr(w, 3))
    t3 = F.v_mul(F.v_mul(fr(w, 1), w), f1(beta, 3))
    return F.v_add(F.v_sub(t1, t2), t3)


def alpha_beta_predicates(F: FieldCtx, alpha: int, beta: int, s: int) -> ABPredicates:
    if alpha == 0 and beta == 0:
        raise BadParameters("(alpha, beta) = (0, 0)")
    _check_s(s)
    coincide = F.frob(alpha, s) == F.pow(beta, F.q**s + 1)
    n1 = F.norm(alpha) == 1 and F.norm(beta) == 1
    rank_lt5 = coincide and n1
    pseudo = coincide and not n1
    if beta == 0:
        # the criterion's equation vanishes identically; L ~ x^{q^s} - alpha^{-1} x^{q^{5-s}}
        sc = alpha != 0 and F.norm(alpha) != F.minus_one
        return ABPredicates(rank_lt5, pseudo, False, sc, None, True)
    us = norm_fiber(F, F.minus_one)
    vals = ab_criterion_values(F, alpha, beta, s, us)
    hit = np.flatnonzero(vals == 0)
    sc = len(hit) == 0
    ratio = F.div(F.frob(alpha, s), F.pow(beta, F.q**s + 1))
    ratio_in_fq = (not sc) or F.in_fq(ratio)
    return ABPredicates(rank_lt5, pseudo, True, sc, None if sc else int(us[hit[0]]), ratio_in_fq)


# ---------------------------------------------------------------------------
# the (delta, eps) equation


@dataclass(frozen=True)
class SctResult:
    delta: int
    eps: int
    s: int
    witness: int | None
    solutions: int

    @property
    def found(self) -> bool:
        return self.witness is not None


def valid_pair(F: FieldCtx, delta: int, eps: int) -> bool:
    """delta^2 eps != 1 and delta^3 eps^2 + (1 - 3 delta) eps + 1 != 0."""
    d2e = F.mul(F.mul(delta, delta), eps)
    if d2e == 1:
        return False
    three = F.from_int(3)
    t = F.sum([F.prod([delta, delta, delta, eps, eps]), F.mul(F.sub(1, F.mul(three, delta)), eps), 1])
    return t != 0


def sctness_values(F: FieldCtx, delta: int, eps: int, s: int, xs: np.ndarray) -> np.ndarray:
    fr = lambda x, i: F.v_frob(x, (i * s) % 5)
    one = np.ones_like(xs)
    w = F.v_sub(one, xs)
    t1 = F.v_mul(fr(xs, 1), F.prod([delta, delta, eps]))
    t2 = F.v_mul(F.v_mul(F.v_mul(fr(xs, 2), fr(xs, 1)), xs), F.mul(delta, eps))
    t2 = F.v_mul(t2, fr(w, 3))
    t3 = F.v_mul(fr(w, 1), w)
    return F.v_add(F.v_sub(t1, t2), t3)


def sctness_solve(F: FieldCtx, delta: int, eps: int, s: int = 1) -> SctResult:
    """Search the fiber N(x) = -1/eps for a root of the (delta, eps) polynomial."""
    if delta == 0 or eps == 0 or not (F.in_fq(delta) and F.in_fq(eps)):
        raise BadParameters("delta, eps must lie in F_q*")
    if F.mul(F.mul(delta, delta), eps) == 1:
        raise InvalidPair("delta^2 eps = 1")
    xs = norm_fiber(F, F.neg(F.inv(eps)))
    vals = sctness_values(F, delta, eps, s, xs)
    hit = np.flatnonzero(vals == 0)
    return SctResult(delta, eps, s, int(xs[hit[0]]) if len(hit) else None, len(hit))


def verify_sctness_witness(F: FieldCtx, delta: int, eps: int, s: int, x: int) -> bool:
    if F.mul(eps, F.norm(x)) != F.minus_one:
        return False
    return int(sctness_values(F, delta, eps, s, np.array([x]))[0]) == 0


# ---------------------------------------------------------------------------


def gb_check(F: FieldCtx, b: int) -> ScatterResult:
    """Scatteredness of x^{q^2} + b x^{q^4} (witness pair when not scattered)."""
    if b == 0:
        raise ZeroB("b must be nonzero")
    return is_scattered(_mono(F, {2: 1, 4: b}))


def c3_transform_to_f1(F: FieldCtx, eta: int) -> tuple:
    """Matrix taking E(eta, 1/eta) onto L_{F_1}, valid when Tr(1/eta) != 0."""
    rho = F.inv(eta)
    return ((F.div(rho, F.tr(rho)), 0), (F.neg(rho), 1))


def rank_of_pair(F: FieldCtx, spec: FamilySpec) -> int:
    g, h = pair_of(F, spec)
    return 5 - joint_kernel_dim(g, h)
