"""Subspaces of PG(4,q^5), the canonical subgeometry and its Frobenius collineation.

Two coordinate models of Sigma are used.  In the *rational* model Sigma is the
set of points with F_q coordinates and the generator acts coordinatewise by
x -> x^{q^s}.  In the *Moore* model Sigma = {[u, u^q, ..., u^{q^4}]} and the
generator is the s-th power of the shift-Frobenius
[x0,..,x4] -> [x4^q, x0^q, x1^q, x2^q, x3^q].  The Moore matrix W of the normal
element carries the first model onto the second (Moore = W * rational).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from .gfield import FieldCtx, mat_vec, nullspace, rank, rref
from .linpoly import LinearizedPoly, joint_kernel, pair_scattered

Vec = tuple[int, ...]


class GeometryError(Exception):
    pass


class VertexMeetsSigma(GeometryError):
    pass


class VertexContainsPoint(GeometryError):
    pass


def normalize(F: FieldCtx, v: Sequence[int]) -> Vec:
    for x in v:
        if x:
            iv = F.inv(x)
            return tuple(F.mul(iv, y) for y in v)
    raise GeometryError("the zero vector is not a projective point")


@dataclass(frozen=True)
class ProjSubspace:
    """Row space of ``basis`` (kept in reduced row echelon form)."""

    F: FieldCtx = field(compare=False, repr=False)
    basis: tuple[Vec, ...]

    @classmethod
    def of(cls, F: FieldCtx, vectors) -> "ProjSubspace":
        vs = [list(v) for v in vectors]
        red, _ = rref(F, vs) if vs else ([], [])
        return cls(F, tuple(tuple(r) for r in red))

    @property
    def dim(self) -> int:
        """Projective dimension (-1 for the empty subspace)."""
        return len(self.basis) - 1

    def contains(self, v: Sequence[int]) -> bool:
        return rank(self.F, list(self.basis) + [list(v)]) == len(self.basis)

    def point(self) -> Vec:
        if self.dim != 0:
            raise GeometryError(f"subspace of dimension {self.dim} is not a point")
        return self.basis[0]

    def is_empty(self) -> bool:
        return not self.basis

    def fmt(self) -> list[list[str]]:
        return [[self.F.fmt(x) for x in r] for r in self.basis]


def as_space(F: FieldCtx, X) -> ProjSubspace:
    if isinstance(X, ProjSubspace):
        return X
    return ProjSubspace.of(F, [X])


def span(F: FieldCtx, *items) -> ProjSubspace:
    vs = []
    for X in items:
        vs.extend(as_space(F, X).basis)
    return ProjSubspace.of(F, vs)


def annihilator(S: ProjSubspace) -> list[list[int]]:
    """Basis of the linear forms vanishing on S."""
    if S.is_empty():
        return [[1 if i == j else 0 for j in range(5)] for i in range(5)]
    return nullspace(S.F, S.basis, 5)


def meet(F: FieldCtx, S, T) -> ProjSubspace:
    S, T = as_space(F, S), as_space(F, T)
    forms = annihilator(S) + annihilator(T)
    if not forms:
        return ProjSubspace.of(F, [[1 if i == j else 0 for j in range(5)] for i in range(5)])
    return ProjSubspace.of(F, nullspace(F, forms, 5))


def span_meet_dim(F: FieldCtx, S, T) -> tuple[ProjSubspace, ProjSubspace, int, int]:
    J, M = span(F, S, T), meet(F, S, T)
    return J, M, J.dim, M.dim


# ---------------------------------------------------------------------------
# models of Sigma


@dataclass(frozen=True)
class SubgeometryModel:
    variant: str = "moore"  # or "rational"
    s: int = 1

    def __post_init__(self):
        if self.variant not in ("moore", "rational"):
            raise ValueError(f"unknown model {self.variant!r}")
        s = self.s % 5
        if gcd(s, 5) != 1:
            raise ValueError("generator exponent must be coprime to 5")
        object.__setattr__(self, "s", s)

    def with_s(self, s: int) -> "SubgeometryModel":
        return SubgeometryModel(self.variant, s)


MOORE = SubgeometryModel("moore", 1)
RATIONAL = SubgeometryModel("rational", 1)


def shift_frob(F: FieldCtx, v: Sequence[int], m: int) -> Vec:
    """m-th power of [x0..x4] -> [x4^q, x0^q, ..., x3^q]."""
    m %= 5
    return tuple(F.frob(v[(k - m) % 5], m) for k in range(5))


def sigma_vec(F: FieldCtx, model: SubgeometryModel, v: Sequence[int], i: int = 1) -> Vec:
    """Image of a vector under the i-th power of the model's generator."""
    e = (model.s * i) % 5
    if model.variant == "rational":
        return tuple(F.frob(x, e) for x in v)
    return shift_frob(F, v, e)


def sigma_apply(F: FieldCtx, model: SubgeometryModel, X, i: int = 1):
    if isinstance(X, ProjSubspace):
        return ProjSubspace.of(F, [sigma_vec(F, model, v, i) for v in X.basis])
    return normalize(F, sigma_vec(F, model, X, i))


def orbit(F: FieldCtx, model: SubgeometryModel, v: Sequence[int]) -> list[Vec]:
    return [sigma_vec(F, model, v, i) for i in range(5)]


def point_rank(F: FieldCtx, model: SubgeometryModel, v: Sequence[int]) -> int:
    return rank(F, orbit(F, model, v))


def sigma_point(F: FieldCtx, model: SubgeometryModel, u: int) -> Vec:
    """A vector of Sigma: [u,u^q,..] in the Moore model, the normal-basis coordinates of u otherwise."""
    if model.variant == "moore":
        return tuple(F.frob(u, i) for i in range(5))
    return F.coords(u)


def in_sigma(F: FieldCtx, model: SubgeometryModel, v: Sequence[int]) -> bool:
    return point_rank(F, model, v) == 1


# ---------------------------------------------------------------------------
# model conversion


def convert_vec(F: FieldCtx, v: Sequence[int], frm: str, to: str) -> Vec:
    if frm == to:
        return tuple(v)
    if frm == "rational" and to == "moore":
        return tuple(mat_vec(F, F.moore, v))
    if frm == "moore" and to == "rational":
        return tuple(mat_vec(F, F.moore_inv, v))
    raise ValueError(f"bad conversion {frm} -> {to}")


def model_convert(F: FieldCtx, X, frm: SubgeometryModel | str, to: SubgeometryModel | str):
    a = frm.variant if isinstance(frm, SubgeometryModel) else frm
    b = to.variant if isinstance(to, SubgeometryModel) else to
    if isinstance(X, ProjSubspace):
        return ProjSubspace.of(F, [convert_vec(F, v, a, b) for v in X.basis])
    return normalize(F, convert_vec(F, X, a, b))


# ---------------------------------------------------------------------------
# planes and projections


def gamma_from_poly(F: FieldCtx, a2: int, a3: int, a4: int) -> ProjSubspace:
    """Plane of the Moore model projecting Sigma onto L_f, f = x^q + a2 x^{q^2} + a3 x^{q^3} + a4 x^{q^4}."""
    n = F.neg
    return ProjSubspace.of(F, [[0, n(a4), 0, 0, 1], [0, n(a3), 0, 1, 0], [0, n(a2), 1, 0, 0]])


def gamma_from_pair(F: FieldCtx, g: LinearizedPoly, h: LinearizedPoly, model: SubgeometryModel = MOORE) -> ProjSubspace:
    """Vertex whose projection of Sigma is the linear set of (g(x), h(x))."""
    S = ProjSubspace.of(F, nullspace(F, [list(g.coeffs), list(h.coeffs)], 5))
    if model.variant == "rational":
        S = model_convert(F, S, "moore", "rational")
    return S


def projection_pair(F: FieldCtx, gamma: ProjSubspace, model: SubgeometryModel = MOORE):
    """(g, h) with the projection of Sigma from the plane equal to L of (g(x), h(x))."""
    if gamma.dim != 2:
        raise GeometryError(f"vertex must be a plane, got dimension {gamma.dim}")
    G = model_convert(F, gamma, model, "moore")
    forms = [tuple(r) for r in rref(F, annihilator(G))[0]]
    return LinearizedPoly(F, forms[0]), LinearizedPoly(F, forms[1])


def functional_poly(F: FieldCtx, row: Sequence[int], model: SubgeometryModel = MOORE) -> LinearizedPoly:
    """The map u -> row . v(u), v(u) the Sigma vector of u in the given model."""
    if model.variant == "rational":
        row = [F.sum(F.mul(row[i], F.moore_inv[i][j]) for i in range(5)) for j in range(5)]
    return LinearizedPoly(F, tuple(row))


def vertex_meets_sigma(F: FieldCtx, gamma: ProjSubspace, model: SubgeometryModel = MOORE) -> tuple[int, ...]:
    g, h = projection_pair(F, gamma, model)
    return joint_kernel(g, h)


def rank2_witness(F: FieldCtx, gamma: ProjSubspace, model: SubgeometryModel = MOORE):
    """A point of rank <= 2 in the plane, or None when the projection is scattered."""
    g, h = projection_pair(F, gamma, model)
    res = pair_scattered(g, h)
    if res.scattered:
        return None
    y, z = res.witness
    if z == 0:
        raise VertexMeetsSigma("the vertex contains a point of Sigma")
    gy, hy, gz, hz = g(y), h(y), g(z), h(z)
    if gz != 0:
        c = F.div(gy, gz)
    elif hz != 0:
        c = F.div(hy, hz)
    else:
        raise VertexMeetsSigma("the vertex contains a point of Sigma")
    vy = sigma_point(F, MOORE, y)
    vz = sigma_point(F, MOORE, z)
    v = tuple(F.sub(a, F.mul(c, b)) for a, b in zip(vy, vz))
    return model_convert(F, normalize(F, v), "moore", model)


def project_from_plane(F: FieldCtx, gamma: ProjSubspace, line: ProjSubspace, P: Sequence[int]) -> Vec:
    """<gamma, P> meet line."""
    if gamma.contains(P):
        raise VertexContainsPoint("point lies in the vertex")
    if meet(F, gamma, line).dim >= 0:
        raise GeometryError("vertex and target line meet")
    return meet(F, span(F, gamma, P), line).point()
