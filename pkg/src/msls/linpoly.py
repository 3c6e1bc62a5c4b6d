"""Linearized polynomials over F_{q^5} and the linear sets they define."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gfield import FieldCtx, fq_linear_solve, fq_matrix, nullspace, rank


class ZeroPolynomial(ValueError):
    pass


@dataclass(frozen=True)
class LinearizedPoly:
    """f(x) = sum_i a_i x^{q^i}, i = 0..4."""

    F: FieldCtx = field(compare=False, repr=False)
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(a) for a in self.coeffs)
        if len(c) != 5:
            raise ValueError("a linearized polynomial over F_{q^5} has 5 coefficients")
        object.__setattr__(self, "coeffs", c)

    # constructors
    @classmethod
    def monomial(cls, F: FieldCtx, i: int, c: int = 1) -> "LinearizedPoly":
        a = [0] * 5
        a[i % 5] = c
        return cls(F, tuple(a))

    @classmethod
    def identity(cls, F: FieldCtx) -> "LinearizedPoly":
        return cls.monomial(F, 0)

    @classmethod
    def trace(cls, F: FieldCtx, rho: int = 1) -> "LinearizedPoly":
        """x -> Tr(rho x)."""
        return cls(F, tuple(F.frob(rho, i) for i in range(5)))

    @classmethod
    def zero(cls, F: FieldCtx) -> "LinearizedPoly":
        return cls(F, (0,) * 5)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __call__(self, x: int) -> int:
        F = self.F
        return F.sum(F.mul(a, F.frob(x, i)) for i, a in enumerate(self.coeffs) if a)

    def __add__(self, other: "LinearizedPoly") -> "LinearizedPoly":
        F = self.F
        return LinearizedPoly(F, tuple(F.add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LinearizedPoly") -> "LinearizedPoly":
        F = self.F
        return LinearizedPoly(F, tuple(F.sub(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c: int) -> "LinearizedPoly":
        return LinearizedPoly(self.F, tuple(self.F.mul(c, a) for a in self.coeffs))

    def compose(self, g: "LinearizedPoly") -> "LinearizedPoly":
        """(self o g)(x) = self(g(x)), reduced mod x^{q^5} - x."""
        F = self.F
        out = [0] * 5
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(g.coeffs):
                    if b:
                        k = (i + j) % 5
                        out[k] = F.add(out[k], F.mul(a, F.frob(b, i)))
        return LinearizedPoly(F, tuple(out))

    def adjoint(self) -> "LinearizedPoly":
        """Adjoint w.r.t. the trace form: the x^{q^k} coefficient is a_{-k}^{q^k}."""
        F = self.F
        a = self.coeffs
        return LinearizedPoly(F, tuple(F.frob(a[(5 - k) % 5], k) for k in range(5)))

    def twist(self, i: int) -> "LinearizedPoly":
        """Apply x -> x^{q^i} to every coefficient."""
        return LinearizedPoly(self.F, tuple(self.F.frob(a, i) for a in self.coeffs))

    def dickson_matrix(self) -> list[list[int]]:
        F = self.F
        a = self.coeffs
        return [[F.frob(a[(j - i) % 5], i) for j in range(5)] for i in range(5)]

    def fmt(self) -> list[str]:
        return [self.F.fmt(a) for a in self.coeffs]

    def __str__(self):
        terms = []
        for i, a in enumerate(self.coeffs):
            if a:
                mono = "x" if i == 0 else f"x^(q^{i})" if i > 1 else "x^q"
                terms.append(mono if a == 1 else f"{self.F.fmt(a)}*{mono}")
        return " + ".join(terms) or "0"

    # vectorized evaluation on an array of codes (table mode)
    def v_eval(self, xs):
        F = self.F
        xs = np.asarray(xs, dtype=np.int64)
        acc = np.zeros_like(xs)
        for i, a in enumerate(self.coeffs):
            if a:
                acc = F.v_add(acc, F.v_mul(a, F.v_frob(xs, i)))
        return acc


def dickson_rank(f: LinearizedPoly) -> int:
    return rank(f.F, f.dickson_matrix())


def kernel_dim(f: LinearizedPoly) -> int:
    return len(fq_linear_solve(f.F, f.coeffs).kernel)


_TERM = re.compile(
    r"^(?:(?P<c>[-+]?[^*x]*?)\*?)?x(?:\^(?:\(|\{)?(?P<e>q(?:\^?\d+)?|1)(?:\)|\})?)?$"
)


def parse_poly(F: FieldCtx, text: str) -> LinearizedPoly:
    """Parse e.g. "x^q", "x^(q^2) + g^7*x^(q^4)", "x - w^2*x^{q^2}"."""
    t = text.replace(" ", "")
    terms = re.findall(r"[+-]?[^+-]+", t.replace("^-", "^~"))
    coeffs = [0] * 5
    for raw in terms:
        raw = raw.replace("^~", "^-")
        m = _TERM.match(raw)
        if not m:
            raise ValueError(f"cannot parse term {raw!r}")
        c = m.group("c") or ""
        sign = -1 if c.startswith("-") else 1
        c = c.lstrip("+-")
        coef = F.parse(c) if c else 1
        if sign < 0:
            coef = F.neg(coef)
        e = m.group("e")
        if e is None or e == "1":
            i = 0
        elif e == "q":
            i = 1
        else:
            i = int(e[1:].lstrip("^"))
        coeffs[i % 5] = F.add(coeffs[i % 5], coef)
    return LinearizedPoly(F, tuple(coeffs))


# ---------------------------------------------------------------------------
# scatteredness


@dataclass(frozen=True)
class ScatterResult:
    scattered: bool
    witness: tuple[int, int] | None = None  # y, z with f(y)/y = f(z)/z, y/z not in F_q

    def __bool__(self):
        return self.scattered


def coset_reps(F: FieldCtx) -> np.ndarray:
    """Codes of g^j, j < (q^5-1)/(q-1): one element per F_q*-coset."""
    return np.arange(1, F.theta + 1, dtype=np.int64)


def _first_dup(vals: np.ndarray):
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    hit = np.flatnonzero(sv[1:] == sv[:-1])
    if len(hit) == 0:
        return None
    i = hit[0]
    return int(order[i]), int(order[i + 1])


def quotient_values(f: LinearizedPoly, js: np.ndarray | None = None) -> np.ndarray:
    """f(x)/x at x = g^j (codes)."""
    F = f.F
    M = F.order
    if js is None:
        js = np.arange(F.theta, dtype=np.int64)
    acc = np.zeros(len(js), dtype=np.int64)
    for i, a in enumerate(f.coeffs):
        if a:
            t = (js * ((F.qpow[i] - 1) % M)) % M + 1
            acc = F.v_add(acc, F.v_mul(a, t))
    return acc


def is_scattered(f: LinearizedPoly) -> ScatterResult:
    if f.is_zero():
        raise ZeroPolynomial("the zero polynomial has no scatteredness verdict")
    F = f.F
    if F.mode != "table":
        return _is_scattered_scalar(f)
    vals = quotient_values(f)
    d = _first_dup(vals)
    if d is None:
        return ScatterResult(True)
    return ScatterResult(False, (F.gpow(d[0]), F.gpow(d[1])))


def _is_scattered_scalar(f: LinearizedPoly) -> ScatterResult:
    F = f.F
    seen = {}
    for j in range(F.theta):
        x = F.gpow(j)
        v = F.div(f(x), x)
        if v in seen:
            return ScatterResult(False, (seen[v], x))
        seen[v] = x
    return ScatterResult(True)


def verify_poly_witness(f: LinearizedPoly, y: int, z: int) -> bool:
    F = f.F
    if y == 0 or z == 0 or F.in_fq(F.div(y, z)):
        return False
    return F.div(f(y), y) == F.div(f(z), z)


def rows_distinct(vals: np.ndarray) -> np.ndarray:
    """True for rows of a 2-D array whose entries are pairwise distinct."""
    if vals.shape[1] < 2:
        return np.ones(vals.shape[0], dtype=bool)
    s = np.sort(vals, axis=1)
    return ~np.any(s[:, 1:] == s[:, :-1], axis=1)


def row_collision(row: np.ndarray) -> tuple[int, int] | None:
    return _first_dup(np.asarray(row))


# ---------------------------------------------------------------------------
# linear sets of PG(1, q^5)


@dataclass(frozen=True)
class LinearSet:
    """Weighted point set of PG(1,q^5).

    A point <(X,Y)> is stored by the key Y/X (a code in [0, q^5)) when X != 0
    and by q^5 for the point <(0,1)>.
    """

    F: FieldCtx = field(compare=False, repr=False)
    rank: int
    points: dict = field(hash=False)

    @property
    def size(self) -> int:
        return len(self.points)

    def is_scattered(self) -> bool:
        q = self.F.q
        return all(w == 1 for w in self.points.values()) and self.size == (q**self.rank - 1) // (q - 1)

    def weight_sum(self) -> int:
        q = self.F.q
        return sum(q**w - 1 for w in self.points.values())

    def histogram(self) -> dict[int, int]:
        h: dict[int, int] = {}
        for w in self.points.values():
            h[w] = h.get(w, 0) + 1
        return dict(sorted(h.items()))

    def keys(self) -> np.ndarray:
        return np.array(sorted(self.points), dtype=np.int64)

    def point(self, key: int) -> tuple[int, int]:
        return (0, 1) if key == self.F.size else (1, key)

    def point_str(self, key: int) -> str:
        a, b = self.point(key)
        return f"[{self.F.fmt(a)},{self.F.fmt(b)}]"

    def digest(self) -> dict:
        h = hashlib.sha256()
        for k in sorted(self.points):
            h.update(f"{self.point_str(k)}:{self.points[k]};".encode())
        return {
            "size": self.size,
            "rank": self.rank,
            "weightHistogram": {str(k): v for k, v in self.histogram().items()},
            "sha256": h.hexdigest(),
        }

    def same_points(self, other: "LinearSet") -> bool:
        return set(self.points) == set(other.points)


def key_of(F: FieldCtx, X: int, Y: int) -> int:
    if X == 0:
        if Y == 0:
            raise ValueError("zero vector is not a point")
        return F.size
    return F.div(Y, X)


def v_keys(F: FieldCtx, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Point keys for arrays of nonzero vectors (X, Y)."""
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    safe = np.where(X == 0, 1, X)
    return np.where(X == 0, F.size, F.v_div(Y, safe))


def _weights_from_counts(F: FieldCtx, keys: np.ndarray, kdim: int) -> dict:
    q = F.q
    uk, cnt = np.unique(keys, return_counts=True)
    out = {}
    for k, c in zip(uk.tolist(), cnt.tolist()):
        n = c * (q - 1) // q**kdim + 1
        w = 0
        while n > 1:
            n //= q
            w += 1
        out[int(k)] = w
    return out


def linear_set_of_poly(f: LinearizedPoly) -> LinearSet:
    F = f.F
    if F.mode != "table":
        return _linear_set_scalar(f.F, LinearizedPoly.identity(F), f)
    keys = quotient_values(f)
    return LinearSet(F, 5, _weights_from_counts(F, keys, 0))


def pair_values(g: LinearizedPoly, h: LinearizedPoly, xs: np.ndarray | None = None):
    F = g.F
    if xs is None:
        xs = coset_reps(F)
    return g.v_eval(xs), h.v_eval(xs)


def linear_set_of_pair(g: LinearizedPoly, h: LinearizedPoly) -> LinearSet:
    F = g.F
    if g.is_zero() and h.is_zero():
        raise ZeroPolynomial("both maps are zero")
    if F.mode != "table":
        return _linear_set_scalar(F, g, h)
    X, Y = pair_values(g, h)
    nz = (X != 0) | (Y != 0)
    kdim = joint_kernel_dim(g, h)
    keys = v_keys(F, X[nz], Y[nz])
    return LinearSet(F, 5 - kdim, _weights_from_counts(F, keys, kdim))


def linear_set_of_vectors(F: FieldCtx, X, Y, dim: int = 5) -> LinearSet:
    """Linear set of an F_q-subspace given by *all* its nonzero vectors (X, Y).

    ``X``, ``Y`` list the images of the q^dim - 1 nonzero domain vectors, so
    zero pairs come from the kernel.
    """
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    q = F.q
    if len(X) != q**dim - 1:
        raise ValueError("expected every nonzero vector of the domain")
    nz = (X != 0) | (Y != 0)
    zeros = len(X) - int(nz.sum())
    kdim = round(np.log(zeros + 1) / np.log(q))
    keys = v_keys(F, X[nz], Y[nz])
    uk, cnt = np.unique(keys, return_counts=True)
    out = {}
    for k, c in zip(uk.tolist(), cnt.tolist()):
        n, w = c // q**kdim + 1, 0
        while n > 1:
            n //= q
            w += 1
        out[int(k)] = w
    return LinearSet(F, dim - kdim, out)


def _linear_set_scalar(F, g, h) -> LinearSet:
    counts: dict = {}
    kdim = joint_kernel_dim(g, h)
    for j in range(F.theta):
        x = F.gpow(j)
        X, Y = g(x), h(x)
        if X == 0 and Y == 0:
            continue
        k = key_of(F, X, Y)
        counts[k] = counts.get(k, 0) + 1
    keys = np.repeat(np.array(list(counts), dtype=np.int64), list(counts.values()))
    return LinearSet(F, 5 - kdim, _weights_from_counts(F, keys, kdim))


def joint_kernel(g: LinearizedPoly, h: LinearizedPoly) -> tuple[int, ...]:
    """F_q-basis of {x : g(x) = h(x) = 0}."""
    F = g.F
    M = fq_matrix(F, g.coeffs) + fq_matrix(F, h.coeffs)
    return tuple(F.from_coords(v) for v in nullspace(F, M, 5))


def joint_kernel_dim(g: LinearizedPoly, h: LinearizedPoly) -> int:
    return len(joint_kernel(g, h))


def pair_scattered(g: LinearizedPoly, h: LinearizedPoly) -> ScatterResult:
    """Scatteredness of U = {(g(x),h(x))} as a rank-5 subspace.

    On failure the witness is (y, z) with y/z not in F_q and (g,h)(y),
    (g,h)(z) on a common point (or one of them zero).
    """
    F = g.F
    ker = joint_kernel(g, h)
    if ker:
        return ScatterResult(False, (ker[0], 0))
    X, Y = pair_values(g, h)
    keys = v_keys(F, X, Y)
    d = _first_dup(keys)
    if d is None:
        return ScatterResult(True)
    return ScatterResult(False, (F.gpow(d[0]), F.gpow(d[1])))


def verify_pair_witness(g: LinearizedPoly, h: LinearizedPoly, y: int, z: int) -> bool:
    F = g.F
    if z == 0:
        return y != 0 and g(y) == 0 and h(y) == 0
    if y == 0 or F.in_fq(F.div(y, z)):
        return False
    a = (g(y), h(y))
    b = (g(z), h(z))
    return F.sub(F.mul(a[0], b[1]), F.mul(a[1], b[0])) == 0


def apply_projectivity(ls: LinearSet, M: Sequence[Sequence[int]]) -> LinearSet:
    """Image of the point set under (X,Y) -> M (X,Y)^T."""
    F = ls.F
    (a, b), (c, d) = M
    out = {}
    for k, w in ls.points.items():
        X, Y = ls.point(k)
        out[key_of(F, F.add(F.mul(a, X), F.mul(b, Y)), F.add(F.mul(c, X), F.mul(d, Y)))] = w
    return LinearSet(F, ls.rank, out)


def diagonal_equivalence(ls1: LinearSet, ls2: LinearSet) -> int | None:
    """Some c with {(X, cY)} over ls1 equal to ls2 as weighted sets, else None."""
    F = ls1.F
    if ls1.histogram() != ls2.histogram() or ls1.rank != ls2.rank:
        return None
    k1 = np.array(sorted(ls1.points), dtype=np.int64)
    k2 = np.array(sorted(ls2.points), dtype=np.int64)
    fin1 = k1[(k1 != 0) & (k1 != F.size)]
    fin2 = k2[(k2 != 0) & (k2 != F.size)]
    if len(fin1) == 0:
        return 1 if ls1.points == ls2.points else None
    target = int(fin2[0])
    for t in fin1.tolist():
        c = F.div(target, t)
        img = np.where((k1 == 0) | (k1 == F.size), k1, F.v_mul(k1, c))
        if np.array_equal(np.sort(img), k2):
            scaled = {(k if k in (0, F.size) else F.mul(k, c)): w for k, w in ls1.points.items()}
            if scaled == ls2.points:
                return c
    return None
