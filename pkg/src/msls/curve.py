"""The plane curve Q attached to the (delta, eps) equation, its lifting chain and the conic case."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .families import InvalidPair, norm_fiber, valid_pair
from .gfield import FieldCtx


class Degenerate(ArithmeticError):
    pass


class NoDeltaRoot(ValueError):
    pass


@dataclass(frozen=True)
class CurveQ:
    """f(X,Y) = f0 X^2Y^2 + f1 XY(X+Y) + f2 (X^2+Y^2) + f3 XY + f4 (X+Y) + f5."""

    F: FieldCtx
    delta: int
    eps: int
    coeffs: tuple  # f0..f5

    @classmethod
    def build(cls, F: FieldCtx, delta: int, eps: int, check: bool = True) -> "CurveQ":
        if check and not valid_pair(F, delta, eps):
            raise InvalidPair("(delta, eps) violates delta^2 eps != 1 or the cubic condition")
        c = lambda k: F.from_int(k)
        P = lambda *xs: F.prod(xs)
        sub, neg = F.sub, F.neg
        d, e = delta, eps
        d2e = P(d, d, e)
        de = F.mul(d, e)
        f0 = F.mul(sub(1, d2e), sub(de, 1))
        f1 = F.mul(F.sum([d2e, de, neg(c(2))]), sub(d2e, 1))
        f2 = neg(F.mul(sub(d2e, 1), sub(d2e, 1)))
        f3 = F.sum(
            [
                P(d2e, d2e, d2e),
                neg(P(c(5), d2e, d2e)),
                P(c(6), d2e),
                de,
                d,
                neg(c(4)),
            ]
        )
        f4 = F.mul(sub(d2e, 1), F.sum([d2e, d, neg(c(2))]))
        f5 = F.mul(sub(d, 1), sub(1, d2e))
        return cls(F, delta, eps, (f0, f1, f2, f3, f4, f5))

    @property
    def degree(self) -> int:
        f0, f1, f2, f3, f4, f5 = self.coeffs
        if f0:
            return 4
        if f1:
            return 3
        if f2 or f3:
            return 2
        if f4:
            return 1
        return 0

    def __call__(self, X: int, Y: int) -> int:
        F = self.F
        f0, f1, f2, f3, f4, f5 = self.coeffs
        m = F.mul
        XY = m(X, Y)
        return F.sum(
            [
                m(f0, m(XY, XY)),
                m(f1, m(XY, F.add(X, Y))),
                m(f2, F.add(m(X, X), m(Y, Y))),
                m(f3, XY),
                m(f4, F.add(X, Y)),
                f5,
            ]
        )

    def y_coeffs(self, X):
        """(a, b, c) with f(X, Y) = a Y^2 + b Y + c, vectorised over X."""
        F = self.F
        f0, f1, f2, f3, f4, f5 = self.coeffs
        X = np.asarray(X, dtype=np.int64)
        X2 = F.v_mul(X, X)
        a = F.v_add(F.v_add(F.v_mul(X2, f0), F.v_mul(X, f1)), f2)
        b = F.v_add(F.v_add(F.v_mul(X2, f1), F.v_mul(X, f3)), f4)
        c = F.v_add(F.v_add(F.v_mul(X2, f2), F.v_mul(X, f4)), f5)
        return a, b, c

    def to_json(self) -> dict:
        F = self.F
        return {
            "delta": F.fmt(self.delta),
            "eps": F.fmt(self.eps),
            "coeffs": [F.fmt(x) for x in self.coeffs],
            "degree": self.degree,
        }


def cubic_form(F: FieldCtx, delta: int, X: int, Y: int) -> int:
    """(delta-1)^2 (X^2Y - X^2 + XY^2 + delta XY - 3XY + 2X - Y^2 + 2Y - 1), the curve when delta eps = 1."""
    m, c = F.mul, F.from_int
    XY = m(X, Y)
    inner = F.sum(
        [
            m(m(X, X), Y),
            F.neg(m(X, X)),
            m(X, m(Y, Y)),
            m(delta, XY),
            F.neg(m(c(3), XY)),
            m(c(2), X),
            F.neg(m(Y, Y)),
            m(c(2), Y),
            F.minus_one,
        ]
    )
    d1 = F.sub(delta, 1)
    return m(m(d1, d1), inner)


# ---------------------------------------------------------------------------
# roots of quadratics, vectorised


def _is_square(F: FieldCtx, x: np.ndarray) -> np.ndarray:
    return (x == 0) | (((x - 1) % 2) == 0)


def _sqrt(F: FieldCtx, x: np.ndarray) -> np.ndarray:
    """A square root of each entry (entries must be squares)."""
    x = np.asarray(x, dtype=np.int64)
    if F.p == 2:
        half = pow(2, -1, F.order)
        return np.where(x == 0, 0, ((x - 1) * half) % F.order + 1)
    return np.where(x == 0, 0, ((x - 1) // 2) % F.order + 1)


def _abs_trace2(F: FieldCtx, t: np.ndarray) -> np.ndarray:
    """Absolute trace to F_2 (char 2), as 0/1 field codes."""
    n = F.n
    acc = np.zeros_like(t)
    y = t.copy()
    for _ in range(n):
        acc = F.v_add(acc, y)
        y = F.v_mul(y, y)
    return acc


def _artin_schreier(F: FieldCtx, t: np.ndarray) -> np.ndarray:
    """A root z of z^2 + z = t (trace of t must vanish); half-trace for odd degree."""
    n = F.n
    if n % 2 == 1:
        acc = np.zeros_like(t)
        y = t.copy()
        for i in range(n):
            if i % 2 == 0:
                acc = F.v_add(acc, y)
            y = F.v_mul(y, y)
        return acc
    # even degree: z = sum_{i<n-1} (sum_{j>i} d^{2^j}) t^{2^i} with Tr(d) = 1
    d = next(x for x in range(2, F.size) if int(_abs_trace2(F, np.array([x]))[0]) == 1)
    dp = [d]
    for _ in range(n - 1):
        dp.append(F.mul(dp[-1], dp[-1]))
    acc = np.zeros_like(t)
    tp = t.copy()
    for i in range(n - 1):
        coef = F.sum(dp[i + 1 :])
        acc = F.v_add(acc, F.v_mul(tp, coef))
        tp = F.v_mul(tp, tp)
    return acc


def quadratic_roots(F: FieldCtx, a, b, c) -> list[np.ndarray]:
    """Roots in F_{q^5} of a Y^2 + b Y + c, entrywise.

    Returns two arrays of root candidates plus a mask array per slot; entries
    where every Y is a root (a = b = c = 0) are flagged separately.
    """
    a, b, c = (np.asarray(v, dtype=np.int64) for v in (a, b, c))
    n = len(a)
    r1 = np.zeros(n, dtype=np.int64)
    r2 = np.zeros(n, dtype=np.int64)
    m1 = np.zeros(n, dtype=bool)
    m2 = np.zeros(n, dtype=bool)
    lin = a == 0
    # linear: b Y + c = 0
    li = lin & (b != 0)
    if li.any():
        r1[li] = F.v_neg(F.v_div(c[li], b[li]))
        m1[li] = True
    allY = lin & (b == 0) & (c == 0)
    q = ~lin
    if q.any():
        A, Bq, C = a[q], b[q], c[q]
        if F.p == 2:
            z1 = np.zeros(len(A), dtype=np.int64)
            z2 = np.zeros(len(A), dtype=np.int64)
            k1 = np.zeros(len(A), dtype=bool)
            k2 = np.zeros(len(A), dtype=bool)
            b0 = Bq == 0
            if b0.any():
                z1[b0] = _sqrt(F, F.v_div(C[b0], A[b0]))
                k1[b0] = True
            bn = ~b0
            if bn.any():
                t = F.v_div(F.v_mul(A[bn], C[bn]), F.v_mul(Bq[bn], Bq[bn]))
                ok = _abs_trace2(F, t) == 0
                z = _artin_schreier(F, t)
                scale = F.v_div(Bq[bn], A[bn])
                y1 = F.v_mul(z, scale)
                y2 = F.v_mul(F.v_add(z, 1), scale)
                idx = np.flatnonzero(bn)
                z1[idx] = y1
                z2[idx] = y2
                k1[idx] = ok
                k2[idx] = ok
            r1[q], r2[q], m1[q], m2[q] = z1, z2, k1, k2
        else:
            four = F.from_int(4)
            disc = F.v_sub(F.v_mul(Bq, Bq), F.v_mul(F.v_mul(A, C), four))
            sq = _is_square(F, disc)
            s = _sqrt(F, np.where(sq, disc, 0))
            two_a = F.v_mul(A, F.from_int(2))
            y1 = F.v_div(F.v_sub(s, Bq), two_a)
            y2 = F.v_div(F.v_sub(F.v_neg(s), Bq), two_a)
            r1[q], r2[q] = y1, y2
            m1[q] = sq
            m2[q] = sq & (disc != 0)
    return [r1, r2, m1, m2, allY]


def affine_points(curve: CurveQ, xs: np.ndarray):
    """All affine points (X, Y) of Q with X in xs and Y in F_{q^5}."""
    F = curve.F
    a, b, c = curve.y_coeffs(xs)
    r1, r2, m1, m2, allY = quadratic_roots(F, a, b, c)
    X = np.concatenate([xs[m1], xs[m2]])
    Y = np.concatenate([r1[m1], r2[m2]])
    return X, Y, xs[allY]


def build_and_count(F: FieldCtx, delta: int, eps: int, k: int = 1) -> tuple[CurveQ, int]:
    """The curve and its number of affine points over F_{q^k}, k in {1, 5}."""
    Q = CurveQ.build(F, delta, eps)
    if k == 1:
        xs = np.array(F.fq, dtype=np.int64)
        ys_in = lambda Y: np.array([F.in_fq(int(y)) for y in Y], dtype=bool)
    elif k == 5:
        xs = np.arange(F.size, dtype=np.int64)
        ys_in = lambda Y: np.ones(len(Y), dtype=bool)
    else:
        raise ValueError("point counts are available over F_q and F_{q^5} only")
    X, Y, vert = affine_points(Q, xs)
    n = int(ys_in(Y).sum()) if len(Y) else 0
    n += len(vert) * (F.q**k)
    return Q, n


# ---------------------------------------------------------------------------
# the system C and the lift


def system_values(F: FieldCtx, delta: int, eps: int, pt) -> list[int]:
    """[G, F_0, ..., F_4] at pt = (A, B, C, D, E)."""
    A, B, C, D, E = pt
    P = lambda *xs: F.prod(xs)
    G = F.add(P(A, B, C, D, E, eps), 1)

    def F0(a, b, c, d, e):
        return F.sum(
            [
                P(delta, delta, eps, b),
                F.neg(P(delta, eps, a, b, c, F.sub(1, d))),
                F.mul(F.sub(1, a), F.sub(1, b)),
            ]
        )

    vals = [G]
    v = list(pt)
    for _ in range(5):
        vals.append(F0(*v))
        v = v[1:] + v[:1]
    return vals


def lift_and_verify(F: FieldCtx, delta: int, eps: int, A: int, B: int) -> tuple:
    """Lift a point (A, B) of Q to (A, B, C, D, E) on C; raises Degenerate on a zero denominator."""
    P = lambda *xs: F.prod(xs)
    sub, add = F.sub, F.add
    d2e = P(delta, delta, eps)
    de = F.mul(delta, eps)
    if A == 0 or B == 0:
        raise Degenerate("A or B is zero")
    den_c = F.mul(A, sub(add(sub(F.mul(B, de), B), 1), d2e))
    if den_c == 0:
        raise Degenerate("B delta eps - B - delta^2 eps + 1 vanishes")
    C = F.div(sub(sub(F.mul(B, d2e), B), sub(delta, 1)), den_c)
    den_d = P(A, B, C, de)
    if den_d == 0:
        raise Degenerate("ABC delta eps vanishes")
    num_d = F.sum([P(A, B, C, de), F.neg(F.mul(A, B)), A, F.neg(F.mul(B, d2e)), B, F.minus_one])
    D = F.div(num_d, den_d)
    den_e = P(eps, A, B, C, D)
    if den_e == 0:
        raise Degenerate("eps ABCD vanishes")
    E = F.neg(F.inv(den_e))
    pt = (A, B, C, D, E)
    if any(system_values(F, delta, eps, pt)):
        raise ArithmeticError("lifted point does not satisfy the system")
    return pt


def sample_lifts(F: FieldCtx, delta: int, eps: int, n: int, rng, max_rounds: int = 200):
    """Up to n lifted quintuples from random affine points of Q over F_{q^5}; also returns the degenerate count."""
    Q = CurveQ.build(F, delta, eps)
    lifts, degenerate = [], 0
    for _ in range(max_rounds):
        xs = rng.integers(1, F.size, size=4 * n, dtype=np.int64)
        X, Y, _vert = affine_points(Q, xs)
        for x, y in zip(X.tolist(), Y.tolist()):
            try:
                lifts.append(lift_and_verify(F, delta, eps, x, y))
            except Degenerate:
                degenerate += 1
            if len(lifts) == n:
                return lifts, degenerate
    return lifts, degenerate


def orbit_quintuple(F: FieldCtx, x: int, s: int) -> tuple:
    return tuple(F.frob(x, (i * s) % 5) for i in range(5))


def orbit_points(F: FieldCtx, delta: int, eps: int, s: int) -> np.ndarray:
    """x in F_{q^5} with (x, x^{q^s}) on Q whose lift is the Frobenius orbit of x."""
    Q = CurveQ.build(F, delta, eps)
    xs = norm_fiber(F, F.neg(F.inv(eps)))
    ys = F.v_frob(xs, s % 5)
    a, b, c = Q.y_coeffs(xs)
    vals = F.v_add(F.v_add(F.v_mul(a, F.v_mul(ys, ys)), F.v_mul(b, ys)), c)
    out = []
    for x in xs[vals == 0].tolist():
        try:
            pt = lift_and_verify(F, delta, eps, x, F.frob(x, s))
        except Degenerate:
            continue
        if pt == orbit_quintuple(F, x, s):
            out.append(x)
    return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# the conic case eps = 1, delta^2 + 3 delta + 1 = 0


@dataclass
class ConicChain:
    delta: int
    s: int
    ell: int | None
    checks: dict
    skipped: str | None = None

    def ok(self) -> bool:
        return self.skipped is None and all(self.checks.values())


def delta_roots(F: FieldCtx) -> list[int]:
    three = F.from_int(3)
    return [d for d in F.fq_star if F.sum([F.mul(d, d), F.mul(three, d), 1]) == 0]


def _mat2_pow5(F, d):
    M = [[0, d], [1, d]]
    R = [[1, 0], [0, 1]]
    for _ in range(5):
        R = [[F.add(F.mul(R[i][0], M[0][j]), F.mul(R[i][1], M[1][j])) for j in range(2)] for i in range(2)]
    return R


def conic_case(F: FieldCtx, s: int = 1) -> list[ConicChain]:
    roots = delta_roots(F)
    if not roots:
        raise NoDeltaRoot("delta^2 + 3 delta + 1 has no root in F_q")
    out = []
    c = F.from_int
    P = lambda *xs: F.prod(xs)
    for d in roots:
        if not valid_pair(F, d, 1):
            out.append(ConicChain(d, s, None, {}, skipped="(delta, 1) is not a valid pair"))
            continue
        checks = {}
        M = _mat2_pow5(F, d)
        checks["m5_entry"] = M[1][1] == P(d, d, d, F.add(d, 1), F.add(d, c(3)))
        tr = F.add(M[0][0], M[1][1])
        det = F.sub(F.mul(M[0][0], M[1][1]), F.mul(M[0][1], M[1][0]))
        disc = F.sub(F.mul(tr, tr), F.mul(c(4), det))
        checks["Delta_zero"] = disc == 0
        xi = np.arange(F.size, dtype=np.int64)
        val = F.v_sub(F.v_mul(F.v_frob(xi, s), xi), F.v_add(F.v_mul(xi, d), d))
        sols = xi[val == 0]
        if len(sols) == 0:
            checks["xi_found"] = False
            out.append(ConicChain(d, s, None, checks))
            continue
        ell = F.add(int(sols[0]), 1)
        fr = lambda x, i: F.frob(x, (i * s) % 5)
        l1 = fr(ell, 1)
        checks["on_conic"] = F.sum([F.mul(ell, l1), F.neg(F.mul(F.add(d, 1), ell)), F.neg(l1), 1]) == 0
        checks["ell_qs"] = ell != 1 and l1 == F.div(F.sub(F.mul(F.add(d, 1), ell), 1), F.sub(ell, 1))
        checks["ell_q2s"] = fr(ell, 2) == F.div(F.sub(F.mul(F.add(d, c(2)), ell), 1), ell)
        try:
            pt = lift_and_verify(F, d, 1, ell, l1)
            checks["lift"] = True
            checks["orbit_chain"] = pt == orbit_quintuple(F, ell, s)
            checks["system"] = not any(system_values(F, d, 1, pt))
        except (Degenerate, ArithmeticError):
            checks["lift"] = False
        out.append(ConicChain(d, s, ell, checks))
    return out
