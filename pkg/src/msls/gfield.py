"""Finite field tower F_p < F_q < F_{q^5}.

Elements of the big field are plain ints.  In table mode an element is a
*code*: 0 is zero and c >= 1 stands for g^(c-1), where g is the root of the
Conway polynomial.  In polynomial mode an element is its coefficient vector
over F_p packed base p (digit i is the coefficient of x^i).  In both modes
0 is zero and 1 is one.

Every supported q (q <= 32) gives q^5 <= 2^25, so table mode is what runs in
practice; polynomial mode is kept as an independent arithmetic oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Sequence

import numpy as np

TABLE_LIMIT = 1 << 26
MAX_Q = 32

# Conway polynomials C_{p,n}, nonzero terms as {degree: coefficient}.
CONWAY = {
    (2, 2): {2: 1, 1: 1, 0: 1},
    (2, 3): {3: 1, 1: 1, 0: 1},
    (2, 4): {4: 1, 1: 1, 0: 1},
    (2, 5): {5: 1, 2: 1, 0: 1},
    (2, 10): {10: 1, 6: 1, 5: 1, 3: 1, 2: 1, 1: 1, 0: 1},
    (2, 15): {15: 1, 5: 1, 4: 1, 2: 1, 0: 1},
    (2, 20): {20: 1, 10: 1, 9: 1, 7: 1, 6: 1, 5: 1, 4: 1, 1: 1, 0: 1},
    (2, 25): {25: 1, 8: 1, 6: 1, 2: 1, 0: 1},
    (3, 2): {2: 1, 1: 2, 0: 2},
    (3, 3): {3: 1, 1: 2, 0: 1},
    (3, 5): {5: 1, 1: 2, 0: 1},
    (3, 10): {10: 1, 6: 2, 5: 2, 4: 2, 1: 1, 0: 2},
    (3, 15): {15: 1, 8: 2, 5: 1, 2: 2, 1: 1, 0: 1},
    (5, 2): {2: 1, 1: 4, 0: 2},
    (5, 5): {5: 1, 1: 4, 0: 3},
    (5, 10): {10: 1, 5: 3, 4: 3, 3: 2, 2: 4, 1: 1, 0: 2},
    (7, 5): {5: 1, 1: 1, 0: 4},
    (11, 5): {5: 1, 2: 10, 0: 9},
    (13, 5): {5: 1, 1: 4, 0: 11},
    (17, 5): {5: 1, 1: 1, 0: 14},
    (19, 5): {5: 1, 1: 5, 0: 17},
    (23, 5): {5: 1, 1: 3, 0: 18},
    (29, 5): {5: 1, 1: 3, 0: 27},
    (31, 5): {5: 1, 1: 7, 0: 28},
}


class FieldError(Exception):
    pass


class NotPrime(FieldError):
    pass


class UnsupportedSize(FieldError):
    pass


class SingularMatrix(FieldError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def conway_poly(p: int, n: int) -> tuple[int, ...]:
    """Coefficients of C_{p,n}, lowest degree first."""
    try:
        terms = CONWAY[(p, n)]
    except KeyError:
        raise UnsupportedSize(f"no Conway polynomial stored for p={p}, n={n}") from None
    return tuple(terms.get(i, 0) for i in range(n + 1))


def parse_q(text: str) -> tuple[int, int]:
    """Accept "p^h", "p**h" or a plain prime power such as "25"."""
    text = text.strip().replace("**", "^")
    if "^" in text:
        a, b = text.split("^", 1)
        p, h = int(a), int(b)
        if not is_prime(p) or h < 1:
            raise NotPrime(f"{text} is not of the form p^h")
        return p, h
    q = int(text)
    for p in range(2, q + 1):
        if q % p == 0:
            h = 0
            r = q
            while r % p == 0:
                r //= p
                h += 1
            if r != 1:
                raise NotPrime(f"{q} is not a prime power")
            return p, h
    raise NotPrime(f"{q} is not a prime power")


# ---------------------------------------------------------------------------
# helpers on packed F_p vectors


def _digits(v: int, p: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        v, r = divmod(v, p)
        out.append(r)
    return out


def _pack(d: Sequence[int], p: int) -> int:
    v = 0
    for c in reversed(d):
        v = v * p + c
    return v


def _polymulmod(a: Sequence[int], b: Sequence[int], mod: Sequence[int], p: int) -> list[int]:
    n = len(mod) - 1
    prod = [0] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for j in range(n + 1):
                prod[k - n + j] = (prod[k - n + j] - c * mod[j]) % p
    return prod[:n]


# ---------------------------------------------------------------------------


class FieldCtx:
    """The tower F_p < F_q < F_{q^5}; use :func:`field_construct`."""

    mode = "abstract"

    def __init__(self, p: int, h: int):
        self.p = p
        self.h = h
        self.q = p**h
        self.n = 5 * h
        self.size = self.q**5
        self.order = self.size - 1
        self.theta = self.order // (self.q - 1)
        self.poly = conway_poly(p, self.n)
        self.qpow = tuple(self.q**i for i in range(5))

    # -- description -------------------------------------------------------
    def descriptor(self) -> dict:
        return {"p": self.p, "h": self.h, "q": self.q, "definingPoly": list(self.poly)}

    def __repr__(self):
        return f"FieldCtx(q={self.q}, mode={self.mode})"

    # -- derived scalar operations ----------------------------------------
    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def tr(self, a: int) -> int:
        s = a
        for i in range(1, 5):
            s = self.add(s, self.frob(a, i))
        return s

    def trace_norm(self, a: int) -> tuple[int, int]:
        return self.tr(a), self.norm(a)

    def in_fq(self, a: int) -> bool:
        return self.frob(a, 1) == a

    def sum(self, items) -> int:
        s = 0
        for x in items:
            s = self.add(s, x)
        return s

    def prod(self, items) -> int:
        s = 1
        for x in items:
            s = self.mul(s, x)
        return s

    def from_int(self, m: int) -> int:
        m %= self.p
        r = 0
        for _ in range(m):
            r = self.add(r, 1)
        return r

    @cached_property
    def minus_one(self) -> int:
        return self.neg(1)

    @cached_property
    def w(self) -> int:
        """Primitive element g^theta of F_q (root of the degree-h Conway polynomial)."""
        return self.gpow(self.theta)

    @cached_property
    def fq(self) -> tuple[int, ...]:
        """Elements of F_q: 0 followed by w^0, w^1, ..., w^(q-2)."""
        return (0,) + tuple(self.pow(self.w, k) for k in range(self.q - 1))

    @cached_property
    def fq_star(self) -> tuple[int, ...]:
        return self.fq[1:]

    def elements(self):
        return range(self.size) if self.mode == "table" else (self.from_vec(v) for v in range(self.size))

    def nonzero(self):
        return (self.gpow(k) for k in range(self.order))

    def root(self, c: int, e: int) -> int | None:
        """Some x with x^e = c (the one of least discrete log), or None."""
        if c == 0:
            return 0 if e > 0 else None
        M = self.order
        e %= M
        lc = self.log(c)
        d = gcd(e, M)
        if lc % d:
            return None
        m = M // d
        k = (lc // d) * pow(e // d, -1, m) % m if m > 1 else 0
        return self.gpow(k)

    # -- Moore matrix and normal basis -------------------------------------
    @cached_property
    def normal_element(self) -> int:
        for k in range(self.order):
            gam = self.gpow(k)
            if is_normal(self, gam):
                return gam
        raise FieldError("no normal element found")  # pragma: no cover

    @cached_property
    def moore(self) -> tuple[tuple[int, ...], ...]:
        gam = self.normal_element
        return tuple(tuple(self.frob(gam, i + j) for j in range(5)) for i in range(5))

    @cached_property
    def moore_inv(self) -> tuple[tuple[int, ...], ...]:
        return tuple(map(tuple, mat_inv(self, [list(r) for r in self.moore])))

    @cached_property
    def basis(self) -> tuple[int, ...]:
        """The normal basis gamma^{q^i} of F_{q^5} over F_q."""
        return tuple(self.frob(self.normal_element, i) for i in range(5))

    @cached_property
    def dual_basis(self) -> tuple[int, ...]:
        b = self.basis
        gram = [[self.tr(self.mul(x, y)) for y in b] for x in b]
        gi = mat_inv(self, gram)
        return tuple(self.sum(self.mul(gi[i][j], b[j]) for j in range(5)) for i in range(5))

    def coords(self, x: int) -> tuple[int, ...]:
        """F_q-coordinates of x in the normal basis."""
        return tuple(self.tr(self.mul(d, x)) for d in self.dual_basis)

    def from_coords(self, c: Sequence[int]) -> int:
        return self.sum(self.mul(ci, bi) for ci, bi in zip(c, self.basis))

    # -- notation -----------------------------------------------------------
    def fmt(self, a: int) -> str:
        if a == 0:
            return "0"
        return f"g^{self.log(a)}"

    def parse(self, text) -> int:
        if isinstance(text, int):
            return self.from_int(text)
        t = str(text).strip().replace(" ", "")
        neg = t.startswith("-")
        if neg:
            t = t[1:]
        if t in ("0",):
            v = 0
        elif t == "g":
            v = self.gpow(1)
        elif t.startswith("g^"):
            v = self.gpow(int(t[2:]))
        elif t.startswith("w^"):
            v = self.pow(self.w, int(t[2:]))
        elif t == "w":
            v = self.w
        else:
            v = self.from_int(int(t))
        return self.neg(v) if neg else v


class TableField(FieldCtx):
    """Zech-logarithm arithmetic on codes (0 = zero, c = g^(c-1))."""

    mode = "table"

    def __init__(self, p: int, h: int):
        super().__init__(p, h)
        if self.size > TABLE_LIMIT:
            raise UnsupportedSize(f"q^5 = {self.size} exceeds the table budget")
        self._exp, self._log = _build_tables(p, self.n, self.poly)
        M = self.order
        v = self._exp.astype(np.int64)
        v1 = np.where(v % p == p - 1, v - (p - 1), v + 1)
        z = self._log[v1].astype(np.int64) + 1
        z[v1 == 0] = 0
        self.zech = z.astype(np.int32)
        self._zl = self.zech.tolist() if M <= (1 << 21) else self.zech
        self._half = M // 2 if p != 2 else 0
        self.qpow_mod = tuple(x % M for x in self.qpow)

    # -- scalar -------------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if a == 0:
            return b
        if b == 0:
            return a
        M = self.order
        z = int(self._zl[(b - a) % M])
        if z == 0:
            return 0
        return (a + z - 2) % M + 1

    def neg(self, a: int) -> int:
        if a == 0 or self.p == 2:
            return a
        return (a - 1 + self._half) % self.order + 1

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return (a + b - 2) % self.order + 1

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return (1 - a) % self.order + 1

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return ((a - 1) * e) % self.order + 1

    def frob(self, a: int, i: int = 1) -> int:
        if a == 0:
            return 0
        return ((a - 1) * self.qpow_mod[i % 5]) % self.order + 1

    def norm(self, a: int) -> int:
        if a == 0:
            return 0
        return ((a - 1) * self.theta) % self.order + 1

    def tr(self, a: int) -> int:
        if a == 0:
            return 0
        M = self.order
        la = a - 1
        s = a
        for i in range(1, 5):
            s = self.add(s, la * self.qpow_mod[i] % M + 1)
        return s

    def in_fq(self, a: int) -> bool:
        return a == 0 or (a - 1) % self.theta == 0

    def gpow(self, k: int) -> int:
        return k % self.order + 1

    def log(self, a: int) -> int:
        if a == 0:
            raise ValueError("log of zero")
        return a - 1

    def from_int(self, m: int) -> int:
        m %= self.p
        return 0 if m == 0 else int(self._log[m]) + 1

    def to_vec(self, a: int) -> int:
        return 0 if a == 0 else int(self._exp[a - 1])

    def from_vec(self, v: int) -> int:
        return 0 if v == 0 else int(self._log[v]) + 1

    # -- vectorized (numpy int64 arrays of codes) --------------------------
    def v_add(self, a, b):
        M = self.order
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        z = self.zech[(b - a) % M].astype(np.int64)
        r = (a + z - 2) % M + 1
        r = np.where(z == 0, 0, r)
        r = np.where(a == 0, b, r)
        return np.where(b == 0, a, r)

    def v_mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = (a + b - 2) % self.order + 1
        return np.where((a == 0) | (b == 0), 0, r)

    def v_neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a
        return np.where(a == 0, 0, (a - 1 + self._half) % self.order + 1)

    def v_sub(self, a, b):
        return self.v_add(a, self.v_neg(b))

    def v_pow(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        r = ((a - 1) * (e % self.order)) % self.order + 1
        return np.where(a == 0, 1 if e == 0 else 0, r)

    def v_frob(self, a, i: int = 1):
        return self.v_pow(a, self.qpow_mod[i % 5])

    def v_norm(self, a):
        return self.v_pow(a, self.theta)

    def v_inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return (1 - a) % self.order + 1

    def v_div(self, a, b):
        return self.v_mul(a, self.v_inv(b))


class PolyField(FieldCtx):
    """Polynomial-basis arithmetic on packed coefficient vectors.

    Slow; used to cross-check the table arithmetic on small fields.
    """

    mode = "poly"

    def __init__(self, p: int, h: int):
        super().__init__(p, h)
        n, P = self.n, self.p
        # matrix of x -> x^q as images of the monomial basis
        xq = self._powvec([0, 1] + [0] * (n - 2), self.q)
        imgs = [[1] + [0] * (n - 1)]
        for _ in range(1, n):
            imgs.append(_polymulmod(imgs[-1], xq, self.poly, P))
        self._frob_imgs = [imgs]
        for _ in range(1, 5):
            prev = self._frob_imgs[-1]
            self._frob_imgs.append([self._apply(imgs, r) for r in prev])

    def _powvec(self, d, e):
        r = [1] + [0] * (self.n - 1)
        b = list(d)
        while e:
            if e & 1:
                r = _polymulmod(r, b, self.poly, self.p)
            b = _polymulmod(b, b, self.poly, self.p)
            e >>= 1
        return r

    def _apply(self, imgs, d):
        out = [0] * self.n
        for i, c in enumerate(d):
            if c:
                for j, v in enumerate(imgs[i]):
                    out[j] = (out[j] + c * v) % self.p
        return out

    def _d(self, a):
        return _digits(a, self.p, self.n)

    def add(self, a, b):
        da, db = self._d(a), self._d(b)
        return _pack([(x + y) % self.p for x, y in zip(da, db)], self.p)

    def neg(self, a):
        return _pack([(-x) % self.p for x in self._d(a)], self.p)

    def mul(self, a, b):
        return _pack(_polymulmod(self._d(a), self._d(b), self.poly, self.p), self.p)

    def pow(self, a, e):
        if e < 0:
            a, e = self.inv(a), -e
        if a == 0:
            return 1 if e == 0 else 0
        return _pack(self._powvec(self._d(a), e % self.order), self.p)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.pow(a, self.order - 1)

    def frob(self, a, i=1):
        i %= 5
        if i == 0 or a == 0:
            return a
        return _pack(self._apply(self._frob_imgs[i - 1], self._d(a)), self.p)

    def norm(self, a):
        return self.prod(self.frob(a, i) for i in range(5))

    def gpow(self, k):
        return self.pow(self.p, k % self.order)

    def log(self, a):
        if a == 0:
            raise ValueError("log of zero")
        x, g = 1, self.p
        for k in range(self.order):
            if x == a:
                return k
            x = self.mul(x, g)
        raise FieldError("not in the multiplicative group")  # pragma: no cover

    def to_vec(self, a):
        return a

    def from_vec(self, v):
        return v


def _build_tables(p: int, n: int, poly: Sequence[int]):
    """exp[k] = packed vector of g^k, log = inverse permutation (log[0] = -1)."""
    N = p**n
    M = N - 1
    pw = np.array([p**i for i in range(n)], dtype=np.int64)
    exp = np.empty(M, dtype=np.int64)
    exp[0] = 1
    filled = 1
    gx = [0, 1] + [0] * (n - 2)
    chunk = 1 << 19
    while filled < M:
        take = min(filled, M - filled)
        # g^filled, then the images of the monomials x^b under multiplication by it
        cur = _polymulmod(_digits(int(exp[filled - 1]), p, n), gx, poly, p)
        imgs = []
        for _ in range(n):
            imgs.append(cur)
            cur = _polymulmod(cur, gx, poly, p)
        img = np.array(imgs, dtype=np.int64)
        for s in range(0, take, chunk):
            blk = exp[s:min(s + chunk, take)]
            dig = (blk[:, None] // pw[None, :]) % p
            exp[filled + s:filled + s + len(blk)] = ((dig @ img) % p) @ pw
        filled += take
    log = np.full(N, -1, dtype=np.int64)
    log[exp] = np.arange(M, dtype=np.int64)
    if np.count_nonzero(log >= 0) != M:
        raise FieldError("defining polynomial is not primitive")
    return exp.astype(np.int32), log.astype(np.int32)


_CACHE: dict = {}


def field_construct(p: int, h: int = 1, mode: str | None = None) -> FieldCtx:
    """Build (and cache) the tower for q = p^h."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if h < 1 or p**h > MAX_Q:
        raise UnsupportedSize(f"q = {p}^{h} is outside the supported range q <= {MAX_Q}")
    if mode is None:
        mode = "table" if p ** (5 * h) <= TABLE_LIMIT else "poly"
    key = (p, h, mode)
    if key not in _CACHE:
        _CACHE[key] = TableField(p, h) if mode == "table" else PolyField(p, h)
    return _CACHE[key]


def field_for_q(q: int | str, mode: str | None = None) -> FieldCtx:
    p, h = parse_q(str(q))
    return field_construct(p, h, mode)


# ---------------------------------------------------------------------------
# exact linear algebra over F_{q^5} (works inside any subfield as well)


def rref(F: FieldCtx, rows) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncol = len(m[0])
    pivots = []
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        iv = F.inv(m[r][c])
        m[r] = [F.mul(iv, x) for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = F.neg(m[i][c])
                m[i] = [F.add(x, F.mul(f, y)) for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(F: FieldCtx, rows) -> int:
    return len(rref(F, rows)[0])


def nullspace(F: FieldCtx, rows, ncol: int | None = None) -> list[list[int]]:
    """Basis of {x : M x = 0} for the matrix with the given rows."""
    rows = [list(r) for r in rows]
    if ncol is None:
        ncol = len(rows[0])
    red, piv = rref(F, rows) if rows else ([], [])
    free = [c for c in range(ncol) if c not in piv]
    basis = []
    for f in free:
        v = [0] * ncol
        v[f] = 1
        for r, pc in zip(red, piv):
            v[pc] = F.neg(r[f])
        basis.append(v)
    return basis


def mat_mul(F: FieldCtx, A, B):
    Bt = list(zip(*B))
    return [[F.sum(F.mul(a, b) for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_vec(F: FieldCtx, A, v):
    return [F.sum(F.mul(a, x) for a, x in zip(row, v)) for row in A]


def mat_inv(F: FieldCtx, A):
    n = len(A)
    aug = [list(A[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    red, piv = rref(F, aug)
    if len(red) < n or piv[:n] != list(range(n)):
        raise SingularMatrix("matrix is singular")
    return [r[n:] for r in red]


def solve(F: FieldCtx, A, b):
    """One solution x of A x = b, or None."""
    n = len(A[0])
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    red, piv = rref(F, aug)
    if n in piv:
        return None
    x = [0] * n
    for r, pc in zip(red, piv):
        x[pc] = r[n]
    return x


def is_normal(F: FieldCtx, gam: int) -> bool:
    W = [[F.frob(gam, i + j) for j in range(5)] for i in range(5)]
    return rank(F, W) == 5


@dataclass(frozen=True)
class KernelResult:
    kernel: tuple[int, ...]  # F_q-basis of the kernel, as field elements
    rank: int
    matrix: tuple[tuple[int, ...], ...]  # 5x5 over F_q in the normal basis


def fq_matrix(F: FieldCtx, coeffs: Sequence[int]) -> list[list[int]]:
    """Matrix over F_q (normal basis) of x -> sum a_i x^{q^i}."""
    cols = []
    for b in F.basis:
        y = F.sum(F.mul(a, F.frob(b, i)) for i, a in enumerate(coeffs))
        cols.append(F.coords(y))
    return [[cols[j][i] for j in range(5)] for i in range(5)]


def fq_linear_solve(F: FieldCtx, linmap) -> KernelResult:
    """Kernel and rank of an F_q-linear map of F_{q^5}.

    ``linmap`` is either a sequence of 5 coefficients (or an object with a
    ``coeffs`` attribute) describing sum a_i x^{q^i}, or a 5x5 matrix over F_q
    acting on coordinates in the normal basis.
    """
    coeffs = getattr(linmap, "coeffs", linmap)
    if len(coeffs) == 5 and not isinstance(coeffs[0], (list, tuple)):
        M = fq_matrix(F, coeffs)
    else:
        M = [list(r) for r in coeffs]
        for row in M:
            for x in row:
                if not F.in_fq(x):
                    raise ValueError("matrix entries must lie in F_q")
    ker = nullspace(F, M, 5)
    kernel = tuple(F.from_coords(v) for v in ker)
    return KernelResult(kernel, 5 - len(ker), tuple(map(tuple, M)))
