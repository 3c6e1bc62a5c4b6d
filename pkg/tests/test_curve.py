import numpy as np
import pytest
from hypothesis import given, strategies as st

from msls.curve import (
    CurveQ,
    Degenerate,
    NoDeltaRoot,
    build_and_count,
    conic_case,
    cubic_form,
    lift_and_verify,
    orbit_points,
    quadratic_roots,
    sample_lifts,
    system_values,
)
from msls.families import InvalidPair, sctness_solve, valid_pair
from msls.gfield import field_for_q


def valid_pairs(F):
    return [(d, e) for d in F.fq_star for e in F.fq_star if valid_pair(F, d, e)]


@given(st.integers(0, 3124), st.integers(0, 3124))
def test_curve_is_symmetric(X, Y):
    F = field_for_q(5)
    Q = CurveQ.build(F, F.from_int(2), F.from_int(3))
    assert Q(X, Y) == Q(Y, X)


@pytest.mark.parametrize("q", (3, 4, 5, 7))
def test_degree_law(q):
    F = field_for_q(q)
    for d, e in valid_pairs(F):
        Q = CurveQ.build(F, d, e)
        assert Q.degree == (3 if F.mul(d, e) == 1 else 4)


@pytest.mark.parametrize("q", (4, 5, 7))
def test_cubic_form_when_delta_eps_is_one(q, rng):
    F = field_for_q(q)
    for d in F.fq_star:
        e = F.inv(d)
        if not valid_pair(F, d, e):
            continue
        Q = CurveQ.build(F, d, e)
        for X, Y in rng.integers(0, F.size, (20, 2)).tolist():
            assert Q(X, Y) == cubic_form(F, d, X, Y)


def test_q5_pair_2_3_is_cubic():
    F = field_for_q(5)
    assert CurveQ.build(F, F.from_int(2), F.from_int(3)).degree == 3


def test_invalid_pair_rejected():
    F = field_for_q(3)
    with pytest.raises(InvalidPair):
        CurveQ.build(F, 1, 1)


def brute_count(Q, xs, ys):
    return sum(Q(x, y) == 0 for x in xs for y in ys)


@pytest.mark.parametrize("q", (3, 4, 5))
def test_fq_point_count_matches_brute_force(q):
    F = field_for_q(q)
    fq = F.fq
    for d, e in valid_pairs(F):
        Q, n = build_and_count(F, d, e, 1)
        assert n == brute_count(Q, fq, fq)


def test_q3_pair_1_2_has_points():
    F = field_for_q(3)
    _, n = build_and_count(F, 1, F.from_int(2), 1)
    assert n >= 1


def test_fq5_point_count_matches_brute_force_q2_q3():
    for q in (2, 3):
        F = field_for_q(q)
        pairs = valid_pairs(F)
        for d, e in pairs[:2]:
            Q, n = build_and_count(F, d, e, 5)
            xs = range(F.size)
            assert n == brute_count(Q, xs, xs)


def test_count_rejects_other_extensions():
    F = field_for_q(3)
    with pytest.raises(ValueError):
        build_and_count(F, 1, F.from_int(2), 2)


@pytest.mark.parametrize("q", (2, 3, 4))
def test_quadratic_roots_brute_force(q, rng):
    F = field_for_q(q)
    abc = rng.integers(0, F.size, (40, 3))
    abc[:5, 0] = 0
    abc[5, :] = 0
    a, b, c = abc.T
    r1, r2, m1, m2, allY = quadratic_roots(F, a, b, c)
    ys = np.arange(F.size, dtype=np.int64)
    for i in range(len(a)):
        vals = F.v_add(F.v_add(F.v_mul(F.v_mul(ys, ys), int(a[i])), F.v_mul(ys, int(b[i]))), int(c[i]))
        roots = set(ys[vals == 0].tolist())
        if allY[i]:
            assert len(roots) == F.size
            continue
        got = set()
        if m1[i]:
            got.add(int(r1[i]))
        if m2[i]:
            got.add(int(r2[i]))
        assert got == roots


@pytest.mark.parametrize("q", (3, 4, 5))
def test_lifts_satisfy_system(q, rng):
    F = field_for_q(q)
    for d, e in valid_pairs(F)[:4]:
        lifts, _ = sample_lifts(F, d, e, 5, rng)
        assert lifts
        for pt in lifts:
            assert not any(system_values(F, d, e, pt))


def test_lift_degenerate():
    F = field_for_q(3)
    with pytest.raises(Degenerate):
        lift_and_verify(F, 1, F.from_int(2), 0, 5)


@pytest.mark.parametrize("q", (3, 4, 5))
def test_orbit_points_count_sctness_solutions(q):
    F = field_for_q(q)
    for d, e in valid_pairs(F):
        for s in (1, 2):
            assert len(orbit_points(F, d, e, s)) == sctness_solve(F, d, e, s).solutions


def test_conic_case_q4():
    F = field_for_q(4)
    chains = conic_case(F)
    assert len(chains) == 2 and all(c.ok() for c in chains)


def test_conic_case_q5_skipped():
    F = field_for_q(5)
    chains = conic_case(F)
    assert chains and all(c.skipped for c in chains)


@pytest.mark.parametrize("q", (3, 7))
def test_conic_case_without_root(q):
    with pytest.raises(NoDeltaRoot):
        conic_case(field_for_q(q))
