import pytest
from hypothesis import assume, given, strategies as st

from msls.families import (
    BadParameters,
    FamilySpec,
    InvalidPair,
    ZeroB,
    alpha_beta_predicates,
    c3_transform_to_f1,
    construct,
    family_scattered,
    formak_alpha_beta,
    gb_check,
    norm_fiber,
    pair_of,
    pair_to_poly,
    rank_of_pair,
    sctness_solve,
    valid_pair,
    verify_sctness_witness,
)
from msls.gfield import field_for_q
from msls.linpoly import apply_projectivity, linear_set_of_pair, linear_set_of_poly


def fq_star(F):
    return [x for x in range(1, F.size) if F.in_fq(x)]


@pytest.mark.parametrize("q", (2, 3))
def test_lp_scattered_iff_norm_not_one(q):
    F = field_for_q(q)
    for d in range(1, F.size, max(1, F.size // 40)):
        if F.norm(d) == 1:
            with pytest.raises(BadParameters):
                pair_of(F, FamilySpec("LP", (d,)))
            continue
        for s in (1, 2):
            assert family_scattered(F, FamilySpec("LP", (d,), s)).scattered
            assert construct(F, FamilySpec("LP", (d,), s)).is_scattered()


def test_pseudoregulus_is_scattered():
    F = field_for_q(3)
    ls = construct(F, FamilySpec("Pseudoregulus", (), 2))
    assert ls.is_scattered() and ls.size == (F.size - 1) // (F.q - 1)


def test_bad_s():
    F = field_for_q(2)
    with pytest.raises(BadParameters):
        pair_of(F, FamilySpec("Pseudoregulus", (), 5))


@pytest.mark.parametrize("q", (2, 3))
def test_gb_check_agrees_with_point_set(q):
    F = field_for_q(q)
    for b in range(1, F.size, max(1, F.size // 30)):
        r = gb_check(F, b)
        assert r.scattered == construct(F, FamilySpec("Gb", (b,))).is_scattered()
        if not r.scattered:
            y, z = r.witness
            assert y != 0 and z != 0 and not F.in_fq(F.div(y, z))
    with pytest.raises(ZeroB):
        gb_check(F, 0)


@pytest.mark.parametrize("q", (3, 4))
def test_formak_is_alphabeta(q):
    F = field_for_q(q)
    for k in (1, 2, F.size - 1):
        for d in fq_star(F)[:2]:
            al, be = formak_alpha_beta(F, k, d, 1)
            a = construct(F, FamilySpec("FormaK", (k, d)))
            b = construct(F, FamilySpec("AlphaBeta", (al, be)))
            assert a.points == b.points


def test_predicates_match_direct_q2_exhaustive():
    F = field_for_q(2)
    for al in range(F.size):
        for be in range(F.size):
            if al == 0 and be == 0:
                continue
            p = alpha_beta_predicates(F, al, be, 1)
            spec = FamilySpec("AlphaBeta", (al, be))
            if p.rank_lt5:
                assert rank_of_pair(F, spec) < 5
                continue
            assert p.scattered_by_criterion == family_scattered(F, spec).scattered


def test_predicates_match_direct_q3_mixed(rng):
    F = field_for_q(3)
    draws = [tuple(int(x) for x in rng.integers(0, F.size, 2)) for _ in range(60)]
    draws += [(1, F.sub(1, e)) for e in fq_star(F)] + [(a, 0) for a in range(1, 40)]
    sc = 0
    for al, be in draws:
        if al == 0 and be == 0:
            continue
        p = alpha_beta_predicates(F, al, be, 1)
        if p.rank_lt5:
            continue
        d = family_scattered(F, FamilySpec("AlphaBeta", (al, be))).scattered
        assert p.scattered_by_criterion == d
        sc += d
    assert sc > 0


def test_norm_fiber():
    F = field_for_q(3)
    xs = norm_fiber(F, F.minus_one)
    assert len(xs) == (F.size - 1) // (F.q - 1)
    assert all(F.norm(int(x)) == F.minus_one for x in xs[:50])


@pytest.mark.parametrize("q", (3, 4, 5))
def test_sctness_witnesses_verify(q):
    F = field_for_q(q)
    found = 0
    for d in fq_star(F):
        for e in fq_star(F):
            if not valid_pair(F, d, e):
                continue
            r = sctness_solve(F, d, e, 1)
            if r.found:
                assert verify_sctness_witness(F, d, e, 1, r.witness)
                found += 1
    assert found > 0


def test_invalid_pair_raises():
    F = field_for_q(3)
    with pytest.raises(InvalidPair):
        sctness_solve(F, 1, 1)
    with pytest.raises(BadParameters):
        sctness_solve(F, 0, 1)


def c3_etas(F):
    out = []
    for eta in range(1, F.size):
        if F.tr(eta) == 0:
            out.append(eta)
    return out


def test_c3_point_set_independent_of_rho():
    F = field_for_q(3)
    rhos = [r for r in range(1, F.size) if F.tr(r) != 0][:6]
    for eta in c3_etas(F)[:5]:
        base = construct(F, FamilySpec("C3", (eta, rhos[0]))).points
        for r in rhos[1:]:
            assert construct(F, FamilySpec("C3", (eta, r))).points == base


def test_c3_maps_onto_f1():
    F = field_for_q(3)
    done = 0
    for eta in c3_etas(F):
        if F.tr(F.inv(eta)) == 0:
            continue
        c3 = construct(F, FamilySpec("C3", (eta, F.inv(eta))))
        f1 = construct(F, FamilySpec("F1", (eta,)))
        assert apply_projectivity(c3, c3_transform_to_f1(F, eta)).points == f1.points
        done += 1
        if done == 5:
            break
    assert done


def test_c4_requires_norm_one():
    F = field_for_q(3)
    with pytest.raises(BadParameters):
        pair_of(F, FamilySpec("C4", (2 if F.norm(2) != 1 else 3,)))


@given(st.integers(1, 242), st.integers(0, 242))
def test_pair_to_poly_same_set(d, a):
    F = field_for_q(3)
    if F.norm(d) == 1 or d == 0:
        return
    g, h = pair_of(F, FamilySpec("LP", (d,)))
    g = g + h.scale(a)
    try:
        f, swapped = pair_to_poly(g, h)
    except BadParameters:
        assume(False)
    ls = linear_set_of_poly(f)
    ref = linear_set_of_pair(h, g) if swapped else linear_set_of_pair(g, h)
    assert ls.points == ref.points


def test_valid_pair_rule():
    F = field_for_q(5)
    for d in fq_star(F):
        for e in fq_star(F):
            d2e = F.mul(F.mul(d, d), e)
            assert (d2e != 1 or not valid_pair(F, d, e))
