import numpy as np
import pytest

from msls.config import (
    InconsistentSystem,
    RankNotFour,
    canonical_rk5,
    classify,
    ef_lp_test,
    identity_battery,
    invariant_battery,
    lambda_mu_extract,
    random_rk44_params,
    rk44_extract,
    sigma_matrix,
    synthetic_rk5,
    synthetic_rk44,
    u4_coordinates,
    uab_projection,
)
from msls.gfield import field_for_q
from msls.linpoly import LinearizedPoly, linear_set_of_pair, rows_distinct
from msls.projgeom import MOORE, RATIONAL, GeometryError, VertexMeetsSigma, gamma_from_pair, gamma_from_poly, model_convert, projection_pair


def lp_plane(F, d, s=1):
    c = [0] * 5
    c[s] = 1
    c[5 - s] = d
    return gamma_from_pair(F, LinearizedPoly.identity(F), LinearizedPoly(F, tuple(c)))


def scattered_f0_planes(F, rng, n):
    """Planes of scattered x^q + a2 x^{q^2} + a3 x^{q^3} + a4 x^{q^4} found fiber by fiber."""
    M, th = F.order, F.theta
    js = np.arange(th, dtype=np.int64)
    T = [(js * ((F.qpow[i] - 1) % M)) % M + 1 for i in range(5)]
    a2s = np.arange(F.size, dtype=np.int64)
    out = []
    while len(out) < n:
        a3, a4 = (int(x) for x in rng.integers(0, F.size, 2))
        base = F.v_add(F.v_add(T[1], F.v_mul(T[3], a3)), F.v_mul(T[4], a4))
        vals = F.v_add(base[None, :], F.v_mul(a2s[:, None], T[2][None, :]))
        for a2 in np.flatnonzero(rows_distinct(vals))[:3].tolist():
            out.append((a2, a3, a4))
    return out[:n]


def test_pseudoregulus_plane():
    F = field_for_q(3)
    rep = classify(F, gamma_from_poly(F, 0, 0, 0))
    assert rep.cls == "Pseudoregulus" and rep.trigger in ("A", "B")


@pytest.mark.parametrize("q", (3, 4))
def test_lp_planes_classify_lp(q, rng):
    F = field_for_q(q)
    done = 0
    for d in range(2, F.size):
        if F.norm(d) in (0, 1):
            continue
        rep = classify(F, lp_plane(F, d))
        assert rep.is_lp and 5 in (rep.rkA, rep.rkB)
        assert all(ok for _, ok in identity_battery(rep))
        done += 1
        if done == 10:
            break


def test_non_scattered_plane_has_rank2_witness(rng):
    F = field_for_q(3)
    for _ in range(20):
        a = [int(x) for x in rng.integers(0, F.size, 3)]
        rep = classify(F, gamma_from_poly(F, *a))
        if rep.cls == "NonScattered":
            assert rep.witness is not None and rep.gamma.contains(rep.witness)
            return
    pytest.fail("no non-scattered plane drawn")


def test_vertex_errors():
    F = field_for_q(3)
    g = LinearizedPoly(F, (1, F.minus_one, 0, 0, 0))
    h = LinearizedPoly(F, (F.minus_one, 0, 1, 0, 0))
    G = gamma_from_pair(F, g, h)
    with pytest.raises(VertexMeetsSigma):
        classify(F, G)
    assert classify(F, G, strict=False).cls == "InvalidVertex"
    with pytest.raises(GeometryError):
        classify(F, gamma_from_poly(F, 0, 0, 0).__class__.of(F, [[1, 0, 0, 0, 0]]))


@pytest.mark.parametrize("q", (3, 4))
def test_identity_battery_on_random_planes(q, rng):
    F = field_for_q(q)
    for a in scattered_f0_planes(F, rng, 12):
        rep = classify(F, gamma_from_poly(F, *a), scattered=True)
        if rep.cls == "Pseudoregulus":
            continue
        names = dict(identity_battery(rep))
        assert all(names.values()), names
        assert ef_lp_test(rep) == rep.is_lp


def test_labels_swap_under_sigma_squared(rng):
    F = field_for_q(3)
    for a in scattered_f0_planes(F, rng, 10):
        G = gamma_from_poly(F, *a)
        r1 = classify(F, G, MOORE, scattered=True)
        r2 = classify(F, G, MOORE.with_s(2), scattered=True)
        assert r1.is_lp == r2.is_lp
        if r1.is_lp:
            assert (r1.configI, r1.configII) == (r2.configII, r2.configI)


def test_classification_is_model_independent(rng):
    F = field_for_q(3)
    for a in scattered_f0_planes(F, rng, 8):
        G = gamma_from_poly(F, *a)
        r1 = classify(F, G, MOORE, scattered=True)
        r2 = classify(F, model_convert(F, G, MOORE, RATIONAL), RATIONAL, scattered=True)
        assert r1.cls == r2.cls and (r1.rkA, r1.rkB) == (r2.rkA, r2.rkB)


def test_u4_coordinates_and_sigma_matrices(rng):
    F = field_for_q(4)
    for a in scattered_f0_planes(F, rng, 6):
        rep = classify(F, gamma_from_poly(F, *a), scattered=True)
        if rep.cls == "Pseudoregulus":
            continue
        lm = lambda_mu_extract(rep)
        assert lm.residuals_zero()
        U = u4_coordinates(rep, lm)
        assert all(U.checks.values()), U.checks
        M1 = sigma_matrix(rep, U, 1)
        # sigma^5 is the identity: M1 M1^q ... M1^{q^4} = I
        P = [[int(i == j) for j in range(5)] for i in range(5)]
        for i in range(5):
            Mi = [[F.frob(x, (rep.model.s * i) % 5) for x in row] for row in M1]
            P = [[F.sum(F.mul(P[r][k], Mi[k][c]) for k in range(5)) for c in range(5)] for r in range(5)]
        assert P == [[int(i == j) for j in range(5)] for i in range(5)]


@pytest.mark.parametrize("q", (3, 4))
def test_canonical_rank5_round_trip(q, rng):
    F = field_for_q(q)
    for _ in range(8):
        G, model, _ = synthetic_rk5(F, rng)
        r = canonical_rk5(classify(F, G, model, scattered=True))
        assert r.ok(), r.checks


@pytest.mark.parametrize("q", (2, 3))
@pytest.mark.parametrize("lam_one", (True, False))
def test_rank44_round_trip(q, lam_one, rng):
    F = field_for_q(q)
    for _ in range(5):
        w, lam = random_rk44_params(F, lam_one, rng)
        G, model = synthetic_rk44(F, w, lam, rng)
        rep = classify(F, G, model, strict=False, scattered=True)
        r = rk44_extract(rep)
        assert r.branch == ("C3" if lam_one else "C4")
        assert r.ok(), r.checks


def test_rank44_rejects_rank5():
    F = field_for_q(3)
    rep = classify(F, lp_plane(F, 2 if F.norm(2) not in (0, 1) else 3))
    with pytest.raises(RankNotFour):
        rk44_extract(rep)


def test_uab_projection_matches_plane(rng):
    F = field_for_q(3)
    checked = 0
    for _ in range(20):
        a = [int(x) for x in rng.integers(0, F.size, 3)]
        b = [int(x) for x in rng.integers(0, F.size, 3)]
        r = uab_projection(F, a, b)
        if not r.m_rank3:
            continue
        g, h = projection_pair(F, r.gamma, RATIONAL)
        assert linear_set_of_pair(g, h).histogram() == r.linear_set.histogram()
        checked += 1
    assert checked > 0


def test_invariant_battery_rejects_pseudoregulus():
    F = field_for_q(3)
    rep = classify(F, gamma_from_poly(F, 0, 0, 0))
    with pytest.raises(Exception):
        invariant_battery(rep)


def test_inconsistent_system_is_an_error_type():
    assert issubclass(InconsistentSystem, Exception)
