"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live; they
also appear in the captured output of ``pytest -v``.
"""

import os
import time

import pytest

from msls.config import canonical_rk5, classify, random_rk44_params, rk44_extract, synthetic_rk5, synthetic_rk44
from msls.curve import CurveQ, NoDeltaRoot, build_and_count, conic_case, sample_lifts, system_values
from msls.families import (
    FamilySpec,
    alpha_beta_predicates,
    family_scattered,
    gb_check,
    valid_pair,
)
from msls.gfield import field_for_q
from msls.projgeom import MOORE, gamma_from_poly
from msls.linpoly import LinearizedPoly, is_scattered, linear_set_of_poly, verify_poly_witness
from msls.search import BudgetExceeded, ScanJob, run_job

SLOW = os.environ.get("MSLS_SLOW") == "1"
TCONJ_QS = (3, 4, 5, 7, 8, 9, 11, 13, 16)
TCONJ_STRETCH = (17, 19, 23, 25, 27, 29, 31, 32)
_RUNS = {}


def emit(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def run(job, **kw):
    """Memoised run_job, so later criteria can compare against earlier outputs."""
    if kw:
        return run_job(job, **kw)
    if job not in _RUNS:
        _RUNS[job] = run_job(job)
    return _RUNS[job]


def census_jobs():
    return [
        ScanJob("census", 2),
        ScanJob("census", 3, battery=True),
        ScanJob("census", 4, reduce=True, shards=4),
        ScanJob("census", 5, reduce=True, shards=4),
    ]


def tconj_jobs(qs=TCONJ_QS):
    return [ScanJob("tconj", q, s_set=(1, 2, 3, 4)) for q in qs]


def c3c4_jobs():
    jobs = [ScanJob("c3c4", q) for q in (2, 3, 4, 5)]
    jobs += [ScanJob("c3c4", q, families=("C4",)) for q in (7, 8, 9)]
    return jobs


def test_criterion_1_scattered_oracles(capsys):
    t0 = time.time()
    bad = []
    for q in (2, 3, 4, 5, 7):
        F = field_for_q(q)
        for s in (1, 2, 3, 4):
            c = [0] * 5
            c[s] = 1
            f = LinearizedPoly(F, tuple(c))
            ls = linear_set_of_poly(f)
            if not (is_scattered(f).scattered and ls.is_scattered() and ls.size == (F.size - 1) // (q - 1)):
                bad.append(("pseudoregulus", q, s))
    lp = 0
    for q in (2, 3, 4, 5):
        F = field_for_q(q)
        for d in range(1, F.size):
            got = is_scattered(LinearizedPoly(F, (0, 1, 0, 0, d))).scattered
            lp += 1
            if got != (F.norm(d) != 1):
                bad.append(("lp", q, F.fmt(d)))
        # delta = 0 leaves x^q, which is scattered
        if not is_scattered(LinearizedPoly(F, (0, 1, 0, 0, 0))).scattered:
            bad.append(("lp", q, "0"))
    dt = time.time() - t0
    emit(
        capsys,
        1,
        not bad and dt < 120,
        f"20 monomials, {lp} nonzero delta (scattered iff N(delta) != 1), delta=0 gives x^q (scattered), "
        f"{len(bad)} mismatches, {dt:.0f}s",
    )


def test_criterion_2_gb_not_scattered(capsys):
    t0 = time.time()
    total = bad = 0
    for q in (2, 3, 4, 5, 7, 8, 9):
        F = field_for_q(q)
        for b in range(1, F.size):
            r = gb_check(F, b)
            total += 1
            f = LinearizedPoly(F, (0, 0, 1, 0, b))
            if r.scattered or not verify_poly_witness(f, *r.witness):
                bad += 1
    dt = time.time() - t0
    emit(capsys, 2, bad == 0 and dt < 600, f"{total} values of b, {bad} without a verified witness, {dt:.0f}s")


def test_criterion_3_census(capsys):
    parts, ok = [], True
    for job in census_jobs():
        t0 = time.time()
        r = run(job)
        s = r.summary["summary"]
        v = r.header["validation"]
        good = r.consistent and s["NewCandidate"] == 0
        if job.reduce:
            good = good and v["mismatches"] == 0 and job.shards >= 4
        ok &= good
        parts.append(
            f"q={job.q} {'reduced' if job.reduce else 'full'} newCandidate={s['NewCandidate']} "
            f"LP={s['LP_ConfigI']}/{s['LP_ConfigII']} pseudo={s['Pseudoregulus']} {time.time() - t0:.0f}s"
        )
    emit(capsys, 3, ok, "; ".join(parts))


def test_criterion_4_tconj(capsys):
    t0 = time.time()
    cases = bad = 0
    for job in tconj_jobs():
        s = run(job).summary["summary"]
        cases += s["cases"]
        bad += s["noSolution"] + (s["cases"] - s["verified"]) + (s["cases"] - s["curveLift"])
    dt = time.time() - t0
    emit(capsys, 4, bad == 0 and dt < 1800, f"q in {list(TCONJ_QS)}, s=1..4: {cases} pairs, {bad} failures, {dt:.0f}s")


@pytest.mark.slow
def test_criterion_4_tconj_stretch(capsys):
    cases = bad = 0
    for job in tconj_jobs(TCONJ_STRETCH):
        s = run_job(job).summary["summary"]
        cases += s["cases"]
        bad += s["noSolution"] + (s["cases"] - s["verified"])
    emit(capsys, "4-stretch", bad == 0, f"q in {list(TCONJ_STRETCH)}: {cases} pairs, {bad} failures")


def test_criterion_5_c3c4(capsys):
    t0 = time.time()
    parts, ok = [], True
    for job in c3c4_jobs():
        r = run(job)
        s = r.summary["summary"]
        sc = sum(v for k, v in s.items() if k.endswith("scattered"))
        val = r.header["validation"]
        mism = sum(x.get("mismatches", 0) for x in val.values())
        ok &= r.consistent and sc == 0 and mism == 0
        parts.append(f"q={job.q} {'+'.join(job.families)} scattered={sc}")
    dt = time.time() - t0
    emit(capsys, 5, ok and dt < 7200, "; ".join(parts) + f"; {dt:.0f}s")


def test_criterion_6_alpha_beta_criterion(capsys, rng):
    def disagree(F, a, b, s):
        p = alpha_beta_predicates(F, a, b, s)
        d = family_scattered(F, FamilySpec("AlphaBeta", (a, b), s)).scattered
        return p.scattered_by_criterion != d, d

    bad = n = sc = 0
    F = field_for_q(2)
    for a in range(F.size):
        for b in range(F.size):
            if a == 0 and b == 0:
                continue
            for s in (1, 2, 3, 4):
                x, d = disagree(F, a, b, s)
                bad += x
                sc += d
                n += 1
    detail = [f"q=2 exhaustive {n} ({sc} scattered)"]
    for q in (3, 4, 5):
        F = field_for_q(q)
        m = scq = 0
        while m < 1000:
            a, b = (int(x) for x in rng.integers(0, F.size, 2))
            if a == 0 and b == 0:
                continue
            x, d = disagree(F, a, b, int(rng.integers(1, 5)))
            bad += x
            scq += d
            m += 1
        # uniform draws are rarely scattered; add draws from scattered families
        extra = 0
        for _ in range(50):
            G, model, _ = synthetic_rk5(F, rng)
            r = canonical_rk5(classify(F, G, model, scattered=True))
            x, d = disagree(F, r.alpha, r.beta, r.s)
            bad += x
            extra += d
        detail.append(f"q={q} 1000 uniform ({scq} scattered) + 50 from LP planes ({extra} scattered)")
    emit(capsys, 6, bad == 0, f"{bad} disagreements; " + "; ".join(detail))


def test_criterion_7_identity_battery(capsys):
    r = run(ScanJob("census", 3, battery=True))
    s = r.summary["summary"]
    lp = s["LP_ConfigI"] + s["LP_ConfigII"]
    ok = s["batteryChecked"] == lp and s["batteryViolations"] == 0 and s["NewCandidate"] == 0
    emit(capsys, 7, ok, f"q=3: {s['batteryChecked']} non-pseudoregulus MSLS planes, {s['batteryViolations']} violations")


def test_criterion_8_canonical_forms(capsys, rng):
    ok, parts = True, []
    for q in (3, 4):
        F = field_for_q(q)
        got = {"mu1": 0, "general": 0}
        for _ in range(150):
            G, model, _ = synthetic_rk5(F, rng)
            r = canonical_rk5(classify(F, G, model, scattered=True))
            ok &= r.ok()
            got[r.branch] += 1
        # which branch occurs depends on q; the census representatives cover every LP plane
        cover = {"mu1": 0, "general": 0}
        for rec in run(ScanJob("census", q, reduce=True)).records:
            a = [F.parse(x) for x in rec["params"]["a"]]
            for s in (1, 2, 3, 4):
                rep = classify(F, gamma_from_poly(F, *a), MOORE.with_s(s), scattered=True)
                if rep.is_lp:
                    r = canonical_rk5(rep)
                    ok &= r.ok()
                    cover[r.branch] += 1
        ok &= all(got[k] >= 50 for k in got if cover[k])
        ok &= all(cover[k] == 0 for k in got if got[k] == 0)
        parts.append(
            f"rank5 q={q} synthetic " + ", ".join(f"{k}={v}" for k, v in got.items())
            + " census LP planes " + ", ".join(f"{k}={v}" for k, v in cover.items())
        )
    for q in (2, 3, 4):
        F = field_for_q(q)
        for lam_one in (True, False):
            good = 0
            for _ in range(50):
                w, lam = random_rk44_params(F, lam_one, rng)
                G, model = synthetic_rk44(F, w, lam, rng)
                r = rk44_extract(classify(F, G, model, strict=False, scattered=True))
                good += r.ok() and r.branch == ("C3" if lam_one else "C4")
            ok &= good == 50
            parts.append(f"rank4/4 q={q} {'lambda=1' if lam_one else 'N(lambda)=1'} {good}/50")
    emit(capsys, 8, ok, "; ".join(parts))


def test_criterion_9_curve_chain(capsys, rng):
    ok, parts = True, []
    for q in (3, 4, 5, 7):
        F = field_for_q(q)
        pairs = [(d, e) for d in F.fq_star for e in F.fq_star if valid_pair(F, d, e)]
        lifted = 0
        for d, e in pairs:
            lifts, _ = sample_lifts(F, d, e, 100, rng)
            ok &= len(lifts) == 100 and all(not any(system_values(F, d, e, pt)) for pt in lifts)
            lifted += len(lifts)
            ok &= (CurveQ.build(F, d, e).degree == 3) == (F.mul(d, e) == 1)
            build_and_count(F, d, e, 1)
        try:
            chains = conic_case(F)
            run_ = [c for c in chains if c.skipped is None]
            ok &= all(c.ok() for c in run_)
            conic = f"conic {len(run_)} verified, {len(chains) - len(run_)} invalid pair"
        except NoDeltaRoot:
            conic = "no conic root"
        parts.append(f"q={q} {len(pairs)} pairs, {lifted} lifts, {conic}")
    emit(capsys, 9, ok, "; ".join(parts))


def test_criterion_10_determinism(capsys, tmp_path):
    jobs = census_jobs() + tconj_jobs() + c3c4_jobs()
    if not SLOW:
        # the q=5 reruns at two more shard counts take several minutes
        jobs = [j for j in jobs if not (j.q == 5 and j.campaign in ("census", "c3c4"))]
    bad = []
    for job in jobs:
        ref = run(job).lines()
        for k in (1, 4, 16):
            if k == job.shards:
                continue
            if run_job(ScanJob(**{**job.__dict__, "shards": k})).lines() != ref:
                bad.append((job.campaign, job.q, k))
    resumed = 0
    for job in (ScanJob("census", 4, reduce=True, shards=4), ScanJob("tconj", 16, s_set=(1, 2, 3, 4), shards=4), ScanJob("c3c4", 4, shards=4)):
        ck = str(tmp_path / f"{job.campaign}.ck")
        stops = 0
        while True:
            try:
                out = run_job(job, checkpoint=ck, stop_after_blocks=3).lines()
                break
            except BudgetExceeded:
                stops += 1
        if stops == 0 or out != run(job).lines():
            bad.append((job.campaign, job.q, "resume"))
        resumed += stops
    scope = "all q" if SLOW else "q=5 census/c3c4 only at MSLS_SLOW=1"
    emit(capsys, 10, not bad, f"{len(jobs)} outputs x shards {{1,4,16}} ({scope}), {resumed} kill/resume cycles, mismatches {bad}")
