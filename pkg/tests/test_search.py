import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from msls.gfield import field_for_q
from msls.search import (
    BudgetExceeded,
    CheckpointMismatch,
    ScanJob,
    act,
    orbit_representatives,
    run_job,
    shard_ranges,
)


@given(st.integers(0, 5000), st.integers(1, 64))
def test_shard_ranges_partition(n, k):
    r = shard_ranges(n, k)
    assert len(r) == k and r[0][0] == 0 and r[-1][1] == n
    assert all(a <= b for a, b in r)
    assert all(r[i][1] == r[i + 1][0] for i in range(k - 1))


def test_job_validation():
    with pytest.raises(ValueError):
        ScanJob("nope", 3)
    with pytest.raises(ValueError):
        ScanJob("c3c4", 3, families=("C5",))
    with pytest.raises(ValueError):
        ScanJob("census", 3, shards=0)
    assert "shards" not in ScanJob("census", 3, shards=4).descriptor()


@pytest.mark.parametrize("q", (2, 3, 4))
def test_orbit_weights_cover_all_pairs(q):
    F = field_for_q(q)
    reps, w = orbit_representatives(F)
    assert int(w.sum()) == F.size**2
    assert len(np.unique(reps)) == len(reps)


def test_group_action_preserves_class(rng):
    from msls.config import classify
    from msls.projgeom import gamma_from_poly

    F = field_for_q(3)
    for _ in range(15):
        t = tuple(int(x) for x in rng.integers(0, F.size, 3))
        k, j = int(rng.integers(0, F.theta)), int(rng.integers(0, 5))
        a = classify(F, gamma_from_poly(F, *t)).cls
        b = classify(F, gamma_from_poly(F, *act(F, t, k, j))).cls
        assert a == b


def test_census_q2():
    r = run_job(ScanJob("census", 2))
    s = r.summary["summary"]
    assert s["Pseudoregulus"] == 1 and s["total"] == 32**3
    assert s["NewCandidate"] == 0 and r.consistent


def test_census_q3_reduced_totals():
    r = run_job(ScanJob("census", 3, reduce=True))
    s = r.summary["summary"]
    assert s["total"] == 243**3 and s["Pseudoregulus"] == 243
    assert s["NewCandidate"] == 0 and r.header["validation"]


@pytest.mark.parametrize("campaign,q", [("census", 2), ("tconj", 4), ("c3c4", 2), ("formak", 3)])
def test_output_independent_of_shards(campaign, q):
    outs = {tuple(run_job(ScanJob(campaign, q, shards=k)).lines()) for k in (1, 4, 16)}
    assert len(outs) == 1


def test_resume_is_byte_identical(tmp_path):
    job = ScanJob("tconj", 4, shards=4)
    ref = run_job(job).lines()
    ck = str(tmp_path / "ck.json")
    stops = 0
    while True:
        try:
            out = run_job(job, checkpoint=ck, block=1, stop_after_blocks=1).lines()
            break
        except BudgetExceeded:
            stops += 1
    assert stops > 1 and out == ref
    assert json.load(open(ck))["completedShards"] == [0, 1, 2, 3]


def test_checkpoint_mismatch(tmp_path):
    ck = str(tmp_path / "ck.json")
    run_job(ScanJob("tconj", 3), checkpoint=ck)
    with pytest.raises(CheckpointMismatch):
        run_job(ScanJob("tconj", 4), checkpoint=ck)
    with pytest.raises(CheckpointMismatch):
        run_job(ScanJob("tconj", 3, shards=2), checkpoint=ck)


def test_tconj_q4_all_witnessed():
    s = run_job(ScanJob("tconj", 4, s_set=(1, 2, 3, 4))).summary["summary"]
    assert s["witnessed"] == s["verified"] == s["curveLift"] == s["cases"] > 0


def test_c3c4_q3_none_scattered():
    r = run_job(ScanJob("c3c4", 3))
    s = r.summary["summary"]
    assert s["C4.scattered"] == s["C3.F1.scattered"] == s["C3.residual.scattered"] == 0
    v = r.header["validation"]
    assert all(x.get("mismatches", 0) == 0 for x in v.values() if isinstance(x, dict))


def test_formak_q2_all_rank_deficient():
    s = run_job(ScanJob("formak", 2)).summary["summary"]
    assert s["rankLT5"] == s["tested"] == 31
