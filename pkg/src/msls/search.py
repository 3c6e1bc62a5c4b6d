"""Exhaustive campaigns: plane census, (delta, eps) witness table, C3/C4 sweep and the FormaK scan.

A campaign splits its parameter space into an ordered list of units. Shards are
contiguous unit ranges; results are merged in unit order, so the output does not
depend on the shard count. Checkpoints are rewritten atomically after every block.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import isqrt

import numpy as np

from .config import LP_CLASSES, classify, identity_battery
from .curve import Degenerate, lift_and_verify, orbit_quintuple
from .families import (
    FamilySpec,
    alpha_beta_predicates,
    c3_transform_to_f1,
    construct,
    family_scattered,
    formak_alpha_beta,
    pair_of,
    sctness_solve,
    valid_pair,
    verify_sctness_witness,
)
from .gfield import FieldCtx, field_construct, parse_q
from .linpoly import LinearizedPoly, apply_projectivity, is_scattered, rows_distinct
from .projgeom import MOORE, gamma_from_pair, gamma_from_poly

SCHEMA = 1
CAMPAIGNS = ("census", "tconj", "c3c4", "formak")
CENSUS_KEYS = ("NonScattered", "Pseudoregulus", "LP_ConfigI", "LP_ConfigII", "NewCandidate")


class BudgetExceeded(RuntimeError):
    pass


class ReductionFailed(RuntimeError):
    pass


class CheckpointMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ScanJob:
    campaign: str
    q: int
    s_set: tuple = (1,)
    reduce: bool = False
    shards: int = 1
    seed: int = 0
    battery: bool = False
    validate_samples: int = 1000
    families: tuple = ("C3", "C4")

    def __post_init__(self):
        if self.campaign not in CAMPAIGNS:
            raise ValueError(f"unknown campaign {self.campaign!r}")
        if not set(self.families) <= {"C3", "C4"}:
            raise ValueError("families must be among C3, C4")
        if self.shards < 1:
            raise ValueError("shards must be positive")

    def descriptor(self) -> dict:
        """Everything that determines the output (the shard count does not)."""
        d = asdict(self)
        d.pop("shards")
        d["s_set"] = list(self.s_set)
        d["families"] = list(self.families)
        return d

    def field(self) -> FieldCtx:
        p, h = parse_q(str(self.q))
        return field_construct(p, h)


def shard_ranges(n_units: int, shards: int) -> list[tuple[int, int]]:
    """Contiguous ranges partitioning range(n_units) into `shards` parts."""
    return [(k * n_units // shards, (k + 1) * n_units // shards) for k in range(shards)]


@dataclass
class ScanRecord:
    campaign: str
    params: dict
    verdict: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"campaign": self.campaign, "params": self.params, "verdict": self.verdict, **self.detail}


# ---------------------------------------------------------------------------
# plane census


class CensusCampaign:
    """All f = x^q + a2 x^{q^2} + a3 x^{q^3} + a4 x^{q^4}; scattered ones are classified."""

    name = "census"

    def __init__(self, F: FieldCtx, job: ScanJob):
        self.F, self.job = F, job
        M, th = F.order, F.theta
        js = np.arange(th, dtype=np.int64)
        self.T = [(js * ((F.qpow[i] - 1) % M)) % M + 1 for i in range(5)]
        self.a2s = np.arange(F.size, dtype=np.int64)
        self.pre = min(th, 3 * isqrt(F.size) + 8)
        if job.reduce:
            self.reps, self.weights = orbit_representatives(F)
        else:
            self.reps, self.weights = None, None

    # pair (a3, a4) units when reduced, a3 slices otherwise
    def n_units(self) -> int:
        return len(self.reps) if self.job.reduce else self.F.size

    def fiber(self, a3: int, a4: int) -> np.ndarray:
        """a2 values for which x^q + a2 x^{q^2} + a3 x^{q^3} + a4 x^{q^4} is scattered."""
        F, T = self.F, self.T
        base = F.v_add(F.v_add(T[1], F.v_mul(T[3], a3)), F.v_mul(T[4], a4))
        k = self.pre
        v = F.v_add(base[None, :k], F.v_mul(self.a2s[:, None], T[2][None, :k]))
        idx = np.flatnonzero(rows_distinct(v))
        if len(idx) and k < len(base):
            v = F.v_add(base[None, :], F.v_mul(idx[:, None], T[2][None, :]))
            idx = idx[rows_distinct(v)]
        return idx

    def verdict(self, a2: int, a3: int, a4: int) -> str:
        F = self.F
        if not is_scattered(LinearizedPoly(F, (0, 1, a2, a3, a4))):
            return "NonScattered"
        return classify(F, gamma_from_poly(F, a2, a3, a4), MOORE, scattered=True).cls

    def _pair(self, a3, a4, weight, counts, records):
        F = self.F
        hits = self.fiber(a3, a4)
        counts["NonScattered"] += weight * (F.size - len(hits))
        for a2 in hits.tolist():
            rep = classify(F, gamma_from_poly(F, a2, a3, a4), MOORE, scattered=True)
            counts[rep.cls] += weight
            detail = {"weight": weight} if self.job.reduce else {}
            if self.job.battery and rep.cls not in ("Pseudoregulus",):
                bad = [n for n, ok in identity_battery(rep) if not ok]
                counts["batteryChecked"] += 1
                counts["batteryViolations"] += len(bad) > 0
                if bad:
                    detail["batteryFailures"] = bad
            records.append(
                ScanRecord("census", {"a": [F.fmt(a2), F.fmt(a3), F.fmt(a4)]}, rep.cls, detail).to_json()
            )

    def run_unit(self, i: int):
        counts, records = Counter(), []
        if self.job.reduce:
            c = int(self.reps[i])
            self._pair(c // self.F.size, c % self.F.size, int(self.weights[i]), counts, records)
        else:
            for a4 in range(self.F.size):
                self._pair(i, a4, 1, counts, records)
        return counts, records

    def validate(self, rng) -> dict:
        """Check that the group used for the reduction preserves verdicts."""
        if not self.job.reduce:
            return {}
        F = self.F
        n = self.job.validate_samples
        trip = rng.integers(0, F.size, size=(n, 3))
        samples = [tuple(int(x) for x in t) for t in trip]
        # random triples are almost never scattered; add scattered ones from random fibers
        want = max(50, n // 5)
        tries = 0
        extra = []
        while len(extra) < want and tries < 400:
            a3, a4 = (int(x) for x in rng.integers(0, F.size, size=2))
            for a2 in self.fiber(a3, a4)[:4].tolist():
                extra.append((a2, a3, a4))
            tries += 1
        samples += extra[:want]
        bad = 0
        for t in samples:
            k = int(rng.integers(0, F.theta))
            j = int(rng.integers(0, 5 * F.h))
            u = act(F, t, k, j)
            if self.verdict(*t) != self.verdict(*u):
                bad += 1
        out = {"samples": len(samples), "scatteredSamples": len(extra[:want]), "mismatches": bad}
        if bad:
            raise ReductionFailed(f"orbit reduction changed {bad} verdicts")
        return out

    def summarize(self, counts: Counter) -> tuple[dict, bool]:
        F = self.F
        total = F.size**3
        c = {k: int(counts.get(k, 0)) for k in CENSUS_KEYS}
        c["total"] = total
        if self.job.battery:
            c["batteryChecked"] = int(counts.get("batteryChecked", 0))
            c["batteryViolations"] = int(counts.get("batteryViolations", 0))
        if self.job.reduce:
            c["representatives"] = len(self.reps)
        consistent = sum(c[k] for k in CENSUS_KEYS) == total and c["NewCandidate"] == 0
        if self.job.battery:
            consistent = consistent and c["batteryViolations"] == 0
        return c, consistent


def _exps(F: FieldCtx):
    q = F.q
    return (q, q * q + q, q**3 + q * q + q)


def act(F: FieldCtx, triple, k: int, j: int):
    """(a2, a3, a4) -> Frobenius^j of (a2 t^q, a3 t^{q^2+q}, a4 t^{q^3+q^2+q}), t = g^{(q-1)k}."""
    M = F.order
    pj = pow(F.p, j, M)
    out = []
    for a, e in zip(triple, _exps(F)):
        out.append(0 if a == 0 else ((a - 1 + (F.q - 1) * k * e) * pj) % M + 1)
    return tuple(out)


def orbit_representatives(F: FieldCtx) -> tuple[np.ndarray, np.ndarray]:
    """Least pair index (a3 * size + a4) of each orbit on (a3, a4), and the orbit sizes."""
    M, size = F.order, F.size
    _, e3, e4 = _exps(F)
    ks = np.arange(F.theta, dtype=np.int64)
    pjs = np.array([pow(F.p, j, M) for j in range(5 * F.h)], dtype=np.int64)

    def images(c, e):
        if c == 0:
            return np.zeros(len(ks) * len(pjs), dtype=np.int64)
        lg = (c - 1 + (F.q - 1) * e % M * ks) % M
        return ((lg[None, :] * pjs[:, None]) % M + 1).ravel()

    visited = np.zeros(size * size, dtype=bool)
    reps, weights = [], []
    ptr, chunk = 0, 1 << 16
    while ptr < size * size:
        block = visited[ptr : ptr + chunk]
        free = np.flatnonzero(~block)
        if len(free) == 0:
            ptr += chunk
            continue
        i = ptr + int(free[0])
        a3, a4 = divmod(i, size)
        orb = np.unique(images(a3, e3) * size + images(a4, e4))
        visited[orb] = True
        reps.append(i)
        weights.append(len(orb))
        ptr = i
    return np.array(reps, dtype=np.int64), np.array(weights, dtype=np.int64)


# ---------------------------------------------------------------------------
# (delta, eps) witness table


class TconjCampaign:
    name = "tconj"

    def __init__(self, F: FieldCtx, job: ScanJob):
        self.F, self.job = F, job
        pairs = [(d, e) for d in F.fq_star for e in F.fq_star if valid_pair(F, d, e)]
        self.units = [(s, d, e) for s in job.s_set for d, e in pairs]

    def n_units(self) -> int:
        return len(self.units)

    def run_unit(self, i: int):
        F = self.F
        s, d, e = self.units[i]
        r = sctness_solve(F, d, e, s)
        params = {"delta": F.fmt(d), "eps": F.fmt(e), "s": s}
        counts = Counter()
        if r.witness is None:
            counts["noSolution"] += 1
            return counts, [ScanRecord("tconj", params, "NoSolution").to_json()]
        x = r.witness
        ok = verify_sctness_witness(F, d, e, s, x)
        try:
            lifted = lift_and_verify(F, d, e, x, F.frob(x, s)) == orbit_quintuple(F, x, s)
        except Degenerate:
            lifted = False
        counts["witnessed"] += 1
        counts["verified"] += ok
        counts["curveLift"] += lifted
        detail = {"witness": F.fmt(x), "solutions": r.solutions, "verified": ok, "curveLift": lifted}
        return counts, [ScanRecord("tconj", params, "Witness", detail).to_json()]

    def validate(self, rng) -> dict:
        return {}

    def summarize(self, counts: Counter) -> tuple[dict, bool]:
        c = {k: int(counts.get(k, 0)) for k in ("witnessed", "verified", "curveLift", "noSolution")}
        c["cases"] = len(self.units)
        return c, c["noSolution"] == 0 and c["verified"] == c["witnessed"]


# ---------------------------------------------------------------------------
# C3 / C4 sweep


def _fq_cosets(F: FieldCtx, xs: np.ndarray) -> np.ndarray:
    """Members of xs that are least in their F_q^*-coset (codes differ by multiples of theta)."""
    xs = xs[xs != 0]
    return xs[(xs - 1) < F.theta]


class C3C4Campaign:
    name = "c3c4"

    def __init__(self, F: FieldCtx, job: ScanJob):
        self.F, self.job = F, job
        allx = np.arange(F.size, dtype=np.int64)
        tr = allx.copy()
        for i in range(1, 5):
            tr = F.v_add(tr, F.v_frob(allx, i))
        self.tr = tr
        norm1 = allx[1:][F.v_norm(allx[1:]) == 1]
        # Frobenius orbits k -> k^q on the norm-one elements
        seen, c4 = set(), []
        for k in norm1.tolist():
            if k in seen:
                continue
            orb = {F.frob(k, i) for i in range(5)}
            seen |= orb
            c4.append((k, len(orb)))
        self.c4 = c4
        tr0 = allx[1:][tr[1:] == 0]
        itr = tr[F.v_inv(tr0)]
        self.f1 = tr0[itr != 0].tolist()
        self.resid = _fq_cosets(F, tr0[itr == 0]).tolist()
        self.rhos = allx[tr != 0].tolist()
        self.units = []
        if "C4" in job.families:
            self.units += [("C4", u) for u in c4]
        if "C3" in job.families:
            self.units += [("F1", e) for e in self.f1] + [("C3res", e) for e in self.resid]

    def n_units(self) -> int:
        return len(self.units)

    def run_unit(self, i: int):
        F = self.F
        kind, u = self.units[i]
        counts, records = Counter(), []
        if kind == "C4":
            k, w = u
            counts["C4.tested"] += w
            if family_scattered(F, FamilySpec("C4", (k,))):
                counts["C4.scattered"] += w
                records.append(ScanRecord("c3c4", {"family": "C4", "k": F.fmt(k)}, "Scattered").to_json())
        elif kind == "F1":
            counts["C3.F1.tested"] += 1
            if family_scattered(F, FamilySpec("F1", (u,))):
                counts["C3.F1.scattered"] += 1
                records.append(ScanRecord("c3c4", {"family": "F1", "eta": F.fmt(u)}, "Scattered").to_json())
        else:
            for rho in self.rhos:
                counts["C3.residual.tested"] += F.q - 1
                if family_scattered(F, FamilySpec("C3", (u, rho))):
                    counts["C3.residual.scattered"] += F.q - 1
                    params = {"family": "C3", "eta": F.fmt(u), "rho": F.fmt(rho)}
                    records.append(ScanRecord("c3c4", params, "Scattered").to_json())
        return counts, records

    def validate(self, rng) -> dict:
        F = self.F
        n = min(100, self.job.validate_samples)
        out = {}
        norm1 = [k for k, _ in self.c4]
        bad = 0
        for _ in range(n if "C4" in self.job.families else 0):
            k = norm1[int(rng.integers(0, len(norm1)))]
            k = F.frob(k, int(rng.integers(0, 5)))
            a = family_scattered(F, FamilySpec("C4", (k,))).scattered
            b = family_scattered(F, FamilySpec("C4", (F.frob(k, 1),))).scattered
            bad += a != b
        out["c4Frobenius"] = {"samples": n, "mismatches": bad}
        if "C3" not in self.job.families:
            return out
        tr0 = self.f1 + [int(x) for x in _all_tr0_inv0(F, self.tr)]
        bad = 0
        for _ in range(n):
            eta = tr0[int(rng.integers(0, len(tr0)))]
            rho = self.rhos[int(rng.integers(0, len(self.rhos)))]
            c = F.fq_star[int(rng.integers(0, F.q - 1))]
            a = family_scattered(F, FamilySpec("C3", (eta, rho))).scattered
            b = family_scattered(F, FamilySpec("C3", (F.mul(c, eta), F.mul(c, rho)))).scattered
            bad += a != b
        out["c3Scaling"] = {"samples": n, "mismatches": bad}
        bad, m = 0, min(20, len(self.f1))
        for j in range(m):
            eta = self.f1[int(rng.integers(0, len(self.f1)))]
            rho = self.rhos[int(rng.integers(0, len(self.rhos)))]
            E = construct(F, FamilySpec("C3", (eta, rho)))
            E1 = construct(F, FamilySpec("C3", (eta, F.inv(eta))))
            L = construct(F, FamilySpec("F1", (eta,)))
            same_rho = E.points == E1.points
            mapped = apply_projectivity(E1, c3_transform_to_f1(F, eta)).points == L.points
            bad += not (same_rho and mapped)
        out["c3ToF1"] = {"samples": m, "mismatches": bad}
        if any(v["mismatches"] for v in out.values()):
            raise ReductionFailed(f"C3/C4 reduction check failed: {out}")
        return out

    def summarize(self, counts: Counter) -> tuple[dict, bool]:
        keys = [
            "C4.tested",
            "C4.scattered",
            "C3.F1.tested",
            "C3.F1.scattered",
            "C3.residual.tested",
            "C3.residual.scattered",
        ]
        c = {k: int(counts.get(k, 0)) for k in keys if k.split(".")[0] in self.job.families}
        return c, sum(v for k, v in c.items() if k.endswith("scattered")) == 0


def _all_tr0_inv0(F: FieldCtx, tr: np.ndarray) -> np.ndarray:
    allx = np.arange(1, F.size, dtype=np.int64)
    t0 = allx[tr[1:] == 0]
    return t0[tr[F.v_inv(t0)] == 0]


# ---------------------------------------------------------------------------
# FormaK scan


class FormaKCampaign:
    name = "formak"

    def __init__(self, F: FieldCtx, job: ScanJob):
        self.F, self.job = F, job
        self.units = [(s, k) for s in job.s_set for k in range(1, F.size)]

    def n_units(self) -> int:
        return len(self.units)

    def run_unit(self, i: int):
        F = self.F
        s, k = self.units[i]
        counts, records = Counter(), []
        for d in F.fq_star:
            al, be = formak_alpha_beta(F, k, d, s)
            pr = alpha_beta_predicates(F, al, be, s)
            counts["tested"] += 1
            eps = F.norm(k)
            if F.mul(F.mul(d, d), eps) == 1:
                counts["boundary"] += 1
            if pr.rank_lt5:
                counts["rankLT5"] += 1
                continue
            if not pr.scattered_by_criterion:
                counts["notScattered"] += 1
                continue
            g, h = pair_of(F, FamilySpec("FormaK", (k, d), s))
            rep = classify(F, gamma_from_pair(F, g, h), MOORE, strict=False, scattered=True)
            cls = "LP" if rep.cls in LP_CLASSES else rep.cls
            counts[cls] += 1
            if cls not in ("Pseudoregulus", "LP"):
                params = {"k": F.fmt(k), "delta": F.fmt(d), "s": s}
                vp = valid_pair(F, d, eps)
                detail = {"validPair": vp, "sctnessSolved": vp and sctness_solve(F, d, eps, s).found}
                records.append(ScanRecord("formak", params, rep.cls, detail).to_json())
        return counts, records

    def validate(self, rng) -> dict:
        return {}

    def summarize(self, counts: Counter) -> tuple[dict, bool]:
        keys = ("tested", "boundary", "rankLT5", "notScattered", "Pseudoregulus", "LP")
        c = {k: int(counts.get(k, 0)) for k in keys}
        other = {k: int(v) for k, v in counts.items() if k not in keys}
        c["other"] = other
        return c, not other


_CAMPAIGN_TYPES = {
    "census": CensusCampaign,
    "tconj": TconjCampaign,
    "c3c4": C3C4Campaign,
    "formak": FormaKCampaign,
}


def make_campaign(job: ScanJob, F: FieldCtx | None = None):
    return _CAMPAIGN_TYPES[job.campaign](F or job.field(), job)


# ---------------------------------------------------------------------------
# driver


@dataclass
class ScanResult:
    job: ScanJob
    header: dict
    records: list
    summary: dict
    consistent: bool

    def lines(self) -> list[str]:
        out = [self.header] + self.records + [self.summary]
        return [json.dumps(x, sort_keys=True, separators=(",", ":")) for x in out]

    def write(self, path: str | None):
        text = "\n".join(self.lines()) + "\n"
        if path is None:
            print(text, end="")
            return
        _atomic_write(path, text)


def _atomic_write(path: str, text: str):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _blocks(ranges, block: int):
    for k, (lo, hi) in enumerate(ranges):
        for a in range(lo, hi, block):
            yield k, a, min(hi, a + block)


_WORKER = {}


def _worker_init(job: ScanJob):
    _WORKER["c"] = make_campaign(job)


def _run_block(args):
    a, b = args
    camp = _WORKER["c"]
    counts, records = Counter(), []
    for i in range(a, b):
        c, r = camp.run_unit(i)
        counts.update(c)
        records.extend(r)
    return counts, records


class _Stop(Exception):
    pass


def run_job(
    job: ScanJob,
    checkpoint: str | None = None,
    workers: int = 1,
    block: int | None = None,
    stop_after_blocks: int | None = None,
    campaign=None,
) -> ScanResult:
    """Run a campaign, resuming from `checkpoint` when it exists.

    `stop_after_blocks` aborts (raising BudgetExceeded) after that many new blocks,
    leaving a valid checkpoint behind.
    """
    camp = campaign or make_campaign(job)
    F = camp.F
    rng = np.random.default_rng(job.seed)
    desc = job.descriptor()
    n = camp.n_units()
    ranges = shard_ranges(n, job.shards)
    block = block or max(1, min(64, n // (8 * job.shards) or 1))

    state = {"jobDescriptor": desc, "shards": job.shards, "block": block, "completedShards": [], "progress": {}}
    if checkpoint and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            old = json.load(fh)
        if old["jobDescriptor"] != desc or old["shards"] != job.shards:
            raise CheckpointMismatch("checkpoint belongs to a different job")
        state = old
        block = state["block"]
    if "validation" not in state:
        state["validation"] = camp.validate(rng)

    def done_upto(k):
        return state["progress"].get(str(k), {}).get("next", ranges[k][0])

    def save():
        if checkpoint:
            _atomic_write(checkpoint, json.dumps(state, sort_keys=True))

    todo = [(k, a, b) for k, a, b in _blocks(ranges, block) if a >= done_upto(k)]

    def merge(k, a, b, counts, records):
        pr = state["progress"].setdefault(str(k), {"next": ranges[k][0], "counts": {}, "records": []})
        assert pr["next"] == a
        c = Counter(pr["counts"])
        c.update(counts)
        pr["counts"] = dict(c)
        pr["records"].extend(records)
        pr["next"] = b
        if b == ranges[k][1] and k not in state["completedShards"]:
            state["completedShards"].append(k)
            state["completedShards"].sort()
        save()

    for k, (lo, hi) in enumerate(ranges):
        if lo == hi and k not in state["completedShards"]:
            state["completedShards"].append(k)
    state["completedShards"].sort()

    done = 0
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init, initargs=(job,)) as ex:
            for (k, a, b), (counts, records) in zip(todo, ex.map(_run_block, [(a, b) for _, a, b in todo])):
                merge(k, a, b, counts, records)
                done += 1
                if stop_after_blocks is not None and done >= stop_after_blocks:
                    ex.shutdown(cancel_futures=True)
                    raise BudgetExceeded("stopped after the requested number of blocks")
    else:
        _WORKER["c"] = camp
        for k, a, b in todo:
            merge(k, a, b, *_run_block((a, b)))
            done += 1
            if stop_after_blocks is not None and done >= stop_after_blocks and done < len(todo):
                raise BudgetExceeded("stopped after the requested number of blocks")

    counts, records = Counter(), []
    for k in range(job.shards):
        pr = state["progress"].get(str(k))
        if pr is None:
            continue
        counts.update(pr["counts"])
        records.extend(pr["records"])
    summary, consistent = camp.summarize(counts)
    header = {"schema": SCHEMA, "field": F.descriptor(), "job": desc, "units": n, "validation": state["validation"]}
    tail = {"summary": summary, "consistent": consistent}
    return ScanResult(job, header, records, tail, consistent)
