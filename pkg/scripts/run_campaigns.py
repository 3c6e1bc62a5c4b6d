"""Run the search campaigns and write one JSON-lines file per job.

Each job keeps a checkpoint next to its output, so an interrupted run picks up
where it stopped when started again with the same arguments.

    python scripts/run_campaigns.py --out runs                 # required tier
    python scripts/run_campaigns.py --out runs --tier stretch  # larger q
"""

import argparse
import logging
import os
import time

from msls.search import ScanJob, run_job

log = logging.getLogger("campaigns")

ALL_S = (1, 2, 3, 4)


def required_jobs(shards):
    jobs = [ScanJob("census", 2), ScanJob("census", 3)]
    jobs += [ScanJob("census", q, reduce=True, shards=max(4, shards)) for q in (4, 5)]
    jobs += [ScanJob("tconj", q, s_set=ALL_S, shards=shards) for q in (3, 4, 5, 7, 8, 9, 11, 13, 16)]
    jobs += [ScanJob("c3c4", q, shards=shards) for q in (2, 3, 4, 5)]
    jobs += [ScanJob("c3c4", q, families=("C4",), shards=shards) for q in (7, 8, 9)]
    jobs += [ScanJob("formak", q, s_set=ALL_S, shards=shards) for q in (2, 3, 4, 5)]
    return jobs


def stretch_jobs(shards):
    jobs = [ScanJob("tconj", q, s_set=ALL_S, shards=shards) for q in (17, 19, 23, 25, 27, 29, 31, 32)]
    jobs += [ScanJob("c3c4", q, families=("C4",), shards=shards) for q in (11, 13, 16, 17, 19, 23, 25)]
    jobs += [ScanJob("c3c4", q, families=("C3",), shards=shards) for q in (7, 8, 9)]
    return jobs


def job_name(job):
    fam = "-" + "".join(job.families) if job.campaign == "c3c4" else ""
    red = "-reduced" if job.reduce else ""
    return f"{job.campaign}{fam}-q{job.q}{red}"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--tier", choices=("required", "stretch"), default="required")
    ap.add_argument("--shards", type=int, default=4)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--only", help="comma separated campaign names to run")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    os.makedirs(args.out, exist_ok=True)
    jobs = required_jobs(args.shards) if args.tier == "required" else stretch_jobs(args.shards)
    if args.only:
        keep = set(args.only.split(","))
        jobs = [j for j in jobs if j.campaign in keep]
    failed = 0
    for job in jobs:
        name = job_name(job)
        path = os.path.join(args.out, name + ".jsonl")
        if os.path.exists(path):
            log.info("%s: already done", name)
            continue
        t0 = time.time()
        res = run_job(job, checkpoint=path + ".ckpt", workers=min(args.workers, job.shards))
        res.write(path)
        os.remove(path + ".ckpt")
        failed += not res.consistent
        log.info("%s: %s in %.0fs %s", name, "ok" if res.consistent else "INCONSISTENT", time.time() - t0, res.summary["summary"])
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
