"""One test per acceptance criterion; each records a PASS/FAIL line shown in the terminal summary."""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from frame_checker import check_frame, interval_member
from orthoframe import cli, suites
from orthoframe.frame_finder import FinderConfig, find_orthogonal_frame

pytestmark = pytest.mark.acceptance

SEED = 20240
# the runs whose report files criterion 10 compares byte for byte
REPRO_RUNS = {
    4: ["verify", "--suite", "gt", "--seed", str(SEED)],
    6: ["verify", "--suite", "nonpositive", "--seed", str(SEED)],
    8: ["verify", "--suite", "frames", "--seed", str(SEED)],
}


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def report_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def cli_report(k, report_dir, tag="a"):
    path = Path(report_dir) / f"criterion{k}_{tag}.json"
    code = cli.main(REPRO_RUNS[k] + ["--output", str(path)])
    return code, json.loads(path.read_text()), path


def test_criterion_1_gegenbauer():
    res, secs = timed(suites.gegenbauer_suite)
    ok = res["passed"] and secs < 5
    record(1, ok, f"max rel disagreement {res['max_rel_disagreement']:.2e} (tol 1e-10), "
                  f"closed-form error {res['max_closed_form_error']:.2e} (tol 1e-12), {secs:.1f}s (< 5s)")
    assert ok


def test_criterion_2_zero_bound():
    res, secs = timed(suites.zero_bound_suite)
    ok = res["passed"] and secs < 5
    record(2, ok, f"{len(res['violations'])} violations over n in [2,500], even d in [6,40], {secs:.1f}s (< 5s)")
    assert ok


@pytest.mark.xfail(strict=True, reason="0.29289 +- 1e-6 excludes the exact 1 - 1/sqrt(2) = 0.2928932; see decisions ledger")
def test_criterion_3_densities():
    res, secs = timed(suites.density_suite)
    ok = res["passed"] and secs < 10
    record(3, ok, f"double cap n=3 {res['double_cap_n3']:.10f} vs 0.29289 +- 1e-6 "
                  f"(|diff| {abs(res['double_cap_n3'] - 0.29289):.2e}; exact 1-1/sqrt2 matched: {res['double_cap_n3_exact_ok']}), "
                  f"band n=1e4 {res['band_n10000']:.6f} vs 0.6827 +- 0.01 ({res['band_n10000_ok']}), {secs:.1f}s (< 10s)")
    assert ok


def test_criterion_4_gt(report_dir):
    (code, report, _), secs = timed(cli_report, 4, report_dir)
    rows = report["result"]["rows"]
    worst = max(abs(r["mc"]["mean"] - r["zonal"]) / (3 * r["mc"]["stderr"] + r["tail_bound"] + 1e-300) for r in rows)
    ok = code == 0 and len(rows) == 36 and secs < 120
    record(4, ok, f"{sum(r['passed'] for r in rows)}/{len(rows)} cells agree, worst |diff|/(3se+tail) {worst:.2f}, "
                  f"10^6 pairs per cell, {secs:.1f}s (< 120s)")
    assert ok


def test_criterion_5_hypercontractivity():
    res, secs = timed(suites.hypercontractivity_suite, SEED)
    ok = res["passed"] and res["count"] == 50 and secs < 60
    sphere = [r for r in res["rows"] if r["kind"] == "sphere"]
    worst_sphere = max(r["ratio"]["mean"] / r["limit"] for r in sphere)
    record(5, ok, f"max gaussian ||f||4/||f||2 {res['max_gaussian_ratio_q4']:.3f} (limit 3 inflated by 3 rel se), "
                  f"worst sphere ratio/bound {worst_sphere:.3f}, {secs:.1f}s (< 60s)")
    assert ok


def test_criterion_6_nonpositive(report_dir):
    (code, report, _), secs = timed(cli_report, 6, report_dir)
    res = report["result"]
    stress = [r for r in res["rows"] if r["kind"] == "stress+"]
    oracle_gap = max(abs(r["estimate"]["mean"] - r["oracle"]) / r["estimate"]["stderr"] for r in stress)
    ok = code == 0 and res["count"] == 200 and res["minimum"] >= 1 / 405 and secs < 120
    record(6, ok, f"min mu(f<=0) over {res['count']} quadratics {res['minimum']:.4f} >= 1/405 = {1 / 405:.5f}; "
                  f"rank-1 stress vs Beta integral worst {oracle_gap:.2f} se, {secs:.1f}s (< 120s)")
    assert ok


def test_criterion_7_level_d():
    res, secs = timed(suites.level_d_suite)
    ok = res["passed"] and secs < 60
    # at d = 0 the bound is alpha^2, equal to the measurement
    slack = min(r["bound"] / r["measured"] for r in res["rows"] if r["measured"] > 0 and r["d"] > 0)
    record(7, ok, f"{res['checked']} admissible checks, {len(res['failures'])} failures, "
                  f"min bound/measured over d >= 1 {slack:.3g}, {secs:.1f}s (< 60s)")
    assert ok


def test_criterion_8_frames(report_dir):
    t0 = time.perf_counter()
    code, report, _ = cli_report(8, report_dir)
    # every frame is also rechecked by the stand-alone verifier
    independent_ok, count = True, 0
    for name, n in suites.FRAME_CASES:
        for sym in (True, False):
            oracle = suites.frame_oracle(name, n).with_symmetrize(sym)
            prof, axis = oracle.zonal
            member = interval_member(prof.breakpoints, axis)
            for r in range(10):
                res = find_orthogonal_frame(oracle, FinderConfig(seed=SEED + r))
                if res.success:
                    count += 1
                    independent_ok &= check_frame(res.frame.vectors, member, n)[0]
    secs = time.perf_counter() - t0
    rows = report["result"]["rows"]
    rates = ", ".join(f"{r['set']}/{r['n']}{'/sym' if r['symmetrize'] else ''} {r['successes']}/{r['runs']}" for r in rows)
    ok = code == 0 and independent_ok and secs < 300
    record(8, ok, f"success {rates}; {count} frames pass the independent verifier: {independent_ok}, {secs:.1f}s (< 300s)")
    assert ok


def test_criterion_9_slicing():
    res, secs = timed(suites.slicing_suite, SEED)
    ok = res["passed"] and secs < 60
    worst = max(abs(r["slice_times_mu"] - r["g0_zonal"]) / (3 * r["stderr"] + r["tail_bound"]) for r in res["rows"])
    record(9, ok, f"{sum(r['passed'] for r in res['rows'])}/{len(res['rows'])} fixtures match G_0, "
                  f"worst |diff|/(3se+tail) {worst:.2f}, {secs:.1f}s (< 60s)")
    assert ok


def test_criterion_10_determinism(report_dir):
    same = {}
    for k in REPRO_RUNS:
        first = Path(report_dir) / f"criterion{k}_a.json"
        if not first.exists():
            cli_report(k, report_dir, "a")
        _, _, second = cli_report(k, report_dir, "b")
        same[k] = first.read_bytes() == second.read_bytes()
    # threaded estimation must not change the numbers either
    oracle = suites.frame_oracle("cap_complement", 12)
    a = find_orthogonal_frame(oracle, FinderConfig(seed=SEED))
    b = find_orthogonal_frame(oracle, FinderConfig(seed=SEED, workers=2))
    threads_ok = np.array_equal(a.frame.vectors, b.frame.vectors)
    ok = all(same.values()) and threads_ok
    record(10, ok, "bit-identical reruns: " + ", ".join(f"criterion {k} {v}" for k, v in same.items())
                   + f"; 1 vs 2 workers identical: {threads_ok}")
    assert ok
