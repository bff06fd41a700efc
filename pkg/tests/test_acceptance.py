"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import gc
import math
import random
import statistics
import time

import pytest

from bangbang.arc import ArcInput, CaseKind, DragParams, acceleration, build_arc, space, velocity
from bangbang.inverse import time_at_space, velocity_at_space
from bangbang.kernels import q_direct, q_polynomial
from bangbang.ocp import (
    BangBangProblem,
    Verdict,
    feasibility,
    solve,
    switching_function,
    terminal_state,
    time_domain_residuals,
)
from bangbang.oracle import OracleSettings, integrate_arc_many, locate_space_event
from conftest import ACCEPTANCE_LINES
from grids import BASE_PROBLEM, SWEEPS, arc_grid, ocp_grid, sample_times, sweep_problems
from naive_riccati import naive_state

ORACLE = OracleSettings(1e-12, 1e-12)


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def targets(arc, rng, n=20):
    d = arc.domain
    lo = d.s_min if math.isfinite(d.s_min) else -200.0
    hi = d.s_max if math.isfinite(d.s_max) else 500.0
    out = []
    while len(out) < n:
        z = rng.uniform(lo, hi)
        if lo < z <= hi:
            out.append(z)
    return out


def test_criterion_1_arc_against_oracle():
    start = time.perf_counter()
    inputs = arc_grid()
    cases = set()
    worst = 0.0
    failures = []
    for inp in inputs:
        arc = build_arc(inp)
        cases.add(arc.case)
        times = sample_times(arc)
        ref = integrate_arc_many(inp, times, ORACLE)
        for t, (v_rk, s_rk) in zip(times, ref):
            ev = abs(velocity(arc, t) - v_rk) / (1 + abs(v_rk))
            es = abs(space(arc, t) - s_rk) / (1 + abs(s_rk))
            worst = max(worst, ev, es)
            if ev > 1e-8 or es > 1e-8:
                failures.append((inp, t, ev, es))
    elapsed = time.perf_counter() - start
    ok = not failures and len(inputs) >= 200 and len(cases) == 5 and elapsed <= 60.0
    record(1, ok, f"{len(inputs)} sets x 20 times, {len(cases)} cases, worst scaled error {worst:.1e}, {elapsed:.1f} s")
    assert not failures, failures[:5]
    assert len(inputs) >= 200 and len(cases) == 5
    assert elapsed <= 60.0


# braking arcs with radicand c0**2 - 4|a|c1 of 0, +1e-20, -1e-20, and no drag
SINGULAR = [
    ArcInput(-1.0, 6.0, DragParams(1.0, 0.25)),
    ArcInput(-1.0, 0.5, DragParams(1.0, 0.25)),
    ArcInput(-1.0, 6.0, DragParams(2e-10, 0.75e-20)),
    ArcInput(-1.0, 6.0, DragParams(1e-10, 0.5e-20)),
    ArcInput(-2.0, 6.0, DragParams(0.0, 0.0)),
    ArcInput(2.0, 6.0, DragParams(0.0, 0.0)),
    ArcInput(0.0, 6.0, DragParams(0.0, 0.0)),
]


def test_criterion_2_singular_parameters():
    radicands = sorted({build_arc(inp).constants.radicand for inp in SINGULAR[:4]})
    assert radicands[0] == pytest.approx(-1e-20, rel=1e-12) and radicands[-1] == pytest.approx(1e-20, rel=1e-12)
    assert 0.0 in radicands
    worst = 0.0
    naive_broken = 0
    for inp in SINGULAR:
        arc = build_arc(inp)
        times = sample_times(arc, 10)
        for t, (v_rk, s_rk) in zip(times, integrate_arc_many(inp, times, ORACLE)):
            v, s = velocity(arc, t), space(arc, t)
            assert math.isfinite(v) and math.isfinite(s)
            worst = max(worst, abs(v - v_rk) / (1 + abs(v_rk)), abs(s - s_rk) / (1 + abs(s_rk)))
            try:
                vn, sn = naive_state(inp.a, inp.v0, inp.drag.c0, inp.drag.c1, t)
                bad = not (math.isfinite(vn) and math.isfinite(sn)) or max(abs(vn - v_rk), abs(sn - s_rk)) > 1e-3
            except (ZeroDivisionError, ValueError, OverflowError):
                bad = True
            naive_broken += bad
        d = arc.domain
        hi = d.s_max if math.isfinite(d.s_max) else 50.0
        for z in (0.25 * hi, 0.5 * hi, 0.9 * hi):
            t = time_at_space(arc, z).t
            assert math.isfinite(t)
            t_rk = locate_space_event(inp, z, ORACLE)
            worst = max(worst, abs(t - t_rk) / (1 + abs(t_rk)))
    ok = worst <= 1e-8 and naive_broken > 0
    record(2, ok, f"{len(SINGULAR)} singular arcs, worst scaled error {worst:.1e}, naive formulas broken at {naive_broken} points")
    assert worst <= 1e-8
    assert naive_broken > 0


def test_criterion_3_inversion():
    rng = random.Random(2024)
    worst_round_trip = 0.0
    max_iter = 0
    tail_violations = []
    count = 0
    for inp in arc_grid():
        arc = build_arc(inp)
        for z in targets(arc, rng):
            res = time_at_space(arc, z)
            count += 1
            assert res.converged
            max_iter = max(max_iter, res.iterations)
            worst_round_trip = max(worst_round_trip, abs(space(arc, res.t) - z) / max(1.0, abs(z)))
            e = res.steps
            # below this, steps only resolve the rounding of s divided by v
            floor = 1e-13 * (1.0 + abs(res.t)) + 1e-12 * (1.0 + abs(z)) / velocity(arc, res.t)
            tail = e[-3:]
            for e0, e1 in zip(tail, tail[1:]):
                if e1 > 1e6 * e0 * e0 + floor:
                    tail_violations.append((inp, z, e))
    ok = worst_round_trip <= 1e-9 and max_iter <= 20 and not tail_violations
    record(3, ok, f"{count} inversions, worst round trip {worst_round_trip:.1e}, max iterations {max_iter}, "
                  f"{len(tail_violations)} tail violations")
    assert worst_round_trip <= 1e-9
    assert max_iter <= 20
    assert not tail_violations, tail_violations[:3]


def test_criterion_4_ocp_residuals():
    problems = ocp_grid() + [p for name, vals in SWEEPS.items() for p in sweep_problems(name, vals)]
    n_feasible = 0
    worst = dict(g=0.0, s=0.0, v=0.0, td=0.0)
    for p in problems:
        if feasibility(p).verdict is not Verdict.FEASIBLE:
            continue
        n_feasible += 1
        sol = solve(p)
        g, _, vl, _ = switching_function(p, sol.s_sigma, sol.left, sol.right)
        v_peak = max(p.v_i, p.v_f, vl)
        s_T, v_T = terminal_state(sol)
        dv, ds = time_domain_residuals(sol)
        ratios = dict(
            g=abs(g) / (1e-9 * v_peak) if v_peak > 0.0 else abs(g),
            s=abs(s_T - p.length) / (1e-7 * p.length),
            v=abs(v_T - p.v_f) / (1e-8 * (1 + p.v_f)),
            td=max(abs(dv), abs(ds)) / 1e-8,
        )
        for k, r in ratios.items():
            worst[k] = max(worst[k], r)
    ok = all(r <= 1.0 for r in worst.values()) and n_feasible > 0
    detail = ", ".join(f"{k} {r:.2g}" for k, r in worst.items())
    record(4, ok, f"{n_feasible} feasible problems, worst residual / tolerance: {detail}")
    assert ok


def test_criterion_5_closed_forms():
    sol = solve(BangBangProblem(0.0, 0.0, 100.0, 2.0, 2.0, DragParams(0.0, 0.0)))
    # 14.1421356 is the rounded value of 10 sqrt(2)
    checks = [abs(sol.s_sigma - 50.0) <= 1e-9, abs(sol.total_time - 10.0 * math.sqrt(2.0)) <= 1e-8]

    free = build_arc(ArcInput(2.0, 6.0, DragParams(0.0, 0.0)))
    checks += [
        velocity(free, 3.0) == 12.0,
        space(free, 3.0) == 27.0,
        acceleration(free, 3.0) == 2.0,
        time_at_space(free, 100.0).t == pytest.approx((-6 + math.sqrt(436)) / 2, rel=2e-16),
        velocity_at_space(free, 100.0) == pytest.approx(math.sqrt(436), rel=2e-16),
    ]
    for inp in (ArcInput(0.0, 10.0, DragParams(0.0, 0.0)), ArcInput(1.0, 10.0, DragParams(0.1, 0.0))):
        const = build_arc(inp)
        checks += [
            const.case is CaseKind.A,
            time_at_space(const, 25.0).t == 2.5,
            velocity_at_space(const, 25.0) == 10.0,
            velocity(const, 7.0) == 10.0,
            space(const, 2.0) == 20.0,
            acceleration(const, 1.0) == 0.0,
            const.domain.speed_slope == 0,
        ]
    ok = all(checks)
    record(5, ok, f"{sum(checks)}/{len(checks)} closed-form checks")
    assert ok


EXPECTED_INFEASIBLE = {
    "c0": {0.4, 0.5},
    "a_plus": {1e-6, 0.01, 0.05, 0.1},
    "a_minus": set(),
    "c1": set(),
}


def test_criterion_6_sweep_reproduction():
    mismatches = {}
    for name, values in SWEEPS.items():
        got = {v for v, p in zip(values, sweep_problems(name, values))
               if feasibility(p).verdict is not Verdict.FEASIBLE}
        if got != EXPECTED_INFEASIBLE[name]:
            mismatches[name] = sorted(got ^ EXPECTED_INFEASIBLE[name])
    # the higher the quadratic drag, the slower the shared acceleration phase
    sols = [solve(p) for p in sweep_problems("c1", SWEEPS["c1"])]
    ordered = True
    for lo, hi in zip(sols, sols[1:]):
        reach = min(lo.s_sigma, hi.s_sigma)
        for k in range(1, 101):
            s = reach * k / 100
            ordered &= velocity_at_space(hi.left, s) <= velocity_at_space(lo.left, s)
    ok = not mismatches and ordered
    detail = "verdict sets match" if not mismatches else f"verdicts differ at {mismatches}"
    if "a_plus" in mismatches:
        vf_max = feasibility(sweep_problems("a_plus", (0.25,))[0]).vf_max
        detail += f" (a_plus=0.25 reaches at most {vf_max:.6f} m/s < v_f = 5)"
    record(6, ok, f"{detail}; c1 velocity ordering {'holds' if ordered else 'broken'}")
    assert ordered
    assert not mismatches


def test_criterion_7_q_series():
    worst = 0.0
    for tau in (0.001, -0.001):
        for k in range(50):
            c = -1.0 + 2.0 * k / 49
            worst = max(worst, abs(q_polynomial(tau, c) - q_direct(tau, c)))
    ok = worst <= 1e-15
    record(7, ok, f"max |polynomial - direct| at |tau| = 0.001: {worst:.1e}")
    assert ok


def test_criterion_8_performance():
    p = BASE_PROBLEM
    for _ in range(500):
        solve(p)
    clock = time.perf_counter_ns
    medians = []
    # Like timeit.repeat: three full measurements, judged by the best, so a
    # burst of foreign load on a shared machine does not decide the outcome.
    # Collections of earlier tests' garbage are kept out of the timings.
    gc.collect()
    gc.disable()
    try:
        for _ in range(3):
            samples = []
            for _ in range(10_000):
                t0 = clock()
                solve(p)
                samples.append(clock() - t0)
            medians.append(statistics.median(samples) / 1000.0)
    finally:
        gc.enable()
    best = min(medians)
    ok = best <= 50.0
    runs = ", ".join(f"{m:.1f}" for m in medians)
    record(8, ok, f"median solve time {best:.1f} us (best of 3 x 10^4 runs: {runs})")
    assert ok
