import math
import random

import pytest

from bangbang.arc import DragParams, velocity
from bangbang.errors import InfeasibleProblemError, InvalidInputError
from bangbang.inverse import velocity_at_space
from bangbang.ocp import (
    BangBangProblem,
    Phase,
    Verdict,
    accel_arc,
    brake_arc,
    envelope_samples,
    feasibility,
    sample_trajectory,
    solve,
    switching_function,
    terminal_state,
    time_domain_residuals,
    total_time_quadrature,
)
from bangbang.oracle import OracleSettings, shoot_bangbang
from grids import BASE_PROBLEM, ocp_grid

FREE = DragParams(0.0, 0.0)
SYMMETRIC = BangBangProblem(0.0, 0.0, 100.0, 2.0, 2.0, FREE)

# bisection on g with both speeds from the RK oracle (tolerance 1e-13)
S_SIGMA_BASE = 77.67575680887163
# RK shooting oracle from that switch
T_SIGMA_BASE = 7.697947676659288
T_BASE = 10.337029642290455


def with_(problem, **kw):
    fields = dict(v_i=problem.v_i, v_f=problem.v_f, length=problem.length,
                  a_plus=problem.a_plus, a_minus=problem.a_minus, drag=problem.drag)
    fields.update(kw)
    return BangBangProblem(**fields)


@pytest.mark.parametrize(
    "kw",
    [dict(v_i=-1.0), dict(v_f=-0.1), dict(length=0.0), dict(length=-5.0), dict(a_plus=0.0),
     dict(a_minus=-2.0), dict(length=math.inf), dict(v_i=math.nan)],
)
def test_problem_validation(kw):
    with pytest.raises(InvalidInputError):
        with_(BASE_PROBLEM, **kw)


class TestFeasibility:
    def test_base(self):
        f = feasibility(BASE_PROBLEM)
        assert f.verdict is Verdict.FEASIBLE
        assert f.vf_min <= BASE_PROBLEM.v_f <= f.vf_max

    def test_high_friction(self):
        f = feasibility(with_(BASE_PROBLEM, drag=DragParams(0.5, 0.01)))
        assert f.verdict is Verdict.TOO_FAST
        assert f.vf_max < 5.0

    def test_weak_engine(self):
        assert feasibility(with_(BASE_PROBLEM, a_plus=1e-6)).verdict is Verdict.TOO_FAST

    def test_too_slow(self):
        f = feasibility(BangBangProblem(20.0, 1.0, 10.0, 2.0, 2.0, FREE))
        assert f.verdict is Verdict.TOO_SLOW
        assert f.vf_min == pytest.approx(math.sqrt(400 - 40), rel=1e-14)

    def test_stop_to_stop(self):
        f = feasibility(SYMMETRIC)
        assert f.verdict is Verdict.FEASIBLE and f.vf_min == 0.0

    def test_envelope_consistency(self):
        for p in ocp_grid()[::7]:
            f = feasibility(p)
            assert f.vf_min <= f.vf_max
            assert f.vf_max == pytest.approx(velocity_at_space(accel_arc(p), p.length), rel=1e-14)
            right = brake_arc(p)
            g0 = velocity_at_space(accel_arc(p), 0.0) - velocity_at_space(right, -p.length)
            gL = f.vf_max - p.v_f
            assert (f.verdict is Verdict.FEASIBLE) == (g0 <= 0.0 <= gL)


class TestSolve:
    def test_base_against_oracles(self):
        sol = solve(BASE_PROBLEM)
        assert 0.0 < sol.s_sigma < 100.0 and not sol.degenerate
        assert sol.s_sigma == pytest.approx(S_SIGMA_BASE, abs=1e-9)
        assert sol.t_sigma == pytest.approx(T_SIGMA_BASE, abs=1e-9)
        assert sol.total_time == pytest.approx(T_BASE, abs=1e-9)
        assert velocity(sol.left, 0.0) == 6.0
        s_end, v_end = terminal_state(sol)
        assert abs(s_end - 100.0) <= 1e-7 and abs(v_end - 5.0) <= 1e-9

    def test_base_shooting_residuals(self):
        sol = solve(BASE_PROBLEM)
        shot = shoot_bangbang(BASE_PROBLEM, sol.s_sigma, OracleSettings(1e-12, 1e-12))
        assert abs(shot.speed_residual) <= 1e-7
        assert abs(shot.position_residual) <= 1e-7
        assert shot.t_final == pytest.approx(sol.total_time, abs=1e-7)

    def test_drag_free_symmetric(self):
        sol = solve(SYMMETRIC)
        assert sol.s_sigma == pytest.approx(50.0, abs=1e-9)
        assert sol.total_time == pytest.approx(2 * math.sqrt(50), abs=1e-8)

    def test_pure_acceleration(self):
        vf = feasibility(with_(BASE_PROBLEM, v_f=0.0)).vf_max
        sol = solve(with_(BASE_PROBLEM, v_f=vf))
        assert sol.degenerate and sol.s_sigma == 100.0
        assert sol.tau_sigma == 0.0

    def test_pure_braking(self):
        p = BangBangProblem(20.0, 0.0, 10.0, 2.0, 2.0, FREE)
        vf = feasibility(p).vf_min
        sol = solve(with_(p, v_f=vf))
        assert sol.degenerate and sol.s_sigma == 0.0
        assert sol.total_time == pytest.approx((20 - vf) / 2, rel=1e-12)

    def test_infeasible_raises(self):
        with pytest.raises(InfeasibleProblemError) as info:
            solve(with_(BASE_PROBLEM, drag=DragParams(0.5, 0.01)))
        assert info.value.feasibility.verdict is Verdict.TOO_FAST
        with pytest.raises(InfeasibleProblemError):
            solve(BangBangProblem(20.0, 1.0, 10.0, 2.0, 2.0, FREE))

    def test_switch_is_the_root_of_g(self):
        sol = solve(BASE_PROBLEM)
        g, gp, vl, vr = switching_function(BASE_PROBLEM, sol.s_sigma)
        assert abs(g) <= 1e-9 * vl and gp > 0.0
        assert switching_function(BASE_PROBLEM, 10.0)[0] < 0.0 < switching_function(BASE_PROBLEM, 95.0)[0]

    def test_time_domain_system(self):
        for p in (BASE_PROBLEM, SYMMETRIC, with_(BASE_PROBLEM, drag=DragParams(0.3, 0.0))):
            dv, ds = time_domain_residuals(solve(p))
            assert abs(dv) <= 1e-8 and abs(ds) <= 1e-8

    def test_perturbed_switch_breaks_the_boundary_data(self):
        rng = random.Random(4)
        problems = [p for p in ocp_grid() if p.length <= 100.0 and feasibility(p).verdict is Verdict.FEASIBLE]
        for p in rng.sample(problems, 10):
            sol = solve(p)
            if sol.degenerate:
                continue
            for f in (0.99, 1.01):
                shot = shoot_bangbang(p, sol.s_sigma * f, OracleSettings(1e-10, 1e-10))
                broken = max(abs(shot.speed_residual), abs(shot.position_residual)) > 1e-4
                assert broken or shot.t_final > sol.total_time


class TestTrajectory:
    def test_two_samples(self):
        sol = solve(BASE_PROBLEM)
        first, last = sample_trajectory(sol, 2)
        assert (first.s, first.t, first.v, first.a, first.phase) == (0.0, 0.0, 6.0, 2.0, Phase.ACCEL)
        assert last.s == 100.0 and last.phase is Phase.BRAKE and last.a == -2.0
        assert last.t == pytest.approx(sol.total_time, rel=1e-15)
        assert last.v == pytest.approx(5.0, abs=1e-12)

    def test_ordering_and_phases(self):
        sol = solve(BASE_PROBLEM)
        rows = sample_trajectory(sol, 400)
        assert all(r1.s < r2.s and r1.t < r2.t for r1, r2 in zip(rows, rows[1:]))
        assert all((r.phase is Phase.ACCEL) == (r.s < sol.s_sigma) for r in rows)
        k = min(range(len(rows)), key=lambda i: abs(rows[i].s - sol.s_sigma))
        s = rows[k].s
        assert velocity_at_space(sol.left, s) == pytest.approx(velocity_at_space(sol.right, s - 100.0), abs=1e-1)
        # at the switch itself both phases give the same speed
        vl = velocity_at_space(sol.left, sol.s_sigma)
        assert vl == pytest.approx(velocity_at_space(sol.right, sol.s_sigma - 100.0), abs=1e-6)

    def test_symmetric_peak(self):
        rows = sample_trajectory(solve(SYMMETRIC), 3)
        assert rows[1].s == 50.0
        assert rows[1].v == pytest.approx(math.sqrt(200), rel=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(InvalidInputError):
            sample_trajectory(solve(BASE_PROBLEM), 1)

    def test_envelopes(self):
        p = with_(BASE_PROBLEM, drag=DragParams(0.5, 0.01))
        rows = envelope_samples(p, 5)
        acc = [r for r in rows if r.phase is Phase.ACCEL]
        brk = [r for r in rows if r.phase is Phase.BRAKE]
        assert len(acc) == len(brk) == 5
        assert (acc[0].s, acc[0].t, acc[0].v) == (0.0, 0.0, 6.0)
        assert (brk[-1].s, brk[-1].t, brk[-1].v) == (100.0, 0.0, 5.0)
        assert all(r.t <= 0.0 for r in brk)


class TestQuadrature:
    def test_symmetric(self):
        assert total_time_quadrature(solve(SYMMETRIC)) == pytest.approx(2 * math.sqrt(50), abs=1e-6)

    def test_base(self):
        sol = solve(BASE_PROBLEM)
        assert total_time_quadrature(sol) == pytest.approx(sol.total_time, rel=1e-6)

    def test_constant_speed(self):
        probe = feasibility(with_(BASE_PROBLEM, v_i=0.0))
        v_inf = accel_arc(BASE_PROBLEM).constants.v_inf
        p = with_(BASE_PROBLEM, v_i=v_inf, v_f=v_inf)
        sol = solve(p)
        assert probe.vf_max < v_inf
        assert sol.degenerate and sol.s_sigma == 100.0
        assert total_time_quadrature(sol) == pytest.approx(100.0 / v_inf, rel=1e-12)
        assert sol.total_time == pytest.approx(100.0 / v_inf, rel=1e-12)

    def test_grid_sample(self):
        for p in ocp_grid()[::23]:
            if feasibility(p).verdict is not Verdict.FEASIBLE:
                continue
            sol = solve(p)
            assert total_time_quadrature(sol) == pytest.approx(sol.total_time, rel=1e-6)
