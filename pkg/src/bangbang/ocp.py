"""Minimum-time bang-bang speed profile over a path of fixed length.

The optimal control is full acceleration ``+a_plus`` up to a switching
abscissa ``s_sigma`` and full braking ``-a_minus`` after it.  The left arc
starts at ``(s, v) = (0, v_i)``.  The right arc is anchored at the end point
``(L, v_f)`` and is evaluated at non-positive local times ``tau``, with
abscissa ``s(tau) + L``.  The switch is the unique root of

    g(s) = v_L(s) - v_R(s),     g'(s) = a_plus / v_L + a_minus / v_R + c1 (v_R - v_L)

where ``v_L`` and ``v_R`` are the speeds of the two arcs as functions of the
abscissa.  ``g`` only crosses zero upwards, so the problem is feasible exactly
when ``g(0) <= 0 <= g(L)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .arc import Arc, ArcInput, DragParams, build_arc, space, state_unchecked, velocity
from .errors import (
    BangBangError,
    InfeasibleProblemError,
    InvalidInputError,
    NoCrossingError,
)
from .inverse import time_at_space, velocity_at_space

# Relative distance to 0 or L under which a switch is reported as degenerate.
DEGENERATE_TOL = 1e-9
_FAST_MAX_ITER = 30
_ROBUST_MAX_ITER = 200


class Verdict(str, enum.Enum):
    FEASIBLE = "Feasible"
    TOO_FAST = "InfeasibleTooFast"
    TOO_SLOW = "InfeasibleTooSlow"


class Phase(str, enum.Enum):
    ACCEL = "accel"
    BRAKE = "brake"


@dataclass(frozen=True)
class BangBangProblem:
    """Boundary speeds, path length, control bounds and drag."""

    v_i: float
    v_f: float
    length: float
    a_plus: float
    a_minus: float
    drag: DragParams = DragParams()

    def __post_init__(self):
        checks = (
            (self.v_i >= 0.0, "v_i must be >= 0"),
            (self.v_f >= 0.0, "v_f must be >= 0"),
            (self.length > 0.0, "length must be > 0"),
            (self.a_plus > 0.0, "a_plus must be > 0"),
            (self.a_minus > 0.0, "a_minus must be > 0"),
        )
        for ok, message in checks:
            if not ok:
                raise InvalidInputError(message)
        for name in ("v_i", "v_f", "length", "a_plus", "a_minus"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")


@dataclass(frozen=True)
class Feasibility:
    vf_min: float
    vf_max: float
    verdict: Verdict


@dataclass
class BangBangSolution:
    """Switching point, timing and the two arcs of an optimal profile.

    ``tau_sigma`` is the local time of the switch on the right arc
    (``tau_sigma <= 0``), so that ``total_time = t_sigma - tau_sigma``.
    """

    problem: BangBangProblem
    s_sigma: float
    t_sigma: float
    tau_sigma: float
    total_time: float
    left: Arc
    right: Arc
    degenerate: bool
    iterations: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TrajectorySample:
    s: float
    t: float
    v: float
    a: float
    phase: Phase


def accel_arc(problem: BangBangProblem) -> Arc:
    return build_arc(ArcInput(problem.a_plus, problem.v_i, problem.drag))


def brake_arc(problem: BangBangProblem) -> Arc:
    """Braking arc anchored at the terminal point (evaluated at ``tau <= 0``)."""
    return build_arc(ArcInput(-problem.a_minus, problem.v_f, problem.drag))


def feasibility(problem: BangBangProblem) -> Feasibility:
    """Reachable range of terminal speeds and the resulting verdict.

    ``vf_max`` is reached by accelerating over the whole path and ``vf_min``
    by braking over it (zero if the vehicle stops before the end).
    """
    L = problem.length
    vf_max = velocity_at_space(accel_arc(problem), L)
    stop = build_arc(ArcInput(-problem.a_minus, problem.v_i, problem.drag))
    vf_min = 0.0 if stop.domain.s_max <= L else velocity_at_space(stop, L)
    if problem.v_f > vf_max:
        verdict = Verdict.TOO_FAST
    elif problem.v_f < vf_min:
        verdict = Verdict.TOO_SLOW
    else:
        verdict = Verdict.FEASIBLE
    return Feasibility(vf_min, vf_max, verdict)


def switching_function(problem: BangBangProblem, s: float, left: Arc | None = None, right: Arc | None = None):
    """Return ``(g(s), g'(s), v_L(s), v_R(s))``."""
    left = left or accel_arc(problem)
    right = right or brake_arc(problem)
    vl = velocity_at_space(left, s)
    vr = velocity_at_space(right, s - problem.length)
    return vl - vr, _g_prime(problem, vl, vr), vl, vr


def _g_prime(problem, vl, vr):
    return problem.a_plus / vl + problem.a_minus / vr + problem.drag.c1 * (vr - vl)


def _raise_infeasible(problem, feas=None):
    feas = feas or feasibility(problem)
    raise InfeasibleProblemError(
        f"{feas.verdict.value}: v_f = {problem.v_f!r} outside [{feas.vf_min!r}, {feas.vf_max!r}]",
        feas,
    )


def solve(problem: BangBangProblem) -> BangBangSolution:
    """Compute the optimal switch and total time.

    Raises:
        InfeasibleProblemError: if ``v_f`` is outside the reachable range.
        NoCrossingError: if ``g`` shows no sign change on a feasible problem.
    """
    left = accel_arc(problem)
    right = brake_arc(problem)
    out = None
    try:
        out = _solve_fast(problem, left, right)
    except (BangBangError, ArithmeticError):
        out = None
    if out is None:
        out = _solve_bracketed(problem, left, right)
    s, t_sigma, tau_sigma, iterations = out
    L = problem.length
    if s < 0.0 or s > L:
        feas = feasibility(problem)
        if feas.verdict is not Verdict.FEASIBLE:
            _raise_infeasible(problem, feas)
    degenerate = False
    if s <= DEGENERATE_TOL * L or s >= (1.0 - DEGENERATE_TOL) * L:
        degenerate = True
        s = 0.0 if s <= 0.5 * L else L
        t_sigma = time_at_space(left, s).t
        tau_sigma = time_at_space(right, s - L).t
    return BangBangSolution(
        problem=problem,
        s_sigma=s,
        t_sigma=t_sigma,
        tau_sigma=tau_sigma,
        total_time=t_sigma - tau_sigma,
        left=left,
        right=right,
        degenerate=degenerate,
        iterations=iterations,
    )


def _initial_switch(problem):
    """Starting abscissa and arc times for the switching iteration.

    Along each arc ``u = v**2`` obeys ``du/ds = 2 (a - c0 v - c1 u)``.  Replacing
    ``v`` by its tangent at a reference speed ``v_m`` in ``u`` gives a linear
    equation ``du/ds = 2 a' - 2 k u`` whose two solutions (from ``v_i`` forward
    and from ``v_f`` backward) meet where ``exp(-2 k s)`` solves a linear
    equation.  Times follow from the trapezoidal mean speed.
    """
    L = problem.length
    ap, am = problem.a_plus, problem.a_minus
    c0, c1 = problem.drag.c0, problem.drag.c1
    vi2, vf2 = problem.v_i ** 2, problem.v_f ** 2
    s = (vf2 - vi2 + 2.0 * am * L) / (2.0 * (ap + am))
    s = min(L, max(0.0, s))
    v_m = 0.5 * math.sqrt(vi2 + 2.0 * ap * s) + 1e-3
    k = c1 + 0.5 * c0 / v_m
    shift = 0.5 * c0 * v_m
    linear = k * L > 1e-6
    if linear:
        al = (ap - shift) / k
        ar = (-am - shift) / k
        decay = math.exp(-2.0 * k * L)
        x = (al - ar) * decay / ((vf2 - ar) - (vi2 - al) * decay)
        if x > 0.0:
            s = min(L, max(0.0, -0.5 * math.log(x) / k))
    # two-point Gauss rule for the travel time after s = end -/+ h u**2
    tl = tr = 0.0
    h = L - s
    for u in _GAUSS2:
        xl = s * u * u
        xr = h * u * u
        if linear:
            ul = al + (vi2 - al) * math.exp(-2.0 * k * xl)
            ur = ar + (vf2 - ar) * math.exp(2.0 * k * xr)
        else:
            ul = vi2 + 2.0 * ap * xl
            ur = vf2 + 2.0 * am * xr
        tl += s * u / math.sqrt(max(ul, 1e-300))
        tr -= h * u / math.sqrt(max(ur, 1e-300))
    return s, tl, tr


_GAUSS2 = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))


def _solve_fast(problem, left, right):
    """Newton on ``g`` with the two inner inversions advanced jointly.

    Each pass takes one Newton correction of the arc times towards the
    current abscissa, uses the linearised speeds there, and updates the
    abscissa with ``-g / g'``.  Returns ``None`` when the iteration leaves the
    arcs' windows or fails to settle, in which case the bracketed solver
    takes over.  A converged abscissa outside ``[0, L]`` is returned as is
    and signals infeasibility to the caller.
    """
    L = problem.length
    ap, am = problem.a_plus, problem.a_minus
    c0, c1 = problem.drag.c0, problem.drag.c1
    vi, vf = problem.v_i, problem.v_f
    s, tl, tr = _initial_switch(problem)
    tol = 1e-13 * L
    err_prev = 0.0
    c_prev = math.inf
    pl, pr = left._p, right._p
    tl_min, tl_max = pl[11], pl[12]
    tr_min, tr_max = pr[11], pr[12]
    for it in range(1, _FAST_MAX_ITER + 1):
        if not (tl_min < tl < tl_max and tr_min < tr < tr_max):
            return None
        sl, vl = state_unchecked(pl, tl)
        sr, vr = state_unchecked(pr, tr)
        sr += L
        if not (vl > 0.0 and vr > 0.0):
            return None
        # first-order move of each arc onto the current abscissa
        dl = (s - sl) / vl
        dr = (s - sr) / vr
        al = ap - (c0 + c1 * vl) * vl
        ar = -am - (c0 + c1 * vr) * vr
        vl_s = vl + al * dl
        vr_s = vr + ar * dr
        if not (vl_s > 0.0 and vr_s > 0.0):
            return None
        g = vl_s - vr_s
        gp = ap / vl_s + am / vr_s + c1 * (vr_s - vl_s)
        ds = -g / gp
        s += ds
        tl += dl + ds / vl_s
        tr += dr + ds / vr_s
        err = max(abs(ds), abs(s - sl), abs(s - sr))
        if err <= tol:
            return s, tl, tr, it
        # With quadratic convergence the next correction is about C err**2.
        # C is estimated from the last two passes; taking the larger of two
        # estimates guards against an early pass that was not yet in the
        # quadratic regime.
        if err_prev > 0.0:
            c_est = err / (err_prev * err_prev)
            if err <= 1e-4 * L and max(c_est, c_prev) * err * err <= tol:
                return s, tl, tr, it
            c_prev = c_est
        err_prev = err
        if not -L < s < 2.0 * L:
            return None
    return None


def _solve_bracketed(problem, left, right):
    """Safeguarded Newton on ``g`` over ``[0, L]`` with exact inversions."""
    L = problem.length
    # only g at the end points: a speed may vanish there, and with it g'
    g0 = velocity_at_space(left, 0.0) - velocity_at_space(right, -L)
    gL = velocity_at_space(left, L) - velocity_at_space(right, 0.0)
    if g0 > 0.0 or gL < 0.0:
        feas = feasibility(problem)
        if feas.verdict is not Verdict.FEASIBLE:
            _raise_infeasible(problem, feas)
        raise NoCrossingError(f"g has no sign change on [0, L]: g(0)={g0!r}, g(L)={gL!r}")
    if g0 == 0.0:
        s = 0.0
    elif gL == 0.0:
        s = L
    else:
        lo, hi = 0.0, L
        s = 0.5 * L
        for it in range(1, _ROBUST_MAX_ITER + 1):
            g, gp, _, _ = switching_function(problem, s, left, right)
            if g == 0.0:
                break
            if g < 0.0:
                lo = s
            else:
                hi = s
            s_new = s - g / gp
            if not (lo < s_new < hi) or not math.isfinite(s_new):
                s_new = 0.5 * (lo + hi)
            if abs(s_new - s) <= 1e-14 * L or hi - lo <= 1e-15 * L:
                s = s_new
                break
            s = s_new
        else:
            raise NoCrossingError("switching abscissa iteration did not settle")
    t_sigma = time_at_space(left, s).t
    tau_sigma = time_at_space(right, s - L).t
    return s, t_sigma, tau_sigma, 0


def time_domain_residuals(solution: BangBangSolution) -> tuple[float, float]:
    """Speed and position mismatch of the two arcs at the switching instant.

    With ``T`` the total time, the left arc at ``t_sigma`` and the right arc
    at ``t_sigma - T`` must coincide in speed and abscissa.
    """
    T, ts = solution.total_time, solution.t_sigma
    L = solution.problem.length
    tau = ts - T
    dv = velocity(solution.left, ts) - velocity(solution.right, tau)
    ds = space(solution.left, ts) - (space(solution.right, tau) + L)
    return dv, ds


def terminal_state(solution: BangBangSolution) -> tuple[float, float]:
    """Abscissa and speed at ``T`` obtained by restarting a braking arc at the switch.

    This re-derives the end point from the switching state alone, so it is an
    independent check of the boundary conditions rather than a restatement.
    """
    p = solution.problem
    v_sw = velocity(solution.left, solution.t_sigma)
    s_sw = space(solution.left, solution.t_sigma)
    tail = build_arc(ArcInput(-p.a_minus, v_sw, p.drag))
    dt = solution.total_time - solution.t_sigma
    if dt >= tail.domain.t_max:
        return s_sw + tail.domain.s_max, 0.0
    return s_sw + space(tail, dt), velocity(tail, dt)


def sample_trajectory(solution: BangBangSolution, n: int) -> list[TrajectorySample]:
    """``n`` samples uniformly spaced in abscissa over ``[0, L]``.

    The ``a`` column holds the applied control (``+a_plus`` or ``-a_minus``).
    """
    if n < 2:
        raise InvalidInputError("at least two samples are required")
    p = solution.problem
    L = p.length
    out = []
    for k in range(n):
        s = L if k == n - 1 else L * k / (n - 1)
        if s < solution.s_sigma:
            t = time_at_space(solution.left, s).t
            out.append(TrajectorySample(s, t, velocity(solution.left, t), p.a_plus, Phase.ACCEL))
        else:
            tau = time_at_space(solution.right, s - L).t
            out.append(TrajectorySample(s, solution.total_time + tau, velocity(solution.right, tau),
                                        -p.a_minus, Phase.BRAKE))
    return out


def envelope_samples(problem: BangBangProblem, n: int) -> list[TrajectorySample]:
    """Pure-acceleration curve from ``v_i`` and pure-braking curve into ``v_f``.

    Each curve holds ``n`` rows uniformly spaced over ``[0, L]``.  The braking
    curve is traced backwards from the end point, so its times are negative
    (time remaining until ``s = L``).
    """
    if n < 2:
        raise InvalidInputError("at least two samples are required")
    L = problem.length
    acc = accel_arc(problem)
    brk = brake_arc(problem)
    rows = []
    for k in range(n):
        s = L if k == n - 1 else L * k / (n - 1)
        t = time_at_space(acc, s).t
        rows.append(TrajectorySample(s, t, velocity(acc, t), problem.a_plus, Phase.ACCEL))
    for k in range(n):
        s = L if k == n - 1 else L * k / (n - 1)
        tau = time_at_space(brk, s - L).t
        rows.append(TrajectorySample(s, tau, velocity(brk, tau), -problem.a_minus, Phase.BRAKE))
    return rows


def total_time_quadrature(solution: BangBangSolution, n: int = 16, rel_tol: float = 1e-12) -> float:
    """Travel time ``integral of ds / v(s)`` by adaptive Gauss-Legendre panels.

    Each phase is mapped as ``s = end -/+ h u**2`` about its outer end point,
    where the speed may vanish like a square root; the substitution turns
    that singularity into a smooth integrand in ``u``.  Panels of ``n`` nodes
    are halved until the halves agree with the whole to ``rel_tol``.
    """
    p = solution.problem
    L = p.length
    ss = solution.s_sigma
    x, wts = np.polynomial.legendre.leggauss(n)
    total = 0.0
    if ss > 0.0:
        total += _adaptive(lambda u: 2.0 * ss * u / velocity_at_space(solution.left, ss * u * u),
                           x, wts, rel_tol)
    h = L - ss
    if h > 0.0:
        total += _adaptive(lambda u: 2.0 * h * u / velocity_at_space(solution.right, -h * u * u),
                           x, wts, rel_tol)
    return total


def _adaptive(f, x, wts, rel_tol, max_depth=40):
    """Integral of ``f`` over ``[0, 1]`` by recursive halving of Gauss panels."""

    def panel(a, b):
        m, r = 0.5 * (a + b), 0.5 * (b - a)
        return r * sum(wi * f(m + r * xi) for xi, wi in zip(x, wts))

    whole = panel(0.0, 1.0)
    stack = [(0.0, 1.0, whole, 0)]
    total = 0.0
    while stack:
        a, b, est, depth = stack.pop()
        m = 0.5 * (a + b)
        left, right = panel(a, m), panel(m, b)
        if abs(left + right - est) <= rel_tol * abs(whole) or depth >= max_depth:
            total += left + right
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return float(total)
