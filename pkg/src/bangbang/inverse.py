"""Inversion of the distance map of an arc: find ``t`` with ``s(t) = zeta``.

The iteration is Newton's method on ``f(t) = s(t) - zeta`` with ``f' = v``.
When ``f > 0`` and the arc's time window has a finite left end ``t_min``, the
step comes from the model function ``g(t) = p - r / (t - t_min)`` matched to
``f`` and ``f'`` at the current iterate, which cannot jump past ``t_min``::

    dt = f / (f' + f / (t - t_min))

A bracket of the root is maintained so that a step leaving it (or producing a
non-finite value) is replaced by bisection or, for a one-sided bracket, by a
geometric expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .arc import Arc, CaseKind, space, velocity
from .errors import ConvergenceError, DomainError, InvalidInputError


@dataclass(frozen=True)
class InversionSettings:
    abs_tol: float = 1e-12
    max_iter: int = 50
    bracket_expansion: float = 2.0

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise InvalidInputError("abs_tol must be positive")
        if self.max_iter < 8:
            raise InvalidInputError("max_iter must be at least 8")
        if not self.bracket_expansion > 1.0:
            raise InvalidInputError("bracket_expansion must exceed 1")


DEFAULT_SETTINGS = InversionSettings()


@dataclass(frozen=True)
class InversionResult:
    """Outcome of :func:`time_at_space`.

    ``f_residual`` is ``s(t) - zeta`` at the last iterate where ``s`` was
    evaluated; ``iterates`` holds the times at which ``s`` was evaluated and
    ``steps`` the magnitudes of the corresponding Newton corrections.
    """

    t: float
    iterations: int
    converged: bool
    f_residual: float
    steps: tuple = field(default=(), repr=False, compare=False)
    iterates: tuple = field(default=(), repr=False, compare=False)


def initial_guess(arc: Arc, zeta: float) -> float:
    """Starting time for the iteration.

    For accelerating arcs the drag-free-like inversion of ``v0 t + a t**2``
    is used.  For decelerating arcs the bounds ``v' <= a`` (braking) and
    ``v' <= 0`` put the guess at or left of the root, where Newton converges
    monotonically on the concave distance map; with linear drag the backward
    guess is tightened by an exponential lower bound on the distance.
    Guesses are kept inside the time window.
    """
    d = arc.domain
    a, v0 = arc.input.a, arc.input.v0
    if arc.case is CaseKind.B:
        if zeta * a > 0.0:
            return 2.0 * zeta / (v0 + math.sqrt(4.0 * zeta * a + v0 * v0))
        return 0.0
    if zeta >= 0.0:
        if arc.case is CaseKind.C:
            return 0.0
        gap = max(0.0, d.s_max - zeta)
        return max(0.0, d.t_max - math.sqrt(2.0 * gap / abs(a)))
    if arc.case is CaseKind.C:
        t = zeta / v0
    else:
        t = 2.0 * zeta / (v0 + math.sqrt(v0 * v0 + 2.0 * a * zeta))
        c0 = arc.input.drag.c0
        if c0 > 0.0:
            # Into the past the speed grows at least like the linear-drag
            # solution, whose distance exceeds m (e**x - 1 - x) >= m e**x / 2
            # with x = -c0 t once x >= 1.7.
            m = (abs(a) / c0 + v0) / c0
            x = max(1.7, math.log(2.0 * abs(zeta) / m))
            t = max(t, -x / c0)
    if t <= d.t_min:
        t = 0.5 * (d.t_min + min(0.0, d.t_max))
    return t


def _check_target(arc: Arc, zeta: float) -> None:
    d = arc.domain
    if math.isnan(zeta):
        raise DomainError("target distance is NaN")
    if zeta > d.s_max or zeta < d.s_min or (zeta == d.s_min and arc.case is not CaseKind.B):
        raise DomainError(f"target distance {zeta!r} outside the arc range ({d.s_min!r}, {d.s_max!r}]")


def time_at_space(arc: Arc, zeta: float, settings: InversionSettings = DEFAULT_SETTINGS) -> InversionResult:
    """Return the time at which the arc has covered ``zeta``.

    Raises:
        DomainError: if ``zeta`` is outside ``(s_min, s_max]``.
        ConvergenceError: if ``settings.max_iter`` iterations do not suffice.
    """
    _check_target(arc, zeta)
    d = arc.domain
    if arc.case is CaseKind.A:
        v0 = arc.input.v0
        if v0 == 0.0:
            if zeta != 0.0:
                raise DomainError("a resting arc covers no distance")
            return InversionResult(0.0, 0, True, 0.0)
        return InversionResult(zeta / v0, 0, True, 0.0)
    if zeta == d.s_max:
        return InversionResult(d.t_max, 0, True, 0.0)
    if zeta == d.s_min:
        return InversionResult(d.t_min, 0, True, 0.0)

    tol = settings.abs_tol
    grow = settings.bracket_expansion
    t_min = d.t_min
    barrier = math.isfinite(t_min)
    lo, hi = t_min, d.t_max
    t = initial_guess(arc, zeta)
    f_tol = tol * (1.0 + abs(zeta))
    steps = []
    iterates = []
    f = math.nan
    dt_old = math.inf
    for it in range(1, settings.max_iter + 1):
        v = velocity(arc, t)
        f = space(arc, t) - zeta
        iterates.append(t)
        if f > 0.0:
            hi = t
            if barrier:
                dt = f / (v + f / (t - t_min))
            else:
                dt = f / v if v > 0.0 else math.inf
        elif f < 0.0:
            lo = t
            dt = f / v if v > 0.0 else -math.inf
        else:
            steps.append(0.0)
            return InversionResult(t, it, True, 0.0, tuple(steps), tuple(iterates))
        t_new = t - dt
        steps.append(abs(dt))
        if abs(dt) <= tol * (1.0 + abs(t)) and abs(f) <= f_tol * max(1.0, v):
            return InversionResult(t_new, it, True, f, tuple(steps), tuple(iterates))
        if not (lo < t_new < hi):
            t_new = _fallback(t, lo, hi, grow)
            dt_old = math.inf
        elif abs(dt) > 0.5 * dt_old and math.isfinite(hi - lo):
            # Newton is not contracting (typically crawling up an
            # exponential flank); halve the bracket instead.
            t_new = 0.5 * (lo + hi)
            dt_old = math.inf
        else:
            dt_old = abs(dt)
        t = t_new
    raise ConvergenceError(
        f"time_at_space did not converge in {settings.max_iter} iterations "
        f"(zeta={zeta!r}, t={t!r}, residual={f!r})"
    )


def _fallback(t, lo, hi, grow):
    lo_ok = math.isfinite(lo)
    hi_ok = math.isfinite(hi)
    if lo_ok and hi_ok:
        return 0.5 * (lo + hi)
    if lo_ok:
        return lo + grow * (1.0 + abs(t - lo))
    if hi_ok:
        return hi - grow * (1.0 + abs(hi - t))
    return t


def velocity_at_space(arc: Arc, zeta: float, settings: InversionSettings = DEFAULT_SETTINGS) -> float:
    """Speed of the arc at the instant it has covered ``zeta``."""
    if arc.case is CaseKind.A:
        _check_target(arc, zeta)
        return arc.input.v0
    return velocity(arc, time_at_space(arc, zeta, settings).t)
