"""Brute-force reference solutions by adaptive Runge-Kutta integration.

The coupled system ``s' = v``, ``v' = a - c0 v - c1 v**2`` is integrated with
the Dormand-Prince 5(4) pair, a PI step-size controller and the pair's
fourth-order continuous extension.  Nothing here uses the closed forms of
:mod:`bangbang.arc`, which makes these routines suitable as test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arc import ArcInput
from .errors import ConvergenceError, InvalidInputError, NoCrossingError

BLOW_UP_SPEED = 1e12

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# difference between the fifth- and fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)


@dataclass(frozen=True)
class OracleSettings:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_steps: int = 200_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not 0.0 < value <= 1e-4:
                raise InvalidInputError(f"{name} must lie in (0, 1e-4], got {value!r}")
        if self.max_steps < 1000:
            raise InvalidInputError("max_steps must be at least 1000")

    def halved(self) -> "OracleSettings":
        return OracleSettings(self.rel_tol / 2, self.abs_tol / 2, self.max_steps * 2)


DEFAULT_ORACLE = OracleSettings()


class _Step:
    """One accepted step with the data for its continuous extension."""

    __slots__ = ("t0", "h", "y0", "y1", "rcont")

    def __init__(self, t0, h, y0, y1, k):
        self.t0 = t0
        self.h = h
        self.y0 = y0
        self.y1 = y1
        self.rcont = []
        for i in range(2):
            r2 = y1[i] - y0[i]
            r3 = h * k[0][i] - r2
            r4 = r2 - h * k[6][i] - r3
            r5 = h * sum(_D[j] * k[j][i] for j in range(7))
            self.rcont.append((y0[i], r2, r3, r4, r5))

    def __call__(self, t):
        th = (t - self.t0) / self.h
        th1 = 1.0 - th
        return tuple(r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5))) for r1, r2, r3, r4, r5 in self.rcont)


class _Integrator:
    def __init__(self, inp: ArcInput, settings: OracleSettings):
        self.a = inp.a
        self.c0 = inp.drag.c0
        self.c1 = inp.drag.c1
        self.settings = settings

    def rhs(self, y):
        v = y[1]
        return (v, self.a - (self.c0 + self.c1 * v) * v)

    def step(self, t, y, h, k0):
        """One Dormand-Prince step; returns (y_new, error_vector, stages)."""
        k = [k0]
        for i in range(1, 7):
            coeffs = _A[i]
            yi = tuple(y[m] + h * sum(coeffs[j] * k[j][m] for j in range(i)) for m in range(2))
            k.append(self.rhs(yi))
        y_new = tuple(y[m] + h * sum(_B[j] * k[j][m] for j in range(6)) for m in range(2))
        err = tuple(h * sum(_E[j] * k[j][m] for j in range(7)) for m in range(2))
        return y_new, err, k

    def error_norm(self, y, y_new, err):
        st = self.settings
        total = 0.0
        for m in range(2):
            sc = st.abs_tol + st.rel_tol * max(abs(y[m]), abs(y_new[m]))
            total += (err[m] / sc) ** 2
        return math.sqrt(0.5 * total)

    def run(self, y0, t_end, stop=None):
        """Integrate from ``t = 0`` towards ``t_end`` (either sign).

        ``stop(step)`` is called after every accepted step and may return a
        value to end the integration early.  Returns ``(t, y, stop_value)``.
        """
        st = self.settings
        t = 0.0
        y = tuple(y0)
        if t_end == 0.0:
            return t, y, None
        direction = 1.0 if t_end > 0.0 else -1.0
        k0 = self.rhs(y)
        scale = st.abs_tol + st.rel_tol * max(abs(v) for v in y)
        d1 = max(abs(v) for v in k0)
        h = 0.01 * scale ** 0.2 / max(d1, 1e-6) if d1 > 0.0 else 1e-3
        h = min(abs(t_end), max(h, 1e-10 * abs(t_end)))
        err_old = 1e-4
        steps = 0
        while True:
            steps += 1
            if steps > st.max_steps:
                raise ConvergenceError(f"oracle exceeded {st.max_steps} steps at t={t!r}")
            last = abs(t_end - t) <= h * (1.0 + 1e-12)
            if last:
                h = abs(t_end - t)
            hs = direction * h
            y_new, err, k = self.step(t, y, hs, k0)
            en = self.error_norm(y, y_new, err)
            if not math.isfinite(en):
                en = 1e10
            if en <= 1.0:
                t_new = t_end if last else t + hs
                record = _Step(t, hs, y, y_new, k)
                t, y, k0 = t_new, y_new, k[6]
                if abs(y[1]) > BLOW_UP_SPEED:
                    raise ConvergenceError(f"oracle solution blew up (|v| > {BLOW_UP_SPEED:g}) near t={t!r}")
                if stop is not None:
                    out = stop(record)
                    if out is not None:
                        return t, y, out
                if last:
                    return t, y, None
                fac = 0.9 * en ** -0.14 * err_old ** 0.08 if en > 0.0 else 5.0
                h *= min(5.0, max(0.2, fac))
                err_old = max(en, 1e-4)
            else:
                h *= max(0.2, 0.9 * en ** -0.2)
                if h < 1e-15 * (1.0 + abs(t)):
                    raise ConvergenceError(f"oracle step size underflow at t={t!r}")

    def exact_step(self, y, h):
        """A single step of size ``h`` (no error control)."""
        return self.step(0.0, y, h, self.rhs(y))[0]


def integrate_arc(inp: ArcInput, t_end: float, settings: OracleSettings = DEFAULT_ORACLE):
    """Return ``(v, s)`` at ``t_end`` starting from ``(s, v) = (0, v0)``.

    Raises:
        ConvergenceError: on step exhaustion or blow-up of the speed.
    """
    _, y, _ = _Integrator(inp, settings).run((0.0, inp.v0), t_end)
    return y[1], y[0]


def integrate_arc_many(inp: ArcInput, times, settings: OracleSettings = DEFAULT_ORACLE):
    """``[(v, s), ...]`` at each of ``times``, integrating once per direction."""
    times = list(times)
    out = [None] * len(times)
    integ = _Integrator(inp, settings)
    for sign in (1.0, -1.0):
        idx = sorted((i for i, t in enumerate(times) if (t > 0.0 if sign > 0 else t <= 0.0)),
                     key=lambda i: sign * times[i])
        t_prev, y = 0.0, (0.0, inp.v0)
        for i in idx:
            # restart from the previous output point; the system is autonomous
            _, y1, _ = integ.run(y, times[i] - t_prev)
            t_prev, y = times[i], y1
            out[i] = (y[1], y[0])
    return out


def _bisect_dense(step, inside, lo, hi):
    """Shrink ``[lo, hi]`` (``inside(hi)`` true, ``inside(lo)`` false) on the dense output."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if inside(step(mid)):
            hi = mid
        else:
            lo = mid
        if abs(hi - lo) <= 1e-12 * abs(step.h):
            break
    return 0.5 * (lo + hi)


def _locate(integ: _Integrator, y0, zeta, horizon, settings=None):
    """Time and state at which ``s`` first reaches ``zeta``."""
    sign = 1.0 if zeta >= 0.0 else -1.0

    def crossed(step):
        s_end, v_end = step.y1
        if sign * (s_end - zeta) >= 0.0 or v_end <= 0.0:
            return step
        return None

    _, _, step = integ.run(y0, sign * horizon, crossed)
    if step is None:
        raise NoCrossingError(f"no crossing of s = {zeta!r} within |t| <= {horizon!r}")
    lo, hi = step.t0, step.t0 + step.h
    if step.y1[1] <= 0.0:
        # the speed changes sign inside this step: s is monotone only up to
        # there, so the crossing must lie before the turning point
        hi = _bisect_dense(step, lambda y: y[1] <= 0.0, lo, hi)
        gap = sign * (step(hi)[0] - zeta)
        if gap < -1e-12 * max(1.0, abs(zeta)):
            raise NoCrossingError(f"speed reaches zero before s = {zeta!r}")
        if gap <= 1e-12 * max(1.0, abs(zeta)):
            # the target is the turning point itself, where s(t) is flat
            return hi
    t = _bisect_dense(step, lambda y: sign * (y[0] - zeta) >= 0.0, lo, hi)
    # polish with exact steps from the start of the bracketing step
    for _ in range(4):
        s_t, v_t = integ.exact_step(step.y0, t - step.t0)
        if v_t == 0.0:
            break
        t -= (s_t - zeta) / v_t
    return t


def locate_space_event(inp: ArcInput, zeta: float, settings: OracleSettings = DEFAULT_ORACLE,
                       horizon: float = 1e6) -> float:
    """Time at which the arc covers ``zeta`` (negative for ``zeta < 0``).

    Raises:
        NoCrossingError: if ``s`` never reaches ``zeta`` (the vehicle stops
            first, or the horizon is exhausted).
        ConvergenceError: on blow-up when integrating backwards.
    """
    if zeta == 0.0:
        return 0.0
    integ = _Integrator(inp, settings)
    return _locate(integ, (0.0, inp.v0), zeta, horizon, settings)


@dataclass(frozen=True)
class ShootingResult:
    """Outcome of integrating an accelerate-then-brake profile."""

    t_switch: float
    v_switch: float
    t_final: float
    s_final: float
    v_final: float
    speed_residual: float
    position_residual: float


def shoot_bangbang(problem, s_sigma: float, settings: OracleSettings = DEFAULT_ORACLE) -> ShootingResult:
    """Integrate ``+a_plus`` up to ``s_sigma``, then ``-a_minus`` until ``s = L``.

    If the vehicle stops before ``L`` the integration ends there, the
    position residual reports the shortfall and the speed residual is
    ``-inf`` (the vehicle never arrives, so no terminal speed exists).
    """
    from .arc import ArcInput as _In

    L = problem.length
    acc = _Integrator(_In(problem.a_plus, problem.v_i, problem.drag), settings)
    if s_sigma > 0.0:
        t_sw = _locate(acc, (0.0, problem.v_i), s_sigma, 1e6, settings)
        v_sw = acc.run((0.0, problem.v_i), t_sw)[1][1]
    else:
        t_sw, v_sw = 0.0, problem.v_i
    brk_in = _In(-problem.a_minus, v_sw, problem.drag)
    brk = _Integrator(brk_in, settings)
    remaining = L - s_sigma
    try:
        dt = _locate(brk, (0.0, v_sw), remaining, 1e6, settings) if remaining > 0.0 else 0.0
        _, y, _ = brk.run((0.0, v_sw), dt)
        s_end, v_end = y
        s_end = remaining if dt > 0.0 else s_end
        speed_residual = v_end - problem.v_f
    except NoCrossingError:
        # stopped before the end: find the stopping time from v = 0
        dt, s_end = _stop_point(brk, v_sw, settings)
        v_end = 0.0
        arrived = remaining - s_end <= 1e-9 * max(1.0, L)
        # the speed at s = L is never attained, so its mismatch is unbounded
        speed_residual = -problem.v_f if arrived else -math.inf
    return ShootingResult(
        t_switch=t_sw,
        v_switch=v_sw,
        t_final=t_sw + dt,
        s_final=s_sigma + s_end,
        v_final=v_end,
        speed_residual=speed_residual,
        position_residual=s_sigma + s_end - L,
    )


def _stop_point(integ: _Integrator, v0, settings):
    def stopped(step):
        return step if step.y1[1] <= 0.0 else None

    _, _, step = integ.run((0.0, v0), 1e6, stopped)
    t = _bisect_dense(step, lambda y: y[1] <= 0.0, step.t0, step.t0 + step.h)
    return t, step(t)[0]
