"""Closed-form arcs of the Riccati speed equation ``v' = a - c0 v - c1 v**2``.

An arc is the solution with constant control ``a`` started at ``v(0) = v0``,
``s(0) = 0``.  Depending on the sign of the radicand ``c0**2 + 4 a c1`` and on
the position of ``v0`` relative to the equilibrium speed, the solution falls
into one of five regimes:

    A  constant speed (v0 equals the equilibrium)
    B  speeding up towards the equilibrium from below (a > 0)
    C  slowing down towards the equilibrium from above (a >= 0)
    D  braking with a real radicand (a < 0)
    E  braking with a negative radicand

Speeds and distances are evaluated with the reformulated expressions of
:mod:`bangbang.kernels`, which stay accurate when the drag coefficients or the
radicand vanish.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import DomainError, InvalidInputError
from .kernels import (
    Q_SERIES_THRESHOLD,
    _log1p_minus_x,
    _sinc_minus_one,
    kernel_A,
    kernel_E,
    kernel_G,
    kernel_L,
    kernel_Q,
    kernel_S,
)

INF = math.inf
_EPS = 2.0**-52

# Relative width of the window around t_o and t_inf where the factored forms
# of the numerator and denominator are used.
BOUNDARY_WINDOW = 100.0 * _EPS
# Tolerance of the constant-solution test.
CONSTANT_TOL = 1e-12
# Past this exponent the growing exponential of the space formula is factored out.
_EXP_SWITCH = 50.0


@dataclass(frozen=True)
class DragParams:
    """Linear (``c0``, 1/s) and quadratic (``c1``, 1/m) drag coefficients."""

    c0: float = 0.0
    c1: float = 0.0

    def __post_init__(self):
        if not (self.c0 >= 0.0 and self.c1 >= 0.0):
            raise InvalidInputError(f"drag coefficients must be >= 0, got c0={self.c0}, c1={self.c1}")
        if math.isinf(self.c0) or math.isinf(self.c1):
            raise InvalidInputError("drag coefficients must be finite")


@dataclass(frozen=True)
class ArcInput:
    """Control acceleration, initial speed and drag of one arc."""

    a: float
    v0: float
    drag: DragParams = DragParams()

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise InvalidInputError(f"acceleration must be finite, got {self.a}")
        if not (self.v0 >= 0.0 and math.isfinite(self.v0)):
            raise InvalidInputError(f"initial speed must be finite and >= 0, got {self.v0}")


class CaseKind(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"


class ArcConstants(NamedTuple):
    """Derived constants of an arc.

    In the real case ``w = sqrt(c0**2 + 4 a c1)`` and ``alpha``, ``beta``,
    ``gamma``, ``v_inf`` are set while the angles are NaN.  In the complex
    case (``complex_radicand``) ``w`` holds the magnitude of the square root,
    the angles and ``ell1`` are set and the real-case rates are NaN.
    """

    radicand: float
    w: float
    complex_radicand: bool
    alpha: float
    beta: float
    gamma: float
    v_inf: float
    delta_acc: float
    theta: float = math.nan
    theta0: float = math.nan
    theta1: float = math.nan
    ell1: float = math.nan


class ArcDomain(NamedTuple):
    """Validity window of an arc in time and distance."""

    t_min: float
    t_max: float
    s_min: float
    s_max: float
    speed_slope: int


@dataclass(frozen=True)
class Arc:
    """One arc: its data, derived constants, regime and validity window.

    The distance bounds of the window need extra special-function
    evaluations, so :attr:`domain` is computed on first access.
    """

    input: ArcInput
    constants: ArcConstants
    case: CaseKind
    # Flat copy of the numbers used by the evaluators, in the order documented
    # in ``_pack``.
    _p: tuple = field(repr=False, compare=False, default=())
    # (t_min, t_max, s_min, s_max, slope) with None for bounds still to compute
    _window: tuple = field(repr=False, compare=False, default=())

    @functools.cached_property
    def domain(self) -> ArcDomain:
        t_lo, t_hi, s_lo, s_hi, slope = self._window
        p = self._p
        if s_lo is None:
            k = self.constants
            c1 = self.input.drag.c1
            if k.w > 0.1 and c1 > 0.0:
                v0 = self.input.v0
                s_lo = (kernel_L(v0, c1 / k.beta) + kernel_L(-v0, c1 / k.alpha)) / k.w
            else:
                s_lo = state_unchecked(p, t_lo)[0]
        if s_hi is None:
            s_hi = state_unchecked(p, t_hi)[0]
        return ArcDomain(t_lo, t_hi, s_lo, s_hi, slope)

    @property
    def a(self) -> float:
        return self.input.a

    @property
    def v0(self) -> float:
        return self.input.v0

    @property
    def c0(self) -> float:
        return self.input.drag.c0

    @property
    def c1(self) -> float:
        return self.input.drag.c1


def _compute_constants(a, v0, c0, c1) -> ArcConstants:
    radicand = c0 * c0 + 4.0 * a * c1
    delta = (c1 * v0 + c0) * v0
    if radicand < 0.0:
        wm = math.sqrt(-radicand)
        ell1 = math.sqrt(c1 * (delta - a))  # |a| = -a here
        nan = math.nan
        return ArcConstants(
            radicand, wm, True, nan, nan, nan, nan, delta,
            math.atan2(wm, c0),
            math.atan2(v0 * wm, v0 * c0 - 2.0 * a),
            math.atan2(wm, 2.0 * c1 * v0 + c0),
            ell1,
        )
    w = math.sqrt(radicand)
    alpha = 0.5 * (w + c0)
    # alpha * beta = a c1; dividing avoids the cancellation in (w - c0) / 2.
    beta = a * c1 / alpha if alpha > 0.0 else 0.5 * (w - c0)
    if alpha > 0.0:
        v_inf = a / alpha
    else:
        v_inf = INF if a > 0.0 else (0.0 if a == 0.0 else -INF)
    return ArcConstants(radicand, w, False, alpha, beta, c1 * v0 + alpha, v_inf, delta)


def _classify(a, v0, k: ArcConstants) -> CaseKind:
    if k.complex_radicand:
        return CaseKind.E
    if a < 0.0:
        return CaseKind.D
    tol = CONSTANT_TOL * (abs(a) + 1.0)
    # The second test covers alpha = 0 (a = 0, c0 = 0), where alpha v0 = a
    # holds for every v0 although the speed still decays.
    if abs(k.alpha * v0 - a) <= tol and abs(k.delta_acc - a) <= tol:
        return CaseKind.A
    if a > k.delta_acc:
        return CaseKind.B
    return CaseKind.C


def _pack(inp: ArcInput, k: ArcConstants, case: CaseKind, t_lo: float, t_hi: float, t_o: float, t_inf: float):
    """Order: case, a, v0, c0, c1, w, alpha, beta, gamma, v_inf, delta,
    t_min, t_max, t_o, t_inf, ell1, cos(theta1), |a|."""
    c1 = inp.drag.c1
    if k.complex_radicand:
        cos1 = (2.0 * c1 * inp.v0 + inp.drag.c0) / (2.0 * k.ell1) if k.ell1 > 0.0 else 1.0
        cos1 = min(1.0, max(-1.0, cos1))
    else:
        cos1 = math.nan
    return (
        case,
        inp.a,
        inp.v0,
        inp.drag.c0,
        c1,
        k.w,
        k.alpha,
        k.beta,
        k.gamma,
        k.v_inf,
        k.delta_acc,
        t_lo,
        t_hi,
        t_o,
        t_inf,
        k.ell1,
        cos1,
        abs(inp.a),
    )


def build_arc(inp: ArcInput) -> Arc:
    """Compute constants, regime and validity window of the arc ``inp``."""
    a, v0 = inp.a, inp.v0
    c0, c1 = inp.drag.c0, inp.drag.c1
    k = _compute_constants(a, v0, c0, c1)
    case = _classify(a, v0, k)
    t_o = math.nan
    t_inf = -INF

    if case is CaseKind.A:
        dom = (-INF, INF, -INF, INF, 0)
    elif case is CaseKind.E:
        wm = k.w
        t_max = 2.0 * kernel_A(v0 / (v0 * c0 - 2.0 * a), wm)
        p = 2.0 * c1 * v0 + c0
        if p > 0.0:
            t_min = -2.0 * kernel_A(1.0 / p, wm)
        else:
            t_min = -2.0 * k.theta1 / wm
        t_o = t_max
        dom = (t_min, t_max, -INF, None, -1)
    else:
        w, gamma = k.w, k.gamma
        if case is not CaseKind.B and gamma > w:
            t_inf = kernel_L(1.0 / gamma, w)
        if case is CaseKind.B:
            t_o = kernel_L(v0 / (a + v0 * k.beta), w)
            dom = (t_o, INF, None, INF, 1)
        elif case is CaseKind.C:
            s_max = INF
            if a == 0.0 and c0 > 0.0:
                s_max = -kernel_L(v0, -c1 / c0) / c0
            dom = (t_inf, INF, -INF, s_max, -1)
        else:
            t_o = kernel_L(v0 / (a + v0 * k.beta), w)
            dom = (t_inf, t_o, -INF, None, -1)

    return Arc(inp, k, case, _pack(inp, k, case, dom[0], dom[1], t_o, t_inf), dom)


def _velocity_real(p, t):
    (_, a, v0, c0, c1, w, alpha, beta, gamma, v_inf, delta,
     t_min, t_max, t_o, t_inf, _, _, _) = p
    near_o = abs(t - t_o) < BOUNDARY_WINDOW * (1.0 + abs(t_o))
    if t > 0.0:
        em = kernel_E(-t, w)
        q = 1.0 + (gamma - w) * em
        if near_o:
            return (alpha * v0 - a) * kernel_E(t - t_o, w) * math.exp(-w * t) / q
        return v0 + (a - delta) * em / q
    ep = kernel_E(t, w)
    if abs(t - t_inf) < BOUNDARY_WINDOW * (1.0 + abs(t_inf)):
        q = (w - gamma) * kernel_E(t - t_inf, w)
    else:
        q = _backward_denominator(beta, c1 * v0, gamma, w, ep, t)
    if near_o:
        return (alpha * v0 - a) * kernel_E(t - t_o, w) / q
    if q == 0.0:
        return INF
    return v0 + (delta - a) * ep / q


def _backward_denominator(beta, c1v0, gamma, w, ep, t):
    """``1 - gamma E(t, w)`` for ``t <= 0``.

    Far in the past ``E(t, w) -> 1/w`` and the difference cancels whenever
    ``gamma`` is close to ``w`` (always so without quadratic drag); there the
    equal value ``((beta - c1 v0) + gamma exp(w t)) / w`` is used.
    """
    wt = w * t
    if wt < -1.0:
        return ((beta - c1v0) + gamma * math.exp(wt)) / w
    return 1.0 - gamma * ep


def _velocity_complex(p, t):
    a, v0, c0, c1, wm = p[1], p[2], p[3], p[4], p[5]
    half = 0.5 * t
    cs = math.cos(half * wm)
    sn = kernel_S(half, wm)
    return (v0 * cs - (c0 * v0 - 2.0 * a) * sn) / (cs + (2.0 * c1 * v0 + c0) * sn)


def _space_real(p, t):
    (_, a, v0, c0, c1, w, alpha, beta, gamma, v_inf, _, _, _, _, _, _, _, _) = p
    if w == 0.0 and c1 == 0.0:
        return (v0 + 0.5 * a * t) * t  # no drag: plain kinematics
    try:
        if c1 > 0.0 and beta * t > _EXP_SWITCH and alpha > 0.0:
            return v_inf * t + kernel_L((v_inf - v0) * kernel_E(-t, w), c1)
        if c1 > 0.0 and alpha * t < -_EXP_SWITCH:
            return -alpha * t / c1 + kernel_L(gamma * kernel_E(t, w) / c1, c1)
        x = a * kernel_G(t, w, c0) - v0 * kernel_E(-t, w) * math.exp(beta * t)
        return kernel_L(x, c1)
    except DomainError:
        # logarithm argument reached zero: the blow-up time has been passed
        return -INF
    except OverflowError:
        # without quadratic drag the distance grows exponentially into the past
        return -INF if t < 0.0 else INF


def _space_complex(p, t):
    v0, ell1, cos1, abs_a, delta = p[2], p[15], p[16], p[17], p[10]
    try:
        q = kernel_Q(t * ell1, cos1)
    except DomainError:
        return -INF
    return ((abs_a + delta) * q * t + v0) * t


def _space_unclamped(p, t):
    case = p[0]
    if case is CaseKind.A:
        return p[2] * t
    if case is CaseKind.E:
        return _space_complex(p, t)
    return _space_real(p, t)


def state_unchecked(p: tuple, t: float) -> tuple[float, float]:
    """``(s, v)`` at a time known to lie strictly inside the window.

    ``p`` is the packed tuple ``arc._p``; no domain checks are made.  Used by
    the switching-point iteration, which manages the window itself.  The
    closed-form kernel branches are inlined here; whenever a series branch or
    a boundary window applies, the general evaluators are called instead.
    """
    case = p[0]
    if case is CaseKind.E:
        return _state_complex(p, t)
    if case is CaseKind.A:
        return p[2] * t, p[2]
    try:
        return _state_real(p, t)
    except OverflowError:
        return _space_real(p, t), _velocity_real(p, t)


_TH = 1e-2  # series switch of the default kernel configuration


def _state_real(p, t):
    (_, a, v0, c0, c1, w, alpha, beta, gamma, v_inf, delta,
     _, _, t_o, t_inf, _, _, _) = p
    wt = w * t
    bt = beta * t
    if (wt < _TH and wt > -_TH) or bt > _EXP_SWITCH or alpha * t < -_EXP_SWITCH:
        return _space_real(p, t), _velocity_real(p, t)
    win_o = BOUNDARY_WINDOW * (1.0 + abs(t_o))
    if -win_o < t - t_o < win_o:
        return _space_real(p, t), _velocity_real(p, t)
    em = -math.expm1(-wt) / w          # E(-t, w)
    if t > 0.0:
        v = v0 + (a - delta) * em / (1.0 + (gamma - w) * em)
    else:
        win_inf = BOUNDARY_WINDOW * (1.0 + abs(t_inf))
        if -win_inf < t - t_inf < win_inf:
            return _space_real(p, t), _velocity_real(p, t)
        ep = -math.expm1(wt) / w       # E(t, w)
        q = _backward_denominator(beta, c1 * v0, gamma, w, ep, t)
        v = v0 + (delta - a) * ep / q if q != 0.0 else INF
    # G(t, w, c0) = (E(-t, alpha) + E(t, beta)) / w
    at = alpha * t
    e1 = -math.expm1(-at) / alpha if (at >= _TH or at <= -_TH) else kernel_E(-t, alpha)
    e2 = -math.expm1(bt) / beta if (bt >= _TH or bt <= -_TH) else kernel_E(t, beta)
    x = a * (e1 + e2) / w - v0 * em * math.exp(bt)
    y = c1 * x
    if y >= 1.0:
        return -INF, v
    if y >= _TH or y <= -_TH:
        return math.log1p(-y) / c1, v
    return kernel_L(x, c1), v


def _state_complex(p, t):
    (_, a, v0, c0, c1, wm, _, _, _, _, delta,
     _, _, _, _, ell1, cos1, abs_a) = p
    half = 0.5 * t
    z = half * wm
    tau = t * ell1
    if not (z >= _TH or z <= -_TH) or not (tau > Q_SERIES_THRESHOLD or tau < -Q_SERIES_THRESHOLD):
        return _space_complex(p, t), _velocity_complex(p, t)
    sz = math.sin(z)
    cz = math.cos(z)
    sn = sz / wm                       # S(t/2, |w|)
    v = (v0 * cz - (c0 * v0 - 2.0 * a) * sn) / (cz + (2.0 * c1 * v0 + c0) * sn)
    # Q(tau, cos(theta1)) in the closed form of kernels.q_direct; here
    # tau * sin(theta1) = z.
    sh = math.sin(0.5 * z)
    sinc_m1 = sz / z - 1.0 if (z >= 0.1 or z <= -0.1) else _sinc_minus_one(z)
    d = cos1 * tau * sinc_m1 - 2.0 * sh * sh
    x = cos1 * tau + d
    if x <= -1.0:
        return -INF, v
    q = (_log1p_minus_x(x) + d) / (tau * tau)
    return ((abs_a + delta) * q * t + v0) * t, v


def velocity(arc: Arc, t: float) -> float:
    """Speed of the arc at time ``t``.

    Raises:
        DomainError: if ``t`` lies outside the validity window (beyond a
            small tolerance), or at a blow-up boundary.
    """
    p = arc._p
    case = p[0]
    if case is CaseKind.A:
        return p[2]
    t_min, t_max = p[11], p[12]
    tol = BOUNDARY_WINDOW * (1.0 + abs(t))
    if t >= t_max:
        if t - t_max <= tol:
            return 0.0
        raise DomainError(f"t = {t!r} exceeds the arc's t_max = {t_max!r}")
    if t <= t_min:
        if case is CaseKind.B and t_min - t <= tol:
            return 0.0
        raise DomainError(f"t = {t!r} is not above the arc's t_min = {t_min!r}")
    if case is CaseKind.E:
        return _velocity_complex(p, t)
    return _velocity_real(p, t)


def space(arc: Arc, t: float) -> float:
    """Distance travelled from time 0 to ``t`` (negative for ``t < 0``).

    Times at or beyond the window edges are clamped to ``s_min``/``s_max``.
    """
    d = arc.domain
    if t >= d.t_max:
        return d.s_max
    if t <= d.t_min:
        return d.s_min
    return _space_unclamped(arc._p, t)


def acceleration(arc: Arc, t: float) -> float:
    """Right-hand side ``a - c0 v - c1 v**2`` of the speed equation at ``t``."""
    v = velocity(arc, t)
    return arc.input.a - (arc.input.drag.c0 + arc.input.drag.c1 * v) * v


def state(arc: Arc, t: float) -> tuple[float, float]:
    """Return ``(space(arc, t), velocity(arc, t))``."""
    return space(arc, t), velocity(arc, t)
