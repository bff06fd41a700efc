"""Scalar special functions with removable singularities.

Every kernel switches between its closed form and a convergent power series
when the product of its arguments is small, so that the limits at zero rates
(``w = 0``, ``c = 0``) are reproduced exactly instead of as ``0/0``.

    kernel_L(t, c)      = log(1 - c t) / c
    kernel_E(t, w)      = (1 - exp(w t)) / w
    kernel_S(x, w)      = sin(w x) / w
    kernel_A(x, w)      = arctan(w x) / w
    kernel_G(t, w, c0)  = (kernel_E(-t, (w + c0)/2) + kernel_E(t, (w - c0)/2)) / w
    kernel_F(t, w, c0)  = exp(t c0 / 2) kernel_G(t, w, c0)
    kernel_Q(tau, c)    = log((c/s) sin(tau s) + cos(tau s)) / tau**2 - c / tau,
                          s = sqrt(1 - c**2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvalidInputError

_EPS = 2.0**-52


@dataclass(frozen=True)
class KernelConfig:
    """Series switchover and truncation settings shared by the kernels."""

    series_switch_threshold: float = 1e-2
    series_rel_tol: float = 2.0**-53
    max_terms: int = 64

    def __post_init__(self):
        if not 0.0 < self.series_switch_threshold < 1.0:
            raise InvalidInputError("series_switch_threshold must lie in (0, 1)")
        if not 0.0 < self.series_rel_tol <= _EPS * 1e3:
            raise InvalidInputError("series_rel_tol must lie in (0, 1e3 * eps]")
        if self.max_terms < 8:
            raise InvalidInputError("max_terms must be at least 8")


DEFAULT_CONFIG = KernelConfig()

# Threshold below which kernel_Q uses its degree-5 Taylor polynomial.
Q_SERIES_THRESHOLD = 1e-3


def _sum_series(first, ratio, rel_tol, max_terms):
    """Sum ``first * prod(ratio(k))`` until terms drop below ``rel_tol``.

    ``ratio(n)`` returns the factor turning term ``n - 1`` into term ``n``.
    Returns the partial sum and the number of terms used.
    """
    term = first
    total = first
    n = 1
    while n < max_terms:
        term *= ratio(n)
        total += term
        n += 1
        if abs(term) <= rel_tol * abs(total):
            break
    return total, n


def series_L(t, c, config=DEFAULT_CONFIG):
    """Series branch of :func:`kernel_L`; returns ``(value, terms)``."""
    x = c * t
    tol = config.series_rel_tol
    # -t * sum_{n>=0} x**n / (n + 1)
    power = 1.0
    total = 1.0
    n = 1
    while n < config.max_terms:
        power *= x
        term = power / (n + 1)
        total += term
        n += 1
        if abs(term) <= tol * abs(total):
            break
    return -t * total, n


def series_E(t, w, config=DEFAULT_CONFIG):
    """Series branch of :func:`kernel_E`; returns ``(value, terms)``."""
    x = w * t
    tol = config.series_rel_tol
    # -t * sum_{n>=0} x**n / (n + 1)!
    term = 1.0
    total = 1.0
    n = 1
    while n < config.max_terms:
        term *= x / (n + 1)
        total += term
        n += 1
        if abs(term) <= tol * abs(total):
            break
    return -t * total, n


def series_S(x, w, config=DEFAULT_CONFIG):
    """Series branch of :func:`kernel_S`; returns ``(value, terms)``."""
    z2 = (w * x) ** 2
    s, n = _sum_series(
        1.0, lambda k: -z2 / ((2 * k) * (2 * k + 1)), config.series_rel_tol, config.max_terms
    )
    return x * s, n


def series_A(x, w, config=DEFAULT_CONFIG):
    """Series branch of :func:`kernel_A`; returns ``(value, terms)``."""
    z2 = (w * x) ** 2
    s, n = _sum_series(
        1.0, lambda k: -z2 * (2 * k - 1) / (2 * k + 1), config.series_rel_tol, config.max_terms
    )
    return x * s, n


def kernel_L(t, c, config=DEFAULT_CONFIG):
    """Return ``log(1 - c t) / c``, with limit ``-t`` at ``c = 0``.

    Raises:
        DomainError: if ``c t >= 1``.
    """
    x = c * t
    if x >= 1.0:
        raise DomainError(f"kernel_L: c*t = {x!r} must be < 1")
    th = config.series_switch_threshold
    if -th < x < th:
        return series_L(t, c, config)[0]
    return math.log1p(-x) / c


def kernel_E(t, w, config=DEFAULT_CONFIG):
    """Return ``(1 - exp(w t)) / w``, with limit ``-t`` at ``w = 0``.

    Raises:
        OverflowError: if ``w t`` exceeds the exponent range.
    """
    x = w * t
    th = config.series_switch_threshold
    if -th < x < th:
        return series_E(t, w, config)[0]
    return -math.expm1(x) / w


def kernel_S(x, w, config=DEFAULT_CONFIG):
    """Return ``sin(w x) / w`` (``x`` times the unnormalised sinc of ``w x``)."""
    z = w * x
    th = config.series_switch_threshold
    if -th < z < th:
        return series_S(x, w, config)[0]
    return math.sin(z) / w


def kernel_A(x, w, config=DEFAULT_CONFIG):
    """Return ``arctan(w x) / w``, with limit ``x`` at ``w = 0``."""
    z = w * x
    if abs(z) < config.series_switch_threshold:
        return series_A(x, w, config)[0]
    return math.atan(z) / w


def g_direct(t, w, c0, config=DEFAULT_CONFIG):
    """Defining combination of :func:`kernel_G`; requires ``w != 0``."""
    return (kernel_E(-t, 0.5 * (w + c0), config) + kernel_E(t, 0.5 * (w - c0), config)) / w


def g_series(t, w, c0, config=DEFAULT_CONFIG):
    """Taylor series of :func:`kernel_G` about ``t = 0``; returns ``(value, terms)``.

    The coefficients ``f_n = (w**2n - c0**2n) / (w**2 - c0**2)`` follow the
    recurrence ``g_{n+1} = g_n c0**2``, ``f_{n+1} = f_n w**2 + g_{n+1}`` and the
    powers ``(|t|/2)**2n / (2n)!`` are carried as logarithms so that neither
    factor overflows on its own.
    """
    if t == 0.0:
        return 0.0, 0
    log_half_t = math.log(0.5 * abs(t))
    shift = -0.5 * t * c0
    w2 = w * w
    c2 = c0 * c0
    g = 1.0
    f = 1.0
    total = 0.0
    n = 1
    while n <= config.max_terms:
        if f > 0.0:
            h = 2 * n * log_half_t - math.lgamma(2 * n + 1) + shift
            term = math.exp(h + math.log(f)) * (4.0 + 2.0 * c0 * t / (2 * n + 1))
        else:
            term = 0.0
        total += term
        if abs(term) <= config.series_rel_tol * abs(total):
            break
        g *= c2
        f = f * w2 + g
        n += 1
    return -total, n


def g_small_rate(t, w, c0):
    """:func:`kernel_G` for ``|w t|`` small and ``|c0 t|`` of order one or larger.

    Uses ``G = 4 exp(-u) [exp(u) - cosh(z) - u sinhc(z)] / (w**2 - c0**2)`` with
    ``u = c0 t / 2`` and ``z = w t / 2``; the bracket is regrouped so that each
    piece is computed without cancellation.
    """
    u = 0.5 * c0 * t
    z = 0.5 * w * t
    z2 = z * z
    sinhc_m1 = z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0))
    sh = math.sinh(0.5 * z)
    bracket = (math.expm1(u) - u) - 2.0 * sh * sh - u * sinhc_m1
    return 4.0 * math.exp(-u) * bracket / ((w - c0) * (w + c0))


def kernel_G(t, w, c0, config=DEFAULT_CONFIG):
    """Return ``(E(-t, (w+c0)/2) + E(t, (w-c0)/2)) / w`` with its ``w -> 0`` limit.

    The direct combination is used when ``|w t|`` is above the switch
    threshold; otherwise the Taylor series (``|c0 t| <= 1``) or the
    hyperbolic regrouping (``|c0 t| > 1``) is used.

    Raises:
        OverflowError: for extreme ``t``.
    """
    if t == 0.0:
        return 0.0
    th = config.series_switch_threshold
    wt = w * t
    if wt >= th or wt <= -th:
        return g_direct(t, w, c0, config)
    if abs(c0 * t) <= 1.0:
        return g_series(t, w, c0, config)[0]
    return g_small_rate(t, w, c0)


def kernel_F(t, w, c0, config=DEFAULT_CONFIG):
    """Return ``exp(t c0 / 2) * kernel_G(t, w, c0)``."""
    return math.exp(0.5 * t * c0) * kernel_G(t, w, c0, config)


def q_polynomial(tau, c):
    """Degree-5 Taylor polynomial of :func:`kernel_Q` in ``tau``."""
    c2 = c * c
    return -0.5 + tau * (
        c / 3.0
        + tau * (
            -(2.0 * c2 + 1.0) / 12.0
            + tau * (
                (c2 + 2.0) * c / 15.0
                + tau * (
                    -(2.0 * c2 * c2 + 11.0 * c2 + 2.0) / 90.0
                    + tau * (2.0 * c2 * c2 + 26.0 * c2 + 17.0) * c / 315.0
                )
            )
        )
    )


def _log1p_minus_x(x):
    """Return ``log(1 + x) - x`` without cancellation for small ``x``.

    Uses ``log(1 + x) = 2 atanh(u)`` with ``u = x / (2 + x)``, so that
    ``log(1 + x) - x = -x**2 / (2 + x) + 2 (atanh(u) - u)``; for ``|x| < 0.1``
    the odd series of ``atanh(u) - u`` is exhausted at ``u**15``.
    """
    if -0.1 < x < 0.1:
        u = x / (2.0 + x)
        u2 = u * u
        tail = u2 * (1 / 3 + u2 * (1 / 5 + u2 * (1 / 7 + u2 * (1 / 9 + u2 * (1 / 11 + u2 * (1 / 13 + u2 / 15))))))
        return 2.0 * u * tail - x * x / (2.0 + x)
    return math.log1p(x) - x


def _sinc_minus_one(z):
    """Return ``sin(z)/z - 1`` without cancellation for small ``z``."""
    if -0.1 < z < 0.1:
        z2 = z * z
        return -z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0)))
    return math.sin(z) / z - 1.0


def q_direct(tau, c):
    """Closed form of :func:`kernel_Q` for ``tau != 0``.

    With ``X = c tau sinc(tau s) + cos(tau s) - 1`` the value is
    ``(log1p(X) - c tau) / tau**2``, evaluated as
    ``((log1p(X) - X) + (X - c tau)) / tau**2`` so that the leading terms
    never cancel.

    Raises:
        DomainError: if the logarithm argument is not positive.
    """
    s = math.sqrt(max(0.0, (1.0 - c) * (1.0 + c)))
    z = tau * s
    half = math.sin(0.5 * z)
    d = c * tau * _sinc_minus_one(z) - 2.0 * half * half
    x = c * tau + d
    if x <= -1.0:
        raise DomainError("kernel_Q: logarithm argument is not positive")
    return (_log1p_minus_x(x) + d) / (tau * tau)


def kernel_Q(tau, c):
    """Return ``log((c/s) sin(tau s) + cos(tau s)) / tau**2 - c/tau``.

    ``s = sqrt(1 - c**2)``; the ``s -> 0`` limit ``log(1 + c tau)/tau**2 - c/tau``
    is reached continuously. For ``|tau| <= 1e-3`` the degree-5 polynomial is
    returned; its truncation error there is below 1e-18.

    Raises:
        DomainError: if ``|c| > 1`` or the logarithm argument is not positive.
    """
    if not -1.0 <= c <= 1.0:
        raise DomainError(f"kernel_Q: |c| = {abs(c)!r} exceeds 1")
    if -Q_SERIES_THRESHOLD <= tau <= Q_SERIES_THRESHOLD:
        return q_polynomial(tau, c)
    return q_direct(tau, c)
