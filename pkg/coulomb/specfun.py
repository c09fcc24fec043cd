"""
Closed-form special functions shared by the energy and rate formulas.

``g_fun`` is the moment integral

    G(x, y) = (1/pi) * int_0^1 sqrt(t (1 - t)) log(t + x) / (t + y) dt

in closed form, and ``q_fun`` / ``q_fun_log`` are the Gaussian tail and its
logarithm. Everything here is a pure function of its arguments.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, erfc, erfcx

from .errors import DomainError


LN2 = np.log(2.0)
SQRT2 = np.sqrt(2.0)

# Beyond this point ln Q is taken from the scaled complement erfcx so the
# exponential factor is never formed.
LOG_TAIL_SWITCH = 8.0

# Past this second argument the closed form of G cancels to about eps * y**2
# relative; the moment series takes over when the first argument is zero or
# past it as well.
SERIES_MIN = 64.0
SERIES_TERMS = 10


def _weight_moments(count):
    # m_n = (1/pi) int_0^1 t**n sqrt(t (1 - t)) dt
    moments = np.empty(count)
    moments[0] = 0.125
    for n in range(1, count):
        moments[n] = moments[n - 1] * (2 * n + 1) / (2 * n + 4)
    return moments


MOMENTS = _weight_moments(2 * SERIES_TERMS)
# (1/pi) int_0^1 t**n sqrt(t (1 - t)) log(t) dt, a Beta-function derivative
LOG_MOMENTS = MOMENTS[:SERIES_TERMS] * (
    digamma(np.arange(SERIES_TERMS) + 1.5) - digamma(np.arange(SERIES_TERMS) + 3.0))


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerance and subdivision budget for adaptive quadrature.
    """
    abs_tol: float = 1e-12
    max_depth: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError('abs_tol must be positive, got %r' % self.abs_tol)
        if self.max_depth < 1:
            raise DomainError('max_depth must be >= 1, got %r' % self.max_depth)


DEFAULT_QUADRATURE = QuadratureSpec()


def _scalar_or_array(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


def _g_series(x, y):
    """
    ``G(x, y) = sum_i (-1)**i L_i(x) / y**(i + 1)`` where ``L_i(x)`` is the
    ``t**i`` moment of ``log(t + x)``: tabulated at ``x = 0``, otherwise
    ``m_i log(x)`` plus a series in ``1 / x``.
    """
    at_zero = x == 0
    xs = np.where(at_zero, 1.0, x)
    log_x = np.log(xs)
    total = np.zeros(np.broadcast(x, y).shape)
    for i in range(SERIES_TERMS):
        tail = sum((-1.0) ** (j + 1) * MOMENTS[i + j] / (j * xs ** j)
                   for j in range(1, SERIES_TERMS))
        moment = np.where(at_zero, LOG_MOMENTS[i], MOMENTS[i] * log_x + tail)
        total = total + (-1.0) ** i * moment / y ** (i + 1)
    return total


def g_fun(x, y):
    """
    Closed form of the moment integral ``G(x, y)`` for ``x, y >= 0``.

    The ``x = 0`` branch uses the analytic limit of the first logarithm
    (``sqrt(x (1 + y)) -> 0``) and the ``y = 0`` branch drops the vanishing
    ``sqrt(y (1 + y))`` prefactor, so neither branch point costs precision.
    For ``y >= SERIES_MIN`` with ``x`` zero or also past ``SERIES_MIN``, the
    value comes from the moment series instead.

    :raises DomainError: if either argument is negative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise DomainError('g_fun is defined for x >= 0, y >= 0')

    sx, sx1 = np.sqrt(x), np.sqrt(1.0 + x)
    sy, sy1 = np.sqrt(y), np.sqrt(1.0 + y)

    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = (np.sqrt(x * (1.0 + y)) + sy * sx1) / (sy1 + sy)
        first = np.where(y > 0, -2.0 * sy * sy1 * np.log(ratio), 0.0)

    second = (1.0 + 2.0 * y) * (np.log(sx1 + sx) - LN2)
    # (sqrt(1+x) - sqrt(x))**2 without the cancellation
    third = -0.5 / (sx1 + sx) ** 2

    series = (y >= SERIES_MIN) & ((x == 0) | (x >= SERIES_MIN))
    if np.any(series):
        tail = _g_series(np.where(series, x, SERIES_MIN),
                         np.where(series, y, SERIES_MIN))
        return _scalar_or_array(np.where(series, tail, first + second + third))
    return _scalar_or_array(first + second + third)


def q_fun(x):
    """
    Gaussian tail probability ``Q(x) = P(Z > x)``.
    """
    return _scalar_or_array(0.5 * erfc(np.asarray(x, dtype=float) / SQRT2))


def q_fun_log(x):
    """
    ``ln Q(x)`` for ``x >= 0`` without underflow.

    For ``x > 8`` the value is ``ln(erfcx(x / sqrt 2) / 2) - x**2 / 2``, the
    scaled complement carrying the asymptotic series.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError('q_fun_log is defined for x >= 0')
    with np.errstate(divide='ignore'):
        near = np.log(0.5 * erfc(np.minimum(x, LOG_TAIL_SWITCH) / SQRT2))
    far = np.log(0.5 * erfcx(x / SQRT2)) - 0.5 * x * x
    return _scalar_or_array(np.where(x > LOG_TAIL_SWITCH, far, near))


def log_q_signed(x):
    """
    ``ln Q(x)`` for any real ``x``; negative arguments go through
    ``log1p(-Q(-x))``.
    """
    x = float(x)
    if x >= 0:
        return q_fun_log(x)
    return float(np.log1p(-q_fun(-x)))
