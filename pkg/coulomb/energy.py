"""
Energy minima of the eigenvalue gas and the large-deviations exponent.

``e0`` is the minimum energy without the rate constraint, ``e1`` the minimum
with it; ``N**2 * (e1 - e0)`` is the exponent of the mutual information
density. The derivative of ``e1`` in the rate is the tilt ``k`` of the
constrained spectrum, so only the higher derivatives need differencing.
"""
import logging
import math
from dataclasses import dataclass

from . import baselines
from .errors import DomainError
from .specfun import g_fun
from .spectrum import (Regime, critical_rate, solve_constrained,
                       unconstrained_spectrum)


logger = logging.getLogger(__name__)

E0_SQUARE = 1.5


@dataclass(frozen=True)
class ExponentPoint:
    r: float
    exponent: float
    k: float
    e1_second: float


def _common_terms(beta, a, b):
    delta = b - a
    value = delta * delta / 32.0 + 0.5 * a - math.log(delta)
    if beta > 1:
        value -= 0.5 * (beta - 1.0) * math.log(a * delta)
    return value


def _edge_terms(beta, x, y):
    return g_fun(0.0, y) + 0.5 * (beta - 1.0) * g_fun(x, y)


def e0(beta):
    """
    Minimum energy of the unconstrained gas, the Marcenko-Pastur point.

    :raises DomainError: for ``beta < 1``.
    """
    if beta < 1:
        raise DomainError('beta must be >= 1, got %r' % beta)
    if beta == 1:
        return E0_SQUARE
    mp = unconstrained_spectrum(beta)
    delta = mp.b - mp.a
    return (_common_terms(beta, mp.a, mp.b)
            - 0.5 * delta * _edge_terms(beta, mp.a / delta, mp.a / delta))


def _e1_rectangular(spec):
    beta, rho, k, a, b = spec.beta, spec.rho, spec.k, spec.a, spec.b
    delta = b - a
    sa, sb = math.sqrt(1.0 + rho * a), math.sqrt(1.0 + rho * b)
    tilt = k * rho / (sa * sb)
    c = (1.0 + rho * a) / (delta * rho)
    x = a / delta
    return (_common_terms(beta, a, b)
            + 0.5 * k * (spec.r - math.log1p(rho * a)
                         - (sb - sa) ** 2 / (4.0 * rho * sa * sb))
            - 0.5 * delta * tilt * _edge_terms(beta, x, c)
            - 0.5 * delta * (1.0 - tilt) * _edge_terms(beta, x, x))


def _excess_square_interior(spec):
    k, rho = spec.k, spec.rho
    return (0.5 * (k - 1.0) * (spec.r - math.log(rho)) + k - 0.5 - 1.0 / rho
            - 0.5 * k * math.log(k))


def _excess_square_hard_edge(spec):
    k, rho, b = spec.k, spec.rho, spec.b
    root = math.sqrt(1.0 + rho * b)
    return (0.5 * k * (spec.r - 0.25 * b) - math.log(0.25 * b)
            - k * math.log1p(0.5 * rho * b / (root + 1.0))
            + (b - 4.0) * (4.0 / rho + 3.0 * b + 12.0) / 32.0)


def e1(spec):
    """
    Minimum energy of the gas constrained to the spectrum's rate.

    :param ConstrainedSpectrum spec: A solved spectrum.
    """
    if spec.beta > 1:
        return _e1_rectangular(spec)
    if spec.regime is Regime.INTERIOR:
        return E0_SQUARE + _excess_square_interior(spec)
    return E0_SQUARE + _excess_square_hard_edge(spec)


def _second_step(r):
    return min(max(1e-5, 1e-4 * r), 0.5 * r)


def exponent(ens, r):
    """
    The exponent ``E1(r) - E0`` together with ``E1'(r) = k`` and a central
    difference of ``k`` for ``E1''(r)``.

    :rtype: ExponentPoint
    """
    spec = solve_constrained(ens, r)
    h = _second_step(r)
    k_hi = solve_constrained(ens, r + h).k
    k_lo = solve_constrained(ens, r - h).k
    value = e1(spec) - e0(ens.beta)
    if value < 0:
        logger.debug('negative exponent %.3g at beta=%g rho=%g r=%g',
                     value, ens.beta, ens.rho, r)
    return ExponentPoint(r=float(r), exponent=value, k=spec.k,
                         e1_second=(k_hi - k_lo) / (2.0 * h))


def s_erg(ens):
    """
    Third derivative of ``E1`` at the ergodic rate, i.e. ``k''(r_erg)``, by a
    five-point stencil.

    For square channels the step is kept small enough that the stencil stays
    below the hard-edge/interior transition.
    """
    r_erg = baselines.ergodic_stats(ens).r_erg
    h = 1e-3 * max(1.0, r_erg)
    if ens.square:
        gap = critical_rate(ens.rho) - r_erg
        if gap > 0:
            h = min(h, gap / 2.5)
    h = min(h, r_erg / 2.5)

    def k_at(r):
        return solve_constrained(ens, r).k

    stencil = (-k_at(r_erg + 2 * h) + 16.0 * k_at(r_erg + h) - 30.0 * k_at(r_erg)
               + 16.0 * k_at(r_erg - h) - k_at(r_erg - 2 * h))
    value = stencil / (12.0 * h * h)
    logger.debug('s_erg(beta=%g, rho=%g) = %g (h=%g)', ens.beta, ens.rho, value, h)
    return value
