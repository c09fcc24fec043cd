"""
Quadrature oracles and helpers shared by the test modules.
"""
import math
import os
import unittest

import numpy as np
from scipy.integrate import quad

from coulomb import spectrum


QUAD = dict(epsabs=1e-13, epsrel=1e-12, limit=400)

slow = unittest.skipUnless(os.environ.get('COULOMB_SLOW_TESTS'),
                           'set COULOMB_SLOW_TESTS=1 to run')


def g_fun_oracle(x, y):
    """
    ``(1/pi) int_0^1 sqrt(t (1 - t)) log(t + x) / (t + y) dt`` with
    ``t = sin(s)**2``.
    """
    def integrand(s):
        st, ct = math.sin(s), math.cos(s)
        t = st * st
        if t + x <= 0:
            return 0.0
        return 2.0 * (st * ct) ** 2 * math.log(t + x) / (t + y)

    value, _ = quad(integrand, 0.0, 0.5 * math.pi, **QUAD)
    return value / math.pi


def integrate_density(spec, f=None):
    """
    ``int p(x) f(x) dx`` over the support of ``spec``; the edge singularities
    are removed by ``x = a + (b - a) sin(s)**2`` or, on the hard edge,
    ``x = u**2``.
    """
    if f is None:
        def f(x):
            return 1.0
    a, b = spec.a, spec.b

    if spec.regime is spectrum.Regime.HARD_EDGE:
        def integrand(u):
            if u <= 0:
                return 0.0
            x = u * u
            return 2.0 * u * spectrum.density_at(spec, x) * f(x)

        value, _ = quad(integrand, 0.0, math.sqrt(b), **QUAD)
        return value

    delta = b - a

    def integrand(s):
        st, ct = math.sin(s), math.cos(s)
        x = a + delta * st * st
        if not a < x < b:
            return 0.0
        return 2.0 * delta * st * ct * spectrum.density_at(spec, x) * f(x)

    value, _ = quad(integrand, 0.0, 0.5 * math.pi, **QUAD)
    return value


def energy_oracle(spec):
    """
    The energy of the equilibrium density with the double integral removed
    through the saddle-point equation evaluated at ``x = a``.
    """
    beta, rho, k, a, r = spec.beta, spec.rho, spec.k, spec.a, spec.r
    value = 0.5 * integrate_density(spec, lambda x: x)
    value -= integrate_density(spec, lambda x: math.log(x - a))
    tail = k * (r - math.log1p(rho * a)) + a
    if beta > 1:
        value -= 0.5 * (beta - 1.0) * integrate_density(spec, math.log)
        tail -= (beta - 1.0) * math.log(a)
    return value + 0.5 * tail


def kolmogorov_distance(samples, cdf, points=400):
    """
    Largest gap between the empirical CDF of sorted ``samples`` and ``cdf``
    on a grid spanning the samples.
    """
    grid = np.linspace(samples[0], samples[-1], points)
    empirical = np.searchsorted(samples, grid, side='right') / samples.size
    return float(np.max(np.abs(empirical - np.asarray(cdf(grid)))))
