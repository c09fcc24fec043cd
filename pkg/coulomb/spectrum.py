"""
Rate-constrained equilibrium eigenvalue densities.

For an ensemble ``(beta, rho)`` and a rate ``r`` (nats per transmit antenna)
the most probable eigenvalue density of ``H^H H`` conditioned on
``I_N / N = r`` is a generalized Marcenko-Pastur law on ``[a, b]`` whose shape
is tilted by the rate multiplier ``k``. Three solution branches exist:

* ``beta > 1``: interior support, ``(a, b, k)`` from nested scalar solves.
* ``beta = 1``, ``r > r_c``: interior support, ``a, b`` closed form in ``k``.
* ``beta = 1``, ``r <= r_c``: hard edge at ``a = 0`` with an inverse square-root
  divergence.
"""
import enum
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .specfun import DEFAULT_QUADRATURE, g_fun
from .utils.roots import MAX_ITER, XTOL, find_root, grow_bracket


logger = logging.getLogger(__name__)

SQUARE_TOL = 1e-9


class Regime(enum.Enum):
    INTERIOR = 'interior'
    HARD_EDGE = 'hard-edge'


@dataclass(frozen=True)
class ChannelEnsemble:
    """
    ``beta = M / N >= 1`` and the linear SNR ``rho``. A ``beta`` within
    ``1e-9`` of one is stored as exactly one.
    """
    beta: float
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError('rho must be positive, got %r' % self.rho)
        if not self.beta >= 1 - SQUARE_TOL:
            raise DomainError(
                'beta must be >= 1 (use normalize_ensemble), got %r' % self.beta)
        if abs(self.beta - 1.0) <= SQUARE_TOL:
            object.__setattr__(self, 'beta', 1.0)
        object.__setattr__(self, 'beta', float(self.beta))
        object.__setattr__(self, 'rho', float(self.rho))

    @property
    def square(self):
        return self.beta == 1.0


@dataclass(frozen=True)
class UnconstrainedSpectrum:
    a: float
    b: float


@dataclass(frozen=True)
class ConstrainedSpectrum:
    regime: Regime
    a: float
    b: float
    k: float
    beta: float
    rho: float
    r: float

    @property
    def ensemble(self):
        return ChannelEnsemble(self.beta, self.rho)


def normalize_ensemble(n_tx, n_rx, rho):
    """
    Map an ``n_rx x n_tx`` channel onto an ensemble with ``beta >= 1``.

    When there are more transmit than receive antennas the roles are swapped;
    keeping the ``CN(0, 1/n_tx)`` entry variance of the original channel means
    the SNR becomes ``rho * n_rx / n_tx`` so that ``log det`` is unchanged.

    :returns: ``(ChannelEnsemble, n)`` where ``n`` is the smaller dimension.
    """
    if int(n_tx) != n_tx or int(n_rx) != n_rx or n_tx < 1 or n_rx < 1:
        raise DomainError('antenna counts must be positive integers')
    if not rho > 0:
        raise DomainError('rho must be positive, got %r' % rho)
    n_tx, n_rx = int(n_tx), int(n_rx)
    if n_rx >= n_tx:
        return ChannelEnsemble(n_rx / n_tx, rho), n_tx
    return ChannelEnsemble(n_tx / n_rx, rho * n_rx / n_tx), n_rx


def unconstrained_spectrum(beta):
    if beta < 1:
        raise DomainError('beta must be >= 1, got %r' % beta)
    s = math.sqrt(beta)
    return UnconstrainedSpectrum((s - 1.0) ** 2, (s + 1.0) ** 2)


def mp_density(beta, x):
    """
    Marcenko-Pastur density of ``H^H H`` for aspect ratio ``beta``.
    """
    mp = unconstrained_spectrum(beta)
    x = np.asarray(x, dtype=float)
    inside = (x > mp.a) & (x < mp.b)
    with np.errstate(divide='ignore', invalid='ignore'):
        p = np.sqrt((mp.b - x) * (x - mp.a)) / (2 * np.pi * x)
    p = np.where(inside, p, 0.0)
    return float(p) if p.ndim == 0 else p


def critical_k(rho):
    """
    Smallest tilt for which the square-channel interior branch has ``a >= 0``.
    """
    if not rho > 0:
        raise DomainError('rho must be positive, got %r' % rho)
    return 1.0 / rho + 2.0 / math.sqrt(rho)


def critical_rate(rho):
    """
    Rate at which the square-channel hard-edge and interior branches meet.

    This is the interior rate evaluated at ``k = critical_k(rho)``:
    ``((1 + 2 sqrt(rho)) / rho) log(1 + rho / (1 + 2 sqrt(rho)))
    + 2 log(1 + sqrt(rho)) - 1``.
    """
    if not rho > 0:
        raise DomainError('rho must be positive, got %r' % rho)
    sr = math.sqrt(rho)
    return ((1.0 + 2.0 * sr) / rho * math.log1p(rho / (1.0 + 2.0 * sr))
            + 2.0 * math.log1p(sr) - 1.0)


# -- square channel, interior branch ----------------------------------------

def square_interior_support(rho, k):
    """
    Support of the square-channel interior branch at tilt ``k``; ``a`` goes
    negative for ``k < critical_k(rho)``.
    """
    s = math.sqrt(k + 1.0)
    return (s - 1.0) ** 2 - 1.0 / rho, (s + 1.0) ** 2 - 1.0 / rho


def _square_interior_excess(k):
    # (k+1) log(k+1) - k log k - 1, i.e. r - log(rho), regrouped so the two
    # k log k sized terms never meet
    if k == 0:
        return -1.0
    return math.log1p(k) + k * math.log1p(1.0 / k) - 1.0


def _relative_residual(terms, target):
    """
    ``sum(terms) - target`` relative to the magnitude of what was summed.
    """
    scale = abs(target) + sum(abs(t) for t in terms)
    if scale == 0:
        return 0.0
    return (math.fsum(terms) - target) / scale


# -- square channel, hard-edge branch ---------------------------------------

def _hard_edge_k(rho, b):
    # normalization ties k to b
    return (0.5 * b - 2.0) / -math.expm1(-0.5 * math.log1p(rho * b))


def _hard_edge_rate_terms(rho, k, b):
    root = math.sqrt(1.0 + rho * b)
    root_m1 = rho * b / (root + 1.0)
    log_half = math.log1p(0.5 * root_m1)
    return (2.0 * (k + 1.0) * log_half, -root_m1 ** 2 / (4.0 * rho),
            -0.5 * k * math.log1p(rho * b))


def _hard_edge_rate(rho, k, b):
    return math.fsum(_hard_edge_rate_terms(rho, k, b))


def _hard_edge_b(rho, k):
    """
    Invert the hard-edge normalization for ``b``; ``k(b)`` is increasing.
    """
    b_c = 4.0 + 4.0 / math.sqrt(rho)

    def residual(u):
        return _hard_edge_k(rho, math.exp(u)) - k

    anchor = math.log(b_c)
    if residual(anchor) == 0:
        return b_c
    lo, hi = grow_bracket(residual, anchor, -1.0 if k < critical_k(rho) else 1.0,
                          stage='hard-edge normalization')
    u = find_root(residual, lo, hi, stage='hard-edge normalization',
                  residual_tol=1e-9 * max(1.0, abs(k)))
    return math.exp(u)


# -- rectangular channel ----------------------------------------------------

def _tilt_factor(rho, k, a, b):
    return k * rho / math.sqrt((1.0 + rho * a) * (1.0 + rho * b))


def _b_min(beta, rho, k):
    # Positive root of rho b^2 - (rho (k + beta - 1) - 1) b - (beta - 1) = 0;
    # above it the lower-edge equation has a root inside (0, b).
    p = rho * (k + beta - 1.0) - 1.0
    q = 4.0 * rho * (beta - 1.0)
    if p >= 0:
        return (p + math.sqrt(p * p + q)) / (2.0 * rho)
    return 2.0 * (beta - 1.0) / (math.sqrt(p * p + q) - p)


def _lower_edge(beta, rho, k, b):
    """
    Solve ``k rho / sqrt((1 + rho a)(1 + rho b)) + (beta - 1) / sqrt(a b) = 1``
    for ``a`` in ``(0, b)``, working in ``s = sqrt(a / b)``.
    """
    sb = math.sqrt(1.0 + rho * b)

    def residual(s):
        t1 = k * rho / (math.sqrt(1.0 + rho * b * s * s) * sb)
        t2 = (beta - 1.0) / (b * s)
        return (t1 + t2 - 1.0) / (1.0 + abs(t1) + t2)

    s_lo = min(0.5, 0.5 * (beta - 1.0) / (b * (1.0 + abs(k) * rho / sb)))
    for _ in range(MAX_ITER):
        if residual(s_lo) > 0:
            break
        s_lo *= 0.5
    if residual(1.0) >= 0:
        return b
    s = find_root(residual, s_lo, 1.0, stage='lower edge',
                  xtol=XTOL * 1e-3 * s_lo)
    return b * s * s


def _normalization_terms(beta, rho, k, a, b):
    # (a + b)/4 - (beta - 1)/2 - (k/2)(1 - 1/s), s = sqrt((1 + rho a)(1 + rho b)),
    # with s**2 - 1 expanded so large |k| does not cancel against k/(2 s)
    s = math.sqrt((1.0 + rho * a) * (1.0 + rho * b))
    s2_m1 = rho * (a + b + rho * a * b)
    return ((a + b) / 4.0, -0.5 * (beta - 1.0),
            -0.5 * k * s2_m1 / (s * (s + 1.0)))


def _rectangular_support(beta, rho, k):
    b_min = _b_min(beta, rho, k)

    def residual(b):
        if b <= b_min:
            return -1.0
        a = _lower_edge(beta, rho, k, b)
        return _relative_residual(_normalization_terms(beta, rho, k, a, b), 1.0)

    lo, hi = grow_bracket(residual, b_min, max(b_min, 1.0),
                          stage='normalization')
    b = find_root(residual, lo, hi, stage='normalization',
                  xtol=XTOL * 1e-2 * hi)
    return _lower_edge(beta, rho, k, b), b


def _rectangular_rate_terms(beta, rho, k, a, b):
    delta = b - a
    tilt = _tilt_factor(rho, k, a, b)
    c = (1.0 + rho * a) / (delta * rho)
    return (math.log(delta * rho),
            0.5 * delta * tilt * g_fun(c, c),
            0.5 * delta * (1.0 - tilt) * g_fun(c, a / delta))


def _rectangular_rate(beta, rho, k, a, b):
    return math.fsum(_rectangular_rate_terms(beta, rho, k, a, b))


# -- public solvers ---------------------------------------------------------

def support_at_k(ens, k):
    """
    Support ``(regime, a, b)`` of the equilibrium density at fixed tilt ``k``.
    """
    if ens.square:
        if k >= critical_k(ens.rho):
            a, b = square_interior_support(ens.rho, k)
            return Regime.INTERIOR, max(a, 0.0), b
        return Regime.HARD_EDGE, 0.0, _hard_edge_b(ens.rho, k)
    a, b = _rectangular_support(ens.beta, ens.rho, k)
    return Regime.INTERIOR, a, b


def spectrum_at_k(ens, k):
    """
    The constrained spectrum at tilt ``k``, with its rate filled in.
    """
    regime, a, b = support_at_k(ens, k)
    spec = ConstrainedSpectrum(regime, a, b, float(k), ens.beta, ens.rho, 0.0)
    return ConstrainedSpectrum(regime, a, b, float(k), ens.beta, ens.rho,
                               rate_of(spec))


def rate_of(spec):
    """
    ``int p(x) log(1 + rho x) dx`` in closed form for the spectrum's branch.
    """
    rho, k = spec.rho, spec.k
    if spec.regime is Regime.HARD_EDGE:
        return _hard_edge_rate(rho, k, spec.b)
    if spec.beta == 1.0:
        return math.log(rho) + _square_interior_excess(k)
    return _rectangular_rate(spec.beta, rho, k, spec.a, spec.b)


@functools.lru_cache(maxsize=4096)
def _solve(beta, rho, r):
    # rate residuals are relative to the terms summed into the rate
    ens = ChannelEnsemble(beta, rho)

    if ens.square:
        r_c = critical_rate(rho)
        if r > r_c:
            k_c = critical_k(rho)
            log_rho = math.log(rho)

            def residual(k):
                return _relative_residual(
                    (_square_interior_excess(k), log_rho), r)

            lo, hi = grow_bracket(residual, k_c, max(k_c, 1.0), stage='rate')
            k = find_root(residual, lo, hi, stage='rate')
            a, b = square_interior_support(rho, k)
            return ConstrainedSpectrum(Regime.INTERIOR, max(a, 0.0), b, k,
                                       beta, rho, r)

        def residual(u):
            b = math.exp(u)
            return _relative_residual(
                _hard_edge_rate_terms(rho, _hard_edge_k(rho, b), b), r)

        anchor = math.log(4.0 + 4.0 / math.sqrt(rho))
        if r == r_c:
            u = anchor
        else:
            lo, hi = grow_bracket(residual, anchor, -1.0, stage='rate')
            u = find_root(residual, lo, hi, stage='rate')
        b = math.exp(u)
        return ConstrainedSpectrum(Regime.HARD_EDGE, 0.0, b,
                                   _hard_edge_k(rho, b), beta, rho, r)

    def residual(k):
        a, b = _rectangular_support(beta, rho, k)
        return _relative_residual(_rectangular_rate_terms(beta, rho, k, a, b), r)

    at_zero = residual(0.0)
    if at_zero == 0:
        k = 0.0
    else:
        if at_zero < 0:
            width = max(math.exp(min(r, 700.0)) / rho, 0.1)
        else:
            width = -beta / r
        lo, hi = grow_bracket(residual, 0.0, width, stage='rate')
        k = find_root(residual, lo, hi, stage='rate')
    a, b = _rectangular_support(beta, rho, k)
    logger.debug('solved beta=%g rho=%g r=%g: a=%g b=%g k=%g',
                 beta, rho, r, a, b, k)
    return ConstrainedSpectrum(Regime.INTERIOR, a, b, k, beta, rho, r)


def solve_constrained(ens, r):
    """
    Solve for the unique equilibrium density whose rate is ``r``.

    :param ChannelEnsemble ens: The ensemble.
    :param float r: Rate in nats per transmit antenna, ``r > 0``.
    :rtype: ConstrainedSpectrum
    :raises DomainError: if ``r <= 0``.
    :raises ConvergenceError: if a nested solve misses its tolerance.
    """
    if not r > 0:
        raise DomainError('rate must be positive, got %r' % r)
    return _solve(ens.beta, ens.rho, float(r))


def density_at(spec, x):
    """
    Evaluate the equilibrium density; zero outside ``(a, b)`` and ``inf`` at
    ``x = 0`` on the hard-edge branch.
    """
    x = np.asarray(x, dtype=float)
    a, b, rho, k = spec.a, spec.b, spec.rho, spec.k
    inside = (x > a) & (x < b)
    xc = np.clip(x, a, b)
    with np.errstate(divide='ignore', invalid='ignore'):
        if spec.regime is Regime.HARD_EDGE:
            level = 1.0 - k * rho / math.sqrt(1.0 + rho * b)
            p = (np.sqrt(b - xc) * (rho * xc + level)
                 / (2.0 * np.pi * (1.0 + rho * xc) * np.sqrt(xc)))
        elif spec.beta == 1.0:
            p = rho * np.sqrt((b - xc) * (xc - a)) / (2.0 * np.pi * (1.0 + rho * xc))
        else:
            repel = (spec.beta - 1.0) / math.sqrt(a * b)
            p = (np.sqrt((b - xc) * (xc - a)) * (rho * xc + repel)
                 / (2.0 * np.pi * xc * (1.0 + rho * xc)))
    p = np.where(inside, p, 0.0)
    if spec.regime is Regime.HARD_EDGE:
        p = np.where(x == 0.0, np.inf, p)
    return float(p) if p.ndim == 0 else p


def _cdf_scalar(spec, x, quadrature):
    a, b = spec.a, spec.b
    if x <= a:
        return 0.0
    if x >= b:
        return 1.0
    opts = dict(epsabs=quadrature.abs_tol, epsrel=0.0, limit=quadrature.max_depth)
    if spec.regime is Regime.HARD_EDGE:
        # x = u**2 absorbs the 1/sqrt(x) divergence
        rho, b = spec.rho, spec.b
        level = 1.0 - spec.k * rho / math.sqrt(1.0 + rho * b)

        def integrand(u):
            v = u * u
            return (math.sqrt(max(b - v, 0.0)) * (rho * v + level)
                    / (math.pi * (1.0 + rho * v)))

        value, _ = quad(integrand, 0.0, math.sqrt(x), **opts)
    else:
        # x = a + (b - a) sin(t)**2 removes both square-root edges
        delta = b - a

        def integrand(t):
            st, ct = math.sin(t), math.cos(t)
            return 2.0 * delta * st * ct * density_at(spec, a + delta * st * st)

        value, _ = quad(integrand, 0.0, math.asin(math.sqrt((x - a) / delta)),
                        **opts)
    return min(max(value, 0.0), 1.0)


def cdf_at(spec, x, quadrature=DEFAULT_QUADRATURE):
    """
    Cumulative distribution of the equilibrium density by adaptive quadrature.
    """
    if np.ndim(x) == 0:
        return _cdf_scalar(spec, float(x), quadrature)
    return np.array([_cdf_scalar(spec, float(v), quadrature)
                     for v in np.ravel(x)]).reshape(np.shape(x))
