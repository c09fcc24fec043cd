"""
Reference curves the large-deviations results are compared against.
"""
import math
from dataclasses import dataclass

from . import distribution, energy
from .errors import DomainError
from .specfun import log_q_signed


@dataclass(frozen=True)
class ErgodicStats:
    u: float
    r_erg: float
    v_erg: float


@dataclass(frozen=True)
class TailExponents:
    high_rate: float
    low_rate: float


def ergodic_stats(ens):
    """
    Ergodic rate per antenna and the asymptotic variance of the total mutual
    information.
    """
    beta, rho = ens.beta, ens.rho
    w = 1.0 + rho * (beta - 1.0)
    u = 0.5 * (w + math.sqrt(w * w + 4.0 * rho))
    r_erg = math.log(u) + beta * math.log1p(rho / u) - (1.0 - 1.0 / u)
    v_erg = -math.log1p(-(1.0 - u) ** 2 / (beta * u * u))
    return ErgodicStats(u=u, r_erg=r_erg, v_erg=v_erg)


def gaussian_outage(ens, n, r):
    """
    Outage under the Gaussian approximation of ``I_N``; positive even at
    ``r = 0``.
    """
    if n < 1:
        raise DomainError('n must be >= 1, got %r' % n)
    stats = ergodic_stats(ens)
    z = n * (stats.r_erg - r) / math.sqrt(stats.v_erg)
    return distribution.OutageResult.from_log('gaussian', n, ens, r,
                                              log_q_signed(z))


def dmt_exponent(beta, q):
    """
    Diversity exponent ``(1 - q)(beta - q)`` at multiplexing fraction ``q``.
    """
    if not 0 < q < 1:
        raise DomainError('q must lie in (0, 1), got %r' % q)
    return (1.0 - q) * (beta - q)


def dmt_outage(ens, n, r):
    """
    ``rho ** (-N**2 (1 - q)(beta - q))`` with ``q = r / log rho``; one at and
    beyond full multiplexing.
    """
    if not ens.rho > 1:
        raise DomainError('DMT outage needs rho > 1, got %r' % ens.rho)
    q = r / math.log(ens.rho)
    if q >= 1:
        log_p = 0.0
    else:
        log_p = -n * n * dmt_exponent(ens.beta, q) * math.log(ens.rho)
    return distribution.OutageResult.from_log('dmt', n, ens, r, log_p)


def trt_log2_outage(n, m, rho, r_bits_total):
    """
    Piecewise-linear large-SNR outage in base 2.

    The segment index is ``k`` with ``k log2(rho) < R <= (k + 1) log2(rho)``,
    clipped to ``[0, n - 1]``, so a breakpoint belongs to the lower segment.

    :param float r_bits_total: Total rate ``R`` in bits per channel use.
    :returns: ``log2 P_out``.
    """
    if not m >= n >= 1:
        raise DomainError('need m >= n >= 1, got n=%r m=%r' % (n, m))
    if not rho > 1:
        raise DomainError('TRT needs log2(rho) > 0, got rho=%r' % rho)
    log2_rho = math.log2(rho)
    k = int(math.ceil(r_bits_total / log2_rho)) - 1
    k = min(max(k, 0), n - 1)
    c = m + n - 2 * k - 1
    g = m * n - k * (k + 1)
    return c * r_bits_total - g * log2_rho


def tail_exponents(ens, r):
    """
    Exponent asymptotes far above (``e**r / rho``) and far below
    (``-beta log(e r / (beta rho))``) the ergodic rate.
    """
    if not r > 0:
        raise DomainError('rate must be positive, got %r' % r)
    beta, rho = ens.beta, ens.rho
    return TailExponents(
        high_rate=math.exp(r) / rho,
        low_rate=-beta * (1.0 + math.log(r / (beta * rho))),
    )


def s_erg_asymptote(beta, rho):
    if beta == 1:
        return -2.0 / math.log(rho) ** 3
    return -1.0 / (beta * (beta - 1.0) * math.log1p(-1.0 / beta) ** 3)


def gaussian_validity_width(ens, n):
    """
    Rate half-width ``(6 / |s_erg|)**(1/3) N**(-2/3)`` around ``r_erg`` inside
    which the cubic term of the exponent stays below one.
    """
    s = energy.s_erg(ens)
    if s == 0:
        return math.inf
    return (6.0 / abs(s)) ** (1.0 / 3.0) * n ** (-2.0 / 3.0)
