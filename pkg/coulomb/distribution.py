"""
Large-deviations density and outage probability of the mutual information.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import baselines, energy
from .errors import DomainError
from .specfun import log_q_signed, q_fun_log


logger = logging.getLogger(__name__)

# exp() of anything below this is not representable as a normal double
UNDERFLOW_LOG = -700.0
# |r - r_erg| / sqrt(v_erg) below which the Gaussian limit replaces Watson's
PEAK_WIDTH = 1e-3
LN10 = math.log(10.0)


class Method(enum.Enum):
    LD = 'ld'
    GAUSSIAN = 'gaussian'
    TRT = 'trt'
    DMT = 'dmt'
    MC = 'mc'
    LD_CORRECTED = 'ld-corrected'


@dataclass(frozen=True)
class OutageResult:
    """
    One outage probability. When ``underflow`` is set, ``p_out`` is 0 and
    only ``log10_p_out`` carries the value.
    """
    n: int
    m: int
    rho: float
    r: float
    p_out: float
    log10_p_out: float
    method: Method
    underflow: bool = False
    stderr: Optional[float] = None

    @classmethod
    def from_log(cls, method, n, ens, r, log_p, stderr=None):
        """
        Build a result from a natural-log probability.
        """
        log_p = min(float(log_p), 0.0)
        underflow = log_p < UNDERFLOW_LOG
        return cls(
            n=int(n),
            m=int(round(ens.beta * n)),
            rho=ens.rho,
            r=float(r),
            p_out=0.0 if underflow else math.exp(log_p),
            log10_p_out=log_p / LN10,
            method=Method(method),
            underflow=underflow,
            stderr=stderr,
        )


def _check(n, r):
    if n < 1:
        raise DomainError('n must be >= 1, got %r' % n)
    if not r > 0:
        raise DomainError('rate must be positive, got %r' % r)


def _log_peak(n, v_erg):
    return math.log(n / math.sqrt(2.0 * math.pi * v_erg))


def ld_log_pdf(ens, n, r):
    """
    ``log P_N(r)``: the log-normalization ``log(N / sqrt(2 pi v_erg))`` minus
    ``N**2 (E1(r) - E0)``.
    """
    _check(n, r)
    stats = baselines.ergodic_stats(ens)
    return _log_peak(n, stats.v_erg) - n * n * energy.exponent(ens, r).exponent


def ld_pdf(ens, n, r):
    return math.exp(ld_log_pdf(ens, n, r))


def gaussian_pdf(ens, n, r):
    """
    The quadratic-exponent density centered at ``r_erg`` with variance
    ``v_erg / N**2``.
    """
    stats = baselines.ergodic_stats(ens)
    d = np.asarray(r, dtype=float) - stats.r_erg
    value = np.exp(_log_peak(n, stats.v_erg) - n * n * d * d / (2.0 * stats.v_erg))
    return float(value) if value.ndim == 0 else value


def ld_outage(ens, n, r):
    """
    Outage probability ``P(I_N <= N r)`` from the exponent by Watson's lemma.

    Within ``1e-3 sqrt(v_erg)`` of the ergodic rate the Gaussian limit
    ``Q(N (r_erg - r) / sqrt(v_erg))`` is used instead; there the exponent
    derivatives are too small to carry the expansion.

    :rtype: OutageResult
    """
    _check(n, r)
    stats = baselines.ergodic_stats(ens)
    spread = math.sqrt(stats.v_erg)
    if abs(r - stats.r_erg) <= PEAK_WIDTH * spread:
        log_p = log_q_signed(n * (stats.r_erg - r) / spread)
        return OutageResult.from_log(Method.LD, n, ens, r, log_p)

    point = energy.exponent(ens, r)
    curvature = point.e1_second
    log_tail = (-n * n * (point.exponent - point.k ** 2 / (2.0 * curvature))
                + q_fun_log(n * abs(point.k) / math.sqrt(curvature))
                - 0.5 * math.log(curvature * stats.v_erg))
    if r < stats.r_erg:
        log_p = log_tail
    else:
        tail = math.exp(min(log_tail, 0.0))
        log_p = math.log1p(-tail) if tail < 1 else -math.inf
    return OutageResult.from_log(Method.LD, n, ens, r, log_p)


def correction_bracket(ens, n, r, s3, s_erg=None):
    """
    Finite-N correction factor of the density,
    ``1 - s3/(2 v**2) d + N**2/6 (s3/v**3 + s_erg) d**3`` with
    ``d = r - r_erg``, before clamping.
    """
    stats = baselines.ergodic_stats(ens)
    if s_erg is None:
        s_erg = energy.s_erg(ens)
    v = stats.v_erg
    d = np.asarray(r, dtype=float) - stats.r_erg
    linear = s3 / (2.0 * v * v)
    cubic = n * n / 6.0 * (s3 / v ** 3 + s_erg)
    return 1.0 - linear * d + cubic * d ** 3


def _check_s3(ens, n, s3, s_erg):
    stats = baselines.ergodic_stats(ens)
    v = stats.v_erg
    window = 3.0 * math.sqrt(v) / n
    linear = s3 / (2.0 * v * v)
    cubic = n * n / 6.0 * (s3 / v ** 3 + s_erg)
    candidates = [-window, window]
    if cubic != 0 and linear / (3.0 * cubic) > 0:
        turn = math.sqrt(linear / (3.0 * cubic))
        candidates.extend(d for d in (-turn, turn) if abs(d) <= window)
    worst = min(1.0 - linear * d + cubic * d ** 3 for d in candidates)
    if worst < 0:
        raise DomainError(
            'correction with s3=%g turns negative within %.3g of r_erg; '
            'check s3' % (s3, window))


def corrected_pdf(ens, n, r, s3, s_erg=None):
    """
    ``ld_pdf`` times the clamped finite-N correction bracket.

    :param float s3: Third cumulant coefficient of ``I_N``, supplied by the
        caller.
    :param float s_erg: Overrides the numerically computed third derivative of
        the exponent at ``r_erg``.
    :raises DomainError: if the bracket goes negative close to the peak.
    """
    _check(n, r)
    if s_erg is None:
        s_erg = energy.s_erg(ens)
    _check_s3(ens, n, s3, s_erg)
    bracket = float(correction_bracket(ens, n, r, s3, s_erg))
    return max(bracket, 0.0) * ld_pdf(ens, n, r)
