"""
Monte Carlo ground truth for i.i.d. Rayleigh channels.

Trials are split statically over ``streams`` independent Philox generators
derived from ``(seed, stream index)``. Each stream fills a private
:class:`McAccumulator`; the accumulators are merged in stream order and keep
their samples sorted, so the merged contents depend only on
``(seed, streams, trials)`` and never on scheduling.
"""
import concurrent.futures
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .distribution import Method, OutageResult
from .errors import DomainError, InsufficientSamplesError
from .spectrum import ChannelEnsemble
from .utils.linalg import cholesky_logdet, hermitian_eigenvalues


logger = logging.getLogger(__name__)

MIN_ACCEPTED = 100
MIN_EIGENVALUES = 10000
MIN_HITS = 10


@dataclass(frozen=True)
class McConfig:
    """
    :param int n: Transmit antennas ``N``.
    :param int m: Receive antennas ``M >= N``.
    :param float rho: Linear SNR.
    :param int trials: Channel draws in total.
    :param int seed: Root seed of every stream.
    :param int streams: Independent generator streams.
    :param int jobs: Worker processes running the streams.
    :param int batch: Channels drawn per vectorized step.
    """
    n: int
    m: int
    rho: float
    trials: int
    seed: int = 0
    streams: int = 1
    jobs: int = 1
    batch: int = 4096

    def __post_init__(self):
        if not self.m >= self.n >= 1:
            raise DomainError('need m >= n >= 1, got n=%r m=%r' % (self.n, self.m))
        if not self.rho > 0:
            raise DomainError('rho must be positive, got %r' % self.rho)
        if self.trials < 1:
            raise DomainError('trials must be >= 1, got %r' % self.trials)
        if self.streams < 1:
            raise DomainError('streams must be >= 1, got %r' % self.streams)
        if self.jobs < 1 or self.batch < 1:
            raise DomainError('jobs and batch must be >= 1')

    @property
    def ensemble(self):
        return ChannelEnsemble(self.m / self.n, self.rho)

    def stream_trials(self):
        base, extra = divmod(self.trials, self.streams)
        return [base + (1 if i < extra else 0) for i in range(self.streams)]


@dataclass
class McAccumulator:
    """
    Sorted mutual-information samples (total nats, not per antenna) and the
    pooled eigenvalues of ``H^H H`` over trials with ``I_N <= N r`` for each
    conditioning rate ``r``.
    """
    count: int = 0
    samples: np.ndarray = field(default_factory=lambda: np.empty(0))
    eigenvalues: Dict[float, np.ndarray] = field(default_factory=dict)
    accepted: Dict[float, int] = field(default_factory=dict)

    def merge(self, other):
        eigenvalues = {}
        accepted = {}
        for key in sorted(set(self.eigenvalues) | set(other.eigenvalues)):
            eigenvalues[key] = np.sort(np.concatenate([
                self.eigenvalues.get(key, np.empty(0)),
                other.eigenvalues.get(key, np.empty(0)),
            ]))
            accepted[key] = self.accepted.get(key, 0) + other.accepted.get(key, 0)
        return McAccumulator(
            count=self.count + other.count,
            samples=np.sort(np.concatenate([self.samples, other.samples])),
            eigenvalues=eigenvalues,
            accepted=accepted,
        )

    def mean(self):
        return float(np.mean(self.samples))

    def variance(self):
        return float(np.var(self.samples, ddof=1)) if self.count > 1 else 0.0

    def fraction_below(self, total):
        """
        Fraction of samples with ``I_N <= total``.
        """
        return np.searchsorted(self.samples, total, side='right') / self.count


def stream_generator(seed, index):
    """
    Counter-based generator for stream ``index`` of ``seed``.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(sequence))


def sample_channel(gen, n, m, size=None):
    """
    ``m x n`` channel (or ``size`` of them) with i.i.d. ``CN(0, 1/n)`` entries.
    """
    shape = (m, n) if size is None else (size, m, n)
    scale = 1.0 / math.sqrt(2.0 * n)
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) * scale


def _gram(h):
    return np.conj(np.swapaxes(h, -1, -2)) @ h


def mutual_information(h, rho):
    """
    ``log det(I + rho H^H H)`` in nats through a Cholesky factorization.

    :raises NumericalError: on non-finite ``h``.
    """
    h = np.asarray(h)
    eye = np.eye(h.shape[-1])
    return cholesky_logdet(eye + rho * _gram(h))


def _run_stream(cfg, index, trials, thresholds):
    gen = stream_generator(cfg.seed, index)
    samples = []
    pooled = {r: [] for r in thresholds}
    accepted = dict.fromkeys(thresholds, 0)
    left = trials
    while left > 0:
        size = min(cfg.batch, left)
        h = sample_channel(gen, cfg.n, cfg.m, size)
        mi = mutual_information(h, cfg.rho)
        samples.append(mi)
        for r in thresholds:
            mask = mi <= cfg.n * r
            hits = int(np.count_nonzero(mask))
            if hits:
                accepted[r] += hits
                pooled[r].append(hermitian_eigenvalues(_gram(h[mask])).ravel())
        left -= size
    return McAccumulator(
        count=trials,
        samples=np.sort(np.concatenate(samples)) if samples else np.empty(0),
        eigenvalues={r: np.sort(np.concatenate(pooled[r])) if pooled[r]
                     else np.empty(0) for r in thresholds},
        accepted=accepted,
    )


def run(cfg, thresholds=()):
    """
    Draw ``cfg.trials`` channels and return the merged accumulator.

    :param thresholds: Conditioning rates (nats per antenna) for which the
        eigenvalues of accepted trials are pooled.
    """
    thresholds = tuple(sorted(set(float(r) for r in thresholds)))
    tasks = [(i, t) for i, t in enumerate(cfg.stream_trials()) if t > 0]
    results = {}
    if cfg.jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=min(cfg.jobs, len(tasks))) as executor:
            futures = {
                executor.submit(_run_stream, cfg, i, t, thresholds): i
                for i, t in tasks
            }
            for future in concurrent.futures.as_completed(futures):
                results[futures[future]] = future.result()
    else:
        for i, t in tasks:
            results[i] = _run_stream(cfg, i, t, thresholds)

    acc = functools.reduce(McAccumulator.merge,
                           [results[i] for i in sorted(results)],
                           McAccumulator(eigenvalues={r: np.empty(0) for r in thresholds},
                                         accepted=dict.fromkeys(thresholds, 0)))
    for r in thresholds:
        logger.info('r=%g: accepted %d of %d trials (%.3g)', r,
                    acc.accepted[r], acc.count, acc.accepted[r] / acc.count)
    return acc


def empirical_outage(cfg, r_grid, acc=None):
    """
    Fraction of trials with ``I_N <= N r`` for every rate in ``r_grid``, with
    binomial standard errors.

    :returns: list of :class:`OutageResult` tagged ``mc``.
    """
    if acc is None:
        acc = run(cfg)
    ens = cfg.ensemble
    results = []
    for r in np.atleast_1d(r_grid):
        p = float(acc.fraction_below(cfg.n * r))
        stderr = math.sqrt(p * (1.0 - p) / acc.count)
        log_p = math.log(p) if p > 0 else -math.inf
        results.append(OutageResult.from_log(Method.MC, cfg.n, ens, r, log_p,
                                             stderr=stderr))
    smallest = min((res.p_out for res in results if res.p_out > 0), default=0.0)
    if smallest * acc.count < MIN_HITS:
        logger.warning('smallest outage %.3g has fewer than %d hits in %d trials',
                       smallest, MIN_HITS, acc.count)
    return results


def conditioned_spectrum(cfg, r, acc=None):
    """
    Pooled eigenvalues of ``H^H H`` over trials with ``I_N <= N r``, sorted;
    the empirical CDF at ``x`` is ``searchsorted(values, x) / len(values)``.

    :raises InsufficientSamplesError: if fewer than 100 trials are accepted.
    """
    r = float(r)
    if acc is None or r not in acc.eigenvalues:
        acc = run(cfg, thresholds=(r,))
    accepted = acc.accepted[r]
    if accepted < MIN_ACCEPTED:
        raise InsufficientSamplesError(
            'only %d of %d trials satisfy I_N <= %g' % (accepted, acc.count, cfg.n * r),
            accepted=accepted, trials=acc.count)
    values = acc.eigenvalues[r]
    if values.size < MIN_EIGENVALUES:
        logger.warning('conditioned CDF at r=%g rests on %d eigenvalues', r, values.size)
    return values


def empirical_pdf(acc, n, r_grid):
    """
    Histogram density of ``I_N / N`` on cells centred on ``r_grid``.

    Cell edges sit halfway between neighbouring grid points; the outer cells
    mirror their inner half-width.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size < 2:
        raise DomainError('empirical_pdf needs at least two grid points')
    mid = 0.5 * (r_grid[1:] + r_grid[:-1])
    edges = np.concatenate([[2 * r_grid[0] - mid[0]], mid,
                            [2 * r_grid[-1] - mid[-1]]])
    counts = np.diff(np.searchsorted(acc.samples / n, edges, side='right'))
    return counts / (acc.count * np.diff(edges))
