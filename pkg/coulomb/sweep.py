"""
Sweeps: evaluate one quantity over a grid with several methods and write the
result as a table, one row per grid point and method.

Settings come as parsed values (see :func:`coulomb.parser.parse_value`) from
three layers: :data:`DEFAULTS`, a configuration file and command-line flags.
"""
import concurrent.futures
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import baselines, distribution, energy, montecarlo, spectrum
from .errors import CoulombError, SweepSyntaxError
from .parser import Call, parse_value
from .tokenise import tokenise


logger = logging.getLogger(__name__)

QUANTITIES = ('density', 'cdf', 'exponent', 'pdf', 'outage-vs-rate',
              'outage-vs-snr', 'serg-vs-snr')
METHODS = ('ld', 'gaussian', 'trt', 'dmt', 'mc', 'ld-corrected', 'asymptote')
UNITS = ('nats-per-antenna', 'bits-total')
SCALES = ('linear', 'log', 'db')
FORMATS = ('csv', 'json')
COLUMNS = ('method', 'x', 'n', 'm', 'rho_db', 'r_nats_per_antenna',
           'R_bits_total', 'value', 'log10_value', 'stderr', 'status')

SNR_QUANTITIES = ('outage-vs-snr', 'serg-vs-snr')
RATE_QUANTITIES = ('exponent', 'pdf', 'outage-vs-rate')
SPECTRAL_QUANTITIES = ('density', 'cdf')

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

LN2 = math.log(2.0)
LOG10_2 = math.log10(2.0)

# Keys whose values are taken verbatim rather than parsed.
RAW_KEYS = ('out',)

DEFAULTS = {
    'quantity': 'outage-vs-rate',
    'methods': ['ld', 'gaussian'],
    'ntx': 2,
    'nrx': 2,
    'snr-db': 10,
    'rate': None,
    'rate-units': 'nats-per-antenna',
    'grid': Call('linear', (0.5, 4, 8)),
    'trials': None,
    'seed': 0,
    'streams': 1,
    'jobs': 1,
    'format': 'csv',
    'out': '-',
    's3': None,
}


def to_bits_total(r, n):
    """
    Nats per transmit antenna to total bits per channel use.
    """
    return n * r / LN2


def to_nats_per_antenna(r_bits_total, n):
    return r_bits_total * LN2 / n


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(rho):
    return 10.0 * math.log10(rho)


@dataclass(frozen=True)
class Grid:
    """
    ``points`` values from ``start`` to ``stop``; ``db`` spaces them evenly in
    decibels and yields linear values.
    """
    start: float
    stop: float
    points: int
    scale: str = 'linear'

    def values(self):
        if self.scale == 'log':
            return np.geomspace(self.start, self.stop, self.points)
        values = np.linspace(self.start, self.stop, self.points)
        if self.scale == 'db':
            return db_to_linear(values)
        return values


@dataclass(frozen=True)
class McSettings:
    trials: int
    seed: int = 0
    streams: int = 1


@dataclass(frozen=True)
class SweepSpec:
    """
    :param str quantity: One of :data:`QUANTITIES`.
    :param tuple methods: Names from :data:`METHODS`.
    :param Grid grid: The swept axis: eigenvalue ``x`` for spectral
        quantities, SNR for ``*-vs-snr`` and the rate otherwise.
    :param tuple n_rx: One table series per receive antenna count.
    :param tuple rates: Fixed rates (in ``units``) for spectral and
        ``outage-vs-snr`` sweeps.
    """
    quantity: str
    methods: Tuple[str, ...]
    grid: Grid
    n_tx: int = 2
    n_rx: Tuple[int, ...] = (2,)
    snr_db: float = 10.0
    rates: Tuple[float, ...] = ()
    units: str = 'nats-per-antenna'
    mc: Optional[McSettings] = None
    s3: Optional[float] = None
    jobs: int = 1

    def effective_methods(self):
        if self.quantity == 'serg-vs-snr':
            return ('ld', 'asymptote')
        return tuple(self.methods)


# -- configuration ----------------------------------------------------------

def load_config(source):
    """
    Parse a configuration file's text into a settings dict.

    :raises SweepSyntaxError: on malformed statements or unknown keys.
    """
    settings = {}
    for token in tokenise(source):
        if token.key not in DEFAULTS:
            raise SweepSyntaxError('unknown setting %r' % token.key,
                                   line=token.line, col=token.col)
        if token.key in RAW_KEYS:
            settings[token.key] = token.content
        else:
            settings[token.key] = parse_value(token.content, line=token.line)
    return settings


def parse_setting(key, text):
    if key in RAW_KEYS:
        return text
    return parse_value(text)


def _as_list(value):
    return list(value) if isinstance(value, list) else [value]


def _number(key, value, cast=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SweepSyntaxError('%s: expected a number, got %r' % (key, value))
    if cast is int and int(value) != value:
        raise SweepSyntaxError('%s: expected an integer, got %r' % (key, value))
    return cast(value)


def _name(key, value):
    if not isinstance(value, str):
        raise SweepSyntaxError('%s: expected a name, got %r' % (key, value))
    return value


def _grid(value):
    if not isinstance(value, Call):
        raise SweepSyntaxError('grid: expected linear(...), log(...) or db(...)')
    if value.name not in SCALES:
        raise SweepSyntaxError('grid: unknown scale %r' % value.name)
    if len(value.args) != 3:
        raise SweepSyntaxError('grid: %s() takes start, stop, points' % value.name)
    start, stop, points = value.args
    return Grid(_number('grid', start), _number('grid', stop),
                _number('grid', points, int), value.name)


def build_spec(settings):
    """
    Turn merged settings into a :class:`SweepSpec`.

    :raises SweepSyntaxError: if a value has the wrong shape.
    """
    merged = dict(DEFAULTS)
    merged.update(settings)
    mc = None
    if merged['trials'] is not None:
        mc = McSettings(
            trials=_number('trials', merged['trials'], int),
            seed=_number('seed', merged['seed'], int),
            streams=_number('streams', merged['streams'], int),
        )
    rates = () if merged['rate'] is None else tuple(
        _number('rate', r) for r in _as_list(merged['rate']))
    return SweepSpec(
        quantity=_name('quantity', merged['quantity']),
        methods=tuple(_name('methods', m) for m in _as_list(merged['methods'])),
        grid=_grid(merged['grid']),
        n_tx=_number('ntx', merged['ntx'], int),
        n_rx=tuple(_number('nrx', m, int) for m in _as_list(merged['nrx'])),
        snr_db=_number('snr-db', merged['snr-db']),
        rates=rates,
        units=_name('rate-units', merged['rate-units']),
        mc=mc,
        s3=None if merged['s3'] is None else _number('s3', merged['s3']),
        jobs=_number('jobs', merged['jobs'], int),
    )


# -- method library ---------------------------------------------------------

class Library(object):
    """
    Evaluators keyed by ``(quantity, method)``.
    """

    def __init__(self):
        self._evaluators = {}

    @property
    def evaluators(self):
        return self._evaluators

    def register(self, method, *quantities):
        def decorator(func):
            for quantity in quantities:
                self._evaluators[(quantity, method)] = func
            # Allows use as decorator
            return func
        return decorator

    def unregister(self, quantity, method):
        self._evaluators.pop((quantity, method), None)

    def methods(self, quantity):
        return sorted(m for q, m in self._evaluators if q == quantity)

    def lookup(self, quantity, method):
        try:
            return self._evaluators[(quantity, method)]
        except KeyError:
            raise SweepSyntaxError('method %r is not available for %r'
                                   % (method, quantity))


library = Library()


@dataclass(frozen=True)
class Point:
    """
    One grid point of one series. ``r`` is in nats per antenna, ``x`` is the
    abscissa as written to the table, ``axis`` the series' grid in the units
    the evaluators need.
    """
    index: int
    ens: spectrum.ChannelEnsemble
    n: int
    rho: float
    r: Optional[float]
    x: float
    axis: Tuple[float, ...]
    position: int

    @property
    def m(self):
        return int(round(self.ens.beta * self.n))


@dataclass(frozen=True)
class Value:
    value: float
    log10: Optional[float] = None
    stderr: Optional[float] = None


class Context(object):
    """
    Per-run state shared by the evaluators; Monte Carlo accumulators are
    cached per channel, SNR and conditioning rate.
    """

    def __init__(self, spec):
        self.spec = spec
        self._accumulators = {}

    def mc_config(self, point):
        mc = self.spec.mc
        return montecarlo.McConfig(
            n=point.n, m=point.m, rho=point.ens.rho, trials=mc.trials,
            seed=mc.seed, streams=mc.streams, jobs=self.spec.jobs)

    def accumulator(self, point, thresholds=()):
        key = (point.n, point.m, point.ens.rho, tuple(thresholds))
        if key not in self._accumulators:
            logger.info('monte carlo: n=%d m=%d rho=%g, %d trials',
                        point.n, point.m, point.ens.rho, self.spec.mc.trials)
            self._accumulators[key] = montecarlo.run(self.mc_config(point),
                                                     thresholds)
        return self._accumulators[key]


def _outage_value(result):
    return Value(result.p_out, result.log10_p_out, result.stderr)


def _cell(point):
    axis, i = point.axis, point.position
    lo = axis[i] - 0.5 * (axis[i + 1] - axis[i]) if i == 0 else 0.5 * (axis[i - 1] + axis[i])
    hi = axis[i] + 0.5 * (axis[i] - axis[i - 1]) if i == len(axis) - 1 else 0.5 * (axis[i] + axis[i + 1])
    return lo, hi


@library.register('ld', 'density')
def density_ld(point, ctx):
    spec = spectrum.solve_constrained(point.ens, point.r)
    return Value(spectrum.density_at(spec, point.x))


@library.register('ld', 'cdf')
def cdf_ld(point, ctx):
    spec = spectrum.solve_constrained(point.ens, point.r)
    return Value(spectrum.cdf_at(spec, point.x))


@library.register('mc', 'density')
def density_mc(point, ctx):
    values = montecarlo.conditioned_spectrum(
        ctx.mc_config(point), point.r, ctx.accumulator(point, (point.r,)))
    lo, hi = _cell(point)
    count = np.searchsorted(values, hi) - np.searchsorted(values, lo)
    return Value(count / (values.size * (hi - lo)))


@library.register('mc', 'cdf')
def cdf_mc(point, ctx):
    values = montecarlo.conditioned_spectrum(
        ctx.mc_config(point), point.r, ctx.accumulator(point, (point.r,)))
    return Value(np.searchsorted(values, point.x, side='right') / values.size)


@library.register('ld', 'exponent')
def exponent_ld(point, ctx):
    return Value(energy.exponent(point.ens, point.r).exponent)


@library.register('gaussian', 'exponent')
def exponent_gaussian(point, ctx):
    stats = baselines.ergodic_stats(point.ens)
    return Value((point.r - stats.r_erg) ** 2 / (2.0 * stats.v_erg))


@library.register('dmt', 'exponent')
def exponent_dmt(point, ctx):
    log_rho = math.log(point.ens.rho)
    q = point.r / log_rho
    if q >= 1:
        return Value(0.0)
    return Value(baselines.dmt_exponent(point.ens.beta, q) * log_rho)


@library.register('ld', 'pdf')
def pdf_ld(point, ctx):
    log_p = distribution.ld_log_pdf(point.ens, point.n, point.r)
    return Value(math.exp(log_p), log_p / math.log(10.0))


@library.register('gaussian', 'pdf')
def pdf_gaussian(point, ctx):
    return Value(distribution.gaussian_pdf(point.ens, point.n, point.r))


@library.register('ld-corrected', 'pdf')
def pdf_ld_corrected(point, ctx):
    return Value(distribution.corrected_pdf(point.ens, point.n, point.r,
                                            ctx.spec.s3))


@library.register('mc', 'pdf')
def pdf_mc(point, ctx):
    density = montecarlo.empirical_pdf(ctx.accumulator(point), point.n,
                                       point.axis)
    return Value(float(density[point.position]))


@library.register('ld', 'outage-vs-rate', 'outage-vs-snr')
def outage_ld(point, ctx):
    return _outage_value(distribution.ld_outage(point.ens, point.n, point.r))


@library.register('gaussian', 'outage-vs-rate', 'outage-vs-snr')
def outage_gaussian(point, ctx):
    return _outage_value(baselines.gaussian_outage(point.ens, point.n, point.r))


@library.register('dmt', 'outage-vs-rate', 'outage-vs-snr')
def outage_dmt(point, ctx):
    return _outage_value(baselines.dmt_outage(point.ens, point.n, point.r))


@library.register('trt', 'outage-vs-rate', 'outage-vs-snr')
def outage_trt(point, ctx):
    log2_p = min(baselines.trt_log2_outage(
        point.n, point.m, point.ens.rho, to_bits_total(point.r, point.n)), 0.0)
    return Value(2.0 ** log2_p, log2_p * LOG10_2)


@library.register('mc', 'outage-vs-rate', 'outage-vs-snr')
def outage_mc(point, ctx):
    result, = montecarlo.empirical_outage(ctx.mc_config(point), [point.r],
                                          ctx.accumulator(point))
    return _outage_value(result)


@library.register('ld', 'serg-vs-snr')
def serg_ld(point, ctx):
    return Value(energy.s_erg(point.ens))


@library.register('asymptote', 'serg-vs-snr')
def serg_asymptote(point, ctx):
    return Value(baselines.s_erg_asymptote(point.ens.beta, point.ens.rho))


# -- validation -------------------------------------------------------------

def _snr_values(spec):
    if spec.quantity in SNR_QUANTITIES:
        return spec.grid.values()
    return db_to_linear([spec.snr_db])


def validate(spec):
    """
    Every problem with ``spec``; an empty list means it can be run.
    """
    try:
        return _validate(spec)
    except Exception as e:
        return ['invalid sweep: %s' % e]


def _validate(spec):
    problems = []
    if spec.quantity not in QUANTITIES:
        problems.append('unknown quantity %r (choose from %s)'
                        % (spec.quantity, ', '.join(QUANTITIES)))
        return problems
    methods = spec.effective_methods()
    if not methods:
        problems.append('no methods requested')
    for method in spec.methods:
        if method not in METHODS:
            problems.append('unknown method %r' % method)
        elif method not in library.methods(spec.quantity):
            problems.append('method %r is not available for %s'
                            % (method, spec.quantity))

    grid = spec.grid
    if grid.scale not in SCALES:
        problems.append('unknown grid scale %r' % grid.scale)
    if grid.points < 2:
        problems.append('grid needs at least 2 points, got %d' % grid.points)
    if not grid.start < grid.stop:
        problems.append('grid start must be below stop')
    if grid.scale == 'log' and grid.start <= 0:
        problems.append('log grid needs a positive start')
    if spec.quantity in RATE_QUANTITIES and grid.scale != 'db' and grid.start <= 0:
        problems.append('rates must be positive')
    if spec.quantity in SPECTRAL_QUANTITIES and grid.start < 0:
        problems.append('eigenvalue grid must be non-negative')

    if spec.n_tx < 1 or not spec.n_rx or any(m < 1 for m in spec.n_rx):
        problems.append('antenna counts must be >= 1')
    if spec.units not in UNITS:
        problems.append('unknown rate units %r' % spec.units)
    if spec.quantity in SPECTRAL_QUANTITIES + ('outage-vs-snr',):
        if not spec.rates:
            problems.append('%s needs at least one rate' % spec.quantity)
    if any(r <= 0 for r in spec.rates):
        problems.append('rates must be positive')
    if spec.jobs < 1:
        problems.append('jobs must be >= 1')

    if 'mc' in methods and spec.mc is None:
        problems.append('mc settings required (give trials)')
    if spec.mc is not None:
        if 'mc' not in methods:
            problems.append('mc settings given but mc method not requested')
        if spec.mc.trials < 1 or spec.mc.streams < 1:
            problems.append('trials and streams must be >= 1')
    if 'ld-corrected' in methods and spec.s3 is None:
        problems.append('ld-corrected needs s3')
    if spec.s3 is not None and 'ld-corrected' not in methods:
        problems.append('s3 given but ld-corrected not requested')

    for method in ('trt', 'dmt'):
        if method in methods and np.min(_snr_values(spec)) <= 1:
            problems.append('%s needs log2(rho) > 0, i.e. SNR above 0 dB'
                            % method)
    return problems


# -- evaluation -------------------------------------------------------------

def rate_in_nats(spec, rate, n):
    if spec.units == 'bits-total':
        return to_nats_per_antenna(rate, n)
    return float(rate)


def expand(spec):
    """
    All grid points of ``spec`` in output order: series by receive antenna
    count (then by fixed rate), grid order within a series.
    """
    points = []
    grid = [float(v) for v in spec.grid.values()]
    rho_fixed = float(db_to_linear(spec.snr_db))

    def add(ens, n, rho, r, x, axis, position):
        points.append(Point(len(points), ens, n, rho, r, x, tuple(axis), position))

    for n_rx in spec.n_rx:
        if spec.quantity in SNR_QUANTITIES:
            for rate in (spec.rates if spec.quantity == 'outage-vs-snr' else (None,)):
                for i, rho in enumerate(grid):
                    ens, n = spectrum.normalize_ensemble(spec.n_tx, n_rx, rho)
                    r = None if rate is None else rate_in_nats(spec, rate, n)
                    add(ens, n, rho, r, linear_to_db(rho), grid, i)
        elif spec.quantity in RATE_QUANTITIES:
            ens, n = spectrum.normalize_ensemble(spec.n_tx, n_rx, rho_fixed)
            axis = [rate_in_nats(spec, v, n) for v in grid]
            for i, v in enumerate(grid):
                add(ens, n, rho_fixed, axis[i], v, axis, i)
        else:
            ens, n = spectrum.normalize_ensemble(spec.n_tx, n_rx, rho_fixed)
            for rate in spec.rates:
                r = rate_in_nats(spec, rate, n)
                for i, x in enumerate(grid):
                    add(ens, n, rho_fixed, r, x, grid, i)
    return points


def _log10(value):
    if value is None or not value > 0:
        return None
    return math.log10(value)


def _row(point, method, value, status):
    return {
        'method': method,
        'x': point.x,
        'n': point.n,
        'm': point.m,
        'rho_db': linear_to_db(point.rho),
        'r_nats_per_antenna': point.r,
        'R_bits_total': None if point.r is None else to_bits_total(point.r, point.n),
        'value': value.value,
        'log10_value': value.log10 if value.log10 is not None else _log10(value.value),
        'stderr': value.stderr,
        'status': status,
    }


def evaluate_point(point, method, ctx):
    """
    One table row; solver failures become a row with a ``failed`` status.
    """
    func = library.lookup(ctx.spec.quantity, method)
    try:
        value = func(point, ctx)
        status = 'ok'
    except (CoulombError, ArithmeticError, ValueError) as e:
        logger.warning('%s/%s failed at x=%g: %s', ctx.spec.quantity, method,
                       point.x, e)
        value, status = Value(math.nan), 'failed: %s' % e
    return _row(point, method, value, status)


def _evaluate_methods(spec, point, methods):
    ctx = Context(spec)
    return [evaluate_point(point, method, ctx) for method in methods]


def evaluate(spec):
    """
    Rows for every grid point and method, ordered by grid index and then by
    the requested method order regardless of ``jobs``.
    """
    points = expand(spec)
    methods = spec.effective_methods()
    analytic = [m for m in methods if m != 'mc']
    for method in methods:
        logger.info('%s: %s over %d points', spec.quantity, method, len(points))

    rows = {}
    if spec.jobs > 1 and len(points) > 1 and analytic:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=spec.jobs) as executor:
            futures = {
                executor.submit(_evaluate_methods, spec, point, analytic): point.index
                for point in points
            }
            for future in concurrent.futures.as_completed(futures):
                index = futures[future]
                for row in future.result():
                    rows[(index, row['method'])] = row
    else:
        for point in points:
            for row in _evaluate_methods(spec, point, analytic):
                rows[(point.index, row['method'])] = row

    if 'mc' in methods:
        ctx = Context(spec)
        for point in points:
            rows[(point.index, 'mc')] = evaluate_point(point, 'mc', ctx)

    return [rows[(point.index, method)] for point in points for method in methods]


# -- output -----------------------------------------------------------------

def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_rows(rows, stream, fmt='csv'):
    if fmt == 'csv':
        writer = csv.DictWriter(stream, fieldnames=COLUMNS, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: '' if v is None else v for k, v in row.items()})
    elif fmt == 'json':
        json.dump([{k: _json_safe(v) for k, v in row.items()} for row in rows],
                  stream, indent=2)
        stream.write('\n')
    else:
        raise ValueError('unknown format %r' % fmt)


def run(spec, output='-', fmt='csv'):
    """
    Validate, evaluate and write a sweep.

    :param str output: Path, or ``'-'`` for standard output.
    :returns: exit status: 0, 2 (invalid sweep), 3 (some grid point failed;
        the table is still written) or 4 (output not writable).
    """
    problems = validate(spec)
    if fmt not in FORMATS:
        problems.append('unknown format %r' % fmt)
    if problems:
        for problem in problems:
            logger.error(problem)
        return EXIT_CONFIG

    rows = evaluate(spec)
    try:
        if output == '-':
            write_rows(rows, sys.stdout, fmt)
        else:
            with open(output, 'w', encoding='utf-8', newline='') as stream:
                write_rows(rows, stream, fmt)
    except OSError as e:
        logger.error('cannot write %s: %s', output, e)
        return EXIT_IO

    failed = sum(1 for row in rows if row['status'] != 'ok')
    if failed:
        logger.error('%d of %d rows failed', failed, len(rows))
        return EXIT_SOLVER
    return EXIT_OK
