"""
Command-line front end.

    coulomb sweep --quantity outage-vs-snr --ntx 3 --nrx 6 \\
        --rate '4, 16, 28' --rate-units bits-total --grid 'linear(1, 1e5, 9)' \\
        --methods 'ld, gaussian, trt'
    coulomb validate --config outage.conf
    coulomb mc --ntx 3 --nrx 3 --snr-db 10 --trials 100000 --rate '1, 2'
    coulomb version
"""
import argparse
import csv
import json
import logging
import math
import os
import sys

from . import __version__, baselines, distribution, montecarlo, spectrum, sweep
from .errors import CoulombError, DomainError, SweepSyntaxError


logger = logging.getLogger(__name__)

FLAG_KEYS = ('quantity', 'ntx', 'nrx', 'snr-db', 'rate', 'rate-units', 'grid',
             'methods', 'trials', 'seed', 'streams', 'jobs', 'format', 'out',
             's3')


def _configure_logging(verbosity):
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = os.environ.get('COULOMB_LOG_LEVEL', 'WARNING').upper()
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def _settings(args):
    """
    Defaults, then the configuration file, then flags.
    """
    settings = dict(sweep.DEFAULTS)
    if args.config:
        with open(args.config, encoding='utf-8') as stream:
            settings.update(sweep.load_config(stream.read()))
    for key in FLAG_KEYS:
        text = getattr(args, key.replace('-', '_'))
        if text is not None:
            settings[key] = sweep.parse_setting(key, text)
    return settings


def _format(settings):
    fmt = settings['format']
    if fmt not in sweep.FORMATS:
        raise SweepSyntaxError('format: expected csv or json, got %r' % (fmt,))
    return fmt


def cmd_sweep(args):
    settings = _settings(args)
    spec = sweep.build_spec(settings)
    return sweep.run(spec, settings['out'], _format(settings))


def cmd_validate(args):
    spec = sweep.build_spec(_settings(args))
    problems = sweep.validate(spec)
    for problem in problems:
        print(problem)
    if problems:
        return sweep.EXIT_CONFIG
    print('ok')
    return sweep.EXIT_OK


def _mc_table(settings):
    if settings['trials'] is None:
        raise SweepSyntaxError('mc needs --trials')
    spec = sweep.build_spec(settings)
    rho = float(sweep.db_to_linear(spec.snr_db))
    ens, n = spectrum.normalize_ensemble(spec.n_tx, spec.n_rx[0], rho)
    cfg = montecarlo.McConfig(
        n=n, m=int(round(ens.beta * n)), rho=ens.rho, trials=spec.mc.trials,
        seed=spec.mc.seed, streams=spec.mc.streams, jobs=spec.jobs)
    acc = montecarlo.run(cfg)
    stats = baselines.ergodic_stats(ens)

    rows = [
        {'statistic': 'mean_total_nats', 'monte_carlo': acc.mean(),
         'analytic': n * stats.r_erg,
         'stderr': math.sqrt(acc.variance() / acc.count)},
        {'statistic': 'variance_total', 'monte_carlo': acc.variance(),
         'analytic': stats.v_erg, 'stderr': None},
    ]
    rates = [sweep.rate_in_nats(spec, r, n) for r in spec.rates]
    for r, result in zip(rates, montecarlo.empirical_outage(cfg, rates, acc)):
        rows.append({
            'statistic': 'outage@r=%.6g' % r,
            'monte_carlo': result.p_out,
            'analytic': distribution.ld_outage(ens, n, r).p_out,
            'stderr': result.stderr,
        })
    return rows


def cmd_mc(args):
    settings = _settings(args)
    fmt = _format(settings)
    rows = _mc_table(settings)
    out = settings['out']
    stream = sys.stdout if out == '-' else open(out, 'w', encoding='utf-8',
                                                  newline='')
    try:
        if fmt == 'json':
            json.dump(rows, stream, indent=2)
            stream.write('\n')
        else:
            writer = csv.DictWriter(stream, lineterminator='\n', fieldnames=(
                'statistic', 'monte_carlo', 'analytic', 'stderr'))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: '' if v is None else v for k, v in row.items()})
    finally:
        if stream is not sys.stdout:
            stream.close()
    return sweep.EXIT_OK


def cmd_version(args):
    print(__version__)
    return sweep.EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='file of "key = value" settings')
    common.add_argument('-v', '--verbose', action='count', default=0)
    common.add_argument('--quantity', help=', '.join(sweep.QUANTITIES))
    common.add_argument('--ntx', help='transmit antennas')
    common.add_argument('--nrx', help='receive antennas, or a list of them')
    common.add_argument('--snr-db', help='SNR in dB')
    common.add_argument('--rate', help='rate or list of rates')
    common.add_argument('--rate-units', help=', '.join(sweep.UNITS))
    common.add_argument('--grid', help='linear(a, b, n), log(a, b, n) or db(a, b, n)')
    common.add_argument('--methods', help=', '.join(sweep.METHODS))
    common.add_argument('--trials', help='Monte Carlo trials')
    common.add_argument('--seed', help='Monte Carlo seed')
    common.add_argument('--streams', help='Monte Carlo generator streams')
    common.add_argument('--jobs', help='worker processes')
    common.add_argument('--format', help='csv or json')
    common.add_argument('--out', help="output path, '-' for stdout")
    common.add_argument('--s3', help='third cumulant coefficient for ld-corrected')

    parser = argparse.ArgumentParser(
        prog='coulomb',
        description='Large-deviations outage analysis of MIMO mutual information.')
    commands = parser.add_subparsers(dest='command')
    commands.required = True
    for name, func, text in (
            ('sweep', cmd_sweep, 'evaluate a quantity over a grid'),
            ('validate', cmd_validate, 'check sweep settings'),
            ('mc', cmd_mc, 'Monte Carlo statistics against the analytic ones'),
            ('version', cmd_version, 'print the version')):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (SweepSyntaxError, DomainError) as e:
        logger.error('%s', e)
        return sweep.EXIT_CONFIG
    except CoulombError as e:
        logger.error('%s', e)
        return sweep.EXIT_SOLVER
    except OSError as e:
        logger.error('%s', e)
        return sweep.EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
