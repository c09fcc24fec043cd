import csv
import io
import json
import math
import os
import tempfile
import unittest

from coulomb import sweep
from coulomb.errors import SweepSyntaxError
from coulomb.parser import Call, parse_value
from coulomb.sweep import Grid, Value, library
from coulomb.tokenise import tokenise


DATA = os.path.join(os.path.dirname(__file__), 'data')


def const_evaluator(point, ctx):
    return Value(0.25)


def failing_evaluator(point, ctx):
    raise ArithmeticError('no convergence here')


class ValueSyntaxTest(unittest.TestCase):

    def test_values(self):
        # A list of (text, value)
        tests = [
            ('3', 3),
            ('1.5', 1.5),
            ('.5', 0.5),
            ('-10', -10),
            ('1e-3', 1e-3),
            ('2E5', 2e5),
            ('ld', 'ld'),
            ('outage-vs-snr', 'outage-vs-snr'),
            ('bits-total', 'bits-total'),
            ('ld, gaussian', ['ld', 'gaussian']),
            ('4,16 , 28', [4, 16, 28]),
            ('db(0, 60, 13)', Call('db', (0, 60, 13))),
            ('log(1e-2, 1e2, 5)', Call('log', (0.01, 100.0, 5))),
            ('linear(-1.5, 2, 3), 4', [Call('linear', (-1.5, 2, 3)), 4]),
        ]
        for text, expected in tests:
            self.assertEqual(parse_value(text), expected, msg=text)

    def test_number_types(self):
        self.assertIsInstance(parse_value('3'), int)
        self.assertIsInstance(parse_value('3.'), float)
        self.assertIsInstance(parse_value('3e0'), float)

    def test_errors(self):
        for text in ('', '   ', 'linear(1, 2', '1 2', '@', 'ld,', '(1)',
                     'linear()'):
            with self.assertRaises(SweepSyntaxError, msg=repr(text)):
                parse_value(text)

    def test_error_line(self):
        with self.assertRaises(SweepSyntaxError) as ctx:
            parse_value('1 2', line=4)
        self.assertTrue(str(ctx.exception).startswith('line 5: '))
        self.assertEqual(ctx.exception.line, 4)

        with self.assertRaises(SweepSyntaxError) as ctx:
            parse_value('a @ b', line=0)
        self.assertTrue(str(ctx.exception).startswith('line 1: '))
        self.assertEqual(ctx.exception.col, 2)


class ConfigTest(unittest.TestCase):

    source = (
        '# outage over SNR\n'
        'quantity = outage-vs-snr\n'
        '\n'
        'nrx = 3, 6   # two series\n'
        'grid = db(0, 50, 6)\n'
        'out = results/run 1.csv\n'
    )

    def test_tokenise(self):
        tokens = list(tokenise(self.source))
        self.assertEqual([t.key for t in tokens], ['quantity', 'nrx', 'grid', 'out'])
        self.assertEqual([t.line for t in tokens], [1, 3, 4, 5])
        self.assertEqual(tokens[1].content, '3, 6')
        self.assertEqual(tokens[0].col, len('quantity = '))

    def test_malformed_statement(self):
        with self.assertRaises(SweepSyntaxError) as ctx:
            list(tokenise('ntx = 2\njust words\n'))
        self.assertEqual(ctx.exception.line, 1)
        self.assertIn('line 2', str(ctx.exception))

    def test_load(self):
        settings = sweep.load_config(self.source)
        self.assertEqual(settings, {
            'quantity': 'outage-vs-snr',
            'nrx': [3, 6],
            'grid': Call('db', (0, 50, 6)),
            'out': 'results/run 1.csv',
        })

    def test_unknown_key(self):
        with self.assertRaises(SweepSyntaxError) as ctx:
            sweep.load_config('ntx = 2\ncolour = blue\n')
        self.assertIn('colour', str(ctx.exception))
        self.assertEqual(ctx.exception.line, 1)

    def test_bad_value_reports_line(self):
        with self.assertRaises(SweepSyntaxError) as ctx:
            sweep.load_config('ntx = 2\n\nsnr-db = 1 2\n')
        self.assertEqual(ctx.exception.line, 2)

    def test_parse_setting(self):
        self.assertEqual(sweep.parse_setting('out', 'a, b.csv'), 'a, b.csv')
        self.assertEqual(sweep.parse_setting('ntx', '4'), 4)


class BuildSpecTest(unittest.TestCase):

    def test_defaults(self):
        spec = sweep.build_spec({})
        self.assertEqual(spec.quantity, 'outage-vs-rate')
        self.assertEqual(spec.methods, ('ld', 'gaussian'))
        self.assertEqual(spec.grid, Grid(0.5, 4.0, 8, 'linear'))
        self.assertEqual((spec.n_tx, spec.n_rx), (2, (2,)))
        self.assertEqual(spec.snr_db, 10.0)
        self.assertEqual(spec.rates, ())
        self.assertIsNone(spec.mc)
        self.assertIsNone(spec.s3)

    def test_monte_carlo(self):
        spec = sweep.build_spec({'methods': 'mc', 'trials': 100, 'streams': 2})
        self.assertEqual(spec.methods, ('mc',))
        self.assertEqual(spec.mc, sweep.McSettings(trials=100, seed=0, streams=2))

    def test_scalars_become_tuples(self):
        spec = sweep.build_spec({'nrx': 4, 'rate': 2})
        self.assertEqual(spec.n_rx, (4,))
        self.assertEqual(spec.rates, (2.0,))

    def test_wrong_shapes(self):
        for settings in ({'grid': 5}, {'grid': Call('cubic', (1, 2, 3))},
                         {'grid': Call('linear', (1, 2))}, {'ntx': 1.5},
                         {'ntx': 'two'}, {'quantity': 3}, {'rate': 'fast'}):
            with self.assertRaises(SweepSyntaxError, msg=repr(settings)):
                sweep.build_spec(settings)

    def test_serg_methods(self):
        spec = sweep.build_spec({'quantity': 'serg-vs-snr'})
        self.assertEqual(spec.effective_methods(), ('ld', 'asymptote'))


class ValidateTest(unittest.TestCase):

    def problems(self, **settings):
        return sweep.validate(sweep.build_spec(
            {k.replace('_', '-'): v for k, v in settings.items()}))

    def test_ok(self):
        self.assertEqual(self.problems(), [])
        self.assertEqual(self.problems(quantity='outage-vs-snr', rate=1.0,
                                       grid=Call('db', (5, 30, 6)),
                                       methods=['ld', 'trt', 'dmt']), [])
        self.assertEqual(self.problems(methods='mc', trials=10), [])

    def test_diagnostics(self):
        # A list of (settings, expected problem)
        tests = [
            (dict(quantity='histogram'), "unknown quantity 'histogram'"),
            (dict(methods='mc'), 'mc settings required (give trials)'),
            (dict(trials=10), 'mc settings given but mc method not requested'),
            (dict(grid=Call('linear', (1, 2, 1))),
             'grid needs at least 2 points, got 1'),
            (dict(grid=Call('linear', (2, 1, 5))), 'grid start must be below stop'),
            (dict(grid=Call('log', (0, 1, 5))), 'log grid needs a positive start'),
            (dict(grid=Call('linear', (0, 1, 5))), 'rates must be positive'),
            (dict(methods='trt', snr_db=0),
             'trt needs log2(rho) > 0, i.e. SNR above 0 dB'),
            (dict(methods='dmt', snr_db=-3),
             'dmt needs log2(rho) > 0, i.e. SNR above 0 dB'),
            (dict(methods='ld-corrected', quantity='pdf'), 'ld-corrected needs s3'),
            (dict(s3=0.1), 's3 given but ld-corrected not requested'),
            (dict(quantity='density'), 'density needs at least one rate'),
            (dict(methods='ld-corrected'),
             "method 'ld-corrected' is not available for outage-vs-rate"),
            (dict(methods='magic'), "unknown method 'magic'"),
            (dict(rate_units='bits'), "unknown rate units 'bits'"),
            (dict(nrx=0), 'antenna counts must be >= 1'),
            (dict(jobs=0), 'jobs must be >= 1'),
        ]
        for settings, expected in tests:
            problems = self.problems(**settings)
            self.assertTrue(any(p.startswith(expected) for p in problems),
                            msg='%r: %r' % (settings, problems))

    def test_trt_over_snr_grid(self):
        problems = self.problems(quantity='outage-vs-snr', rate=1.0, methods='trt',
                                 grid=Call('db', (0, 30, 4)))
        self.assertIn('trt needs log2(rho) > 0, i.e. SNR above 0 dB', problems)


class UnitsTest(unittest.TestCase):

    def test_round_trip(self):
        for n in (1, 2, 7):
            for r in (1e-3, 0.7, 12.0):
                bits = sweep.to_bits_total(r, n)
                self.assertAlmostEqual(sweep.to_nats_per_antenna(bits, n) / r, 1.0,
                                       delta=1e-12)

    def test_values(self):
        self.assertAlmostEqual(sweep.to_bits_total(math.log(2.0), 1), 1.0,
                               places=14)
        self.assertAlmostEqual(sweep.to_bits_total(math.log(2.0), 3), 3.0,
                               places=14)
        self.assertAlmostEqual(float(sweep.db_to_linear(20.0)), 100.0, places=10)
        self.assertAlmostEqual(sweep.linear_to_db(1000.0), 30.0, places=12)

    def test_grids(self):
        self.assertEqual(list(Grid(1, 3, 3).values()), [1.0, 2.0, 3.0])
        for got, expected in zip(Grid(0, 20, 3, 'db').values(), (1.0, 10.0, 100.0)):
            self.assertAlmostEqual(got, expected, places=10)
        for got, expected in zip(Grid(1, 100, 3, 'log').values(), (1.0, 10.0, 100.0)):
            self.assertAlmostEqual(got, expected, places=10)


class ExpandTest(unittest.TestCase):

    def test_outage_vs_snr(self):
        spec = sweep.build_spec({'quantity': 'outage-vs-snr', 'rate': [1, 2],
                                 'nrx': [2, 4], 'grid': Call('db', (0, 20, 3))})
        points = sweep.expand(spec)
        self.assertEqual(len(points), 12)
        self.assertEqual([p.index for p in points], list(range(12)))
        self.assertEqual([round(p.x, 9) for p in points[:3]], [0.0, 10.0, 20.0])
        self.assertEqual([p.r for p in points[:6]], [1.0] * 3 + [2.0] * 3)
        last = points[-1]
        self.assertEqual((last.n, last.m, last.ens.beta), (2, 4, 2.0))
        self.assertAlmostEqual(last.ens.rho, 100.0, places=9)

    def test_transmit_heavy(self):
        spec = sweep.build_spec({'quantity': 'outage-vs-rate', 'ntx': 6, 'nrx': 3,
                                 'snr-db': 10, 'grid': Call('linear', (1, 2, 2))})
        point = sweep.expand(spec)[0]
        self.assertEqual((point.n, point.m), (3, 6))
        self.assertAlmostEqual(point.ens.rho, 5.0, places=12)

    def test_bits_total(self):
        spec = sweep.build_spec({'ntx': 2, 'nrx': 2, 'rate-units': 'bits-total',
                                 'grid': Call('linear', (2, 4, 2))})
        points = sweep.expand(spec)
        self.assertEqual([p.x for p in points], [2.0, 4.0])
        self.assertAlmostEqual(points[0].r, math.log(2.0), places=14)
        self.assertEqual(points[1].axis, tuple(p.r for p in points))

    def test_spectral(self):
        spec = sweep.build_spec({'quantity': 'density', 'rate': 1.0, 'nrx': [2, 3],
                                 'grid': Call('linear', (0.1, 2, 5))})
        points = sweep.expand(spec)
        self.assertEqual(len(points), 10)
        self.assertTrue(all(p.r == 1.0 for p in points))

    def test_serg(self):
        spec = sweep.build_spec({'quantity': 'serg-vs-snr',
                                 'grid': Call('db', (0, 20, 3))})
        points = sweep.expand(spec)
        self.assertEqual(len(points), 3)
        self.assertTrue(all(p.r is None for p in points))


class LibraryTest(unittest.TestCase):

    def setUp(self):
        library.register('const', 'pdf', 'exponent')(const_evaluator)
        library.register('broken', 'pdf')(failing_evaluator)

    def tearDown(self):
        for quantity, method in (('pdf', 'const'), ('exponent', 'const'),
                                 ('pdf', 'broken')):
            library.unregister(quantity, method)

    def test_lookup(self):
        self.assertIs(library.lookup('pdf', 'const'), const_evaluator)
        self.assertIs(library.lookup('exponent', 'const'), const_evaluator)
        self.assertIn('const', library.methods('pdf'))

    def test_unregister(self):
        library.unregister('pdf', 'const')
        with self.assertRaises(SweepSyntaxError):
            library.lookup('pdf', 'const')
        self.assertNotIn('const', library.methods('pdf'))

    def test_separate_library(self):
        other = sweep.Library()
        self.assertEqual(other.methods('pdf'), [])
        other.register('x', 'cdf')(const_evaluator)
        self.assertEqual(other.methods('cdf'), ['x'])
        self.assertNotIn('x', library.methods('cdf'))

    def test_builtin_methods(self):
        self.assertEqual(library.methods('serg-vs-snr'), ['asymptote', 'ld'])
        self.assertEqual(
            [m for m in library.methods('outage-vs-rate')],
            ['dmt', 'gaussian', 'ld', 'mc', 'trt'])

    def test_evaluate_point(self):
        spec = sweep.build_spec({'quantity': 'pdf',
                                 'grid': Call('linear', (1, 2, 2))})
        ctx = sweep.Context(spec)
        point = sweep.expand(spec)[0]
        row = sweep.evaluate_point(point, 'const', ctx)
        self.assertEqual(row['value'], 0.25)
        self.assertAlmostEqual(row['log10_value'], math.log10(0.25), places=14)
        self.assertEqual(row['status'], 'ok')

        row = sweep.evaluate_point(point, 'broken', ctx)
        self.assertTrue(math.isnan(row['value']))
        self.assertIsNone(row['log10_value'])
        self.assertEqual(row['status'], 'failed: no convergence here')


class EvaluateTest(unittest.TestCase):

    settings = {'quantity': 'outage-vs-rate', 'methods': ['ld', 'gaussian'],
                'ntx': 2, 'nrx': 2, 'snr-db': 10,
                'grid': Call('linear', (1, 3, 3))}

    def test_rows(self):
        rows = sweep.evaluate(sweep.build_spec(self.settings))
        self.assertEqual(len(rows), 6)
        self.assertEqual([row['method'] for row in rows], ['ld', 'gaussian'] * 3)
        self.assertEqual([row['x'] for row in rows[::2]], [1.0, 2.0, 3.0])
        self.assertTrue(all(row['status'] == 'ok' for row in rows))
        self.assertTrue(all(set(row) == set(sweep.COLUMNS) for row in rows))
        for method in ('ld', 'gaussian'):
            values = [row['value'] for row in rows if row['method'] == method]
            self.assertTrue(values[0] < values[1] < values[2], values)
        first = rows[0]
        self.assertEqual((first['n'], first['m']), (2, 2))
        self.assertAlmostEqual(first['rho_db'], 10.0, places=12)
        self.assertAlmostEqual(first['R_bits_total'], 2.0 / math.log(2.0),
                               places=12)

    def test_parallel_matches_serial(self):
        serial = sweep.evaluate(sweep.build_spec(self.settings))
        settings = dict(self.settings, jobs=2)
        parallel = sweep.evaluate(sweep.build_spec(settings))
        self.assertEqual(len(serial), len(parallel))
        for a, b in zip(serial, parallel):
            self.assertEqual((a['method'], a['x'], a['status']),
                             (b['method'], b['x'], b['status']))
            self.assertAlmostEqual(a['value'], b['value'],
                                   delta=1e-12 * abs(a['value']))

    def test_monte_carlo_deterministic(self):
        settings = dict(self.settings, methods=['ld', 'mc'], trials=500, seed=4,
                        streams=2)
        first = sweep.evaluate(sweep.build_spec(settings))
        second = sweep.evaluate(sweep.build_spec(settings))
        parallel = sweep.evaluate(sweep.build_spec(dict(settings, jobs=2)))
        mc = [row for row in first if row['method'] == 'mc']
        self.assertEqual(len(mc), 3)
        self.assertEqual(mc, [row for row in second if row['method'] == 'mc'])
        self.assertEqual(mc, [row for row in parallel if row['method'] == 'mc'])
        self.assertTrue(all(row['stderr'] is not None for row in mc))

    def test_serg(self):
        spec = sweep.build_spec({'quantity': 'serg-vs-snr', 'nrx': 4,
                                 'grid': Call('db', (20, 40, 2))})
        rows = sweep.evaluate(spec)
        self.assertEqual([row['method'] for row in rows], ['ld', 'asymptote'] * 2)
        self.assertTrue(all(row['status'] == 'ok' for row in rows))
        self.assertTrue(all(math.isfinite(row['value']) for row in rows))
        self.assertGreater(rows[1]['value'], 0.0)

    def test_failed_rows(self):
        spec = sweep.build_spec({'quantity': 'pdf', 'methods': 'ld-corrected',
                                 's3': 1e6, 'grid': Call('linear', (1, 3, 3))})
        rows = sweep.evaluate(spec)
        self.assertEqual(len(rows), 3)
        for row in rows:
            self.assertTrue(row['status'].startswith('failed: '), row['status'])
            self.assertTrue(math.isnan(row['value']))


class OutputTest(unittest.TestCase):

    settings = {'quantity': 'exponent', 'methods': ['ld', 'gaussian', 'dmt'],
                'grid': Call('linear', (0.5, 2, 4))}

    def test_csv(self):
        stream = io.StringIO()
        rows = sweep.evaluate(sweep.build_spec(self.settings))
        sweep.write_rows(rows, stream, 'csv')
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], ','.join(sweep.COLUMNS))
        self.assertEqual(len(lines), 13)
        self.assertTrue(lines[1].startswith('ld,0.5,2,2,'))

    def test_json(self):
        stream = io.StringIO()
        rows = sweep.evaluate(sweep.build_spec(self.settings))
        rows.append(dict(rows[0], value=math.nan, status='failed: test'))
        sweep.write_rows(rows, stream, 'json')
        data = json.loads(stream.getvalue())
        self.assertEqual(len(data), 13)
        self.assertEqual(list(data[0]), list(sweep.COLUMNS))
        self.assertIsNone(data[-1]['value'])
        self.assertIsNone(data[0]['stderr'])

    def test_golden_schema(self):
        settings = {'quantity': 'outage-vs-rate', 'methods': ['ld', 'mc'],
                    'grid': Call('linear', (1, 3, 3)), 'trials': 500, 'seed': 4,
                    'streams': 2}
        stream = io.StringIO()
        sweep.write_rows(sweep.evaluate(sweep.build_spec(settings)), stream, 'csv')
        stream.seek(0)
        rows = list(csv.DictReader(stream))
        self.assertEqual(tuple(rows[0]), sweep.COLUMNS)
        with open(os.path.join(DATA, 'outage_schema.csv'), encoding='utf-8') as f:
            golden = list(csv.DictReader(f))
        self.assertEqual([{k: row[k] for k in golden[0]} for row in rows], golden)
        for row in rows:
            float(row['value'])
            if row['method'] == 'mc':
                float(row['stderr'])
            else:
                self.assertEqual(row['stderr'], '')

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            sweep.write_rows([], io.StringIO(), 'xml')


class RunTest(unittest.TestCase):

    def test_written(self):
        spec = sweep.build_spec({'grid': Call('linear', (1, 2, 2))})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'out.csv')
            self.assertEqual(sweep.run(spec, path, 'csv'), sweep.EXIT_OK)
            with open(path, encoding='utf-8') as stream:
                lines = stream.read().splitlines()
        self.assertEqual(lines[0], ','.join(sweep.COLUMNS))
        self.assertEqual(len(lines), 5)

    def test_invalid(self):
        spec = sweep.build_spec({'methods': 'mc'})
        self.assertEqual(sweep.run(spec, '-', 'csv'), sweep.EXIT_CONFIG)
        spec = sweep.build_spec({})
        self.assertEqual(sweep.run(spec, '-', 'yaml'), sweep.EXIT_CONFIG)

    def test_failed_points(self):
        spec = sweep.build_spec({'quantity': 'pdf', 'methods': 'ld-corrected',
                                 's3': 1e6, 'grid': Call('linear', (1, 2, 2))})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'out.csv')
            self.assertEqual(sweep.run(spec, path, 'csv'), sweep.EXIT_SOLVER)
            self.assertTrue(os.path.exists(path))

    def test_unwritable(self):
        spec = sweep.build_spec({'grid': Call('linear', (1, 2, 2))})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'missing', 'out.csv')
            self.assertEqual(sweep.run(spec, path, 'csv'), sweep.EXIT_IO)


if __name__ == '__main__':
    unittest.main()
