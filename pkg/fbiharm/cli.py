'''
Command line interface

click.command() defines each command and with_appcontext makes current_app
available inside it, so every command reads its defaults from the app config
and only the flags actually given override them. init_app registers the
commands on app.cli, the same way the factory wires everything else in.

Reports go to --output when given and to stdout otherwise, never through the
logger. Exit codes:

    0  verified, or the numeric verdict agrees with the algebraic predicate
    1  bad input, an evaluation error, or a failed gate
    2  the numeric verdict contradicts the predicate

main is a FlaskGroup bound to create_app; it is what the console script
`fbiharm` runs.

'''

import csv
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Optional

import click
import numpy as np
from flask import current_app
from flask.cli import FlaskGroup, with_appcontext

from . import create_app, curves, export, functions, maps, numdiff, suite
from .errors import FBiharmError, InvalidInput
from .numdiff import LINE_FD, RADIAL_FD

REFERENCE_STEP = 1e-3
DRIFT_GATE = 1e-8


@dataclass(frozen=True)
class RunConfig:
    command: str
    tolerance: Optional[float]
    fd_step: float
    seed: int
    output_path: Optional[str]
    format: str
    workers: int = 1

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise InvalidInput(f'tolerance must be positive, got {self.tolerance!r}')
        if not self.fd_step > 0:
            raise InvalidInput(f'fd_step must be positive, got {self.fd_step!r}')
        if self.format not in export.FORMATS:
            raise InvalidInput(f'format must be one of {export.FORMATS}, got {self.format!r}')
        if int(self.workers) < 1:
            raise InvalidInput(f'workers must be at least 1, got {self.workers!r}')

    @classmethod
    def from_app(cls, command, tolerance=None, fd_step=None, seed=None, output=None,
                 fmt=None, tolerance_key='TOLERANCE', default_tolerance=None):
        """Flags given on the command line win over the app config.

        Without a ``tolerance_key`` the flag falls back to ``default_tolerance``.
        """
        config = current_app.config

        def pick(flag, key):
            return config[key] if flag is None else flag

        return cls(
            command,
            float(pick(tolerance, tolerance_key)) if tolerance_key
            else (default_tolerance if tolerance is None else float(tolerance)),
            float(pick(fd_step, 'FD_STEP')),
            int(pick(seed, 'SEED')),
            pick(output, 'OUTPUT'),
            pick(fmt, 'FORMAT'),
            int(config['WORKERS']),
        )

    @property
    def step_factor(self):
        return self.fd_step / REFERENCE_STEP

    def to_dict(self, **arguments):
        data = asdict(self)
        data.pop('output_path')
        data.update(arguments)
        return data


def common_options(func):
    for option in reversed((
        click.option('--tolerance', type=float, default=None, help='Residual gate.'),
        click.option('--fd-step', type=float, default=None,
                     help='Finite-difference step; presets scale with it.'),
        click.option('--seed', type=int, default=None, help='Sample-point seed.'),
        click.option('--output', type=click.Path(dir_okay=False), default=None,
                     help='Write the report here instead of stdout.'),
        click.option('--format', 'fmt', type=click.Choice(export.FORMATS), default=None),
    )):
        func = option(func)
    return func


@contextmanager
def evaluation_errors():
    """Turn package errors into exit code 1."""
    try:
        yield
    except FBiharmError as exc:
        current_app.logger.error('%s', exc)
        raise click.ClickException(str(exc)) from exc


def emit(run, document):
    text = export.render(document, run.format)
    if run.output_path:
        export.write_text(text, run.output_path)
        current_app.logger.info('wrote %s report to %s', run.command, run.output_path)
    else:
        click.echo(text, nl=False)


def _inversion_anchor(m, p, k):
    return f'x/|x|^{p:g} on R^{m} with f = |x|^{k:g}'


@click.command('verify-inversion')
@click.option('--m', 'm', type=int, required=True)
@click.option('--p', 'p', type=float, required=True)
@click.option('--k', 'k', type=float, required=True)
@click.option('--samples', type=int, default=10, show_default=True)
@common_options
@with_appcontext
@click.pass_context
def verify_inversion_command(ctx, m, p, k, samples, tolerance, fd_step, seed, output, fmt):
    """Compare the numeric f-bitension of x/|x|^p with the algebraic predicate."""
    with evaluation_errors():
        run = RunConfig.from_app('verify-inversion', tolerance, fd_step, seed, output, fmt,
                                 tolerance_key='INVERSION_TOLERANCE')
        fam = maps.InversionFamily(m, p, k)
        predicate = maps.inversion_is_f_biharmonic(fam)
        points = numdiff.annulus_samples(m, samples, 0.5, 2.0, run.seed)
        report = fam.residual_report(points, run.tolerance, run.seed,
                                     RADIAL_FD.scaled(run.step_factor), run.workers)

    gap = not predicate.is_f_biharmonic and report.max_residual <= maps.INVERSION_REJECT
    agrees = report.passed == predicate.is_f_biharmonic and not gap
    document = export.report_document(
        'verify-inversion',
        run.to_dict(m=m, p=p, k=k, samples=samples),
        [export.anchor_entry(_inversion_anchor(m, p, k), report.max_residual,
                             report.verdict)],
        report.verdict,
    )
    document['predicate'] = predicate._asdict()
    document['agreement'] = agrees
    emit(run, document)

    if not agrees:
        current_app.logger.error(
            'predicate says %s but max residual is %.3e', predicate.is_f_biharmonic,
            report.max_residual)
        ctx.exit(2)


@click.command('classify-inversion')
@click.option('--m', 'ms', type=int, multiple=True, default=(2, 3, 4, 5), show_default=True)
@click.option('--p-range', nargs=2, type=int, default=(-2, 5), show_default=True)
@click.option('--k-range', nargs=2, type=int, default=(-3, 5), show_default=True)
@click.option('--numeric/--no-numeric', default=False,
              help='Also sweep the numeric residual and check it agrees.')
@click.option('--samples', type=int, default=10, show_default=True)
@common_options
@with_appcontext
@click.pass_context
def classify_inversion_command(ctx, ms, p_range, k_range, numeric, samples, tolerance,
                               fd_step, seed, output, fmt):
    """Tabulate which (m, p, k) make x/|x|^p f-biharmonic for f = |x|^k."""
    with evaluation_errors():
        run = RunConfig.from_app('classify-inversion', tolerance, fd_step, seed, output, fmt,
                                 tolerance_key='INVERSION_TOLERANCE')
        base = RADIAL_FD.scaled(run.step_factor)
        rows, anchors, disagreements = [], [], 0
        for m in ms:
            points = numdiff.annulus_samples(m, samples, 0.5, 2.0, run.seed)
            for p in range(p_range[0], p_range[1] + 1):
                for k in range(k_range[0], k_range[1] + 1):
                    fam = maps.InversionFamily(m, p, k)
                    result = fam.classify()
                    row = [m, p, k, result.is_f_biharmonic, '+'.join(result.cases),
                           result.kind or '']
                    if numeric:
                        report = fam.residual_report(points, run.tolerance, run.seed, base,
                                                     run.workers)
                        separated = (report.max_residual <= run.tolerance
                                     if result.is_f_biharmonic
                                     else report.max_residual > maps.INVERSION_REJECT)
                        disagreements += not separated
                        row.append(report.max_residual)
                        anchors.append(export.anchor_entry(
                            _inversion_anchor(m, p, k), report.max_residual,
                            'pass' if separated else 'fail'))
                    rows.append(row)

    columns = ['m', 'p', 'k', 'is_f_biharmonic', 'cases', 'kind']
    if numeric:
        columns.append('max_residual')
    verdict = 'pass' if not disagreements else 'fail'
    emit(run, export.report_document(
        'classify-inversion',
        run.to_dict(m=list(ms), p_range=list(p_range), k_range=list(k_range),
                    numeric=numeric, samples=samples),
        anchors, verdict, columns, rows))
    if disagreements:
        current_app.logger.error('%d parameter triples broke scale separation', disagreements)
        ctx.exit(2)


@click.command('curve-export')
@click.option('--kind', type=click.Choice(curves.FAMILY_KINDS), default='planar',
              show_default=True)
@click.option('--c1', type=float, default=1.0, show_default=True)
@click.option('--c2', type=float, default=1.0, show_default=True)
@click.option('--c3', type=float, default=0.0, show_default=True)
@click.option('--c', 'ratio', type=float, default=0.0, show_default=True,
              help='Torsion/curvature ratio of a helix.')
@click.option('--s0', type=float, default=-5.0, show_default=True)
@click.option('--s1', type=float, default=5.0, show_default=True)
@click.option('--step', type=float, default=1e-3, show_default=True,
              help='Runge-Kutta step along the curve.')
@common_options
@with_appcontext
def curve_export_command(kind, c1, c2, c3, ratio, s0, s1, step, tolerance, fd_step, seed,
                         output, fmt):
    """Reconstruct a curve of an R³ family and export s, x, y, z, kappa, tau, f."""
    with evaluation_errors():
        run = RunConfig.from_app('curve-export', tolerance, fd_step, seed, output, fmt,
                                 tolerance_key=None, default_tolerance=DRIFT_GATE)
        family = curves.R3Family(kind, c1, c2, c3, ratio)
        sampled = curves.reconstruct_curve(family.curvature, family.torsion, (s0, s1),
                                           step=step)

    s = sampled.s
    table = np.column_stack([s, sampled.points, family.curvature(s), family.torsion(s),
                             family.weight(s)])
    drift = sampled.max_frame_drift
    verdict = 'pass' if drift <= run.tolerance else 'fail'
    emit(run, export.report_document(
        'curve-export',
        run.to_dict(kind=kind, c1=c1, c2=c2, c3=c3, c=ratio, interval=[s0, s1], step=step),
        [export.anchor_entry(f'{kind} family frame drift', drift, verdict)],
        verdict,
        ('s', 'x', 'y', 'z', 'kappa', 'tau', 'f'),
        table.tolist(),
    ))


def read_weight_table(path):
    """Rows of x,f; a header row is skipped."""
    xs, fs = [], []
    with open(path, newline='', encoding='utf-8') as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                x, f = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if xs:
                    raise InvalidInput(f'bad weight table row {row!r} in {path}')
                continue
            xs.append(x)
            fs.append(f)
    return functions.tabulated_weight(xs, fs)


@click.command('solve-1d')
@click.option('--weight', type=click.Choice(('rational', 'exponential', 'tabulated')),
              default='exponential', show_default=True)
@click.option('--table', type=click.Path(exists=True, dir_okay=False), default=None,
              help='CSV of x,f for a tabulated weight.')
@click.option('--A', 'A', type=float, default=1.0, show_default=True)
@click.option('--B', 'B', type=float, default=0.0, show_default=True)
@click.option('--C', 'C', type=float, default=0.0, show_default=True)
@click.option('--D', 'D', type=float, default=0.0, show_default=True)
@click.option('--x0', type=float, default=0.0, show_default=True)
@click.option('--x1', type=float, default=1.0, show_default=True)
@click.option('--points', type=int, default=50, show_default=True)
@common_options
@with_appcontext
def solve_1d_command(weight, table, A, B, C, D, x0, x1, points, tolerance, fd_step, seed,
                     output, fmt):
    """Solve (f·u'')'' = 0 and report u and the residual at interior points."""
    with evaluation_errors():
        run = RunConfig.from_app('solve-1d', tolerance, fd_step, seed, output, fmt)
        if weight == 'tabulated':
            if table is None:
                raise InvalidInput('a tabulated weight needs --table')
            f = read_weight_table(table)
        else:
            f = functions.closed_form_weight(weight)
        solution = functions.solve_1d(f, A, B, C, D, (x0, x1))
        cfg = LINE_FD.scaled(run.step_factor)
        xs = solution.checkpoints(points, cfg)
        rows = [[x, solution(x), solution.residual(x, cfg)] for x in xs]

    worst = max(row[2] for row in rows)
    verdict = 'pass' if worst < run.tolerance else 'fail'
    emit(run, export.report_document(
        'solve-1d',
        run.to_dict(weight=weight, A=A, B=B, C=C, D=D, interval=[x0, x1], points=points),
        [export.anchor_entry(f"(f·u'')'' = 0 for the {weight} weight", worst, verdict)],
        verdict, ('x', 'u', 'residual'), rows))
    if verdict != 'pass':
        raise click.ClickException(f'max residual {worst:.3e} exceeds {run.tolerance:g}')


@click.command('verify-suite')
@common_options
@with_appcontext
def verify_suite_command(tolerance, fd_step, seed, output, fmt):
    """Run every golden check; exit 1 if any fails."""
    with evaluation_errors():
        run = RunConfig.from_app('verify-suite', tolerance, fd_step, seed, output, fmt,
                                 tolerance_key=None)
    results = suite.run_suite(run.tolerance, run.fd_step, run.seed)
    failing = [r.anchor for r in results if r.verdict != 'pass']
    emit(run, export.report_document(
        'verify-suite',
        run.to_dict(checks=len(results),
                    tolerance='per-check' if run.tolerance is None else run.tolerance),
        [r.to_dict() for r in results], 'fail' if failing else 'pass'))
    if failing:
        raise click.ClickException('failing checks:\n  ' + '\n  '.join(failing))


def init_app(app):
    app.cli.add_command(verify_inversion_command)
    app.cli.add_command(classify_inversion_command)
    app.cli.add_command(curve_export_command)
    app.cli.add_command(solve_1d_command)
    app.cli.add_command(verify_suite_command)


main = FlaskGroup(create_app=create_app, add_default_commands=False,
                  help='Verify and construct f-biharmonic maps, functions, curves '
                       'and hypersurfaces.')
