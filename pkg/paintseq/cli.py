"""
Command line
Subcommands tying instance I/O, the exact oracles and the QAOA engine together
"""

import io
import logging
import os
import sys
from pathlib import Path

import click
import pandas as pd

from paintseq import __version__, create_settings
from paintseq.errors import (
    EXIT_INVALID,
    EXIT_OK,
    EXIT_USAGE,
    CapacityError,
    InvalidInstanceError,
    NoFeasibleSampleError,
    PaintSeqError,
)
from paintseq.exact import (
    detect_tipping_points,
    rate_range,
    solve_exact,
    solve_qubo_exhaustive,
    sweep_repair_rate,
    write_sweep_csv,
)
from paintseq.fixtures import FIXTURES
from paintseq.models import COST_TOLERANCE, validate_instance
from paintseq.qaoa import QaoaConfig, ansatz_state, optimize, top_k
from paintseq.qubo import Infeasible, build_qubo, decode, sound_penalty
from paintseq.schemas import (
    PlanEntry,
    QaoaParamsEntry,
    QaoaResultFile,
    QuboFile,
    RunManifest,
    SampleEntry,
    SequencePlanFile,
    SweepSummaryFile,
    TippingPointEntry,
    ValidationReportFile,
    ViolationEntry,
    dump_json,
    load_instance,
)
from paintseq.simulator import bits_of, dump_probabilities_csv

logger = logging.getLogger(__name__)


# ============================================================================
# SHARED HELPERS
# ============================================================================

COMMON_OPTIONS = [
    click.argument('instance_path', required=False, type=click.Path(dir_okay=False)),
    click.option('--fixture', type=click.Choice(sorted(FIXTURES)), default=None,
                 help='Use a bundled instance instead of a file.'),
    click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default=None,
                 help='Output format.'),
    click.option('--output', '-o', 'output_path', type=click.Path(dir_okay=False), default=None,
                 help='Result file (standard output when omitted).'),
    click.option('--seed', type=int, default=None, help='Random seed (defaults to configuration).'),
]


def common_options(command):
    """INSTANCE_PATH, --fixture, --format, --output and --seed for every subcommand"""
    for decorator in COMMON_OPTIONS:
        command = decorator(command)
    return command


def resolve_instance(instance_path, fixture):
    if fixture and instance_path:
        raise click.UsageError('give either INSTANCE_PATH or --fixture, not both')
    if fixture:
        return FIXTURES[fixture]()
    if not instance_path:
        raise click.UsageError('missing INSTANCE_PATH (or --fixture)')
    return load_instance(instance_path)


def make_manifest(command, instance_path, fixture, seed=None, **config):
    return RunManifest(
        command=command,
        instance_path=str(instance_path) if instance_path else None,
        fixture=fixture,
        config={k: v for k, v in sorted(config.items())},
        seed=seed,
    )


def emit(text, output_path):
    if output_path:
        Path(output_path).write_text(text, encoding='utf-8')
        logger.info('Wrote %s', output_path)
    else:
        click.echo(text, nl=False)


def frame_text(frame):
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format='%.6f', lineterminator='\n')
    return buffer.getvalue()


def agrees_with_exact(best, exact):
    """Same order as the exact optimum, or another order of equal total cost"""
    if exact is None:
        return None
    if best is None:
        return False
    return best.order == exact.order or abs(best.total_cost - exact.total_cost) <= COST_TOLERANCE


def require_valid(instance):
    violations = validate_instance(instance)
    if violations:
        for violation in violations:
            click.echo(f'invalid: {violation}', err=True)
        raise InvalidInstanceError(violations)
    return instance


# ============================================================================
# COMMAND GROUP
# ============================================================================

@click.group()
@click.option('--env', 'config_name', default=lambda: os.environ.get('PAINTSEQ_ENV', 'default'),
              type=click.Choice(['development', 'production', 'testing', 'default']),
              help='Configuration to load.')
@click.option('--log-level', default=None,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
@click.version_option(version=__version__, prog_name='paintseq')
@click.pass_context
def cli(ctx, config_name, log_level):
    """Paint shop vehicle sequencing: exact oracles and QAOA."""
    settings = create_settings(config_name)
    logging.basicConfig(
        level=(log_level or settings['LOG_LEVEL']).upper(),
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    ctx.obj = settings


# ============================================================================
# VALIDATE / SOLVE-EXACT / BUILD-QUBO
# ============================================================================

@cli.command('validate')
@common_options
@click.pass_obj
def validate_command(settings, instance_path, fixture, seed, output_path, fmt):
    """Check an instance file and report every violation."""
    instance = resolve_instance(instance_path, fixture)
    violations = validate_instance(instance)
    if fmt == 'csv':
        text = frame_text(pd.DataFrame(
            [(v.code, v.message) for v in violations], columns=['code', 'message']
        ))
    else:
        text = dump_json(ValidationReportFile(
            manifest=make_manifest('validate', instance_path, fixture),
            valid=not violations,
            violations=[ViolationEntry(code=v.code, message=v.message) for v in violations],
        ))
    emit(text, output_path)
    for violation in violations:
        click.echo(f'invalid: {violation}', err=True)
    return EXIT_INVALID if violations else EXIT_OK


@cli.command('solve-exact')
@common_options
@click.option('--repair-rate', type=click.FloatRange(min=0), default=None,
              help='Replace the instance repair rate.')
@click.pass_obj
def solve_exact_command(settings, instance_path, fixture, seed, output_path, fmt, repair_rate):
    """Enumerate every order and write the optimal sequence."""
    instance = require_valid(resolve_instance(instance_path, fixture))
    if repair_rate is not None:
        instance = instance.with_repair_rate(repair_rate)
    plan = solve_exact(instance, cap=settings['ENUMERATION_CAP'])

    if fmt == 'csv':
        frame = pd.DataFrame([{
            'order': '-'.join(map(str, plan.order)),
            'total_cost': plan.total_cost,
            'changeover_cost': plan.changeover_cost,
            'repair_cost': plan.repair_cost,
            'changeover_count': plan.changeover_count,
        }])
        text = frame_text(frame)
    else:
        manifest = make_manifest('solve-exact', instance_path, fixture,
                                 enumeration_cap=settings['ENUMERATION_CAP'], repair_rate=repair_rate)
        text = dump_json(SequencePlanFile(manifest=manifest, plan=PlanEntry.from_plan(plan)))
    emit(text, output_path)
    return EXIT_OK


@cli.command('build-qubo')
@common_options
@click.option('--penalty', type=float, default=None, help='Penalty weight (auto when omitted).')
@click.pass_obj
def build_qubo_command(settings, instance_path, fixture, seed, output_path, fmt, penalty):
    """Compile an instance into its penalized QUBO and export it."""
    instance = require_valid(resolve_instance(instance_path, fixture))
    bound = sound_penalty(instance)
    if penalty is not None and penalty < bound:
        click.echo(f'warning: penalty {penalty:g} is below the sound bound {bound:g}; '
                   'infeasible bitstrings may beat feasible ones', err=True)
    model = build_qubo(instance, penalty)
    click.echo(f'penalty: {model.penalty:g} (sound bound {bound:g}), variables: {model.num_variables}',
               err=True)
    if model.num_variables <= settings['QUBO_EXHAUSTIVE_MAX_BITS']:
        bits, cost = solve_qubo_exhaustive(model, max_bits=settings['QUBO_EXHAUSTIVE_MAX_BITS'])
        plan = decode(model, bits)
        minimizer = 'infeasible' if isinstance(plan, Infeasible) else '-'.join(map(str, plan.order))
        click.echo(f'exhaustive minimum: {cost:g} ({minimizer})', err=True)

    if fmt == 'csv':
        rows = [(k, k, c) for k, c in enumerate(model.linear)]
        rows += [(u, v, c) for (u, v), c in sorted(model.quadratic.items())]
        text = frame_text(pd.DataFrame(rows, columns=['u', 'v', 'coeff']))
    else:
        manifest = make_manifest('build-qubo', instance_path, fixture, penalty=penalty)
        text = dump_json(QuboFile.from_model(model, bound, manifest))
    emit(text, output_path)
    return EXIT_OK


# ============================================================================
# RUN-QAOA
# ============================================================================

@cli.command('run-qaoa')
@common_options
@click.option('--levels', type=click.IntRange(min=1), default=None, help='QAOA level p.')
@click.option('--shots', type=click.IntRange(min=1), default=None)
@click.option('--restarts', type=click.IntRange(min=0), default=None)
@click.option('--grid', type=click.IntRange(min=1), default=None, help='Seed grid resolution per axis.')
@click.option('--max-iterations', type=click.IntRange(min=1), default=None)
@click.option('--top-k', 'top_k_count', type=click.IntRange(min=1), default=None)
@click.option('--penalty', type=float, default=None)
@click.option('--repair-rate', type=click.FloatRange(min=0), default=None,
              help='Replace the instance repair rate.')
@click.option('--fallback-exact', is_flag=True, help='Use the exact optimum when no sample is feasible.')
@click.option('--dump-probabilities', type=click.Path(dir_okay=False), default=None,
              help='Write the final probability vector as CSV.')
@click.pass_obj
def run_qaoa_command(settings, instance_path, fixture, seed, output_path, fmt, levels, shots,
                     restarts, grid, max_iterations, top_k_count, penalty, repair_rate,
                     fallback_exact, dump_probabilities):
    """Optimize the QAOA ansatz and read out the best sampled sequence."""
    instance = require_valid(resolve_instance(instance_path, fixture))
    if repair_rate is not None:
        instance = instance.with_repair_rate(repair_rate)
    config = QaoaConfig.from_settings(
        settings, levels=levels, shots=shots, restarts=restarts, grid_resolution=grid,
        max_iterations=max_iterations, seed=seed,
    )
    k = top_k_count or settings['TOP_K']
    model = build_qubo(instance, penalty)
    result = optimize(model, config)

    exact = None
    if instance.n <= settings['ENUMERATION_CAP']:
        exact = solve_exact(instance, cap=settings['ENUMERATION_CAP'])

    best = result.best_feasible
    provenance = 'qaoa' if best is not None else None
    if best is None and fallback_exact:
        if exact is None:
            raise CapacityError('no feasible sample and the instance is too large for the exact fallback')
        logger.warning('No feasible sample; reporting the exact optimum instead')
        best, provenance = exact, 'exact-fallback'

    feasible_shots = sum(
        count for index, count in result.samples.items()
        if not isinstance(decode(model, bits_of(index, model.num_variables)), Infeasible)
    )
    rows = top_k(model, result.samples, result.shots, k)

    if dump_probabilities:
        dump_probabilities_csv(ansatz_state(model, result.best_params, max_qubits=config.max_qubits),
                               dump_probabilities)

    if fmt == 'csv':
        text = frame_text(pd.DataFrame(
            [(r['bitstring'], r['probability'], '-'.join(map(str, r['order'])) if r['order'] else '')
             for r in rows],
            columns=['bitstring', 'probability', 'order'],
        ))
    else:
        manifest = make_manifest(
            'run-qaoa', instance_path, fixture, seed=config.seed,
            levels=config.levels, shots=config.shots, restarts=config.restarts,
            grid=config.grid_resolution, max_iterations=config.max_iterations,
            tolerance=config.convergence_tolerance, penalty=model.penalty, top_k=k,
            repair_rate=repair_rate, fallback_exact=fallback_exact,
        )
        document = QaoaResultFile(
            manifest=manifest,
            params=QaoaParamsEntry(levels=result.best_params.levels,
                                   gammas=list(result.best_params.gammas),
                                   betas=list(result.best_params.betas)),
            expectation=result.best_expectation,
            baseline_expectation=result.baseline_expectation,
            trace=[(int(i), float(v)) for i, v in result.optimizer_trace],
            shots=result.shots,
            feasible_fraction=feasible_shots / result.shots,
            top_samples=[SampleEntry(**row) for row in rows],
            best_feasible=PlanEntry.from_plan(best),
            provenance=provenance,
            exact=PlanEntry.from_plan(exact),
            matches_exact=agrees_with_exact(best, exact),
        )
        text = dump_json(document)
    emit(text, output_path)

    if best is None:
        raise NoFeasibleSampleError(f'no feasible bitstring among {result.shots} shots; '
                                    'rerun with more shots or --fallback-exact')
    return EXIT_OK


# ============================================================================
# SWEEP
# ============================================================================

def parse_rates(text):
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f'not a comma-separated list of numbers: {text}') from e


@cli.command('sweep')
@common_options
@click.option('--rates', default=None, help='Comma-separated repair rates.')
@click.option('--rate-range', 'rate_range_values', nargs=3, type=float, default=None, metavar='START STOP STEP',
              help='Inclusive repair-rate range.')
@click.option('--summary', 'summary_path', type=click.Path(dir_okay=False), default=None,
              help='Tipping-point summary JSON (next to --output when omitted).')
@click.pass_obj
def sweep_command(settings, instance_path, fixture, seed, output_path, fmt, rates,
                  rate_range_values, summary_path):
    """Re-solve exactly across repair rates and report tipping points."""
    if (rates is None) == (not rate_range_values):
        raise click.UsageError('give exactly one of --rates or --rate-range')
    values = parse_rates(rates) if rates is not None else rate_range(*rate_range_values)
    if not values or any(v < 0 for v in values):
        raise click.UsageError('repair rates must be a non-empty list of non-negative numbers')

    instance = require_valid(resolve_instance(instance_path, fixture))
    records = sweep_repair_rate(instance, values, cap=settings['ENUMERATION_CAP'],
                                workers=settings['QAOA_WORKERS'])
    points = detect_tipping_points(records)

    manifest = make_manifest('sweep', instance_path, fixture, rates=values)
    summary = SweepSummaryFile(
        manifest=manifest,
        rates=values,
        csv_path=str(output_path) if output_path else None,
        tipping_points=[TippingPointEntry(**point) for point in points],
    )

    if fmt == 'json':
        document = summary.model_copy(update={'csv_path': None})
        text = dump_json(document)
        emit(text, output_path)
        return EXIT_OK

    buffer = io.StringIO()
    write_sweep_csv(records, buffer)
    emit(buffer.getvalue(), output_path)
    if summary_path is None and output_path:
        summary_path = str(Path(output_path).with_suffix('.summary.json'))
    if summary_path:
        Path(summary_path).write_text(dump_json(summary), encoding='utf-8')
    else:
        click.echo(dump_json(summary), err=True, nl=False)
    for point in points:
        logger.info('Tipping point at repair rate %g: %d -> %d changeovers',
                    point['repair_rate'], point['from_changeovers'], point['to_changeovers'])
    return EXIT_OK


# ============================================================================
# ENTRY POINT
# ============================================================================

def main(argv=None):
    """Run the CLI and return its exit code"""
    try:
        result = cli.main(args=argv, prog_name='paintseq', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo('aborted', err=True)
        return EXIT_USAGE
    except PaintSeqError as e:
        click.echo(f'error: {e}', err=True)
        return e.exit_code
    return result if isinstance(result, int) else EXIT_OK
