"""
Command-line interface.

Machine-readable output (trees, graphs, JSON lines, lexicons) goes to stdout
or --output; logging goes to stderr. Exit codes: 0 success, 1 input error,
2 a sentence had no parse, 3 a search limit was hit.
"""

import json
import logging
import os
import sys

import click

from amparser import __version__
from amparser.astar import HEURISTICS
from amparser.costs import SyntheticParams
from amparser.formats import FormatError
from amparser.lexicon import augment_closure
from amparser.services import (DECODERS, EXIT_INPUT, DecoderSettings, ParsingService, config_values,
                               load_lexicon)
from amparser.transitions import SYSTEMS

logger = logging.getLogger(__name__)


def _emit(text, output):
    if output:
        with open(output, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        click.echo(text, nl=not text.endswith('\n'))


def _lexicon(ctx, path):
    path = path or ctx.obj['AMPARSER_LEXICON']
    try:
        return load_lexicon(path)
    except (FormatError, OSError) as e:
        click.echo(f'Cannot read lexicon {path}: {e}', err=True)
        ctx.exit(EXIT_INPUT)


def _finish(ctx, result):
    if not result['success'] and result.get('error'):
        click.echo(f'Error: {result["error"]}', err=True)
    ctx.exit(result['exit_code'])


lexicon_option = click.option('--lexicon', '-l', type=click.Path(exists=True, dir_okay=False),
                              help='Lexicon file (default: AMPARSER_LEXICON).')
output_option = click.option('--output', '-o', type=click.Path(dir_okay=False),
                              help='Write to a file instead of stdout.')
system_option = click.option('--system', type=click.Choice(SYSTEMS), default='ltf', show_default=True)
augment_option = click.option('--augment', is_flag=True, help='Close the lexicon first.')


@click.group()
@click.option('--config', 'config_name', default=lambda: os.environ.get('AMPARSER_ENV', 'production'),
              type=click.Choice(['development', 'production', 'testing']),
              help='Configuration class to read defaults from.')
@click.option('--log-level', default=None, help='Overrides LOG_LEVEL.')
@click.version_option(version=__version__, prog_name='amparser')
@click.pass_context
def cli(ctx, config_name, log_level):
    """Decoders, checkers and oracles for AM dependency parsing."""
    from config import config_by_name

    ctx.obj = config_values(config_by_name(config_name))
    logging.basicConfig(level=(log_level or ctx.obj['LOG_LEVEL']).upper(), stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


@cli.command()
@click.argument('trees', type=click.File('r'))
@lexicon_option
@output_option
@click.pass_context
def evaluate(ctx, trees, lexicon, output):
    """Evaluate the trees of TREES to graphs."""
    result = ParsingService.evaluate(trees.read(), _lexicon(ctx, lexicon))
    if result['success']:
        _emit(result['graphs'], output)
    else:
        for report in result.get('reports', []):
            if not report['ok']:
                click.echo(json.dumps(report), err=True)
    _finish(ctx, result)


@cli.command()
@click.argument('costs', type=click.File('r'))
@lexicon_option
@output_option
@click.option('--decoder', type=click.Choice(DECODERS), default=None, help='Default: AMPARSER_DECODER.')
@click.option('--heuristic', type=click.Choice(HEURISTICS), default=None, help='A* outside estimate.')
@click.option('--k-supertags', type=int, default=None, help='Init keeps the k cheapest constants (0: all).')
@click.option('--dequeue-limit', type=int, default=None)
@click.option('--beam', type=int, default=None, help='Beam width for ltf/ltl.')
@click.option('--jobs', type=int, default=None, help='Worker processes.')
@click.option('--trace', is_flag=True, help='Print derivation tables of transition decoders to stderr.')
@click.option('--no-type-check', is_flag=True, help='ltl only: drop the type guards.')
@augment_option
@click.option('--debug-checks', is_flag=True, help='Check invariants after every transition.')
@click.option('--report', type=click.Path(dir_okay=False), help='Write the JSON run report here.')
@click.pass_context
def parse(ctx, costs, lexicon, output, decoder, heuristic, k_supertags, dequeue_limit, beam, jobs, trace,
          no_type_check, augment, debug_checks, report):
    """Decode every sentence of COSTS."""
    lex = _lexicon(ctx, lexicon)
    try:
        settings = DecoderSettings.from_config(
            ctx.obj, decoder=decoder, heuristic=heuristic,
            k_supertags=k_supertags,
            dequeue_limit=dequeue_limit, beam=beam, jobs=jobs, trace=trace or None,
            type_check=False if no_type_check else None, augment=augment or None,
            debug_checks=debug_checks or None)
    except ValueError as e:
        raise click.UsageError(str(e))
    result = ParsingService.parse(costs.read(), lex, settings)
    if result['success']:
        _emit(result['trees'], output)
        if report:
            with open(report, 'w', encoding='utf-8') as f:
                json.dump(result['report'], f, indent=2)
        if trace:
            for record in result['records']:
                for row in record.get('trace', []):
                    click.echo('\t'.join(row[k] for k in ('step', 'E', 'T', 'A', 'G', 'stack', 'transition')),
                               err=True)
        totals = result['report']['totals']
        logger.info(f'{totals["ok"]}/{totals["sentences"]} sentences parsed, {totals["ill_typed"]} ill-typed')
    _finish(ctx, result)


@cli.command()
@click.argument('trees', type=click.File('r'))
@lexicon_option
@output_option
@system_option
@augment_option
@click.pass_context
def oracle(ctx, trees, lexicon, output, system, augment):
    """Print the transition sequence that builds each tree of TREES."""
    result = ParsingService.oracle(trees.read(), _lexicon(ctx, lexicon), system, augment)
    if result['success']:
        lines = []
        for sequence in result['sequences']:
            lines.append(f'# sentence {sequence["sid"]}')
            lines.extend(sequence['transitions'])
            lines.append('')
        _emit('\n'.join(lines), output)
    _finish(ctx, result)


@cli.command()
@click.argument('prefix', type=click.File('r'), required=False)
@click.option('--n', 'n', type=int, required=True, help='Sentence length.')
@lexicon_option
@output_option
@system_option
@augment_option
@click.option('--debug-checks', is_flag=True)
@click.pass_context
def complete(ctx, prefix, n, lexicon, output, system, augment, debug_checks):
    """Complete a transition prefix (one transition per line in PREFIX) to a goal configuration."""
    lines = [line.strip() for line in prefix.read().splitlines()] if prefix else []
    transitions = [line for line in lines if line and not line.startswith('#')]
    result = ParsingService.complete(_lexicon(ctx, lexicon), system, n, transitions, augment,
                                     debug_checks or ctx.obj['AMPARSER_DEBUG_CHECKS'])
    if result['success']:
        _emit('\n'.join(result['completion']) + '\n', output)
    _finish(ctx, result)


@cli.command()
@lexicon_option
@output_option
@system_option
@augment_option
@click.option('--episodes', type=int, default=100, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--n-min', type=int, default=1, show_default=True)
@click.option('--n-max', type=int, default=6, show_default=True)
@click.option('--steps', type=int, default=None, help='Random transitions per episode (default: 3n).')
@click.option('--weighted', is_flag=True, help='Favour Apply and Modify.')
@click.option('--jobs', type=int, default=None)
@click.pass_context
def fuzz(ctx, lexicon, output, system, augment, episodes, seed, n_min, n_max, steps, weighted, jobs):
    """Random-walk episodes, one JSON object per line."""
    result = ParsingService.fuzz(_lexicon(ctx, lexicon), system, episodes, seed, n_min, n_max, steps, weighted,
                                 augment, jobs or ctx.obj['AMPARSER_JOBS'])
    if 'episodes' in result:
        _emit(''.join(json.dumps(e, sort_keys=True) + '\n' for e in result['episodes']), output)
    _finish(ctx, result)


@cli.command('validate-lexicon')
@click.argument('lexicon', type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def validate_lexicon(ctx, lexicon):
    """Check the closure assumptions of LEXICON."""
    result = ParsingService.validate_lexicon(_lexicon(ctx, lexicon))
    click.echo(json.dumps(result['report'], indent=2))
    _finish(ctx, result)


@cli.command('augment-lexicon')
@click.argument('lexicon', type=click.Path(exists=True, dir_okay=False))
@output_option
@click.pass_context
def augment_lexicon(ctx, lexicon, output):
    """Close LEXICON by adding types, labels and synthesized constants."""
    result = ParsingService.augment_lexicon(_lexicon(ctx, lexicon))
    _emit(result['lexicon'], output)
    if result['added']:
        logger.info(f'Added constants: {", ".join(result["added"])}')
    _finish(ctx, result)


@cli.command('gen-costs')
@lexicon_option
@output_option
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--count', type=int, default=10, show_default=True)
@click.option('--n-min', type=int, default=2, show_default=True)
@click.option('--n-max', type=int, default=7, show_default=True)
@click.option('--lo', type=float, default=0.0, show_default=True)
@click.option('--hi', type=float, default=1.0, show_default=True)
@click.option('--decimals', type=int, default=3, show_default=True)
@augment_option
@click.pass_context
def gen_costs(ctx, lexicon, output, seed, count, n_min, n_max, lo, hi, decimals, augment):
    """Synthetic cost file pricing every tag and legal edge."""
    lex = _lexicon(ctx, lexicon)
    if augment:
        lex = augment_closure(lex)
    try:
        params = SyntheticParams(lo, hi, decimals)
    except ValueError as e:
        raise click.UsageError(str(e))
    result = ParsingService.gen_costs(lex, seed, count, n_min, n_max, params)
    if result['success']:
        _emit(result['costs'], output)
    _finish(ctx, result)


@cli.command()
@click.argument('costs', type=click.File('r'))
@lexicon_option
@output_option
@click.option('--decoder', 'decoders', type=click.Choice(DECODERS), multiple=True, help='Repeatable; default: all.')
@click.option('--heuristic', 'heuristics', type=click.Choice(HEURISTICS), multiple=True,
              help='Repeatable; default: all.')
@click.option('--repeat', type=int, default=1, show_default=True)
@click.option('--k-supertags', type=int, default=None)
@augment_option
@click.option('--json', 'as_json', is_flag=True, help='JSON rows instead of a table.')
@click.pass_context
def bench(ctx, costs, lexicon, output, decoders, heuristics, repeat, k_supertags, augment, as_json):
    """Time decoders and heuristics on COSTS."""
    base = DecoderSettings.from_config(ctx.obj, augment=augment or None, k_supertags=k_supertags)
    result = ParsingService.bench(costs.read(), _lexicon(ctx, lexicon), decoders or DECODERS,
                                  heuristics or HEURISTICS, repeat, base)
    if result['success']:
        _emit(json.dumps(result['rows'], indent=2) + '\n' if as_json else result['table'], output)
    _finish(ctx, result)


def main():
    cli(prog_name='amparser')


if __name__ == '__main__':
    main()
