"""
Parsing services

Glue between the file formats, the decoders and the outer surfaces (CLI and
HTTP). Every public entry point returns a result dictionary of the form
{'success': bool, 'error': str|None, ...}; nothing here raises for bad input.

- Load lexicons and decoder settings from config
- Evaluate and type-check trees
- Run any decoder over a cost file, optionally on a worker pool
- Generate oracle sequences, completions and fuzz episodes
- Validate and augment lexicons, generate synthetic costs, benchmark
"""

import logging
import multiprocessing
import os
import random
import statistics
import time
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from amparser.astar import HEURISTICS, IGNORE_AWARE, astar_parse
from amparser.chart import chart_parse
from amparser.costs import INF, CostFileError, SentenceCosts, SyntheticParams, dump_costs, gen_synthetic, load_costs
from amparser.evaluation import check_well_typed, evaluate_tree
from amparser.formats import FormatError, TreeRecord, read_lexicon, read_trees, write_graph, write_lexicon, write_trees
from amparser.lexicon import Lexicon, LexiconNotClosed, augment_closure, require_closed, validate_closure
from amparser.models import STATUS_LIMIT, STATUS_NO_PARSE, STATUS_OK
from amparser.oracles import complete_config, fuzz_episode, oracle_sequence, replay
from amparser.transitions import LTF, LTL, SYSTEMS, TransitionSystem, decode, parse_transition, trace_table

logger = logging.getLogger(__name__)

CHART = 'chart'
ASTAR = 'astar'
DECODERS = (CHART, ASTAR, LTF, LTL)

# exit codes shared by the CLI
EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_PARSE = 2
EXIT_LIMIT = 3


@dataclass(frozen=True)
class DecoderSettings:
    decoder: str = ASTAR
    heuristic: str = IGNORE_AWARE
    k_supertags: Optional[int] = 6
    dequeue_limit: int = 1_000_000
    beam: int = 1
    jobs: int = 1
    type_check: bool = True
    augment: bool = False
    debug_checks: bool = False
    trace: bool = False

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f'Unknown decoder {self.decoder!r}; expected one of {", ".join(DECODERS)}')
        if self.heuristic not in HEURISTICS:
            raise ValueError(f'Unknown heuristic {self.heuristic!r}; expected one of {", ".join(HEURISTICS)}')
        if self.k_supertags is not None and self.k_supertags < 1:
            raise ValueError('k_supertags must be at least 1')
        if self.beam < 1 or self.jobs < 1 or self.dequeue_limit < 1:
            raise ValueError('beam, jobs and dequeue_limit must be at least 1')
        if not self.type_check and self.decoder != LTL:
            raise ValueError('--no-type-check is only available for the ltl decoder')

    @property
    def mode(self) -> str:
        if self.decoder == ASTAR:
            return self.heuristic
        if self.decoder in SYSTEMS:
            return f'{"typed" if self.type_check else "untyped"}, beam {self.beam}'
        return 'exhaustive'

    @classmethod
    def from_config(cls, config: Mapping, **overrides) -> 'DecoderSettings':
        """Settings from AMPARSER_* config keys; None overrides are ignored and k_supertags 0 keeps every constant."""
        k = config.get('AMPARSER_K_SUPERTAGS', 6)
        values = {
            'decoder': config.get('AMPARSER_DECODER', ASTAR),
            'heuristic': config.get('AMPARSER_HEURISTIC', IGNORE_AWARE),
            'k_supertags': int(k) if k else None,
            'dequeue_limit': int(config.get('AMPARSER_DEQUEUE_LIMIT', 1_000_000)),
            'beam': int(config.get('AMPARSER_BEAM', 1)),
            'jobs': int(config.get('AMPARSER_JOBS', 1)),
            'debug_checks': bool(config.get('AMPARSER_DEBUG_CHECKS', False)),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        if values['k_supertags'] == 0:
            values['k_supertags'] = None
        return cls(**values)


def config_values(config_class) -> Dict:
    """Upper-case attributes of a config class, the way Flask's from_object reads them."""
    return {key: getattr(config_class, key) for key in dir(config_class) if key.isupper()}


def _failure(error: str, **extra) -> Dict:
    result = {'success': False, 'error': error, 'exit_code': EXIT_INPUT}
    result.update(extra)
    return result


def _read(source: str) -> str:
    """File contents when `source` names an existing file, otherwise the text itself."""
    if '\n' not in source and os.path.isfile(source):
        with open(source, 'r', encoding='utf-8') as f:
            return f.read()
    return source


def load_lexicon(source: str) -> Lexicon:
    name = os.path.splitext(os.path.basename(source))[0] if '\n' not in source and os.path.isfile(source) else 'lexicon'
    return read_lexicon(_read(source), name=name)


def _transition_lexicon(lexicon: Lexicon, augment: bool) -> Lexicon:
    if augment:
        return augment_closure(lexicon)
    return require_closed(lexicon)


# -- per-sentence decoding ----------------------------------------------------

def decode_sentence(costs: SentenceCosts, lexicon: Lexicon, settings: DecoderSettings) -> Dict:
    """
    Run the configured decoder on one sentence. The lexicon must already be
    closed for the transition decoders.
    """
    started = time.perf_counter()
    trace = None
    if settings.decoder == CHART:
        outcome = chart_parse(costs, lexicon, k_tags=settings.k_supertags)
    elif settings.decoder == ASTAR:
        outcome = astar_parse(costs, lexicon, kind=settings.heuristic, k_tags=settings.k_supertags,
                              dequeue_limit=settings.dequeue_limit)
    else:
        system = TransitionSystem(lexicon, settings.decoder, type_check=settings.type_check,
                                  debug=settings.debug_checks)
        outcome, configs, transitions = decode(costs, system, beam=settings.beam)
        if settings.trace:
            trace = trace_table(configs, transitions, costs.forms)
    elapsed = time.perf_counter() - started
    well_typed = None
    if outcome.tree is not None:
        well_typed = check_well_typed(outcome.tree, lexicon).ok
        if not well_typed and settings.type_check:
            logger.error(f'Sentence {costs.sid}: {settings.decoder} produced an ill-typed tree')
    record = {
        'sid': costs.sid,
        'n': costs.n,
        'decoder': settings.decoder,
        'mode': settings.mode,
        'status': outcome.status,
        'cost': None if outcome.cost == INF else outcome.cost,
        'well_typed': well_typed,
        'stats': outcome.stats,
        'seconds': elapsed,
        'tree': outcome.tree,
    }
    if trace is not None:
        record['trace'] = trace
    if outcome.status == STATUS_OK:
        logger.info(f'Sentence {costs.sid}: cost {outcome.cost:g} ({settings.decoder}, {elapsed:.3f}s)')
    else:
        logger.warning(f'Sentence {costs.sid}: {outcome.status} ({settings.decoder})')
    return record


def _decode_worker(job: Tuple[SentenceCosts, Lexicon, DecoderSettings]) -> Dict:
    costs, lexicon, settings = job
    return decode_sentence(costs, lexicon, settings)


def _run_jobs(worker, jobs: Sequence, processes: int) -> List:
    """Map `worker` over jobs, in order; a pool only when more than one process is asked for."""
    if processes <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with multiprocessing.Pool(processes=min(processes, len(jobs))) as pool:
        return list(pool.imap(worker, jobs))


def _exit_code(records: Iterable[Dict]) -> int:
    statuses = {r['status'] for r in records}
    if STATUS_LIMIT in statuses:
        return EXIT_LIMIT
    if STATUS_NO_PARSE in statuses:
        return EXIT_NO_PARSE
    return EXIT_OK


def run_report(records: Sequence[Dict]) -> Dict:
    """Per-sentence rows plus totals; trees are left out (they go to the trees file)."""
    rows = [{key: value for key, value in r.items() if key != 'tree'} for r in records]
    tokens = sum(r['n'] for r in records)
    seconds = sum(r['seconds'] for r in records)
    return {
        'sentences': rows,
        'totals': {
            'sentences': len(records),
            'tokens': tokens,
            'seconds': seconds,
            'tokens_per_second': tokens / seconds if seconds > 0 else None,
            'ok': sum(1 for r in records if r['status'] == STATUS_OK),
            'no_parse': sum(1 for r in records if r['status'] == STATUS_NO_PARSE),
            'limit': sum(1 for r in records if r['status'] == STATUS_LIMIT),
            'ill_typed': sum(1 for r in records if r['well_typed'] is False),
        },
    }


class ParsingService:
    """Entry points shared by the CLI and the HTTP API."""

    @classmethod
    def evaluate(cls, tree_text: str, lexicon: Lexicon) -> Dict:
        """
        Type-check and evaluate every tree of a tree file.

        Returns:
            dict with 'graphs' (graph file text), 'reports' (typing reports)
            and, on failure, the first failing report.
        """
        try:
            records = read_trees(tree_text)
        except FormatError as e:
            return _failure(f'Invalid tree file: {e}')
        blocks = []
        reports = []
        for record in records:
            if record.tree is None:
                continue
            report = check_well_typed(record.tree, lexicon)
            reports.append({'sid': record.sid, **report.to_dict()})
            if not report.ok:
                token, reason = report.failure
                logger.error(f'Tree {record.sid} is not well-typed at token {token}: {reason}')
                return _failure(f'Tree {record.sid} is not well-typed at token {token}: {reason}', reports=reports)
            graph = evaluate_tree(record.tree, lexicon, report)
            blocks.append(write_graph(record.sid, graph))
        return {'success': True, 'error': None, 'exit_code': EXIT_OK,
                'graphs': '\n'.join(blocks), 'reports': reports}

    @classmethod
    def parse(cls, costs_text: str, lexicon: Lexicon, settings: DecoderSettings) -> Dict:
        """
        Decode every sentence of a cost file.

        Returns:
            dict with 'trees' (tree file text, NO-PARSE/LIMIT markers
            included), 'report' (run report) and 'exit_code'.
        """
        try:
            sentences = load_costs(costs_text)
        except CostFileError as e:
            return _failure(f'Invalid cost file: {e}')
        if settings.decoder in SYSTEMS:
            try:
                lexicon = _transition_lexicon(lexicon, settings.augment)
            except LexiconNotClosed as e:
                return _failure(f'{e}; rerun with --augment', closure=e.report.to_dict())
        elif settings.augment:
            lexicon = augment_closure(lexicon)
        jobs = [(costs, lexicon, settings) for costs in sentences]
        try:
            records = _run_jobs(_decode_worker, jobs, settings.jobs)
        except RuntimeError as e:
            logger.error(f'Decoding failed: {e}')
            return _failure(str(e))
        trees = write_trees(TreeRecord(r['sid'], r['tree'], r['status']) for r in records)
        return {'success': True, 'error': None, 'exit_code': _exit_code(records),
                'trees': trees, 'report': run_report(records), 'records': records}

    @classmethod
    def oracle(cls, tree_text: str, lexicon: Lexicon, system: str, augment: bool = False) -> Dict:
        """Transition sequences that build each tree of a tree file."""
        try:
            records = read_trees(tree_text)
            ts = TransitionSystem(_transition_lexicon(lexicon, augment), system)
        except (FormatError, LexiconNotClosed, ValueError) as e:
            return _failure(str(e))
        sequences = []
        for record in records:
            if record.tree is None:
                continue
            try:
                sequence = oracle_sequence(record.tree, ts)
            except ValueError as e:
                return _failure(f'Tree {record.sid}: {e}')
            sequences.append({'sid': record.sid, 'transitions': [str(tr) for tr in sequence]})
        return {'success': True, 'error': None, 'exit_code': EXIT_OK, 'sequences': sequences}

    @classmethod
    def complete(cls, lexicon: Lexicon, system: str, n: int, prefix: Sequence[str],
                 augment: bool = False, debug: bool = False) -> Dict:
        """Replay a transition prefix over n tokens, then complete it to a goal."""
        try:
            ts = TransitionSystem(_transition_lexicon(lexicon, augment), system, debug=debug)
            configs = replay(ts, n, [parse_transition(text) for text in prefix])
            rest, goal = complete_config(ts, configs[-1])
        except (FormatError, LexiconNotClosed, ValueError) as e:
            return _failure(str(e))
        return {'success': True, 'error': None, 'exit_code': EXIT_OK,
                'completion': [str(tr) for tr in rest], 'goal': goal.canonical()}

    @classmethod
    def fuzz(cls, lexicon: Lexicon, system: str, episodes: int, seed: int, n_min: int = 1, n_max: int = 6,
             steps: Optional[int] = None, weighted: bool = False, augment: bool = False,
             jobs: int = 1) -> Dict:
        """
        Random-walk episodes with seeds seed, seed+1, ...; each episode draws
        its sentence length from its own seed.
        """
        if not 1 <= n_min <= n_max:
            return _failure(f'Need 1 <= n_min <= n_max, got {n_min}..{n_max}')
        try:
            lexicon = _transition_lexicon(lexicon, augment)
            TransitionSystem(lexicon, system)
        except (LexiconNotClosed, ValueError) as e:
            return _failure(str(e))
        plan = []
        for k in range(episodes):
            rng = random.Random(seed + k)
            n = rng.randint(n_min, n_max)
            plan.append((seed + k, lexicon, system, n, steps if steps is not None else 3 * n, weighted))
        results = _run_jobs(_fuzz_worker, plan, jobs)
        ill_typed = sum(1 for r in results if not r['well_typed'])
        if ill_typed:
            logger.error(f'{ill_typed} of {len(results)} fuzz episodes ended in ill-typed trees')
        return {'success': ill_typed == 0, 'error': f'{ill_typed} ill-typed outcomes' if ill_typed else None,
                'exit_code': EXIT_OK if ill_typed == 0 else EXIT_INPUT, 'episodes': results}

    @classmethod
    def validate_lexicon(cls, lexicon: Lexicon) -> Dict:
        report = validate_closure(lexicon)
        for assumption, witness in report.violations:
            logger.warning(f'Closure assumption {assumption} violated: {witness}')
        return {'success': report.closed, 'error': None if report.closed else 'lexicon is not closed',
                'exit_code': EXIT_OK if report.closed else EXIT_INPUT, 'report': report.to_dict()}

    @classmethod
    def augment_lexicon(cls, lexicon: Lexicon) -> Dict:
        augmented = augment_closure(lexicon)
        return {'success': True, 'error': None, 'exit_code': EXIT_OK, 'lexicon': write_lexicon(augmented),
                'added': sorted(set(augmented.constants) - set(lexicon.constants))}

    @classmethod
    def gen_costs(cls, lexicon: Lexicon, seed: int, count: int, n_min: int, n_max: int,
                  params: Optional[SyntheticParams] = None) -> Dict:
        """Synthetic cost file: sentence k uses seed+k for both its length and its costs."""
        if not 1 <= n_min <= n_max:
            return _failure(f'Need 1 <= n_min <= n_max, got {n_min}..{n_max}')
        sentences = []
        for k in range(count):
            n = random.Random(seed + k).randint(n_min, n_max)
            sentences.append(gen_synthetic(seed + k, n, lexicon, params, sid=f's{seed + k}'))
        return {'success': True, 'error': None, 'exit_code': EXIT_OK, 'costs': dump_costs(sentences)}

    @classmethod
    def bench(cls, costs_text: str, lexicon: Lexicon, decoders: Sequence[str] = DECODERS,
              heuristics: Sequence[str] = HEURISTICS, repeat: int = 1, base: Optional[DecoderSettings] = None) -> Dict:
        """
        Time every decoder (A* once per heuristic) on every sentence; the
        reported time is the median over `repeat` runs.
        """
        if repeat < 1:
            return _failure('repeat must be at least 1')
        try:
            sentences = load_costs(costs_text)
        except CostFileError as e:
            return _failure(f'Invalid cost file: {e}')
        base = base or DecoderSettings()
        matrix = []
        for decoder in decoders:
            modes = heuristics if decoder == ASTAR else [base.heuristic]
            for heuristic in modes:
                matrix.append(replace(base, decoder=decoder, heuristic=heuristic, jobs=1, trace=False))
        if any(s.decoder in SYSTEMS for s in matrix):
            lexicon = augment_closure(lexicon) if base.augment else lexicon
            if not validate_closure(lexicon).closed:
                return _failure('transition decoders need a closed lexicon; rerun with --augment')
        rows = []
        for settings in matrix:
            for costs in sentences:
                runs = [decode_sentence(costs, lexicon, settings) for _ in range(repeat)]
                first = runs[0]
                rows.append({
                    'decoder': settings.decoder,
                    'mode': settings.mode,
                    'sid': costs.sid,
                    'n': costs.n,
                    'status': first['status'],
                    'cost': first['cost'],
                    'dequeued': first['stats'].get('dequeued'),
                    'pushed': first['stats'].get('pushed'),
                    'items': first['stats'].get('items'),
                    'transitions': first['stats'].get('transitions'),
                    'seconds': statistics.median(r['seconds'] for r in runs),
                })
        return {'success': True, 'error': None, 'exit_code': EXIT_OK, 'rows': rows, 'table': bench_table(rows)}


def _fuzz_worker(job) -> Dict:
    seed, lexicon, system, n, steps, weighted = job
    ts = TransitionSystem(lexicon, system)
    episode = fuzz_episode(seed, ts, n, steps, weighted=weighted)
    result = episode.to_dict()
    result['well_typed'] = check_well_typed(episode.tree, lexicon).ok
    return result


BENCH_COLUMNS = ('decoder', 'mode', 'sid', 'n', 'status', 'cost', 'dequeued', 'pushed', 'items', 'transitions',
                 'seconds')


def bench_table(rows: Sequence[Dict]) -> str:
    """Aligned plain-text table of benchmark rows."""
    def cell(value) -> str:
        if value is None:
            return '-'
        if isinstance(value, float):
            return f'{value:.4f}'
        return str(value)

    cells = [[cell(row[c]) for c in BENCH_COLUMNS] for row in rows]
    widths = [max([len(c)] + [len(r[k]) for r in cells]) for k, c in enumerate(BENCH_COLUMNS)]
    lines = ['  '.join(c.ljust(w) for c, w in zip(BENCH_COLUMNS, widths))]
    lines.extend('  '.join(v.ljust(w) for v, w in zip(r, widths)) for r in cells)
    return '\n'.join(line.rstrip() for line in lines) + '\n'
