import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from batchgenerators.utilities.file_and_folder_operations import load_json, isfile, join, maybe_mkdir_p

from resilsim.configuration import default_num_processes
from resilsim.engine.metrics import MeanMetrics
from resilsim.engine.montecarlo import run_montecarlo
from resilsim.paths import resilsim_results
from resilsim.scenario_io.contingency import build_contingency_matrix, expected_merit, MERIT_ALIASES
from resilsim.scenario_io.countermeasures import COUNTERMEASURES, BASELINE, apply_countermeasure, parse_measure_label, \
    UnknownCountermeasureError
from resilsim.scenario_io.errors import Problem, ScenarioValidationError
from resilsim.scenario_io.overlays import load_risk_grid, risk_scenarios
from resilsim.scenario_io.scenario import parse_scenario, ScenarioConfig
from resilsim.scenario_io.timeseries import write_timeseries, write_kpis
from resilsim.utilities.log_file import print_to_log_file

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

DEFAULT_MEASURES = tuple(m for m in COUNTERMEASURES if m != BASELINE)


class _UsageError(ValueError):
    pass


def load_document(path: str) -> dict:
    """Raw scenario tree. Broken JSON is reported like any other scenario problem"""
    if not isfile(path):
        raise FileNotFoundError(f'scenario file {path} does not exist')
    try:
        return load_json(path)
    except json.JSONDecodeError as e:
        raise ScenarioValidationError([Problem('$', 'schema', f'{path} is not valid JSON: {e}')])


def _output_folder(out: Optional[str], name: str) -> str:
    if out is not None:
        return out
    if resilsim_results is None:
        raise _UsageError('--out was not given and resilsim_results is not set. See '
                          'documentation/set_environment_variables.md')
    return join(resilsim_results, name)


def _measures(arg: Optional[str]) -> List[str]:
    if arg is None:
        return list(DEFAULT_MEASURES)
    measures = [m.strip() for m in arg.split(',') if m.strip()]
    for m in measures:
        parse_measure_label(m)
    return measures


def _runs_and_seed(config: ScenarioConfig, runs: Optional[int], seed: Optional[int]) -> Tuple[int, int]:
    n_runs = config.monte_carlo.n_runs if runs is None else runs
    master_seed = config.monte_carlo.master_seed if seed is None else seed
    if n_runs < 1:
        raise _UsageError(f'--runs must be >= 1, got {n_runs}')
    if master_seed < 0:
        raise _UsageError(f'--seed must be >= 0, got {master_seed}')
    return n_runs, master_seed


def _check_risk_probabilities(probabilities: Any, labels: List[str], path: str):
    # checked before the grid runs so a typo does not cost a full matrix
    if not isinstance(probabilities, dict):
        raise _UsageError(f'{path}: expected {{risk label: probability}}')
    unknown = sorted(set(probabilities) - set(labels))
    if unknown:
        raise _UsageError(f'{path}: unknown risk scenarios {unknown}. Known: {", ".join(labels)}')
    values = list(probabilities.values())
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0 for v in values) or sum(values) <= 0:
        raise _UsageError(f'{path}: probabilities must be numbers >= 0 with a positive sum')


def validate(scenario_file: str) -> ScenarioConfig:
    config = parse_scenario(load_document(scenario_file))
    print(f'{scenario_file}: ok. {len(config.populations)} population(s), {len(config.hospitals)} hospital(s), '
          f'{len(config.it_nodes)} IT node(s), {len(config.attackers)} attacker(s), horizon {config.horizon} days')
    return config


def simulate(scenario_file: str, out: Optional[str] = None, runs: Optional[int] = None, seed: Optional[int] = None,
             measure: str = BASELINE, num_processes: int = default_num_processes, verbose: bool = False
             ) -> MeanMetrics:
    """Writes run_<i>.csv for every run, mean.csv and kpis.csv (mean end-of-run aggregates) to out"""
    config = apply_countermeasure(parse_scenario(load_document(scenario_file)), measure)
    n_runs, master_seed = _runs_and_seed(config, runs, seed)
    out = _output_folder(out, config.name)
    maybe_mkdir_p(out)
    log_file = join(out, 'resilsim_log.txt')
    print_to_log_file(log_file, f'simulate {scenario_file} measure={measure} runs={n_runs} seed={master_seed}')

    results, mean = run_montecarlo(config, n_runs, master_seed, num_processes, verbose, log_file)
    for i, r in enumerate(results):
        write_timeseries(r, join(out, f'run_{i:03d}.csv'))
    write_timeseries(mean, join(out, 'mean.csv'))
    write_kpis(mean, join(out, 'kpis.csv'))
    print_to_log_file(log_file, f'wrote {n_runs} run timeseries, mean.csv and kpis.csv to {out}')
    return mean


def matrix(scenario_file: str, out: str, risks_file: Optional[str] = None, measures: Sequence[str] = DEFAULT_MEASURES,
           merit: str = 'deaths', runs: Optional[int] = None, seed: Optional[int] = None,
           risk_probs_file: Optional[str] = None, hospital: Optional[str] = None,
           num_processes: int = default_num_processes, verbose: bool = False):
    """
    Runs every (risk scenario, alternative) cell of the grid with the same runs and seed, so all cells see the same
    random streams, and writes the matrix to out (CSV) and out with .txt appended (aligned text)
    """
    if merit not in MERIT_ALIASES:
        raise _UsageError(f'--merit must be one of {", ".join(MERIT_ALIASES)}, got {merit!r}')
    document = load_document(scenario_file)
    base = parse_scenario(document)
    if hospital is not None and hospital not in [h.id for h in base.hospitals]:
        raise _UsageError(f'--hospital {hospital!r} is not a hospital of {scenario_file}')
    dimensions = load_risk_grid(risks_file) if risks_file is not None else []
    grid = {label: parse_scenario(doc) for label, doc in risk_scenarios(document, dimensions).items()}
    columns = [BASELINE] + [m for m in measures if m != BASELINE]
    n_runs, master_seed = _runs_and_seed(base, runs, seed)

    probabilities = None
    if risk_probs_file is not None:
        if not isfile(risk_probs_file):
            raise FileNotFoundError(f'risk probability file {risk_probs_file} does not exist')
        probabilities = load_json(risk_probs_file)
        _check_risk_probabilities(probabilities, list(grid), risk_probs_file)

    out_folder = os.path.dirname(out) or '.'
    maybe_mkdir_p(out_folder)
    log_file = join(out_folder, 'resilsim_log.txt')
    print_to_log_file(log_file, f'matrix {scenario_file}: {len(grid)} risk scenario(s) x {len(columns)} '
                                f'alternative(s), {n_runs} runs each, seed {master_seed}, merit {merit}')
    results: Dict[Tuple[str, str], MeanMetrics] = {}
    for label, config in grid.items():
        for m in columns:
            _, mean = run_montecarlo(apply_countermeasure(config, m), n_runs, master_seed, num_processes, verbose,
                                     log_file)
            results[(label, m)] = mean
            print_to_log_file(log_file, f'{label} / {m} done', also_print_to_console=verbose)

    result = build_contingency_matrix(results, merit, list(grid), columns, hospital)
    result.write_csv(out)
    result.write_text(out + '.txt')
    print(result.to_text())
    if probabilities is not None:
        expected, best = expected_merit(result, probabilities)
        for c, v in expected.items():
            print_to_log_file(log_file, f'expected {result.merit} with {c}: {v:.2f}')
        print_to_log_file(log_file, f'best alternative over the given risk probabilities: {best}')
    print_to_log_file(log_file, f'wrote {out} and {out}.txt')
    return result


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='resilsim', description='Healthcare and IT resilience simulator')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate', help='check a scenario file and report every problem with its key path')
    p.add_argument('scenario', type=str)

    def common(p):
        p.add_argument('--runs', type=int, required=False, default=None,
                       help='[OPTIONAL] number of Monte Carlo runs. Default: monte_carlo.n_runs of the scenario')
        p.add_argument('--seed', type=int, required=False, default=None,
                       help='[OPTIONAL] master seed. Default: monte_carlo.master_seed of the scenario')
        p.add_argument('--parallel', type=int, required=False, default=default_num_processes,
                       help=f'[OPTIONAL] max number of worker processes. Default: {default_num_processes} '
                            f'(RESILSIM_THREADS)')
        p.add_argument('--verbose', action='store_true', required=False, help='[OPTIONAL] progress output')

    p = sub.add_parser('simulate', help='Monte Carlo runs of one scenario, written as CSV timeseries')
    p.add_argument('scenario', type=str)
    p.add_argument('--out', type=str, required=False, default=None,
                   help='output folder. Default: $resilsim_results/<scenario name>')
    p.add_argument('--measure', type=str, required=False, default=BASELINE,
                   help=f'[OPTIONAL] countermeasure to apply, combine with +. Known: {", ".join(COUNTERMEASURES)}')
    common(p)

    p = sub.add_parser('matrix', help='risk scenarios x countermeasures contingency matrix')
    p.add_argument('scenario', type=str)
    p.add_argument('--risks', type=str, required=False, default=None,
                   help='[OPTIONAL] risk grid JSON (overlay dimensions). Without it the matrix has a single row')
    p.add_argument('--measures', type=str, required=False, default=None,
                   help=f'[OPTIONAL] comma separated alternatives. Default: {",".join(DEFAULT_MEASURES)}')
    p.add_argument('--merit', type=str, required=False, default='deaths', choices=list(MERIT_ALIASES))
    p.add_argument('--out', type=str, required=True, help='matrix CSV. The text table goes to <out>.txt')
    p.add_argument('--risk-probs', dest='risk_probs', type=str, required=False, default=None,
                   help='[OPTIONAL] JSON {risk label: probability} for the expected merit of every alternative')
    p.add_argument('--hospital', type=str, required=False, default=None,
                   help='[OPTIONAL] only score this hospital (its deaths or its services\' utilization)')
    common(p)
    return parser


def cli(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == 'validate':
            validate(args.scenario)
        elif args.command == 'simulate':
            simulate(args.scenario, args.out, args.runs, args.seed, args.measure, args.parallel, args.verbose)
        elif args.command == 'matrix':
            matrix(args.scenario, args.out, args.risks, _measures(args.measures), args.merit, args.runs, args.seed,
                   args.risk_probs, args.hospital, args.parallel, args.verbose)
    except ScenarioValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    except (_UsageError, UnknownCountermeasureError) as e:
        print(f'resilsim {args.command}: {e}', file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, RuntimeError, KeyError, ValueError) as e:
        print(f'resilsim {args.command} failed: {e}', file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cli_entry():
    sys.exit(cli(sys.argv[1:]))


if __name__ == '__main__':
    cli_entry()
