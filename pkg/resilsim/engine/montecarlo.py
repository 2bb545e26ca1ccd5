import multiprocessing
from typing import List, Optional, Tuple

from tqdm import tqdm

from resilsim.configuration import default_num_processes
from resilsim.engine.metrics import RunMetrics, MeanMetrics, mean_metrics
from resilsim.engine.simulation import run_simulation
from resilsim.scenario_io.scenario import ScenarioConfig
from resilsim.utilities.log_file import print_to_log_file


def run_montecarlo(scenario: ScenarioConfig, n_runs: int, master_seed: int,
                   num_processes: int = default_num_processes, verbose: bool = False,
                   log_file: Optional[str] = None) -> Tuple[List[RunMetrics], MeanMetrics]:
    """
    n_runs independent runs (run indices 0 .. n_runs - 1) of the same scenario and their per-day mean.

    Every run draws from its own (master_seed, run_index) substreams, so the result is the same whether the runs are
    executed sequentially or spread over num_processes workers. Runs are returned in run index order.
    """
    if n_runs < 1:
        raise ValueError(f'n_runs must be >= 1, got {n_runs}')
    num_processes = max(1, min(num_processes, n_runs))
    print_to_log_file(log_file, f'scenario {scenario.name}: {n_runs} runs, seed {master_seed}, '
                                f'{num_processes} process(es), countermeasures {list(scenario.countermeasures.applied)}',
                      also_print_to_console=verbose)

    if num_processes == 1:
        runs = [run_simulation(scenario, master_seed, i, False)
                for i in tqdm(range(n_runs), disable=not verbose, desc=scenario.name)]
    else:
        with multiprocessing.get_context("spawn").Pool(num_processes) as pool:
            runs = pool.starmap(run_simulation, [(scenario, master_seed, i, False) for i in range(n_runs)])

    mean = mean_metrics(runs)
    print_to_log_file(log_file, f'scenario {scenario.name} done. mean cumulative deaths '
                                f'{mean.aggregates.get("cumulative_deaths", 0.):.2f}',
                      also_print_to_console=verbose)
    return runs, mean
