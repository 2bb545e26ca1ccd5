from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd


def split_column(column: str) -> Tuple[str, str]:
    """'hospital_b:ICU.occupancy' -> ('hospital_b:ICU', 'occupancy'). Entity ids never contain dots"""
    entity, _, metric = column.rpartition('.')
    return entity, metric


def column_order(columns: Iterable[str]) -> List[str]:
    """day first, then entity id, then metric name, both lexicographic"""
    rest = sorted((c for c in columns if c != 'day'), key=split_column)
    return ['day'] + rest


class RunMetrics(object):
    """
    Timeseries of one simulation run plus its end-of-run aggregates.

    Every declared key gets exactly one value per step, starting with the initial state (step 0). Logging a key twice
    for the same step or skipping a step is a bug in the engine and trips an assertion. Nothing fancy beyond that.
    """

    def __init__(self, keys: Sequence[str] = (), verbose: bool = False):
        self.series: Dict[str, List[float]] = {'day': []}
        for k in keys:
            self.declare(k)
        self.aggregates: Dict[str, float] = {}
        self.verbose = verbose

    def declare(self, key: str):
        assert key not in self.series, f'metric {key} declared twice'
        assert '.' in key, f'metric keys look like <entity>.<metric>, got {key}'
        self.series[key] = []

    @property
    def n_rows(self) -> int:
        return len(self.series['day'])

    @property
    def columns(self) -> List[str]:
        return column_order(self.series.keys())

    def log(self, key: str, value, step: int):
        assert key in self.series, f'{key} was never declared. Declare every column before the first step'
        if self.verbose:
            print(f'logging {key}: {value} for step {step}')
        values = self.series[key]
        assert len(values) == step, f'{key} has {len(values)} values, cannot log step {step}. Exactly one value per ' \
                                    f'step please'
        values.append(value)

    def log_row(self, step: int, row: Dict[str, float]):
        self.log('day', step, step)
        for k, v in row.items():
            self.log(k, v, step)
        assert all(len(v) == step + 1 for v in self.series.values()), \
            f'step {step}: some declared metrics were not logged: ' \
            f'{[k for k, v in self.series.items() if len(v) != step + 1]}'

    def get(self, key: str) -> np.ndarray:
        return np.asarray(self.series[key], dtype=float)

    def last(self, key: str) -> float:
        return float(self.series[key][-1])

    def entities(self, suffix: Optional[str] = None) -> List[str]:
        """Entity ids with at least one column (and a column named suffix if given)"""
        found = set()
        for c in self.series.keys():
            if c == 'day':
                continue
            entity, metric = split_column(c)
            if suffix is None or metric == suffix:
                found.add(entity)
        return sorted(found)

    def to_frame(self) -> pd.DataFrame:
        cols = self.columns
        return pd.DataFrame({c: self.series[c] for c in cols}, columns=cols)

    def __eq__(self, other):
        if not isinstance(other, RunMetrics):
            return NotImplemented
        return self.series == other.series and self.aggregates == other.aggregates


class MeanMetrics(RunMetrics):
    """Per-step arithmetic mean over the runs of a Monte Carlo batch, aggregates averaged the same way"""

    def __init__(self, runs: Sequence[RunMetrics]):
        super().__init__()
        self.n_runs = len(runs)


def mean_metrics(runs: Sequence[RunMetrics]) -> MeanMetrics:
    """
    Unweighted mean over runs, column by column and step by step. runs must all come from the same scenario (same
    columns, same horizon). The result only depends on the multiset of runs, not on their order beyond float rounding,
    and callers pass them sorted by run index so even that is fixed
    """
    assert len(runs) > 0, 'need at least one run to average'
    keys = set(runs[0].series.keys())
    for r in runs[1:]:
        assert set(r.series.keys()) == keys, 'runs have different columns. Did they come from different scenarios?'
        assert r.n_rows == runs[0].n_rows, 'runs have different lengths'
    mean = MeanMetrics(runs)
    for k in column_order(keys):
        if k == 'day':
            mean.series[k] = list(runs[0].series[k])
        else:
            stacked = np.stack([np.asarray(r.series[k], dtype=float) for r in runs])
            mean.series[k] = stacked.mean(0).tolist()
    agg_keys = sorted(set().union(*[r.aggregates.keys() for r in runs]))
    for k in agg_keys:
        mean.aggregates[k] = float(np.mean([r.aggregates.get(k, np.nan) for r in runs]))
    return mean
