from typing import Union

import pandas as pd

from resilsim.engine.metrics import RunMetrics, MeanMetrics


def timeseries_frame(metrics: Union[RunMetrics, MeanMetrics]) -> pd.DataFrame:
    """One row per day, columns day then <entity>.<metric> sorted by entity id and metric name"""
    return metrics.to_frame()


def write_timeseries(metrics: Union[RunMetrics, MeanMetrics], path: str):
    """
    RFC 4180 CSV (comma separated, CRLF line ends, header first, '.' decimals). Floats are written with repr so two
    identical runs give byte identical files. Unbounded capacities come out as inf
    """
    frame = timeseries_frame(metrics)
    try:
        frame.to_csv(path, index=False, lineterminator='\r\n', encoding='utf-8')
    except OSError as e:
        raise RuntimeError(f'could not write timeseries to {path}: {e.strerror or e}') from e


def write_kpis(metrics: Union[RunMetrics, MeanMetrics], path: str):
    """End-of-run aggregates (cumulative deaths, peak utilization, mean treatment times) as metric,value rows"""
    frame = pd.DataFrame({'metric': sorted(metrics.aggregates.keys()),
                          'value': [metrics.aggregates[k] for k in sorted(metrics.aggregates.keys())]})
    try:
        frame.to_csv(path, index=False, lineterminator='\r\n', encoding='utf-8')
    except OSError as e:
        raise RuntimeError(f'could not write KPIs to {path}: {e.strerror or e}') from e


def read_timeseries(path: str) -> pd.DataFrame:
    return pd.read_csv(path)
