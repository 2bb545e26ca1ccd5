from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tabulate import tabulate

from resilsim.engine.metrics import MeanMetrics, split_column
from resilsim.scenario_io.countermeasures import BASELINE

MERIT_KINDS = ('cumulative_deaths', 'peak_utilization')
# what the command line calls them
MERIT_ALIASES = {'deaths': 'cumulative_deaths', 'utilization': 'peak_utilization'}


class IncompleteGridError(ValueError):
    pass


@dataclass
class ContingencyMatrix:
    """
    Risk scenarios (rows) x decision alternatives (columns, baseline first). Lower merit is better for both merit
    kinds, rank 1 is the best cell of its row and equal cells share a rank
    """
    rows: List[str]
    columns: List[str]
    values: np.ndarray
    merit: str
    hospital: Optional[str] = None

    def __post_init__(self):
        assert self.merit in MERIT_KINDS, f'unknown merit {self.merit}'
        assert self.values.shape == (len(self.rows), len(self.columns))
        assert BASELINE in self.columns, 'a contingency matrix always has a baseline column'

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=pd.Index(self.rows, name='risk'), columns=self.columns)

    @property
    def ranks(self) -> np.ndarray:
        return self.to_frame().rank(axis=1, method='min').to_numpy().astype(int)

    def best_column(self, row: str) -> List[str]:
        r = self.ranks[self.rows.index(row)]
        return [c for c, rank in zip(self.columns, r) if rank == 1]

    def to_text(self, digits: int = 2) -> str:
        """Aligned table, every cell 'value (rank)'"""
        ranks = self.ranks
        table = [[row] + [f'{v:.{digits}f} ({k})' for v, k in zip(self.values[i], ranks[i])]
                 for i, row in enumerate(self.rows)]
        title = f'merit: {self.merit}' + (f' ({self.hospital})' if self.hospital else '') + \
                ', rank 1 = best in its row'
        return title + '\n' + tabulate(table, headers=['risk'] + list(self.columns), tablefmt='grid',
                                       disable_numparse=True)

    def write_csv(self, path: str):
        """values first, then one <column>.rank column per alternative"""
        frame = self.to_frame()
        ranks = pd.DataFrame(self.ranks, index=frame.index, columns=[f'{c}.rank' for c in self.columns])
        try:
            pd.concat([frame, ranks], axis=1).to_csv(path, lineterminator='\r\n', encoding='utf-8')
        except OSError as e:
            raise RuntimeError(f'could not write contingency matrix to {path}: {e.strerror or e}') from e

    def write_text(self, path: str):
        try:
            with open(path, 'w', encoding='utf-8') as f:
                f.write(self.to_text() + '\n')
        except OSError as e:
            raise RuntimeError(f'could not write contingency matrix to {path}: {e.strerror or e}') from e


def merit_value(mean: MeanMetrics, merit: str, hospital: Optional[str] = None) -> float:
    """
    cumulative_deaths: mean deaths at the end of the run (all populations), or the deaths recorded at one hospital.
    peak_utilization: highest utilization rate of any service (of one hospital if given) on any day of the mean
    timeseries
    """
    merit = MERIT_ALIASES.get(merit, merit)
    if merit == 'cumulative_deaths':
        if hospital is None:
            return float(sum(mean.last(f'{p}.cumulative_deaths') for p in mean.entities('cumulative_deaths')))
        columns = [c for c in mean.series if c.startswith(f'{hospital}:') and split_column(c)[1] == 'deaths']
        columns.append(f'{hospital}.unattended_deaths')
        if columns[-1] not in mean.series:
            raise KeyError(f'unknown hospital {hospital!r}')
        return float(sum(mean.get(c).sum() for c in columns))
    if merit == 'peak_utilization':
        columns = [c for c in mean.series if split_column(c)[1] == 'utilization' and ':' in c
                   and (hospital is None or c.startswith(f'{hospital}:'))]
        if hospital is not None and not columns:
            raise KeyError(f'unknown hospital {hospital!r}')
        return float(max((mean.get(c).max() for c in columns), default=0.))
    raise ValueError(f'unknown merit {merit!r}. Use one of {", ".join(MERIT_KINDS)} (or {", ".join(MERIT_ALIASES)})')


def build_contingency_matrix(results: Dict[Tuple[str, str], MeanMetrics], merit: str,
                             risks: Optional[Sequence[str]] = None, measures: Optional[Sequence[str]] = None,
                             hospital: Optional[str] = None) -> ContingencyMatrix:
    """
    results: (risk label, measure label) -> mean metrics of that cell's Monte Carlo batch. Row and column order is
    risks/measures if given, else first appearance in results. The baseline column always comes first. Every cell
    must be there, a partial grid raises IncompleteGridError
    """
    merit = MERIT_ALIASES.get(merit, merit)
    if merit not in MERIT_KINDS:
        raise ValueError(f'unknown merit {merit!r}. Use one of {", ".join(MERIT_KINDS)}')
    rows = list(dict.fromkeys(risks if risks is not None else [r for r, _ in results]))
    columns = list(dict.fromkeys(measures if measures is not None else [m for _, m in results]))
    columns = [BASELINE] + [c for c in columns if c != BASELINE]
    missing = [(r, c) for r in rows for c in columns if (r, c) not in results]
    if missing or not rows:
        raise IncompleteGridError(f'the contingency grid is incomplete, missing cells: {missing or "all"}')
    values = np.array([[merit_value(results[(r, c)], merit, hospital) for c in columns] for r in rows])
    return ContingencyMatrix(rows, columns, values, merit, hospital)


def expected_merit(matrix: ContingencyMatrix, risk_probabilities: Dict[str, float]) -> Tuple[Dict[str, float], str]:
    """
    Strategic reading of a matrix: merit of every alternative weighted by how likely each risk scenario is.
    Probabilities are normalized, rows without one get weight 0. Returns ({column: expected merit}, best column)
    """
    unknown = set(risk_probabilities) - set(matrix.rows)
    if unknown:
        raise KeyError(f'probabilities given for unknown risk scenarios: {sorted(unknown)}')
    weights = np.array([float(risk_probabilities.get(r, 0.)) for r in matrix.rows])
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError('risk probabilities must be >= 0 with a positive sum')
    weights = weights / weights.sum()
    expected = weights @ matrix.values
    out = {c: float(v) for c, v in zip(matrix.columns, expected)}
    # first column wins ties, which keeps baseline when nothing helps
    best = matrix.columns[int(np.argmin(expected))]
    return out, best
