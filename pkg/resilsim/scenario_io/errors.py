from dataclasses import dataclass
from typing import List, Sequence

PROBLEM_KINDS = ('unknown_id', 'cyclic_it_graph', 'non_normalizable', 'sojourn_below_one', 'outcomes_not_100',
                 'bad_horizon', 'schema')


@dataclass(frozen=True)
class Problem:
    path: str
    kind: str
    message: str

    def __post_init__(self):
        assert self.kind in PROBLEM_KINDS, f'unknown problem kind {self.kind}'

    def __str__(self):
        return f'{self.path}: [{self.kind}] {self.message}'


class ScenarioValidationError(ValueError):
    """
    Everything that is wrong with a scenario document, each problem located by its key path
    (hospitals[hospital_b].referral_partners[0]) and classified by kind
    """

    def __init__(self, problems: Sequence[Problem]):
        assert len(problems) > 0
        self.problems: List[Problem] = list(problems)
        super().__init__(f'{len(self.problems)} problem(s) in scenario:\n' +
                         '\n'.join('  ' + str(p) for p in self.problems))

    @property
    def kinds(self) -> List[str]:
        return [p.kind for p in self.problems]

    @property
    def paths(self) -> List[str]:
        return [p.path for p in self.problems]
