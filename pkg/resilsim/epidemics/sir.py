from dataclasses import dataclass
from typing import Tuple, Optional, Union

import numpy as np

from resilsim.engine.rng import RngStream, as_generator


@dataclass(frozen=True)
class SirParams:
    # beta: new infections per infected person per day. gamma: recoveries per infected person per day
    beta: float
    gamma: float

    def __post_init__(self):
        if self.beta < 0 or self.gamma < 0:
            raise ValueError(f'SIR rates must be non-negative, got beta={self.beta}, gamma={self.gamma}')

    @property
    def basic_reproduction_number(self) -> float:
        return self.beta / self.gamma if self.gamma > 0 else np.inf


def sir_step(S: int, I: int, R: int, params: SirParams, rng: Union[RngStream, np.random.Generator],
             infectious_pressure: Optional[float] = None) -> Tuple[int, int, int, int]:
    """
    One day of the stochastic SIR model. New infections ~ Poisson(beta * S * I / N) capped at S, recoveries
    ~ Poisson(gamma * I) capped at I. Population size is conserved.

    infectious_pressure replaces I / N when populations mix (sum over contacts of weight * I_j / N_j). The recovery
    draw always uses the local I.

    Returns (S', I', R', new_infections)
    """
    assert S >= 0 and I >= 0 and R >= 0, f'negative compartment: S={S} I={I} R={R}'
    rng = as_generator(rng)
    N = S + I + R
    if N == 0:
        return S, I, R, 0
    pressure = I / N if infectious_pressure is None else infectious_pressure

    if S > 0 and pressure > 0 and params.beta > 0:
        new_infections = min(int(rng.poisson(params.beta * S * pressure)), S)
    else:
        new_infections = 0
    if I > 0 and params.gamma > 0:
        recoveries = min(int(rng.poisson(params.gamma * I)), I)
    else:
        recoveries = 0

    S_new = S - new_infections
    I_new = I + new_infections - recoveries
    R_new = R + recoveries
    return S_new, I_new, R_new, new_infections
