import numpy as np
import pytest

from resilsim.disease_progression.health_states import HealthState, ILL_STATES
from resilsim.engine.rng import rng_substream
from resilsim.epidemics.population import Population, EpidemicState, MciEvent, baseline_demand, mci_casualties, \
    mci_surge, infectious_pressure
from resilsim.epidemics.sir import SirParams, sir_step


def test_sir_conserves_population():
    params = SirParams(0.3, 0.1)
    S, I, R = 9990, 10, 0
    for day in range(200):
        S, I, R, new = sir_step(S, I, R, params, rng_substream(0, 0, ('sir', day)))
        assert S + I + R == 10000
        assert min(S, I, R, new) >= 0


def test_sir_no_infected_no_infections():
    assert sir_step(100, 0, 5, SirParams(1, 0.1), np.random.default_rng(0)) == (100, 0, 5, 0)
    assert sir_step(0, 0, 0, SirParams(1, 0.1), np.random.default_rng(0)) == (0, 0, 0, 0)


def test_sir_caps_at_compartment_size():
    # beta so large that the Poisson mean is far above S
    S, I, R, new = sir_step(5, 100, 0, SirParams(50, 0), np.random.default_rng(1))
    assert new == 5 and S == 0 and I == 105


def _mean_infected(beta, runs=10, days=150):
    curves = []
    for run in range(runs):
        S, I, R = 9990, 10, 0
        curve = [I]
        for day in range(days):
            S, I, R, _ = sir_step(S, I, R, SirParams(beta, 0.1), rng_substream(5, run, ('sir', day)))
            curve.append(I)
        curves.append(curve)
    return np.mean(curves, axis=0)


def test_sir_bell_curve_and_beta_shift():
    low = _mean_infected(0.3)
    high = _mean_infected(0.6)
    for curve in (low, high):
        peak = int(np.argmax(curve))
        # rises to the peak and falls after it
        assert 0 < peak < len(curve) - 1
        assert curve[peak] > curve[0] and curve[peak] > curve[-1]
    assert high.max() > low.max()
    assert np.argmax(high) < np.argmax(low)


def test_sir_step_means():
    params = SirParams(0.2, 0.1)
    rng = np.random.default_rng(11)
    infections, recoveries = [], []
    for _ in range(100000):
        S, I, R, new = sir_step(990, 10, 0, params, rng)
        infections.append(new)
        recoveries.append(R)
    # beta * S * I / N = 1.98, gamma * I = 1
    assert np.mean(infections) == pytest.approx(1.98, rel=0.02)
    assert np.mean(recoveries) == pytest.approx(1.0, rel=0.02)


def test_sir_rejects_negative_rates():
    with pytest.raises(ValueError):
        SirParams(-0.1, 0.1)


def test_basic_reproduction_number():
    assert SirParams(0.3, 0.1).basic_reproduction_number == pytest.approx(3.)
    assert np.isinf(SirParams(0.3, 0.).basic_reproduction_number)


def test_baseline_demand():
    pop = Population('town', 150000, baseline_incidence=20, baseline_disease=0)
    draws = [baseline_demand(pop, rng_substream(0, 0, ('baseline', 'town', d))) for d in range(2000)]
    assert abs(np.mean(draws) - 30) < 1
    assert baseline_demand(Population('empty', 1000), np.random.default_rng(0)) == 0
    with pytest.raises(ValueError):
        baseline_demand(Population('bad', 10, baseline_incidence=-1), np.random.default_rng(0))


def test_mci_casualties_sum_to_count():
    event = MciEvent(3, 120, [0, 0, 0.5, 0.3, 0.2])
    cas = mci_casualties(event, np.random.default_rng(3))
    assert sum(c for _, c in cas) == 120
    assert {h for h, _ in cas} <= {HealthState.moderate, HealthState.severe, HealthState.critical}


def test_mci_surge_only_on_its_day():
    pop = Population('town', 1000, mci_events=[MciEvent(3, 10, [1, 0, 0, 0, 0])])
    assert mci_surge(pop, 2, np.random.default_rng(0)) == []
    assert mci_surge(pop, 3, np.random.default_rng(0)) == [(HealthState.very_mild, 10)]


def test_mci_surge_law_of_large_numbers():
    pop = Population('town', 1000000, mci_events=[MciEvent(3, 100000, [0.2] * 5)])
    counts = dict(mci_surge(pop, 3, np.random.default_rng(8)))
    assert sum(counts.values()) == 100000
    for h in ILL_STATES:
        assert counts[h] / 100000 == pytest.approx(0.2, abs=0.01)


def test_remove_deceased_keeps_conservation():
    pop = Population('town', 100, epidemics=[EpidemicState(0, 80, 15, 5), EpidemicState(1, 100, 0, 0)])
    pop.remove_deceased(0)
    assert pop.epidemics[0].recovered == 4
    assert pop.epidemics[1].susceptible == 99
    pop.remove_deceased(None)
    assert pop.epidemics[0].susceptible == 79
    for e in pop.epidemics:
        assert e.total + pop.cumulative_deaths == pop.size
    assert pop.daily_deaths == 2


def test_infectious_pressure_identity_and_mixing():
    a = Population('a', 100, epidemics=[EpidemicState(0, 90, 10, 0)])
    b = Population('b', 100, epidemics=[EpidemicState(0, 100, 0, 0)])
    np.testing.assert_allclose(infectious_pressure([a, b], np.eye(2), 0), [0.1, 0])
    mixing = np.array([[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose(infectious_pressure([a, b], mixing, 0), [0.05, 0.05])
    # unknown disease contributes nothing
    np.testing.assert_allclose(infectious_pressure([a, b], np.eye(2), 3), [0, 0])
