import json
import math

import numpy as np
import pytest

from rangekit.bounds import BinaryTest, classical_beta, measured_helstrom_error, quantum_beta
from rangekit.errors import DomainError
from rangekit.fock import (
    PhotonDistribution,
    dephased_signal_state,
    diagonal_distribution,
    thermal_state,
)
from rangekit.montecarlo import (
    CounterRNG,
    RangingConfig,
    SimConfig,
    estimate_symmetric_error,
    estimate_type_errors,
    run_ranging_demo,
    sample_count,
    sample_counts,
)
from rangekit.receiver import DecisionRule, np_rule, rule_error


def within(report, exact, k=4.0):
    return abs(report.value - exact) <= k * report.stderr + 1e-15


@pytest.fixture(scope="module")
def dephased11():
    return (
        diagonal_distribution(dephased_signal_state(1, 1.0, 30)),
        diagonal_distribution(thermal_state(1, 30)),
    )


@pytest.fixture(scope="module")
def demo():
    return run_ranging_demo(RangingConfig())


def test_point_mass_sampling():
    p = PhotonDistribution(np.eye(6)[3], 0.0)
    rng = CounterRNG(11)
    assert {sample_count(p, rng) for _ in range(50)} == {3}


def test_sampling_deterministic():
    p = diagonal_distribution(thermal_state(1, 30))
    u = CounterRNG(8, 2).block(0, 1000, 1)
    assert np.array_equal(sample_counts(p, u), sample_counts(p, CounterRNG(8, 2).block(0, 1000, 1)))


def test_thermal_sampling_frequencies():
    trials = 10**6
    p = diagonal_distribution(thermal_state(1, 30))
    counts = sample_counts(p, CounterRNG(2024).block(0, trials, 0))
    freq = np.bincount(counts, minlength=32) / trials
    for n in range(11):
        q = 2.0 ** -(n + 1)
        assert abs(freq[n] - q) <= 4 * math.sqrt(q * (1 - q) / trials)


def test_overflow_sentinel():
    p = PhotonDistribution(np.array([0.5, 0.0]), 0.5)
    counts = sample_counts(p, CounterRNG(0).block(0, 10000, 0))
    assert set(np.unique(counts)) == {0, 2}


def test_symmetric_examples(dephased11):
    p_s, p_t = dephased11
    cfg = SimConfig(trials=20000, seed=3)
    always_absent = DecisionRule(present=np.zeros(31, dtype=bool))
    assert within(estimate_symmetric_error(always_absent, p_s, p_t, cfg), 0.5)
    accept_all = np_rule(p_t, p_t)
    assert within(estimate_symmetric_error(accept_all, p_t, p_t, cfg), 0.5)


def test_symmetric_matched_rule(dephased11):
    p_s, p_t = dephased11
    rep = estimate_symmetric_error(np_rule(p_s, p_t), p_s, p_t, SimConfig(trials=10**5, seed=1))
    assert rep.stderr == pytest.approx(math.sqrt(rep.value * (1 - rep.value) / 1e5))
    assert within(rep, measured_helstrom_error(p_s, p_t).value)


def test_symmetric_overflow_decision():
    # all signal mass overflows; the matched rule must call overflow PRESENT
    p_s = PhotonDistribution(np.array([0.0, 0.0]), 1.0)
    p_t = PhotonDistribution(np.array([0.6, 0.4]), 0.0)
    rule = np_rule(p_s, p_t)
    assert rule.overflow_present
    rep = estimate_symmetric_error(rule, p_s, p_t, SimConfig(trials=1000))
    assert rep.value == 0.0 and rule_error(rule, p_s, p_t).value == 0.0


@pytest.mark.parametrize("omega,t1,t2", [(1.0, 0.0, 1.0), (0.0, 1.0, 0.0)])
def test_type_errors_exact_cases(dephased11, omega, t1, t2):
    p_s, p_t = dephased11
    test = BinaryTest("classical-stochastic", omega=np.full(31, omega))
    e1, e2 = estimate_type_errors(test, p_s, p_t, SimConfig(trials=5000))
    if omega == 1.0:
        assert (e1.value, e2.value) == (t1, t2)
    else:
        # Omega = 0 inside the block; overflow draws (mass ~1e-7) still declare absent
        assert e1.value == pytest.approx(t1, abs=1e-3) and e2.value == pytest.approx(t2, abs=1e-3)
    assert e1.kind == "type1" and e2.kind == "type2"


def test_type_errors_omega_zero_no_overflow():
    p = PhotonDistribution(np.array([0.3, 0.7]), 0.0)
    test = BinaryTest("classical-stochastic", omega=np.zeros(2))
    e1, e2 = estimate_type_errors(test, p, p, SimConfig(trials=5000))
    assert (e1.value, e2.value) == (1.0, 0.0)


def test_type_errors_np_test(dephased11):
    p_s, p_t = dephased11
    res = classical_beta(p_s, p_t, 0.01)
    e1, e2 = estimate_type_errors(res.test, p_s, p_t, SimConfig(trials=10**5, seed=5))
    assert within(e1, 0.01)
    assert within(e2, 0.943)
    assert within(e2, res.beta)


def test_quantum_test_rejected(dephased11):
    p_s, p_t = dephased11
    q = quantum_beta(dephased_signal_state(1, 1.0, 30), thermal_state(1, 30), 0.01)
    with pytest.raises(DomainError):
        estimate_type_errors(q.test, p_s, p_t, SimConfig(trials=10))


def test_sim_config_validation():
    with pytest.raises(DomainError):
        SimConfig(trials=0)
    with pytest.raises(DomainError):
        SimConfig(seed=-1)


def test_length_mismatch(dephased11):
    p_s, p_t = dephased11
    with pytest.raises(DomainError):
        estimate_symmetric_error(DecisionRule(present=np.ones(3, dtype=bool)), p_s, p_t, SimConfig(trials=10))


# ranging


def test_ranging_paper_values(demo):
    rate0, se0 = demo.pooled_empty_rate()
    assert 0.006 <= rate0 <= 0.014
    assert abs(demo.detection_rate[4] - 0.2106) <= 0.017
    assert abs(demo.detection_rate[14] - 0.0573) <= 0.010


def test_ranging_mean_intensity(demo):
    expected = np.where(demo.signal_mean > 0, 1.0 + demo.signal_mean, 1.0)
    assert np.all(np.abs(demo.mean_intensity - expected) <= 4 * demo.intensity_stderr)


def test_ranging_stderr_and_contrasts(demo):
    r = demo.detection_rate
    assert np.allclose(demo.stderr, np.sqrt(r * (1 - r) / demo.trials))
    c = demo.contrasts()
    assert c[5]["detection_contrast"] >= 15 and 5 <= c[15]["detection_contrast"] <= 25


def test_ranging_deterministic(demo):
    again = run_ranging_demo(RangingConfig())
    assert again.to_json() == demo.to_json()
    doc = json.loads(demo.to_json())
    assert len(doc["slots"]) == 20 and set(doc["contrasts"]) == {"5", "15"}


def test_ranging_slot_streams_independent():
    # dropping a target leaves other slots' draws untouched
    a = run_ranging_demo(RangingConfig(trials=2000))
    b = run_ranging_demo(RangingConfig(trials=2000, targets={5: 3.0}))
    keep = np.arange(20) != 14
    assert np.array_equal(a.detection_rate[keep], b.detection_rate[keep])


def test_ranging_no_targets():
    res = run_ranging_demo(RangingConfig(targets={}))
    assert np.all(np.abs(res.detection_rate - 0.01) <= 4 * np.sqrt(0.01 * 0.99 / res.trials))
    assert res.contrasts() == {}


def test_ranging_config_validation():
    with pytest.raises(DomainError):
        RangingConfig(targets={21: 1.0})
    with pytest.raises(DomainError):
        RangingConfig(targets={3: -1.0})
