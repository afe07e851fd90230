import numpy as np
import pytest

from crsim.learning import KnowledgeBase
from crsim.spectrum_env import SensingReport


def report(free: int, band_id=0, step=0) -> SensingReport:
    return SensingReport(band_id, 8 - free, free, step)


def test_negotiation_counters():
    kb = KnowledgeBase()
    kb.record_negotiation(0, granted=True)
    rec = kb.counters(0)
    assert (rec.attempts, rec.grants) == (1, 1)
    kb.record_negotiation(0, granted=False)
    rec = kb.counters(0)
    assert (rec.attempts, rec.grants) == (2, 1)


def test_sense_counters():
    kb = KnowledgeBase()
    kb.record_sense(0, report(free=5), demand=4)
    kb.record_sense(0, report(free=3), demand=4)
    rec = kb.counters(0)
    assert (rec.sensed, rec.available) == (2, 1)


def test_always_free_band_counts_every_sample():
    kb = KnowledgeBase()
    for _ in range(100):
        kb.record_sense(1, report(free=8, band_id=1), demand=4)
    rec = kb.counters(1)
    assert rec.sensed == rec.available == 100


def test_counters_never_decrease():
    kb = KnowledgeBase()
    rng = np.random.default_rng(0)
    last = (0, 0, 0, 0)
    for _ in range(500):
        if rng.random() < 0.5:
            kb.record_negotiation(0, granted=bool(rng.random() < 0.5))
        else:
            kb.record_sense(0, report(free=int(rng.integers(0, 9))), demand=4)
        rec = kb.counters(0)
        now = (rec.attempts, rec.grants, rec.sensed, rec.available)
        assert all(a >= b for a, b in zip(now, last))
        last = now


def test_smoothed_estimates_on_fresh_band():
    kb = KnowledgeBase()
    assert kb.coop_estimate(3) == 0.5
    assert kb.availability_estimate(3) == 0.5
    assert kb.score(3) == 0.25


def test_score_example_values():
    kb = KnowledgeBase()
    for _ in range(8):
        kb.record_negotiation(0, granted=True)
        kb.record_sense(0, report(free=8), demand=4)
    assert kb.score(0) == pytest.approx(0.81)
    kb2 = KnowledgeBase()
    for _ in range(8):
        kb2.record_negotiation(0, granted=False)
    assert kb2.coop_estimate(0) == pytest.approx(0.1)


def test_estimates_stay_strictly_inside_unit_interval():
    kb = KnowledgeBase()
    for _ in range(1000):
        kb.record_negotiation(0, granted=False)
        kb.record_sense(0, report(free=0), demand=4)
    assert 0.0 < kb.coop_estimate(0) < 1.0
    assert 0.0 < kb.availability_estimate(0) < 1.0
    assert 0.0 < kb.score(0) < 1.0


def test_score_monotone_in_grants_and_availability():
    coops = []
    avails = []
    for hits in range(0, 9):
        kb = KnowledgeBase()
        for i in range(8):
            kb.record_negotiation(0, granted=i < hits)
            kb.record_sense(0, report(free=8 if i < hits else 0), demand=4)
        coops.append(kb.coop_estimate(0))
        avails.append(kb.availability_estimate(0))
    assert all(a < b for a, b in zip(coops, coops[1:]))
    assert all(a < b for a, b in zip(avails, avails[1:]))


def test_two_band_ordering_after_fifty_negotiations():
    # grant probabilities 0.9 vs 0.1: the score should order the bands
    # correctly in essentially every replication
    rng = np.random.default_rng(7)
    correct = 0
    replications = 200
    for _ in range(replications):
        kb = KnowledgeBase()
        for _ in range(50):
            kb.record_negotiation(0, granted=bool(rng.random() < 0.9))
            kb.record_negotiation(1, granted=bool(rng.random() < 0.1))
        correct += kb.score(0) > kb.score(1)
    assert correct >= 0.99 * replications


def test_json_round_trip():
    kb = KnowledgeBase()
    kb.record_negotiation(0, granted=True)
    kb.record_sense(2, report(free=8, band_id=2), demand=4)
    data = kb.to_json_dict()
    clone = KnowledgeBase.from_json_dict(data)
    assert clone.to_json_dict() == data
    assert clone.score(0) == kb.score(0)


def test_json_rejects_inconsistent_counters():
    with pytest.raises(ValueError):
        KnowledgeBase.from_json_dict({"0": {"attempts": 1, "grants": 2, "sensed": 0, "available": 0}})
