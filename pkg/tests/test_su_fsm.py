from itertools import permutations

import pytest

from crsim.learning import KnowledgeBase
from crsim.negotiation import NegotiationOutcome
from crsim.qos import TrafficType
from crsim.spectrum_env import BandView
from crsim.su_fsm import (
    Action,
    ArrivalRequest,
    FsmError,
    Mode,
    SessionStatus,
    SuSession,
    admit,
    apply_outcome,
    classify_mode,
    decide,
    order_arrivals,
)


@pytest.mark.parametrize(
    "pu_used, expected",
    [
        (0, Mode.NORMAL),
        (1, Mode.NORMAL),
        (2, Mode.NORMAL),
        (3, Mode.NORMAL),
        (4, Mode.WARNING),
        (5, Mode.FAILURE),
        (6, Mode.FAILURE),
        (7, Mode.FAILURE),
        (8, Mode.FAILURE),
    ],
)
def test_classify_mode_reproduces_eight_channel_table(pu_used, expected):
    assert classify_mode(pu_used, 4, 8) is expected


def test_classify_mode_monotone_in_occupancy():
    for capacity in (4, 8, 12):
        for demand in range(1, capacity + 1):
            previous = Mode.NORMAL
            for pu_used in range(capacity + 1):
                mode = classify_mode(pu_used, demand, capacity)
                assert mode >= previous
                previous = mode


def test_classify_mode_rejects_bad_arguments():
    with pytest.raises(ValueError, match="cannot ever satisfy"):
        classify_mode(0, 9, 8)
    with pytest.raises(ValueError):
        classify_mode(9, 4, 8)
    with pytest.raises(ValueError):
        classify_mode(0, 0, 8)


def active_session() -> SuSession:
    return SuSession(
        session_id=1,
        traffic=TrafficType.VIDEO_CONFERENCING,
        demand=4,
        completion=0.2,
        status=SessionStatus.ACTIVE,
        band_id=0,
    )


def test_decide_maps_modes_to_actions():
    session = active_session()
    assert decide(session, Mode.NORMAL) is Action.CONTINUE_TRANSMIT
    assert decide(session, Mode.WARNING) is Action.START_NEGOTIATION
    assert decide(session, Mode.FAILURE) is Action.START_HANDOVER


def test_decide_is_pure():
    session = active_session()
    assert decide(session, Mode.WARNING) is decide(session, Mode.WARNING)


def test_decide_requires_active_session():
    session = active_session()
    session.status = SessionStatus.COMPLETED
    with pytest.raises(FsmError):
        decide(session, Mode.NORMAL)


def test_apply_outcome_granted_returns_to_normal():
    session = active_session()
    session.status = SessionStatus.NEGOTIATING
    apply_outcome(session, NegotiationOutcome(granted=True, channels=1))
    assert session.status is SessionStatus.ACTIVE
    assert session.mode is Mode.NORMAL
    assert session.band_id == 0


def test_apply_outcome_refused_enters_handover():
    session = active_session()
    session.status = SessionStatus.NEGOTIATING
    apply_outcome(session, NegotiationOutcome(granted=False))
    assert session.status is SessionStatus.HANDING_OVER
    assert session.handover_target is None


def test_apply_outcome_rejects_terminal_sessions():
    for terminal in (SessionStatus.COMPLETED, SessionStatus.DROPPED):
        session = active_session()
        session.status = terminal
        with pytest.raises(FsmError):
            apply_outcome(session, NegotiationOutcome(granted=True, channels=1))


def test_apply_outcome_rejects_non_negotiating_sessions():
    with pytest.raises(FsmError):
        apply_outcome(active_session(), NegotiationOutcome(granted=False))


def view(band_id: int, free: int, busy=False, capacity=8) -> BandView:
    return BandView(band_id, capacity, free, busy)


def test_admit_single_qualifying_band():
    assert admit(TrafficType.VIDEO_CONFERENCING, [view(0, 5)]) == 0


def test_admit_blocked_when_no_band_fits():
    bands = [view(0, 3), view(1, 2)]
    assert admit(TrafficType.VIDEO_CONFERENCING, bands) is None


def test_admit_blocked_when_band_hosts_a_session():
    assert admit(TrafficType.VIDEO_CONFERENCING, [view(0, 8, busy=True)]) is None


def test_admit_tie_breaks_to_lowest_id_over_all_permutations():
    bands = [view(2, 6), view(7, 6)]
    for perm in permutations(bands):
        assert admit(TrafficType.VIDEO_CONFERENCING, list(perm)) == 2


def test_admit_prefers_higher_knowledge_score():
    kb = KnowledgeBase()
    for _ in range(8):
        kb.record_negotiation(7, granted=True)
    bands = [view(2, 6), view(7, 6)]
    for perm in permutations(bands):
        assert admit(TrafficType.VIDEO_CONFERENCING, list(perm), kb) == 7


def test_admit_demand_override_for_probes():
    assert admit(TrafficType.VIDEO_CONFERENCING, [view(0, 0)], demand=0) == 0


def test_order_arrivals_by_priority_then_sequence():
    requests = [
        ArrivalRequest(0, TrafficType.EMAIL, 0.5),  # priority 10
        ArrivalRequest(1, TrafficType.MULTICASTING, 0.5),  # priority 16
        ArrivalRequest(2, TrafficType.VOICE, 0.5),  # priority 12
        ArrivalRequest(3, TrafficType.ECOMMERCE, 0.5),  # priority 12
    ]
    ordered = order_arrivals(requests)
    assert [r.seq for r in ordered] == [1, 2, 3, 0]


def test_terminal_marker():
    session = active_session()
    assert not session.terminal
    session.status = SessionStatus.DROPPED
    assert session.terminal
