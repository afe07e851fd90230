"""Secondary-user session lifecycle: mode classification and decisions.

The three occupancy regimes generalize the worked 8-channel example: with
the licensed user on ``pu_used`` channels and a session demanding
``demand`` of ``capacity``, the session is in Normal mode while everything
fits with slack, Warning mode when usage would exactly reach capacity
(negotiate), and Failure mode when the demand no longer fits (handover,
no negotiation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Sequence

from .learning import KnowledgeBase
from .negotiation import NegotiationOutcome
from .qos import TrafficType, channel_demand, priority
from .spectrum_env import BandView


class FsmError(RuntimeError):
    """Raised on transitions that the session lifecycle does not allow."""


class Mode(IntEnum):
    NORMAL = 0
    WARNING = 1
    FAILURE = 2


class Action(Enum):
    CONTINUE_TRANSMIT = "continue_transmit"
    START_NEGOTIATION = "start_negotiation"
    START_HANDOVER = "start_handover"
    DROP = "drop"


class SessionStatus(Enum):
    IDLE = "idle"
    ACTIVE = "active"
    NEGOTIATING = "negotiating"
    HANDING_OVER = "handing_over"
    COMPLETED = "completed"
    DROPPED = "dropped"


TERMINAL = (SessionStatus.COMPLETED, SessionStatus.DROPPED)


def classify_mode(pu_used: int, demand: int, capacity: int) -> Mode:
    """Classify the occupancy regime for an active session.

    Normal while pu_used + demand < capacity, Warning at exact equality,
    Failure beyond.  For capacity 8 and demand 4 this maps occupancies
    0..3 / 4 / 5..8 respectively.
    """
    if demand <= 0:
        raise ValueError(f"demand must be positive, got {demand}")
    if demand > capacity:
        raise ValueError(f"band cannot ever satisfy demand ({demand} > capacity {capacity})")
    if not 0 <= pu_used <= capacity:
        raise ValueError(f"occupancy {pu_used} outside 0..{capacity}")
    total = pu_used + demand
    if total < capacity:
        return Mode.NORMAL
    if total == capacity:
        return Mode.WARNING
    return Mode.FAILURE


@dataclass(slots=True)
class SuSession:
    """One secondary-user session; owned and mutated by the engine."""

    session_id: int
    traffic: TrafficType
    demand: int
    completion: float  # per-step completion probability
    status: SessionStatus = SessionStatus.IDLE
    band_id: int | None = None
    mode: Mode | None = None
    negotiation_wait: int = 0
    handover_target: int | None = None
    handover_wait: int = 0
    replans: int = 0
    started_at: int | None = None
    ended_at: int | None = None
    # engine-transient bookkeeping, reset every step
    transmitting: bool = False
    hops: int = 0

    @property
    def terminal(self) -> bool:
        return self.status in TERMINAL


def decide(session: SuSession, mode: Mode) -> Action:
    """Pick the action for an active session in the given mode."""
    if session.status is not SessionStatus.ACTIVE:
        raise FsmError(f"decide() needs an active session, session {session.session_id} is {session.status.value}")
    if mode is Mode.NORMAL:
        return Action.CONTINUE_TRANSMIT
    if mode is Mode.WARNING:
        return Action.START_NEGOTIATION
    return Action.START_HANDOVER


def apply_outcome(session: SuSession, outcome: NegotiationOutcome) -> SuSession:
    """Fold a negotiation outcome into the session (in place).

    Granted returns the session to Active/Normal on its band; Refused sends
    it into handover (target to be planned).
    """
    if session.status is not SessionStatus.NEGOTIATING:
        raise FsmError(
            f"apply_outcome() needs a negotiating session, session {session.session_id} is {session.status.value}"
        )
    if outcome.granted:
        session.status = SessionStatus.ACTIVE
        session.mode = Mode.NORMAL
    else:
        session.status = SessionStatus.HANDING_OVER
        session.handover_target = None
        session.handover_wait = 0
    session.negotiation_wait = 0
    return session


@dataclass(frozen=True, slots=True)
class ArrivalRequest:
    """A pending session request, ordered by priority then arrival sequence."""

    seq: int
    traffic: TrafficType
    completion: float
    demand: int = field(default=-1)

    def effective_demand(self) -> int:
        return self.demand if self.demand >= 0 else channel_demand(self.traffic)


def order_arrivals(requests: Sequence[ArrivalRequest]) -> list[ArrivalRequest]:
    """Sort same-step requests: higher QoS priority first, then arrival order."""
    return sorted(requests, key=lambda r: (-priority(r.traffic), r.seq))


def admit(
    traffic: TrafficType,
    bands: Sequence[BandView],
    kb: KnowledgeBase | None = None,
    demand: int | None = None,
) -> int | None:
    """Admit a session to the best qualifying band, or return None (blocked).

    A band qualifies when it has at least ``demand`` free channels and no
    resident secondary session.  Among qualifying bands the one with the
    highest knowledge-base score wins; ties break toward the lowest id.
    """
    need = channel_demand(traffic) if demand is None else demand
    best: int | None = None
    best_score = -1.0
    for view in bands:
        if view.su_busy or view.free < need:
            continue
        score = kb.score(view.band_id) if kb is not None else 0.25
        if score > best_score or (score == best_score and (best is None or view.band_id < best)):
            best = view.band_id
            best_score = score
    return best
