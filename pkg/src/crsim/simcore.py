"""Deterministic discrete-time engine orchestrating bands, sessions, learning.

Each step applies a fixed sub-step order: (1) every band's occupancy
evolves, (2) every licensed-user disposition evolves, (3) due arrivals are
admitted in priority order, (4-6) each live session senses, classifies its
mode and acts (transmit / negotiate / hand over), (7) transmitting sessions
draw completion, (8) buffered knowledge-base updates apply, (9) metrics,
histograms and invariant checks.

Determinism contract: a single uniform stream seeded from the scenario
seed is consumed in a documented order — bands by ascending id, then
dispositions by ascending id, then completion draws by ascending session
id.  Admission, negotiation outcomes and handover selection consume no
extra randomness, so identical (scenario, seed) pairs reproduce the event
trace bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import handover as ho
from . import markov, negotiation, spectrum_env, su_fsm
from .learning import KnowledgeBase
from .markov import OccupancyChain
from .negotiation import NegotiationRequest, PuDisposition, PuState
from .qos import TrafficType, channel_demand
from .spectrum_env import BandView, SpectrumBand
from .su_fsm import Action, Mode, SessionStatus, SuSession

log = logging.getLogger(__name__)

__all__ = [
    "ScenarioError",
    "EngineError",
    "ComparisonError",
    "BandDecl",
    "SessionDecl",
    "Scenario",
    "Metrics",
    "EventTrace",
    "RunResult",
    "Engine",
    "run",
    "compare",
    "CompareReport",
    "canonical_preset",
    "PRESETS",
]


class ScenarioError(ValueError):
    """Malformed scenario; ``problems`` lists every violated field."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid scenario: " + "; ".join(problems))


class EngineError(RuntimeError):
    """An engine invariant (conservation, state consistency) was violated."""


class ComparisonError(ValueError):
    """The scenario cannot be reduced to the analytic model's assumptions."""


# ---------------------------------------------------------------------------
# scenario declarations
# ---------------------------------------------------------------------------

_DISPOSITION_STATES = {s.value: s for s in PuState}


@dataclass(frozen=True)
class BandDecl:
    band_id: int
    capacity: int
    p: float
    q: float
    initial_occupancy: int = 0
    disposition_state: PuState = PuState.COOPERATIVE
    alpha: float = 0.0
    beta: float = 0.0

    def build(self) -> SpectrumBand:
        return SpectrumBand(
            band_id=self.band_id,
            chain=OccupancyChain(self.capacity, self.p, self.q),
            pu_used=self.initial_occupancy,
            disposition=PuDisposition(self.disposition_state, self.alpha, self.beta),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.band_id,
            "capacity": self.capacity,
            "p": self.p,
            "q": self.q,
            "initial_occupancy": self.initial_occupancy,
            "disposition": {
                "state": self.disposition_state.value,
                "alpha": self.alpha,
                "beta": self.beta,
            },
        }


@dataclass(frozen=True)
class SessionDecl:
    """One arrival ("arrival": step) or a repeating pattern ("every": k)."""

    traffic: TrafficType
    completion: float
    arrival: int | None = None
    every: int | None = None
    start: int = 0
    until: int | None = None
    demand: int | None = None  # override; 0 declares a pure probe

    def effective_demand(self) -> int:
        return channel_demand(self.traffic) if self.demand is None else self.demand

    def arrives_at(self, step: int, horizon: int) -> bool:
        if self.arrival is not None:
            return step == self.arrival
        stop = horizon if self.until is None else min(self.until, horizon)
        return self.start <= step < stop and (step - self.start) % self.every == 0

    def to_dict(self) -> dict:
        out: dict = {"traffic": self.traffic.value, "c": self.completion}
        if self.arrival is not None:
            out["arrival"] = self.arrival
        else:
            out["every"] = self.every
            out["start"] = self.start
            if self.until is not None:
                out["until"] = self.until
        if self.demand is not None:
            out["demand"] = self.demand
        return out


@dataclass(frozen=True)
class NegotiationParams:
    grant_request: int = 1
    latency: int = 1

    def to_dict(self) -> dict:
        return {"grant_request": self.grant_request, "latency": self.latency}


@dataclass(frozen=True)
class HandoverParams:
    latency: int = 1
    max_replans: int = 3
    scan_interval: int = 10

    def to_dict(self) -> dict:
        return {
            "latency": self.latency,
            "max_replans": self.max_replans,
            "scan_interval": self.scan_interval,
        }


@dataclass(frozen=True)
class Scenario:
    bands: tuple[BandDecl, ...]
    sessions: tuple[SessionDecl, ...]
    horizon: int
    seed: int
    negotiation: NegotiationParams = NegotiationParams()
    handover: HandoverParams = HandoverParams()
    name: str = ""

    def to_dict(self) -> dict:
        out: dict = {
            "bands": [b.to_dict() for b in self.bands],
            "sessions": [s.to_dict() for s in self.sessions],
            "negotiation": self.negotiation.to_dict(),
            "handover": self.handover.to_dict(),
            "horizon": self.horizon,
            "seed": self.seed,
        }
        if self.name:
            out["name"] = self.name
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        problems: list[str] = []

        def intval(value, path, minimum=None):
            if not isinstance(value, int) or isinstance(value, bool):
                problems.append(f"{path}: must be an integer, got {value!r}")
                return None
            if minimum is not None and value < minimum:
                problems.append(f"{path}: must be >= {minimum}, got {value}")
                return None
            return value

        def floatval(value, path, lo, hi, lo_open=False):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                problems.append(f"{path}: must be a number, got {value!r}")
                return None
            v = float(value)
            if v < lo or v > hi or (lo_open and v <= lo):
                bound = f"({lo}, {hi}]" if lo_open else f"[{lo}, {hi}]"
                problems.append(f"{path}: must be within {bound}, got {value}")
                return None
            return v

        if not isinstance(data, dict):
            raise ScenarioError(["scenario: top level must be a JSON object"])

        known = {"bands", "sessions", "negotiation", "handover", "horizon", "seed", "name"}
        for key in sorted(set(data) - known):
            problems.append(f"{key}: unknown top-level key")

        horizon = intval(data.get("horizon"), "horizon", 1) or 1
        seed = intval(data.get("seed"), "seed", 0)
        seed = 0 if seed is None else seed
        name = data.get("name", "")
        if not isinstance(name, str):
            problems.append("name: must be a string")
            name = ""

        bands: list[BandDecl] = []
        raw_bands = data.get("bands")
        if not isinstance(raw_bands, list) or not raw_bands:
            problems.append("bands: must be a nonempty list")
            raw_bands = []
        seen_ids: set[int] = set()
        for i, raw in enumerate(raw_bands):
            path = f"bands[{i}]"
            if not isinstance(raw, dict):
                problems.append(f"{path}: must be an object")
                continue
            band_id = intval(raw.get("id"), f"{path}.id", 0)
            capacity = intval(raw.get("capacity"), f"{path}.capacity", 1)
            p = floatval(raw.get("p"), f"{path}.p", 0.0, 1.0)
            q = floatval(raw.get("q"), f"{path}.q", 0.0, 1.0)
            if p is not None and q is not None and p + q > 1.0 + 1e-12:
                problems.append(f"{path}: p + q must not exceed 1, got {p} + {q}")
            occ = raw.get("initial_occupancy", 0)
            occ = intval(occ, f"{path}.initial_occupancy", 0)
            if capacity is not None and occ is not None and occ > capacity:
                problems.append(f"{path}.initial_occupancy: exceeds capacity {capacity}")
            disp = raw.get("disposition", {})
            if not isinstance(disp, dict):
                problems.append(f"{path}.disposition: must be an object")
                disp = {}
            state_name = disp.get("state", "cooperative")
            state = _DISPOSITION_STATES.get(state_name)
            if state is None:
                problems.append(
                    f"{path}.disposition.state: must be one of {sorted(_DISPOSITION_STATES)}, got {state_name!r}"
                )
            alpha = floatval(disp.get("alpha", 0.0), f"{path}.disposition.alpha", 0.0, 1.0)
            beta = floatval(disp.get("beta", 0.0), f"{path}.disposition.beta", 0.0, 1.0)
            if band_id is not None:
                if band_id in seen_ids:
                    problems.append(f"{path}.id: duplicate band id {band_id}")
                seen_ids.add(band_id)
            if None not in (band_id, capacity, p, q, occ, alpha, beta) and state is not None:
                bands.append(
                    BandDecl(band_id, capacity, p, q, occ, state, alpha, beta)
                )

        sessions: list[SessionDecl] = []
        raw_sessions = data.get("sessions", [])
        if not isinstance(raw_sessions, list):
            problems.append("sessions: must be a list")
            raw_sessions = []
        for i, raw in enumerate(raw_sessions):
            path = f"sessions[{i}]"
            if not isinstance(raw, dict):
                problems.append(f"{path}: must be an object")
                continue
            traffic_name = raw.get("traffic")
            try:
                traffic = TrafficType.from_name(traffic_name) if isinstance(traffic_name, str) else None
            except KeyError as exc:
                problems.append(f"{path}.traffic: {exc.args[0]}")
                traffic = None
            if traffic is None and not isinstance(traffic_name, str):
                problems.append(f"{path}.traffic: must be a traffic type name")
            completion = floatval(raw.get("c"), f"{path}.c", 0.0, 1.0, lo_open=True)
            demand = raw.get("demand")
            if demand is not None:
                demand = intval(demand, f"{path}.demand", 0)
            has_arrival = "arrival" in raw
            has_every = "every" in raw
            if has_arrival == has_every:
                problems.append(f"{path}: exactly one of 'arrival' or 'every' is required")
                continue
            if has_arrival:
                arrival = intval(raw.get("arrival"), f"{path}.arrival", 0)
                if traffic is not None and completion is not None and arrival is not None:
                    sessions.append(SessionDecl(traffic, completion, arrival=arrival, demand=demand))
            else:
                every = intval(raw.get("every"), f"{path}.every", 1)
                start = intval(raw.get("start", 0), f"{path}.start", 0)
                until = raw.get("until")
                if until is not None:
                    until = intval(until, f"{path}.until", 1)
                if traffic is not None and completion is not None and every is not None and start is not None:
                    sessions.append(
                        SessionDecl(traffic, completion, every=every, start=start, until=until, demand=demand)
                    )

        raw_neg = data.get("negotiation", {})
        if not isinstance(raw_neg, dict):
            problems.append("negotiation: must be an object")
            raw_neg = {}
        neg = NegotiationParams(
            grant_request=intval(raw_neg.get("grant_request", 1), "negotiation.grant_request", 1) or 1,
            latency=intval(raw_neg.get("latency", 1), "negotiation.latency", 0) or 0,
        )
        raw_ho = data.get("handover", {})
        if not isinstance(raw_ho, dict):
            problems.append("handover: must be an object")
            raw_ho = {}
        hop = HandoverParams(
            latency=intval(raw_ho.get("latency", 1), "handover.latency", 0) or 0,
            max_replans=intval(raw_ho.get("max_replans", 3), "handover.max_replans", 0) or 0,
            scan_interval=intval(raw_ho.get("scan_interval", 10), "handover.scan_interval", 1) or 1,
        )

        if problems:
            raise ScenarioError(problems)
        return cls(
            bands=tuple(bands),
            sessions=tuple(sessions),
            horizon=horizon,
            seed=seed,
            negotiation=neg,
            handover=hop,
            name=name,
        )


def canonical_preset() -> Scenario:
    """The worked single-band example: 8 channels, video conferencing demand 4.

    Probe sessions (instant completion) arrive every step against a
    never-cooperative licensed user, so admissions sample the stationary
    occupancy and the blocked fraction estimates the analytic blocking
    probability.
    """
    return Scenario(
        name="canonical",
        bands=(
            BandDecl(
                band_id=0,
                capacity=8,
                p=0.2,
                q=0.2,
                initial_occupancy=4,
                disposition_state=PuState.NONCOOPERATIVE,
                alpha=0.0,
                beta=0.0,
            ),
        ),
        sessions=(SessionDecl(TrafficType.VIDEO_CONFERENCING, completion=1.0, every=1),),
        horizon=400_000,
        seed=42,
        negotiation=NegotiationParams(grant_request=1, latency=0),
        handover=HandoverParams(latency=0, max_replans=3, scan_interval=10),
    )


PRESETS = {"canonical": canonical_preset}


# ---------------------------------------------------------------------------
# metrics and trace
# ---------------------------------------------------------------------------

@dataclass
class Metrics:
    """Run counters; see module docstring for when each one moves.

    ``failed_handovers`` counts planning attempts that did not land a
    session (no qualifying target, or an arrival that found the target
    filled), while ``handovers`` counts completed migrations.
    """

    arrivals: int = 0
    admitted: int = 0
    blocked: int = 0
    completed: int = 0
    dropped: int = 0
    still_active: int = 0
    negotiations: int = 0
    grants: int = 0
    refusals: int = 0
    handovers: int = 0
    failed_handovers: int = 0
    interference_steps: int = 0
    mode_histogram: dict[str, int] = field(
        default_factory=lambda: {"Normal": 0, "Warning": 0, "Failure": 0}
    )

    @property
    def empirical_blocking(self) -> float | None:
        return self.blocked / self.arrivals if self.arrivals else None

    @property
    def empirical_noncompletion(self) -> float | None:
        return self.dropped / self.admitted if self.admitted else None

    def to_dict(self) -> dict:
        return {
            "arrivals": self.arrivals,
            "admitted": self.admitted,
            "blocked": self.blocked,
            "completed": self.completed,
            "dropped": self.dropped,
            "still_active": self.still_active,
            "negotiations": self.negotiations,
            "grants": self.grants,
            "refusals": self.refusals,
            "handovers": self.handovers,
            "failed_handovers": self.failed_handovers,
            "interference_steps": self.interference_steps,
            "mode_histogram": dict(self.mode_histogram),
            "empirical_blocking": self.empirical_blocking,
            "empirical_noncompletion": self.empirical_noncompletion,
        }


class EventKind:
    ADMIT = 1
    BLOCK = 2
    NEGOTIATION_STARTED = 3
    NEGOTIATION_GRANTED = 4
    NEGOTIATION_REFUSED = 5
    HANDOVER_STARTED = 6
    HANDOVER_COMPLETED = 7
    HANDOVER_REPLANNED = 8
    DROPPED = 9
    COMPLETED = 10


_KIND_NAMES = {
    EventKind.ADMIT: "admit",
    EventKind.BLOCK: "block",
    EventKind.NEGOTIATION_STARTED: "negotiation_started",
    EventKind.NEGOTIATION_GRANTED: "negotiation_granted",
    EventKind.NEGOTIATION_REFUSED: "negotiation_refused",
    EventKind.HANDOVER_STARTED: "handover_started",
    EventKind.HANDOVER_COMPLETED: "handover_completed",
    EventKind.HANDOVER_REPLANNED: "handover_replanned",
    EventKind.DROPPED: "dropped",
    EventKind.COMPLETED: "completed",
}

# payload key names for NDJSON export, per kind: (b, c)
_KIND_PAYLOAD = {
    EventKind.ADMIT: ("band", "demand"),
    EventKind.BLOCK: ("band", "demand"),
    EventKind.NEGOTIATION_STARTED: ("band", "latency"),
    EventKind.NEGOTIATION_GRANTED: ("band", "channels"),
    EventKind.NEGOTIATION_REFUSED: ("band", "channels"),
    EventKind.HANDOVER_STARTED: ("source", "target"),
    EventKind.HANDOVER_COMPLETED: ("band", "replans"),
    EventKind.HANDOVER_REPLANNED: ("band", "replans"),
    EventKind.DROPPED: ("band", "reason"),
    EventKind.COMPLETED: ("band", "unused"),
}

DROP_NO_TARGET = 1
DROP_REPLANS_EXHAUSTED = 2
DROP_LOOP_GUARD = 3

_DROP_REASONS = {
    DROP_NO_TARGET: "no_target",
    DROP_REPLANS_EXHAUSTED: "replans_exhausted",
    DROP_LOOP_GUARD: "loop_guard",
}

_EVENT_PACK = struct.Struct("<IBqqq").pack


class EventTrace:
    """Hash-accumulating event log; full records kept only on request.

    The trace hash is a blake2b-128 over a fixed little-endian packing of
    (scenario hash, seed) followed by every (step, kind, a, b, c) record,
    so it is stable across platforms and runs.
    """

    def __init__(self, scenario_hash_hex: str, seed: int, keep_records: bool = False):
        self._hasher = hashlib.blake2b(digest_size=16)
        self._hasher.update(b"crsim-trace-v1")
        self._hasher.update(bytes.fromhex(scenario_hash_hex))
        self._hasher.update(struct.pack("<q", seed))
        self.keep_records = keep_records
        self.records: list[tuple[int, int, int, int, int]] = []

    def add(self, step: int, kind: int, a: int, b: int, c: int) -> None:
        self._hasher.update(_EVENT_PACK(step, kind, a, b, c))
        if self.keep_records:
            self.records.append((step, kind, a, b, c))

    def hash_hex(self) -> str:
        return self._hasher.hexdigest()

    def ndjson_lines(self) -> Iterable[str]:
        if not self.keep_records:
            raise EngineError("trace records were not retained; run with keep_trace=True")
        for step, kind, a, b, c in self.records:
            key_b, key_c = _KIND_PAYLOAD[kind]
            row = {"step": step, "event": _KIND_NAMES[kind], "session": a}
            row[key_b] = b if b >= 0 else None
            if kind == EventKind.DROPPED:
                row[key_c] = _DROP_REASONS.get(c, str(c))
            elif key_c != "unused":
                row[key_c] = c if c >= 0 else None
            yield json.dumps(row, separators=(",", ":"))


@dataclass
class RunResult:
    scenario: Scenario
    seed: int
    metrics: Metrics
    trace: EventTrace
    kb: KnowledgeBase
    band_histograms: dict[int, list[int]]
    timeseries: list[tuple] | None = None

    @property
    def trace_hash(self) -> str:
        return self.trace.hash_hex()


# ---------------------------------------------------------------------------
# engine
# ---------------------------------------------------------------------------

class RandomStream:
    """Buffered uniform stream over one numpy Generator.

    Block draws produce the same values as repeated scalar draws, so this
    only amortizes call overhead; consumption order is unchanged.
    """

    __slots__ = ("_rng", "_buf", "_idx", "_len")
    _BLOCK = 8192

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(seed)
        self._buf = self._rng.random(self._BLOCK).tolist()
        self._idx = 0
        self._len = self._BLOCK

    def random(self) -> float:
        i = self._idx
        if i >= self._len:
            self._buf = self._rng.random(self._BLOCK).tolist()
            i = 0
        self._idx = i + 1
        return self._buf[i]


class Engine:
    """Owns all mutable world state for one run."""

    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        keep_trace: bool = False,
        collect_timeseries: bool = False,
        kb: KnowledgeBase | None = None,
    ):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.stream = RandomStream(self.seed)
        self.bands: list[SpectrumBand] = sorted(
            (decl.build() for decl in scenario.bands), key=lambda b: b.band_id
        )
        self.band_by_id = {b.band_id: b for b in self.bands}
        self.holder: dict[int, SuSession | None] = {b.band_id: None for b in self.bands}
        self.kb = kb if kb is not None else KnowledgeBase()
        self.metrics = Metrics()
        self.trace = EventTrace(scenario.sha256(), self.seed, keep_records=keep_trace)
        self.live: list[SuSession] = []
        self.step_index = 0
        self._arrival_seq = 0
        self._mode_names = ("Normal", "Warning", "Failure")
        self._hist = {b.band_id: [0] * (b.capacity + 1) for b in self.bands}
        self._neg_events: list[tuple[int, bool]] = []
        self._sense_events: list[tuple[int, spectrum_env.SensingReport, int]] = []
        self._single_arrivals: dict[int, list[SessionDecl]] = {}
        self._patterns: list[SessionDecl] = []
        for decl in scenario.sessions:
            if decl.arrival is not None:
                self._single_arrivals.setdefault(decl.arrival, []).append(decl)
            else:
                self._patterns.append(decl)
        self._hop_cap = 2 * len(self.bands) + scenario.handover.max_replans + 2
        self.timeseries: list[tuple] | None = [] if collect_timeseries else None

    # -- views ------------------------------------------------------------

    def band_views(self) -> list[BandView]:
        return [
            BandView(b.band_id, b.capacity, b.capacity - b.pu_used, self.holder[b.band_id] is not None)
            for b in self.bands
        ]

    # -- per-step machinery -------------------------------------------------

    def step(self) -> None:
        """Advance the world one step (sub-steps 1-9, fixed order)."""
        if self.step_index >= self.scenario.horizon:
            raise EngineError("stepping past the scenario horizon")
        t = self.step_index
        stream = self.stream
        m = self.metrics

        # (1) occupancy chains, ascending band id
        for band in self.bands:
            spectrum_env.step_band(band, stream)
        # (2) disposition chains, ascending band id
        for band in self.bands:
            negotiation.step_disposition(band.disposition, stream)

        # (3) arrivals in priority order
        due = self._single_arrivals.get(t)
        pattern_hits = [d for d in self._patterns if d.arrives_at(t, self.scenario.horizon)]
        if due or pattern_hits:
            decls = (due or []) + pattern_hits
            if len(decls) > 1:
                requests = su_fsm.order_arrivals(
                    [
                        su_fsm.ArrivalRequest(i, d.traffic, d.completion, d.effective_demand())
                        for i, d in enumerate(decls)
                    ]
                )
                ordered = [(r.traffic, r.completion, r.effective_demand()) for r in requests]
            else:
                d = decls[0]
                ordered = [(d.traffic, d.completion, d.effective_demand())]
            for traffic, completion, demand in ordered:
                self._admit_one(t, traffic, completion, demand)

        # (4-6) sense, classify, decide, act
        for session in tuple(self.live):
            status = session.status
            if status is SessionStatus.ACTIVE:
                self._active_substep(session, t)
            elif status is SessionStatus.NEGOTIATING:
                session.negotiation_wait -= 1
                if session.negotiation_wait <= 0:
                    self._resolve_negotiation(session, t)
            elif status is SessionStatus.HANDING_OVER:
                session.handover_wait -= 1
                if session.handover_wait <= 0:
                    self._arrive(session, t)

        # (7) completion draws, ascending session id
        for session in tuple(self.live):
            if session.transmitting:
                if stream.random() < session.completion:
                    self._complete(session, t)
                else:
                    session.transmitting = False
            session.hops = 0

        # (8) knowledge-base updates buffered during this step
        if self._neg_events:
            for band_id, granted in self._neg_events:
                self.kb.record_negotiation(band_id, granted)
            self._neg_events.clear()
        if self._sense_events:
            for band_id, report, demand in self._sense_events:
                self.kb.record_sense(band_id, report, demand)
            self._sense_events.clear()

        # (9) metrics, histograms, invariants
        for band in self.bands:
            self._hist[band.band_id][band.pu_used] += 1
        m.still_active = len(self.live)
        if m.admitted + m.blocked != m.arrivals:
            raise EngineError("conservation violated: admitted + blocked != arrivals")
        if m.completed + m.dropped + m.still_active != m.admitted:
            raise EngineError("conservation violated: completed + dropped + active != admitted")
        if m.grants + m.refusals != m.negotiations:
            raise EngineError("conservation violated: grants + refusals != negotiations")
        if self.timeseries is not None:
            self.timeseries.append(
                (t, *(b.pu_used for b in self.bands), m.still_active, m.arrivals, m.blocked, m.completed, m.dropped)
            )
        self.step_index = t + 1

    def _admit_one(self, t: int, traffic: TrafficType, completion: float, demand: int) -> None:
        m = self.metrics
        sid = self._arrival_seq
        self._arrival_seq += 1
        m.arrivals += 1
        band_id = su_fsm.admit(traffic, self.band_views(), self.kb, demand=demand)
        if band_id is None:
            m.blocked += 1
            self.trace.add(t, EventKind.BLOCK, sid, -1, demand)
            return
        m.admitted += 1
        session = SuSession(
            session_id=sid,
            traffic=traffic,
            demand=demand,
            completion=completion,
            status=SessionStatus.ACTIVE,
            band_id=band_id,
            started_at=t,
        )
        self.holder[band_id] = session
        self.live.append(session)
        self.trace.add(t, EventKind.ADMIT, sid, band_id, demand)

    def _active_substep(self, session: SuSession, t: int) -> None:
        band = self.band_by_id[session.band_id]
        report = spectrum_env.sense(band, t)
        self._sense_events.append((band.band_id, report, session.demand))
        if t % self.scenario.handover.scan_interval == 0:
            for other in self.bands:
                if other.band_id != band.band_id:
                    self._sense_events.append(
                        (other.band_id, spectrum_env.sense(other, t), session.demand)
                    )
        if session.demand == 0:  # pure probe: no spectrum pressure, always Normal
            mode = Mode.NORMAL
        else:
            mode = su_fsm.classify_mode(band.pu_used, session.demand, band.capacity)
        session.mode = mode
        self.metrics.mode_histogram[self._mode_names[mode]] += 1
        if mode is Mode.FAILURE:
            self.metrics.interference_steps += 1
        action = su_fsm.decide(session, mode)
        if action is Action.CONTINUE_TRANSMIT:
            session.transmitting = True
        elif action is Action.START_NEGOTIATION:
            self._begin_negotiation(session, t)
        else:  # START_HANDOVER (Failure: no negotiation phase)
            session.status = SessionStatus.HANDING_OVER
            self._start_handover(session, t)

    def _begin_negotiation(self, session: SuSession, t: int) -> None:
        session.status = SessionStatus.NEGOTIATING
        latency = self.scenario.negotiation.latency
        if latency == 0:
            self._resolve_negotiation(session, t)
        else:
            session.negotiation_wait = latency
            self.trace.add(t, EventKind.NEGOTIATION_STARTED, session.session_id, session.band_id, latency)

    def _resolve_negotiation(self, session: SuSession, t: int) -> None:
        band = self.band_by_id[session.band_id]
        request = NegotiationRequest(band.band_id, self.scenario.negotiation.grant_request)
        outcome = negotiation.negotiate(band, request)
        m = self.metrics
        m.negotiations += 1
        self._neg_events.append((band.band_id, outcome.granted))
        su_fsm.apply_outcome(session, outcome)
        if outcome.granted:
            m.grants += 1
            self.trace.add(t, EventKind.NEGOTIATION_GRANTED, session.session_id, band.band_id, outcome.channels)
            session.transmitting = True
        else:
            m.refusals += 1
            self.trace.add(t, EventKind.NEGOTIATION_REFUSED, session.session_id, band.band_id, 0)
            self._start_handover(session, t)

    def _start_handover(self, session: SuSession, t: int) -> None:
        session.transmitting = False
        session.hops += 1
        source = session.band_id
        if source is not None and self.holder.get(source) is session:
            self.holder[source] = None
        if session.hops > self._hop_cap:
            log.warning("session %d bounced between bands within one step; dropping", session.session_id)
            self.metrics.failed_handovers += 1
            self._drop(session, t, DROP_LOOP_GUARD)
            return
        plan = ho.plan_handover(
            session.session_id,
            self.band_views(),
            current=source if source is not None else -1,
            demand=session.demand,
            kb=self.kb,
            latency=self.scenario.handover.latency,
        )
        self.trace.add(
            t,
            EventKind.HANDOVER_STARTED,
            session.session_id,
            source if source is not None else -1,
            plan.target if plan.target is not None else -1,
        )
        if plan.target is None:
            self.metrics.failed_handovers += 1
            self._drop(session, t, DROP_NO_TARGET)
            return
        session.handover_target = plan.target
        session.handover_wait = plan.latency
        if plan.latency == 0:
            self._arrive(session, t)

    def _arrive(self, session: SuSession, t: int) -> None:
        target = self.band_by_id[session.handover_target]
        if self.holder[target.band_id] is None and target.free >= session.demand:
            replans_taken = session.replans
            session.band_id = target.band_id
            session.handover_target = None
            session.status = SessionStatus.ACTIVE
            session.replans = 0
            self.holder[target.band_id] = session
            self.metrics.handovers += 1
            self.trace.add(t, EventKind.HANDOVER_COMPLETED, session.session_id, target.band_id, replans_taken)
            self._active_substep(session, t)  # fresh sensing, mode, action
            return
        # target filled up during the latency window: plan again
        session.replans += 1
        self.metrics.failed_handovers += 1
        self.trace.add(t, EventKind.HANDOVER_REPLANNED, session.session_id, target.band_id, session.replans)
        if session.replans >= self.scenario.handover.max_replans:
            self._drop(session, t, DROP_REPLANS_EXHAUSTED)
            return
        self._start_handover(session, t)

    def _drop(self, session: SuSession, t: int, reason: int) -> None:
        session.status = SessionStatus.DROPPED
        session.ended_at = t
        session.transmitting = False
        band = session.band_id if session.band_id is not None else -1
        if band >= 0 and self.holder.get(band) is session:
            self.holder[band] = None
        self.metrics.dropped += 1
        self.trace.add(t, EventKind.DROPPED, session.session_id, band, reason)
        self.live.remove(session)

    def _complete(self, session: SuSession, t: int) -> None:
        session.status = SessionStatus.COMPLETED
        session.ended_at = t
        session.transmitting = False
        band = session.band_id if session.band_id is not None else -1
        if band >= 0 and self.holder.get(band) is session:
            self.holder[band] = None
        self.metrics.completed += 1
        self.trace.add(t, EventKind.COMPLETED, session.session_id, band, 0)
        self.live.remove(session)

    def run(self) -> RunResult:
        for _ in range(self.scenario.horizon - self.step_index):
            self.step()
        return RunResult(
            scenario=self.scenario,
            seed=self.seed,
            metrics=self.metrics,
            trace=self.trace,
            kb=self.kb,
            band_histograms=dict(self._hist),
            timeseries=self.timeseries,
        )


def run(
    scenario: Scenario,
    seed: int | None = None,
    keep_trace: bool = False,
    collect_timeseries: bool = False,
    kb: KnowledgeBase | None = None,
) -> RunResult:
    """Execute a scenario to its horizon and return metrics plus trace."""
    return Engine(
        scenario,
        seed=seed,
        keep_trace=keep_trace,
        collect_timeseries=collect_timeseries,
        kb=kb,
    ).run()


# ---------------------------------------------------------------------------
# analytic comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompareRow:
    metric: str
    analytic: float
    simulated: float

    @property
    def abs_diff(self) -> float:
        return abs(self.analytic - self.simulated)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "analytic": self.analytic,
            "simulated": self.simulated,
            "abs_diff": self.abs_diff,
        }


@dataclass(frozen=True)
class CompareReport:
    rows: tuple[CompareRow, ...]
    notes: tuple[str, ...]
    seed: int
    scenario_sha256: str

    def row(self, metric: str) -> CompareRow:
        for r in self.rows:
            if r.metric == metric:
                return r
        raise KeyError(metric)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "notes": list(self.notes),
            "seed": self.seed,
            "scenario_sha256": self.scenario_sha256,
        }

    def format_table(self) -> str:
        lines = [f"{'metric':<16}{'analytic':>12}{'simulated':>12}{'|diff|':>12}"]
        for r in self.rows:
            lines.append(f"{r.metric:<16}{r.analytic:>12.6f}{r.simulated:>12.6f}{r.abs_diff:>12.6f}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def _uniform_session_parameters(scenario: Scenario) -> tuple[int, float]:
    demands = {decl.effective_demand() for decl in scenario.sessions}
    traffics = {decl.traffic for decl in scenario.sessions}
    completions = {decl.completion for decl in scenario.sessions}
    if not scenario.sessions:
        raise ComparisonError("analytic comparison needs at least one session declaration")
    if len(traffics) > 1 or len(demands) > 1:
        raise ComparisonError("analytic comparison assumes a single traffic type (one demand value)")
    if len(completions) > 1:
        raise ComparisonError("analytic comparison assumes a single completion probability")
    return demands.pop(), completions.pop()


def compare(scenario: Scenario, seed: int | None = None) -> CompareReport:
    """Run the scenario and set empirical figures against the analytic ones.

    Requires the scenario to satisfy the analytic model's assumptions:
    zero negotiation and handover latency and a single session type.  The
    non-completion row additionally needs a single band and sessions that
    do not complete instantly; otherwise it is skipped with a note.
    """
    if scenario.negotiation.latency != 0:
        raise ComparisonError(
            f"non-completion analytic assumes zero latency (negotiation latency {scenario.negotiation.latency})"
        )
    if scenario.handover.latency != 0:
        raise ComparisonError(
            f"non-completion analytic assumes zero latency (handover latency {scenario.handover.latency})"
        )
    demand, completion = _uniform_session_parameters(scenario)

    chains = [OccupancyChain(b.capacity, b.p, b.q) for b in scenario.bands]
    analytic_blocking = markov.blocking_probability(chains, demand)

    result = run(scenario, seed=seed)
    rows = [CompareRow("blocking", analytic_blocking, result.metrics.empirical_blocking or 0.0)]
    notes: list[str] = []

    if demand == 0:
        notes.append("non-completion row skipped: zero-demand probe sessions never hold spectrum")
    elif len(scenario.bands) != 1:
        notes.append("non-completion row skipped: analytic model covers a single band with no alternative")
    elif completion >= 1.0:
        notes.append("non-completion row skipped: instant-completion probes never race the occupancy chain")
    else:
        band = scenario.bands[0]
        gamma = negotiation.stationary_cooperative_probability(
            PuDisposition(band.disposition_state, band.alpha, band.beta)
        )
        analytic_nc = markov.noncompletion_probability(chains[0], demand, completion, gamma)
        rows.append(
            CompareRow("non-completion", analytic_nc, result.metrics.empirical_noncompletion or 0.0)
        )

    return CompareReport(
        rows=tuple(rows),
        notes=tuple(notes),
        seed=result.seed,
        scenario_sha256=scenario.sha256(),
    )
