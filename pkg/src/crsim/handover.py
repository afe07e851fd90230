"""Spectral handover: choosing a replacement band for a failing session."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .learning import KnowledgeBase
from .spectrum_env import BandView


@dataclass(frozen=True, slots=True)
class HandoverPlan:
    session_id: int
    source: int
    target: int | None
    latency: int


def select_target(
    bands: Sequence[BandView],
    current: int,
    demand: int,
    kb: KnowledgeBase | None = None,
) -> int | None:
    """Best alternative band able to host ``demand`` channels, if any.

    Candidates are every band other than the current one with enough free
    channels and no resident secondary session; the knowledge-base score
    ranks them, ties breaking toward the lowest band id.  The result is
    independent of the order bands are listed in.
    """
    best: int | None = None
    best_score = -1.0
    for view in bands:
        if view.band_id == current or view.su_busy or view.free < demand:
            continue
        score = kb.score(view.band_id) if kb is not None else 0.25
        if score > best_score or (score == best_score and (best is None or view.band_id < best)):
            best = view.band_id
            best_score = score
    return best


def plan_handover(
    session_id: int,
    bands: Sequence[BandView],
    current: int,
    demand: int,
    kb: KnowledgeBase | None,
    latency: int,
) -> HandoverPlan:
    """Build a handover plan; target is None when no band qualifies."""
    target = select_target(bands, current, demand, kb)
    return HandoverPlan(session_id=session_id, source=current, target=target, latency=latency)
