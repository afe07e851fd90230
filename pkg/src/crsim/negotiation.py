"""Channel negotiation between the secondary user and the licensed user.

The licensed user's willingness to yield channels is a two-state Markov
chain (cooperative / non-cooperative) that evolves every simulation step,
independently of any ongoing negotiation.  A negotiation itself is a single
atomic request/response: a cooperative licensed user yields the requested
number of channels (clamped to what it currently uses, never less than
one), a non-cooperative one refuses outright.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from .spectrum_env import SpectrumBand, grant_channels

log = logging.getLogger(__name__)


class PuState(Enum):
    COOPERATIVE = "cooperative"
    NONCOOPERATIVE = "noncooperative"


@dataclass(slots=True)
class PuDisposition:
    """Two-state willingness chain with switch probabilities alpha and beta."""

    state: PuState
    alpha: float  # cooperative -> non-cooperative
    beta: float  # non-cooperative -> cooperative

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")


@dataclass(frozen=True, slots=True)
class NegotiationRequest:
    band_id: int
    channels_requested: int = 1

    def __post_init__(self) -> None:
        if self.channels_requested < 1:
            raise ValueError(f"a negotiation requests at least one channel, got {self.channels_requested}")


@dataclass(frozen=True, slots=True)
class NegotiationOutcome:
    """Granted(channels >= 1) or Refused (channels == 0)."""

    granted: bool
    channels: int = 0

    def __post_init__(self) -> None:
        if self.granted and self.channels < 1:
            raise ValueError("a granted negotiation yields at least one channel")
        if not self.granted and self.channels != 0:
            raise ValueError("a refused negotiation yields no channels")


REFUSED = NegotiationOutcome(granted=False)


def step_disposition(disposition: PuDisposition, rng) -> None:
    """Advance the willingness chain one step (in place, one uniform draw)."""
    u = rng.random()
    if disposition.state is PuState.COOPERATIVE:
        if u < disposition.alpha:
            disposition.state = PuState.NONCOOPERATIVE
    else:
        if u < disposition.beta:
            disposition.state = PuState.COOPERATIVE


def stationary_cooperative_probability(disposition: PuDisposition) -> float:
    """Long-run probability of the cooperative state (the grant rate)."""
    if disposition.alpha == 0.0 and disposition.beta == 0.0:
        return 1.0 if disposition.state is PuState.COOPERATIVE else 0.0
    return disposition.beta / (disposition.alpha + disposition.beta)


def negotiate(band: SpectrumBand, request: NegotiationRequest) -> NegotiationOutcome:
    """Resolve one negotiation against the band's current disposition.

    A cooperative licensed user yields min(requested, pu_used) channels and
    the band is updated in place; a non-cooperative one refuses and the
    band is left untouched.  Outcome depends only on the disposition state
    at this step (plus the clamp).
    """
    if band.disposition.state is PuState.NONCOOPERATIVE:
        return REFUSED
    if band.pu_used == 0:
        # Warning mode with an idle licensed user cannot arise from the mode
        # classifier when demand < capacity; reaching this line signals an
        # engine bug (or the degenerate demand == capacity configuration).
        log.warning("negotiation on band %d with idle PU: nothing to yield, refusing", band.band_id)
        return REFUSED
    yielded = min(request.channels_requested, band.pu_used)
    grant_channels(band, yielded)
    return NegotiationOutcome(granted=True, channels=yielded)
