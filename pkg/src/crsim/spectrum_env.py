"""Live spectrum-band state: licensed-user occupancy and sensing.

Bands are owned and mutated by the simulation engine (single writer per
run); the functions here change band state in place and consume exactly
one uniform draw per call where randomness is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

from .markov import OccupancyChain

if TYPE_CHECKING:
    from .negotiation import PuDisposition


class GrantError(ValueError):
    """Raised when the licensed user is asked to yield more than it occupies."""


@dataclass(slots=True)
class SpectrumBand:
    """One spectrum band: occupancy chain parameters plus current state."""

    band_id: int
    chain: OccupancyChain
    pu_used: int
    disposition: "PuDisposition"

    @property
    def capacity(self) -> int:
        return self.chain.capacity

    @property
    def free(self) -> int:
        return self.chain.capacity - self.pu_used

    def __post_init__(self) -> None:
        if self.band_id < 0:
            raise ValueError(f"band id must be nonnegative, got {self.band_id}")
        if not 0 <= self.pu_used <= self.chain.capacity:
            raise ValueError(
                f"occupancy {self.pu_used} outside 0..{self.chain.capacity} on band {self.band_id}"
            )


class SensingReport(NamedTuple):
    """Noise-free snapshot of a band at one time step."""

    band_id: int
    pu_used: int
    free: int
    step: int


class BandView(NamedTuple):
    """Read-only band snapshot used for admission and handover decisions."""

    band_id: int
    capacity: int
    free: int
    su_busy: bool


def step_band(band: SpectrumBand, rng) -> None:
    """Advance the band's occupancy by one chain step (in place).

    Consumes exactly one uniform draw: [0, birth) raises occupancy,
    [birth, birth+death) lowers it, the rest holds, with moves off the
    0..capacity range suppressed.
    """
    u = rng.random()
    chain = band.chain
    if u < chain.birth:
        if band.pu_used < chain.capacity:
            band.pu_used += 1
    elif u < chain.birth + chain.death:
        if band.pu_used > 0:
            band.pu_used -= 1


def sense(band: SpectrumBand, step: int) -> SensingReport:
    """Return a faithful sensing report for the band at the given step."""
    return SensingReport(band.band_id, band.pu_used, band.capacity - band.pu_used, step)


def grant_channels(band: SpectrumBand, channels: int) -> None:
    """The licensed user defers ``channels`` of its current usage (in place)."""
    if channels < 1:
        raise GrantError(f"grant must yield at least one channel, got {channels}")
    if channels > band.pu_used:
        raise GrantError(
            f"PU cannot yield more than it uses ({channels} > {band.pu_used} on band {band.band_id})"
        )
    band.pu_used -= channels
