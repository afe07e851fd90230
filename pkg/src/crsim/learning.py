"""Per-band knowledge base fed by negotiation and sensing events.

Counters are Laplace-smoothed into grant-rate and availability estimates
whose product scores a band for admission and handover target selection.
Fresh bands score 0.25 (both estimates at the 0.5 prior), so unexplored
spectrum stays eligible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator

if TYPE_CHECKING:
    from .spectrum_env import SensingReport


@dataclass(slots=True)
class BandRecord:
    attempts: int = 0
    grants: int = 0
    sensed: int = 0
    available: int = 0


class KnowledgeBase:
    """Monotone per-band event counters with smoothed estimates."""

    def __init__(self) -> None:
        self._records: dict[int, BandRecord] = {}

    def _record(self, band_id: int) -> BandRecord:
        rec = self._records.get(band_id)
        if rec is None:
            rec = BandRecord()
            self._records[band_id] = rec
        return rec

    def record_negotiation(self, band_id: int, granted: bool) -> None:
        rec = self._record(band_id)
        rec.attempts += 1
        if granted:
            rec.grants += 1

    def record_sense(self, band_id: int, report: "SensingReport", demand: int) -> None:
        rec = self._record(band_id)
        rec.sensed += 1
        if report.free >= demand:
            rec.available += 1

    def coop_estimate(self, band_id: int) -> float:
        rec = self._records.get(band_id)
        if rec is None:
            return 0.5
        return (rec.grants + 1) / (rec.attempts + 2)

    def availability_estimate(self, band_id: int) -> float:
        rec = self._records.get(band_id)
        if rec is None:
            return 0.5
        return (rec.available + 1) / (rec.sensed + 2)

    def score(self, band_id: int) -> float:
        return self.coop_estimate(band_id) * self.availability_estimate(band_id)

    def band_ids(self) -> Iterator[int]:
        return iter(sorted(self._records))

    def counters(self, band_id: int) -> BandRecord:
        """The raw counters for a band (zeros if never touched)."""
        return self._records.get(band_id, BandRecord())

    def to_json_dict(self) -> dict[str, dict[str, int]]:
        return {
            str(band_id): {
                "attempts": rec.attempts,
                "grants": rec.grants,
                "sensed": rec.sensed,
                "available": rec.available,
            }
            for band_id, rec in sorted(self._records.items())
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "KnowledgeBase":
        kb = cls()
        for band_id, counters in data.items():
            rec = BandRecord(
                attempts=int(counters.get("attempts", 0)),
                grants=int(counters.get("grants", 0)),
                sensed=int(counters.get("sensed", 0)),
                available=int(counters.get("available", 0)),
            )
            if not 0 <= rec.grants <= rec.attempts:
                raise ValueError(f"band {band_id}: grants must be within 0..attempts")
            if not 0 <= rec.available <= rec.sensed:
                raise ValueError(f"band {band_id}: available must be within 0..sensed")
            kb._records[int(band_id)] = rec
        return kb
