"""Slotted layer-2 bootstrap: neighbor discovery and common channel set.

Time is organized in rounds of frames of N timeslots, node i owning slot i
of every frame.  Phase 1 runs one round of M frames, frame m bound to
channel m: a node beacons in its slot on the frame's channel when that
channel is in its own set, so a neighbor hears it exactly on the channels
both can use.  Phase 2 runs rounds of a single frame in which every node
broadcasts its current candidate set to each reachable neighbor (lowest
shared channel) and intersects what it receives; after as many rounds as
the network diameter, every node of a connected network holds the global
intersection.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence


class TdmaError(ValueError):
    """Raised for out-of-range nodes, phases, or malformed topologies."""


@dataclass(frozen=True, slots=True)
class TdmaConfig:
    node_count: int
    channel_count: int
    diameter_bound: int = 1

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise TdmaError(f"node_count must be >= 1, got {self.node_count}")
        if self.channel_count < 1:
            raise TdmaError(f"channel_count must be >= 1, got {self.channel_count}")
        if self.diameter_bound < 1:
            raise TdmaError(f"diameter_bound must be >= 1, got {self.diameter_bound}")


@dataclass(frozen=True)
class NodeProfile:
    node_id: int
    channel_set: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "channel_set", frozenset(self.channel_set))
        if not self.channel_set:
            raise TdmaError(f"node {self.node_id}: channel set must be nonempty")


class Beacon(NamedTuple):
    frame: int
    slot: int
    node: int
    channel: int


@dataclass(frozen=True)
class DiscoveryResult:
    neighbor_tables: dict[int, dict[int, frozenset[int]]]
    candidates: dict[int, frozenset[int]]
    connected: bool
    rounds: int

    @property
    def global_common(self) -> frozenset[int] | None:
        """The network-wide common set, or None when discovery was split."""
        if not self.connected:
            return None
        values = set(self.candidates.values())
        return values.pop() if len(values) == 1 else None


def transmit_slot(config: TdmaConfig, node_id: int) -> int:
    """The timeslot node i transmits in (the i-th of every frame)."""
    if not 0 <= node_id < config.node_count:
        raise TdmaError(f"node {node_id} outside 0..{config.node_count - 1}")
    return node_id


def round_length(config: TdmaConfig, phase: int) -> int:
    """Slots per round: M frames of N slots in phase 1, one frame in phase 2."""
    if phase == 1:
        return config.channel_count * config.node_count
    if phase == 2:
        return config.node_count
    raise TdmaError(f"phase must be 1 or 2, got {phase}")


def _build_adjacency(profiles: Sequence[NodeProfile], edges: Iterable[tuple[int, int]]) -> dict[int, set[int]]:
    ids = {p.node_id for p in profiles}
    if len(ids) != len(profiles):
        raise TdmaError("duplicate node ids in profiles")
    adjacency: dict[int, set[int]] = {p.node_id: set() for p in profiles}
    for i, j in edges:
        if i == j:
            raise TdmaError(f"self-loop on node {i}")
        if i not in ids or j not in ids:
            raise TdmaError(f"edge ({i}, {j}) references an unknown node")
        adjacency[i].add(j)
        adjacency[j].add(i)
    return adjacency


def schedule_phase1(profiles: Sequence[NodeProfile], config: TdmaConfig) -> list[Beacon]:
    """Every beacon transmission of one phase-1 round, in slot order."""
    beacons = []
    by_slot = sorted(profiles, key=lambda p: p.node_id)
    for frame in range(config.channel_count):
        for profile in by_slot:
            if frame in profile.channel_set:
                beacons.append(Beacon(frame, transmit_slot(config, profile.node_id), profile.node_id, frame))
    return beacons


def run_phase1(
    profiles: Sequence[NodeProfile], edges: Iterable[tuple[int, int]]
) -> dict[int, dict[int, frozenset[int]]]:
    """Neighbor tables after one discovery round: common(i, j) per adjacent pair.

    Frame m is bound to channel m; node i beacons on it in slot i when it
    can use the channel, and every adjacent node listening on that channel
    records the reception.  The table keeps an (empty) entry for adjacent
    pairs that never heard each other.
    """
    adjacency = _build_adjacency(profiles, edges)
    channels = {p.node_id: p.channel_set for p in profiles}
    m = max((max(s) for s in channels.values()), default=0) + 1
    config = TdmaConfig(node_count=max(channels) + 1 if channels else 1, channel_count=m)
    heard: dict[int, dict[int, set[int]]] = {
        i: {j: set() for j in neighbors} for i, neighbors in adjacency.items()
    }
    for beacon in schedule_phase1(profiles, config):
        for receiver in adjacency[beacon.node]:
            if beacon.channel in channels[receiver]:
                heard[receiver][beacon.node].add(beacon.channel)
    return {
        i: {j: frozenset(common) for j, common in sorted(table.items())}
        for i, table in sorted(heard.items())
    }


def run_phase2(
    tables: Mapping[int, Mapping[int, frozenset[int]]],
    profiles: Sequence[NodeProfile],
    edges: Iterable[tuple[int, int]],
    rounds: int,
) -> dict[int, frozenset[int]]:
    """Candidate sets after ``rounds`` dissemination rounds.

    Each round is a single frame: in slot order every node broadcasts its
    current candidate set on the lowest channel shared with each neighbor
    (a link exists only where phase 1 found a nonempty common set), and
    receivers intersect the payload into their own candidate.
    """
    if rounds < 0:
        raise TdmaError(f"rounds must be nonnegative, got {rounds}")
    adjacency = _build_adjacency(profiles, edges)
    candidates: dict[int, set[int]] = {p.node_id: set(p.channel_set) for p in profiles}
    order = sorted(candidates)
    for _ in range(rounds):
        for node in order:  # slot i of the frame
            payload = frozenset(candidates[node])
            for neighbor in adjacency[node]:
                if tables.get(node, {}).get(neighbor):
                    candidates[neighbor] &= payload
    return {node: frozenset(c) for node, c in sorted(candidates.items())}


def restricted_links(tables: Mapping[int, Mapping[int, frozenset[int]]]) -> dict[int, set[int]]:
    """Adjacency restricted to pairs that share at least one channel."""
    links: dict[int, set[int]] = {i: set() for i in tables}
    for i, table in tables.items():
        for j, common in table.items():
            if common:
                links[i].add(j)
                links.setdefault(j, set()).add(i)
    return links


def _bfs_distances(links: Mapping[int, set[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for neighbor in links[node]:
            if neighbor not in dist:
                dist[neighbor] = dist[node] + 1
                queue.append(neighbor)
    return dist


def restricted_diameter(links: Mapping[int, set[int]]) -> tuple[int, bool]:
    """(max eccentricity over components, whether the graph is connected)."""
    if not links:
        return 0, True
    nodes = list(links)
    connected = len(_bfs_distances(links, nodes[0])) == len(nodes)
    diameter = 0
    for node in nodes:  # all-pairs via BFS; instances here stay tiny
        dist = _bfs_distances(links, node)
        diameter = max(diameter, max(dist.values(), default=0))
    return diameter, connected


def discover(
    profiles: Sequence[NodeProfile],
    edges: Iterable[tuple[int, int]],
    rounds: int | None = None,
) -> DiscoveryResult:
    """Run both phases; rounds defaults to the restricted-graph diameter."""
    edge_list = list(edges)
    tables = run_phase1(profiles, edge_list)
    links = restricted_links(tables)
    diameter, connected = restricted_diameter(links)
    used = max(1, diameter) if rounds is None else rounds
    candidates = run_phase2(tables, profiles, edge_list, used)
    return DiscoveryResult(
        neighbor_tables=tables, candidates=candidates, connected=connected, rounds=used
    )
