"""Domain types, L1 geometry and the trip economics every solver consults.

Fares, losses, discounts and the driver reserve are linear in their
arguments with coefficients held in :class:`EconomicParams`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

VEHICLE_CAPACITY = 4


@dataclass(frozen=True, order=True)
class GeoPoint:
    """Planar position in meters (x east, y north)."""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates: ({self.x}, {self.y})")


@dataclass(frozen=True)
class Request:
    id: int
    origin: GeoPoint
    destination: GeoPoint
    depart_time: float
    latest_arrival: float

    def __post_init__(self):
        if self.latest_arrival < self.depart_time:
            raise ValueError(f"request {self.id}: latest_arrival before depart_time")
        if self.origin == self.destination:
            raise ValueError(f"request {self.id}: origin equals destination")


@dataclass(frozen=True)
class Vehicle:
    id: int
    location: GeoPoint
    capacity: int = VEHICLE_CAPACITY

    def __post_init__(self):
        if self.capacity != VEHICLE_CAPACITY:
            raise ValueError(f"vehicle capacity is fixed at {VEHICLE_CAPACITY}")


@dataclass(frozen=True)
class EconomicParams:
    """Thresholds and linear cost coefficients.

    delta, xi in meters; t_window in seconds; zeta and fare_base in currency;
    fare_rate and walk_cost per meter; wait_cost per second; v_bar in m/s.
    """
    delta: float = 400.0
    t_window: float = 300.0
    zeta: float = 1.5
    xi: float = 1500.0
    v_bar: float = 6.0
    fare_base: float = 2.5
    fare_rate: float = 0.0015
    walk_cost: float = 0.001
    wait_cost: float = 0.001
    discount_per_corider: float = 0.15
    discount_cap: float = 0.4

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
        if self.v_bar <= 0:
            raise ValueError("v_bar must be positive")
        if self.discount_cap >= 1:
            raise ValueError("discount_cap must be < 1")


@dataclass(frozen=True)
class MemberPricing:
    loss: float
    discount: float
    gain: float
    pay: float
    fare: float


@dataclass(frozen=True)
class TripPlan:
    members: frozenset
    meet_point: GeoPoint
    drop_point: GeoPoint
    depart: float
    arrive: float
    pricing: Mapping[int, MemberPricing] = field(default_factory=dict)
    reserve: float = 0.0

    @property
    def key(self) -> tuple:
        """Sorted member ids; the canonical identity of a trip."""
        return tuple(sorted(self.members))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def revenue(self) -> float:
        return sum(pr.pay for pr in self.pricing.values())


@dataclass(frozen=True)
class DriverEconomics:
    pickup_dist: float
    reserve: float
    willing: bool


@dataclass(frozen=True)
class Match:
    vehicle_id: int
    trip: TripPlan


@dataclass
class Assignment:
    """Vehicle to trip matches plus derived rider lookup.

    ``matches`` is kept as a list of pairs rather than a dict so that a
    vehicle matched twice is representable and reported by the validator.
    """
    matches: list = field(default_factory=list)
    rider_of: dict = field(default_factory=dict)
    served: int = 0
    weight: float = 0.0

    @classmethod
    def from_matches(cls, matches: Iterable[Match], vehicles: Mapping[int, Vehicle],
                     p: EconomicParams) -> "Assignment":
        matches = list(matches)
        rider_of = {}
        for m in matches:
            for rid in m.trip.members:
                rider_of[rid] = m.vehicle_id
        weight = sum(match_weight(vehicles[m.vehicle_id], m.trip, p) for m in matches)
        served = sum(m.trip.size for m in matches)
        return cls(matches=matches, rider_of=rider_of, served=served, weight=weight)

    def by_vehicle(self) -> dict:
        return {m.vehicle_id: m.trip for m in self.matches}


@dataclass(frozen=True)
class Violation:
    constraint: str
    detail: str


def manhattan_distance(a: GeoPoint, b: GeoPoint) -> float:
    return abs(a.x - b.x) + abs(a.y - b.y)


def is_close(i: Request, j: Request, p: EconomicParams) -> bool:
    return (manhattan_distance(i.origin, j.origin) <= p.delta
            and manhattan_distance(i.destination, j.destination) <= p.delta
            and abs(i.depart_time - j.depart_time) <= p.t_window)


def fare(i: Request, p: EconomicParams) -> float:
    return p.fare_base + p.fare_rate * manhattan_distance(i.origin, i.destination)


def _centroid(points: Sequence[GeoPoint]) -> GeoPoint:
    n = len(points)
    return GeoPoint(sum(pt.x for pt in points) / n, sum(pt.y for pt in points) / n)


def draft_trip(members: Iterable[Request], p: EconomicParams) -> TripPlan:
    """Trip geometry and timing only; pricing left empty."""
    members = sorted(members, key=lambda r: r.id)
    if not 1 <= len(members) <= VEHICLE_CAPACITY:
        raise ValueError(f"trip must have 1..{VEHICLE_CAPACITY} members, got {len(members)}")
    ids = frozenset(r.id for r in members)
    if len(ids) != len(members):
        raise ValueError("duplicate request in trip")
    if len(members) == 1:
        meet, drop = members[0].origin, members[0].destination
    else:
        meet = _centroid([r.origin for r in members])
        drop = _centroid([r.destination for r in members])
    depart = max(r.depart_time for r in members)
    arrive = depart + manhattan_distance(meet, drop) / p.v_bar
    return TripPlan(members=ids, meet_point=meet, drop_point=drop, depart=depart, arrive=arrive)


def discount(n_members: int, p: EconomicParams) -> float:
    return min(p.discount_cap, p.discount_per_corider * (n_members - 1))


def price_trip(m: TripPlan, requests: Mapping[int, Request], p: EconomicParams) -> dict:
    """Per-member loss, discount, gain, pay and solo fare for a drafted trip."""
    dis = discount(len(m.members), p)
    pricing = {}
    for rid in sorted(m.members):
        if rid not in requests:
            raise KeyError(f"request {rid} not in request map")
        r = requests[rid]
        walk = manhattan_distance(r.origin, m.meet_point) + manhattan_distance(r.destination, m.drop_point)
        loss = p.walk_cost * walk + p.wait_cost * abs(r.depart_time - m.depart)
        f = fare(r, p)
        pricing[rid] = MemberPricing(loss=loss, discount=dis, gain=dis * f, pay=(1 - dis) * f, fare=f)
    return pricing


def trip_reserve(m: TripPlan, p: EconomicParams) -> float:
    """Solo-fare earnings for driving the pooled route."""
    return p.fare_base + p.fare_rate * manhattan_distance(m.meet_point, m.drop_point)


def synthesize_trip(members: Iterable[Request], p: EconomicParams) -> TripPlan:
    members = list(members)
    draft = draft_trip(members, p)
    pricing = price_trip(draft, {r.id: r for r in members}, p)
    return TripPlan(members=draft.members, meet_point=draft.meet_point, drop_point=draft.drop_point,
                    depart=draft.depart, arrive=draft.arrive, pricing=pricing,
                    reserve=trip_reserve(draft, p))


def driver_economics(b: Vehicle, m: TripPlan, p: EconomicParams) -> DriverEconomics:
    pickup = manhattan_distance(b.location, m.meet_point)
    reserve = trip_reserve(m, p)
    willing = pickup <= p.xi and reserve <= m.revenue
    return DriverEconomics(pickup_dist=pickup, reserve=reserve, willing=willing)


def passenger_feasible(m: TripPlan, p: EconomicParams) -> bool:
    """Gain covers loss and loss stays within zeta for every member."""
    return all(pr.gain >= pr.loss and pr.loss <= p.zeta for pr in m.pricing.values())


def match_weight(b: Vehicle, m: TripPlan, p: EconomicParams) -> float:
    """Net surplus of a match: member payments minus deadheading cost."""
    return m.revenue - p.fare_rate * manhattan_distance(b.location, m.meet_point)


def trip_admissible(member_ids: Iterable[int], requests: Mapping[int, Request],
                    vehicles: Sequence[Vehicle], p: EconomicParams, _cache=None) -> bool:
    """Whether a member set can appear in the vehicle-trip graph.

    Every pair must be close, and every nonempty subset (the set itself
    included) must give a passenger-feasible trip that some vehicle is
    willing to drive.
    """
    ids = tuple(sorted(member_ids))
    if not 1 <= len(ids) <= VEHICLE_CAPACITY:
        return False
    for a, b in combinations(ids, 2):
        if not is_close(requests[a], requests[b], p):
            return False
    for k in range(1, len(ids) + 1):
        for sub in combinations(ids, k):
            if _cache is not None and sub in _cache:
                ok = _cache[sub]
            else:
                trip = synthesize_trip([requests[r] for r in sub], p)
                ok = passenger_feasible(trip, p) and any(
                    driver_economics(v, trip, p).willing for v in vehicles)
                if _cache is not None:
                    _cache[sub] = ok
            if not ok:
                return False
    return True


def validate_assignment(a: Assignment, requests: Mapping[int, Request],
                        vehicles: Mapping[int, Vehicle], p: EconomicParams,
                        strict_arrival: bool = False) -> list:
    """Check an assignment against the pooling constraints.

    Trips are re-synthesized from the request map so that stale or forged
    pricing on a TripPlan cannot hide a violation. Returns a list of
    :class:`Violation`; empty means feasible.
    """
    report = []
    seen_vehicle = {}
    seen_trip = {}
    served_by = {}
    served = 0
    for idx, m in enumerate(a.matches):
        key = m.trip.key
        served += len(key)
        if m.vehicle_id in seen_vehicle:
            report.append(Violation("C4", f"vehicle {m.vehicle_id} matched to trips "
                                          f"{seen_vehicle[m.vehicle_id]} and {key}"))
        else:
            seen_vehicle[m.vehicle_id] = key
        if key in seen_trip:
            report.append(Violation("C3", f"trip {key} matched to vehicles "
                                          f"{seen_trip[key]} and {m.vehicle_id}"))
        else:
            seen_trip[key] = m.vehicle_id
        for rid in key:
            if rid in served_by:
                report.append(Violation("C1", f"request {rid} rides in {served_by[rid]} and {key}"))
            else:
                served_by[rid] = key
            if a.rider_of.get(rid) != m.vehicle_id:
                report.append(Violation("C2", f"member {rid} of trip {key} not marked as riding "
                                              f"vehicle {m.vehicle_id}"))
        missing = [rid for rid in key if rid not in requests]
        if missing:
            report.append(Violation("C2", f"trip {key} has unknown requests {missing}"))
            continue
        if not 1 <= len(key) <= VEHICLE_CAPACITY:
            report.append(Violation("C2", f"trip {key} exceeds capacity {VEHICLE_CAPACITY}"))
            continue
        trip = synthesize_trip([requests[rid] for rid in key], p)
        vehicle = vehicles.get(m.vehicle_id)
        if vehicle is None:
            report.append(Violation("C4", f"unknown vehicle {m.vehicle_id}"))
        else:
            econ = driver_economics(vehicle, trip, p)
            if econ.pickup_dist > p.xi:
                report.append(Violation("C5", f"vehicle {m.vehicle_id} pickup {econ.pickup_dist:.1f} m "
                                              f"exceeds xi for trip {key}"))
            if econ.reserve > trip.revenue:
                report.append(Violation("C7", f"trip {key} revenue {trip.revenue:.4f} below "
                                              f"reserve {econ.reserve:.4f}"))
        for rid, pr in trip.pricing.items():
            if pr.gain < pr.loss:
                report.append(Violation("C6", f"request {rid} in {key}: gain {pr.gain:.4f} "
                                              f"< loss {pr.loss:.4f}"))
            if pr.loss > p.zeta:
                report.append(Violation("C8", f"request {rid} in {key}: loss {pr.loss:.4f} exceeds zeta"))
            if strict_arrival and trip.arrive > requests[rid].latest_arrival:
                report.append(Violation("AT", f"request {rid} arrives {trip.arrive:.1f} "
                                              f"after {requests[rid].latest_arrival:.1f}"))
    for rid, vid in a.rider_of.items():
        if served_by.get(rid) is None:
            report.append(Violation("C2", f"request {rid} marked on vehicle {vid} but in no matched trip"))
    if served != a.served:
        report.append(Violation("C9", f"served count {a.served} disagrees with matched trips ({served})"))
    return report
