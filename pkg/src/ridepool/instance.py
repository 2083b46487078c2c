"""Run configuration, planar projection, random instances and JSON round-trips."""
from __future__ import annotations

import configparser
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from datetime import time as dtime
from typing import Mapping

import numpy as np

from .model import EconomicParams, GeoPoint, Request, Vehicle, manhattan_distance

EARTH_RADIUS_M = 6_371_008.8
ENV_PREFIX = "RIDEPOOL_"

# Lower and midtown Manhattan, about 7.6 km x 11 km; our choice, not from any dataset spec.
DEFAULT_BBOX = (-74.02, 40.70, -73.93, 40.80)


@dataclass(frozen=True)
class InstanceConfig:
    params: EconomicParams = field(default_factory=EconomicParams)
    bbox: tuple = DEFAULT_BBOX
    window_start: str = "08:15"
    window_end: str = "08:30"
    seed: int = 0
    solver: str = "both"
    mode: str = "greedy"
    slack: float = 1.5
    delimiter: str = ","
    pickup_time_col: str = "tpep_pickup_datetime"
    pickup_lon_col: str = "pickup_longitude"
    pickup_lat_col: str = "pickup_latitude"
    dropoff_lon_col: str = "dropoff_longitude"
    dropoff_lat_col: str = "dropoff_latitude"
    dropoff_time_col: str = "tpep_dropoff_datetime"
    prune: bool = False
    strict_arrival: bool = False

    def __post_init__(self):
        lon0, lat0, lon1, lat1 = self.bbox
        if not (lon0 < lon1 and lat0 < lat1):
            raise ValueError(f"degenerate bbox {self.bbox}")
        if self.window_seconds <= 0:
            raise ValueError("window start must precede window end")
        if self.solver not in ("flow", "bnb", "both"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.mode not in ("strict", "greedy"):
            raise ValueError(f"unknown grouping mode {self.mode!r}")
        if self.slack < 1:
            raise ValueError("slack must be at least 1")

    @property
    def window(self) -> tuple:
        return dtime.fromisoformat(self.window_start), dtime.fromisoformat(self.window_end)

    @property
    def window_seconds(self) -> float:
        a, b = self.window
        return (b.hour * 3600 + b.minute * 60 + b.second) - (a.hour * 3600 + a.minute * 60 + a.second)

    @property
    def center(self) -> tuple:
        lon0, lat0, lon1, lat1 = self.bbox
        return (lon0 + lon1) / 2, (lat0 + lat1) / 2

    def extent(self) -> tuple:
        """Planar half-width and half-height of the bbox in meters."""
        lon0, lat0, lon1, lat1 = self.bbox
        x0, y0 = project(lon0, lat0, self.center)
        x1, y1 = project(lon1, lat1, self.center)
        return (x1 - x0) / 2, (y1 - y0) / 2

    def replace(self, **changes) -> "InstanceConfig":
        params = {k: changes.pop(k) for k in list(changes) if k in _PARAM_FIELDS}
        if params:
            changes["params"] = dataclasses.replace(self.params, **params)
        return dataclasses.replace(self, **changes)


_PARAM_FIELDS = {f.name: f.type for f in dataclasses.fields(EconomicParams)}
_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(InstanceConfig) if f.name != "params"}


def _coerce(name: str, raw):
    if name in _PARAM_FIELDS:
        return float(raw)
    default = _CONFIG_FIELDS[name].default
    if name == "bbox":
        vals = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
        vals = tuple(float(v) for v in vals)
        if len(vals) != 4:
            raise ValueError("bbox needs lon_min,lat_min,lon_max,lat_max")
        return vals
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return str(raw)


def load_config(path: str | None = None, env: Mapping[str, str] | None = None,
                overrides: Mapping | None = None) -> InstanceConfig:
    """Defaults, then a key = value file, then RIDEPOOL_* variables, then overrides."""
    values = {}
    if path:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_string("[ridepool]\n" + fh.read())
        values.update(parser["ridepool"])
    env = os.environ if env is None else env
    for key, raw in env.items():
        if key.startswith(ENV_PREFIX):
            values[key[len(ENV_PREFIX):].lower()] = raw
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(values) - set(_PARAM_FIELDS) - set(_CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return InstanceConfig().replace(**{k: _coerce(k, v) for k, v in values.items()})


def project(lon: float, lat: float, center: tuple) -> tuple:
    """Equirectangular projection to meters about ``center`` (lon, lat)."""
    lon0, lat0 = center
    x = EARTH_RADIUS_M * math.radians(lon - lon0) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS_M * math.radians(lat - lat0)
    return x, y


@dataclass
class Instance:
    requests: list
    vehicles: list
    params: EconomicParams = field(default_factory=EconomicParams)

    @property
    def request_map(self) -> dict:
        return {r.id: r for r in self.requests}

    @property
    def vehicle_map(self) -> dict:
        return {b.id: b for b in self.vehicles}

    def to_dict(self) -> dict:
        return {
            "params": dataclasses.asdict(self.params),
            "requests": [
                {"id": r.id, "origin": [r.origin.x, r.origin.y],
                 "destination": [r.destination.x, r.destination.y],
                 "depart_time": r.depart_time, "latest_arrival": r.latest_arrival}
                for r in self.requests],
            "vehicles": [{"id": b.id, "location": [b.location.x, b.location.y]} for b in self.vehicles],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        requests = [Request(r["id"], GeoPoint(*r["origin"]), GeoPoint(*r["destination"]),
                            r["depart_time"], r["latest_arrival"]) for r in data.get("requests", [])]
        vehicles = [Vehicle(b["id"], GeoPoint(*b["location"])) for b in data.get("vehicles", [])]
        params = EconomicParams(**data["params"]) if "params" in data else EconomicParams()
        return cls(requests, vehicles, params)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def loads(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def latest_arrival(depart: float, origin: GeoPoint, destination: GeoPoint,
                   slack: float, p: EconomicParams) -> float:
    return depart + slack * manhattan_distance(origin, destination) / p.v_bar


def random_vehicles(rng: np.random.Generator, n: int, config: InstanceConfig, first_id: int = 0) -> list:
    hw, hh = config.extent()
    xy = np.round(rng.uniform((-hw, -hh), (hw, hh), size=(n, 2)), 2)
    return [Vehicle(first_id + i, GeoPoint(float(x), float(y))) for i, (x, y) in enumerate(xy)]


def generate_random_instance(seed: int, n_requests: int, n_vehicles: int,
                             config: InstanceConfig | None = None) -> Instance:
    """Uniform origins, destinations and vehicles in the bbox; departures in the window."""
    config = config or InstanceConfig()
    p = config.params
    rng = np.random.default_rng(seed)
    hw, hh = config.extent()
    requests = []
    while len(requests) < n_requests:
        o = np.round(rng.uniform((-hw, -hh), (hw, hh)), 2)
        d = np.round(rng.uniform((-hw, -hh), (hw, hh)), 2)
        t = round(float(rng.uniform(0.0, config.window_seconds)), 1)
        origin, dest = GeoPoint(float(o[0]), float(o[1])), GeoPoint(float(d[0]), float(d[1]))
        if origin == dest:
            continue
        at = round(latest_arrival(t, origin, dest, config.slack, p), 1)
        requests.append(Request(len(requests), origin, dest, t, at))
    vehicles = random_vehicles(rng, n_vehicles, config)
    return Instance(requests, vehicles, p)


def compact_config(**changes) -> InstanceConfig:
    """A 500 m square with generous closeness thresholds.

    Small random instances drawn here pool often enough to produce trips
    of three and four passengers.
    """
    span = 500.0
    lon0, lat0 = -73.98, 40.755
    dlon = math.degrees(span / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    dlat = math.degrees(span / EARTH_RADIUS_M)
    base = InstanceConfig(bbox=(lon0 - dlon / 2, lat0 - dlat / 2, lon0 + dlon / 2, lat0 + dlat / 2))
    return base.replace(**{"delta": 500.0, "t_window": 900.0, "xi": 800.0, **changes})
