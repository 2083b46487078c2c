"""TLC-style trip records to planar requests."""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .instance import InstanceConfig, latest_arrival, project
from .model import GeoPoint, Request

log = logging.getLogger(__name__)


class EmptyInstanceWarning(UserWarning):
    """No record survived filtering."""


@dataclass
class RawTripRecord:
    pickup_time: datetime
    pickup_lon: float
    pickup_lat: float
    dropoff_lon: float
    dropoff_lat: float
    dropoff_time: datetime | None = None


@dataclass
class IngestResult:
    requests: list = field(default_factory=list)
    rows: int = 0
    skipped: int = 0
    outside_bbox: int = 0
    outside_window: int = 0

    def __len__(self):
        return len(self.requests)

    def __iter__(self):
        return iter(self.requests)


def parse_timestamp(raw: str) -> datetime:
    return datetime.fromisoformat(raw.strip().replace("T", " "))


def _parse(row: dict, config: InstanceConfig) -> RawTripRecord:
    drop_raw = row.get(config.dropoff_time_col)
    return RawTripRecord(
        pickup_time=parse_timestamp(row[config.pickup_time_col]),
        pickup_lon=float(row[config.pickup_lon_col]),
        pickup_lat=float(row[config.pickup_lat_col]),
        dropoff_lon=float(row[config.dropoff_lon_col]),
        dropoff_lat=float(row[config.dropoff_lat_col]),
        dropoff_time=parse_timestamp(drop_raw) if drop_raw else None,
    )


def _in_bbox(lon: float, lat: float, bbox) -> bool:
    lon0, lat0, lon1, lat1 = bbox
    return lon0 <= lon <= lon1 and lat0 <= lat <= lat1


def _epoch(ts: datetime) -> float:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.timestamp()


def ingest_trip_records(path, config: InstanceConfig | None = None) -> IngestResult:
    """Requests for rows picked up inside the bbox and the time-of-day window.

    Both trip ends must lie in the bbox. Times without a zone are read as
    UTC. Unparsable rows, and rows whose projected origin equals the
    destination, are skipped and counted.
    """
    config = config or InstanceConfig()
    p = config.params
    start, end = config.window
    out = IngestResult()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh, delimiter=config.delimiter):
            out.rows += 1
            try:
                rec = _parse(row, config)
            except (KeyError, TypeError, ValueError):
                out.skipped += 1
                continue
            if not (_in_bbox(rec.pickup_lon, rec.pickup_lat, config.bbox)
                    and _in_bbox(rec.dropoff_lon, rec.dropoff_lat, config.bbox)):
                out.outside_bbox += 1
                continue
            if not start <= rec.pickup_time.time() <= end:
                out.outside_window += 1
                continue
            origin = GeoPoint(*project(rec.pickup_lon, rec.pickup_lat, config.center))
            dest = GeoPoint(*project(rec.dropoff_lon, rec.dropoff_lat, config.center))
            if origin == dest:
                out.skipped += 1
                continue
            dt = _epoch(rec.pickup_time)
            at = latest_arrival(dt, origin, dest, config.slack, p)
            out.requests.append(Request(len(out.requests), origin, dest, dt, at))
    if out.skipped:
        log.info("skipped %d unparsable or degenerate rows in %s", out.skipped, path)
    if not out.requests:
        warnings.warn(EmptyInstanceWarning(
            f"{path}: no trips left after filtering {out.rows} rows "
            f"({out.outside_bbox} outside bbox, {out.outside_window} outside window, "
            f"{out.skipped} skipped)"), stacklevel=2)
    return out


def write_synthetic_tlc(path, n_rows: int, n_keep: int, config: InstanceConfig | None = None,
                        seed: int = 0, n_bad: int = 0, pool_share: float = 0.0) -> int:
    """Write a TLC-format CSV in which exactly ``n_keep`` rows survive ingestion.

    The remaining rows are split among out-of-window, out-of-bbox and
    (``n_bad``) unparsable rows. A ``pool_share`` fraction of kept rows is
    placed within about 30 m and a minute of an earlier kept row, so that
    poolable requests appear. Returns ``n_keep``.
    """
    config = config or InstanceConfig()
    if n_keep + n_bad > n_rows:
        raise ValueError("more kept and bad rows than total rows")
    rng = np.random.default_rng(seed)
    lon0, lat0, lon1, lat1 = config.bbox
    if not 0.0 <= pool_share <= 1.0:
        raise ValueError("pool_share must lie in [0, 1]")
    start, end = config.window
    day = datetime(2016, 4, 12)
    w0 = start.hour * 3600 + start.minute * 60 + start.second
    n_rest = n_rows - n_keep - n_bad
    kinds = ["keep"] * n_keep + ["bad"] * n_bad + ["time"] * (n_rest // 2) + ["space"] * (n_rest - n_rest // 2)
    rng.shuffle(kinds)
    dlon, dlat = (lon1 - lon0) * 0.02, (lat1 - lat0) * 0.02

    def inside():
        return rng.uniform(lon0 + dlon, lon1 - dlon), rng.uniform(lat0 + dlat, lat1 - dlat)

    def near(lon, lat):
        return lon + rng.uniform(-2e-4, 2e-4), lat + rng.uniform(-1.5e-4, 1.5e-4)

    kept = []

    cols = [config.pickup_time_col, config.dropoff_time_col, config.pickup_lon_col,
            config.pickup_lat_col, config.dropoff_lon_col, config.dropoff_lat_col]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=config.delimiter)
        w.writerow(cols)
        for kind in kinds:
            secs = w0 + int(rng.integers(1, int(config.window_seconds)))
            (plon, plat), (dlon_, dlat_) = inside(), inside()
            if kind == "time":
                secs = w0 - int(rng.integers(60, 3 * 3600)) if rng.random() < 0.5 else \
                    w0 + int(config.window_seconds) + int(rng.integers(60, 3 * 3600))
            elif kind == "space":
                plon = lon1 + rng.uniform(0.001, 0.05)
            elif kind == "keep":
                if kept and rng.random() < pool_share:
                    s0, p0, d0 = kept[int(rng.integers(len(kept)))]
                    lo = max(w0 + 1, s0 - 60)
                    hi = min(w0 + int(config.window_seconds) - 1, s0 + 60)
                    secs = int(rng.integers(lo, hi + 1))
                    (plon, plat), (dlon_, dlat_) = near(*p0), near(*d0)
                kept.append((secs, (plon, plat), (dlon_, dlat_)))
            pick = day + timedelta(seconds=secs)
            drop = pick + timedelta(seconds=int(rng.integers(120, 1800)))
            row = [pick.strftime("%Y-%m-%d %H:%M:%S"), drop.strftime("%Y-%m-%d %H:%M:%S"),
                   f"{plon:.6f}", f"{plat:.6f}", f"{dlon_:.6f}", f"{dlat_:.6f}"]
            if kind == "bad":
                row[2] = "n/a"
            w.writerow(row)
    return n_keep
