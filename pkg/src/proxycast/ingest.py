"""Load daily candidate series and the annual target; fetch and cache remote OHLCV.

CSV conventions: ISO-8601 dates, header row, empty cell = missing. The remote
client targets a single configurable JSON endpoint returning
{"records": [{"date": ..., "open": ..., "high": ..., "low": ..., "close": ...,
"adj_close": ..., "volume": ...}, ...]} and persists responses to a
content-addressed cache (write-then-rename, TTL-guarded).
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
import warnings
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
import requests

from .errors import DataError, OfflineError
from .series import AnnualSeries, TimeSeries

logger = logging.getLogger(__name__)

OHLCV_FIELDS = ("Open", "High", "Low", "Close", "Adj_Close", "Volume")
_OHLCV_KEYS = {
    "Open": "open",
    "High": "high",
    "Low": "low",
    "Close": "close",
    "Adj_Close": "adj_close",
    "Volume": "volume",
}

# Instruments visible in the proxy-ranking table; the catalog is user-extensible.
DEFAULT_INSTRUMENTS = (
    "Brent",
    "WTI",
    "WTI_Oil_ETF",
    "RBOB_Gasoline",
    "Energy_Sector_ETF",
    "Heating_Oil",
    "Oil_Services_ETF",
)


@dataclass(frozen=True)
class OhlcvRecord:
    date: date
    open: float | None = None
    high: float | None = None
    low: float | None = None
    close: float | None = None
    adj_close: float | None = None
    volume: float | None = None

    def __post_init__(self):
        if self.low is not None and self.high is not None and self.low > self.high:
            raise DataError(f"{self.date}: low {self.low} exceeds high {self.high}")
        if self.volume is not None and self.volume < 0:
            raise DataError(f"{self.date}: negative volume {self.volume}")


@dataclass(frozen=True)
class CandidateCatalog:
    """(instrument, field) pairs expanded into candidate series ids."""

    instruments: tuple[str, ...] = DEFAULT_INSTRUMENTS
    fields: tuple[str, ...] = OHLCV_FIELDS

    def series_ids(self) -> list[str]:
        ids = [f"{f}_{inst}" for inst in self.instruments for f in self.fields]
        if len(set(ids)) != len(ids):
            raise DataError("candidate catalog produces duplicate series ids")
        return ids


def _parse_date(text: str):
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        return None


def _parse_cell(text: str, where: str) -> float:
    text = text.strip()
    if not text:
        return math.nan  # blank cell = missing, never zero
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse value {text!r}") from None


def read_csv_series(path, schema: str = "wide", instrument: str | None = None) -> list[TimeSeries]:
    """Read daily series from CSV.

    schema "wide": first column is the ISO date, each remaining column one
    series. schema "ohlcv": columns date,open,high,low,close,adj_close,volume
    for a single instrument (default: the file stem), expanded into
    `<Field>_<Instrument>` series. Rows with unparseable dates are rejected
    and reported with their line numbers.
    """
    path = Path(path)
    if schema not in ("wide", "ohlcv"):
        raise DataError(f"unknown CSV schema {schema!r}")
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")

    if schema == "ohlcv":
        expected = ["date"] + [_OHLCV_KEYS[f] for f in OHLCV_FIELDS]
        got = [c.strip().lower() for c in header]
        if got != expected:
            raise DataError(f"{path}: ohlcv header must be {','.join(expected)}")
        names = list(OHLCV_FIELDS)
        instrument = instrument or path.stem
    else:
        if len(header) < 2:
            raise DataError(f"{path}: wide CSV needs a date column plus series columns")
        names = [c.strip() for c in header[1:]]

    dates: list[date] = []
    values: list[list[float]] = []
    rejected: list[int] = []
    seen: set[date] = set()
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        d = _parse_date(row[0])
        if d is None:
            rejected.append(lineno)
            continue
        if d in seen:
            raise DataError(f"{path}: duplicate date {d} at line {lineno}")
        seen.add(d)
        if len(row) != len(header):
            raise DataError(f"{path}: line {lineno} has {len(row)} cells, expected {len(header)}")
        dates.append(d)
        values.append([_parse_cell(c, f"{path}:{lineno}") for c in row[1:]])
    if rejected:
        warnings.warn(
            f"{path}: rejected {len(rejected)} rows with unparseable dates "
            f"(lines {', '.join(map(str, rejected))})",
            stacklevel=2,
        )
    if not dates:
        raise DataError(f"{path}: no parseable data rows")

    order = np.argsort(np.array([d.toordinal() for d in dates]), kind="stable")
    dates = [dates[i] for i in order]
    matrix = np.asarray(values, dtype=float)[order]

    out = []
    for j, name in enumerate(names):
        sid = f"{name}_{instrument}" if schema == "ohlcv" else name
        out.append(TimeSeries(sid, tuple(dates), matrix[:, j]))
    return out


def write_csv_series(path, series_list: list[TimeSeries]) -> None:
    """Write series as a wide CSV (union of dates; missing cells left empty)."""
    if not series_list:
        raise DataError("nothing to write")
    all_dates = sorted({d for s in series_list for d in s.dates})
    index = {d: i for i, d in enumerate(all_dates)}
    grid = np.full((len(all_dates), len(series_list)), np.nan)
    for j, s in enumerate(series_list):
        for d, v in zip(s.dates, s.values):
            grid[index[d], j] = v
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + [s.id for s in series_list])
        for i, d in enumerate(all_dates):
            writer.writerow(
                [d.isoformat()]
                + ["" if math.isnan(v) else repr(float(v)) for v in grid[i]]
            )


def read_target_index(path) -> AnnualSeries:
    """Read the annual target from a `year,value` CSV, sorted by year.

    Duplicate years are an error; a gap between years raises a warning
    (suppressed for single-row files).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header[:2]] != ["year", "value"]:
            raise DataError(f"{path}: expected header 'year,value'")
        pairs = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                year = int(row[0])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad year {row[0]!r}") from None
            value = _parse_cell(row[1] if len(row) > 1 else "", f"{path}:{lineno}")
            if math.isnan(value):
                raise DataError(f"{path}: line {lineno}: target value missing")
            pairs.append((year, value))
    if not pairs:
        raise DataError(f"{path}: no data rows")
    pairs.sort()
    years = [y for y, _ in pairs]
    if len(set(years)) != len(years):
        dup = next(y for i, y in enumerate(years[1:]) if y == years[i])
        raise DataError(f"{path}: duplicate year {dup}")
    if len(years) > 1 and years[-1] - years[0] != len(years) - 1:
        warnings.warn(f"{path}: target years are not consecutive", stacklevel=2)
    return AnnualSeries(path.stem, tuple(years), np.array([v for _, v in pairs]))


@dataclass(frozen=True)
class EndpointConfig:
    """Remote chart-endpoint settings; the URL template receives
    {instrument}, {start}, {end}."""

    url_template: str = ""
    cache_dir: Path = field(default_factory=lambda: Path(".proxycast_cache"))
    ttl_seconds: float = 86400.0
    offline: bool = False
    timeout: float = 30.0


def _cache_key(cfg: EndpointConfig, instrument: str, start: date, end: date) -> str:
    raw = f"{cfg.url_template}|{instrument}|{start.isoformat()}|{end.isoformat()}"
    return hashlib.sha256(raw.encode()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    # write-then-rename so a concurrent duplicate fetch cannot corrupt the key
    tmp = path.with_name(f"{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _record_from_payload(item: dict, idx: int) -> OhlcvRecord:
    if "date" not in item:
        raise DataError(f"payload record {idx}: missing field 'date'")
    d = _parse_date(str(item["date"]))
    if d is None:
        raise DataError(f"payload record {idx}: bad field 'date' ({item['date']!r})")
    kwargs = {}
    for name, key in _OHLCV_KEYS.items():
        v = item.get(key)
        if v is None:
            kwargs[key] = None
            continue
        try:
            kwargs[key] = float(v)
        except (TypeError, ValueError):
            raise DataError(f"payload record {idx}: bad field {key!r} ({v!r})") from None
    return OhlcvRecord(date=d, **kwargs)


def fetch_remote_ohlcv(
    instrument: str,
    start: date,
    end: date,
    cfg: EndpointConfig,
) -> list[OhlcvRecord]:
    """Fetch daily OHLCV records, served from cache when fresh.

    Records come back sorted ascending and de-duplicated by date (first
    occurrence wins). A cold cache with offline=True raises OfflineError;
    HTTP failures carry the status code.
    """
    if start > end:
        return []
    cache_dir = Path(cfg.cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = _cache_key(cfg, instrument, start, end)
    cache_file = cache_dir / f"{key}.json"
    index_file = cache_dir / "index.json"

    payload = None
    if cache_file.exists():
        age = time.time() - cache_file.stat().st_mtime
        if age <= cfg.ttl_seconds:
            logger.info("cache hit for %s [%s..%s]", instrument, start, end)
            payload = cache_file.read_text()
        elif cfg.offline:
            logger.warning("offline: serving stale cache for %s", instrument)
            payload = cache_file.read_text()

    if payload is None:
        if cfg.offline:
            raise OfflineError(
                f"offline mode forbids fetching {instrument} [{start}..{end}] (cold cache)"
            )
        if not cfg.url_template:
            raise DataError("no endpoint URL configured for remote fetch")
        url = cfg.url_template.format(
            instrument=instrument, start=start.isoformat(), end=end.isoformat()
        )
        logger.info("fetching %s", url)
        try:
            response = requests.get(url, timeout=cfg.timeout)
        except requests.RequestException as exc:
            raise DataError(f"fetch failed for {instrument}: {exc}") from exc
        if response.status_code != 200:
            raise DataError(
                f"fetch failed for {instrument}: HTTP {response.status_code}"
            )
        payload = response.text
        _atomic_write(cache_file, payload)
        _update_cache_index(index_file, key, instrument, start, end)

    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed payload for {instrument}: {exc}") from exc
    if not isinstance(doc, dict) or "records" not in doc:
        raise DataError(f"malformed payload for {instrument}: missing field 'records'")
    records = [_record_from_payload(item, i) for i, item in enumerate(doc["records"])]
    records.sort(key=lambda r: r.date)
    deduped: list[OhlcvRecord] = []
    for rec in records:
        if deduped and deduped[-1].date == rec.date:
            continue
        deduped.append(rec)
    return deduped


def _update_cache_index(index_file: Path, key: str, instrument: str,
                        start: date, end: date) -> None:
    index = {}
    if index_file.exists():
        try:
            index = json.loads(index_file.read_text())
        except json.JSONDecodeError:
            index = {}
    index[key] = {
        "instrument": instrument,
        "start": start.isoformat(),
        "end": end.isoformat(),
        "fetched_at": time.time(),
    }
    _atomic_write(index_file, json.dumps(index, indent=2, sort_keys=True))


def records_to_series(instrument: str, records: list[OhlcvRecord]) -> list[TimeSeries]:
    """Expand OHLCV records into one `<Field>_<Instrument>` series per field.

    Fields with fewer than 2 observations are dropped (a valid series needs
    at least 2 observed values).
    """
    if not records:
        raise DataError(f"no records for instrument {instrument!r}")
    dates = tuple(r.date for r in records)
    out = []
    for name, key in _OHLCV_KEYS.items():
        vals = [getattr(r, key) for r in records]
        vals = [math.nan if v is None else v for v in vals]
        if sum(not math.isnan(v) for v in vals) < 2:
            logger.warning("dropping %s_%s: fewer than 2 observations", name, instrument)
            continue
        out.append(TimeSeries(f"{name}_{instrument}", dates, vals))
    return out
