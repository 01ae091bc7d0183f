"""Bilateral asset and GDP panel ingestion.

Input files are CSV with headers ``year,holder,issuer,value_musd`` and
``year,country,gdp_musd``. All monetary values are millions of current USD;
GDP given in raw USD must be pre-converted by the caller. Missing
(holder, issuer) pairs are treated as zero holdings (the reporting floor
left-censors small positions to zero).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

ASSET_HEADER = ("year", "holder", "issuer", "value_musd")
GDP_HEADER = ("year", "country", "gdp_musd")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class AssetPanel:
    """Bilateral asset holdings keyed by (year, holder, issuer), in millions of USD."""

    records: dict[tuple[int, str, str], float]

    def __post_init__(self) -> None:
        for (year, holder, issuer), value in self.records.items():
            if holder == issuer:
                raise DataError(f"self-holding record ({year},{holder},{issuer})")
            if value < 0 or not math.isfinite(value):
                raise DataError(f"bad value {value!r} for ({year},{holder},{issuer})")

    def years(self) -> list[int]:
        return sorted({year for (year, _, _) in self.records})

    def holders(self, year: int) -> set[str]:
        return {holder for (y, holder, _) in self.records if y == year}

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class GdpPanel:
    """GDP by (year, country), in millions of USD."""

    records: dict[tuple[int, str], float]

    def __post_init__(self) -> None:
        for (year, country), gdp in self.records.items():
            if gdp <= 0 or not math.isfinite(gdp):
                raise DataError(f"nonpositive gdp {gdp!r} for ({year},{country})")

    def years(self) -> list[int]:
        return sorted({year for (year, _) in self.records})

    def countries(self, year: int) -> set[str]:
        return {country for (y, country) in self.records if y == year}

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class AssetSlice:
    """One year's self-contained core network.

    ``assets[i, j]`` is holder ``countries[i]``'s position issued by
    ``countries[j]``. ``coverage`` is the share of the holders' total
    reported external assets captured inside the core subset; it is
    reported, never enforced.
    """

    year: int
    countries: tuple[str, ...]
    assets: np.ndarray
    gdp: np.ndarray
    coverage: float

    def __post_init__(self) -> None:
        assets = np.array(self.assets, dtype=float)
        gdp = np.array(self.gdp, dtype=float)
        n = len(self.countries)
        if n < 2:
            raise DataError("a slice needs at least 2 countries")
        if assets.shape != (n, n):
            raise DataError(f"asset matrix shape {assets.shape} does not match {n} countries")
        if gdp.shape != (n,):
            raise DataError(f"gdp vector shape {gdp.shape} does not match {n} countries")
        if np.any(np.diagonal(assets) != 0.0):
            raise DataError("asset matrix has nonzero diagonal")
        if np.any(assets < 0) or not np.all(np.isfinite(assets)):
            raise DataError("asset values must be finite and nonnegative")
        if np.any(gdp <= 0) or not np.all(np.isfinite(gdp)):
            raise DataError("gdp values must be finite and positive")
        if not 0.0 <= self.coverage <= 1.0:
            raise DataError(f"coverage {self.coverage} outside [0, 1]")
        assets.flags.writeable = False
        gdp.flags.writeable = False
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "gdp", gdp)

    @property
    def n(self) -> int:
        return len(self.countries)

    def index(self, code: str) -> int:
        try:
            return self.countries.index(code)
        except ValueError:
            raise KeyError(f"unknown country code {code!r}") from None


def _read_text(stream: IO[bytes] | IO[str] | bytes | str) -> str:
    if isinstance(stream, bytes):
        return stream.decode("utf-8")
    if isinstance(stream, str):
        return stream
    data = stream.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _parse_float(text: str, lineno: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {lineno}: malformed {what} {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {lineno}: non-finite {what} {text!r}")
    return value


def _parse_year(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"line {lineno}: malformed year {text!r}") from None


def _iter_rows(text: str, header: tuple[str, ...]) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise DataError(f"missing header; expected {','.join(header)}") from None
    if tuple(field.strip() for field in first) != header:
        raise DataError(f"unknown column header {','.join(first)!r}; expected {','.join(header)}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        yield lineno, [field.strip() for field in row]


def parse_asset_table(stream: IO[bytes] | IO[str] | bytes | str) -> AssetPanel:
    """Parse a bilateral asset CSV (``year,holder,issuer,value_musd``)."""
    records: dict[tuple[int, str, str], float] = {}
    for lineno, (year_s, holder, issuer, value_s) in _iter_rows(_read_text(stream), ASSET_HEADER):
        year = _parse_year(year_s, lineno)
        if not holder or not issuer:
            raise DataError(f"line {lineno}: empty country code")
        if holder == issuer:
            raise DataError(f"line {lineno}: self-holding {holder}->{issuer} not allowed")
        value = _parse_float(value_s, lineno, "value")
        if value < 0:
            raise DataError(f"line {lineno}: negative value {value_s!r}")
        key = (year, holder, issuer)
        if key in records:
            raise DataError(f"line {lineno}: duplicate record for ({year},{holder},{issuer})")
        records[key] = value
    return AssetPanel(records)


def parse_gdp_table(stream: IO[bytes] | IO[str] | bytes | str) -> GdpPanel:
    """Parse a GDP CSV (``year,country,gdp_musd``); GDP must be positive."""
    records: dict[tuple[int, str], float] = {}
    for lineno, (year_s, country, gdp_s) in _iter_rows(_read_text(stream), GDP_HEADER):
        year = _parse_year(year_s, lineno)
        if not country:
            raise DataError(f"line {lineno}: empty country code")
        gdp = _parse_float(gdp_s, lineno, "gdp")
        if gdp <= 0:
            raise DataError(f"line {lineno}: nonpositive gdp {gdp_s!r}")
        key = (year, country)
        if key in records:
            raise DataError(f"line {lineno}: duplicate record for ({year},{country})")
        records[key] = gdp
    return GdpPanel(records)


def write_asset_table(panel: AssetPanel, stream: IO[str]) -> None:
    """Serialize a panel back to CSV; round-trips exactly through the parser."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ASSET_HEADER)
    for (year, holder, issuer) in sorted(panel.records):
        writer.writerow([year, holder, issuer, repr(panel.records[(year, holder, issuer)])])


def write_gdp_table(panel: GdpPanel, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(GDP_HEADER)
    for (year, country) in sorted(panel.records):
        writer.writerow([year, country, repr(panel.records[(year, country)])])


def read_asset_file(path: str) -> AssetPanel:
    """Read an asset CSV from a path, or standard input when path is ``-``."""
    if path == "-":
        import sys

        return parse_asset_table(sys.stdin.buffer)
    with open(path, "rb") as fh:
        return parse_asset_table(fh)


def read_gdp_file(path: str) -> GdpPanel:
    if path == "-":
        import sys

        return parse_gdp_table(sys.stdin.buffer)
    with open(path, "rb") as fh:
        return parse_gdp_table(fh)


def core_slice(assets: AssetPanel, gdp: GdpPanel, year: int) -> AssetSlice:
    """Restrict one year to reporting holders with GDP data.

    Countries are the year's asset holders that also have a GDP entry,
    sorted lexicographically. Coverage is the in-subset asset total divided
    by those holders' full reported assets for the year (1.0 when the
    holders report nothing at all).
    """
    if year not in assets.years():
        raise DataError(f"year {year} absent from asset panel")
    if year not in gdp.years():
        raise DataError(f"year {year} absent from gdp panel")
    holders = assets.holders(year)
    countries = sorted(h for h in holders if (year, h) in gdp.records)
    if len(countries) < 2:
        raise DataError(f"year {year}: fewer than 2 countries with both assets and gdp")
    index = {code: i for i, code in enumerate(countries)}
    n = len(countries)
    matrix = np.zeros((n, n))
    holders_total = 0.0
    for (y, holder, issuer), value in assets.records.items():
        if y != year or holder not in index:
            continue
        holders_total += value
        j = index.get(issuer)
        if j is not None:
            matrix[index[holder], j] = value
    internal_total = float(matrix.sum())
    coverage = internal_total / holders_total if holders_total > 0 else 1.0
    gdp_vec = np.array([gdp.records[(year, c)] for c in countries])
    return AssetSlice(year, tuple(countries), matrix, gdp_vec, coverage)
