"""Loading of the bundled historical CSV snapshot and derived annual series.

All series are annual and gap-free once loaded; the only raw input with
daily resolution is the stock index close, which is reduced to an annual
realized-volatility series here.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

VALID_UNITS = ("log-return", "percent", "index-level", "dimensionless")

#: CSV files a data manifest must point at.
MANIFEST_KEYS = (
    "daily_sp_close",
    "sp_close_eoy",
    "earnings",
    "dividends",
    "baa_rate",
    "treasury_long",
    "treasury_short",
    "bond_index",
    "eafe_return",
    "em_return",
)


class DataError(ValueError):
    """An input file or derived series violates its contract."""


@dataclass(frozen=True)
class AnnualSeries:
    """A year-indexed vector of annual observations with no gaps.

    ``values[i]`` belongs to calendar year ``start_year + i``.
    """

    name: str
    start_year: int
    values: np.ndarray
    units: str = "dimensionless"

    def __post_init__(self) -> None:
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise DataError(f"{self.name}: values must be a non-empty vector")
        if not np.all(np.isfinite(values)):
            bad = self.start_year + int(np.flatnonzero(~np.isfinite(values))[0])
            raise DataError(f"{self.name}: non-finite value at year {bad}")
        if self.units not in VALID_UNITS:
            raise DataError(f"{self.name}: unknown units {self.units!r}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.end_year + 1)

    def value(self, year: int) -> float:
        if not self.start_year <= year <= self.end_year:
            raise KeyError(f"{self.name}: year {year} outside {self.start_year}..{self.end_year}")
        return float(self.values[year - self.start_year])

    def window(self, start_year: int, end_year: int) -> "AnnualSeries":
        """Restrict the series to ``start_year..end_year`` (inclusive)."""
        if start_year < self.start_year or end_year > self.end_year or start_year > end_year:
            raise DataError(
                f"{self.name}: window {start_year}..{end_year} outside {self.start_year}..{self.end_year}"
            )
        lo = start_year - self.start_year
        hi = end_year - self.start_year + 1
        return AnnualSeries(self.name, start_year, self.values[lo:hi], self.units)

    def values_over(self, start_year: int, end_year: int) -> np.ndarray:
        return self.window(start_year, end_year).values


def align(*series: AnnualSeries) -> tuple[int, int]:
    """Largest common year range of the given series."""
    start = max(s.start_year for s in series)
    end = min(s.end_year for s in series)
    if start > end:
        names = ", ".join(s.name for s in series)
        raise DataError(f"series do not overlap: {names}")
    return start, end


def lagged(series: AnnualSeries) -> AnnualSeries:
    """Previous year's value re-indexed to the current year."""
    return AnnualSeries(series.name, series.start_year + 1, series.values[:-1], series.units)


def difference(series: AnnualSeries) -> AnnualSeries:
    """Year-over-year change, indexed to the later year."""
    return AnnualSeries(series.name, series.start_year + 1, np.diff(series.values), series.units)


@dataclass(frozen=True)
class RawBundle:
    """The raw input snapshot before any derivation."""

    daily_dates: np.ndarray  # datetime64[D], ascending
    daily_close: np.ndarray
    sp_close_eoy: AnnualSeries
    earnings: AnnualSeries
    dividends: AnnualSeries
    baa_rate: AnnualSeries
    treasury_long: AnnualSeries
    treasury_short: AnnualSeries
    bond_index: AnnualSeries
    eafe_return: AnnualSeries  # arithmetic percent
    em_return: AnnualSeries  # arithmetic percent

    def validate(self) -> None:
        for s in (self.sp_close_eoy, self.earnings, self.bond_index):
            if np.any(s.values <= 0):
                bad = s.start_year + int(np.flatnonzero(s.values <= 0)[0])
                raise DataError(f"{s.name}: non-positive level at year {bad}")
        if np.any(self.baa_rate.values <= 0):
            bad = self.baa_rate.start_year + int(np.flatnonzero(self.baa_rate.values <= 0)[0])
            raise DataError(f"{self.baa_rate.name}: non-positive rate at year {bad}")
        if np.any(self.dividends.values < 0):
            raise DataError("dividends: negative value")
        # Year coverage has to be mutually consistent, not assumed.
        if self.dividends.start_year != self.sp_close_eoy.start_year + 1:
            raise DataError("dividends must start one year after the first end-of-year close")
        if self.earnings.end_year < self.sp_close_eoy.end_year:
            raise DataError("earnings end before the last end-of-year close")
        align(self.treasury_long, self.treasury_short)
        if self.em_return.start_year < self.eafe_return.start_year:
            raise DataError("emerging-market returns start before developed-market returns")


def read_annual_csv(path: Path, name: str, units: str = "dimensionless") -> AnnualSeries:
    """Read a ``year,value`` CSV with a header row into an AnnualSeries."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["year", "value"]:
            raise DataError(f"{path}: expected 'year,value' header")
        years, values = [], []
        for row in reader:
            if not row:
                continue
            years.append(int(row[0]))
            values.append(float(row[1]))
    if not years:
        raise DataError(f"{path}: no rows")
    years_arr = np.asarray(years)
    if np.any(np.diff(years_arr) != 1):
        gap = years_arr[np.flatnonzero(np.diff(years_arr) != 1)[0]]
        raise DataError(f"{path}: year gap after {gap}")
    return AnnualSeries(name, years[0], np.asarray(values, dtype=float), units)


def write_annual_csv(series: AnnualSeries, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "value"])
        for year, value in zip(series.years, series.values):
            writer.writerow([int(year), repr(float(value))])


def read_daily_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``date,close`` CSV (ISO dates) and validate it."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["date", "close"]:
            raise DataError(f"{path}: expected 'date,close' header")
        dates, closes = [], []
        for row in reader:
            if not row:
                continue
            dates.append(row[0])
            closes.append(float(row[1]))
    if not dates:
        raise DataError(f"{path}: no rows")
    dates_arr = np.asarray(dates, dtype="datetime64[D]")
    closes_arr = np.asarray(closes, dtype=float)
    if np.any(np.diff(dates_arr) <= np.timedelta64(0, "D")):
        i = int(np.flatnonzero(np.diff(dates_arr) <= np.timedelta64(0, "D"))[0])
        raise DataError(f"{path}: dates not strictly ascending at {dates_arr[i + 1]}")
    if np.any(closes_arr <= 0):
        bad = dates_arr[int(np.flatnonzero(closes_arr <= 0)[0])]
        raise DataError(f"{path}: non-positive close on {bad}")
    return dates_arr, closes_arr


def load_bundle(manifest_path: Path) -> RawBundle:
    """Load every raw series referenced by a manifest JSON file.

    The manifest maps the keys in :data:`MANIFEST_KEYS` to CSV paths,
    resolved relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    missing = [k for k in MANIFEST_KEYS if k not in manifest]
    if missing:
        raise DataError(f"manifest missing entries: {', '.join(missing)}")
    base = manifest_path.parent

    def annual(key: str, units: str) -> AnnualSeries:
        return read_annual_csv(base / manifest[key], key, units)

    dates, closes = read_daily_csv(base / manifest["daily_sp_close"])
    bundle = RawBundle(
        daily_dates=dates,
        daily_close=closes,
        sp_close_eoy=annual("sp_close_eoy", "index-level"),
        earnings=annual("earnings", "index-level"),
        dividends=annual("dividends", "index-level"),
        baa_rate=annual("baa_rate", "percent"),
        treasury_long=annual("treasury_long", "percent"),
        treasury_short=annual("treasury_short", "percent"),
        bond_index=annual("bond_index", "index-level"),
        eafe_return=annual("eafe_return", "percent"),
        em_return=annual("em_return", "percent"),
    )
    bundle.validate()
    return bundle


def realized_volatility(dates: np.ndarray, closes: np.ndarray) -> AnnualSeries:
    """Annual realized volatility of daily index log changes, in percent.

    A log change belongs to the calendar year of its later date.  Within
    each year the sample standard deviation of the changes is computed
    and scaled by 100.  Years with fewer than two changes are dropped
    with a warning; they may only occur at the boundary of the sample.
    """
    closes = np.asarray(closes, dtype=float)
    if np.any(closes <= 0):
        bad = np.asarray(dates)[int(np.flatnonzero(closes <= 0)[0])]
        raise DataError(f"non-positive close on {bad}")
    if len(closes) < 2:
        raise DataError("need at least two daily closes")
    changes = np.diff(np.log(closes))
    change_years = np.asarray(dates, dtype="datetime64[Y]")[1:].astype(int) + 1970

    vols: dict[int, float] = {}
    for year in np.unique(change_years):
        group = changes[change_years == year]
        if len(group) < 2:
            warnings.warn(f"year {year}: fewer than 2 daily changes, volatility skipped")
            continue
        vols[int(year)] = float(np.std(group, ddof=1) * 100.0)

    if not vols:
        raise DataError("no year has enough daily observations")
    years = sorted(vols)
    if years[-1] - years[0] + 1 != len(years):
        raise DataError("volatility years have an interior gap")
    return AnnualSeries("volatility", years[0], np.array([vols[y] for y in years]), "percent")


def _safe_log(values: np.ndarray, name: str, start_year: int) -> np.ndarray:
    if np.any(values <= 0):
        bad = start_year + int(np.flatnonzero(values <= 0)[0])
        raise DataError(f"{name}: log of non-positive value at year {bad}")
    return np.log(values)


def trailing_average(series: AnnualSeries, window: int) -> AnnualSeries:
    """Trailing mean over the current and previous ``window - 1`` years."""
    if not 1 <= window <= 10:
        raise DataError(f"window must be in 1..10, got {window}")
    if len(series) < window:
        raise DataError(f"{series.name}: too short for a {window}-year trailing average")
    kernel = np.full(window, 1.0 / window)
    avg = np.convolve(series.values, kernel, mode="valid")
    return AnnualSeries(f"avg_{series.name}", series.start_year + window - 1, avg, series.units)


def log_growth(series: AnnualSeries, name: str) -> AnnualSeries:
    """Year-over-year log change of a positive series."""
    return AnnualSeries(
        name,
        series.start_year + 1,
        np.diff(_safe_log(series.values, series.name, series.start_year)),
        "log-return",
    )


def derive_series(bundle: RawBundle, window: int) -> dict[str, AnnualSeries]:
    """Compute every derived annual series from the raw bundle.

    ``window`` is the trailing-average span (in years) applied to
    earnings.  Returns total log returns for the three asset classes,
    the term spread, earnings growth, trailing-average earnings and
    their growth, plus the raw earnings and corporate rate for
    convenience.
    """
    if not 1 <= window <= 10:
        raise DataError(f"window must be in 1..10, got {window}")
    p = bundle.sp_close_eoy
    d = bundle.dividends

    # Total domestic return: dividends credited once at year end.
    start, end = align(lagged(p), d)
    p_now = p.values_over(start, end)
    p_prev = p.values_over(start - 1, end - 1)
    total = p_now + d.values_over(start, end)
    if np.any(total <= 0):
        bad = start + int(np.flatnonzero(total <= 0)[0])
        raise DataError(f"domestic: non-positive price-plus-dividend at year {bad}")
    q = AnnualSeries("domestic", start, np.log(total) - np.log(p_prev), "log-return")

    u = bundle.bond_index
    b = AnnualSeries("bond", u.start_year + 1, np.diff(_safe_log(u.values, "bond_index", u.start_year)), "log-return")

    s_start, s_end = align(bundle.treasury_long, bundle.treasury_short)
    spread = AnnualSeries(
        "spread",
        s_start,
        bundle.treasury_long.values_over(s_start, s_end) - bundle.treasury_short.values_over(s_start, s_end),
        "percent",
    )

    intl = _blend_international(bundle.eafe_return, bundle.em_return)

    e = bundle.earnings
    growth = log_growth(e, "growth")
    if len(e) < window + 1:
        raise DataError(f"earnings too short for a {window}-year trailing average")
    e_bar = trailing_average(e, window)
    g_bar = log_growth(e_bar, "avg_growth")

    return {
        "domestic": q,
        "bond": b,
        "spread": spread,
        "intl": intl,
        "growth": growth,
        "avg_earnings": e_bar,
        "avg_growth": g_bar,
        "earnings": e,
        "rate": bundle.baa_rate,
    }


#: First year in which international returns blend in emerging markets.
INTL_BLEND_START = 1988
#: Developed-market weight of the international sleeve.
INTL_DEVELOPED_WEIGHT = 0.6


def _blend_international(eafe: AnnualSeries, em: AnnualSeries) -> AnnualSeries:
    """Log returns of the international sleeve.

    Input series are arithmetic percent returns.  Before
    ``INTL_BLEND_START`` the sleeve is developed markets only; from then
    on it is a fixed-weight arithmetic blend, converted to log returns.
    """
    blend_start = max(INTL_BLEND_START, em.start_year)
    out = []
    for year in eafe.years:
        r = eafe.value(year) / 100.0
        if year >= blend_start:
            if year > em.end_year:
                break
            r = INTL_DEVELOPED_WEIGHT * r + (1 - INTL_DEVELOPED_WEIGHT) * em.value(year) / 100.0
        if r <= -1:
            raise DataError(f"intl: arithmetic return at year {year} is -100% or worse")
        out.append(np.log1p(r))
    return AnnualSeries("intl", eafe.start_year, np.array(out), "log-return")


def build_dataset(bundle: RawBundle, window: int = 10) -> dict[str, AnnualSeries]:
    """Derived series plus realized volatility, keyed by series name."""
    series = derive_series(bundle, window)
    series["volatility"] = realized_volatility(bundle.daily_dates, bundle.daily_close)
    return series
