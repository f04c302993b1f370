#!/usr/bin/env python3
"""Generate the bundled sample-data snapshot.

The repository ships synthetic CSVs rather than redistributing licensed
market data feeds.  This script simulates a century of annual factor
and return history from a fixed calibration of the model (long-run
levels and sensitivities chosen to look like nominal US market history),
then expands it into the raw file formats the loader expects: a daily
index close file, annual earnings/dividends/rates/index files, and
international return files in arithmetic percent.

Running it with the default seed reproduces the committed dataset
byte for byte:

    python scripts/generate_sample_data.py --outdir data
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

import numpy as np

DEFAULT_SEED = 246
GENERATOR_STREAM = 20250810

FIRST_DAILY = np.datetime64("1927-12-30")
FIRST_MODEL_YEAR = 1928
LAST_YEAR = 2024
FIRST_EARNINGS_YEAR = 1918
FIRST_INTL_YEAR = 1970
FIRST_EM_YEAR = 1988
FIRST_BOND_INDEX_YEAR = 1972
EARNINGS_WINDOW = 10

#: Long-run calibration of the generating process.
CALIBRATION = {
    "vol": {"intercept": 0.847850, "slope": 0.620146},
    "rate": {"intercept": 0.16, "slope": 0.92},
    "spread": {"intercept": 0.6437, "slope": 0.5395},
    "growth": {"intercept": 0.07756, "spread": 0.04786, "vol": -0.007841, "rate_change": 0.03721},
    "domestic": {
        "intercept": 0.26851,
        "spread": -0.03412,
        "vol": -0.013568,
        "rate_change": -0.078238,
        "valuation": -0.1644,
    },
    "intl": {"intercept": 0.2689, "vol": -0.0188, "rate_change": -0.0514, "valuation": -0.0941},
    "bond": {"default_cost": 0.016611, "duration": 0.055884},
    "trend": 0.04527,
}

#: Innovation standard deviations (vol, spread, rate, growth, domestic, intl, bond).
INNOVATION_STDEV = np.array([0.3644, 1.0537, 0.1357, 0.021, 0.0135, 0.0181, 0.0263])

#: Innovation cross-correlations, same ordering.
INNOVATION_CORRELATION = np.array(
    [
        [1.0000, 0.0538, 0.2978, -0.1800, -0.0516, -0.0753, 0.0725],
        [0.0538, 1.0000, -0.1817, -0.0661, -0.1581, -0.0397, -0.0951],
        [0.2978, -0.1817, 1.0000, -0.1628, -0.0979, -0.0265, -0.1470],
        [-0.1800, -0.0661, -0.1628, 1.0000, 0.1204, 0.0724, -0.1878],
        [-0.0516, -0.1581, -0.0979, 0.1204, 1.0000, 0.2768, 0.2817],
        [-0.0753, -0.0397, -0.0265, 0.0724, 0.2768, 1.0000, -0.0948],
        [0.0725, -0.0951, -0.1470, -0.1878, 0.2817, -0.0948, 1.0000],
    ]
)

INITIAL_SP_CLOSE = 17.66
INITIAL_EARNINGS = 0.95
INITIAL_BOND_INDEX = 100.0


def _log_mean(values: np.ndarray) -> float:
    peak = values.max()
    return float(peak + np.log(np.mean(np.exp(values - peak))))


def _balanced_order(increments: np.ndarray) -> np.ndarray:
    """Reorder zero-mean increments so partial sums stay near zero.

    The multiset is unchanged, so the sample stdev and the yearly
    endpoint are preserved; bounding the intra-year wander keeps the
    price level well above the CSV rounding resolution even in extreme
    volatility years.
    """
    order = np.argsort(increments)
    out = np.empty_like(increments)
    lo, hi = 0, len(order) - 1
    running = 0.0
    for k in range(len(order)):
        if running <= 0:
            idx = order[hi]
            hi -= 1
        else:
            idx = order[lo]
            lo += 1
        out[k] = increments[idx]
        running += increments[idx]
    return out


def simulate_history(seed: int) -> dict:
    """Simulate the full snapshot; every array is already rounded as written."""
    cal = CALIBRATION
    rng = np.random.default_rng(np.random.SeedSequence((GENERATOR_STREAM, seed)))
    years = np.arange(FIRST_MODEL_YEAR, LAST_YEAR + 1)
    n_years = len(years)

    chol = np.linalg.cholesky(INNOVATION_CORRELATION * np.outer(INNOVATION_STDEV, INNOVATION_STDEV))
    shocks = rng.standard_normal((n_years, 7)) @ chol.T

    def stationary(block: str, sd: float) -> tuple[float, float]:
        mean = cal[block]["intercept"] / (1.0 - cal[block]["slope"])
        spread = sd / np.sqrt(1.0 - cal[block]["slope"] ** 2)
        return mean, spread

    mu_v, sd_v = stationary("vol", INNOVATION_STDEV[0])
    mu_s, sd_s = stationary("spread", INNOVATION_STDEV[1])
    mu_r, sd_r = stationary("rate", INNOVATION_STDEV[2])

    log_vol = {FIRST_MODEL_YEAR: mu_v + sd_v * rng.standard_normal()}
    spread = {FIRST_MODEL_YEAR - 1: mu_s + sd_s * rng.standard_normal()}
    log_rate = {FIRST_MODEL_YEAR - 1: mu_r + sd_r * rng.standard_normal()}

    log_earnings = {FIRST_EARNINGS_YEAR: float(np.log(INITIAL_EARNINGS))}
    for year in range(FIRST_EARNINGS_YEAR + 1, FIRST_MODEL_YEAR):
        log_earnings[year] = log_earnings[year - 1] + 0.03 + 0.10 * rng.standard_normal()

    def log_avg_earnings(year: int) -> float:
        window = np.array([log_earnings[year - k] for k in range(EARNINGS_WINDOW)])
        return _log_mean(window)

    valuation = {FIRST_MODEL_YEAR - 1: -log_avg_earnings(FIRST_MODEL_YEAR - 1)}
    domestic, intl, bond, growth = {}, {}, {}, {}

    for t, year in enumerate(years):
        z = shocks[t]
        if year > FIRST_MODEL_YEAR:
            log_vol[year] = cal["vol"]["intercept"] + cal["vol"]["slope"] * log_vol[year - 1] + z[0]
        spread[year] = cal["spread"]["intercept"] + cal["spread"]["slope"] * spread[year - 1] + z[1]
        log_rate[year] = cal["rate"]["intercept"] + cal["rate"]["slope"] * log_rate[year - 1] + z[2]
        vol_t = float(np.exp(log_vol[year]))
        rate_change = float(np.exp(log_rate[year]) - np.exp(log_rate[year - 1]))

        g = cal["growth"]
        growth[year] = (
            g["intercept"]
            + g["spread"] * spread[year - 1]
            + g["vol"] * vol_t
            + g["rate_change"] * rate_change
            + vol_t * z[3]
        )
        log_earnings[year] = log_earnings[year - 1] + growth[year]
        avg_growth = log_avg_earnings(year) - log_avg_earnings(year - 1)

        d = cal["domestic"]
        domestic[year] = (
            d["intercept"]
            + d["spread"] * spread[year - 1]
            + d["vol"] * vol_t
            + d["rate_change"] * rate_change
            + d["valuation"] * valuation[year - 1]
            + vol_t * z[4]
        )
        i = cal["intl"]
        if year >= FIRST_INTL_YEAR:
            intl[year] = (
                i["intercept"]
                + i["vol"] * vol_t
                + i["rate_change"] * rate_change
                + i["valuation"] * valuation[year - 1]
                + vol_t * z[5]
            )
        if year > FIRST_BOND_INDEX_YEAR:
            b = cal["bond"]
            bond[year] = (
                0.01 * float(np.exp(log_rate[year - 1]))
                - b["default_cost"]
                - b["duration"] * rate_change
                + z[6]
            )
        valuation[year] = valuation[year - 1] + domestic[year] - avg_growth - cal["trend"]

    return _expand_raw_files(rng, years, log_vol, log_rate, spread, log_earnings, domestic, intl, bond)


def _expand_raw_files(rng, years, log_vol, log_rate, spread, log_earnings, domestic, intl, bond) -> dict:
    """Turn the simulated annual history into raw-file shaped arrays."""
    out: dict = {}

    # Daily index closes: per-year weekday paths whose within-year change
    # stdev matches the volatility series and whose endpoints telescope
    # through the annual total returns.
    all_days = np.arange(
        FIRST_DAILY + 1, np.datetime64(f"{LAST_YEAR + 1}-01-01"), dtype="datetime64[D]"
    )
    weekdays = all_days[np.is_busday(all_days)]
    day_years = weekdays.astype("datetime64[Y]").astype(int) + 1970

    div_yield = {
        int(y): 0.045 - 0.00028 * (y - FIRST_MODEL_YEAR) + 0.003 * np.sin((y - FIRST_MODEL_YEAR) / 6.0)
        for y in years
    }

    closes = [INITIAL_SP_CLOSE]
    dates = [FIRST_DAILY]
    eoy_close = {FIRST_MODEL_YEAR - 1: INITIAL_SP_CLOSE}
    dividends = {}
    prev_close = INITIAL_SP_CLOSE
    for year in years:
        days = weekdays[day_years == year]
        n = len(days)
        target = float(np.exp(domestic[year]) * prev_close / (1.0 + div_yield[year]))
        raw = rng.standard_normal(n)
        raw -= raw.mean()
        raw *= (np.exp(log_vol[year]) / 100.0) / np.std(raw, ddof=1)
        raw = _balanced_order(raw) + np.log(target / prev_close) / n
        path = np.round(prev_close * np.exp(np.cumsum(raw)), 4)
        closes.extend(path)
        dates.extend(days)
        prev_close = float(path[-1])
        eoy_close[year] = prev_close
        dividends[year] = round(div_yield[year] * prev_close, 4)

    out["daily_dates"] = np.array(dates, dtype="datetime64[D]")
    out["daily_close"] = np.array(closes)
    out["sp_close_eoy"] = eoy_close
    out["dividends"] = dividends
    out["earnings"] = {y: round(float(np.exp(v)), 4) for y, v in sorted(log_earnings.items())}

    rate = {y: round(float(np.exp(v)), 2) for y, v in sorted(log_rate.items())}
    out["baa_rate"] = rate

    # Treasury legs: a plausible short rate tied loosely to the corporate
    # rate, with the long leg pinned so the spread is preserved exactly.
    long_rate, short_rate = {}, {}
    for year in sorted(spread):
        s = spread[year]
        short = max(0.02, 0.55 * rate[year] - 0.8 + 0.3 * rng.standard_normal())
        long = short + s
        if long < 0.1:
            long = 0.1
        long_rate[year] = round(long, 2)
        short_rate[year] = round(long_rate[year] - s, 2)
    out["treasury_long"] = long_rate
    out["treasury_short"] = short_rate

    index = {FIRST_BOND_INDEX_YEAR: INITIAL_BOND_INDEX}
    level = INITIAL_BOND_INDEX
    for year in sorted(bond):
        level *= float(np.exp(bond[year]))
        index[year] = round(level, 4)
    out["bond_index"] = index

    # International legs: arithmetic percent returns; once the emerging
    # leg starts, a zero-sum split keeps the fixed-weight blend exact.
    eafe, em = {}, {}
    for year in sorted(intl):
        blended = float(np.expm1(intl[year]))
        if year < FIRST_EM_YEAR:
            eafe[year] = round(100.0 * blended, 2)
        else:
            split = 0.06 * rng.standard_normal()
            eafe[year] = round(100.0 * (blended - (0.4 / 0.6) * split), 2)
            em[year] = round(100.0 * (blended + split), 2)
    out["eafe_return"] = eafe
    out["em_return"] = em
    return out


MANIFEST = {
    "daily_sp_close": "sp_daily_close.csv",
    "sp_close_eoy": "sp_close_eoy.csv",
    "earnings": "sp_earnings.csv",
    "dividends": "sp_dividends.csv",
    "baa_rate": "baa_rate.csv",
    "treasury_long": "treasury_long.csv",
    "treasury_short": "treasury_short.csv",
    "bond_index": "bond_index.csv",
    "eafe_return": "eafe_returns.csv",
    "em_return": "em_returns.csv",
}


def write_csvs(history: dict, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)

    with open(outdir / MANIFEST["daily_sp_close"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "close"])
        for date, close in zip(history["daily_dates"], history["daily_close"]):
            writer.writerow([str(date), f"{close:.4f}"])

    def annual(key: str, mapping: dict, decimals: int) -> None:
        with open(outdir / MANIFEST[key], "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["year", "value"])
            for year in sorted(mapping):
                writer.writerow([year, f"{mapping[year]:.{decimals}f}"])

    annual("sp_close_eoy", history["sp_close_eoy"], 4)
    annual("earnings", history["earnings"], 4)
    annual("dividends", history["dividends"], 4)
    annual("baa_rate", history["baa_rate"], 2)
    annual("treasury_long", history["treasury_long"], 2)
    annual("treasury_short", history["treasury_short"], 2)
    annual("bond_index", history["bond_index"], 4)
    annual("eafe_return", history["eafe_return"], 2)
    annual("em_return", history["em_return"], 2)

    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(MANIFEST, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--outdir", type=Path, default=Path("data"))
    args = parser.parse_args()
    history = simulate_history(args.seed)
    write_csvs(history, args.outdir)
    print(f"sample dataset written to {args.outdir} (seed {args.seed})")


if __name__ == "__main__":
    main()
