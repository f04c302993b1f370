"""Joint innovation handling: the residual matrix, bootstrap fill of its
missing leading spans, and product-Gaussian KDE sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

#: Residual series in simulation order.
SERIES_NAMES = ("vol", "spread", "rate", "growth", "domestic", "intl", "bond")

KDE_DIM = 7
_IQR_SCALE = 1.34


class NoiseError(ValueError):
    """Residual matrix or bandwidth contract violation."""


@dataclass(frozen=True)
class ResidualMatrix:
    """Aligned innovation series, one column per equation.

    Missing entries (NaN) may only form a leading span of a column:
    series whose underlying data starts late are missing early years and
    nothing else.  ``correlation`` optionally carries the reporting
    correlation matrix, which may include extra series beyond the
    simulated columns.
    """

    start_year: int
    values: np.ndarray  # (n_years, len(SERIES_NAMES)), NaN = missing
    series_names: tuple[str, ...] = SERIES_NAMES
    correlation_names: Optional[tuple[str, ...]] = None
    correlation: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[1] != len(self.series_names):
            raise NoiseError(f"residual matrix must have {len(self.series_names)} columns")
        for j, name in enumerate(self.series_names):
            col = values[:, j]
            missing = np.isnan(col)
            if missing.any():
                lead = int(np.argmax(~missing)) if (~missing).any() else len(col)
                if missing[lead:].any():
                    raise NoiseError(f"{name}: missing entries are not a leading span")
        if (self.correlation is None) != (self.correlation_names is None):
            raise NoiseError("correlation and correlation_names must be given together")
        if self.correlation is not None:
            corr = np.asarray(self.correlation, dtype=float)
            object.__setattr__(self, "correlation", corr)
            k = len(self.correlation_names)
            if corr.shape != (k, k):
                raise NoiseError("correlation matrix shape does not match its names")

    @property
    def n_years(self) -> int:
        return self.values.shape[0]

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.start_year + self.n_years)

    @property
    def is_complete(self) -> bool:
        return not np.isnan(self.values).any()

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.series_names.index(name)]

    def observed_counts(self) -> dict[str, int]:
        return {
            name: int(np.sum(~np.isnan(self.values[:, j])))
            for j, name in enumerate(self.series_names)
        }


@dataclass(frozen=True)
class BandwidthVector:
    """Per-component Gaussian kernel widths for the residual KDE."""

    sigma: np.ndarray
    dim: int = KDE_DIM
    n_obs: int = 0

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "sigma", sigma)
        if sigma.ndim != 1 or len(sigma) != len(SERIES_NAMES):
            raise NoiseError(f"bandwidths must have {len(SERIES_NAMES)} components")
        if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise NoiseError("bandwidths must be finite and non-negative")


def fill_missing(matrix: ResidualMatrix, seed: int) -> ResidualMatrix:
    """Complete the matrix by regression fill with bootstrapped residuals.

    Incomplete columns are processed in ``series_names`` order.  Each is
    regressed (with intercept) on every currently-complete column over
    the years it is observed; a missing year is then filled with the
    fitted value plus a residual drawn uniformly with replacement from
    that regression's residuals.  Columns filled earlier join the
    regressor set for later ones.  Observed entries are never touched,
    and the result is deterministic for a fixed seed.
    """
    values = matrix.values.copy()
    incomplete = [j for j in range(values.shape[1]) if np.isnan(values[:, j]).any()]
    if len(incomplete) > 3:
        raise NoiseError("more than 3 incomplete residual columns")
    if not incomplete:
        return matrix

    complete = [j for j in range(values.shape[1]) if j not in incomplete]
    for j in complete:
        if np.isnan(values[:, j]).any():  # pragma: no cover - guarded above
            raise NoiseError("complete columns must span all years")

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    for j in incomplete:
        observed = ~np.isnan(values[:, j])
        design = np.column_stack([np.ones(values.shape[0])] + [values[:, k] for k in complete])
        n_obs, n_cols = int(observed.sum()), design.shape[1]
        if n_obs < n_cols + 2:
            raise NoiseError(
                f"{matrix.series_names[j]}: only {n_obs} co-observed years for {n_cols} regressors"
            )
        coef, *_ = np.linalg.lstsq(design[observed], values[observed, j], rcond=None)
        residuals = values[observed, j] - design[observed] @ coef
        missing_rows = np.flatnonzero(~observed)
        fitted = design[missing_rows] @ coef
        values[missing_rows, j] = fitted + rng.choice(residuals, size=len(missing_rows), replace=True)
        complete.append(j)

    return ResidualMatrix(
        matrix.start_year, values, matrix.series_names, matrix.correlation_names, matrix.correlation
    )


def bandwidths(matrix: ResidualMatrix) -> BandwidthVector:
    """Kernel widths from a dimension-adjusted rule of thumb.

    For each column, with ``s`` the sample standard deviation, ``r`` the
    interquartile range, ``N`` the number of rows and ``d`` the number
    of components::

        sigma = (4 / (d + 2)) ** (1 / (d + 4)) * N ** (-1 / (d + 4)) * min(s, r / 1.34)
    """
    if not matrix.is_complete:
        raise NoiseError("bandwidths need a complete residual matrix")
    n = matrix.n_years
    if n < 4:
        raise NoiseError("bandwidths need at least 4 rows")
    s = np.std(matrix.values, axis=0, ddof=1)
    q75, q25 = np.percentile(matrix.values, [75, 25], axis=0)
    spread = np.minimum(s, (q75 - q25) / _IQR_SCALE)
    if np.any(spread <= 0):
        name = matrix.series_names[int(np.flatnonzero(spread <= 0)[0])]
        raise NoiseError(f"{name}: zero spread, bandwidth undefined")
    d = KDE_DIM
    factor = (4.0 / (d + 2)) ** (1.0 / (d + 4)) * n ** (-1.0 / (d + 4))
    return BandwidthVector(factor * spread, d, n)


def sample_block(
    matrix: ResidualMatrix, bw: BandwidthVector, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Draw ``n`` joint innovation vectors from the residual KDE.

    Each draw picks a historical row uniformly at random and perturbs
    every component with an independent Gaussian of its bandwidth.  The
    stream consumption (all row picks, then all normals) is part of the
    reproducibility contract.
    """
    if not matrix.is_complete:
        raise NoiseError("sampling needs a complete residual matrix")
    rows = rng.integers(0, matrix.n_years, size=n)
    normals = rng.standard_normal((n, len(matrix.series_names)))
    return matrix.values[rows] + bw.sigma * normals


def sample(matrix: ResidualMatrix, bw: BandwidthVector, rng: np.random.Generator) -> np.ndarray:
    """Draw one joint innovation vector."""
    return sample_block(matrix, bw, rng, 1)[0]


def write_matrix_csv(matrix: ResidualMatrix, path) -> None:
    """Write the matrix as CSV with a year column; missing entries stay blank."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", *matrix.series_names])
        for year, row in zip(matrix.years, matrix.values):
            writer.writerow([int(year)] + ["" if np.isnan(v) else repr(float(v)) for v in row])


def read_matrix_csv(path, series_names: tuple[str, ...] = SERIES_NAMES) -> ResidualMatrix:
    """Read a matrix written by :func:`write_matrix_csv`."""
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "year" or tuple(header[1:]) != tuple(series_names):
            raise NoiseError(f"{path}: unexpected residual CSV header")
        years, rows = [], []
        for record in reader:
            if not record:
                continue
            years.append(int(record[0]))
            rows.append([np.nan if cell == "" else float(cell) for cell in record[1:]])
    if not years:
        raise NoiseError(f"{path}: no rows")
    return ResidualMatrix(years[0], np.asarray(rows, dtype=float), tuple(series_names))
