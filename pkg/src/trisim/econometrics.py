"""Regression machinery for the annual market model.

Everything here reduces to ordinary least squares on aligned annual
series: AR(1) laws for the persistent factors, a duration equation for
bond returns, the detrended cumulative valuation regression, and the
volatility-scaled return/growth regressions whose residuals become the
simulator's innovations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .dataio import AnnualSeries, align, difference, lagged
from .noise import (
    SERIES_NAMES,
    BandwidthVector,
    NoiseError,
    ResidualMatrix,
    bandwidths,
    fill_missing,
)

MODEL_SCHEMA_VERSION = "1"

#: Reporting order of the residual correlation matrix; ``valuation_ar``
#: is the valuation autoregression's innovation, which is reported but
#: never simulated (the simulator's valuation update is deterministic).
CORRELATION_NAMES = ("vol", "spread", "rate", "growth", "valuation_ar", "domestic", "intl", "bond")


class FitError(ValueError):
    """A regression cannot be estimated as specified."""


# ---------------------------------------------------------------------------
# Core OLS


@dataclass(frozen=True)
class LinearFit:
    """OLS result with the usual inference columns."""

    names: tuple[str, ...]
    coefficients: np.ndarray
    stderrs: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    residuals: np.ndarray
    n_obs: int

    @property
    def df_resid(self) -> int:
        return self.n_obs - len(self.coefficients)

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def stderr(self, name: str) -> float:
        return float(self.stderrs[self.names.index(name)])


def _collinear_columns(design: np.ndarray, names: Sequence[str]) -> list[str]:
    """Columns that lie (numerically) in the span of the others."""
    offenders = []
    for j in range(design.shape[1]):
        others = np.delete(design, j, axis=1)
        if others.shape[1] == 0:
            continue
        coef, *_ = np.linalg.lstsq(others, design[:, j], rcond=None)
        reconstruction = others @ coef
        scale = max(float(np.linalg.norm(design[:, j])), 1.0)
        if np.linalg.norm(design[:, j] - reconstruction) < 1e-8 * scale:
            offenders.append(names[j])
    return offenders


def ols(design: np.ndarray, response: np.ndarray, names: Sequence[str]) -> LinearFit:
    """Ordinary least squares with t statistics and two-sided p-values.

    The design matrix must have full column rank and at least one more
    row than columns; otherwise the error names the collinear columns.
    """
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    n, p = design.shape
    if len(names) != p:
        raise FitError("column names do not match the design matrix")
    if n < p + 1:
        raise FitError(f"need at least {p + 1} observations for {p} coefficients, got {n}")
    if np.linalg.matrix_rank(design) < p:
        offenders = _collinear_columns(design, list(names)) or list(names)
        raise FitError(f"design matrix is rank deficient; collinear columns: {', '.join(offenders)}")

    xtx = design.T @ design
    coef = np.linalg.solve(xtx, design.T @ response)
    residuals = response - design @ coef
    rss = float(residuals @ residuals)
    df = n - p
    sigma2 = rss / df
    stderrs = np.sqrt(np.diag(np.linalg.inv(xtx)) * sigma2)
    with np.errstate(divide="ignore"):
        t_stats = np.where(stderrs > 0, coef / stderrs, np.inf)
    p_values = 2.0 * stats.t.sf(np.abs(t_stats), df)

    has_const = any(np.ptp(design[:, j]) == 0 and design[0, j] != 0 for j in range(p))
    tss = float(np.sum((response - response.mean()) ** 2)) if has_const else float(response @ response)
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0

    return LinearFit(tuple(names), coef, stderrs, t_stats, np.asarray(p_values), r_squared, residuals, n)


# ---------------------------------------------------------------------------
# Factor autoregressions and the bond equation


@dataclass(frozen=True)
class Ar1Fit:
    """First-order autoregression, optionally on the log scale."""

    intercept: float
    slope: float
    log_scale: bool
    residuals: AnnualSeries
    p_value_slope_one: float
    fit: LinearFit


def fit_ar1(series: AnnualSeries, log_scale: bool = False) -> Ar1Fit:
    """Regress y(t) on [1, y(t-1)], where y is the series or its log.

    Also reports the two-sided p-value for the random-walk null
    (slope = 1).
    """
    if len(series) < 10:
        raise FitError(f"{series.name}: need at least 10 years for an AR(1) fit")
    y = series.values
    if log_scale:
        if np.any(y <= 0):
            bad = series.start_year + int(np.flatnonzero(y <= 0)[0])
            raise FitError(f"{series.name}: non-positive value at year {bad} under log scale")
        y = np.log(y)
    design = np.column_stack([np.ones(len(y) - 1), y[:-1]])
    fit = ols(design, y[1:], ("intercept", "lag"))
    slope, se = fit.coefficient("lag"), fit.stderr("lag")
    t_one = (slope - 1.0) / se if se > 0 else np.inf
    p_one = float(2.0 * stats.t.sf(abs(t_one), fit.df_resid))
    residuals = AnnualSeries(series.name, series.start_year + 1, fit.residuals)
    return Ar1Fit(fit.coefficient("intercept"), slope, log_scale, residuals, p_one, fit)


@dataclass(frozen=True)
class BondFit:
    """Bond return equation: carry at last year's rate, minus a default
    cost, minus a duration term in the rate change."""

    default_cost: float  # subtracted constant
    duration: float  # sensitivity to the rate change (in years)
    residuals: AnnualSeries
    fit: LinearFit


def fit_bond(bond: AnnualSeries, rate: AnnualSeries) -> BondFit:
    """Fit B(t) - 0.01 R(t-1) = -default_cost - duration * (R(t) - R(t-1)) + Z."""
    rate_lag = lagged(rate)
    rate_change = difference(rate)
    start, end = align(bond, rate_lag, rate_change)
    if end - start + 1 < 10:
        raise FitError("bond and rate series overlap for fewer than 10 years")
    response = bond.values_over(start, end) - 0.01 * rate_lag.values_over(start, end)
    design = np.column_stack([np.ones(end - start + 1), rate_change.values_over(start, end)])
    fit = ols(design, response, ("intercept", "rate_change"))
    residuals = AnnualSeries("bond", start, fit.residuals)
    return BondFit(-fit.coefficient("intercept"), -fit.coefficient("rate_change"), residuals, fit)


# ---------------------------------------------------------------------------
# Valuation measure


@dataclass(frozen=True)
class ValuationParams:
    """Mean-reverting detrended cumulative return-minus-growth measure.

    ``alpha``, ``beta``, ``gamma`` are the regression-form coefficients;
    ``slope_b = 1 - gamma``, ``trend_c = beta / gamma`` and
    ``mean_h = (alpha - trend_c) / gamma`` are the autoregression-form
    parameters.  ``h_series`` is the measure itself, anchored so that
    its first value equals minus the log of trailing-average earnings in
    the anchor year (the cumulative sums then telescope exactly).
    """

    alpha: float
    beta: float
    gamma: float
    slope_b: float
    trend_c: float
    mean_h: float
    window: int
    h_series: AnnualSeries
    u_residuals: AnnualSeries
    fit: Optional[LinearFit] = None

    def verify_identities(self, tol: float = 1e-10) -> None:
        if abs(self.slope_b - (1.0 - self.gamma)) > tol:
            raise FitError("slope identity violated")
        if abs(self.trend_c * self.gamma - self.beta) > tol:
            raise FitError("trend identity violated")
        if abs(self.mean_h * self.gamma - (self.alpha - self.trend_c)) > tol:
            raise FitError("mean identity violated")


def valuation_from_regression(alpha: float, beta: float, gamma: float) -> tuple[float, float, float]:
    """Map regression-form (alpha, beta, gamma) to (slope_b, trend_c, mean_h)."""
    if abs(gamma) < 1e-8:
        raise FitError("cannot identify trend c = beta/gamma: gamma is numerically zero")
    slope_b = 1.0 - gamma
    trend_c = beta / gamma
    mean_h = (alpha - trend_c) / gamma
    return slope_b, trend_c, mean_h


def fit_valuation(
    domestic: AnnualSeries,
    avg_growth: AnnualSeries,
    avg_earnings: AnnualSeries,
    window: int,
) -> ValuationParams:
    """Fit the valuation regression and build the valuation series.

    The response is the return-minus-average-growth difference; the
    regressors are an intercept, elapsed time, and the cumulative sum of
    past differences (whose coefficient enters with a minus sign).
    """
    start, end = align(domestic, avg_growth)
    n = end - start + 1
    if n < 20:
        raise FitError("valuation regression needs at least 20 aligned years")
    anchor_year = start - 1
    if anchor_year < avg_earnings.start_year:
        raise FitError(f"trailing-average earnings do not cover anchor year {anchor_year}")

    diff = domestic.values_over(start, end) - avg_growth.values_over(start, end)
    cumulative = np.concatenate([[0.0], np.cumsum(diff)[:-1]])
    design = np.column_stack([np.ones(n), np.arange(n, dtype=float), cumulative])
    fit = ols(design, diff, ("intercept", "trend", "cumulative"))

    alpha = fit.coefficient("intercept")
    beta = fit.coefficient("trend")
    gamma = -fit.coefficient("cumulative")  # the equation subtracts gamma * cumulative
    slope_b, trend_c, mean_h = valuation_from_regression(alpha, beta, gamma)

    anchor = -float(np.log(avg_earnings.value(anchor_year)))
    h_values = np.empty(n + 1)
    h_values[0] = anchor
    h_values[1:] = anchor + np.cumsum(diff) - trend_c * np.arange(1, n + 1)
    h_series = AnnualSeries("valuation", anchor_year, h_values)
    u_residuals = AnnualSeries("valuation_ar", start, fit.residuals)

    return ValuationParams(
        alpha, beta, gamma, slope_b, trend_c, mean_h, window, h_series, u_residuals, fit
    )


# ---------------------------------------------------------------------------
# Volatility-scaled regressions


@dataclass(frozen=True)
class ScaledFit:
    """Linear equation with volatility-proportional noise.

    Models ``y(t) = intercept + sum_i coef_i x_i(t) + vol_coef V(t)
    + V(t) Z(t)``, estimated by regressing ``y/V`` on ``1/V``, each
    ``x_i/V`` and a constant (the constant column's coefficient is the
    volatility loading).  ``residuals`` is the homoskedastic Z series.
    """

    intercept: float
    vol_coef: float
    coef: dict[str, float]
    residuals: AnnualSeries
    fit: LinearFit


def fit_scaled(
    response: AnnualSeries,
    regressors: Sequence[tuple[str, AnnualSeries]],
    vol: AnnualSeries,
) -> ScaledFit:
    all_series = [response, vol] + [s for _, s in regressors]
    start, end = align(*all_series)
    v = vol.values_over(start, end)
    if np.any(v <= 0):
        bad = start + int(np.flatnonzero(v <= 0)[0])
        raise FitError(f"volatility must be positive for scaling, year {bad}")
    n = end - start + 1
    columns = [1.0 / v]
    names = ["intercept"]
    for name, series in regressors:
        columns.append(series.values_over(start, end) / v)
        names.append(name)
    columns.append(np.ones(n))
    names.append("volatility")
    fit = ols(np.column_stack(columns), response.values_over(start, end) / v, names)
    coef = {name: fit.coefficient(name) for name, _ in regressors}
    residuals = AnnualSeries(response.name, start, fit.residuals)
    return ScaledFit(fit.coefficient("intercept"), fit.coefficient("volatility"), coef, residuals, fit)


# ---------------------------------------------------------------------------
# Correlation reporting


def pairwise_correlation(series_list: Sequence[AnnualSeries]) -> np.ndarray:
    """Correlation matrix over pairwise co-observed years."""
    k = len(series_list)
    corr = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            start, end = align(series_list[i], series_list[j])
            a = series_list[i].values_over(start, end)
            b = series_list[j].values_over(start, end)
            corr[i, j] = corr[j, i] = float(np.corrcoef(a, b)[0, 1])
    return corr


# ---------------------------------------------------------------------------
# Model assembly


@dataclass(frozen=True)
class Ar1Params:
    intercept: float
    slope: float


@dataclass(frozen=True)
class GrowthParams:
    intercept: float
    spread_coef: float
    vol_coef: float
    rate_change_coef: float


@dataclass(frozen=True)
class DomesticParams:
    intercept: float
    spread_coef: float
    vol_coef: float
    rate_change_coef: float
    valuation_coef: float


@dataclass(frozen=True)
class IntlParams:
    intercept: float
    vol_coef: float
    rate_change_coef: float
    valuation_coef: float


@dataclass(frozen=True)
class BondParams:
    default_cost: float
    duration: float


@dataclass(frozen=True)
class GateCondition:
    name: str
    value: float
    ok: bool


@dataclass(frozen=True)
class StationarityGate:
    conditions: tuple[GateCondition, ...]
    passed: bool


def check_stationarity(
    vol_slope: float, rate_slope: float, spread_slope: float, valuation_loading: float
) -> StationarityGate:
    """Long-run stability gate, checkable as plain inequalities.

    The three AR(1) slopes must be inside the unit interval in absolute
    value, and the (negated) valuation loading of the domestic return
    equation must lie in (0, 2) so the valuation feedback contracts.
    """
    conditions = (
        GateCondition("vol_slope", vol_slope, abs(vol_slope) < 1),
        GateCondition("rate_slope", rate_slope, abs(rate_slope) < 1),
        GateCondition("spread_slope", spread_slope, abs(spread_slope) < 1),
        GateCondition("valuation_loading", valuation_loading, 0 < valuation_loading < 2),
    )
    return StationarityGate(conditions, all(c.ok for c in conditions))


@dataclass(frozen=True)
class InitialState:
    """Last fitted historical values, the simulator's default start."""

    year: int
    vol: float
    rate: float
    spread: float
    valuation: float
    log_earnings: np.ndarray  # last `window` years, oldest first

    def __post_init__(self) -> None:
        object.__setattr__(self, "log_earnings", np.asarray(self.log_earnings, dtype=float))


@dataclass(frozen=True)
class ModelSpec:
    """Every fitted coefficient plus the innovation sample the simulator draws from."""

    window: int
    vol: Ar1Params
    rate: Ar1Params
    spread: Ar1Params
    growth: GrowthParams
    domestic: DomesticParams
    intl: IntlParams
    bond: BondParams
    valuation: ValuationParams
    residuals: ResidualMatrix
    filled_residuals: ResidualMatrix
    kde_bandwidths: BandwidthVector
    initial_state: InitialState
    gate: StationarityGate
    fill_seed: int
    version: str = MODEL_SCHEMA_VERSION

    @property
    def valuation_loading(self) -> float:
        """Mean-reversion strength of the valuation feedback (positive)."""
        return -self.domestic.valuation_coef

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "window": self.window,
            "fill_seed": self.fill_seed,
            "vol": {"intercept": self.vol.intercept, "slope": self.vol.slope},
            "rate": {"intercept": self.rate.intercept, "slope": self.rate.slope},
            "spread": {"intercept": self.spread.intercept, "slope": self.spread.slope},
            "growth": {
                "intercept": self.growth.intercept,
                "spread_coef": self.growth.spread_coef,
                "vol_coef": self.growth.vol_coef,
                "rate_change_coef": self.growth.rate_change_coef,
            },
            "domestic": {
                "intercept": self.domestic.intercept,
                "spread_coef": self.domestic.spread_coef,
                "vol_coef": self.domestic.vol_coef,
                "rate_change_coef": self.domestic.rate_change_coef,
                "valuation_coef": self.domestic.valuation_coef,
            },
            "intl": {
                "intercept": self.intl.intercept,
                "vol_coef": self.intl.vol_coef,
                "rate_change_coef": self.intl.rate_change_coef,
                "valuation_coef": self.intl.valuation_coef,
            },
            "bond": {"default_cost": self.bond.default_cost, "duration": self.bond.duration},
            "valuation": {
                "alpha": self.valuation.alpha,
                "beta": self.valuation.beta,
                "gamma": self.valuation.gamma,
                "slope_b": self.valuation.slope_b,
                "trend_c": self.valuation.trend_c,
                "mean_h": self.valuation.mean_h,
                "window": self.valuation.window,
                "h_series": _series_to_dict(self.valuation.h_series),
                "u_residuals": _series_to_dict(self.valuation.u_residuals),
            },
            "residuals": _matrix_to_dict(self.residuals),
            "filled_residuals": _matrix_to_dict(self.filled_residuals),
            "kde_bandwidths": {
                "sigma": [float(s) for s in self.kde_bandwidths.sigma],
                "dim": self.kde_bandwidths.dim,
                "n_obs": self.kde_bandwidths.n_obs,
            },
            "initial_state": {
                "year": self.initial_state.year,
                "vol": self.initial_state.vol,
                "rate": self.initial_state.rate,
                "spread": self.initial_state.spread,
                "valuation": self.initial_state.valuation,
                "log_earnings": [float(v) for v in self.initial_state.log_earnings],
            },
            "gate": {
                "passed": self.gate.passed,
                "conditions": [
                    {"name": c.name, "value": c.value, "ok": c.ok} for c in self.gate.conditions
                ],
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        if data.get("version") != MODEL_SCHEMA_VERSION:
            raise FitError(f"unsupported model schema version {data.get('version')!r}")
        val = data["valuation"]
        valuation = ValuationParams(
            alpha=val["alpha"],
            beta=val["beta"],
            gamma=val["gamma"],
            slope_b=val["slope_b"],
            trend_c=val["trend_c"],
            mean_h=val["mean_h"],
            window=val["window"],
            h_series=_series_from_dict(val["h_series"]),
            u_residuals=_series_from_dict(val["u_residuals"]),
        )
        init = data["initial_state"]
        gate = StationarityGate(
            tuple(GateCondition(c["name"], c["value"], c["ok"]) for c in data["gate"]["conditions"]),
            data["gate"]["passed"],
        )
        return cls(
            window=data["window"],
            vol=Ar1Params(**data["vol"]),
            rate=Ar1Params(**data["rate"]),
            spread=Ar1Params(**data["spread"]),
            growth=GrowthParams(**data["growth"]),
            domestic=DomesticParams(**data["domestic"]),
            intl=IntlParams(**data["intl"]),
            bond=BondParams(**data["bond"]),
            valuation=valuation,
            residuals=_matrix_from_dict(data["residuals"]),
            filled_residuals=_matrix_from_dict(data["filled_residuals"]),
            kde_bandwidths=BandwidthVector(
                np.asarray(data["kde_bandwidths"]["sigma"], dtype=float),
                data["kde_bandwidths"]["dim"],
                data["kde_bandwidths"]["n_obs"],
            ),
            initial_state=InitialState(
                year=init["year"],
                vol=init["vol"],
                rate=init["rate"],
                spread=init["spread"],
                valuation=init["valuation"],
                log_earnings=np.asarray(init["log_earnings"], dtype=float),
            ),
            gate=gate,
            fill_seed=data["fill_seed"],
        )

    def save(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "ModelSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _series_to_dict(series: AnnualSeries) -> dict:
    return {
        "name": series.name,
        "start_year": series.start_year,
        "units": series.units,
        "values": [float(v) for v in series.values],
    }


def _series_from_dict(data: dict) -> AnnualSeries:
    return AnnualSeries(data["name"], data["start_year"], np.asarray(data["values"], dtype=float), data["units"])


def _matrix_to_dict(matrix: ResidualMatrix) -> dict:
    out = {
        "start_year": matrix.start_year,
        "names": list(matrix.series_names),
        "values": [[None if np.isnan(v) else float(v) for v in row] for row in matrix.values],
    }
    if matrix.correlation is not None:
        out["correlation"] = {
            "names": list(matrix.correlation_names),
            "matrix": [[float(v) for v in row] for row in matrix.correlation],
        }
    return out


def _matrix_from_dict(data: dict) -> ResidualMatrix:
    values = np.array(
        [[np.nan if v is None else float(v) for v in row] for row in data["values"]], dtype=float
    )
    corr = data.get("correlation")
    return ResidualMatrix(
        data["start_year"],
        values,
        tuple(data["names"]),
        tuple(corr["names"]) if corr else None,
        np.asarray(corr["matrix"], dtype=float) if corr else None,
    )


def _place_residuals(
    matrix: np.ndarray, start_year: int, column: int, residuals: AnnualSeries, name: str
) -> None:
    end_year = start_year + matrix.shape[0] - 1
    if residuals.end_year != end_year or residuals.start_year < start_year:
        raise FitError(
            f"{name}: residual years {residuals.start_year}..{residuals.end_year} "
            f"do not fit the matrix range {start_year}..{end_year}"
        )
    matrix[residuals.start_year - start_year :, column] = residuals.values


def assemble_model(
    vol_fit: Ar1Fit,
    rate_fit: Ar1Fit,
    spread_fit: Ar1Fit,
    growth_fit: ScaledFit,
    domestic_fit: ScaledFit,
    intl_fit: ScaledFit,
    bond_fit: BondFit,
    valuation: ValuationParams,
    earnings: AnnualSeries,
    vol: AnnualSeries,
    rate: AnnualSeries,
    spread: AnnualSeries,
    fill_seed: int = 0,
) -> ModelSpec:
    """Package all fits, build the residual matrix, and run the gate.

    The simulated innovation matrix holds seven series; the valuation
    autoregression's innovations join only the reporting correlation
    matrix.  A failed stationarity gate does not prevent assembly: the
    returned model is flagged, and the simulator refuses it unless
    explicitly forced.
    """
    domestic_resid = domestic_fit.residuals
    start_year, end_year = domestic_resid.start_year, domestic_resid.end_year
    n_years = end_year - start_year + 1

    values = np.full((n_years, len(SERIES_NAMES)), np.nan)
    residual_series = {
        "vol": vol_fit.residuals,
        "spread": spread_fit.residuals,
        "rate": rate_fit.residuals,
        "growth": growth_fit.residuals,
        "domestic": domestic_resid,
        "intl": intl_fit.residuals,
        "bond": bond_fit.residuals,
    }
    for name, residuals in residual_series.items():
        _place_residuals(values, start_year, SERIES_NAMES.index(name), residuals, name)
    for name in ("spread", "rate", "growth"):
        if residual_series[name].start_year != start_year:
            raise FitError(f"{name}: residuals must span the full matrix range")

    corr_series = [
        valuation.u_residuals if name == "valuation_ar" else residual_series[name]
        for name in CORRELATION_NAMES
    ]
    correlation = pairwise_correlation(corr_series)
    matrix = ResidualMatrix(start_year, values, SERIES_NAMES, CORRELATION_NAMES, correlation)
    filled = fill_missing(matrix, fill_seed)
    kde_bw = bandwidths(filled)

    window = valuation.window
    if earnings.end_year < end_year or len(earnings) < window:
        raise FitError("earnings do not cover the initial-state window")
    last_earnings = earnings.values_over(end_year - window + 1, end_year)
    if np.any(last_earnings <= 0):
        raise FitError("initial-state earnings must be positive")

    domestic_params = DomesticParams(
        intercept=domestic_fit.intercept,
        spread_coef=domestic_fit.coef["spread"],
        vol_coef=domestic_fit.vol_coef,
        rate_change_coef=domestic_fit.coef["rate_change"],
        valuation_coef=domestic_fit.coef["valuation"],
    )
    gate = check_stationarity(
        vol_fit.slope, rate_fit.slope, spread_fit.slope, -domestic_params.valuation_coef
    )
    initial_state = InitialState(
        year=end_year,
        vol=vol.value(end_year),
        rate=rate.value(end_year),
        spread=spread.value(end_year),
        valuation=valuation.h_series.value(end_year),
        log_earnings=np.log(last_earnings),
    )

    return ModelSpec(
        window=window,
        vol=Ar1Params(vol_fit.intercept, vol_fit.slope),
        rate=Ar1Params(rate_fit.intercept, rate_fit.slope),
        spread=Ar1Params(spread_fit.intercept, spread_fit.slope),
        growth=GrowthParams(
            intercept=growth_fit.intercept,
            spread_coef=growth_fit.coef["spread"],
            vol_coef=growth_fit.vol_coef,
            rate_change_coef=growth_fit.coef["rate_change"],
        ),
        domestic=domestic_params,
        intl=IntlParams(
            intercept=intl_fit.intercept,
            vol_coef=intl_fit.vol_coef,
            rate_change_coef=intl_fit.coef["rate_change"],
            valuation_coef=intl_fit.coef["valuation"],
        ),
        bond=BondParams(bond_fit.default_cost, bond_fit.duration),
        valuation=valuation,
        residuals=matrix,
        filled_residuals=filled,
        kde_bandwidths=kde_bw,
        initial_state=initial_state,
        gate=gate,
        fill_seed=fill_seed,
    )


def fit_model(
    series: Mapping[str, AnnualSeries], window: int = 10, fill_seed: int = 0
) -> ModelSpec:
    """Fit the complete model from a derived-series map.

    Expects the keys produced by :func:`trisim.dataio.build_dataset`:
    volatility, rate, spread, domestic, intl, bond, growth, earnings,
    avg_earnings, avg_growth.
    """
    vol = series["volatility"]
    rate = series["rate"]
    spread = series["spread"]

    vol_fit = fit_ar1(vol, log_scale=True)
    rate_fit = fit_ar1(rate, log_scale=True)
    spread_fit = fit_ar1(spread, log_scale=False)
    bond_fit = fit_bond(series["bond"], rate)
    valuation = fit_valuation(series["domestic"], series["avg_growth"], series["avg_earnings"], window)

    rate_change = difference(rate)
    spread_lag = lagged(spread)
    valuation_lag = lagged(valuation.h_series)

    growth_fit = fit_scaled(
        series["growth"], [("spread", spread_lag), ("rate_change", rate_change)], vol
    )
    domestic_fit = fit_scaled(
        series["domestic"],
        [("spread", spread_lag), ("rate_change", rate_change), ("valuation", valuation_lag)],
        vol,
    )
    intl_fit = fit_scaled(
        series["intl"], [("rate_change", rate_change), ("valuation", valuation_lag)], vol
    )

    return assemble_model(
        vol_fit,
        rate_fit,
        spread_fit,
        growth_fit,
        domestic_fit,
        intl_fit,
        bond_fit,
        valuation,
        series["earnings"],
        vol,
        rate,
        spread,
        fill_seed,
    )


# ---------------------------------------------------------------------------
# Window selection and the two-factor preset


@dataclass(frozen=True)
class WindowSelectionRow:
    window: int
    r_squared: float
    report: "object"  # DiagnosticsReport; typed loosely to avoid an import cycle
    valuation: ValuationParams


def lag_selection(
    domestic: AnnualSeries, earnings: AnnualSeries, windows: Sequence[int] = range(1, 11)
) -> list[WindowSelectionRow]:
    """Refit the valuation regression per averaging window and report
    residual diagnostics alongside R-squared."""
    from . import dataio, diagnostics

    rows = []
    for window in windows:
        if not 1 <= window <= 10:
            raise FitError(f"window must be in 1..10, got {window}")
        e_bar = dataio.trailing_average(earnings, window)
        g_bar = dataio.log_growth(e_bar, "avg_growth")
        valuation = fit_valuation(domestic, g_bar, e_bar, window)
        report = diagnostics.describe(valuation.u_residuals.values)
        rows.append(WindowSelectionRow(window, valuation.fit.r_squared, report, valuation))
    return rows


@dataclass(frozen=True)
class DurationEquation:
    """Return equation of the two-factor preset: level in volatility,
    sensitivity to the rate change, and a plain constant."""

    vol_coef: float
    rate_change_coef: float
    intercept: float


@dataclass(frozen=True)
class SimpleModelSpec:
    """Two-factor preset (volatility and corporate rate only).

    Fitting-only: the simulator never runs this system, but its
    normalized-return means, duration equations and residual
    correlations are useful reference output.
    """

    normalized_mean_domestic: float
    normalized_mean_intl: float
    domestic: DurationEquation
    intl: DurationEquation
    vol: Ar1Params
    rate: Ar1Params
    bond: BondParams
    corr5_names: tuple[str, ...]
    corr5: np.ndarray
    corr3_names: tuple[str, ...]
    corr3: np.ndarray


def fit_simple(series: Mapping[str, AnnualSeries], window: int = 10) -> SimpleModelSpec:
    vol, rate = series["volatility"], series["rate"]
    rate_change = difference(rate)

    def normalized_mean(returns: AnnualSeries) -> float:
        start, end = align(returns, vol)
        return float(np.mean(returns.values_over(start, end) / vol.values_over(start, end)))

    domestic_fit = fit_scaled(series["domestic"], [("rate_change", rate_change)], vol)
    intl_fit = fit_scaled(series["intl"], [("rate_change", rate_change)], vol)
    vol_fit = fit_ar1(vol, log_scale=True)
    rate_fit = fit_ar1(rate, log_scale=True)
    bond_fit = fit_bond(series["bond"], rate)
    growth_fit = fit_scaled(series["growth"], [], vol)
    valuation = fit_valuation(series["domestic"], series["avg_growth"], series["avg_earnings"], window)

    corr5_series = [
        vol_fit.residuals,
        rate_fit.residuals,
        domestic_fit.residuals,
        intl_fit.residuals,
        bond_fit.residuals,
    ]
    corr3_series = [vol_fit.residuals, growth_fit.residuals, valuation.u_residuals]

    def duration(fit: ScaledFit) -> DurationEquation:
        return DurationEquation(fit.vol_coef, fit.coef["rate_change"], fit.intercept)

    return SimpleModelSpec(
        normalized_mean_domestic=normalized_mean(series["domestic"]),
        normalized_mean_intl=normalized_mean(series["intl"]),
        domestic=duration(domestic_fit),
        intl=duration(intl_fit),
        vol=Ar1Params(vol_fit.intercept, vol_fit.slope),
        rate=Ar1Params(rate_fit.intercept, rate_fit.slope),
        bond=BondParams(bond_fit.default_cost, bond_fit.duration),
        corr5_names=("vol", "rate", "domestic", "intl", "bond"),
        corr5=pairwise_correlation(corr5_series),
        corr3_names=("vol", "growth", "valuation_ar"),
        corr3=pairwise_correlation(corr3_series),
    )
