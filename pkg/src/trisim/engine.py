"""Wealth simulator: factor evolution, portfolio policy, cashflows, ruin.

Paths are mutually independent given RNG streams keyed by
``(master_seed, path_index)``, so results are identical no matter how
the ensemble is chunked or parallelized.  The per-path stream draws all
row picks for the horizon first, then all kernel normals; both the
single-path and the vectorized block simulator consume streams the same
way.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .econometrics import ModelSpec
from .noise import BandwidthVector, ResidualMatrix

PERCENTILE_LABELS = (10, 30, 50, 70, 90)
MAX_HORIZON = 50
CASHFLOW_FREQUENCIES = (1, 4, 12)
_CHUNK = 4096  # fixed so chunking never depends on the worker count


class ConfigError(ValueError):
    """A simulation configuration field is invalid."""

    def __init__(self, fieldname: str, message: str) -> None:
        super().__init__(f"{fieldname}: {message}")
        self.field = fieldname


class EngineError(RuntimeError):
    """The factor recursion produced a non-finite value."""


# ---------------------------------------------------------------------------
# State and configuration


@dataclass(frozen=True)
class FactorState:
    """Markov state of the factor system.

    ``log_earnings`` holds the trailing earnings window on the log
    scale, oldest first; keeping logs lets very long simulations run
    without overflowing the earnings level.
    """

    vol: float
    rate: float
    spread: float
    valuation: float
    log_earnings: np.ndarray
    year_index: int = 0

    def __post_init__(self) -> None:
        window = np.asarray(self.log_earnings, dtype=float)
        object.__setattr__(self, "log_earnings", window)
        if self.vol <= 0:
            raise ConfigError("vol", "must be positive")
        if self.rate <= 0:
            raise ConfigError("rate", "must be positive")
        if not np.all(np.isfinite(window)):
            raise ConfigError("log_earnings", "must be finite")

    @property
    def earnings_window(self) -> np.ndarray:
        """Earnings levels, oldest first (may overflow for huge horizons)."""
        return np.exp(self.log_earnings)


@dataclass(frozen=True)
class Cashflow:
    """Recurring annual cashflow, escalating from the second year on."""

    amount: float = 0.0
    sign: str = "withdraw"
    growth_rate: float = 0.0
    frequency: int = 1

    def validate(self) -> None:
        if self.amount < 0:
            raise ConfigError("cashflow.amount", "must be non-negative")
        if self.sign not in ("contribute", "withdraw"):
            raise ConfigError("cashflow.sign", "must be 'contribute' or 'withdraw'")
        if self.growth_rate <= -1:
            raise ConfigError("cashflow.growth_rate", "must be greater than -1")
        if self.frequency not in CASHFLOW_FREQUENCIES:
            raise ConfigError("cashflow.frequency", f"must be one of {CASHFLOW_FREQUENCIES}")

    @property
    def signed(self) -> float:
        return 1.0 if self.sign == "contribute" else -1.0


@dataclass(frozen=True)
class FactorOverrides:
    """Optional replacements for the fitted initial factor values."""

    vol: Optional[float] = None
    rate: Optional[float] = None
    spread: Optional[float] = None
    valuation: Optional[float] = None

    def validate(self) -> None:
        if self.vol is not None and self.vol <= 0:
            raise ConfigError("factor_overrides.vol", "must be positive")
        if self.rate is not None and self.rate <= 0:
            raise ConfigError("factor_overrides.rate", "must be positive")
        for name in ("vol", "rate", "spread", "valuation"):
            value = getattr(self, name)
            if value is not None and not np.isfinite(value):
                raise ConfigError(f"factor_overrides.{name}", "must be finite")


@dataclass(frozen=True)
class SimConfig:
    initial_wealth: float
    horizon: int
    stock_share_start: float
    stock_share_end: float
    domestic_share: float
    cashflow: Cashflow = Cashflow()
    n_paths: int = 10_000
    master_seed: int = 0
    factor_overrides: Optional[FactorOverrides] = None
    allow_nonstationary: bool = False

    def validate(self) -> None:
        if not (np.isfinite(self.initial_wealth) and self.initial_wealth > 0):
            raise ConfigError("initial_wealth", "must be positive")
        if not 1 <= self.horizon <= MAX_HORIZON:
            raise ConfigError("horizon", f"must be in 1..{MAX_HORIZON}")
        for name in ("stock_share_start", "stock_share_end", "domestic_share"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigError(name, "must be in [0, 1]")
        if self.n_paths < 100:
            raise ConfigError("n_paths", "must be at least 100")
        if self.master_seed < 0:
            raise ConfigError("master_seed", "must be non-negative")
        self.cashflow.validate()
        if self.factor_overrides is not None:
            self.factor_overrides.validate()

    def to_dict(self) -> dict:
        out = {
            "initial_wealth": self.initial_wealth,
            "horizon": self.horizon,
            "stock_share_start": self.stock_share_start,
            "stock_share_end": self.stock_share_end,
            "domestic_share": self.domestic_share,
            "cashflow": {
                "amount": self.cashflow.amount,
                "sign": self.cashflow.sign,
                "growth_rate": self.cashflow.growth_rate,
                "frequency": self.cashflow.frequency,
            },
            "n_paths": self.n_paths,
            "master_seed": self.master_seed,
            "allow_nonstationary": self.allow_nonstationary,
        }
        if self.factor_overrides is not None:
            out["factor_overrides"] = {
                name: getattr(self.factor_overrides, name)
                for name in ("vol", "rate", "spread", "valuation")
                if getattr(self.factor_overrides, name) is not None
            }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a JSON object")
        known = {
            "initial_wealth",
            "horizon",
            "stock_share_start",
            "stock_share_end",
            "domestic_share",
            "cashflow",
            "n_paths",
            "master_seed",
            "factor_overrides",
            "allow_nonstationary",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        try:
            cashflow = Cashflow(**data.get("cashflow", {}))
        except TypeError as exc:
            raise ConfigError("cashflow", str(exc)) from None
        overrides = None
        if data.get("factor_overrides") is not None:
            try:
                overrides = FactorOverrides(**data["factor_overrides"])
            except TypeError as exc:
                raise ConfigError("factor_overrides", str(exc)) from None
        try:
            config = cls(
                initial_wealth=float(data["initial_wealth"]),
                horizon=int(data["horizon"]),
                stock_share_start=float(data["stock_share_start"]),
                stock_share_end=float(data["stock_share_end"]),
                domestic_share=float(data["domestic_share"]),
                cashflow=cashflow,
                n_paths=int(data.get("n_paths", 10_000)),
                master_seed=int(data.get("master_seed", 0)),
                factor_overrides=overrides,
                allow_nonstationary=bool(data.get("allow_nonstationary", False)),
            )
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), "missing required field") from None
        config.validate()
        return config


# ---------------------------------------------------------------------------
# Deterministic pieces


def glidepath(config: SimConfig, t: int) -> tuple[float, float, float]:
    """Portfolio weights (domestic, intl, bond) at year index ``t``.

    The stock share moves linearly from its start to its end value over
    the horizon; the domestic/international split inside the stock
    sleeve is constant.
    """
    if not 0 <= t <= config.horizon:
        raise ConfigError("t", f"must be in 0..{config.horizon}")
    share = config.stock_share_start + (
        config.stock_share_end - config.stock_share_start
    ) * t / config.horizon
    return (
        share * config.domestic_share,
        share * (1.0 - config.domestic_share),
        1.0 - share,
    )


def effective_cashflow(amount, annual_return, frequency: int):
    """Year-end value of an annual amount paid in equal sub-period installments.

    Installments at sub-period ends grow at the year's constant
    exponential rate, which collapses to
    ``amount * r / T / ((1 + r)^(1/T) - 1)``; at ``r == 0`` the limit is
    the plain amount.  Accepts scalars or arrays in ``annual_return``.
    """
    r = np.asarray(annual_return, dtype=float)
    if np.any(r <= -1):
        raise ConfigError("annual_return", "must be greater than -100%")
    if frequency < 1:
        raise ConfigError("frequency", "must be a positive integer")
    tiny = np.abs(r) < 1e-12
    safe_r = np.where(tiny, 1.0, r)
    value = amount * safe_r / frequency / ((1.0 + safe_r) ** (1.0 / frequency) - 1.0)
    out = np.where(tiny, amount, value)
    return float(out) if np.isscalar(annual_return) else out


# ---------------------------------------------------------------------------
# Factor stepping


def _log_mean_exp(log_values: np.ndarray) -> np.ndarray:
    """Row-wise log of the mean of exponentials, shift-stabilized."""
    peak = np.max(log_values, axis=-1, keepdims=True)
    return (peak + np.log(np.mean(np.exp(log_values - peak), axis=-1, keepdims=True)))[..., 0]


def _advance(
    model: ModelSpec,
    vol: np.ndarray,
    rate: np.ndarray,
    spread: np.ndarray,
    valuation: np.ndarray,
    log_earnings: np.ndarray,
    z: np.ndarray,
    year_index: int,
):
    """One annual step of the factor system for a block of paths.

    ``z`` columns follow the residual-matrix order (vol, spread, rate,
    growth, domestic, intl, bond).  Returns the new factor arrays plus
    the asset log returns and earnings growth.
    """
    new_vol = np.exp(model.vol.intercept + model.vol.slope * np.log(vol) + z[:, 0])
    new_spread = model.spread.intercept + model.spread.slope * spread + z[:, 1]
    new_rate = np.exp(model.rate.intercept + model.rate.slope * np.log(rate) + z[:, 2])
    rate_change = new_rate - rate

    g = model.growth
    growth = (
        g.intercept
        + g.spread_coef * spread
        + g.vol_coef * new_vol
        + g.rate_change_coef * rate_change
        + new_vol * z[:, 3]
    )
    new_log_e = log_earnings[:, -1] + growth
    old_avg = _log_mean_exp(log_earnings)
    new_window = np.concatenate([log_earnings[:, 1:], new_log_e[:, None]], axis=1)
    avg_growth = _log_mean_exp(new_window) - old_avg

    d = model.domestic
    q = (
        d.intercept
        + d.spread_coef * spread
        + d.vol_coef * new_vol
        + d.rate_change_coef * rate_change
        + d.valuation_coef * valuation
        + new_vol * z[:, 4]
    )
    i = model.intl
    intl = (
        i.intercept
        + i.vol_coef * new_vol
        + i.rate_change_coef * rate_change
        + i.valuation_coef * valuation
        + new_vol * z[:, 5]
    )
    bond = 0.01 * rate - model.bond.default_cost - model.bond.duration * rate_change + z[:, 6]
    new_valuation = valuation + q - avg_growth - model.valuation.trend_c

    for name, arr in (
        ("vol", new_vol),
        ("rate", new_rate),
        ("spread", new_spread),
        ("valuation", new_valuation),
        ("domestic", q),
        ("intl", intl),
        ("bond", bond),
    ):
        if not np.all(np.isfinite(arr)):
            raise EngineError(f"non-finite {name} at year index {year_index}")

    return new_vol, new_rate, new_spread, new_valuation, new_window, q, intl, bond, growth


def step(
    model: ModelSpec, state: FactorState, z: np.ndarray
) -> tuple[FactorState, tuple[float, float, float], float]:
    """Advance one year from ``state`` with innovation vector ``z``.

    Returns the new state, the (domestic, intl, bond) log returns, and
    the earnings growth.  Delegates to the vectorized kernel so scalar
    and block simulations agree bit for bit.
    """
    out = _advance(
        model,
        np.array([state.vol]),
        np.array([state.rate]),
        np.array([state.spread]),
        np.array([state.valuation]),
        state.log_earnings[None, :],
        np.asarray(z, dtype=float)[None, :],
        state.year_index + 1,
    )
    new_vol, new_rate, new_spread, new_valuation, new_window, q, intl, bond, growth = out
    new_state = FactorState(
        vol=float(new_vol[0]),
        rate=float(new_rate[0]),
        spread=float(new_spread[0]),
        valuation=float(new_valuation[0]),
        log_earnings=new_window[0],
        year_index=state.year_index + 1,
    )
    return new_state, (float(q[0]), float(intl[0]), float(bond[0])), float(growth[0])


def initial_factor_state(model: ModelSpec, overrides: Optional[FactorOverrides] = None) -> FactorState:
    """Fitted end-of-sample state, with optional user overrides.

    Overrides never touch the earnings window; only the four scalar
    factors are adjustable.
    """
    init = model.initial_state
    vol, rate, spread, valuation = init.vol, init.rate, init.spread, init.valuation
    if overrides is not None:
        overrides.validate()
        vol = overrides.vol if overrides.vol is not None else vol
        rate = overrides.rate if overrides.rate is not None else rate
        spread = overrides.spread if overrides.spread is not None else spread
        valuation = overrides.valuation if overrides.valuation is not None else valuation
    return FactorState(vol, rate, spread, valuation, init.log_earnings.copy(), 0)


# ---------------------------------------------------------------------------
# Path simulation


@dataclass(frozen=True)
class WealthPath:
    """One simulated wealth trajectory, absorbed at zero on ruin."""

    wealth: np.ndarray  # horizon + 1 values, wealth[0] = initial
    ruin_year: Optional[int]
    returns_by_asset: np.ndarray  # (horizon, 3): domestic, intl, bond log returns
    path_index: int


@dataclass(frozen=True)
class EnsembleResult:
    percentile_paths: dict[int, WealthPath]
    ruin_probability: float
    mean_ruin_year: Optional[float]
    mean_final_wealth: float
    p90_final_wealth: float
    config: SimConfig
    final_wealths: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "n_paths": self.config.n_paths,
            "horizon": self.config.horizon,
            "master_seed": self.config.master_seed,
            "ruin_probability": self.ruin_probability,
            "mean_ruin_year": self.mean_ruin_year,
            "mean_final_wealth": self.mean_final_wealth,
            "p90_final_wealth": self.p90_final_wealth,
            "percentile_paths": {
                str(label): {
                    "path_index": path.path_index,
                    "ruin_year": path.ruin_year,
                    "wealth": [{"year": int(y), "wealth": float(w)} for y, w in enumerate(path.wealth)],
                }
                for label, path in sorted(self.percentile_paths.items())
            },
        }


def _require_stationary(model: ModelSpec, config: SimConfig) -> None:
    if not model.gate.passed and not config.allow_nonstationary:
        failed = ", ".join(c.name for c in model.gate.conditions if not c.ok)
        raise ConfigError(
            "allow_nonstationary",
            f"model failed the stationarity gate ({failed}); set allow_nonstationary to force",
        )


def _path_noise(
    matrix: ResidualMatrix,
    bw: BandwidthVector,
    master_seed: int,
    path_indices: np.ndarray,
    horizon: int,
) -> np.ndarray:
    """KDE innovations for a block of paths, shape (paths, horizon, 7).

    Each path owns the RNG stream seeded by ``(master_seed, path_index)``
    and consumes it in a fixed order: the horizon's row picks first,
    then the horizon-by-7 normals.
    """
    n_rows = matrix.n_years
    out = np.empty((len(path_indices), horizon, matrix.values.shape[1]))
    for j, idx in enumerate(path_indices):
        rng = np.random.default_rng(np.random.SeedSequence((master_seed, int(idx))))
        rows = rng.integers(0, n_rows, size=horizon)
        normals = rng.standard_normal((horizon, matrix.values.shape[1]))
        out[j] = matrix.values[rows] + bw.sigma * normals
    return out


def _simulate_block(
    model: ModelSpec, config: SimConfig, path_indices: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Simulate the given paths; returns (wealth, ruin_year, returns).

    ``ruin_year`` is 0 for paths that never ruin.
    """
    n = len(path_indices)
    horizon = config.horizon
    noise = _path_noise(
        model.filled_residuals, model.kde_bandwidths, config.master_seed, path_indices, horizon
    )
    start = initial_factor_state(model, config.factor_overrides)

    vol = np.full(n, start.vol)
    rate = np.full(n, start.rate)
    spread = np.full(n, start.spread)
    valuation = np.full(n, start.valuation)
    log_earnings = np.tile(start.log_earnings, (n, 1))

    wealth = np.empty((n, horizon + 1))
    wealth[:, 0] = config.initial_wealth
    ruin_year = np.zeros(n, dtype=np.int64)
    returns = np.empty((n, horizon, 3))

    cf = config.cashflow
    for year in range(1, horizon + 1):
        vol, rate, spread, valuation, log_earnings, q, intl, bond, _ = _advance(
            model, vol, rate, spread, valuation, log_earnings, noise[:, year - 1, :], year
        )
        returns[:, year - 1, 0] = q
        returns[:, year - 1, 1] = intl
        returns[:, year - 1, 2] = bond

        w_dom, w_intl, w_bond = glidepath(config, year - 1)
        portfolio = (
            w_dom * np.expm1(q) + w_intl * np.expm1(intl) + w_bond * np.expm1(bond)
        )
        amount = cf.amount * (1.0 + cf.growth_rate) ** (year - 1)
        flow = cf.signed * effective_cashflow(amount, portfolio, cf.frequency)

        alive = ruin_year == 0
        wealth[:, year] = np.where(
            alive, wealth[:, year - 1] * (1.0 + portfolio) + flow, 0.0
        )
        newly_ruined = alive & (wealth[:, year] <= 0)
        ruin_year[newly_ruined] = year
        wealth[newly_ruined, year] = 0.0

    return wealth, ruin_year, returns


def simulate_path(model: ModelSpec, config: SimConfig, path_index: int) -> WealthPath:
    """Simulate a single path; identical to the same path inside an ensemble."""
    config.validate()
    _require_stationary(model, config)
    wealth, ruin_year, returns = _simulate_block(model, config, np.array([path_index]))
    return WealthPath(
        wealth=wealth[0],
        ruin_year=int(ruin_year[0]) if ruin_year[0] else None,
        returns_by_asset=returns[0],
        path_index=path_index,
    )


def run_ensemble(model: ModelSpec, config: SimConfig, workers: int = 1) -> EnsembleResult:
    """Simulate the configured ensemble and aggregate it.

    Paths are ranked by final wealth, with ruined ties broken so that a
    later ruin ranks higher, then by path index.  Percentile paths are
    the order statistics at ``ceil(q * n_paths)``.  The result does not
    depend on ``workers``.
    """
    config.validate()
    _require_stationary(model, config)

    chunks = [
        np.arange(lo, min(lo + _CHUNK, config.n_paths))
        for lo in range(0, config.n_paths, _CHUNK)
    ]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda idx: _simulate_block(model, config, idx), chunks))
    else:
        results = [_simulate_block(model, config, idx) for idx in chunks]

    wealth = np.concatenate([r[0] for r in results])
    ruin_year = np.concatenate([r[1] for r in results])
    returns = np.concatenate([r[2] for r in results])

    final = wealth[:, -1]
    ruin_key = np.where(ruin_year == 0, np.inf, ruin_year.astype(float))
    order = np.lexsort((np.arange(config.n_paths), ruin_key, final))

    percentile_paths = {}
    for label in PERCENTILE_LABELS:
        rank = int(np.ceil(label / 100.0 * config.n_paths))
        idx = int(order[rank - 1])
        percentile_paths[label] = WealthPath(
            wealth=wealth[idx],
            ruin_year=int(ruin_year[idx]) if ruin_year[idx] else None,
            returns_by_asset=returns[idx],
            path_index=idx,
        )

    ruined = ruin_year > 0
    p90_rank = int(np.ceil(0.9 * config.n_paths))
    return EnsembleResult(
        percentile_paths=percentile_paths,
        ruin_probability=float(np.mean(ruined)),
        mean_ruin_year=float(np.mean(ruin_year[ruined])) if ruined.any() else None,
        mean_final_wealth=float(np.mean(final)),
        p90_final_wealth=float(final[order[p90_rank - 1]]),
        config=config,
        final_wealths=final,
    )


def simulate_factor_path(
    model: ModelSpec, years: int, seed: int, force: bool = False
) -> dict[str, np.ndarray]:
    """Simulate the factor system alone for ``years`` steps.

    Used for long-run stability checks; returns the log-volatility,
    log-rate, spread and valuation paths (wealth and portfolio policy
    are not involved).
    """
    if not model.gate.passed and not force:
        raise EngineError("model failed the stationarity gate")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    n_rows = model.filled_residuals.n_years
    rows = rng.integers(0, n_rows, size=years)
    normals = rng.standard_normal((years, model.filled_residuals.values.shape[1]))
    noise = model.filled_residuals.values[rows] + model.kde_bandwidths.sigma * normals

    state = initial_factor_state(model)
    vol = np.array([state.vol])
    rate = np.array([state.rate])
    spread = np.array([state.spread])
    valuation = np.array([state.valuation])
    log_earnings = state.log_earnings[None, :]

    out = {key: np.empty(years) for key in ("log_vol", "log_rate", "spread", "valuation")}
    for t in range(years):
        vol, rate, spread, valuation, log_earnings, *_ = _advance(
            model, vol, rate, spread, valuation, log_earnings, noise[t][None, :], t + 1
        )
        out["log_vol"][t] = np.log(vol[0])
        out["log_rate"][t] = np.log(rate[0])
        out["spread"][t] = spread[0]
        out["valuation"][t] = valuation[0]
    return out
