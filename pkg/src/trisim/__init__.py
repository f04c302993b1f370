"""trisim: an annual time-series model of US stocks, international stocks,
and US corporate bonds, with a seeded Monte Carlo wealth simulator."""

from .dataio import AnnualSeries, DataError, RawBundle, build_dataset, derive_series, load_bundle, realized_volatility
from .diagnostics import (
    CriticalValueTable,
    DiagnosticsReport,
    acf_l1,
    describe,
    mc_critical_values,
    moment_stats,
    normality_tests,
)
from .econometrics import (
    FitError,
    LinearFit,
    ModelSpec,
    ValuationParams,
    fit_ar1,
    fit_bond,
    fit_model,
    fit_scaled,
    fit_simple,
    fit_valuation,
    lag_selection,
    ols,
)
from .engine import (
    Cashflow,
    ConfigError,
    EnsembleResult,
    FactorOverrides,
    FactorState,
    SimConfig,
    WealthPath,
    effective_cashflow,
    glidepath,
    run_ensemble,
    simulate_path,
    step,
)
from .noise import BandwidthVector, NoiseError, ResidualMatrix, bandwidths, fill_missing, sample, sample_block

__version__ = "0.1.0"
